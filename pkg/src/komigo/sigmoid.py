"""Closed-form winrate-curve math.

The winrate of the player to move, as a function of a virtual komi
correction x, is modeled by a two-parameter logistic curve:

    winrate(x) = 1 / (1 + exp(-beta * (alpha + signed_komi + x)))

alpha is the expected board-point lead of the current player, beta the
inverse scale (steepness), and signed_komi the game komi seen from the
current player (positive for White, negative for Black).  Everything here
is a pure function on value types.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .goban import BLACK, WHITE

BETA_MIN = 1e-4
BETA_MAX = 1e3


@dataclass(frozen=True)
class SigmoidParams:
    """(alpha, beta) pair describing one position's winrate curve.

    beta must be positive; values outside [BETA_MIN, BETA_MAX] are clamped
    to keep logits and the closed-form interval average well conditioned.
    """

    alpha: float
    beta: float

    def __post_init__(self):
        if not self.beta > 0:
            raise ValueError(f"beta must be positive, got {self.beta}")
        object.__setattr__(self, "beta", float(min(max(self.beta, BETA_MIN), BETA_MAX)))
        object.__setattr__(self, "alpha", float(self.alpha))


@dataclass(frozen=True)
class KomiContext:
    """Game komi plus whose turn it is; signed_komi is the current player's view."""

    komi: float
    current_player: int

    @property
    def signed_komi(self) -> float:
        return self.komi if self.current_player == WHITE else -self.komi


def signed_komi(komi: float, current_player: int) -> float:
    return komi if current_player == WHITE else -komi


def sigma(x, alpha: float, beta: float):
    """Logistic curve 1/(1+exp(-beta*(alpha+x))); accepts scalars or arrays."""
    if not beta > 0:
        raise ValueError(f"beta must be positive, got {beta}")
    x_arr = np.asarray(x, dtype=np.float64)
    t = beta * (alpha + np.atleast_1d(x_arr))
    out = np.empty_like(t)
    pos = t >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-t[pos]))
    ez = np.exp(t[~pos])
    out[~pos] = ez / (1.0 + ez)
    if x_arr.ndim == 0:
        return float(out[0])
    return out.reshape(x_arr.shape)


def log_sigma(t):
    """log(1/(1+exp(-t))), stable for large |t|."""
    return -np.logaddexp(0.0, -np.asarray(t, dtype=np.float64))


def logit(u: float) -> float:
    if not 0.0 < u < 1.0:
        raise ValueError(f"u must be in (0,1), got {u}")
    return math.log(u / (1.0 - u))


def rho(x, ctx: KomiContext, params: SigmoidParams):
    """Current player's winrate with x virtual bonus points at the given komi."""
    return sigma(np.asarray(x, dtype=np.float64) + ctx.signed_komi, params.alpha, params.beta)


def invert_rho(u: float, ctx: KomiContext, params: SigmoidParams) -> float:
    """The correction x with rho(x) = u."""
    return logit(u) / params.beta - params.alpha - ctx.signed_komi


def mu(y: float, a_hat: float, b_hat: float, kbar: float) -> float:
    """Average of the winrate curve sigma(x + kbar, a_hat, b_hat) over [0, y].

    Closed form; mu(0) is the plain winrate at the official komi.  Used as
    the leaf value of the margin-seeking agent.
    """
    if not b_hat > 0:
        raise ValueError(f"b_hat must be positive, got {b_hat}")
    if y == 0:
        return float(sigma(kbar, a_hat, b_hat))
    a = abs(a_hat + kbar)
    b = abs(a_hat + kbar + y)
    val = 0.5 + (b - a) / (2.0 * y) - (float(log_sigma(b_hat * b)) - float(log_sigma(b_hat * a))) / (b_hat * y)
    # guard against rounding just outside (0,1) for extreme parameters
    return float(min(max(val, 1e-15), 1.0 - 1e-15))


def lambda_extremum(lam: float, ctx: KomiContext, params: SigmoidParams) -> float:
    """Komi correction x at which the curve hits (1-lam)*rho(0) + lam/2.

    Positive when the current player is behind (a virtual bonus), negative
    when ahead (a malus); exactly 0 at lam=0.
    """
    if not 0.0 <= lam <= 1.0:
        raise ValueError(f"lambda must be in [0,1], got {lam}")
    if lam == 0.0:
        return 0.0
    rho0 = float(rho(0.0, ctx, params))
    if not 0.0 < rho0 < 1.0:
        # saturated curve; fall back to the even-game correction
        return -(params.alpha + ctx.signed_komi)
    pi_lam = (1.0 - lam) * rho0 + lam * 0.5
    return invert_rho(pi_lam, ctx, params)


def sample_komi(p_empty: SigmoidParams, u: float) -> float:
    """Draw a half-integer komi from the net's own curve at the empty board.

    K = 0.5 + floor(alpha - logit(u)/beta): an approximately logistic
    distribution centered near the net's fair komi alpha with scale 1/beta.
    """
    if not 0.0 < u < 1.0:
        raise ValueError(f"u must be in (0,1), got {u}")
    return 0.5 + math.floor(p_empty.alpha - logit(u) / p_empty.beta)


def branch_komi(p_s: SigmoidParams, current_player: int) -> float:
    """Half-integer komi that the curve considers even at this position.

    k' = 0.5 + floor(alpha) for Black to move, 0.5 + floor(-alpha) for White,
    so the branched game starts with winrate about one half.
    """
    a = p_s.alpha if current_player == BLACK else -p_s.alpha
    return 0.5 + math.floor(a)


def winrate_curve(ctx: KomiContext, params: SigmoidParams, x_range: float, points: int = 41):
    """Sampled (x, rho(x)) pairs over [-x_range, +x_range]."""
    xs = np.linspace(-x_range, x_range, points)
    return xs, rho(xs, ctx, params)
