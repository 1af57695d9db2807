"""Strength measurement: paired matches, maximum-likelihood Elo, PCA panel.

Elo model: P(first beats second) = 1 / (1 + exp((s2 - s1) / c)), c = 400 by
convention.  Round-robin scores are fitted by maximum likelihood (solved
with Bradley-Terry minorization steps, convergence checked on the true
gradient), anchored so the first net scores 0.

Panel evaluation: a net plays a fixed panel, its vector of white-side
winrates is projected on the principal factor of a covariance PCA fitted
once on historical results.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import goban, mcts
from .goban import BLACK, WHITE, GameRecord, Move


@dataclass
class MatchResult:
    net_a: str
    net_b: str
    games: int
    a_wins_as_white: int
    a_wins_as_black: int
    komi: float
    completed: int = 0
    partial: bool = False

    @property
    def a_wins(self) -> int:
        return self.a_wins_as_white + self.a_wins_as_black


class DisconnectedTournamentError(Exception):
    pass


def elo_win_prob(s1: float, s2: float, c: float = 400.0) -> float:
    """Probability the first rating beats the second."""
    if not c > 0:
        raise ValueError("elo scale c must be positive")
    return 1.0 / (1.0 + math.exp((s2 - s1) / c))


def run_match(
    eval_a,
    eval_b,
    games: int,
    komi: float,
    search: mcts.SearchConfig,
    seed: int = 0,
    board_size: int = 7,
    opening_random_moves: int = 2,
    collect_games: bool = False,
    name_a: str = "A",
    name_b: str = "B",
    colors: str = "alternate",
):
    """Paired match between evaluator A and B, no root noise.

    `colors`: "alternate" (default), or "a_white"/"a_black" to pin A's
    color for every game.  The first `opening_random_moves` moves of each
    game are sampled at Gibbs temperature 1 so a match is not one repeated
    game; the rest are greedy.  Deterministic for a given seed.  A
    per-game engine failure aborts the match and flags the partial result.
    """
    if games <= 0 or games % 2 != 0:
        raise ValueError("games must be a positive even number")
    if colors not in ("alternate", "a_white", "a_black"):
        raise ValueError(f"bad colors mode {colors!r}")
    goban.check_komi(komi)
    rng = np.random.default_rng(seed)
    result = MatchResult(net_a=name_a, net_b=name_b, games=games, a_wins_as_white=0,
                         a_wins_as_black=0, komi=komi)
    records = []
    for g in range(games):
        if colors == "alternate":
            a_is_white = g % 2 == 0
        else:
            a_is_white = colors == "a_white"
        engines = {
            WHITE: eval_a if a_is_white else eval_b,
            BLACK: eval_b if a_is_white else eval_a,
        }
        try:
            state = goban.new_board(board_size)
            moves = []
            while not state.is_over() and state.move_number < 500:
                c_temp = 1.0 if len(moves) < opening_random_moves else 0.0
                move_idx, _ = mcts.genmove(
                    state, komi, search, engines[state.to_move],
                    rng=rng, add_noise=False, c_temp=c_temp,
                )
                moves.append(Move.from_index(move_idx, board_size))
                state = goban.play_index(state, move_idx)
            win = goban.winner(state, komi)
        except Exception:
            result.partial = True
            break
        result.completed += 1
        a_color = WHITE if a_is_white else BLACK
        if win == a_color:
            if a_is_white:
                result.a_wins_as_white += 1
            else:
                result.a_wins_as_black += 1
        if collect_games:
            records.append(
                GameRecord(
                    initial_state=goban.new_board(board_size),
                    komi=komi, moves=moves, result=win,
                    game_id=f"match{g:04d}",
                )
            )
    if collect_games:
        return result, records
    return result


def mle_elo(results: list, c: float = 400.0, tol: float = 1e-8, max_iter: int = 200_000) -> dict:
    """Maximum-likelihood Elo scores from match results.

    Returns {net id: score}, anchored at the first net (sorted order) = 0.
    Raises DisconnectedTournamentError when the result graph does not
    connect all nets.
    """
    if not c > 0:
        raise ValueError("elo scale c must be positive")
    nets = sorted({r.net_a for r in results} | {r.net_b for r in results})
    index = {n: i for i, n in enumerate(nets)}
    n = len(nets)
    wins = np.zeros((n, n))
    for r in results:
        i, j = index[r.net_a], index[r.net_b]
        played = r.completed if r.partial else r.games
        wins[i, j] += r.a_wins
        wins[j, i] += played - r.a_wins

    # connectivity
    adj = (wins + wins.T) > 0
    seen = {0}
    frontier = [0]
    while frontier:
        u = frontier.pop()
        for v in np.nonzero(adj[u])[0]:
            if v not in seen:
                seen.add(int(v))
                frontier.append(int(v))
    if len(seen) != n:
        missing = [nets[i] for i in range(n) if i not in seen]
        raise DisconnectedTournamentError(f"nets not connected to {nets[0]}: {missing}")

    total = wins + wins.T
    w_i = wins.sum(axis=1)
    gamma = np.ones(n)
    scores = np.zeros(n)
    for _ in range(max_iter):
        # minorization step on Bradley-Terry strengths
        denom = np.zeros(n)
        for i in range(n):
            js = np.nonzero(total[i])[0]
            denom[i] = (total[i, js] / (gamma[i] + gamma[js])).sum()
        gamma = np.where(denom > 0, np.maximum(w_i, 1e-12) / np.maximum(denom, 1e-300), gamma)
        gamma = gamma / gamma[0]
        scores = c * np.log(gamma)
        # true likelihood gradient (natural parameters)
        p = 1.0 / (1.0 + np.exp((scores[None, :] - scores[:, None]) / c))
        grad = (wins - total * p).sum(axis=1) / c
        grad[0] = 0.0  # anchored
        if np.linalg.norm(grad) < tol:
            break
    else:
        raise RuntimeError("mle_elo did not converge")
    return {net: float(scores[index[net]]) for net in nets}


@dataclass
class PanelWeights:
    weights: np.ndarray  # unit-norm principal factor loadings
    center: np.ndarray  # column means of the fit history
    top_eigenvalue: float


def fit_panel_weights(history: np.ndarray) -> PanelWeights:
    """Principal factor of the covariance of historical panel winrates.

    `history` is (nets, panel size) with entries in [0, 1].  The sign is
    fixed so the loadings sum nonnegative (strong nets should project
    high).  Duplicated rows (zero covariance) are rejected.
    """
    history = np.asarray(history, dtype=np.float64)
    if history.ndim != 2 or history.shape[0] < 2:
        raise ValueError("need at least two result rows")
    if np.any(history < 0) or np.any(history > 1):
        raise ValueError("winrates must be within [0, 1]")
    center = history.mean(axis=0)
    cov = np.cov(history, rowvar=False, ddof=1)
    cov = np.atleast_2d(cov)
    if not np.any(cov):
        raise ValueError("zero covariance: all result rows identical")
    eigenvalues, eigenvectors = np.linalg.eigh(cov)
    top = eigenvectors[:, -1]
    if top.sum() < 0:
        top = -top
    return PanelWeights(
        weights=top, center=center, top_eigenvalue=float(eigenvalues[-1])
    )


def panel_evaluate(row, weights: PanelWeights) -> float:
    """Principal-component score of one net's panel winrate vector."""
    row = np.asarray(row, dtype=np.float64)
    if row.shape != weights.weights.shape:
        raise ValueError(
            f"row length {row.shape} does not match panel size {weights.weights.shape}"
        )
    return float((row - weights.center) @ weights.weights)


def detect_cycles(results: list) -> list:
    """Triples (a, b, c) where a beats b, b beats c, c beats a on majority.

    Reporting aid for the intransitivity phenomenon; not used by scoring.
    """
    beats = {}
    for r in results:
        played = r.completed if r.partial else r.games
        if r.a_wins * 2 > played:
            beats.setdefault(r.net_a, set()).add(r.net_b)
        elif r.a_wins * 2 < played:
            beats.setdefault(r.net_b, set()).add(r.net_a)
    cycles = []
    for a in beats:
        for b in beats.get(a, ()):
            for c in beats.get(b, ()):
                if a in beats.get(c, ()):
                    cycles.append(tuple(sorted((a, b, c))))
    return sorted(set(cycles))


def save_results(path, results: list) -> None:
    with open(path, "a") as fh:
        for r in results:
            fh.write(
                f"{r.net_a} {r.net_b} {r.games} {r.a_wins_as_white} "
                f"{r.a_wins_as_black} {r.komi} {r.completed} {int(r.partial)}\n"
            )


def load_results(path) -> list:
    out = []
    with open(path) as fh:
        for line in fh:
            parts = line.split()
            if not parts:
                continue
            out.append(
                MatchResult(
                    net_a=parts[0],
                    net_b=parts[1],
                    games=int(parts[2]),
                    a_wins_as_white=int(parts[3]),
                    a_wins_as_black=int(parts[4]),
                    komi=float(parts[5]),
                    completed=int(parts[6]),
                    partial=bool(int(parts[7])),
                )
            )
    return out
