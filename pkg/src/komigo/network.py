"""Residual convolutional network with a policy head and twin value heads.

The twin heads emit alpha (expected point lead of the player to move) and
beta_star, mapped to the sigmoid scale via beta = c_beta * exp(beta_star)
so beta stays positive.  Everything is plain numpy in float64: forward,
loss, and hand-written backprop (checked against finite differences).

Board symmetry: forward canonicalizes the position's orientation before
the convolutions (lexicographically smallest of the 8 dihedral transforms
of the plane stack) and maps the board logits back through the inverse
transform.  The output is therefore exactly equivariant under the 8 board
symmetries for any weights, and every orientation of a position shares
one set of learned features.  Value heads end in global mean pooling, so
alpha and beta are invariant by construction.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .sigmoid import BETA_MAX, BETA_MIN

POLICY_CHANNELS = 8
VALUE_CHANNELS = 4
VALUE_HIDDEN = 16

# offset order for the 9 taps of a 3x3 kernel
_OFFSETS = [(-1, -1), (-1, 0), (-1, 1), (0, -1), (0, 0), (0, 1), (1, -1), (1, 0), (1, 1)]


class TrainingDivergedError(Exception):
    pass


class WeightFormatError(Exception):
    pass


@dataclass(frozen=True)
class NetworkConfig:
    blocks: int = 3
    filters: int = 128
    input_planes: int = 17
    c_beta: float = 0.1
    l2_coeff: float = 1e-4

    def __post_init__(self):
        if self.blocks < 1 or self.filters < 1:
            raise ValueError("blocks and filters must be >= 1")
        if self.input_planes not in (17, 18):
            raise ValueError("input_planes must be 17 or 18")
        if not self.c_beta > 0:
            raise ValueError("c_beta must be positive")
        if self.l2_coeff < 0:
            raise ValueError("l2_coeff must be >= 0")


@dataclass
class NetworkOutput:
    policy: np.ndarray  # probabilities over N*N+1 moves
    logits: np.ndarray
    alpha: float
    beta_star: float
    beta: float  # c_beta * exp(beta_star), clamped to the sigmoid range


_COL_INDEX_CACHE: dict = {}
_DIHEDRAL_CACHE: dict = {}


def _col_index(n: int) -> np.ndarray:
    """Gather indices for 3x3 same-padding im2col; n*n is the zero slot."""
    idx = _COL_INDEX_CACHE.get(n)
    if idx is None:
        idx = np.full((9, n * n), n * n, dtype=np.int64)
        for k, (dr, dc) in enumerate(_OFFSETS):
            for r in range(n):
                for c in range(n):
                    rr, cc = r + dr, c + dc
                    if 0 <= rr < n and 0 <= cc < n:
                        idx[k, r * n + c] = rr * n + cc
        _COL_INDEX_CACHE[n] = idx
    return idx


def dihedral_perms(n: int):
    """(perms, inv_perms): transformed.flat[q] = original.flat[perms[g][q]]."""
    cached = _DIHEDRAL_CACHE.get(n)
    if cached is None:
        board = np.arange(n * n).reshape(n, n)
        perms = []
        for flip in (False, True):
            for rot in range(4):
                m = np.fliplr(board) if flip else board
                perms.append(np.rot90(m, rot).reshape(-1).copy())
        perms = np.array(perms)
        inv = np.argsort(perms, axis=1)
        cached = (perms, inv)
        _DIHEDRAL_CACHE[n] = cached
    return cached


def _canonical_orientation(planes_flat: np.ndarray, n: int) -> int:
    """Index of the dihedral transform whose position bytes are smallest.

    Keyed on the newest own/opponent stone planes (the current position);
    history frames ride along under the same transform.
    """
    perms, _ = dihedral_perms(n)
    key_planes = (planes_flat[[0, 8]] > 0.5).astype(np.uint8)
    best_g, best_key = 0, None
    for g in range(8):
        key = key_planes[:, perms[g]].tobytes()
        if best_key is None or key < best_key:
            best_g, best_key = g, key
    return best_g


def init_params(cfg: NetworkConfig, rng: np.random.Generator) -> dict:
    params: dict = {}

    def conv3(name, out_ch, in_ch):
        std = np.sqrt(2.0 / (9.0 * in_ch))
        params[name + ".w"] = rng.normal(0.0, std, size=(out_ch, in_ch, 9))
        params[name + ".b"] = np.zeros(out_ch)

    def dense(name, out_dim, in_dim, scale=None):
        std = np.sqrt(2.0 / in_dim) if scale is None else scale
        params[name + ".w"] = rng.normal(0.0, std, size=(out_dim, in_dim))
        params[name + ".b"] = np.zeros(out_dim)

    conv3("stem", cfg.filters, cfg.input_planes)
    for i in range(cfg.blocks):
        conv3(f"block{i}.a", cfg.filters, cfg.filters)
        conv3(f"block{i}.b", cfg.filters, cfg.filters)
    dense("policy.conv", POLICY_CHANNELS, cfg.filters)
    dense("policy.point", 1, POLICY_CHANNELS)
    dense("policy.pass", 1, POLICY_CHANNELS)
    for head in ("alpha", "beta"):
        dense(f"{head}.conv", VALUE_CHANNELS, cfg.filters)
        dense(f"{head}.fc1", VALUE_HIDDEN, VALUE_CHANNELS)
        dense(f"{head}.fc2", 1, VALUE_HIDDEN, scale=0.01)
    return params


def _conv3(x: np.ndarray, w: np.ndarray, b: np.ndarray, n: int):
    """x: (B, C, n*n) -> (B, F, n*n); returns (out, col) for backprop."""
    batch, in_ch, _ = x.shape
    idx = _col_index(n)
    x_ext = np.concatenate([x, np.zeros((batch, in_ch, 1))], axis=2)
    col = x_ext[:, :, idx].reshape(batch, in_ch * 9, n * n)
    w_mat = w.reshape(w.shape[0], in_ch * 9)
    out = np.einsum("fk,bkp->bfp", w_mat, col) + b[None, :, None]
    return out, col


def _conv3_backward(dout, col, w, x_shape, n):
    batch, in_ch, _ = x_shape
    w_mat = w.reshape(w.shape[0], in_ch * 9)
    d_mat = np.einsum("bfp,bkp->fk", dout, col)
    dw = d_mat.reshape(w.shape)
    db = dout.sum(axis=(0, 2))
    dcol = np.einsum("fk,bfp->bkp", w_mat, dout).reshape(batch, in_ch, 9, n * n)
    dx_ext = np.zeros((batch, in_ch, n * n + 1))
    idx = _col_index(n)
    for k in range(9):
        dx_ext[:, :, idx[k]] += dcol[:, :, k, :]
    return dw, db, dx_ext[:, :, : n * n]


class Network:
    """Parameter container plus forward/loss/backprop."""

    def __init__(self, cfg: NetworkConfig, params: Optional[dict] = None, seed: int = 0):
        self.cfg = cfg
        self.params = params if params is not None else init_params(cfg, np.random.default_rng(seed))
        self._check_shapes()

    def _check_shapes(self):
        ref = init_params(self.cfg, np.random.default_rng(0))
        if set(ref) != set(self.params):
            missing = set(ref) ^ set(self.params)
            raise WeightFormatError(f"parameter names do not match config: {sorted(missing)}")
        for name, arr in ref.items():
            if self.params[name].shape != arr.shape:
                raise WeightFormatError(
                    f"tensor {name} has shape {self.params[name].shape}, expected {arr.shape}"
                )

    def copy(self) -> "Network":
        return Network(self.cfg, {k: v.copy() for k, v in self.params.items()})

    # ----- forward -----

    def forward(self, planes: np.ndarray):
        """planes: (B, P, N, N) or (P, N, N).  Returns (result dict, cache)."""
        single = planes.ndim == 3
        if single:
            planes = planes[None]
        batch, p_in, n, _ = planes.shape
        if p_in != self.cfg.input_planes:
            raise ValueError(f"expected {self.cfg.input_planes} input planes, got {p_in}")
        pr = self.params
        x_raw = planes.reshape(batch, p_in, n * n).astype(np.float64)

        perms, inv_perms = dihedral_perms(n)
        gs = np.array([_canonical_orientation(x_raw[b], n) for b in range(batch)])
        x = np.take_along_axis(x_raw, perms[gs][:, None, :], axis=2)
        cache = {"x": x, "n": n, "gs": gs}

        h, col = _conv3(x, pr["stem.w"], pr["stem.b"], n)
        cache["stem"] = (col, h.copy())
        h = np.maximum(h, 0.0)
        for i in range(self.cfg.blocks):
            a_pre, col_a = _conv3(h, pr[f"block{i}.a.w"], pr[f"block{i}.a.b"], n)
            a = np.maximum(a_pre, 0.0)
            b_pre, col_b = _conv3(a, pr[f"block{i}.b.w"], pr[f"block{i}.b.b"], n)
            out_pre = h + b_pre
            cache[f"block{i}"] = (h, col_a, a_pre, a, col_b, out_pre)
            h = np.maximum(out_pre, 0.0)
        cache["trunk"] = h

        # policy head; board logits are produced in the canonical frame and
        # mapped back to the input orientation
        pc_pre = np.einsum("oc,bcp->bop", pr["policy.conv.w"], h) + pr["policy.conv.b"][None, :, None]
        pc = np.maximum(pc_pre, 0.0)
        point_c = np.einsum("oc,bcp->bop", pr["policy.point.w"], pc)[:, 0, :] + pr["policy.point.b"]
        pooled = pc.mean(axis=2)
        pass_logit = pooled @ pr["policy.pass.w"][0] + pr["policy.pass.b"][0]
        point = np.take_along_axis(point_c, inv_perms[gs], axis=1)
        logits = np.concatenate([point, pass_logit[:, None]], axis=1)
        cache["policy"] = (pc_pre, pc, pooled)

        scalars = {}
        for head in ("alpha", "beta"):
            vc_pre = np.einsum("oc,bcp->bop", pr[f"{head}.conv.w"], h) + pr[f"{head}.conv.b"][None, :, None]
            vc = np.maximum(vc_pre, 0.0)
            gv = vc.mean(axis=2)
            f1_pre = gv @ pr[f"{head}.fc1.w"].T + pr[f"{head}.fc1.b"]
            f1 = np.maximum(f1_pre, 0.0)
            out = f1 @ pr[f"{head}.fc2.w"].T + pr[f"{head}.fc2.b"]
            scalars[head] = out[:, 0]
            cache[head] = (vc_pre, vc, gv, f1_pre, f1)

        result = {
            "logits": logits,
            "alpha": scalars["alpha"],
            "beta_star": scalars["beta"],
            "single": single,
        }
        return result, cache

    def evaluate(self, planes: np.ndarray) -> NetworkOutput:
        """Single-position fast path: same arithmetic as forward, 2-D only."""
        p_in, n, _ = planes.shape
        if p_in != self.cfg.input_planes:
            raise ValueError(f"expected {self.cfg.input_planes} input planes, got {p_in}")
        pr = self.params
        nn = n * n
        x = planes.reshape(p_in, nn).astype(np.float64)
        perms, inv_perms = dihedral_perms(n)
        g = _canonical_orientation(x, n)
        x = x[:, perms[g]]
        idx = _col_index(n)

        def conv3(h, w, b):
            c = h.shape[0]
            h_ext = np.concatenate([h, np.zeros((c, 1))], axis=1)
            col = h_ext[:, idx].reshape(c * 9, nn)
            return w.reshape(w.shape[0], c * 9) @ col + b[:, None]

        h = conv3(x, pr["stem.w"], pr["stem.b"])
        np.maximum(h, 0.0, out=h)
        for i in range(self.cfg.blocks):
            a = conv3(h, pr[f"block{i}.a.w"], pr[f"block{i}.a.b"])
            np.maximum(a, 0.0, out=a)
            h = h + conv3(a, pr[f"block{i}.b.w"], pr[f"block{i}.b.b"])
            np.maximum(h, 0.0, out=h)

        pc = pr["policy.conv.w"] @ h + pr["policy.conv.b"][:, None]
        np.maximum(pc, 0.0, out=pc)
        point = (pr["policy.point.w"] @ pc)[0] + pr["policy.point.b"][0]
        pass_logit = pc.mean(axis=1) @ pr["policy.pass.w"][0] + pr["policy.pass.b"][0]
        logits = np.empty(nn + 1)
        logits[:nn] = point[inv_perms[g]]
        logits[nn] = pass_logit

        scalars = {}
        for head in ("alpha", "beta"):
            vc = pr[f"{head}.conv.w"] @ h + pr[f"{head}.conv.b"][:, None]
            np.maximum(vc, 0.0, out=vc)
            f1 = pr[f"{head}.fc1.w"] @ vc.mean(axis=1) + pr[f"{head}.fc1.b"]
            np.maximum(f1, 0.0, out=f1)
            scalars[head] = float((pr[f"{head}.fc2.w"] @ f1 + pr[f"{head}.fc2.b"])[0])

        beta_star = scalars["beta"]
        return NetworkOutput(
            policy=_softmax(logits),
            logits=logits,
            alpha=scalars["alpha"],
            beta_star=beta_star,
            beta=self.beta_from_star(beta_star),
        )

    def beta_from_star(self, beta_star: float) -> float:
        return float(np.clip(self.cfg.c_beta * np.exp(beta_star), BETA_MIN, BETA_MAX))

    # ----- loss -----

    def loss(self, batch: "TrainingBatch"):
        """Mean cross-entropy + mean squared value error + l2.  No gradients."""
        total, parts, _ = self._loss_forward(batch)
        return total, parts

    def _loss_forward(self, batch: "TrainingBatch"):
        result, cache = self.forward(batch.planes)
        logits = result["logits"]
        logp = logits - _logsumexp(logits)
        ce = -(batch.targets * logp).sum(axis=1).mean()

        alpha = result["alpha"]
        beta = self.cfg.c_beta * np.exp(result["beta_star"])
        t = beta * (alpha + batch.kbar)
        rho0 = _stable_sigmoid(t)
        value_err = ((batch.z - rho0) ** 2).mean()

        l2 = 0.0
        if self.cfg.l2_coeff > 0:
            l2 = self.cfg.l2_coeff * sum(
                float((w * w).sum()) for name, w in self.params.items() if name.endswith(".w")
            )
        total = float(ce + value_err + l2)
        parts = {"ce": float(ce), "value": float(value_err), "l2": float(l2), "total": total}
        return total, parts, (result, cache, logp, beta, rho0)

    def loss_and_grads(self, batch: "TrainingBatch"):
        total, parts, aux = self._loss_forward(batch)
        if not np.isfinite(total):
            raise TrainingDivergedError(f"non-finite loss: {parts}")
        result, cache, logp, beta, rho0 = aux
        pr = self.params
        batch_size = batch.planes.shape[0]
        n = cache["n"]
        grads = {name: np.zeros_like(arr) for name, arr in pr.items()}

        # cross entropy through softmax
        dlogits = (np.exp(logp) - batch.targets) / batch_size

        # value heads through rho = sigmoid(beta * (alpha + kbar))
        drho = -2.0 * (batch.z - rho0) / batch_size
        dt = drho * rho0 * (1.0 - rho0)
        dalpha = dt * beta
        dbeta_star = dt * beta * (result["alpha"] + batch.kbar)

        dtrunk = np.zeros_like(cache["trunk"])

        # policy head backward; board gradient returns to the canonical frame
        perms, _ = dihedral_perms(n)
        pc_pre, pc, pooled = cache["policy"]
        dpoint = np.take_along_axis(dlogits[:, : n * n], perms[cache["gs"]], axis=1)
        dpass = dlogits[:, n * n]
        grads["policy.point.w"][0] += np.einsum("bp,bcp->c", dpoint, pc)
        grads["policy.point.b"][0] += dpoint.sum()
        dpc = np.einsum("bp,oc->bcp", dpoint, pr["policy.point.w"])
        grads["policy.pass.w"][0] += dpass @ pooled
        grads["policy.pass.b"][0] += dpass.sum()
        dpooled = dpass[:, None] * pr["policy.pass.w"][0][None, :]
        dpc += dpooled[:, :, None] / (n * n)
        dpc_pre = dpc * (pc_pre > 0)
        grads["policy.conv.w"] += np.einsum("bop,bcp->oc", dpc_pre, cache["trunk"])
        grads["policy.conv.b"] += dpc_pre.sum(axis=(0, 2))
        dtrunk += np.einsum("bop,oc->bcp", dpc_pre, pr["policy.conv.w"])

        # value heads backward
        for head, dscalar in (("alpha", dalpha), ("beta", dbeta_star)):
            vc_pre, vc, gv, f1_pre, f1 = cache[head]
            dout = dscalar[:, None]
            grads[f"{head}.fc2.w"] += dout.T @ f1
            grads[f"{head}.fc2.b"] += dout.sum(axis=0)
            df1 = (dout @ pr[f"{head}.fc2.w"]) * (f1_pre > 0)
            grads[f"{head}.fc1.w"] += df1.T @ gv
            grads[f"{head}.fc1.b"] += df1.sum(axis=0)
            dgv = df1 @ pr[f"{head}.fc1.w"]
            dvc = np.repeat(dgv[:, :, None] / (n * n), n * n, axis=2)
            dvc_pre = dvc * (vc_pre > 0)
            grads[f"{head}.conv.w"] += np.einsum("bop,bcp->oc", dvc_pre, cache["trunk"])
            grads[f"{head}.conv.b"] += dvc_pre.sum(axis=(0, 2))
            dtrunk += np.einsum("bop,oc->bcp", dvc_pre, pr[f"{head}.conv.w"])

        # residual tower backward
        dh = dtrunk
        for i in reversed(range(self.cfg.blocks)):
            h_in, col_a, a_pre, a, col_b, out_pre = cache[f"block{i}"]
            dh = dh * (out_pre > 0)
            dwb, dbb, da = _conv3_backward(dh, col_b, pr[f"block{i}.b.w"], a.shape, n)
            grads[f"block{i}.b.w"] += dwb
            grads[f"block{i}.b.b"] += dbb
            da *= a_pre > 0
            dwa, dba, dx = _conv3_backward(da, col_a, pr[f"block{i}.a.w"], h_in.shape, n)
            grads[f"block{i}.a.w"] += dwa
            grads[f"block{i}.a.b"] += dba
            dh = dh + dx
        col_stem, stem_pre = cache["stem"]
        dh = dh * (stem_pre > 0)
        dws, dbs, _ = _conv3_backward(dh, col_stem, pr["stem.w"], cache["x"].shape, n)
        grads["stem.w"] += dws
        grads["stem.b"] += dbs

        if self.cfg.l2_coeff > 0:
            for name, w in pr.items():
                if name.endswith(".w"):
                    grads[name] += 2.0 * self.cfg.l2_coeff * w

        return total, parts, grads


@dataclass
class TrainingBatch:
    """Assembled arrays for one training step."""

    planes: np.ndarray  # (B, P, N, N)
    targets: np.ndarray  # (B, N*N+1)
    kbar: np.ndarray  # (B,) signed komi of the player to move
    z: np.ndarray  # (B,) outcome for the player to move


class SgdMomentum:
    def __init__(self, params: dict, momentum: float = 0.9):
        self.momentum = momentum
        self.velocity = {name: np.zeros_like(arr) for name, arr in params.items()}

    def step(self, params: dict, grads: dict, lr: float):
        for name, g in grads.items():
            v = self.velocity[name]
            v *= self.momentum
            v += g
            params[name] -= lr * v


def train_step(
    net: Network,
    optimizer: SgdMomentum,
    batch: TrainingBatch,
    lr: float,
    max_grad_norm: Optional[float] = 1.0,
) -> dict:
    """One SGD-with-momentum step on the mean batch loss; returns loss parts.

    Gradients are clipped to a global norm by default: unclipped steps at
    practical learning rates can kill the relu trunk outright.
    """
    total, parts, grads = net.loss_and_grads(batch)
    if max_grad_norm is not None:
        norm = np.sqrt(sum(float((g * g).sum()) for g in grads.values()))
        if norm > max_grad_norm:
            scale = max_grad_norm / norm
            for g in grads.values():
                g *= scale
    optimizer.step(net.params, grads, lr)
    return parts


def _softmax(logits: np.ndarray) -> np.ndarray:
    z = logits - logits.max()
    e = np.exp(z)
    return e / e.sum()


def _logsumexp(logits: np.ndarray) -> np.ndarray:
    m = logits.max(axis=1, keepdims=True)
    return m + np.log(np.exp(logits - m).sum(axis=1, keepdims=True))


def _stable_sigmoid(t: np.ndarray) -> np.ndarray:
    out = np.empty_like(t)
    pos = t >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-t[pos]))
    e = np.exp(t[~pos])
    out[~pos] = e / (1.0 + e)
    return out


# ----- persistence -----

_FORMAT = "komigo-net"
_VERSION = 1


def save_weights(path, net: Network) -> None:
    cfg = net.cfg
    with open(path, "w") as fh:
        fh.write(f"{_FORMAT} {_VERSION}\n")
        fh.write(f"blocks {cfg.blocks}\n")
        fh.write(f"filters {cfg.filters}\n")
        fh.write(f"input_planes {cfg.input_planes}\n")
        fh.write(f"c_beta {cfg.c_beta!r}\n")
        fh.write(f"l2_coeff {cfg.l2_coeff!r}\n")
        for name in sorted(net.params):
            arr = net.params[name]
            dims = " ".join(str(d) for d in arr.shape)
            fh.write(f"tensor {name} {dims}\n")
            fh.write(" ".join(repr(float(v)) for v in arr.reshape(-1)) + "\n")
        fh.write("end\n")


def load_weights(path) -> Network:
    with open(path) as fh:
        lines = fh.read().splitlines()
    if not lines:
        raise WeightFormatError("empty weight file")
    head = lines[0].split()
    if len(head) != 2 or head[0] != _FORMAT:
        raise WeightFormatError(f"not a {_FORMAT} file: {lines[0]!r}")
    if int(head[1]) != _VERSION:
        raise WeightFormatError(f"unsupported version {head[1]}")
    fields: dict = {}
    i = 1
    while i < len(lines) and not lines[i].startswith("tensor ") and lines[i] != "end":
        key, _, value = lines[i].partition(" ")
        fields[key] = value
        i += 1
    try:
        cfg = NetworkConfig(
            blocks=int(fields["blocks"]),
            filters=int(fields["filters"]),
            input_planes=int(fields["input_planes"]),
            c_beta=float(fields["c_beta"]),
            l2_coeff=float(fields["l2_coeff"]),
        )
    except (KeyError, ValueError) as exc:
        raise WeightFormatError(f"bad header: {exc}") from None
    params: dict = {}
    while i < len(lines) and lines[i] != "end":
        parts = lines[i].split()
        if parts[0] != "tensor":
            raise WeightFormatError(f"expected tensor line, got {lines[i]!r}")
        name = parts[1]
        shape = tuple(int(d) for d in parts[2:])
        i += 1
        if i >= len(lines):
            raise WeightFormatError(f"truncated file: missing data for {name}")
        try:
            values = np.array(lines[i].split(), dtype=np.float64)
        except ValueError as exc:
            raise WeightFormatError(f"tensor {name}: {exc}") from None
        expected = int(np.prod(shape))
        if values.size != expected:
            raise WeightFormatError(
                f"tensor {name}: expected {expected} values, got {values.size}"
            )
        params[name] = values.reshape(shape)
        i += 1
    if i >= len(lines) or lines[i] != "end":
        raise WeightFormatError("truncated file: missing end marker")
    return Network(cfg, params)
