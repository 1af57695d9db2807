"""Decision-tree search over the winrate curve.

One playout per visit: descend by UC urgency, append the first node outside
the tree, evaluate it, and push its value back up.  A node's value sum is
kept from the perspective of the player who chooses to enter it (its
parent's player to move), so Q of a child is directly comparable during
selection.

Leaf values are curve averages: the correction interval extremum x-bar is
decided at the playout's parent s (cached per node for the whole move
decision) and the leaf's curve is averaged over [0, x-bar], flipped for
parity.  At lambda=0 the extremum is exactly 0 and the leaf value reduces
to the plain winrate, reproducing pure win-maximizing play.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import goban
from .goban import BoardState, GameOverError
from .sigmoid import KomiContext, SigmoidParams, lambda_extremum, mu, rho, signed_komi

FPU_RULES = ("AGZ", "LZ")


@dataclass(frozen=True)
class SearchConfig:
    max_visits: int = 250
    c_puct: float = 0.8
    fpu_rule: str = "LZ"
    c_fpu: float = 0.25
    lam: float = 0.0  # margin-seeking parameter, 0 = pure win maximization
    gibbs_temp: float = 1.0
    dirichlet_alpha_nonscaled: float = 0.03
    dirichlet_weight: float = 0.25
    softmax_temp: float = 1.0
    random_temp_moves: int = 6

    def __post_init__(self):
        if self.max_visits < 1:
            raise ValueError("max_visits must be >= 1")
        if not self.c_puct > 0:
            raise ValueError("c_puct must be positive")
        if self.fpu_rule not in FPU_RULES:
            raise ValueError(f"fpu_rule must be one of {FPU_RULES}")
        if self.c_fpu < 0:
            raise ValueError("c_fpu must be >= 0")
        if not 0.0 <= self.lam <= 1.0:
            raise ValueError("lam must be in [0, 1]")
        if self.gibbs_temp < 0:
            raise ValueError("gibbs_temp must be >= 0")
        if not 0.0 <= self.dirichlet_weight <= 1.0:
            raise ValueError("dirichlet_weight must be in [0, 1]")
        if not self.softmax_temp > 0:
            raise ValueError("softmax_temp must be positive")
        if self.random_temp_moves < 0:
            raise ValueError("random_temp_moves must be >= 0")


class Node:
    __slots__ = (
        "state",
        "to_move",
        "terminal",
        "winner",
        "moves",
        "priors",
        "children",
        "child_visits",
        "child_values",
        "visits",
        "alpha",
        "beta",
        "kbar",
        "xbar",
        "self_value",
    )

    def __init__(self, state: BoardState, komi: float, cfg: SearchConfig, evaluator):
        self.state = state
        self.to_move = state.to_move
        self.visits = 0  # subtree size |T_s|; run_visit increments the whole path
        self.terminal = state.is_over()
        if self.terminal:
            self.winner = goban.winner(state, komi)
            self.moves = np.empty(0, dtype=np.int64)
            self.priors = np.empty(0)
            self.children = []
            self.child_visits = np.empty(0, dtype=np.int64)
            self.child_values = np.empty(0)
            return
        self.winner = goban.EMPTY
        ev = evaluator.evaluate(state)
        self.alpha = ev.alpha
        self.beta = ev.beta
        self.kbar = signed_komi(komi, state.to_move)
        ctx = KomiContext(komi=komi, current_player=state.to_move)
        params = SigmoidParams(ev.alpha, ev.beta)
        self.xbar = lambda_extremum(cfg.lam, ctx, params)
        self.self_value = mu(self.xbar, self.alpha, params.beta, self.kbar)
        moves = goban.legal_move_indices(state)
        self.moves = np.array(moves, dtype=np.int64)
        raw = ev.policy[self.moves]
        total = raw.sum()
        self.priors = raw / total if total > 0 else np.full(len(moves), 1.0 / len(moves))
        self.children = [None] * len(moves)
        self.child_visits = np.zeros(len(moves), dtype=np.int64)
        self.child_values = np.zeros(len(moves))


def leaf_value(parent: Node, leaf: Node) -> float:
    """v(parent, leaf): the leaf's curve averaged over the parent's interval,
    from the perspective of the player to move at the parent."""
    if leaf.terminal:
        return 1.0 if leaf.winner == parent.to_move else 0.0
    val = mu(parent.xbar, leaf.alpha, leaf.beta, leaf.kbar)
    if parent.to_move != leaf.to_move:
        return 1.0 - val
    return val


def q_value(parent: Node, child_index: int, cfg: SearchConfig) -> float:
    """Evaluation of one child edge: mean value if visited, else the FPU."""
    if parent.child_visits[child_index] > 0:
        return float(parent.child_values[child_index] / parent.child_visits[child_index])
    return float(_fpu_value(parent, cfg))


def _fpu_value(parent: Node, cfg: SearchConfig):
    if cfg.fpu_rule == "AGZ":
        return 0.5
    visited = parent.child_visits > 0
    return parent.self_value - cfg.c_fpu * np.sqrt(parent.priors[visited].sum())


def uct_urgency(parent: Node, child_index: int, cfg: SearchConfig) -> float:
    """Q plus the exploration bonus sqrt(|T_parent|-1) * P / (1 + |T_child|)."""
    q = q_value(parent, child_index, cfg)
    bonus = (
        cfg.c_puct
        * np.sqrt(max(parent.visits - 1, 0))
        * parent.priors[child_index]
        / (1.0 + parent.child_visits[child_index])
    )
    return float(q + bonus)


def _select_child(parent: Node, cfg: SearchConfig) -> int:
    q = np.where(
        parent.child_visits > 0,
        parent.child_values / np.maximum(parent.child_visits, 1),
        _fpu_value(parent, cfg),
    )
    u = q + cfg.c_puct * np.sqrt(max(parent.visits - 1, 0)) * parent.priors / (
        1.0 + parent.child_visits
    )
    return int(np.argmax(u))  # first max: lowest move index wins ties


def run_visit(root: Node, cfg: SearchConfig, evaluator, komi: float) -> Node:
    """One playout: walk by urgency, add the first node outside the tree,
    propagate the leaf value up the path.

    A playout that ends on an in-tree terminal node adds nothing: the
    terminal just collects another visit and re-propagates its exact value.
    """
    path = [root]
    indices = []
    node = root
    while True:
        if node.terminal:
            leaf = node
            break
        i = _select_child(node, cfg)
        indices.append(i)
        child = node.children[i]
        if child is None:
            state = goban.play_index(node.state, int(node.moves[i]))
            child = Node(state, komi, cfg, evaluator)
            node.children[i] = child
            path.append(child)
            leaf = child
            break
        node = child
        path.append(node)
    for depth, i in enumerate(indices):
        parent = path[depth]
        parent.child_values[i] += leaf_value(parent, leaf)
        parent.child_visits[i] += 1
    for node_on_path in path:
        node_on_path.visits += 1
    return leaf


@dataclass
class MoveStat:
    move: int
    visits: int
    q: float
    prior: float


@dataclass
class SearchStats:
    root_alpha: float
    root_beta: float
    root_winrate: float
    root_xbar: float
    chosen: int
    per_move: list = field(default_factory=list)

    def visit_counts(self, board_points: int) -> np.ndarray:
        counts = np.zeros(board_points + 1, dtype=np.int64)
        for stat in self.per_move:
            counts[stat.move] = stat.visits
        return counts


def build_tree(
    state: BoardState,
    komi: float,
    cfg: SearchConfig,
    evaluator,
    rng: Optional[np.random.Generator] = None,
    add_noise: bool = False,
) -> Node:
    if state.is_over():
        raise GameOverError("cannot search a finished game")
    root = Node(state, komi, cfg, evaluator)
    root.visits = 1
    if add_noise:
        if rng is None:
            raise ValueError("root noise requires an rng")
        scaled = cfg.dirichlet_alpha_nonscaled * 361.0 / (state.size * state.size)
        noise = rng.dirichlet(np.full(len(root.moves), scaled))
        root.priors = (1.0 - cfg.dirichlet_weight) * root.priors + cfg.dirichlet_weight * noise
    for _ in range(cfg.max_visits - 1):
        run_visit(root, cfg, evaluator, komi)
    return root


def select_move(root: Node, c_temp: float, rng: Optional[np.random.Generator]) -> int:
    """Gibbs choice over visit counts: p(child) ~ exp(visits / c_temp);
    c_temp = 0 picks the most visited child, lowest move index on ties."""
    visits = root.child_visits
    if c_temp <= 0:
        return int(np.argmax(visits))
    if rng is None:
        raise ValueError("gibbs selection requires an rng")
    w = np.exp((visits - visits.max()) / c_temp)
    return int(rng.choice(len(visits), p=w / w.sum()))


def genmove(
    state: BoardState,
    komi: float,
    cfg: SearchConfig,
    evaluator,
    rng: Optional[np.random.Generator] = None,
    add_noise: bool = False,
    c_temp: float = 0.0,
):
    """Full move decision: build the tree, pick a child, report statistics.

    Returns (move index, SearchStats); the caller applies the move.
    """
    root = build_tree(state, komi, cfg, evaluator, rng=rng, add_noise=add_noise)
    choice = select_move(root, c_temp, rng)
    ctx = KomiContext(komi=komi, current_player=state.to_move)
    params = SigmoidParams(root.alpha, root.beta)
    stats = SearchStats(
        root_alpha=root.alpha,
        root_beta=params.beta,
        root_winrate=float(rho(0.0, ctx, params)),
        root_xbar=root.xbar,
        chosen=int(root.moves[choice]),
        per_move=[
            MoveStat(
                move=int(root.moves[i]),
                visits=int(root.child_visits[i]),
                q=q_value(root, i, cfg),
                prior=float(root.priors[i]),
            )
            for i in range(len(root.moves))
        ],
    )
    return int(root.moves[choice]), stats
