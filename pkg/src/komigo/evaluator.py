"""Position evaluators feeding the search.

An evaluator maps a BoardState to (move priors, alpha, beta).  The real one
wraps a Network with a thread-safe LRU cache keyed by the position's recent
layout history (the planes are a pure function of that).  The others are
deliberately dumb stand-ins used by matches and tests.
"""

from __future__ import annotations

import threading
from collections import OrderedDict
from typing import NamedTuple

import numpy as np

from . import goban
from .features import encode_planes
from .goban import BoardState
from .network import Network
from .sigmoid import BETA_MAX, BETA_MIN


class Evaluation(NamedTuple):
    policy: np.ndarray  # probabilities over N*N+1 moves, full board indexing
    alpha: float
    beta: float


class NetEvaluator:
    """Network-backed evaluator with an LRU cache.

    softmax_temp divides the policy logits (self-play exploration knob).
    Safe for concurrent readers; the cache is guarded by a lock.
    """

    def __init__(self, net: Network, softmax_temp: float = 1.0, cache_size: int = 200_000):
        if not softmax_temp > 0:
            raise ValueError("softmax temperature must be positive")
        self.net = net
        self.softmax_temp = softmax_temp
        self.cache_size = cache_size
        self._cache: OrderedDict = OrderedDict()
        self._lock = threading.Lock()
        self.hits = 0
        self.misses = 0

    def evaluate(self, state: BoardState) -> Evaluation:
        key = (state.to_move, state.recent)
        with self._lock:
            hit = self._cache.get(key)
            if hit is not None:
                self._cache.move_to_end(key)
                self.hits += 1
                return hit
        self.misses += 1
        planes = encode_planes(state, self.net.cfg.input_planes)
        out = self.net.evaluate(planes)
        logits = out.logits / self.softmax_temp
        logits = logits - logits.max()
        e = np.exp(logits)
        result = Evaluation(policy=e / e.sum(), alpha=out.alpha, beta=out.beta)
        with self._lock:
            self._cache[key] = result
            if len(self._cache) > self.cache_size:
                self._cache.popitem(last=False)
        return result


class FlatEvaluator:
    """Uniform policy, fixed (alpha, beta).

    With the defaults the value is ~1/2 everywhere, so search knowledge
    comes only from terminal positions reached inside the tree.  This is
    both the "uniform-random" baseline agent and the neutral evaluator for
    solved-position tests.
    """

    def __init__(self, alpha: float = 0.0, beta: float = BETA_MIN):
        self.alpha = alpha
        self.beta = beta

    def evaluate(self, state: BoardState) -> Evaluation:
        n = state.size
        return Evaluation(
            policy=np.full(n * n + 1, 1.0 / (n * n + 1)),
            alpha=self.alpha,
            beta=self.beta,
        )


class BoardScoreEvaluator:
    """Oracle-style evaluator: alpha is the current area score.

    Counts the board as it stands (Tromp-Taylor regions) from the player
    to move's perspective.  Used to hand-build positions where the true
    margin is known.
    """

    def __init__(self, beta: float = 2.0):
        self.beta = beta

    def evaluate(self, state: BoardState) -> Evaluation:
        n = state.size
        score = goban.area_score(state)
        alpha = float(score if state.to_move == goban.BLACK else -score)
        return Evaluation(
            policy=np.full(n * n + 1, 1.0 / (n * n + 1)),
            alpha=alpha,
            beta=self.beta,
        )
