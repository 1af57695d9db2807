"""Self-play game generation with komi branching.

Root games start from the empty board with a komi drawn from the net's own
curve (or a fixed one).  After a game finishes, each non-terminal position
may independently spawn a branch game: same board, fresh komi chosen so the
net considers the position even.  Branches are played to the end by the
same agent and may themselves branch, up to a depth cap.  Every game emits
one training record per searched position, labeled with its own komi and
its own winner.
"""

from __future__ import annotations

import logging
import traceback
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Optional

import numpy as np

from . import goban, mcts, sgf
from .evaluator import NetEvaluator
from .features import encode_planes
from .goban import BoardState, GameRecord, Move
from .network import load_weights
from .records import RecordWriter, TrainingRecord
from .sigmoid import SigmoidParams, branch_komi, sample_komi, signed_komi

log = logging.getLogger(__name__)

BRANCH_RULES = ("constant", "threshold")

# pre-simplification rule: branch only when the estimated lead is large
THRESHOLD_D = 3.0
THRESHOLD_SCALE = 50.0


@dataclass(frozen=True)
class SelfplayConfig:
    games_per_generation: int = 100
    c_branch: float = 0.025
    branch_rule: str = "constant"
    max_branch_depth: int = 4
    komi: Optional[float] = None  # None: sample from the net's empty-board curve
    board_size: int = 7
    search: mcts.SearchConfig = field(default_factory=mcts.SearchConfig)
    rng_seed: int = 0
    workers: int = 0  # 0 = run inline
    max_game_moves: int = 500  # safety stop, far beyond any real 7x7 game

    def __post_init__(self):
        if not 0.0 <= self.c_branch <= 1.0:
            raise ValueError("c_branch must be in [0, 1]")
        if self.branch_rule not in BRANCH_RULES:
            raise ValueError(f"branch_rule must be one of {BRANCH_RULES}")
        if self.komi is not None:
            goban.check_komi(self.komi)


@dataclass
class GameStats:
    """Per-position search data for one finished game."""

    states: list  # every position, length moves+1 (incl. the terminal one)
    alphas: list  # net alpha-hat per position, length moves+1
    betas: list
    visit_counts: list  # root visit counts per searched position, length moves


@dataclass
class GenerationReport:
    games: int = 0
    branches: int = 0
    positions_emitted: int = 0
    failures: int = 0
    komi_histogram: dict = field(default_factory=dict)
    mean_game_length: float = 0.0

    def to_text(self) -> str:
        lines = [
            f"games {self.games}",
            f"branches {self.branches}",
            f"positions_emitted {self.positions_emitted}",
            f"failures {self.failures}",
            f"mean_game_length {self.mean_game_length!r}",
        ]
        for komi in sorted(self.komi_histogram):
            lines.append(f"komi {komi} {self.komi_histogram[komi]}")
        return "\n".join(lines) + "\n"

    @staticmethod
    def from_text(text: str) -> "GenerationReport":
        rep = GenerationReport()
        for line in text.splitlines():
            parts = line.split()
            if not parts:
                continue
            if parts[0] == "komi":
                rep.komi_histogram[float(parts[1])] = int(parts[2])
            elif parts[0] == "mean_game_length":
                rep.mean_game_length = float(parts[1])
            elif parts[0] in ("games", "branches", "positions_emitted", "failures"):
                setattr(rep, parts[0], int(parts[1]))
        return rep


def play_selfplay_game(
    evaluator,
    cfg: SelfplayConfig,
    komi: float,
    rng: np.random.Generator,
    initial_state: Optional[BoardState] = None,
    game_id: str = "",
    branch_parent: Optional[tuple] = None,
):
    """One full game from `initial_state` (default: empty board) to the end.

    Returns (GameRecord, GameStats).  Temperature: the game's own first
    `random_temp_moves` moves use the configured Gibbs temperature, the
    rest are played greedily.  Root priors always get Dirichlet noise.
    """
    state = initial_state if initial_state is not None else goban.new_board(cfg.board_size)
    search = cfg.search
    states, alphas, betas, visit_counts, moves = [], [], [], [], []
    while not state.is_over() and len(moves) < cfg.max_game_moves:
        c_temp = search.gibbs_temp if len(moves) < search.random_temp_moves else 0.0
        move_idx, stats = mcts.genmove(
            state, komi, search, evaluator, rng=rng, add_noise=True, c_temp=c_temp
        )
        states.append(state)
        alphas.append(stats.root_alpha)
        betas.append(stats.root_beta)
        visit_counts.append(stats.visit_counts(state.size * state.size))
        moves.append(Move.from_index(move_idx, state.size))
        state = goban.play_index(state, move_idx)
    while not state.is_over():
        moves.append(Move.pass_())
        state = goban.play_index(state, state.size * state.size)

    # note the terminal position's evaluation as well (positions = moves+1)
    states.append(state)
    final_eval = evaluator.evaluate(state)
    alphas.append(final_eval.alpha)
    betas.append(final_eval.beta)
    record = GameRecord(
        initial_state=states[0],
        komi=komi,
        moves=moves,
        result=goban.winner(state, komi),
        branch_parent=branch_parent,
        game_id=game_id,
    )
    return record, GameStats(states=states, alphas=alphas, betas=betas, visit_counts=visit_counts)


def branch_candidates(record: GameRecord, stats: GameStats, cfg: SelfplayConfig, rng):
    """(position index, branch komi) pairs drawn from a finished game.

    constant rule: every non-terminal position branches independently with
    probability c_branch.  threshold rule: only positions where the
    estimated lead d = |kbar + alpha| exceeds a bound, with probability
    min(1, d / 50).
    """
    out = []
    for i in range(len(stats.visit_counts)):
        state = stats.states[i]
        if cfg.branch_rule == "constant":
            if rng.random() >= cfg.c_branch:
                continue
        else:
            d = abs(signed_komi(record.komi, state.to_move) + stats.alphas[i])
            if d <= THRESHOLD_D or rng.random() >= min(1.0, d / THRESHOLD_SCALE):
                continue
        params = SigmoidParams(stats.alphas[i], max(stats.betas[i], 1e-4))
        out.append((i, branch_komi(params, state.to_move)))
    return out


def emit_training_data(record: GameRecord, stats: GameStats, writer: RecordWriter) -> int:
    """One TrainingRecord per searched position of this game.

    Branch games start at their branch point, so only their own positions
    are written; the parent's prefix belongs to the parent game.
    """
    count = 0
    for i in range(len(record.moves)):
        state = stats.states[i]
        if i >= len(stats.visit_counts):
            break  # trailing auto-passes carry no search data
        counts = stats.visit_counts[i]
        if counts.sum() <= 0:
            continue
        writer.write(
            TrainingRecord(
                planes=encode_planes(state, writer.planes).astype(np.uint8),
                policy_counts=counts,
                komi=record.komi,
                to_move=state.to_move,
                z=1 if record.result == state.to_move else 0,
            )
        )
        count += 1
    return count


def play_lineage(evaluator, cfg: SelfplayConfig, komi: float, seed, game_id: str):
    """A root game plus its branch descendants (depth-capped), depth-first."""
    rng = np.random.default_rng(seed)
    results = []
    root = play_selfplay_game(evaluator, cfg, komi, rng, game_id=game_id)
    queue = [(root, 0)]
    results.append(root)
    serial = 0
    while queue:
        (record, stats), depth = queue.pop()
        if depth >= cfg.max_branch_depth:
            continue
        for pos_idx, new_komi in branch_candidates(record, stats, cfg, rng):
            serial += 1
            child_id = f"{record.game_id}b{serial}"
            child = play_selfplay_game(
                evaluator,
                cfg,
                new_komi,
                rng,
                initial_state=stats.states[pos_idx],
                game_id=child_id,
                branch_parent=(record.game_id, pos_idx),
            )
            results.append(child)
            queue.append((child, depth + 1))
    return results


_WORKER_EVALUATOR = None
_WORKER_CFG = None


def _worker_init(net_path, cfg):
    global _WORKER_EVALUATOR, _WORKER_CFG
    net = load_weights(net_path)
    _WORKER_EVALUATOR = NetEvaluator(net, softmax_temp=cfg.search.softmax_temp)
    _WORKER_CFG = cfg


def _worker_task(args):
    index, komi, seed, game_id = args
    try:
        games = play_lineage(_WORKER_EVALUATOR, _WORKER_CFG, komi, seed, game_id)
        return index, games, None
    except Exception:
        return index, [], traceback.format_exc()


def run_generation(net_path, cfg: SelfplayConfig, out_dir) -> GenerationReport:
    """Play a generation of root games (plus branches), write SGF + records
    + report into out_dir.  Deterministic for a given rng_seed."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    net = load_weights(net_path)
    evaluator = NetEvaluator(net, softmax_temp=cfg.search.softmax_temp)

    master = np.random.SeedSequence(cfg.rng_seed)
    game_seeds = master.spawn(cfg.games_per_generation + 1)
    komi_rng = np.random.default_rng(game_seeds[-1])
    komis = []
    if cfg.komi is not None:
        komis = [cfg.komi] * cfg.games_per_generation
    else:
        empty_eval = evaluator.evaluate(goban.new_board(cfg.board_size))
        params = SigmoidParams(empty_eval.alpha, empty_eval.beta)
        komis = [
            sample_komi(params, float(komi_rng.uniform(1e-9, 1.0 - 1e-9)))
            for _ in range(cfg.games_per_generation)
        ]

    tasks = [
        (i, komis[i], game_seeds[i], f"g{i:05d}")
        for i in range(cfg.games_per_generation)
    ]

    report = GenerationReport()
    all_games = []
    if cfg.workers and cfg.workers > 0:
        with ProcessPoolExecutor(
            max_workers=cfg.workers, initializer=_worker_init, initargs=(net_path, cfg)
        ) as pool:
            outcomes = list(pool.map(_worker_task, tasks))
    else:
        _worker_init(net_path, cfg)
        outcomes = [_worker_task(t) for t in tasks]

    writer = RecordWriter(out / "data.records", cfg.board_size, net.cfg.input_planes)
    lengths = []
    with writer:
        for index, games, error in outcomes:
            if error is not None:
                report.failures += 1
                log.error("game %d failed:\n%s", index, error)
                continue
            for record, stats in games:
                all_games.append(record)
                report.games += 1
                if record.branch_parent is not None:
                    report.branches += 1
                report.komi_histogram[record.komi] = (
                    report.komi_histogram.get(record.komi, 0) + 1
                )
                lengths.append(len(record.moves))
                report.positions_emitted += emit_training_data(record, stats, writer)
    report.mean_game_length = float(np.mean(lengths)) if lengths else 0.0

    (out / "games.sgf").write_text(sgf.serialize_collection(all_games))
    (out / "report.txt").write_text(report.to_text())
    return report
