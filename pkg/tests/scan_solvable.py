"""Offline scan: hunt 3x3 positions the naive exact solver can finish.

Tries near-terminal candidates with extra structural filters (no large
group in atari, few empties, optionally a pending pass) and increasing
node budgets; writes survivors to tests/data/solved_3x3.json.
"""

import json
import sys
import time
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent))

import numpy as np

from komigo import goban
from komigo.goban import BLACK, new_board
from oracles import SearchBudgetExceeded, minimax_best_moves


def biggest_atari_group(state):
    """Size of the largest group with exactly one liberty."""
    n = state.size
    neighbors = goban._neighbors(n)
    seen = set()
    worst = 0
    for p in range(n * n):
        if state.stones[p] == 0 or p in seen:
            continue
        group = goban._collect_group(state.stones, neighbors, p)
        seen.update(group)
        libs = set()
        for q in group:
            for v in neighbors[q]:
                if state.stones[v] == 0:
                    libs.add(v)
        if len(libs) == 1:
            worst = max(worst, len(group))
    return worst


def rows_of(state):
    sym = {0: ".", 1: "X", 2: "O"}
    n = state.size
    return ["".join(sym[state.stones[r * n + c]] for c in range(n)) for r in range(n)]


def main():
    budget = int(sys.argv[1]) if len(sys.argv) > 1 else 2_000_000
    max_seconds = int(sys.argv[2]) if len(sys.argv) > 2 else 3600
    found = []
    seen_keys = set()
    seed = 20_000
    t0 = time.time()
    stats = {"budget": 0, "trivial": 0, "atari": 0}
    while len(found) < 8 and time.time() - t0 < max_seconds and seed < 40_000:
        rng = np.random.default_rng(seed)
        seed += 1
        state = new_board(3)
        komi = float(rng.choice([-2.5, -0.5, 0.5, 2.5]))
        cand = None
        while not state.is_over():
            ids = goban.legal_move_indices(state)
            plays = ids[:-1]
            idx = int(rng.choice(plays)) if plays and rng.random() < 0.85 else ids[-1]
            state = goban.play_index(state, idx)
            if not state.is_over() and state.stones.count(0) <= 2:
                cand = state
                break
        if cand is None:
            continue
        key = (cand.stones, cand.to_move, cand.consecutive_passes, komi)
        if key in seen_keys:
            continue
        seen_keys.add(key)
        if biggest_atari_group(cand) > 2:
            stats["atari"] += 1
            continue
        legal = goban.legal_move_indices(cand)
        t1 = time.time()
        try:
            best = minimax_best_moves(cand, komi, budget=budget)
        except SearchBudgetExceeded:
            stats["budget"] += 1
            print(f"seed {seed-1}: budget after {time.time()-t1:.0f}s", flush=True)
            continue
        if 0 < len(best) < len(legal):
            entry = dict(
                rows=rows_of(cand),
                to_move="B" if cand.to_move == BLACK else "W",
                passes=cand.consecutive_passes,
                komi=komi,
                best=[int(b) for b in best],
                legal=[int(m) for m in legal],
                seed=seed - 1,
                solve_seconds=round(time.time() - t1, 2),
            )
            found.append(entry)
            print(f"FOUND {len(found)}: {entry}", flush=True)
        else:
            stats["trivial"] += 1
    out = Path(__file__).parent / "data"
    out.mkdir(exist_ok=True)
    (out / "solved_3x3.json").write_text(json.dumps(found, indent=1))
    print(f"wrote {len(found)}; stats={stats}; {time.time()-t0:.0f}s", flush=True)


if __name__ == "__main__":
    main()
