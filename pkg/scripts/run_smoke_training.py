"""Bounded end-to-end training run on 7x7 (the "smoke" net).

1-block/16-filter net, 100 visits, komi branching enabled.  Generation 0
plays at fixed komi 9.5 (a random net's own komi sample is meaningless);
later generations sample komi from the net's empty-board curve.  The run
is resumable: finished generations are detected by their report file.

Artifacts land in --out (default smoke-run/ at the repo root):
    generations/gen-NN/   games.sgf, data.records, report.txt
    nets/gen-NN.txt       checkpoint after training on that generation
    report.json           summary consumed by the acceptance suite

Rerun from scratch:  python3 scripts/run_smoke_training.py --out smoke-run
"""

import argparse
import json
import sys
import time
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from komigo import goban
from komigo.evaluation import run_match
from komigo.evaluator import FlatEvaluator, NetEvaluator
from komigo.mcts import SearchConfig
from komigo.network import Network, NetworkConfig, load_weights, save_weights
from komigo.selfplay import GenerationReport, SelfplayConfig, run_generation
from komigo.training import TrainConfig, train

SMOKE_SEED = 20260810

NET_CFG = NetworkConfig(blocks=1, filters=16, input_planes=17, c_beta=0.1, l2_coeff=1e-4)

SEARCH = SearchConfig(
    max_visits=100,
    c_puct=0.8,
    fpu_rule="LZ",
    c_fpu=0.25,
    lam=0.0,
    gibbs_temp=1.0,
    dirichlet_alpha_nonscaled=0.03,
    dirichlet_weight=0.25,
    softmax_temp=1.0,
    random_temp_moves=8,
)


def empty_board_params(net_path):
    ev = NetEvaluator(load_weights(net_path))
    e = ev.evaluate(goban.new_board(7))
    return float(e.alpha), float(e.beta)


def lr_for(gen, gens):
    if gen < 3:
        return 0.04
    if gen < gens - 3:
        return 0.02
    return 0.01


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", default=str(Path(__file__).resolve().parent.parent / "smoke-run"))
    ap.add_argument("--generations", type=int, default=12)
    ap.add_argument("--roots-per-gen", type=int, default=110)
    ap.add_argument("--train-steps", type=int, default=600)
    ap.add_argument("--match-games", type=int, default=100)
    args = ap.parse_args()

    out = Path(args.out)
    (out / "generations").mkdir(parents=True, exist_ok=True)
    (out / "nets").mkdir(exist_ok=True)

    init_net = Network(NET_CFG, seed=SMOKE_SEED)
    init_path = out / "nets" / "gen-init.txt"
    if not init_path.exists():
        save_weights(init_path, init_net)
    alpha0, beta0 = empty_board_params(init_path)
    print(f"init empty-board alpha={alpha0:.3f} beta={beta0:.4f}", flush=True)

    current = init_path
    games_total = 0
    positions_total = 0
    history = []
    t_start = time.time()
    for gen in range(args.generations):
        gen_dir = out / "generations" / f"gen-{gen:02d}"
        net_out = out / "nets" / f"gen-{gen:02d}.txt"
        report_file = gen_dir / "report.txt"
        if report_file.exists() and net_out.exists():
            report = GenerationReport.from_text(report_file.read_text())
            games_total += report.games
            positions_total += report.positions_emitted
            current = net_out
            print(f"gen {gen}: found existing artifacts, skipping", flush=True)
            continue
        t0 = time.time()
        cfg = SelfplayConfig(
            games_per_generation=args.roots_per_gen,
            c_branch=0.025,
            komi=9.5 if gen == 0 else None,
            board_size=7,
            search=SEARCH,
            rng_seed=SMOKE_SEED + gen,
            workers=0,
        )
        report = run_generation(current, cfg, gen_dir)
        games_total += report.games
        positions_total += report.positions_emitted

        data_files = [
            out / "generations" / f"gen-{g:02d}" / "data.records"
            for g in range(max(0, gen - 4), gen + 1)
        ]
        net = load_weights(current)
        tcfg = TrainConfig(
            steps=args.train_steps,
            batch_size=64,
            lr=lr_for(gen, args.generations),
            momentum=0.9,
            window=16000,
            seed=SMOKE_SEED + 1000 + gen,
        )
        net, _ = train(net, data_files, tcfg)
        save_weights(net_out, net)
        current = net_out
        alpha, beta = empty_board_params(current)
        entry = {
            "gen": gen,
            "games": report.games,
            "branches": report.branches,
            "positions": report.positions_emitted,
            "mean_game_length": report.mean_game_length,
            "alpha_empty": alpha,
            "beta_empty": beta,
            "komi_histogram": {str(k): v for k, v in sorted(report.komi_histogram.items())},
            "seconds": round(time.time() - t0, 1),
        }
        history.append(entry)
        print(json.dumps(entry), flush=True)
        (out / "progress.json").write_text(json.dumps(history, indent=1))

    alpha_final, beta_final = empty_board_params(current)
    print(f"final empty-board alpha={alpha_final:.3f} beta={beta_final:.4f}", flush=True)

    print("running verification match vs uniform-random agent (trained is White)...", flush=True)
    t0 = time.time()
    trained = NetEvaluator(load_weights(current))
    result = run_match(
        trained,
        FlatEvaluator(),
        games=args.match_games,
        komi=9.5,
        search=SearchConfig(max_visits=100, c_puct=0.8, fpu_rule="LZ", c_fpu=0.25),
        seed=SMOKE_SEED,
        board_size=7,
        colors="a_white",
        name_a="trained",
        name_b="flat",
    )
    print(
        f"match: trained wins {result.a_wins}/{result.completed} as White "
        f"({time.time()-t0:.0f}s)",
        flush=True,
    )

    final_path = out / "final-net.txt"
    final_path.write_text(Path(current).read_text())
    summary = {
        "seed": SMOKE_SEED,
        "net_config": {
            "blocks": NET_CFG.blocks,
            "filters": NET_CFG.filters,
            "input_planes": NET_CFG.input_planes,
            "c_beta": NET_CFG.c_beta,
            "l2_coeff": NET_CFG.l2_coeff,
        },
        "visits": 100,
        "games_total": games_total,
        "positions_total": positions_total,
        "alpha_empty_init": alpha0,
        "beta_empty_init": beta0,
        "alpha_empty_final": alpha_final,
        "beta_empty_final": beta_final,
        "match_vs_random_as_white": {
            "wins": result.a_wins,
            "games": result.completed,
            "seed": SMOKE_SEED,
        },
        "wall_seconds": round(time.time() - t_start, 1),
        "generations": history,
    }
    (out / "report.json").write_text(json.dumps(summary, indent=1))
    print(json.dumps(summary, indent=1), flush=True)


if __name__ == "__main__":
    main()
