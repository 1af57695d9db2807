"""Command-line entry point.

Subcommands: gtp, selfplay, train, match, tournament, panel, serve.
``--config FILE`` loads ``key = value`` lines as argument defaults (command
line wins); ``--seed`` pins all randomness.  Exit codes: 0 ok, 1 runtime
error, 2 usage.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

import numpy as np

from . import evaluation, goban, mcts, selfplay as selfplay_mod
from .evaluator import FlatEvaluator, NetEvaluator
from .gtp import EngineSession, gtp_loop
from .network import Network, NetworkConfig, load_weights, save_weights
from .training import TrainConfig, train

log = logging.getLogger(__name__)


def read_config_file(path) -> dict:
    """key = value lines; '#' comments; values stay strings."""
    out = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{lineno}: expected key = value")
        key, _, value = line.partition("=")
        out[key.strip().replace("-", "_")] = value.strip()
    return out


def _search_config(args) -> mcts.SearchConfig:
    return mcts.SearchConfig(
        max_visits=args.visits,
        c_puct=args.c_puct,
        fpu_rule=args.fpu,
        c_fpu=args.c_fpu,
        lam=getattr(args, "lam", 0.0),
        gibbs_temp=args.gibbs_temp,
        dirichlet_alpha_nonscaled=args.dirichlet_alpha,
        dirichlet_weight=args.dirichlet_weight,
        softmax_temp=args.softmax_temp,
        random_temp_moves=args.random_temp_moves,
    )


def _add_search_args(p, visits_default=250):
    p.add_argument("--visits", type=int, default=visits_default, help="search visits per move")
    p.add_argument("--c-puct", type=float, default=0.8)
    p.add_argument("--fpu", choices=("AGZ", "LZ"), default="LZ")
    p.add_argument("--c-fpu", type=float, default=0.25)
    p.add_argument("--lam", "--lambda", dest="lam", type=float, default=0.0,
                   help="margin-seeking parameter in [0,1]")
    p.add_argument("--gibbs-temp", type=float, default=1.0)
    p.add_argument("--dirichlet-alpha", type=float, default=0.03)
    p.add_argument("--dirichlet-weight", type=float, default=0.25)
    p.add_argument("--softmax-temp", type=float, default=1.0)
    p.add_argument("--random-temp-moves", type=int, default=6)


def _evaluator_for(net_path, softmax_temp=1.0):
    if net_path is None or net_path == "flat":
        return FlatEvaluator()
    return NetEvaluator(load_weights(net_path), softmax_temp=softmax_temp)


def cmd_gtp(args) -> int:
    session = EngineSession(
        evaluator=_evaluator_for(args.net),
        search=_search_config(args),
        board_size=args.boardsize,
        komi=args.komi,
        seed=args.seed,
    )
    return gtp_loop(sys.stdin, sys.stdout, session)


class UsageError(Exception):
    pass


def _require(args, *names):
    for name in names:
        if getattr(args, name, None) is None:
            raise UsageError(f"missing required option --{name.replace('_', '-')}")


def cmd_selfplay(args) -> int:
    _require(args, "net", "games", "out")
    cfg = selfplay_mod.SelfplayConfig(
        games_per_generation=args.games,
        c_branch=args.c_branch,
        branch_rule=args.branch_rule,
        max_branch_depth=args.max_branch_depth,
        komi=args.komi,
        board_size=args.boardsize,
        search=_search_config(args, ),
        rng_seed=args.seed,
        workers=args.workers,
    )
    report = selfplay_mod.run_generation(args.net, cfg, args.out)
    sys.stdout.write(report.to_text())
    return 0


def cmd_train(args) -> int:
    _require(args, "data", "steps", "out")
    if args.net:
        net = load_weights(args.net)
    else:
        net = Network(
            NetworkConfig(
                blocks=args.blocks,
                filters=args.filters,
                input_planes=args.planes,
                c_beta=args.c_beta,
                l2_coeff=args.l2,
            ),
            seed=args.seed,
        )
    cfg = TrainConfig(
        steps=args.steps,
        batch_size=args.batch,
        lr=args.lr,
        momentum=args.momentum,
        window=args.window,
        seed=args.seed,
    )
    net, history = train(net, args.data, cfg)
    save_weights(args.out, net)
    if history:
        last = history[-1]
        print(f"final loss {last['total']:.4f} (ce {last['ce']:.4f}, value {last['value']:.4f})")
    print(f"wrote {args.out}")
    return 0


def cmd_match(args) -> int:
    _require(args, "net_a", "net_b")
    search = _search_config(args)
    result = evaluation.run_match(
        _evaluator_for(args.net_a, args.softmax_temp),
        _evaluator_for(args.net_b, args.softmax_temp),
        games=args.games,
        komi=args.komi,
        search=search,
        seed=args.seed,
        board_size=args.boardsize,
        name_a=args.net_a or "flat",
        name_b=args.net_b or "flat",
    )
    print(
        f"{result.net_a} vs {result.net_b}: {result.a_wins}/{result.completed} "
        f"(as white {result.a_wins_as_white}, as black {result.a_wins_as_black})"
        + (" [partial]" if result.partial else "")
    )
    if args.out:
        evaluation.save_results(args.out, [result])
    return 0


def cmd_tournament(args) -> int:
    _require(args, "manifest")
    manifest = read_config_file(args.manifest)
    nets = {}
    for key, value in manifest.items():
        if key.startswith("net_"):
            nets[key[4:]] = value
    if len(nets) < 2:
        print("manifest needs at least two net_<id> entries", file=sys.stderr)
        return 2
    games = int(manifest.get("games", 20))
    komi = float(manifest.get("komi", 9.5))
    visits = int(manifest.get("visits", args.visits))
    search = mcts.SearchConfig(max_visits=visits, lam=0.0)
    ids = sorted(nets)
    results = []
    for i, a in enumerate(ids):
        for b in ids[i + 1:]:
            result = evaluation.run_match(
                _evaluator_for(nets[a]),
                _evaluator_for(nets[b]),
                games=games,
                komi=komi,
                search=search,
                seed=args.seed + i * 1000 + ids.index(b),
                board_size=int(manifest.get("boardsize", 7)),
                name_a=a,
                name_b=b,
            )
            print(f"{a} vs {b}: {result.a_wins}/{result.completed}")
            results.append(result)
    if args.out:
        evaluation.save_results(args.out, results)
    scores = evaluation.mle_elo(results)
    print("elo scores (anchored at first net):")
    for net_id in ids:
        print(f"  {net_id}: {scores[net_id]:+.1f}")
    cycles = evaluation.detect_cycles(results)
    if cycles:
        print(f"intransitive majority cycles: {cycles}")
    return 0


def _panel_matrix(results, panel_ids):
    """White-side winrate rows for every net that played the whole panel."""
    rows = {}
    for r in results:
        if r.net_b in panel_ids:
            rows.setdefault(r.net_a, {})[r.net_b] = (
                r.a_wins_as_white / max(r.games // 2, 1)
            )
    complete = {
        net: [cols[p] for p in panel_ids]
        for net, cols in rows.items()
        if all(p in cols for p in panel_ids)
    }
    return complete


def cmd_panel(args) -> int:
    _require(args, "results", "panel")
    results = evaluation.load_results(args.results)
    panel_ids = args.panel.split(",")
    matrix = _panel_matrix(results, panel_ids)
    if args.panel_action == "fit":
        if len(matrix) < 2:
            print("need at least two complete result rows", file=sys.stderr)
            return 1
        weights = evaluation.fit_panel_weights(np.array(list(matrix.values())))
        with open(args.out, "w") as fh:
            fh.write("komigo-panel 1\n")
            fh.write("panel " + ",".join(panel_ids) + "\n")
            fh.write("center " + " ".join(repr(v) for v in weights.center) + "\n")
            fh.write("weights " + " ".join(repr(v) for v in weights.weights) + "\n")
            fh.write(f"eigenvalue {weights.top_eigenvalue!r}\n")
        print(f"wrote {args.out}")
        return 0
    # eval
    text = Path(args.weights).read_text().splitlines()
    fields = dict(line.split(" ", 1) for line in text[1:] if line)
    weights = evaluation.PanelWeights(
        weights=np.array(fields["weights"].split(), dtype=np.float64),
        center=np.array(fields["center"].split(), dtype=np.float64),
        top_eigenvalue=float(fields["eigenvalue"]),
    )
    if args.net not in matrix:
        print(f"net {args.net} has no complete panel results", file=sys.stderr)
        return 1
    score = evaluation.panel_evaluate(np.array(matrix[args.net]), weights)
    print(f"{args.net}: {score:+.5f}")
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    app = create_app(
        net_path=args.net,
        visit_cap=args.visit_cap,
        static_dir=args.static_dir,
    )
    uvicorn.run(app, host=args.host, port=args.port, log_level="info")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="komigo",
        description="Small-board Go engine with a sigmoid winrate model",
    )
    parser.add_argument("--config", help="key = value defaults file")
    sub = parser.add_subparsers(dest="command")
    parser._komigo_sub = {}

    p = parser._komigo_sub["gtp"] = sub.add_parser("gtp", help="GTP v2 engine on stdin/stdout")
    p.add_argument("--net", help="weight file (omit for a uniform evaluator)")
    p.add_argument("--boardsize", type=int, default=7)
    p.add_argument("--komi", type=float, default=9.5)
    p.add_argument("--seed", type=int, default=0)
    _add_search_args(p)
    p.set_defaults(func=cmd_gtp)

    p = parser._komigo_sub["selfplay"] = sub.add_parser("selfplay", help="generate self-play games and records")
    p.add_argument("--net")
    p.add_argument("--games", type=int)
    p.add_argument("--out")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--c-branch", type=float, default=0.025)
    p.add_argument("--branch-rule", choices=selfplay_mod.BRANCH_RULES, default="constant")
    p.add_argument("--max-branch-depth", type=int, default=4)
    p.add_argument("--komi", type=float, default=None,
                   help="fixed komi; omit to sample from the net's curve")
    p.add_argument("--boardsize", type=int, default=7)
    p.add_argument("--workers", type=int, default=0)
    _add_search_args(p, visits_default=250)
    p.set_defaults(func=cmd_selfplay)

    p = parser._komigo_sub["train"] = sub.add_parser("train", help="train a net on recorded positions")
    p.add_argument("--data", nargs="+", help="records file(s), oldest first")
    p.add_argument("--steps", type=int)
    p.add_argument("--out")
    p.add_argument("--net", help="continue from this weight file")
    p.add_argument("--blocks", type=int, default=3)
    p.add_argument("--filters", type=int, default=128)
    p.add_argument("--planes", type=int, default=17)
    p.add_argument("--c-beta", type=float, default=0.1)
    p.add_argument("--l2", type=float, default=1e-4)
    p.add_argument("--lr", type=float, default=0.02)
    p.add_argument("--momentum", type=float, default=0.9)
    p.add_argument("--batch", type=int, default=64)
    p.add_argument("--window", type=int, default=16000)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_train)

    p = parser._komigo_sub["match"] = sub.add_parser("match", help="paired match between two nets")
    p.add_argument("--net-a", help="weight file or 'flat'")
    p.add_argument("--net-b")
    p.add_argument("--games", type=int, default=100)
    p.add_argument("--komi", type=float, default=9.5)
    p.add_argument("--boardsize", type=int, default=7)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", help="append results to this file")
    _add_search_args(p)
    p.set_defaults(func=cmd_match)

    p = parser._komigo_sub["tournament"] = sub.add_parser("tournament", help="round robin over a manifest of nets")
    p.add_argument("--manifest")
    p.add_argument("--out", help="append results to this file")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--visits", type=int, default=100)
    p.set_defaults(func=cmd_tournament)

    p = parser._komigo_sub["panel"] = sub.add_parser("panel", help="panel-based strength evaluation")
    p.add_argument("panel_action", choices=("fit", "eval"))
    p.add_argument("--results")
    p.add_argument("--panel", help="comma-separated panel net ids")
    p.add_argument("--out", help="weights file to write (fit)")
    p.add_argument("--weights", help="weights file to read (eval)")
    p.add_argument("--net", help="net id to score (eval)")
    p.set_defaults(func=cmd_panel)

    p = parser._komigo_sub["serve"] = sub.add_parser("serve", help="HTTP analysis service")
    p.add_argument("--net", help="weight file to load at startup")
    p.add_argument("--port", type=int, default=8731)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--visit-cap", type=int, default=10_000)
    p.add_argument("--static-dir", help="serve this directory at / (the UI build)")
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv=None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(name)s: %(message)s")
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code not in (0, None) else 0
    if not getattr(args, "command", None):
        parser.print_usage(sys.stderr)
        return 2
    if args.config:
        try:
            defaults = read_config_file(args.config)
        except (OSError, ValueError) as exc:
            print(f"bad config: {exc}", file=sys.stderr)
            return 2
        sub = parser._komigo_sub[args.command]
        typed = {}
        for action in sub._actions:
            if action.dest in defaults:
                raw = defaults[action.dest]
                if action.nargs in ("+", "*"):
                    typed[action.dest] = [
                        action.type(v) if action.type else v for v in raw.split(",")
                    ]
                elif action.type:
                    typed[action.dest] = action.type(raw)
                else:
                    typed[action.dest] = raw
        unknown = set(defaults) - {a.dest for a in sub._actions}
        if unknown:
            print(f"bad config: unknown keys for {args.command}: {sorted(unknown)}", file=sys.stderr)
            return 2
        sub.set_defaults(**typed)
        args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(str(exc), file=sys.stderr)
        return 2
    except KeyboardInterrupt:
        return 1
    except Exception as exc:
        log.error("%s", exc)
        return 1


if __name__ == "__main__":
    sys.exit(main())
