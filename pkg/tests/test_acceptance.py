"""Acceptance suite: one test per primary criterion, stated tolerances.

Each test prints an `ACCEPTANCE <name>: PASS` line on success (visible
with `pytest -s` or in the captured output of the final run).  The smoke
training run is produced offline by scripts/run_smoke_training.py; its
artifacts are validated live here (parameters re-measured from the weight
file, verification match replayed seeded) so nothing is taken on faith
from the report alone.
"""

import json
import os
import time
from pathlib import Path

import numpy as np
import pytest

from komigo import goban
from komigo.evaluator import BoardScoreEvaluator, FlatEvaluator, NetEvaluator
from komigo.goban import BLACK, WHITE, IllegalMoveError, Move
from komigo.mcts import SearchConfig, build_tree, genmove
from komigo.network import (
    Network,
    NetworkConfig,
    SgdMomentum,
    TrainingBatch,
    load_weights,
    train_step,
)
from komigo.sigmoid import SigmoidParams, mu, sample_komi, sigma

from oracles import flood_fill_score, minimax_best_moves
from test_goban import board_from_ascii, play_out_random

SMOKE_DIR = Path(os.environ.get("KOMIGO_SMOKE_DIR", Path(__file__).parent.parent / "smoke-run"))


def report(name):
    print(f"\nACCEPTANCE {name}: PASS", flush=True)


class TestSigmoidMath:
    def test_mu_closed_form_vs_quadrature(self):
        # oracle: trapezoid on 1e5 panels plus one Richardson step from the
        # 5e4-panel alternate grid, which removes the trapezoid's own O(h^2)
        # endpoint bias (up to ~2e-9 at the steepest draws) so the 1e-9
        # tolerance genuinely measures the closed form
        t0 = time.time()
        rng = np.random.default_rng(2026)
        worst = 0.0
        checked = 0
        while checked < 1000:
            y = rng.uniform(-30, 30)
            a = rng.uniform(-25, 25)
            b = rng.uniform(1e-3, 50)
            k = rng.uniform(-15, 15)
            if abs(y) < 1e-6:
                continue
            xs = np.linspace(0.0, y, 100_001)
            vals = sigma(xs + k, a, b)
            t_fine = np.trapezoid(vals, xs)
            t_coarse = np.trapezoid(vals[::2], xs[::2])
            oracle = (t_fine + (t_fine - t_coarse) / 3.0) / y
            worst = max(worst, abs(mu(y, a, b, k) - oracle))
            checked += 1
        elapsed = time.time() - t0
        assert worst < 1e-9, f"worst deviation {worst:.3e}"
        assert elapsed < 10.0, f"quadrature sweep took {elapsed:.1f}s"
        report(f"sigmoid-math (worst {worst:.2e}, {elapsed:.1f}s)")

    def test_mu_at_zero_is_exact_winrate(self):
        rng = np.random.default_rng(2027)
        for _ in range(200):
            a, b, k = rng.uniform(-25, 25), rng.uniform(1e-3, 50), rng.uniform(-15, 15)
            assert mu(0.0, a, b, k) == sigma(k, a, b)
        report("sigmoid-math-mu-zero")


class TestGradientCheck:
    def test_full_loss_gradients(self):
        t0 = time.time()
        rng = np.random.default_rng(31)
        net = Network(NetworkConfig(blocks=1, filters=6, input_planes=17, l2_coeff=1e-4), seed=32)
        planes = (rng.random((3, 17, 5, 5)) < 0.25).astype(np.float64)
        planes[:, 16] = 1.0
        targets = rng.random((3, 26)) + 1e-3
        targets /= targets.sum(axis=1, keepdims=True)
        batch = TrainingBatch(
            planes=planes,
            targets=targets,
            kbar=np.array([-9.5, 5.5, -0.5]),
            z=np.array([1.0, 0.0, 1.0]),
        )
        _, _, grads = net.loss_and_grads(batch)
        groups = [
            "stem.w", "block0.a.w", "block0.b.w",
            "policy.conv.w", "policy.point.w", "policy.pass.w",
            "alpha.conv.w", "alpha.fc1.w", "alpha.fc2.w",
            "beta.conv.w", "beta.fc1.w", "beta.fc2.w",
        ]
        h = 1e-4
        checked = 0
        worst = 0.0
        for name in groups:
            flat = net.params[name].reshape(-1)
            for k in rng.choice(flat.size, size=min(2, flat.size), replace=False):
                orig = flat[k]
                flat[k] = orig + h
                up, _ = net.loss(batch)
                flat[k] = orig - h
                down, _ = net.loss(batch)
                flat[k] = orig
                fd = (up - down) / (2 * h)
                an = grads[name].reshape(-1)[k]
                rel = abs(an - fd) / max(abs(an), abs(fd), 1e-8)
                worst = max(worst, rel)
                assert rel <= 1e-4, f"{name}[{k}] rel error {rel:.2e}"
                checked += 1
        elapsed = time.time() - t0
        assert checked >= 20
        assert elapsed < 60.0
        report(f"gradient-check ({checked} coords, worst {worst:.1e}, {elapsed:.1f}s)")


class TestRulesOracle:
    def test_final_score_vs_flood_fill_on_100_games(self):
        t0 = time.time()
        for seed in range(100):
            state = play_out_random(7 if seed % 2 else 5, seed + 42)
            assert goban.final_score(state) == flood_fill_score(state.stones, state.size)
        elapsed = time.time() - t0
        assert elapsed < 30.0
        report(f"rules-oracle-scoring (100 games, {elapsed:.1f}s)")

    def test_superko_rejected_on_constructed_ko(self):
        state = board_from_ascii(
            [
                ".XO..",
                "X.XO.",
                ".XO..",
                ".....",
                ".....",
            ],
            to_move=WHITE,
        )
        state = goban.play_move(state, Move.play(1, 1))
        with pytest.raises(IllegalMoveError, match="superko"):
            goban.play_move(state, Move.play(1, 2))
        # double ko cycle: after an exchange elsewhere the recapture is
        # legal, and the re-recapture is then blocked in turn
        state = goban.play_move(state, Move.play(4, 4))
        state = goban.play_move(state, Move.play(3, 0))
        state = goban.play_move(state, Move.play(1, 2))
        with pytest.raises(IllegalMoveError, match="superko"):
            goban.play_move(state, Move.play(1, 1))
        report("rules-oracle-superko")


class TestMctsOracle:
    def test_most_visited_matches_minimax_at_10k_visits(self):
        from test_mcts import solved_positions

        t0 = time.time()
        positions = solved_positions()
        assert len(positions) >= 5
        ev = FlatEvaluator()
        cfg = SearchConfig(max_visits=10_000, c_puct=1.0, fpu_rule="AGZ")
        for state, komi, best in positions:
            root = build_tree(state, komi, cfg, ev)
            chosen = int(root.moves[np.argmax(root.child_visits)])
            assert chosen in best, (
                f"komi {komi}: minimax {best}, search chose {chosen}\n{state.ascii()}"
            )
        elapsed = time.time() - t0
        assert elapsed < 120.0
        report(f"mcts-oracle ({len(positions)} positions, {elapsed:.1f}s)")


class TestKomiSampler:
    def test_chi_squared_against_discretized_logistic(self):
        from scipy import stats

        rng = np.random.default_rng(97)
        alpha, beta = 9.0, 2.0
        params = SigmoidParams(alpha, beta)
        draws = np.array(
            [sample_komi(params, float(u)) for u in rng.uniform(1e-12, 1 - 1e-12, 100_000)]
        )
        ms = np.arange(-15, 34)
        probs = np.array(
            [
                sigma(beta * (alpha - m), 0.0, 1.0) - sigma(beta * (alpha - m - 1), 0.0, 1.0)
                for m in ms
            ]
        )
        counts = np.array([(draws == 0.5 + m).sum() for m in ms])
        keep = probs * draws.size >= 5
        f_obs = np.append(counts[keep], counts[~keep].sum())
        f_exp = np.append(probs[keep], probs[~keep].sum()) * draws.size
        result = stats.chisquare(f_obs=f_obs, f_exp=f_exp)
        assert result.pvalue > 0.01, f"chi2 p={result.pvalue:.4f}"
        report(f"komi-sampler-distribution (p={result.pvalue:.3f})")

    def test_branch_fraction_concentration(self):
        from komigo.selfplay import SelfplayConfig, branch_candidates, play_selfplay_game

        cfg = SelfplayConfig(
            c_branch=0.025,
            board_size=5,
            search=SearchConfig(max_visits=8, fpu_rule="AGZ", random_temp_moves=2),
            rng_seed=0,
        )
        game_rng = np.random.default_rng(55)
        record, stats = play_selfplay_game(FlatEvaluator(), cfg, 8.5, game_rng)
        pick_rng = np.random.default_rng(56)
        picked = 0
        total = 0
        while total < 10_000:
            picked += len(branch_candidates(record, stats, cfg, pick_rng))
            total += len(stats.visit_counts)
        fraction = picked / total
        assert 0.020 <= fraction <= 0.030, f"branch fraction {fraction:.4f}"
        report(f"komi-sampler-branch-fraction ({fraction:.4f})")


class TestTwoKomiSeparation:
    def test_one_position_two_komi_straddle(self):
        t0 = time.time()
        rng = np.random.default_rng(58)
        net = Network(NetworkConfig(blocks=1, filters=8, input_planes=17, l2_coeff=0.0), seed=59)
        planes = (rng.random((1, 17, 7, 7)) < 0.25).astype(np.float64)
        planes[:, 16] = 1.0
        planes = np.repeat(planes, 2, axis=0)
        batch = TrainingBatch(
            planes=planes,
            targets=np.full((2, 50), 1.0 / 50),
            kbar=np.array([-5.5, -10.5]),  # Black to move at komi 5.5 / 10.5
            z=np.array([1.0, 0.0]),
        )
        opt = SgdMomentum(net.params)
        for _ in range(2000):
            train_step(net, opt, batch, lr=0.02)
        out = net.evaluate(planes[0])
        beta = net.beta_from_star(out.beta_star)
        rho_low = sigma(-5.5, out.alpha, beta)
        rho_high = sigma(-10.5, out.alpha, beta)
        elapsed = time.time() - t0
        assert rho_low > 0.5 > rho_high, f"rho(5.5)={rho_low:.3f}, rho(10.5)={rho_high:.3f}"
        assert 5.5 < out.alpha < 10.5
        assert elapsed < 300.0
        report(
            f"two-komi-separation (alpha {out.alpha:.2f}, "
            f"rho {rho_low:.3f}/{rho_high:.3f}, {elapsed:.0f}s)"
        )


class TestEloPca:
    def test_elo_win_prob_constant(self):
        from komigo.evaluation import elo_win_prob

        assert abs(elo_win_prob(400.0, 0.0, 400.0) - 0.7311) < 1e-4
        report("elo-win-prob-400-gap")

    def test_mle_recovers_planted_gaps(self):
        from test_evaluation import TestMleElo, simulate_round_robin
        from komigo.evaluation import mle_elo

        planted = {f"n{i}": 60.0 * i for i in range(10)}
        fitted = mle_elo(simulate_round_robin(planted, games=200, seed=14))
        worst = TestMleElo.max_gap_error(planted, fitted)
        assert worst <= 25.0, f"worst gap error {worst:.1f}"
        report(f"elo-mle-planted (worst gap {worst:.1f})")

    def test_pca_rank_one_direction(self):
        from komigo.evaluation import fit_panel_weights

        rng = np.random.default_rng(61)
        rows = np.tile(np.linspace(0.2, 0.8, 15), (12, 1))
        rows[:, 7] = rng.uniform(0, 1, size=12)
        weights = fit_panel_weights(rows)
        expected = np.zeros(15)
        expected[7] = 1.0
        assert np.allclose(np.abs(weights.weights), expected, atol=1e-10)
        proj_var = np.var((rows - weights.center) @ weights.weights, ddof=1)
        assert abs(proj_var - weights.top_eigenvalue) < 1e-10
        report("pca-rank-one")


MARGIN_SMALL_PT = 0 * 7 + 2  # captures one stone, final lead 14
MARGIN_BIG_PT = 6 * 7 + 2  # captures three stones, final lead 18


def margin_test_position():
    """Black to move, komi 0.5: two capturing wins with different margins.

    Black can capture one stone at (0,2) or three at (6,2); the White
    block on the right lives with two edge eyes, so White always has a
    legal reply and no line ends in an early certain terminal.  Standing
    pat already wins by ~10, so both captures are wins and their raw
    winrates saturate to nearly the same value; the margin difference
    only shows up through the even-game correction interval.
    """
    return board_from_ascii(
        [
            "XO.XXOO",
            "XXXXXOO",
            "XXXXXO.",
            "X.XXXOO",
            "XXXXXOO",
            "OXXXXO.",
            "OO.XXOO",
        ],
        to_move=BLACK,
    )


class MarginTableOracle:
    """Hand-built oracle: the final margin is known per capture choice.

    Standing lead 11; the small capture adds 3, the big one 7.  Alpha is
    reported from the player to move's perspective, the curve scale is
    fixed, and pass gets a realistically tiny prior.
    """

    def __init__(self, beta=0.3):
        self.beta = beta

    def evaluate(self, state):
        from komigo.evaluator import Evaluation

        n = state.size
        margin = 11.0
        if state.stones[MARGIN_SMALL_PT] == BLACK:
            margin += 3.0
        if state.stones[MARGIN_BIG_PT] == BLACK:
            margin += 7.0
        alpha = margin if state.to_move == BLACK else -margin
        policy = np.ones(n * n + 1)
        policy[n * n] = 0.001
        return Evaluation(policy=policy / policy.sum(), alpha=alpha, beta=self.beta)


class TestLambdaAgentBehavior:
    def test_margin_move_frequency_nondecreasing_in_lambda(self):
        t0 = time.time()
        state = margin_test_position()
        legal = goban.legal_move_indices(state)
        assert MARGIN_SMALL_PT in legal and MARGIN_BIG_PT in legal
        evaluator = MarginTableOracle(beta=0.3)
        rng = np.random.default_rng(777)
        freqs = []
        for lam in (0.0, 0.5, 1.0):
            cfg = SearchConfig(
                max_visits=150,
                c_puct=1.0,
                fpu_rule="AGZ",
                lam=lam,
                dirichlet_alpha_nonscaled=0.03,
                dirichlet_weight=0.25,
            )
            hits = 0
            for _ in range(1000):
                move, _ = genmove(
                    state, 0.5, cfg, evaluator, rng=rng, add_noise=True, c_temp=0.0
                )
                hits += move == MARGIN_BIG_PT
            freqs.append(hits / 1000.0)
        elapsed = time.time() - t0
        # nondecreasing with a 2% allowance for binomial noise at n=1000
        assert freqs[1] >= freqs[0] - 0.02, freqs
        assert freqs[2] >= freqs[1] - 0.02, freqs
        assert freqs[2] > freqs[0] + 0.1, freqs
        report(
            f"lambda-agent-margin (freqs {freqs[0]:.3f} -> {freqs[1]:.3f} -> "
            f"{freqs[2]:.3f}, {elapsed:.0f}s)"
        )


class TestSmokeTraining:
    @pytest.fixture(scope="class")
    def smoke(self):
        report_path = SMOKE_DIR / "report.json"
        net_path = SMOKE_DIR / "final-net.txt"
        if not (report_path.exists() and net_path.exists()):
            pytest.fail(
                f"smoke-training artifacts missing under {SMOKE_DIR}; "
                "run scripts/run_smoke_training.py (a few hours on one CPU) "
                "or point KOMIGO_SMOKE_DIR at an existing run"
            )
        return json.loads(report_path.read_text()), net_path

    def test_training_volume(self, smoke):
        summary, _ = smoke
        assert summary["games_total"] >= 2000
        assert summary["visits"] == 100
        assert summary["net_config"]["blocks"] == 1
        assert summary["net_config"]["filters"] == 16
        report(f"smoke-volume ({summary['games_total']} games)")

    def test_empty_board_alpha_in_band(self, smoke):
        _, net_path = smoke
        ev = NetEvaluator(load_weights(net_path))
        out = ev.evaluate(goban.new_board(7))
        assert 5.0 <= out.alpha <= 13.0, f"alpha_empty {out.alpha:.2f}"
        report(f"smoke-alpha-empty ({out.alpha:.2f})")

    def test_empty_board_beta_increased(self, smoke):
        summary, net_path = smoke
        init_net = Network(
            NetworkConfig(**summary["net_config"]), seed=summary["seed"]
        )
        beta_init = NetEvaluator(init_net).evaluate(goban.new_board(7)).beta
        beta_final = NetEvaluator(load_weights(net_path)).evaluate(goban.new_board(7)).beta
        assert beta_final > beta_init, f"beta {beta_init:.4f} -> {beta_final:.4f}"
        report(f"smoke-beta-growth ({beta_init:.4f} -> {beta_final:.4f})")

    def test_beats_random_agent_as_white(self, smoke):
        from komigo.evaluation import run_match

        summary, net_path = smoke
        t0 = time.time()
        result = run_match(
            NetEvaluator(load_weights(net_path)),
            FlatEvaluator(),
            games=100,
            komi=9.5,
            search=SearchConfig(max_visits=100, c_puct=0.8, fpu_rule="LZ", c_fpu=0.25),
            seed=summary["match_vs_random_as_white"]["seed"],
            board_size=7,
            colors="a_white",
        )
        elapsed = time.time() - t0
        assert result.completed == 100
        assert result.a_wins >= 90, f"only {result.a_wins}/100 wins vs random agent"
        report(f"smoke-match-vs-random ({result.a_wins}/100 as White, {elapsed:.0f}s)")
