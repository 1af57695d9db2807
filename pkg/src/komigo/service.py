"""HTTP/JSON analysis service.

Stateless protocol: every request carries the full position (a move list
from the empty board, or an explicit board layout).  Endpoints:

* ``POST /analyze``  -> curve parameters, sampled winrate curve, policy,
  search statistics, and per-lambda what-if info
* ``POST /genmove``  -> one greedy engine move plus root statistics
* ``GET /nets`` / ``POST /nets/load`` -> inspect / swap the active net

The JSON schema is documented in docs/http-api.md; FastAPI also exposes
the generated OpenAPI document at /openapi.json.
"""

from __future__ import annotations

import threading
from typing import Optional

import numpy as np
from fastapi import FastAPI, HTTPException
from fastapi.middleware.cors import CORSMiddleware
from pydantic import BaseModel, Field

from . import goban, mcts
from .evaluator import NetEvaluator
from .goban import BLACK, WHITE, BoardState, IllegalMoveError
from .gtp import GtpError, move_to_vertex, vertex_to_move
from .network import WeightFormatError, load_weights
from .sigmoid import KomiContext, SigmoidParams, rho, winrate_curve


class BoardLayout(BaseModel):
    size: int = Field(ge=goban.MIN_SIZE, le=goban.MAX_SIZE)
    rows: list[str]
    to_move: str = "b"


class PositionBody(BaseModel):
    moves: list[str] = []
    board: Optional[BoardLayout] = None
    komi: float = 9.5
    size: int = Field(default=7, ge=goban.MIN_SIZE, le=goban.MAX_SIZE)


class AnalyzeBody(PositionBody):
    visits: int = Field(default=100, ge=1)
    lambdas: list[float] = []
    curve_range: float = Field(default=15.0, gt=0)
    curve_points: int = Field(default=41, ge=41)
    top_moves: int = Field(default=5, ge=1)
    seed: int = 0


class GenmoveBody(PositionBody):
    visits: int = Field(default=100, ge=1)
    lam: float = 0.0
    seed: int = 0


class LoadBody(BaseModel):
    path: str


_SYMBOLS = {".": goban.EMPTY, "x": BLACK, "o": WHITE}


def build_position(body: PositionBody) -> BoardState:
    """Replays the request position; raises HTTPException on bad input."""
    if body.board is not None:
        layout = body.board
        flat = "".join(row.lower().replace(" ", "") for row in layout.rows)
        if len(layout.rows) != layout.size or len(flat) != layout.size**2:
            raise HTTPException(422, detail="board rows do not match size")
        try:
            stones = bytes(_SYMBOLS[ch] for ch in flat)
        except KeyError as exc:
            raise HTTPException(422, detail=f"bad board symbol {exc}") from None
        to_move = BLACK if layout.to_move.lower() in ("b", "black") else WHITE
        try:
            state = goban.board_from_layout(layout.size, stones, to_move)
        except ValueError as exc:
            raise HTTPException(400, detail=str(exc)) from None
    else:
        state = goban.new_board(body.size)
    for i, token in enumerate(body.moves):
        parts = token.split()
        if len(parts) != 2:
            raise HTTPException(
                400, detail={"error": f"bad move token {token!r}", "index": i}
            )
        color = BLACK if parts[0].lower() in ("b", "black") else WHITE
        if color != state.to_move:
            raise HTTPException(
                400, detail={"error": f"move {token!r} out of turn", "index": i}
            )
        try:
            move = vertex_to_move(parts[1], state.size)
            state = goban.play_move(state, move)
        except (GtpError, IllegalMoveError, goban.GameOverError) as exc:
            raise HTTPException(400, detail={"error": str(exc), "index": i}) from None
    try:
        goban.check_komi(body.komi)
    except ValueError as exc:
        raise HTTPException(422, detail=str(exc)) from None
    return state


class ServiceState:
    def __init__(self, net_path=None, visit_cap=10_000):
        self.visit_cap = visit_cap
        self.lock = threading.Lock()
        self.evaluator = None
        self.net_path = None
        if net_path:
            self.load(net_path)

    def load(self, path):
        net = load_weights(path)
        with self.lock:
            # swap is atomic: in-flight requests keep the evaluator they
            # already grabbed, new requests see the new one
            self.evaluator = NetEvaluator(net)
            self.net_path = str(path)

    def current(self) -> NetEvaluator:
        evaluator = self.evaluator
        if evaluator is None:
            raise HTTPException(503, detail="no net loaded")
        return evaluator


def create_app(net_path=None, visit_cap: int = 10_000, static_dir=None) -> FastAPI:
    app = FastAPI(title="komigo analysis service", version="1")
    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["*"], allow_headers=["*"]
    )
    state = ServiceState(net_path=net_path, visit_cap=visit_cap)
    app.state.service = state

    def check_visits(visits: int):
        if visits > state.visit_cap:
            raise HTTPException(422, detail=f"visits above cap {state.visit_cap}")

    @app.post("/analyze")
    def analyze(body: AnalyzeBody):
        check_visits(body.visits)
        for lam in body.lambdas:
            if not 0.0 <= lam <= 1.0:
                raise HTTPException(422, detail=f"lambda {lam} outside [0, 1]")
        evaluator = state.current()
        position = build_position(body)
        if position.is_over():
            raise HTTPException(400, detail={"error": "game is over", "index": len(body.moves)})
        ev = evaluator.evaluate(position)
        ctx = KomiContext(komi=body.komi, current_player=position.to_move)
        params = SigmoidParams(ev.alpha, ev.beta)
        xs, ys = winrate_curve(ctx, params, body.curve_range, body.curve_points)

        cfg = mcts.SearchConfig(max_visits=body.visits, lam=0.0)
        rng = np.random.default_rng(body.seed)
        _, stats = mcts.genmove(position, body.komi, cfg, evaluator, rng=rng)

        order = np.argsort(ev.policy[:-1])[::-1][: body.top_moves]
        policy_top = [
            {
                "move": move_to_vertex(goban.Move.from_index(int(i), position.size), position.size),
                "prior": float(ev.policy[i]),
            }
            for i in order
        ]

        lambda_info = []
        for lam in body.lambdas:
            lam_cfg = mcts.SearchConfig(max_visits=body.visits, lam=lam)
            lam_rng = np.random.default_rng(body.seed)
            move_idx, lam_stats = mcts.genmove(position, body.komi, lam_cfg, evaluator, rng=lam_rng)
            lambda_info.append(
                {
                    "lam": lam,
                    "xbar": lam_stats.root_xbar,
                    "move": move_to_vertex(
                        goban.Move.from_index(move_idx, position.size), position.size
                    ),
                }
            )

        return {
            "alpha": ev.alpha,
            "beta": ev.beta,
            "winrate": float(rho(0.0, ctx, params)),
            "to_move": "b" if position.to_move == BLACK else "w",
            "board": _board_rows(position),
            "move_number": position.move_number,
            "winrate_curve": [[float(x), float(y)] for x, y in zip(xs, ys)],
            "policy_top": policy_top,
            "search_stats": _stats_payload(stats, position.size),
            "lambda_info": lambda_info,
        }

    @app.post("/genmove")
    def genmove_endpoint(body: GenmoveBody):
        check_visits(body.visits)
        if not 0.0 <= body.lam <= 1.0:
            raise HTTPException(422, detail=f"lambda {body.lam} outside [0, 1]")
        evaluator = state.current()
        position = build_position(body)
        if position.is_over():
            raise HTTPException(400, detail={"error": "game is over", "index": len(body.moves)})
        cfg = mcts.SearchConfig(max_visits=body.visits, lam=body.lam)
        rng = np.random.default_rng(body.seed)
        move_idx, stats = mcts.genmove(position, body.komi, cfg, evaluator, rng=rng)
        return {
            "move": move_to_vertex(goban.Move.from_index(move_idx, position.size), position.size),
            "stats": _stats_payload(stats, position.size),
        }

    @app.get("/nets")
    def nets():
        evaluator = state.evaluator
        out = {"active": state.net_path}
        if evaluator is not None:
            cfg = evaluator.net.cfg
            out["config"] = {
                "blocks": cfg.blocks,
                "filters": cfg.filters,
                "input_planes": cfg.input_planes,
                "c_beta": cfg.c_beta,
            }
        return out

    @app.post("/nets/load")
    def nets_load(body: LoadBody):
        import os

        if not os.path.exists(body.path):
            raise HTTPException(404, detail=f"no such file: {body.path}")
        try:
            state.load(body.path)
        except WeightFormatError as exc:
            raise HTTPException(422, detail=str(exc)) from None
        return {"active": state.net_path}

    if static_dir:
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=static_dir, html=True), name="ui")

    return app


def _board_rows(state) -> list:
    sym = {goban.EMPTY: ".", BLACK: "x", WHITE: "o"}
    n = state.size
    return [
        "".join(sym[state.stones[r * n + c]] for c in range(n)) for r in range(n)
    ]


def _stats_payload(stats: mcts.SearchStats, size: int) -> dict:
    return {
        "root_alpha": stats.root_alpha,
        "root_beta": stats.root_beta,
        "root_winrate": stats.root_winrate,
        "root_xbar": stats.root_xbar,
        "chosen": move_to_vertex(goban.Move.from_index(stats.chosen, size), size),
        "moves": [
            {
                "move": move_to_vertex(goban.Move.from_index(s.move, size), size),
                "visits": s.visits,
                "q": s.q,
                "prior": s.prior,
            }
            for s in sorted(stats.per_move, key=lambda s: -s.visits)
        ],
    }
