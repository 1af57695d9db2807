"""GTP (Go Text Protocol) v2 engine front end.

Core verbs plus engine extensions:

* ``sai-params``       -> current position's curve parameters "alpha beta"
* ``sai-lambda <v>``   -> set the margin-seeking parameter in [0, 1]
* ``sai-winrate <x>``  -> winrate of the player to move given x virtual
                          bonus points at the current komi

Replies always start with '=' (success) or '?' (failure) and end with a
blank line; the engine never exits on bad input, only on ``quit`` / EOF.
"""

from __future__ import annotations

import sys
from dataclasses import replace
from typing import Optional

import numpy as np

from . import __version__, goban, mcts
from .evaluator import FlatEvaluator
from .goban import BLACK, WHITE, IllegalMoveError, Move
from .sigmoid import KomiContext, SigmoidParams, rho

# GTP column letters skip I
_COLS = "ABCDEFGHJKLMNOPQRST"

KNOWN_COMMANDS = [
    "protocol_version",
    "name",
    "version",
    "known_command",
    "list_commands",
    "boardsize",
    "clear_board",
    "komi",
    "play",
    "genmove",
    "final_score",
    "showboard",
    "time_settings",
    "time_left",
    "quit",
    "sai-params",
    "sai-lambda",
    "sai-winrate",
]


class GtpError(Exception):
    pass


def vertex_to_move(vertex: str, size: int) -> Move:
    v = vertex.strip().upper()
    if v == "PASS":
        return Move.pass_()
    if v == "RESIGN":
        return Move.resign()
    if len(v) < 2 or v[0] not in _COLS[:size]:
        raise GtpError(f"invalid vertex {vertex!r}")
    try:
        number = int(v[1:])
    except ValueError:
        raise GtpError(f"invalid vertex {vertex!r}") from None
    if not 1 <= number <= size:
        raise GtpError(f"invalid vertex {vertex!r}")
    return Move.play(size - number, _COLS.index(v[0]))


def move_to_vertex(move: Move, size: int) -> str:
    if move.is_resign:
        return "resign"
    if move.is_pass:
        return "pass"
    return f"{_COLS[move.col]}{size - move.row}"


def parse_color(token: str) -> int:
    t = token.strip().lower()
    if t in ("b", "black"):
        return BLACK
    if t in ("w", "white"):
        return WHITE
    raise GtpError(f"invalid color {token!r}")


class EngineSession:
    """One GTP game session: board, komi, net, and search settings."""

    def __init__(
        self,
        evaluator=None,
        search: Optional[mcts.SearchConfig] = None,
        board_size: int = 7,
        komi: float = 9.5,
        max_board_size: int = 19,
        seed: int = 0,
    ):
        self.evaluator = evaluator if evaluator is not None else FlatEvaluator()
        self.search = search if search is not None else mcts.SearchConfig()
        self.max_board_size = max_board_size
        self.komi = komi
        self.rng = np.random.default_rng(seed)
        self.state = goban.new_board(board_size)

    # ----- command implementations -----

    def cmd_protocol_version(self, args):
        return "2"

    def cmd_name(self, args):
        return "komigo"

    def cmd_version(self, args):
        return __version__

    def cmd_known_command(self, args):
        return "true" if args and args[0] in KNOWN_COMMANDS else "false"

    def cmd_list_commands(self, args):
        return "\n".join(KNOWN_COMMANDS)

    def cmd_boardsize(self, args):
        if not args:
            raise GtpError("boardsize needs an argument")
        try:
            size = int(args[0])
        except ValueError:
            raise GtpError("boardsize needs an integer") from None
        if not goban.MIN_SIZE <= size <= self.max_board_size:
            raise GtpError("unacceptable size")
        self.state = goban.new_board(size)
        return ""

    def cmd_clear_board(self, args):
        self.state = goban.new_board(self.state.size)
        return ""

    def cmd_komi(self, args):
        if not args:
            raise GtpError("komi needs an argument")
        try:
            value = float(args[0])
        except ValueError:
            raise GtpError("komi needs a number") from None
        try:
            goban.check_komi(value)
        except ValueError:
            raise GtpError("komi must be a half-integer (no draws supported)") from None
        self.komi = value
        return ""

    def cmd_play(self, args):
        if len(args) < 2:
            raise GtpError("play needs color and vertex")
        color = parse_color(args[0])
        move = vertex_to_move(args[1], self.state.size)
        if self.state.is_over():
            raise GtpError("game is over")
        if color != self.state.to_move:
            raise GtpError(f"it is {goban.color_name(self.state.to_move)}'s turn")
        try:
            self.state = goban.play_move(self.state, move)
        except IllegalMoveError as exc:
            raise GtpError(f"illegal move: {exc}") from None
        return ""

    def cmd_genmove(self, args):
        if not args:
            raise GtpError("genmove needs a color")
        color = parse_color(args[0])
        if self.state.is_over():
            raise GtpError("game is over")
        if color != self.state.to_move:
            raise GtpError(f"it is {goban.color_name(self.state.to_move)}'s turn")
        move_idx, _ = mcts.genmove(
            self.state, self.komi, self.search, self.evaluator,
            rng=self.rng, add_noise=False, c_temp=0.0,
        )
        self.state = goban.play_index(self.state, move_idx)
        return move_to_vertex(Move.from_index(move_idx, self.state.size), self.state.size)

    def cmd_final_score(self, args):
        score = goban.area_score(self.state) - self.komi
        if score > 0:
            return f"B+{score}"
        return f"W+{-score}"

    def cmd_showboard(self, args):
        return "\n" + self.state.ascii()

    def cmd_time_settings(self, args):
        return ""  # accepted, ignored: search is visit-bounded

    def cmd_time_left(self, args):
        return ""

    def cmd_quit(self, args):
        return ""

    def cmd_sai_params(self, args):
        ev = self.evaluator.evaluate(self.state)
        return f"{ev.alpha:.6f} {ev.beta:.6f}"

    def cmd_sai_lambda(self, args):
        if not args:
            raise GtpError("sai-lambda needs a value")
        try:
            lam = float(args[0])
        except ValueError:
            raise GtpError("sai-lambda needs a number") from None
        if not 0.0 <= lam <= 1.0:
            raise GtpError("lambda must be in [0, 1]")
        self.search = replace(self.search, lam=lam)
        return ""

    def cmd_sai_winrate(self, args):
        if not args:
            raise GtpError("sai-winrate needs a komi correction")
        try:
            x = float(args[0])
        except ValueError:
            raise GtpError("sai-winrate needs a number") from None
        ev = self.evaluator.evaluate(self.state)
        ctx = KomiContext(komi=self.komi, current_player=self.state.to_move)
        return f"{float(rho(x, ctx, SigmoidParams(ev.alpha, ev.beta))):.6f}"

    def dispatch(self, command: str, args):
        handler = getattr(self, "cmd_" + command.replace("-", "_"), None)
        if handler is None:
            raise GtpError("unknown command")
        return handler(args)


def gtp_loop(instream=None, outstream=None, session: Optional[EngineSession] = None) -> int:
    """Read commands until quit/EOF.  Returns the process exit status."""
    instream = instream if instream is not None else sys.stdin
    outstream = outstream if outstream is not None else sys.stdout
    session = session if session is not None else EngineSession()

    for raw in instream:
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tokens = line.split()
        cmd_id = ""
        if tokens and tokens[0].isdigit():
            cmd_id = tokens[0]
            tokens = tokens[1:]
        if not tokens:
            continue
        command, args = tokens[0], tokens[1:]
        try:
            result = session.dispatch(command, args)
            prefix = f"={cmd_id}" if cmd_id else "="
            outstream.write(f"{prefix} {result}".rstrip() + "\n\n")
            outstream.flush()
            if command == "quit":
                return 0
        except GtpError as exc:
            prefix = f"?{cmd_id}" if cmd_id else "?"
            outstream.write(f"{prefix} {exc}\n\n")
            outstream.flush()
        except Exception as exc:  # engine must survive anything
            prefix = f"?{cmd_id}" if cmd_id else "?"
            outstream.write(f"{prefix} internal error: {exc}\n\n")
            outstream.flush()
    return 0
