"""Rules engine for square-board Go.

Positional superko, area (Tromp-Taylor) scoring, two consecutive passes end
the game.  Board states are immutable values: playing a move returns a new
state, so states can be shared freely between threads and search trees.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Optional

import numpy as np

EMPTY, BLACK, WHITE = 0, 1, 2

MIN_SIZE, MAX_SIZE = 2, 19

# How many recent board layouts a state keeps for feature encoding.
HISTORY_FRAMES = 8


class IllegalMoveError(Exception):
    """Move violates the rules (occupied point, suicide, superko)."""


class GameOverError(Exception):
    """Operation requires a live (or finished) game and got the opposite."""


def opponent(color: int) -> int:
    return BLACK + WHITE - color


def color_name(color: int) -> str:
    return {EMPTY: "empty", BLACK: "black", WHITE: "white"}[color]


# Zobrist table, fixed seed so hashes are reproducible across runs/processes.
# Indexed by [point][color-1]; points of boards up to 19x19 share the table.
_ZOBRIST = np.random.default_rng(0x6F7B1157).integers(
    1, 2**63, size=(MAX_SIZE * MAX_SIZE, 2), dtype=np.int64
)
# plain-int copy: python ints xor faster than numpy scalars in hot loops
_ZOBRIST_INT = [[int(v) for v in row] for row in _ZOBRIST]

_NEIGHBOR_CACHE: dict[int, list[tuple[int, ...]]] = {}


def _neighbors(size: int) -> list[tuple[int, ...]]:
    tbl = _NEIGHBOR_CACHE.get(size)
    if tbl is None:
        tbl = []
        for r in range(size):
            for c in range(size):
                ns = []
                if r > 0:
                    ns.append((r - 1) * size + c)
                if r < size - 1:
                    ns.append((r + 1) * size + c)
                if c > 0:
                    ns.append(r * size + c - 1)
                if c < size - 1:
                    ns.append(r * size + c + 1)
                tbl.append(tuple(ns))
        _NEIGHBOR_CACHE[size] = tbl
    return tbl


@dataclass(frozen=True)
class Move:
    """A play at (row, col), a pass, or a resignation."""

    row: int = -1
    col: int = -1
    is_pass: bool = False
    is_resign: bool = False

    @staticmethod
    def play(row: int, col: int) -> "Move":
        return Move(row=row, col=col)

    @staticmethod
    def pass_() -> "Move":
        return Move(is_pass=True)

    @staticmethod
    def resign() -> "Move":
        return Move(is_resign=True)

    def index(self, size: int) -> int:
        """Flat index: plays are row*size+col, pass is size*size."""
        if self.is_resign:
            raise ValueError("resign has no board index")
        if self.is_pass:
            return size * size
        return self.row * size + self.col

    @staticmethod
    def from_index(idx: int, size: int) -> "Move":
        if idx == size * size:
            return Move.pass_()
        return Move(row=idx // size, col=idx % size)

    def __str__(self) -> str:
        if self.is_resign:
            return "resign"
        if self.is_pass:
            return "pass"
        return f"({self.row},{self.col})"


class BoardState:
    """Immutable snapshot of a game in progress.

    `stones` is a row-major bytes object with EMPTY/BLACK/WHITE per point.
    `position_history` holds the Zobrist hash of every position seen so far
    (stones only — positional superko).  `recent` keeps the last few board
    layouts, newest first, for feature encoding; recent[0] is `stones`.
    """

    __slots__ = (
        "size",
        "stones",
        "to_move",
        "position_history",
        "consecutive_passes",
        "move_number",
        "hash",
        "recent",
        "resigned",
    )

    def __init__(
        self,
        size: int,
        stones: bytes,
        to_move: int,
        position_history: frozenset,
        consecutive_passes: int,
        move_number: int,
        hash_: int,
        recent: tuple,
        resigned: int = EMPTY,
    ):
        self.size = size
        self.stones = stones
        self.to_move = to_move
        self.position_history = position_history
        self.consecutive_passes = consecutive_passes
        self.move_number = move_number
        self.hash = hash_
        self.recent = recent
        self.resigned = resigned

    def is_over(self) -> bool:
        return self.consecutive_passes >= 2 or self.resigned != EMPTY

    def same_position(self, other: "BoardState") -> bool:
        return (
            self.size == other.size
            and self.stones == other.stones
            and self.to_move == other.to_move
            and self.consecutive_passes == other.consecutive_passes
        )

    def __repr__(self) -> str:
        return (
            f"BoardState(size={self.size}, move={self.move_number}, "
            f"to_move={color_name(self.to_move)}, passes={self.consecutive_passes})"
        )

    def ascii(self) -> str:
        sym = {EMPTY: ".", BLACK: "X", WHITE: "O"}
        rows = []
        for r in range(self.size):
            rows.append(" ".join(sym[self.stones[r * self.size + c]] for c in range(self.size)))
        return "\n".join(rows)


def new_board(size: int = 7) -> BoardState:
    """Empty board, Black to move."""
    if not (MIN_SIZE <= size <= MAX_SIZE):
        raise ValueError(f"board size must be in [{MIN_SIZE}, {MAX_SIZE}], got {size}")
    stones = bytes(size * size)
    return BoardState(
        size=size,
        stones=stones,
        to_move=BLACK,
        position_history=frozenset((0,)),
        consecutive_passes=0,
        move_number=0,
        hash_=0,
        recent=(stones,),
    )


def board_from_layout(size: int, stones: bytes, to_move: int) -> BoardState:
    """State from an explicit stone layout (position setup).

    Rejects layouts containing a zero-liberty group.  History starts fresh.
    """
    if len(stones) != size * size:
        raise ValueError("layout length does not match board size")
    neighbors = _neighbors(size)
    seen = bytearray(size * size)
    for p in range(size * size):
        if stones[p] != EMPTY and not seen[p]:
            group = _collect_group(stones, neighbors, p)
            for q in group:
                seen[q] = 1
            if not _group_has_liberty(stones, neighbors, p):
                raise ValueError(f"layout has a zero-liberty group at point {p}")
    h = _hash_stones(stones)
    return BoardState(
        size=size,
        stones=stones,
        to_move=to_move,
        position_history=frozenset((h,)),
        consecutive_passes=0,
        move_number=0,
        hash_=h,
        recent=(stones,),
    )


def _hash_stones(stones: bytes) -> int:
    h = 0
    for p, v in enumerate(stones):
        if v != EMPTY:
            h ^= _ZOBRIST_INT[p][v - 1]
    return h


def _group_has_liberty(stones, neighbors, start: int) -> bool:
    color = stones[start]
    stack = [start]
    seen = {start}
    while stack:
        p = stack.pop()
        for n in neighbors[p]:
            v = stones[n]
            if v == EMPTY:
                return True
            if v == color and n not in seen:
                seen.add(n)
                stack.append(n)
    return False


def _collect_group(stones, neighbors, start: int) -> list:
    color = stones[start]
    stack = [start]
    seen = {start}
    out = [start]
    while stack:
        p = stack.pop()
        for n in neighbors[p]:
            if stones[n] == color and n not in seen:
                seen.add(n)
                stack.append(n)
                out.append(n)
    return out


def _apply_play(state: BoardState, point: int):
    """Resolve a play: returns (new stones bytes, new hash) or raises."""
    if state.stones[point] != EMPTY:
        raise IllegalMoveError(f"point {point} is occupied")
    size = state.size
    neighbors = _neighbors(size)
    color = state.to_move
    opp = opponent(color)
    board = bytearray(state.stones)
    board[point] = color
    h = state.hash ^ _ZOBRIST_INT[point][color - 1]

    captured_any = False
    checked: set = set()
    for n in neighbors[point]:
        if board[n] == opp and n not in checked:
            if not _group_has_liberty(board, neighbors, n):
                group = _collect_group(board, neighbors, n)
                captured_any = True
                for q in group:
                    board[q] = EMPTY
                    h ^= _ZOBRIST_INT[q][opp - 1]
                checked.update(group)
            else:
                # liberty search already walked the group; remember its stones
                checked.update(_collect_group(board, neighbors, n))

    if not captured_any and not _group_has_liberty(board, neighbors, point):
        raise IllegalMoveError(f"suicide at point {point}")

    if h in state.position_history:
        raise IllegalMoveError(f"superko: play at {point} repeats a prior position")

    return bytes(board), h


def play_index(state: BoardState, idx: int) -> BoardState:
    """Fast-path play by flat index (size*size means pass)."""
    if state.is_over():
        raise GameOverError("game is over")
    size = state.size
    if idx == size * size:
        recent = (state.stones,) + state.recent[: HISTORY_FRAMES - 1]
        return BoardState(
            size=size,
            stones=state.stones,
            to_move=opponent(state.to_move),
            position_history=state.position_history,
            consecutive_passes=state.consecutive_passes + 1,
            move_number=state.move_number + 1,
            hash_=state.hash,
            recent=recent,
        )
    stones, h = _apply_play(state, idx)
    recent = (stones,) + state.recent[: HISTORY_FRAMES - 1]
    return BoardState(
        size=size,
        stones=stones,
        to_move=opponent(state.to_move),
        position_history=state.position_history | {h},
        consecutive_passes=0,
        move_number=state.move_number + 1,
        hash_=h,
        recent=recent,
    )


def play_move(state: BoardState, move: Move) -> BoardState:
    """Apply a move, returning the successor state."""
    if state.is_over():
        raise GameOverError("game is over")
    if move.is_resign:
        return BoardState(
            size=state.size,
            stones=state.stones,
            to_move=opponent(state.to_move),
            position_history=state.position_history,
            consecutive_passes=state.consecutive_passes,
            move_number=state.move_number + 1,
            hash_=state.hash,
            recent=state.recent,
            resigned=state.to_move,
        )
    if not move.is_pass and not (
        0 <= move.row < state.size and 0 <= move.col < state.size
    ):
        raise IllegalMoveError(f"move {move} outside the board")
    return play_index(state, move.index(state.size))


def legal_move_indices(state: BoardState) -> list:
    """Flat indices of all legal moves; pass (== size*size) is always last."""
    if state.is_over():
        raise GameOverError("game is over")
    size = state.size
    stones = state.stones
    neighbors = _neighbors(size)
    color = state.to_move
    opp = opponent(color)
    history = state.position_history
    out = []
    for p in range(size * size):
        if stones[p] != EMPTY:
            continue
        # fast path: an empty neighbor rules out suicide, and with no
        # adjacent opponent stones no capture can happen, so the new hash
        # is just the placed stone's
        has_empty = False
        has_opp = False
        for n in neighbors[p]:
            v = stones[n]
            if v == EMPTY:
                has_empty = True
            elif v == opp:
                has_opp = True
                break
        if has_empty and not has_opp:
            if state.hash ^ _ZOBRIST_INT[p][color - 1] not in history:
                out.append(p)
            continue
        try:
            _apply_play(state, p)
        except IllegalMoveError:
            continue
        out.append(p)
    out.append(size * size)
    return out


def legal_moves(state: BoardState) -> set:
    """Set of legal Moves at `state` (always contains Pass)."""
    return {Move.from_index(i, state.size) for i in legal_move_indices(state)}


def final_score(state: BoardState) -> int:
    """Tromp-Taylor area score, Black minus White, board points only.

    Empty regions touching stones of only one color count for that color;
    regions touching both colors (or none) count for neither, which scores
    seki without any life-and-death judgment.  Komi is applied by callers.
    """
    if not state.is_over():
        raise GameOverError("final_score requires a finished game")
    return area_score(state)


def area_score(state: BoardState) -> int:
    """final_score's region counting, usable on live positions too."""
    size = state.size
    stones = state.stones
    neighbors = _neighbors(size)
    score = 0
    visited = bytearray(size * size)
    for p in range(size * size):
        v = stones[p]
        if v == BLACK:
            score += 1
        elif v == WHITE:
            score -= 1
        elif not visited[p]:
            region = [p]
            visited[p] = 1
            stack = [p]
            touches_black = touches_white = False
            while stack:
                q = stack.pop()
                for n in neighbors[q]:
                    w = stones[n]
                    if w == EMPTY:
                        if not visited[n]:
                            visited[n] = 1
                            region.append(n)
                            stack.append(n)
                    elif w == BLACK:
                        touches_black = True
                    else:
                        touches_white = True
            if touches_black and not touches_white:
                score += len(region)
            elif touches_white and not touches_black:
                score -= len(region)
    return score


def check_komi(komi: float) -> float:
    """Komi must be a half-integer so games cannot be drawn."""
    if round(komi * 2) != komi * 2 or round(komi) == komi:
        raise ValueError(f"komi must be a half-integer, got {komi}")
    return float(komi)


def winner(state: BoardState, komi: float) -> int:
    """BLACK iff board score minus komi is positive; resignations short-circuit."""
    if not state.is_over():
        raise GameOverError("winner requires a finished game")
    if state.resigned != EMPTY:
        return opponent(state.resigned)
    check_komi(komi)
    return BLACK if final_score(state) - komi > 0 else WHITE


@dataclass
class GameRecord:
    """One finished game, possibly branched off another game mid-way."""

    initial_state: BoardState
    komi: float
    moves: list = field(default_factory=list)
    result: int = EMPTY
    branch_parent: Optional[tuple] = None  # (parent game id, move index)
    game_id: str = ""

    def replay(self) -> list:
        """All states visited, from initial_state through the final position."""
        states = [self.initial_state]
        for m in self.moves:
            states.append(play_move(states[-1], m))
        return states

    def final_state(self) -> BoardState:
        state = self.initial_state
        for m in self.moves:
            state = play_move(state, m)
        return state
