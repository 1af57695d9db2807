"""SGF serialization for game records.

Dialect (documented in docs/sgf-dialect.md): FF[4]-style syntax restricted to
the properties we emit — SZ, KM, RE, AB, AW, PL, C, B, W.  Extensions:

* pass is B[] / W[] (empty point value);
* resignation is the literal point value "resign" (B[resign]);
* the root C property carries machine-readable lineage:
  ``id=<game id>`` and optionally ``branch=<parent id>@<move index>``.

Parse errors report the byte offset of the first offending character.
"""

from __future__ import annotations

from .goban import (
    BLACK,
    EMPTY,
    WHITE,
    BoardState,
    GameRecord,
    Move,
    board_from_layout,
    new_board,
)

_LETTERS = "abcdefghijklmnopqrs"


class SgfParseError(Exception):
    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (byte offset {offset})")
        self.offset = offset


def _point(row: int, col: int) -> str:
    return _LETTERS[col] + _LETTERS[row]


def _escape(text: str) -> str:
    return text.replace("\\", "\\\\").replace("]", "\\]")


def serialize_game(game: GameRecord) -> str:
    state = game.initial_state
    props = [f"GM[1]FF[4]SZ[{state.size}]KM[{game.komi}]"]
    black_setup = [p for p in range(state.size**2) if state.stones[p] == BLACK]
    white_setup = [p for p in range(state.size**2) if state.stones[p] == WHITE]
    if black_setup:
        props.append("AB" + "".join(f"[{_point(p // state.size, p % state.size)}]" for p in black_setup))
    if white_setup:
        props.append("AW" + "".join(f"[{_point(p // state.size, p % state.size)}]" for p in white_setup))
    if black_setup or white_setup or state.to_move != BLACK:
        props.append(f"PL[{'B' if state.to_move == BLACK else 'W'}]")
    if game.result != EMPTY:
        props.append(f"RE[{'B' if game.result == BLACK else 'W'}+]")
    comment = []
    if game.game_id:
        comment.append(f"id={game.game_id}")
    if game.branch_parent is not None:
        comment.append(f"branch={game.branch_parent[0]}@{game.branch_parent[1]}")
    if comment:
        props.append(f"C[{_escape(';'.join(comment))}]")

    out = ["(;", "".join(props)]
    color = state.to_move
    for move in game.moves:
        tag = "B" if color == BLACK else "W"
        if move.is_resign:
            out.append(f";{tag}[resign]")
        elif move.is_pass:
            out.append(f";{tag}[]")
        else:
            out.append(f";{tag}[{_point(move.row, move.col)}]")
        color = BLACK + WHITE - color
    out.append(")")
    return "".join(out)


class _Scanner:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    def skip_ws(self):
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def expect(self, ch: str):
        self.skip_ws()
        if self.pos >= len(self.text) or self.text[self.pos] != ch:
            raise SgfParseError(f"expected '{ch}'", self.pos)
        self.pos += 1

    def peek(self) -> str:
        self.skip_ws()
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def prop_ident(self) -> str:
        self.skip_ws()
        start = self.pos
        while self.pos < len(self.text) and self.text[self.pos].isupper():
            self.pos += 1
        if self.pos == start:
            raise SgfParseError("expected property identifier", self.pos)
        return self.text[start : self.pos]

    def prop_value(self) -> str:
        self.expect("[")
        out = []
        while True:
            if self.pos >= len(self.text):
                raise SgfParseError("unterminated property value", self.pos)
            ch = self.text[self.pos]
            if ch == "\\":
                if self.pos + 1 >= len(self.text):
                    raise SgfParseError("dangling escape", self.pos)
                out.append(self.text[self.pos + 1])
                self.pos += 2
            elif ch == "]":
                self.pos += 1
                return "".join(out)
            else:
                out.append(ch)
                self.pos += 1


def _parse_point(value: str, size: int, offset: int) -> tuple:
    if len(value) != 2 or value[0] not in _LETTERS[:size] or value[1] not in _LETTERS[:size]:
        raise SgfParseError(f"bad point {value!r}", offset)
    return _LETTERS.index(value[1]), _LETTERS.index(value[0])


def parse_game(text: str) -> GameRecord:
    sc = _Scanner(text)
    sc.expect("(")
    sc.expect(";")

    # root node properties
    root: dict = {}
    while sc.peek() not in (";", ")", ""):
        ident = sc.prop_ident()
        values = []
        while sc.peek() == "[":
            values.append(sc.prop_value())
        if not values:
            raise SgfParseError(f"property {ident} has no value", sc.pos)
        root.setdefault(ident, []).extend(values)

    try:
        size = int(root.get("SZ", ["19"])[0])
    except ValueError:
        raise SgfParseError("bad SZ value", sc.pos) from None
    try:
        komi = float(root.get("KM", ["0.5"])[0])
    except ValueError:
        raise SgfParseError("bad KM value", sc.pos) from None

    if "AB" in root or "AW" in root:
        stones = bytearray(size * size)
        for value in root.get("AB", []):
            r, c = _parse_point(value, size, sc.pos)
            stones[r * size + c] = BLACK
        for value in root.get("AW", []):
            r, c = _parse_point(value, size, sc.pos)
            stones[r * size + c] = WHITE
        to_move = WHITE if root.get("PL", ["B"])[0].upper() == "W" else BLACK
        try:
            initial = board_from_layout(size, bytes(stones), to_move)
        except ValueError as exc:
            raise SgfParseError(str(exc), sc.pos) from None
    else:
        try:
            initial = new_board(size)
        except ValueError as exc:
            raise SgfParseError(str(exc), sc.pos) from None
        if root.get("PL", ["B"])[0].upper() == "W":
            initial = board_from_layout(size, initial.stones, WHITE)

    result = EMPTY
    if "RE" in root:
        value = root["RE"][0].upper()
        if value.startswith("B"):
            result = BLACK
        elif value.startswith("W"):
            result = WHITE
        else:
            raise SgfParseError(f"bad RE value {value!r}", sc.pos)

    game_id = ""
    branch_parent = None
    if "C" in root:
        for part in root["C"][0].split(";"):
            if part.startswith("id="):
                game_id = part[3:]
            elif part.startswith("branch="):
                ref, _, idx = part[7:].partition("@")
                try:
                    branch_parent = (ref, int(idx))
                except ValueError:
                    raise SgfParseError("bad branch lineage", sc.pos) from None

    # move nodes
    moves = []
    expect_color = initial.to_move
    while sc.peek() == ";":
        sc.expect(";")
        ident = sc.prop_ident()
        if ident not in ("B", "W"):
            raise SgfParseError(f"unexpected move property {ident}", sc.pos)
        value_offset = sc.pos
        value = sc.prop_value()
        color = BLACK if ident == "B" else WHITE
        if color != expect_color:
            raise SgfParseError(f"move out of turn: {ident}", value_offset)
        if value == "":
            moves.append(Move.pass_())
        elif value == "resign":
            moves.append(Move.resign())
        else:
            r, c = _parse_point(value, size, value_offset)
            moves.append(Move.play(r, c))
        expect_color = BLACK + WHITE - expect_color
    sc.expect(")")

    return GameRecord(
        initial_state=initial,
        komi=komi,
        moves=moves,
        result=result,
        branch_parent=branch_parent,
        game_id=game_id,
    )


def serialize_collection(games) -> str:
    return "\n".join(serialize_game(g) for g in games) + "\n"


def parse_collection(text: str) -> list:
    games = []
    sc = _Scanner(text)
    while sc.peek() == "(":
        depth = 0
        start = sc.pos
        pos = sc.pos
        in_value = False
        while pos < len(sc.text):
            ch = sc.text[pos]
            if in_value:
                if ch == "\\":
                    pos += 1
                elif ch == "]":
                    in_value = False
            elif ch == "[":
                in_value = True
            elif ch == "(":
                depth += 1
            elif ch == ")":
                depth -= 1
                if depth == 0:
                    pos += 1
                    break
            pos += 1
        if depth != 0:
            raise SgfParseError("unbalanced parentheses", start)
        games.append(parse_game(sc.text[start:pos]))
        sc.pos = pos
    sc.skip_ws()
    if sc.pos < len(sc.text):
        raise SgfParseError("trailing garbage after games", sc.pos)
    return games
