import numpy as np
import pytest

from komigo import goban
from komigo.goban import BLACK, WHITE, GameRecord, Move, new_board, winner
from komigo.sgf import (
    SgfParseError,
    parse_collection,
    parse_game,
    serialize_collection,
    serialize_game,
)


def random_game(seed, size=5, komi=8.5):
    rng = np.random.default_rng(seed)
    state = new_board(size)
    moves = []
    while not state.is_over():
        ids = goban.legal_move_indices(state)
        plays = ids[:-1]
        idx = int(rng.choice(plays)) if plays and rng.random() < 0.9 else ids[-1]
        moves.append(Move.from_index(idx, size))
        state = goban.play_index(state, idx)
    return GameRecord(
        initial_state=new_board(size),
        komi=komi,
        moves=moves,
        result=winner(state, komi),
        game_id=f"g{seed}",
    )


def records_equal(a: GameRecord, b: GameRecord) -> bool:
    return (
        a.initial_state.same_position(b.initial_state)
        and a.komi == b.komi
        and a.moves == b.moves
        and a.result == b.result
        and a.branch_parent == b.branch_parent
        and a.game_id == b.game_id
    )


class TestRoundTrip:
    def test_fifty_random_games(self):
        for seed in range(50):
            game = random_game(seed)
            again = parse_game(serialize_game(game))
            assert records_equal(game, again), f"seed {seed}"

    def test_branch_game_with_setup_stones(self):
        parent = random_game(3, size=5)
        mid = parent.replay()[6]
        branch = GameRecord(
            initial_state=mid,
            komi=-2.5,
            moves=[Move.pass_(), Move.pass_()],
            result=WHITE,
            branch_parent=("g3", 6),
            game_id="g3-b1",
        )
        text = serialize_game(branch)
        assert "AB[" in text or "AW[" in text
        again = parse_game(text)
        assert records_equal(branch, again)
        assert again.branch_parent == ("g3", 6)

    def test_empty_record_is_header_only(self):
        game = GameRecord(initial_state=new_board(7), komi=9.5)
        text = serialize_game(game)
        assert text.startswith("(;")
        assert ";B[" not in text and ";W[" not in text
        again = parse_game(text)
        assert again.moves == []
        assert again.komi == 9.5

    def test_resigned_game(self):
        game = GameRecord(
            initial_state=new_board(7),
            komi=9.5,
            moves=[Move.play(3, 3), Move.resign()],
            result=BLACK,
        )
        again = parse_game(serialize_game(game))
        assert records_equal(game, again)
        assert again.final_state().is_over()

    def test_collection_round_trip(self):
        games = [random_game(s) for s in range(5)]
        parsed = parse_collection(serialize_collection(games))
        assert len(parsed) == 5
        for a, b in zip(games, parsed):
            assert records_equal(a, b)


class TestParseErrors:
    def test_truncated_reports_offset(self):
        text = serialize_game(random_game(1))[:-8]
        with pytest.raises(SgfParseError) as err:
            parse_game(text)
        assert err.value.offset <= len(text)
        assert "offset" in str(err.value)

    def test_unterminated_value(self):
        with pytest.raises(SgfParseError) as err:
            parse_game("(;SZ[7]KM[9.5];B[aa")
        assert err.value.offset >= 15

    def test_garbage(self):
        with pytest.raises(SgfParseError):
            parse_game("hello world")

    def test_bad_point(self):
        with pytest.raises(SgfParseError, match="bad point"):
            parse_game("(;SZ[7];B[zz])")

    def test_move_out_of_turn(self):
        with pytest.raises(SgfParseError, match="out of turn"):
            parse_game("(;SZ[7];B[aa];B[bb])")

    def test_illegal_setup_rejected(self):
        # a setup stone with no liberties cannot form a valid position
        with pytest.raises(SgfParseError):
            parse_game("(;SZ[2]AB[ab][ba]AW[aa])")
