"""Input-plane encoding for the network.

The stack is 8 most-recent own-stone maps, 8 most-recent opponent-stone
maps (newest first, zero-filled past the start of the game), plus either a
single side-to-move plane (17 planes: all ones when Black moves) or two
complementary color planes (18).  Komi is deliberately not encoded.
"""

from __future__ import annotations

import numpy as np

from .goban import BLACK, HISTORY_FRAMES, BoardState

PLANE_COUNTS = (17, 18)


def encode_planes(state: BoardState, num_planes: int = 17) -> np.ndarray:
    if num_planes not in PLANE_COUNTS:
        raise ValueError(f"input planes must be one of {PLANE_COUNTS}, got {num_planes}")
    n = state.size
    own = state.to_move
    opp = 3 - own
    planes = np.zeros((num_planes, n, n), dtype=np.float64)
    for i, layout in enumerate(state.recent[:HISTORY_FRAMES]):
        frame = np.frombuffer(layout, dtype=np.uint8).reshape(n, n)
        planes[i] = frame == own
        planes[HISTORY_FRAMES + i] = frame == opp
    if num_planes == 17:
        if own == BLACK:
            planes[16] = 1.0
    else:
        planes[16 if own == BLACK else 17] = 1.0
    return planes


def planes_to_bits(planes: np.ndarray) -> np.ndarray:
    """Binary uint8 view of a plane stack (all planes are 0/1 valued)."""
    return (planes > 0.5).astype(np.uint8)
