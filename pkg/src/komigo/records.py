"""Training-data file format.

One record per line:

    <planes hex> <idx:count,idx:count,...> <komi> <B|W> <0|1>

The planes bitmap is plane-major, row-major, packed to bytes and hex
encoded.  The policy target is stored as sparse visit counts and
normalized on read.  A single header line pins board size and plane count:

    komigo-records 1 size=7 planes=17
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .goban import BLACK, WHITE

_FORMAT = "komigo-records"
_VERSION = 1


class RecordFormatError(Exception):
    pass


@dataclass
class TrainingRecord:
    planes: np.ndarray  # (P, N, N) uint8, binary
    policy_counts: np.ndarray  # (N*N+1,) visit counts at the searched root
    komi: float
    to_move: int
    z: int  # 1 if the player to move won the game, else 0

    @property
    def policy_target(self) -> np.ndarray:
        total = self.policy_counts.sum()
        if total <= 0:
            raise ValueError("record has no policy visits")
        return self.policy_counts / total

    @property
    def signed_komi(self) -> float:
        return self.komi if self.to_move == WHITE else -self.komi


def encode_record(rec: TrainingRecord) -> str:
    bits = np.packbits(rec.planes.reshape(-1).astype(np.uint8))
    sparse = ",".join(
        f"{i}:{int(c)}" for i, c in enumerate(rec.policy_counts) if c > 0
    )
    side = "B" if rec.to_move == BLACK else "W"
    return f"{bits.tobytes().hex()} {sparse} {rec.komi} {side} {rec.z}"


def decode_record(line: str, size: int, planes: int) -> TrainingRecord:
    try:
        hex_part, sparse, komi_s, side, z_s = line.split()
    except ValueError:
        raise RecordFormatError(f"record line has wrong field count: {line[:60]!r}") from None
    n_bits = planes * size * size
    raw = np.frombuffer(bytes.fromhex(hex_part), dtype=np.uint8)
    if raw.size * 8 < n_bits:
        raise RecordFormatError("planes bitmap too short")
    plane_arr = np.unpackbits(raw)[:n_bits].reshape(planes, size, size)
    counts = np.zeros(size * size + 1, dtype=np.int64)
    for pair in sparse.split(","):
        idx_s, _, count_s = pair.partition(":")
        idx = int(idx_s)
        if not 0 <= idx <= size * size:
            raise RecordFormatError(f"policy index {idx} out of range")
        counts[idx] = int(count_s)
    if side not in ("B", "W"):
        raise RecordFormatError(f"bad side {side!r}")
    z = int(z_s)
    if z not in (0, 1):
        raise RecordFormatError(f"bad outcome {z_s!r}")
    return TrainingRecord(
        planes=plane_arr,
        policy_counts=counts,
        komi=float(komi_s),
        to_move=BLACK if side == "B" else WHITE,
        z=z,
    )


def header_line(size: int, planes: int) -> str:
    return f"{_FORMAT} {_VERSION} size={size} planes={planes}"


def parse_header(line: str):
    parts = line.split()
    if len(parts) != 4 or parts[0] != _FORMAT:
        raise RecordFormatError(f"bad records header: {line!r}")
    if int(parts[1]) != _VERSION:
        raise RecordFormatError(f"unsupported records version {parts[1]}")
    fields = dict(p.split("=") for p in parts[2:])
    return int(fields["size"]), int(fields["planes"])


class RecordWriter:
    def __init__(self, path, size: int, planes: int):
        self.path = path
        self.size = size
        self.planes = planes
        self.count = 0
        self._fh = open(path, "w")
        self._fh.write(header_line(size, planes) + "\n")

    def write(self, rec: TrainingRecord):
        self._fh.write(encode_record(rec) + "\n")
        self.count += 1

    def close(self):
        self._fh.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()
        return False


def read_records(path) -> list:
    with open(path) as fh:
        lines = fh.read().splitlines()
    if not lines:
        raise RecordFormatError(f"{path}: empty records file")
    size, planes = parse_header(lines[0])
    return [decode_record(line, size, planes) for line in lines[1:] if line.strip()]


def load_window(paths, window: int) -> list:
    """Most recent `window` records across files, oldest files first."""
    out: list = []
    for path in paths:
        out.extend(read_records(path))
    return out[-window:] if window and len(out) > window else out
