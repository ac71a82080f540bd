"""File formats: the RBM1 matrix container, CSV exports, history CSV.

RBM1 layout (little-endian throughout):

    bytes 0..3    magic ``b"RBM1"``
    bytes 4..11   rows, unsigned 64-bit
    bytes 12..19  cols, unsigned 64-bit
    then four blocks (q0, q1, q2, q3), each rows*cols float64 values in
    column-major order.
"""

from __future__ import annotations

import struct
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .matrix import RBMatrix

_MAGIC = b"RBM1"
_HEADER = struct.Struct("<4sQQ")

HISTORY_HEADER = "iter,objective,res,alpha,beta,rel_change,armijo_evals"


def save_rbm(path, matrix: RBMatrix) -> None:
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(_MAGIC, matrix.rows, matrix.cols))
        for block in matrix.blocks():
            fh.write(block.astype("<f8", copy=False).tobytes(order="F"))


def load_rbm(path) -> RBMatrix:
    data = Path(path).read_bytes()
    if len(data) < _HEADER.size:
        raise ValueError(f"{path}: too short for an RBM1 header")
    magic, rows, cols = _HEADER.unpack_from(data)
    if magic != _MAGIC:
        raise ValueError(f"{path}: bad magic {magic!r}, expected {_MAGIC!r}")
    count = rows * cols
    expected = _HEADER.size + 4 * count * 8
    if len(data) != expected:
        raise ValueError(
            f"{path}: payload size {len(data)} does not match header "
            f"({rows}x{cols} expects {expected})")
    blocks = []
    offset = _HEADER.size
    for _ in range(4):
        flat = np.frombuffer(data, dtype="<f8", count=count, offset=offset)
        blocks.append(flat.reshape((rows, cols), order="F"))
        offset += count * 8
    return RBMatrix(*blocks)


def export_block_csv(prefix, matrix: RBMatrix) -> list[Path]:
    """Lossy text export, one CSV per block, for manual inspection."""
    prefix = Path(prefix)
    paths = []
    for name, block in zip(("q0", "q1", "q2", "q3"), matrix.blocks()):
        p = prefix.with_name(prefix.name + f"_{name}.csv")
        np.savetxt(p, block, delimiter=",")
        paths.append(p)
    return paths


def format_history_csv(records: Iterable) -> str:
    lines = [HISTORY_HEADER]
    for r in records:
        lines.append(
            f"{r.iteration},{r.objective!r},{r.res!r},{r.alpha!r},"
            f"{r.beta!r},{r.rel_change!r},{r.armijo_evals}")
    return "\n".join(lines) + "\n"


def write_history_csv(path, records: Sequence) -> None:
    Path(path).write_text(format_history_csv(records))
