"""Versioned little-endian binary model files.

Every model file starts with the magic ``LNLP``, a 4-byte section tag
(``PHRS`` for phrase models, ``EMBD`` for embeddings), and a u16 format
version. Strings are u32-length-prefixed UTF-8; matrices are stored as
row-major 32-bit floats. Readers validate magic, tag, and version and raise
:class:`ModelFormatError` on any mismatch or truncation.
"""

from __future__ import annotations

import struct
from pathlib import Path
from typing import BinaryIO

import numpy as np

from .exceptions import ModelFormatError

MAGIC = b"LNLP"
SECTION_PHRASER = b"PHRS"
SECTION_EMBEDDINGS = b"EMBD"
VERSION = 1


def write_header(fh: BinaryIO, section: bytes) -> None:
    fh.write(MAGIC + section + struct.pack("<H", VERSION))


def read_header(fh: BinaryIO, section: bytes, path: str | Path) -> None:
    head = fh.read(10)
    if len(head) != 10 or head[:4] != MAGIC:
        raise ModelFormatError(f"{path}: not a model file (bad magic)")
    if head[4:8] != section:
        raise ModelFormatError(
            f"{path}: wrong section {head[4:8]!r}, expected {section!r}"
        )
    (version,) = struct.unpack("<H", head[8:10])
    if version != VERSION:
        raise ModelFormatError(f"{path}: unsupported format version {version}")


def write_str(fh: BinaryIO, value: str) -> None:
    data = value.encode("utf-8")
    fh.write(struct.pack("<I", len(data)))
    fh.write(data)


def write_u8(fh: BinaryIO, value: int) -> None:
    fh.write(struct.pack("<B", value))


def write_u32(fh: BinaryIO, value: int) -> None:
    fh.write(struct.pack("<I", value))


def write_u64(fh: BinaryIO, value: int) -> None:
    fh.write(struct.pack("<Q", value))


def write_i64(fh: BinaryIO, value: int) -> None:
    fh.write(struct.pack("<q", value))


def write_f64(fh: BinaryIO, value: float) -> None:
    fh.write(struct.pack("<d", value))


def write_matrix(fh: BinaryIO, matrix: np.ndarray) -> None:
    rows, cols = matrix.shape
    fh.write(struct.pack("<II", rows, cols))
    fh.write(np.ascontiguousarray(matrix, dtype="<f4").tobytes())


def _read_exact(fh: BinaryIO, n: int) -> bytes:
    data = fh.read(n)
    if len(data) != n:
        raise ModelFormatError("truncated model file")
    return data


def read_str(fh: BinaryIO) -> str:
    (n,) = struct.unpack("<I", _read_exact(fh, 4))
    return _read_exact(fh, n).decode("utf-8")


def read_u8(fh: BinaryIO) -> int:
    return struct.unpack("<B", _read_exact(fh, 1))[0]


def read_u32(fh: BinaryIO) -> int:
    return struct.unpack("<I", _read_exact(fh, 4))[0]


def read_u64(fh: BinaryIO) -> int:
    return struct.unpack("<Q", _read_exact(fh, 8))[0]


def read_i64(fh: BinaryIO) -> int:
    return struct.unpack("<q", _read_exact(fh, 8))[0]


def read_f64(fh: BinaryIO) -> float:
    return struct.unpack("<d", _read_exact(fh, 8))[0]


def read_matrix(fh: BinaryIO) -> np.ndarray:
    rows, cols = struct.unpack("<II", _read_exact(fh, 8))
    data = _read_exact(fh, rows * cols * 4)
    return np.frombuffer(data, dtype="<f4").reshape(rows, cols).copy()


def peek_section(path: str | Path) -> bytes:
    """Section tag of a model file, for dispatching loaders."""
    with Path(path).open("rb") as fh:
        head = fh.read(10)
    if len(head) != 10 or head[:4] != MAGIC:
        raise ModelFormatError(f"{path}: not a model file (bad magic)")
    return head[4:8]
