"""SYGT binary tensor files.

Layout (all integers little-endian)::

    offset 0   4 bytes   magic b"SYGT"
    offset 4   1 byte    version, 0x01
    offset 5   u32       K, number of modes
    offset 9   K x u32   mode sizes m_1 .. m_K
    ...        m x f64   values, first index fastest

Datasets are stored with the observation mode last.
"""

from __future__ import annotations

import os
import struct

import numpy as np

from .tensor import as_tensor, devectorize, vectorize

MAGIC = b"SYGT"
VERSION = 1


class SygtFormatError(ValueError):
    """Raised for malformed SYGT input; ``offset`` is where reading failed."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (at byte offset {offset})")
        self.offset = offset


def to_bytes(X) -> bytes:
    X = as_tensor(X)
    header = MAGIC + bytes([VERSION]) + struct.pack("<I", X.ndim)
    header += struct.pack(f"<{X.ndim}I", *X.shape)
    return header + vectorize(X).astype("<f8").tobytes()


def from_bytes(buf: bytes) -> np.ndarray:
    n = len(buf)
    if n < 4 or buf[:4] != MAGIC:
        raise SygtFormatError(f"bad magic {bytes(buf[:4])!r}, expected {MAGIC!r}", 0)
    if n < 5:
        raise SygtFormatError("truncated header: missing 1 byte for version", 4)
    if buf[4] != VERSION:
        raise SygtFormatError(f"unsupported version {buf[4]}", 4)
    if n < 9:
        raise SygtFormatError(f"truncated header: missing {9 - n} bytes for mode count", n)
    (K,) = struct.unpack_from("<I", buf, 5)
    if K == 0:
        raise SygtFormatError("mode count must be positive", 5)
    end = 9 + 4 * K
    if n < end:
        raise SygtFormatError(f"truncated header: missing {end - n} bytes for mode sizes", n)
    shape = struct.unpack_from(f"<{K}I", buf, 9)
    for k, s in enumerate(shape):
        if s == 0:
            raise SygtFormatError(f"mode {k + 1} has size 0", 9 + 4 * k)
    m = int(np.prod(shape, dtype=np.int64))
    need = end + 8 * m
    if n < need:
        raise SygtFormatError(f"truncated data: missing {need - n} bytes", n)
    if n > need:
        raise SygtFormatError(f"{n - need} trailing bytes after data", need)
    values = np.frombuffer(buf, dtype="<f8", count=m, offset=end).astype(np.float64)
    return devectorize(values, shape)


def write_sygt(path: str | os.PathLike, X) -> None:
    with open(path, "wb") as fh:
        fh.write(to_bytes(X))


def read_sygt(path: str | os.PathLike) -> np.ndarray:
    with open(path, "rb") as fh:
        return from_bytes(fh.read())
