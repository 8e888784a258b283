"""Quantisation of planar coordinates and Morton (Z-order) codes.

Both axes share one scale (the longer bounding-box side), so quadtree squares
stay square. A square at depth ``d`` is the code interval
``[p << 2(B-d), ((p + 1) << 2(B-d)) - 1]`` for its ``2d``-bit prefix ``p``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

DEFAULT_BITS = 16


@dataclass(frozen=True)
class Quantizer:
    bits: int
    min_x: int
    min_y: int
    span: int  # longer bounding-box side

    @classmethod
    def for_coords(cls, coords: np.ndarray, bits: int = DEFAULT_BITS) -> "Quantizer":
        coords = np.asarray(coords, dtype=np.int64).reshape(-1, 2)
        if len(coords) == 0:
            return cls(bits, 0, 0, 0)
        lo = coords.min(axis=0)
        hi = coords.max(axis=0)
        return cls(bits, int(lo[0]), int(lo[1]), int((hi - lo).max()))

    def quantize(self, coords: np.ndarray) -> np.ndarray:
        c = np.asarray(coords, dtype=np.int64).reshape(-1, 2) - [self.min_x, self.min_y]
        # (span + 1) keeps the maximum coordinate strictly below 2**bits
        return (c << self.bits) // (self.span + 1)

    def codes(self, coords: np.ndarray) -> np.ndarray:
        q = self.quantize(coords)
        return interleave(q[:, 0], q[:, 1])


def _spread(v: np.ndarray) -> np.ndarray:
    v = v.astype(np.uint64) & np.uint64(0xFFFFFFFF)
    v = (v | (v << np.uint64(16))) & np.uint64(0x0000FFFF0000FFFF)
    v = (v | (v << np.uint64(8))) & np.uint64(0x00FF00FF00FF00FF)
    v = (v | (v << np.uint64(4))) & np.uint64(0x0F0F0F0F0F0F0F0F)
    v = (v | (v << np.uint64(2))) & np.uint64(0x3333333333333333)
    v = (v | (v << np.uint64(1))) & np.uint64(0x5555555555555555)
    return v


def _compact(v: np.ndarray) -> np.ndarray:
    v = v.astype(np.uint64) & np.uint64(0x5555555555555555)
    v = (v | (v >> np.uint64(1))) & np.uint64(0x3333333333333333)
    v = (v | (v >> np.uint64(2))) & np.uint64(0x0F0F0F0F0F0F0F0F)
    v = (v | (v >> np.uint64(4))) & np.uint64(0x00FF00FF00FF00FF)
    v = (v | (v >> np.uint64(8))) & np.uint64(0x0000FFFF0000FFFF)
    v = (v | (v >> np.uint64(16))) & np.uint64(0x00000000FFFFFFFF)
    return v


def interleave(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """x bits on even positions, y bits on odd positions (up to 32 bits per axis)."""
    return (_spread(np.asarray(x)) | (_spread(np.asarray(y)) << np.uint64(1))).astype(np.int64)


def deinterleave(code: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    code = np.asarray(code).astype(np.uint64)
    return _compact(code).astype(np.int64), _compact(code >> np.uint64(1)).astype(np.int64)


def square_interval(prefix: int, depth: int, bits: int) -> tuple[int, int]:
    shift = 2 * (bits - depth)
    return prefix << shift, ((prefix + 1) << shift) - 1
