"""Fenwick tree over a difference array: range add, point query.

1-based positions 1..size, int64 values. Backed by the same jitted
primitives the estimator kernels use, so there is exactly one
implementation of the update/query loops in the package.
"""

from __future__ import annotations

import numpy as np

from . import _kernels


class FenwickTree:
    """range_add(l, r, v) then query(i) returns the sum of adds covering i."""

    __slots__ = ("_bit",)

    def __init__(self, size: int):
        if size < 1:
            raise ValueError("size must be >= 1")
        self._bit = np.zeros(size + 1, dtype=np.int64)

    @property
    def size(self) -> int:
        return self._bit.size - 1

    def _check(self, i: int):
        if not 1 <= i <= self.size:
            raise IndexError(f"position {i} outside [1, {self.size}]")

    def range_add(self, lo: int, hi: int, value: int):
        self._check(lo)
        self._check(hi)
        if lo > hi:
            raise IndexError(f"empty range [{lo}, {hi}]")
        _kernels.bit_range_add(self._bit, lo, hi, value)

    def query(self, i: int) -> int:
        self._check(i)
        return int(_kernels.bit_prefix(self._bit, i))

    def is_zero(self) -> bool:
        """True when every position queries to zero (all adds undone)."""
        return not self._bit.any()

    def raw(self) -> np.ndarray:
        """Internal array (index 0 unused); exposed for the estimator."""
        return self._bit
