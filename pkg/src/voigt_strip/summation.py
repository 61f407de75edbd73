"""Deterministic compensated reductions.

Every series in the package is summed in ascending mode order. One-dimensional
sums go through ``math.fsum`` (exactly rounded, hence order independent);
batched sums run a Neumaier recurrence along the reduction axis, vectorised
over the remaining axes.
"""

from __future__ import annotations

import math

import numpy as np


def compensated_sum(terms, axis: int = 0):
    """Sum ``terms`` along ``axis`` with error compensation."""
    a = np.asarray(terms, dtype=float)
    if a.ndim == 0:
        return float(a)
    if a.ndim == 1:
        return math.fsum(a.tolist())
    a = np.moveaxis(a, axis, 0)
    if a.shape[0] == 0:
        return np.zeros(a.shape[1:])
    s = a[0].copy()
    comp = np.zeros_like(s)
    for term in a[1:]:
        t = s + term
        big = np.abs(s) >= np.abs(term)
        comp += np.where(big, (s - t) + term, (term - t) + s)
        s = t
    return s + comp


class BlockAccumulator:
    """Neumaier accumulator over a stream of array-valued partial sums.

    Blocks must be fed in ascending order; the result is then reproducible
    regardless of how the blocks themselves were produced.
    """

    def __init__(self, shape=()):
        self.s = np.zeros(shape)
        self.c = np.zeros(shape)

    def add(self, block_sum) -> None:
        term = np.asarray(block_sum, dtype=float)
        t = self.s + term
        big = np.abs(self.s) >= np.abs(term)
        self.c += np.where(big, (self.s - t) + term, (term - t) + self.s)
        self.s = t

    def total(self):
        return self.s + self.c
