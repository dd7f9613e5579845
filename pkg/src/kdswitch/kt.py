"""Sequential add-half (Jeffreys mixture) estimation of a multinomial source.

The predictive after seeing counts N over an alphabet of size k is
(N[symbol] + 1/2) / (total + k/2); the probability assigned to a whole
block is the product of the sequential predictives and depends only on
the final counts.
"""

from __future__ import annotations

import math
from typing import Iterable, Sequence


class SymbolCounts:
    """Occurrence counters for symbols 0..k-1 plus their running total."""

    __slots__ = ("counts", "total")

    def __init__(self, alphabet_size: int) -> None:
        if alphabet_size < 2:
            raise ValueError(f"alphabet size must be >= 2, got {alphabet_size}")
        self.counts: list[int] = [0] * alphabet_size
        self.total: int = 0

    @property
    def alphabet_size(self) -> int:
        return len(self.counts)

    def add(self, symbol: int) -> None:
        self.counts[symbol] += 1
        self.total += 1

    def copy(self) -> "SymbolCounts":
        fresh = SymbolCounts.__new__(SymbolCounts)
        fresh.counts = list(self.counts)
        fresh.total = self.total
        return fresh

    @classmethod
    def from_symbols(cls, symbols: Iterable[int], alphabet_size: int) -> "SymbolCounts":
        sc = cls(alphabet_size)
        for s in symbols:
            check_symbol(s, alphabet_size)
            sc.add(s)
        return sc

    def __repr__(self) -> str:
        return f"SymbolCounts({self.counts!r})"


def check_symbol(symbol: int, alphabet_size: int) -> None:
    if not 0 <= symbol < alphabet_size:
        raise ValueError(f"symbol {symbol} outside alphabet of size {alphabet_size}")


def kt_predictive(counts: SymbolCounts, symbol: int) -> float:
    """Probability of seeing `symbol` next; strictly positive for every symbol."""
    check_symbol(symbol, counts.alphabet_size)
    return (counts.counts[symbol] + 0.5) / (counts.total + 0.5 * counts.alphabet_size)


def kt_predictive_vector(counts: SymbolCounts) -> list[float]:
    """All k predictives at once; sums to 1 by construction."""
    denom = counts.total + 0.5 * counts.alphabet_size
    return [(c + 0.5) / denom for c in counts.counts]


def kt_block_logprob(sequence: Sequence[int], alphabet_size: int) -> float:
    """Natural log of the probability of a block; the empty block has probability 1."""
    counts = SymbolCounts(alphabet_size)
    total = 0.0
    for s in sequence:
        total += math.log(kt_predictive(counts, s))
        counts.add(s)
    return total
