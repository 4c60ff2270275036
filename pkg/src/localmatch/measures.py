"""Counting and real measures on the nonnegative integers.

A :class:`CountingMeasure` is an integer multiset of degrees (sparse map
degree -> count); a :class:`RealMeasure` is a dense vector of nonnegative
weights on ``0..N`` with an explicit support bound.  Both feed the simulator
(empirical availability measures) and the fluid solver (normalized states).

All operations are value-level: they return new measures and never mutate
their inputs, so instances are safe to share across threads.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import AtomMissing, NegativeDegree, SupportExceeded, ZeroFirstMoment


@dataclass(frozen=True)
class CountingMeasure:
    """Integer multiset on the nonnegative integers, stored sparsely."""

    counts: dict[int, int] = field(default_factory=dict)

    def __post_init__(self):
        clean = {}
        for y, c in self.counts.items():
            if y < 0:
                raise NegativeDegree(f"degree {y} < 0")
            if c < 0:
                raise ValueError(f"count {c} < 0 at degree {y}")
            if c > 0:
                clean[int(y)] = int(c)
        object.__setattr__(self, "counts", clean)

    @classmethod
    def from_degrees(cls, degrees) -> "CountingMeasure":
        counts: dict[int, int] = {}
        for d in degrees:
            counts[int(d)] = counts.get(int(d), 0) + 1
        return cls(counts)

    def __call__(self, y: int) -> int:
        return self.counts.get(y, 0)

    def mass(self) -> int:
        return sum(self.counts.values())

    def positive_mass(self) -> int:
        """Mass carried by strictly positive degrees."""
        return sum(c for y, c in self.counts.items() if y > 0)

    def max_degree(self) -> int:
        return max(self.counts, default=0)

    def items(self):
        return sorted(self.counts.items())


@dataclass(frozen=True)
class RealMeasure:
    """Nonnegative weights on 0..N, dense, with the bound N explicit."""

    weights: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        if w.ndim != 1 or w.size == 0:
            raise ValueError("weights must be a nonempty 1-d array")
        if np.any(w < 0):
            raise ValueError("weights must be nonnegative")
        object.__setattr__(self, "weights", w)

    @property
    def support_bound(self) -> int:
        return self.weights.size - 1

    def __call__(self, y: int) -> float:
        return float(self.weights[y]) if 0 <= y <= self.support_bound else 0.0

    def mass(self) -> float:
        return float(self.weights.sum())

    def positive_mass(self) -> float:
        return float(self.weights[1:].sum())


@dataclass(frozen=True)
class SizeBiasedDist:
    """Size-biased c.d.f. F and tail F̄ = 1 − F on 0..N.

    F(y) = sum_{j<=y} j·m(j) / <m, x>; the tail array is always the exact
    complement of the c.d.f., entry by entry.
    """

    cdf: np.ndarray
    tail: np.ndarray

    def pmf(self) -> np.ndarray:
        out = np.empty_like(self.cdf)
        out[0] = self.cdf[0]
        out[1:] = self.cdf[1:] - self.cdf[:-1]
        return out


def _as_weight_array(m) -> np.ndarray:
    if isinstance(m, RealMeasure):
        return m.weights
    if isinstance(m, CountingMeasure):
        n = m.max_degree()
        w = np.zeros(n + 1, dtype=float)
        for y, c in m.counts.items():
            w[y] = c
        return w
    raise TypeError(f"expected a measure, got {type(m).__name__}")


def moment(m, p: int) -> float:
    """p-th moment of the measure; p = 0 is the total mass."""
    if isinstance(m, CountingMeasure):
        if p == 0:
            return float(m.mass())
        return float(sum(c * y**p for y, c in m.counts.items()))
    w = _as_weight_array(m)
    if p == 0:
        return float(w.sum())
    degrees = np.arange(w.size, dtype=float)
    return float((degrees**p * w).sum())


def size_biased(m) -> SizeBiasedDist:
    """Size-biased distribution of m; requires a positive first moment."""
    w = _as_weight_array(m)
    degrees = np.arange(w.size, dtype=float)
    contrib = degrees * w
    total = contrib.sum()
    if total <= 0:
        raise ZeroFirstMoment("measure has zero first moment")
    cdf = np.cumsum(contrib)
    cdf /= cdf[-1]
    return SizeBiasedDist(cdf=cdf, tail=1.0 - cdf)


def remove_atom(m: CountingMeasure, y: int) -> CountingMeasure:
    """Remove one atom at degree y."""
    if m(y) < 1:
        raise AtomMissing(f"no atom at degree {y}")
    counts = dict(m.counts)
    counts[y] -= 1
    return CountingMeasure(counts)


def add_atom(m: CountingMeasure, y: int) -> CountingMeasure:
    if y < 0:
        raise NegativeDegree(f"degree {y} < 0")
    counts = dict(m.counts)
    counts[y] = counts.get(y, 0) + 1
    return CountingMeasure(counts)


def shift_atom_down(m: CountingMeasure, y: int, by: int) -> CountingMeasure:
    """Move one atom from y to y − by."""
    if by < 1:
        raise ValueError("shift must be by a positive amount")
    if y - by < 0:
        raise NegativeDegree(f"shift from {y} by {by} crosses zero")
    if m(y) < 1:
        raise AtomMissing(f"no atom at degree {y}")
    counts = dict(m.counts)
    counts[y] -= 1
    counts[y - by] = counts.get(y - by, 0) + 1
    return CountingMeasure(counts)


def normalize(m: CountingMeasure, n: int, support_bound: int | None = None) -> RealMeasure:
    """Scale a counting measure by 1/n onto a dense support 0..N."""
    if n < 1:
        raise ValueError("n must be positive")
    top = m.max_degree()
    if support_bound is None:
        support_bound = top
    elif top > support_bound:
        raise SupportExceeded(f"support reaches {top} > bound {support_bound}")
    w = np.zeros(support_bound + 1, dtype=float)
    for y, c in m.counts.items():
        w[y] = c / n
    return RealMeasure(w)


def measure_rows(m, kind: str = "count"):
    """Yield (degree, value) pairs for CSV output, ascending degree."""
    if isinstance(m, CountingMeasure):
        yield from m.items()
    else:
        for y, v in enumerate(_as_weight_array(m)):
            if v != 0.0:
                yield y, float(v)
