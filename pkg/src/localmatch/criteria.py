"""Matching criteria: choice functions and their analytic kernel pairs.

A criterion is a pair of choice functions acting on availability vectors:
``choose_first`` picks the explored node, ``choose_match`` picks its match.
Ties in argmin/argmax are broken uniformly at random.

For greedy, uni-min and uni-max the limiting kernel pair is available in
closed form and drives the fluid solver:

* first-node law       K(k)        = mu(k) / <mu, 1_{N+}>
* greedy match law     K'(k)(k')   = k'·mu(k') / <mu, x>        (k-independent)
* uni-min match law    K'(k)(k')   = tail(k'-1)^k - tail(k')^k
* uni-max match law    K'(k)(k')   = cdf(k')^k  - cdf(k'-1)^k

with cdf/tail the size-biased c.d.f. and tail of mu.  min-min and max-max are
simulation-only: no fluid kernel is defined for them.
"""

from __future__ import annotations

from enum import Enum

import numpy as np

from .errors import EmptyChoiceSet, UnsupportedKernel, ZeroMass
from .measures import RealMeasure, size_biased


class CriterionKind(Enum):
    GREEDY = "greedy"
    UNI_MIN = "uni-min"
    UNI_MAX = "uni-max"
    MIN_MIN = "min-min"
    MAX_MAX = "max-max"

    @classmethod
    def from_name(cls, name: str) -> "CriterionKind":
        for kind in cls:
            if kind.value == name:
                return kind
        raise ValueError(f"unknown criterion {name!r}; expected one of "
                         + ", ".join(k.value for k in cls))

    def has_kernel(self) -> bool:
        return self in (CriterionKind.GREEDY, CriterionKind.UNI_MIN, CriterionKind.UNI_MAX)


def _uniform_index(values, rng) -> int:
    return rng.below(len(values))


def _argmin_index(values, rng) -> int:
    best = min(values)
    ties = [i for i, v in enumerate(values) if v == best]
    return ties[rng.below(len(ties))]


def _argmax_index(values, rng) -> int:
    best = max(values)
    ties = [i for i, v in enumerate(values) if v == best]
    return ties[rng.below(len(ties))]


def choose_first(kind: CriterionKind, availabilities, rng) -> int:
    """Index of the explored node among the availability vector."""
    if len(availabilities) == 0:
        raise EmptyChoiceSet("no candidates for the first choice")
    if kind is CriterionKind.MIN_MIN:
        return _argmin_index(availabilities, rng)
    if kind is CriterionKind.MAX_MAX:
        return _argmax_index(availabilities, rng)
    return _uniform_index(availabilities, rng)


def choose_match(kind: CriterionKind, neighbor_availabilities, rng) -> int:
    """Index of the match among the neighbors' availability vector."""
    if len(neighbor_availabilities) == 0:
        raise EmptyChoiceSet("no candidates for the match choice")
    if kind is CriterionKind.GREEDY:
        return _uniform_index(neighbor_availabilities, rng)
    if kind in (CriterionKind.UNI_MIN, CriterionKind.MIN_MIN):
        return _argmin_index(neighbor_availabilities, rng)
    return _argmax_index(neighbor_availabilities, rng)


class KernelPair:
    """Limiting first/match kernels of a criterion at a fixed measure.

    ``K`` is a probability array over degrees 1..N (index 0 unused, kept for
    alignment); ``Kprime(k)`` returns the match law given a first degree k.
    Arrays are cached per k since the fluid right-hand side re-evaluates them
    many times per solve.
    """

    def __init__(self, kind: CriterionKind, mu: RealMeasure):
        if not kind.has_kernel():
            raise UnsupportedKernel(f"no analytic kernel for {kind.value}")
        w = mu.weights
        pos_mass = float(w[1:].sum())
        if pos_mass <= 0:
            raise ZeroMass("measure has no mass on positive degrees")
        first_moment = float(np.dot(np.arange(w.size), w))
        if first_moment <= 0:
            raise ZeroMass("measure has zero first moment")
        self.kind = kind
        self.support_bound = w.size - 1
        self.K = np.concatenate(([0.0], w[1:] / pos_mass))
        sb = size_biased(mu)
        self._sb_pmf = sb.pmf()
        self._cdf = sb.cdf
        self._tail = sb.tail
        self._cache: dict[int, np.ndarray] = {}

    def Kprime(self, k: int) -> np.ndarray:
        """Match law given first degree k, as an array over 0..N (0 entry 0)."""
        if k < 1:
            raise ValueError("first degree must be >= 1")
        if self.kind is CriterionKind.GREEDY:
            k = 0  # single cached entry: the law does not depend on k
        out = self._cache.get(k)
        if out is not None:
            return out
        n1 = self.support_bound + 1
        out = np.zeros(n1)
        if self.kind is CriterionKind.GREEDY:
            out[1:] = self._sb_pmf[1:]
        elif self.kind is CriterionKind.UNI_MIN:
            # P(match degree >= y) = tail(y-1)^k
            powtail = self._tail**k
            out[1] = 1.0 - powtail[1]  # tail(0)^k = 1 since degree-0 atoms carry no size-biased mass
            out[2:] = powtail[1:-1] - powtail[2:]
        else:  # UNI_MAX
            powcdf = self._cdf**k
            out[1] = powcdf[1]  # cdf(0)^k = 0
            out[2:] = powcdf[2:] - powcdf[1:-1]
        self._cache[k] = out
        return out


def kernel_pair(kind: CriterionKind, mu: RealMeasure) -> KernelPair:
    return KernelPair(kind, mu)
