"""Seeded randomness with an explicit, backend-portable draw protocol.

Every random decision in the simulators reduces to calls on a
:class:`RandomSource`, which pulls raw 64-bit words from a PCG64 bit
generator.  The compiled core consumes words from the *same* bit generator
through numpy's C interface, so a run is bit-for-bit reproducible across the
pure-Python and compiled backends as long as both honour the protocol below.

Draw protocol (must be mirrored exactly by any alternative backend):

* ``below(n)`` with ``n == 1`` consumes nothing and returns 0;
* ``below(n)`` with ``n >= 2`` repeatedly pulls raw words, rejecting values
  ``>= 2**64 - (2**64 % n)``, and returns ``word % n``;
* ``uniform()`` pulls one raw word and returns ``(word >> 11) * 2**-53``;
* a uniform choice among ``q`` alternatives is one ``below(q)`` call,
  so a singleton choice set consumes no randomness.

Experiments record the generator name (``pcg64``) and the root seed; replicate
streams are split off the root with ``SeedSequence.spawn``, so results do not
depend on how replicates are scheduled.
"""

from __future__ import annotations

import numpy as np
from numpy.random import PCG64, Generator, SeedSequence

GENERATOR_NAME = "pcg64"

_U64 = np.uint64
_TWO64 = 1 << 64


class RandomSource:
    """A seeded 64-bit stream with bounded-integer and uniform draws."""

    def __init__(self, seed):
        if isinstance(seed, SeedSequence):
            self._seedseq = seed
        else:
            self._seedseq = SeedSequence(seed)
        self.bit_generator = PCG64(self._seedseq)
        self._gen = Generator(self.bit_generator)

    @property
    def seed_entropy(self):
        return self._seedseq.entropy

    def u64(self) -> int:
        """Next raw 64-bit word (same words the compiled core pulls in C)."""
        return int(self.bit_generator.random_raw())

    def below(self, n: int) -> int:
        """Uniform integer on [0, n) by modulo rejection; n == 1 is free."""
        if n <= 1:
            if n == 1:
                return 0
            raise ValueError("below() requires n >= 1")
        limit = _TWO64 - (_TWO64 % n)
        while True:
            x = self.u64()
            if x < limit:
                return x % n

    def uniform(self) -> float:
        """Uniform double on [0, 1) with 53 random bits."""
        return (self.u64() >> 11) * 1.1102230246251565e-16

    def spawn(self, k: int) -> list["RandomSource"]:
        """k independent child sources (one per replicate/worker)."""
        return [RandomSource(ss) for ss in self._seedseq.spawn(k)]


class ScriptedSource:
    """Test double replaying a fixed queue of ``below``/``uniform`` results.

    Only meaningful against the pure-Python simulators; entries are consumed
    in call order and exhaustion raises IndexError.
    """

    def __init__(self, below_values=(), uniform_values=()):
        self._below = list(below_values)
        self._uniform = list(uniform_values)

    def below(self, n: int) -> int:
        if n <= 1:
            if n == 1:
                return 0
            raise ValueError("below() requires n >= 1")
        v = self._below.pop(0)
        if not 0 <= v < n:
            raise ValueError(f"scripted value {v} out of range for below({n})")
        return v

    def uniform(self) -> float:
        return self._uniform.pop(0)

    def exhausted(self) -> bool:
        return not self._below and not self._uniform
