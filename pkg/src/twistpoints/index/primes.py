"""Consecutive primes with gap statistics."""
from __future__ import annotations

from dataclasses import dataclass
from math import isqrt, log

import numpy as np

from ..errors import ParameterError


def primes_below(limit):
    """All primes < limit (sieve of Eratosthenes)."""
    if limit <= 2:
        return np.zeros(0, dtype=np.int64)
    sieve = np.ones(limit, dtype=bool)
    sieve[:2] = False
    sieve[4::2] = False
    for p in range(3, isqrt(limit - 1) + 1, 2):
        if sieve[p]:
            sieve[p * p::2 * p] = False
    return np.flatnonzero(sieve).astype(np.int64)


@dataclass(frozen=True)
class PrimeSequence:
    primes: tuple
    gaps: tuple
    gap_ratios: tuple

    @property
    def max_gap_ratio(self):
        return max(self.gap_ratios) if self.gap_ratios else 0.0


def prime_sequence(start, count) -> PrimeSequence:
    """The first ``count`` primes >= start."""
    if start < 2:
        raise ParameterError("start must be >= 2")
    if count < 1:
        raise ParameterError("count must be >= 1")
    limit = int(start + max(count, 1) * (log(start + count) + 1) * 2) + 16
    while True:
        ps = primes_below(limit)
        ps = ps[ps >= start][:count]
        if len(ps) == count:
            break
        limit *= 2
    ps = [int(p) for p in ps]
    gaps = tuple(b - a for a, b in zip(ps, ps[1:]))
    ratios = tuple(g / a for g, a in zip(gaps, ps))
    return PrimeSequence(tuple(ps), gaps, ratios)


def admissible_primes(primes, M):
    """Primes k for which M is admissible."""
    from .cz import admissible
    return [p for p in primes if admissible(M, p)]
