"""Action-window bookkeeping for the capped Hamiltonians.

With the window I = [p (a0 - eps0/3), p (a0 + eps0/3)) and the shift C
(twice the sup distance between the two capped Hamiltonians), the shifted
windows I + C and I + 2C stay inside [p a0 - p eps0, p a0 + p eps0) and
their common part still contains p a0 once C / p < eps0 / 6.

Arithmetic follows the inputs: ints and Fractions stay exact.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from ..errors import ParameterError


@dataclass(frozen=True)
class HalfOpen:
    """[lo, hi)."""

    lo: object
    hi: object

    @property
    def empty(self):
        return not self.lo < self.hi

    def shift(self, c):
        return HalfOpen(self.lo + c, self.hi + c)

    def contains(self, x):
        return self.lo <= x < self.hi

    def subset_of(self, other):
        return self.empty or (other.lo <= self.lo and self.hi <= other.hi)

    def intersect(self, other):
        return HalfOpen(max(self.lo, other.lo), min(self.hi, other.hi))

    def as_tuple(self):
        return (self.lo, self.hi)


def _third(x):
    return Fraction(x) / 3 if isinstance(x, (int, Fraction)) else x / 3.0


def _sixth(x):
    return Fraction(x) / 6 if isinstance(x, (int, Fraction)) else x / 6.0


@dataclass(frozen=True)
class IntervalLedger:
    I: HalfOpen
    I_plus_C: HalfOpen
    I_plus_2C: HalfOpen
    window: HalfOpen
    common: HalfOpen
    shift_small: bool          # C / p < eps0 / 6
    union_inside: bool         # I u (I + C) u (I + 2C) inside the window
    center_in_common: bool     # p a0 in I n (I + C) n (I + 2C)

    @property
    def verdict(self):
        return self.shift_small and self.union_inside and self.center_in_common

    def isolated(self, spectrum, center):
        """True iff the common window meets ``spectrum`` exactly in {center}."""
        hits = {x for x in spectrum if self.common.contains(x)}
        return hits == {center}

    def as_dict(self):
        return {"I": list(map(str, self.I.as_tuple())),
                "I_plus_C": list(map(str, self.I_plus_C.as_tuple())),
                "I_plus_2C": list(map(str, self.I_plus_2C.as_tuple())),
                "window": list(map(str, self.window.as_tuple())),
                "common": list(map(str, self.common.as_tuple())),
                "shift_small": self.shift_small, "union_inside": self.union_inside,
                "center_in_common": self.center_in_common, "verdict": self.verdict}


def interval_ledger(a0, eps0, p_j, C_jm) -> IntervalLedger:
    """Windows I, I + C, I + 2C around p_j a0 and the containment verdicts."""
    if not eps0 > 0:
        raise ParameterError("eps0 must be positive")
    if C_jm < 0:
        raise ParameterError("C_jm must be nonnegative")
    if not p_j > 0:
        raise ParameterError("p_j must be positive")
    e3 = _third(eps0)
    I = HalfOpen(p_j * (a0 - e3), p_j * (a0 + e3))
    I1, I2 = I.shift(C_jm), I.shift(2 * C_jm)
    window = HalfOpen(p_j * a0 - p_j * eps0, p_j * a0 + p_j * eps0)
    common = I.intersect(I1).intersect(I2)
    ratio = Fraction(C_jm) / p_j if isinstance(C_jm, (int, Fraction)) \
        and isinstance(p_j, int) else C_jm / p_j
    small = ratio < _sixth(eps0)
    inside = all(J.subset_of(window) for J in (I, I1, I2))
    center = common.contains(p_j * a0)
    return IntervalLedger(I, I1, I2, window, common, bool(small), bool(inside), bool(center))
