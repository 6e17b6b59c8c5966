"""Support intervals, the twist-gap test and the parity case analysis for n <= 2.

Arithmetic is plain Python arithmetic on the inputs, so Fraction or int
inputs give exact results and floats give float results.
"""
from __future__ import annotations

from dataclasses import dataclass, field

from ..errors import DegeneracyError, ParameterError, UnsupportedError


@dataclass(frozen=True)
class SupportInterval:
    lo: object
    hi: object

    @property
    def width(self):
        return self.hi - self.lo

    def contains(self, x):
        return self.lo <= x <= self.hi

    def intersects(self, other):
        return not (self.hi < other.lo or other.hi < self.lo)


def support_interval(mean, n) -> SupportInterval:
    """[mean - n, mean + n]: where the local homology of an orbit can live."""
    return SupportInterval(mean - n, mean + n)


@dataclass(frozen=True)
class TwistGap:
    disjoint: bool
    margin: object


def twist_gap_check(i_z, i_z0, i_inf, p_j, p_jm, n) -> TwistGap:
    """Compare supports after the index shift that aligns the two iterates.

    The orbit z at period p_jm and the orbit z0 at period p_j have disjoint
    shifted supports iff |p_jm i_z - p_j i_z0 - (p_jm - p_j) i_inf| > 3n.
    """
    if not p_jm > p_j:
        raise ParameterError("need p_jm > p_j")
    gap = abs(p_jm * i_z - p_j * i_z0 - (p_jm - p_j) * i_inf)
    margin = gap - 3 * n
    return TwistGap(bool(margin > 0), margin)


_REAL_TAGS = {"PositiveReal", "NegativeReal"}


@dataclass(frozen=True)
class Theorem2Report:
    """Outcome of the parity argument for fixed points of a map with quadratic behaviour at infinity."""

    n: int
    scenario: str
    i_inf: int | None
    mean_inf: float | None
    parity: str
    flagged: tuple = ()
    trail: tuple = field(default=())
    consistent: bool = True

    def as_dict(self):
        return {"n": self.n, "scenario": self.scenario, "i_inf": self.i_inf,
                "mean_inf": self.mean_inf, "parity": self.parity,
                "flagged": list(self.flagged), "trail": list(self.trail),
                "consistent": self.consistent}


def _scenario(n, classes):
    tags = {c.tag for c in classes}
    if n == 1:
        if tags and tags <= _REAL_TAGS:
            return "real"
        if tags == {"UnitNonReal"}:
            return "elliptic"
    else:
        if tags == {"PositiveReal"} or tags == {"NegativeReal"}:
            return "real"
        if tags == {"ComplexQuadruple"}:
            return "quadruple"
    return "outside"


def theorem2_case_analysis(n, phi1Q_classes, fixed_points, infinity=None,
                           tol=1e-9) -> Theorem2Report:
    """Run the parity argument and flag fixed points that must be twist points.

    ``fixed_points`` are IndexReports of nondegenerate fixed points.
    ``infinity`` is the IndexReport of the linear map at infinity; when it is
    omitted, the first fixed point is taken as the one whose mean index
    equals the mean index at infinity.
    """
    if n not in (1, 2):
        raise UnsupportedError("the parity argument is only available for n = 1, 2")
    for k, fp in enumerate(fixed_points):
        if not fp.nondegenerate or fp.cz is None:
            raise DegeneracyError(f"fixed point {k} is degenerate")
    scen = _scenario(n, phi1Q_classes)
    trail = [f"eigenvalue scenario at infinity: {scen}"]
    if scen == "outside":
        trail.append("spectrum at infinity is outside the hypotheses; no verdict")
        return Theorem2Report(n, scen, None, None, "unknown", (), tuple(trail), True)

    if infinity is not None:
        i_inf, mean_inf = infinity.cz, infinity.mean
        trail.append(f"index at infinity {i_inf}, mean {mean_inf:.12g}")
    elif fixed_points:
        i_inf, mean_inf = fixed_points[0].cz, fixed_points[0].mean
        trail.append(f"index at infinity taken from fixed point 0: {i_inf}")
    else:
        i_inf, mean_inf = None, None

    consistent = True
    if scen == "elliptic":
        parity = "odd"
        trail.append("elliptic at infinity: mean non-integral, index the nearest odd integer")
    elif n == 1:
        parity = "integer"
        trail.append("real at infinity: mean index equals the index")
    else:
        parity = "even"
        trail.append("positive, negative or quadruple at infinity: index even and equal to mean")
    if i_inf is not None:
        if parity == "odd" and i_inf % 2 != 1:
            consistent = False
            trail.append(f"parity violation: index {i_inf} should be odd")
        if parity == "even" and i_inf % 2 != 0:
            consistent = False
            trail.append(f"parity violation: index {i_inf} should be even")
        if parity in ("integer", "even") and mean_inf is not None \
                and abs(mean_inf - i_inf) > tol:
            consistent = False
            trail.append("mean at infinity differs from the index")

    flagged = []
    for k, fp in enumerate(fixed_points):
        r = len(fp.unit_angles)
        if i_inf is None or abs(fp.cz - i_inf) != 1:
            continue
        if scen == "elliptic":
            if fp.cz % 2 == 0:
                flagged.append(k)
                trail.append(f"fixed point {k}: even index {fp.cz} forces an integral mean")
        elif n == 1 or fp.cz % 2 == 1:
            flagged.append(k)
            trail.append(f"fixed point {k}: index {fp.cz} = {i_inf} +- 1 and "
                         f"|index - mean| < 1 separate its mean from infinity")
        if r == 0 and abs(fp.mean - fp.cz) > tol:
            consistent = False
            trail.append(f"fixed point {k}: no unit eigenvalues but mean != index")
    return Theorem2Report(n, scen, i_inf, mean_inf, parity, tuple(flagged),
                          tuple(trail), consistent)


# ---------------------------------------------------------------- ledger over prime pairs

@dataclass(frozen=True)
class TwistLedgerRow:
    p_j: int
    p_jm: int
    orbit: int
    case: int
    disjoint: bool
    margin: object
    sufficient: bool


@dataclass(frozen=True)
class TwistLedger:
    rows: tuple
    m: int
    n: int

    @property
    def sound(self):
        """Every pair meeting the case's sufficient condition is disjoint."""
        return all(r.disjoint for r in self.rows if r.sufficient)

    def eventually_disjoint(self, orbit):
        """p_j beyond which every pair is disjoint for ``orbit`` (None if the last fails)."""
        rows = [r for r in self.rows if r.orbit == orbit]
        bad = [r.p_j for r in rows if not r.disjoint]
        if rows and not rows[-1].disjoint:
            return None
        return max(bad) if bad else 0

    def counts(self):
        out = {}
        for r in self.rows:
            key = (r.case, r.disjoint)
            out[key] = out.get(key, 0) + 1
        return out


def case1_min_m(i_z0, i_inf, n):
    """Smallest m with 2m |i_z0 - i_inf| > 3n (the prime gap over m steps is > 2m)."""
    d = abs(i_z0 - i_inf)
    if d == 0:
        raise ParameterError("no twist: the mean indices agree")
    m = 1
    while not 2 * m * d > 3 * n:
        m += 1
    return m


def twist_gap_ledger(primes, m, i_z0, i_inf, others, n) -> TwistLedger:
    """Disjointness decision for every pair (p_j, p_{j+m}) and every orbit mean.

    ``others`` are the means of the fixed points z (the orbit z0 itself may
    be included).  Case 1 (mean equal to that of z0) is sufficient when
    (p_{j+m} - p_j) |i_z0 - i_inf| > 3n; Case 2 when
    p_j |i_z - i_z0| - (p_{j+m} - p_j) |i_z - i_inf| > 3n.
    """
    ps = [int(p) for p in primes]
    rows = []
    for j in range(len(ps) - m):
        pj, pjm = ps[j], ps[j + m]
        g = pjm - pj
        for k, iz in enumerate(others):
            gap = twist_gap_check(iz, i_z0, i_inf, pj, pjm, n)
            if iz == i_z0:
                case = 1
                suff = g * abs(i_z0 - i_inf) > 3 * n
            else:
                case = 2
                suff = pj * abs(iz - i_z0) - g * abs(iz - i_inf) > 3 * n
            rows.append(TwistLedgerRow(pj, pjm, k, case, gap.disjoint, gap.margin, bool(suff)))
    return TwistLedger(tuple(rows), m, n)
