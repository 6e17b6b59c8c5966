"""Verification suites run by ``twistpoints verify``.

Each suite maps a Scenario to check records and plot rows.  Library
errors inside a suite become failed records so the report is always
complete.
"""
from __future__ import annotations

import time
from concurrent.futures import ThreadPoolExecutor
from fractions import Fraction

import numpy as np

from ..calculus.capped import build_capped
from ..calculus.forms import QuadraticForm
from ..calculus.growth import (forced_periodic_trajectories, growth_constants,
                               linear_growth_ratio)
from ..calculus.hamiltonians import PerturbedHamiltonian, sharp
from ..calculus.ledger import interval_ledger
from ..calculus.loops import StructuredQuadratic, build_leQ_loop, build_pmu, check_nondeg_path
from ..calculus.orbits import find_periodic_points, orbit_cz, pair_orbits, seed_grid, time_map
from ..errors import ScenarioError, TwistPointsError
from ..index.cz import index_report
from ..index.paths import SymplecticPath
from ..index.primes import primes_below
from ..index.twist import case1_min_m, theorem2_case_analysis, twist_gap_ledger
from ..symplectic import classify_eigenvalues
from .report import CheckRecord, VerificationReport
from .scenario import SUITES, Scenario, build_hamiltonian, build_quadratic

ANCHORS = {
    "admissible": "iterates k and l of phi^1_Q are admissible",
    "loop-closure": "phi^1 of the loop P^mu is the identity",
    "maslov-mu": "Maslov index of P^mu equals mu = (i_inf(k) - i_inf(l)) / 2",
    "capped-autonomous": "bar(P^mu) # Q^{x(k-l)} is time-independent",
    "path-nondegenerate": "e^{-J0 B_hat t} phi^l_Q avoids the eigenvalue 1 for t in [0, 1]",
    "angle-formula": "unit angles of the capped path interpolate l theta to k theta",
    "mu-bounds": "|2 mu - (k - l) mean_inf| <= 2n",
    "leq-loop": "the loop P of Q closes: phi^1_P = I",
    "leq-normal-form": "P # Q equals the autonomous normal form Q_hat",
    "leq-autonomous": "Q_hat is time-independent",
    "fixed-point": "z0 is a fixed point of phi^1_H",
    "time-one-maps": "phi^1_{P # H} = phi^1_H",
    "action-shift": "A_{P # H}(z0) = A_H(z0)",
    "index-shift": "cz of P # H along z0 minus cz of H equals 2 mu s at iterate s",
    "action-iterate": "A_{H^{k minus l}}(z0) = k A_H(z0)",
    "orbit-pairing": "periodic solutions of 0 wedge H^{x l} and H^{k odot l} coincide",
    "orbits-inside": "all periodic solutions lie in |z| < R0",
    "growth-finite": "M1, M2 and C2 are finite",
    "nonresonance": "forced periodic trajectories satisfy |z|_L2 <= M1 M2 (C2 + 1/sqrt 2)(C1 + eps)",
    "linear-growth": "|X_K| <= c (1 + |z|)",
    "case1-threshold": "equal means: disjoint once (p_{j+m} - p_j) |i_z0 - i_inf| > 3n",
    "case2-eventual": "different means: disjoint for all large p_j",
    "ledger-sound": "every sufficient condition implies disjointness",
    "exact-arithmetic": "rational index data give exact margins",
    "interval-containment": "I u (I + C) u (I + 2C) inside [p a0 - p eps0, p a0 + p eps0)",
    "interval-isolation": "I n (I + C) n (I + 2C) meets the action spectrum only in p a0",
    "interval-zero-shift": "C = 0 gives three equal windows",
    "theorem2-consistent": "parity data of the fixed points agree with the spectrum at infinity",
    "theorem2-twist": "flagged fixed points have mean index different from infinity",
    "theorem2-hypothesis": "at least two nondegenerate fixed points",
}


class SuiteRun:
    def __init__(self, suite):
        self.suite = suite
        self.records = []
        self.plots = {}

    def check(self, check, passed, value, tol, **detail):
        self.records.append(CheckRecord(self.suite, check, ANCHORS[check], bool(passed),
                                        value, tol, detail))

    def plot(self, kind, rows):
        self.plots.setdefault(kind, []).extend(rows)


def _structured(sc):
    Q = build_quadratic(sc)
    if not isinstance(Q, StructuredQuadratic):
        raise ScenarioError(f"suite needs Q given by blocks (scenario {sc.name!r})")
    return Q


def _pairs(sc):
    if not sc.pairs:
        raise ScenarioError(f"scenario {sc.name!r} lists no prime pairs")
    return [tuple(p) for p in sc.pairs]


# ---------------------------------------------------------------- suites

def suite_qklit(sc: Scenario, run: SuiteRun):
    SQ = _structured(sc)
    for k, l in _pairs(sc):
        tag = f"{k},{l}"
        try:
            pmu = build_pmu(SQ, k, l)
        except TwistPointsError as exc:
            run.check("admissible", False, str(exc), None, pair=tag)
            continue
        run.check("loop-closure", pmu.loop_defect <= sc.tol("loop"), pmu.loop_defect,
                  sc.tol("loop"), pair=tag)
        run.check("maslov-mu", pmu.mu_loop == pmu.mu, pmu.mu_loop, pmu.mu, pair=tag)
        run.check("capped-autonomous", pmu.time_dependence <= sc.tol("time_dependence"),
                  pmu.time_dependence, sc.tol("time_dependence"), pair=tag)
        rep = check_nondeg_path(SQ, pmu, tol=sc.tol("nondeg"))
        run.check("path-nondegenerate", rep.min_dist >= sc.tol("nondeg"), rep.min_dist,
                  sc.tol("nondeg"), pair=tag)
        if rep.angle_error is not None:
            run.check("angle-formula", rep.angle_error <= sc.tol("angle"), rep.angle_error,
                      sc.tol("angle"), pair=tag)
        # 2 mu = i(k) - i(l) and |i(s) - s mean| <= n give a window of half-width 2n;
        # the half-width n window is reported alongside but can fail
        two_mu = 2 * pmu.mu
        drift = abs(two_mu - (k - l) * pmu.mean_inf)
        run.check("mu-bounds", drift <= 2 * SQ.n + 1e-9, drift, 2 * SQ.n, pair=tag,
                  within_n=bool(drift <= SQ.n + 1e-9))
        step = max(1, (len(rep.times) - 1) // 50)
        run.plot("eigenvalue_distance", [(run.suite, tag, t, d) for t, d in
                                         zip(rep.times[::step], rep.dists[::step])])


def suite_leq(sc: Scenario, run: SuiteRun):
    Q = build_quadratic(sc)
    form = getattr(Q, "form", Q)
    L = build_leQ_loop(form)
    d = float(np.linalg.norm(L.P.flow(1.0) - np.eye(2 * form.n)))
    run.check("leq-loop", d <= 1e-8, d, 1e-8)
    PQ = L.P.sharp(form)
    ts = np.linspace(0.0, 1.0, 17)
    diff = max(float(np.linalg.norm(PQ.matrix(t) - L.Q_hat.matrix(t))) for t in ts)
    run.check("leq-normal-form", diff <= 1e-8, diff, 1e-8)
    td = L.Q_hat.time_dependence()
    run.check("leq-autonomous", td <= sc.tol("time_dependence"), td, sc.tol("time_dependence"))


def suite_pandh(sc: Scenario, run: SuiteRun):
    SQ = _structured(sc)
    fps = sc.h.get("fixed_points", [])
    if not fps:
        raise ScenarioError("le-pandh needs h.fixed_points")
    _, H = build_hamiltonian(sc, SQ)
    k, l = _pairs(sc)[0]
    spu = int(sc.option("le-pandh", "spu", 512))
    z0 = np.array(fps[0]["center"], float)
    pmu = build_pmu(SQ, k, l)
    P = PerturbedHamiltonian(pmu.P)
    PH = sharp(P, H)
    d = 2 * SQ.n
    Z = np.vstack([z0, z0 + 0.1, np.full(d, 0.7)])
    a = time_map(PH, Z, 1, spu)
    b = time_map(H, Z, 1, spu)
    res = float(np.linalg.norm(b.z[0] - z0))
    run.check("fixed-point", res <= sc.tol("flow"), res, sc.tol("flow"))
    fd = float(np.max(np.abs(a.z - b.z)))
    run.check("time-one-maps", fd <= sc.tol("flow"), fd, sc.tol("flow"))
    ad = abs(float(a.action[0] - b.action[0]))
    run.check("action-shift", ad <= sc.tol("action"), ad, sc.tol("action"))
    rows = []
    for s in (1, 2, 3):
        i_ph = orbit_cz(PH, z0, s)
        i_h = orbit_cz(H, z0, s)
        shift = None if i_ph is None or i_h is None else i_ph - i_h
        run.check("index-shift", shift == 2 * pmu.mu * s, shift, 2 * pmu.mu * s, s=s)
        rows.append((run.suite, "P#H", s, i_ph, (i_h + 2 * pmu.mu * s) if i_h is not None else ""))
        rows.append((run.suite, "H", s, i_h, i_h))
    run.plot("index_vs_iterate", rows)
    cp = build_capped(H, pmu)
    m = time_map(cp.Hkminus, z0[None, :], 1, spu)
    ai = abs(float(m.action[0]) - k * float(b.action[0]))
    run.check("action-iterate", ai <= sc.tol("action_iterate"), ai, sc.tol("action_iterate"),
              closure=float(np.linalg.norm(m.z[0] - z0)))


def suite_cap(sc: Scenario, run: SuiteRun):
    SQ = _structured(sc)
    _, H = build_hamiltonian(sc, SQ)
    k, l = _pairs(sc)[0]
    cp = build_capped(H, build_pmu(SQ, k, l))
    grid = int(sc.option("cap-equivalence", "grid", 41))
    margin = float(sc.option("cap-equivalence", "margin", 0.5))
    seeds = seed_grid(SQ.n, cp.R0 + margin, grid, sc.seed)
    # pairing is by starting point, so orbit indices are not needed here
    A = find_periodic_points(cp.zero_wedge, 1, seeds, tol=sc.tol("newton"), with_index=False)
    B = find_periodic_points(cp.Hkodot, 1, seeds, tol=sc.tol("newton"), with_index=False)
    pairs, la, lb = pair_orbits(A.orbits, B.orbits, sc.tol("pair"))
    worst = max([p[2] for p in pairs], default=0.0)
    ok = not la and not lb and len(A.orbits) == len(B.orbits) and len(A.orbits) > 0
    run.check("orbit-pairing", ok and worst <= sc.tol("pair"), worst, sc.tol("pair"),
              orbits=len(A.orbits), unpaired=len(la) + len(lb),
              actions=[o.action for o in B.orbits])
    far = max([float(np.linalg.norm(o.z0)) for o in A.orbits + B.orbits], default=0.0)
    run.check("orbits-inside", far < cp.R0, far, cp.R0)


def suite_growth(sc: Scenario, run: SuiteRun):
    SQ = _structured(sc)
    _, H = build_hamiltonian(sc, SQ)
    opts = sc.options.get("growth-constants", {})
    N = int(opts.get("trajectories", 100))
    eps = float(opts.get("eps", 0.1))
    steps = int(opts.get("steps", 1024))
    R0 = opts.get("R0")
    for k, l in _pairs(sc):
        tag = f"{k},{l}"
        if H.h.is_zero and R0 is None:
            raise ScenarioError("growth-constants with h = 0 needs options.R0")
        cp = build_capped(H, build_pmu(SQ, k, l), R0=R0)
        g = growth_constants(cp, H)
        fin = all(np.isfinite([g.M1, g.M2, g.C2]))
        run.check("growth-finite", fin, [g.M1, g.M2, g.C2], None, pair=tag, **g.as_dict(eps))
        tr = forced_periodic_trajectories(cp.Hkodot, g, N=N, eps=eps, seed=sc.seed, steps=steps)
        run.check("nonresonance", tr.ok, float(np.max(tr.l2_norms)), tr.bound, pair=tag,
                  converged=int(np.sum(tr.converged)), trajectories=N,
                  max_forcing=float(np.max(tr.forcing_norms)))
        ratio = linear_growth_ratio(cp.Hkodot, float(opts.get("growth_radius", 1e3)),
                                    seed=sc.seed)
        run.check("linear-growth", ratio <= g.c, ratio, g.c, pair=tag)


def suite_twist(sc: Scenario, run: SuiteRun):
    tw = sc.twist
    if not tw:
        raise ScenarioError("twist-gap needs the twist section")
    n = sc.n
    i_z0, i_inf = tw["i_z0"], tw["i_inf"]
    others = list(tw.get("others", []))
    below = int(sc.primes.get("below", 10000))
    ps = [int(p) for p in primes_below(below) if p > 2]
    m = int(sc.primes.get("m", case1_min_m(i_z0, i_inf, n)))
    means = [i_z0] + others
    led = twist_gap_ledger(ps, m, i_z0, i_inf, means, n)
    c1 = [r for r in led.rows if r.case == 1]
    run.check("case1-threshold", all(r.disjoint for r in c1) and all(r.sufficient for r in c1),
              sum(r.disjoint for r in c1), len(c1), m=m)
    for k in range(1, len(means)):
        if means[k] == i_z0:
            continue
        thr = led.eventually_disjoint(k)
        run.check("case2-eventual", thr is not None, thr, None, orbit=k, mean=means[k])
    run.check("ledger-sound", led.sound, len(led.rows), None, counts={
        f"case{c}-{'disjoint' if d else 'overlap'}": v for (c, d), v in sorted(led.counts().items())})
    rational = all(isinstance(x, (int, Fraction)) for x in means + [i_inf])
    if rational:
        exact = all(isinstance(r.margin, (int, Fraction)) for r in led.rows)
        run.check("exact-arithmetic", exact, len(led.rows), None)
    a0, eps0 = tw.get("a0", Fraction(1, 2)), tw.get("eps0", Fraction(1, 10))
    per_gap = tw.get("shift_per_gap", Fraction(1, 100))
    spectrum = list(tw.get("spectrum", [a0]))
    bad_inside, bad_iso, small = 0, 0, 0
    rows = []
    for j in range(len(ps) - m):
        pj, pjm = ps[j], ps[j + m]
        C = per_gap * (pjm - pj)
        L = interval_ledger(a0, eps0, pj, C)
        if L.shift_small:
            small += 1
            bad_inside += not (L.union_inside and L.center_in_common)
            bad_iso += not L.isolated([pj * x for x in spectrum], pj * a0)
        if j < 10 or j % 100 == 0:
            rows.append((pj, pjm, L.I.lo, L.I.hi, C, pj * a0, L.verdict))
    run.check("interval-containment", small > 0 and bad_inside == 0, small - bad_inside, small)
    run.check("interval-isolation", small > 0 and bad_iso == 0, small - bad_iso, small)
    Z = interval_ledger(a0, eps0, ps[-1], 0)
    run.check("interval-zero-shift", Z.I == Z.I_plus_C == Z.I_plus_2C, str(Z.I.as_tuple()), None)
    run.plot("action_intervals", rows)


def suite_theorem2(sc: Scenario, run: SuiteRun):
    Q, H = build_hamiltonian(sc)
    form = getattr(Q, "form", Q)
    opts = sc.theorem2
    radius = float(opts.get("radius", 3.0))
    seeds = seed_grid(sc.n, radius, int(opts.get("grid", 21)), sc.seed)
    found = find_periodic_points(H, 1, seeds, tol=sc.tol("newton"))
    reps = [o.index for o in found.orbits if o.index is not None]
    good = [r for r in reps if r.nondegenerate]
    run.check("theorem2-hypothesis", len(good) >= 2, len(good), 2,
              orbits=[o.as_dict() for o in found.orbits])
    if form.is_autonomous:
        inf = index_report(SymplecticPath.exponential(form.generator(0.0)))
    else:
        inf = index_report(SymplecticPath.from_function(form.flow, 256))
    classes = classify_eigenvalues(form.monodromy)
    rep = theorem2_case_analysis(sc.n, classes, good, inf)
    run.check("theorem2-consistent", rep.consistent, rep.scenario, None, **rep.as_dict())
    gaps = [abs(good[k].mean - inf.mean) for k in rep.flagged]
    run.check("theorem2-twist", bool(rep.flagged) and min(gaps) > 1e-6,
              min(gaps) if gaps else None, 1e-6, flagged=list(rep.flagged))


RUNNERS = {
    "lemma-qklit": suite_qklit,
    "le-q": suite_leq,
    "le-pandh": suite_pandh,
    "cap-equivalence": suite_cap,
    "growth-constants": suite_growth,
    "twist-gap": suite_twist,
    "theorem2-cases": suite_theorem2,
}


def default_suites(sc: Scenario):
    if sc.suites:
        return list(sc.suites)
    out = []
    blocks = "blocks" in sc.Q
    if blocks and sc.pairs:
        out.append("lemma-qklit")
    if sc.Q:
        out.append("le-q")
    if blocks and sc.pairs and sc.h.get("fixed_points"):
        out.append("le-pandh")
    if blocks and sc.pairs and sc.h:
        out += ["cap-equivalence", "growth-constants"]
    if sc.twist:
        out.append("twist-gap")
    if sc.theorem2:
        out.append("theorem2-cases")
    return out


def run_suite(sc: Scenario, name: str) -> SuiteRun:
    run = SuiteRun(name)
    try:
        RUNNERS[name](sc, run)
    except ScenarioError:
        raise
    except TwistPointsError as exc:
        run.records.append(CheckRecord(name, "suite-error", type(exc).__name__, False,
                                       str(exc), None))
    return run


def verify(sc: Scenario, suites=None, threads=1):
    """Run suites and assemble a report in canonical order; returns (report, plots)."""
    names = list(suites) if suites else default_suites(sc)
    for s in names:
        if s not in SUITES:
            raise ScenarioError(f"unknown suite {s!r}")
    names = [s for s in SUITES if s in names]
    report = VerificationReport(sc.name, seed=sc.seed)

    def timed(name):
        t0 = time.perf_counter()
        r = run_suite(sc, name)
        return r, time.perf_counter() - t0

    if threads > 1 and len(names) > 1:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            results = list(ex.map(timed, names))
    else:
        results = [timed(s) for s in names]
    plots = {}
    for name, (r, dt) in zip(names, results):
        report.records.extend(r.records)
        report.runtimes[name] = dt
        for kind, rows in r.plots.items():
            plots.setdefault(kind, []).extend(rows)
    return report, plots
