"""Acceptance checks, one test per criterion, each printing a PASS/FAIL line."""
import time
from fractions import Fraction

import numpy as np
import pytest
import scipy.linalg as sla

from conftest import record_criterion
from twistpoints.calculus.capped import build_capped, cap_level, sup_difference
from twistpoints.calculus.ledger import interval_ledger
from twistpoints.calculus.loops import StructuredQuadratic, build_pmu, check_nondeg_path
from twistpoints.harness.cli import main
from twistpoints.harness.report import strip_volatile
from twistpoints.harness.scenario import bundled_scenarios, load_scenario
from twistpoints.harness.suites import verify
from twistpoints.index import (SymplecticPath, case1_min_m, cz_index, index_report,
                               twist_gap_ledger)
from twistpoints.index.cz import mean_from_cz
from twistpoints.index.primes import primes_below
from twistpoints.matrix_log import closed_form_log, principal_log
from twistpoints.normal_forms import NormalFormBlock, build_normal_form
from twistpoints.symplectic import random_symplectic, standard_j


def _random_symmetric(rng, n, lo, hi):
    A = rng.standard_normal((2 * n, 2 * n))
    S = A + A.T
    return S * rng.uniform(lo, hi) / np.linalg.norm(S, 2)


def _records(report, suite, check=None):
    return [r for r in report.records if r.suite == suite and (check is None or r.check == check)]


# ---------------------------------------------------------------- 1-4: core

def test_criterion_01_log_round_trip():
    rng = np.random.default_rng(1)
    t0 = time.perf_counter()
    worst_exp = worst_lie = 0.0
    for _ in range(500):
        n = int(rng.integers(1, 5))
        M = np.asarray(random_symplectic(n, rng))
        X = np.asarray(principal_log(M))
        worst_exp = max(worst_exp, np.linalg.norm(sla.expm(X) - M) / np.linalg.norm(M))
        J = standard_j(n)
        lie = np.linalg.norm(J @ X + X.T @ J) / max(1.0, np.linalg.norm(X))
        worst_lie = max(worst_lie, lie)
    dt = time.perf_counter() - t0
    ok = worst_exp <= 1e-8 and worst_lie <= 1e-8 and dt < 10
    record_criterion(1, ok, f"exp err {worst_exp:.1e}, Lie err {worst_lie:.1e}, {dt:.1f}s")
    assert ok


def _appendix_blocks():
    blocks = [NormalFormBlock.n1(-1, b) for b in (-1, 0, 1)]
    for m in (2, 3):
        for b in ([1.0] * (m - 1) + [-1.0], [0.0] * (m - 1) + [1.0]):
            blocks.append(NormalFormBlock.nm(-1, b))
    blocks += [NormalFormBlock.rtheta(t) for t in (0.4, -1.3, 3.0)]
    for m in (1, 2, 3):
        blocks += [NormalFormBlock.mm(2.5, m), NormalFormBlock.mm(-0.4, m)]
        blocks += [NormalFormBlock.quad(1.7, 0.9, m), NormalFormBlock.quad(0.6, -2.2, m)]
    return blocks


def test_criterion_02_closed_form_logs():
    worst = 0.0
    blocks = _appendix_blocks()
    for blk in blocks:
        M = build_normal_form(blk)
        sign, X = closed_form_log(blk)
        worst = max(worst, float(np.linalg.norm(sign * sla.expm(np.asarray(X)) - M)))
    ok = worst <= 1e-10
    record_criterion(2, ok, f"{len(blocks)} blocks, worst residual {worst:.1e}")
    assert ok


def test_criterion_03_cz_normalization():
    rng = np.random.default_rng(3)
    failures = 0
    for _ in range(200):
        n = int(rng.integers(1, 4))
        S = _random_symmetric(rng, n, 0.1, 1.95 * np.pi)
        ind = int((np.linalg.eigvalsh(S) < 0).sum())
        path = SymplecticPath.exponential(standard_j(n) @ S)
        if cz_index(path, "sampled") != ind - n:
            failures += 1
    record_criterion(3, failures == 0, f"200 paths, {failures} failures")
    assert failures == 0


def test_criterion_04_mean_index_identity():
    rng = np.random.default_rng(4)
    worst, used = 0.0, 0
    while used < 100:
        n = int(rng.integers(1, 4))
        S = _random_symmetric(rng, n, 0.5, 12.0)
        path = SymplecticPath.exponential(standard_j(n) @ S)
        rep = index_report(path, method="sampled")
        if not rep.nondegenerate:
            continue
        used += 1
        worst = max(worst, abs(rep.mean - mean_from_cz(rep.cz, rep.unit_angles)))
    ok = worst <= 1e-6
    record_criterion(4, ok, f"100 paths, worst |mean - formula| {worst:.1e}")
    assert ok


# ---------------------------------------------------------------- 5-9: calculus

def _case_quadratic(case, theta):
    if case == 1:
        return StructuredQuadratic.from_normal_forms([NormalFormBlock.mm(np.exp(abs(theta)))])
    if case == 2:
        return StructuredQuadratic.from_normal_forms([NormalFormBlock.mm(-np.exp(abs(theta)))])
    if case == 3:
        return StructuredQuadratic.vg(1, theta)
    return StructuredQuadratic.vg(2, theta, 1)


def test_criterion_05_generating_loops():
    t0 = time.perf_counter()
    worst_loop = worst_angle = 0.0
    min_dist = np.inf
    bad_mu = 0
    runs = 0
    for theta in (1.0, 2.0, -0.7):
        for k, l in ((13, 11), (29, 23), (101, 97)):
            for case in (1, 2, 3, 4):
                SQ = _case_quadratic(case, theta)
                pmu = build_pmu(SQ, k, l)
                rep = check_nondeg_path(SQ, pmu)
                runs += 1
                worst_loop = max(worst_loop, pmu.loop_defect)
                bad_mu += pmu.mu_loop != pmu.mu
                min_dist = min(min_dist, rep.min_dist)
                if case in (3, 4):
                    worst_angle = max(worst_angle, rep.angle_error)
    dt = time.perf_counter() - t0
    ok = (worst_loop <= 1e-10 and bad_mu == 0 and min_dist >= 1e-3
          and worst_angle <= 1e-8 and dt < 30)
    record_criterion(5, ok, f"{runs} runs, loop {worst_loop:.1e}, mu mismatches {bad_mu}, "
                            f"min dist {min_dist:.2e}, angle {worst_angle:.1e}, {dt:.1f}s")
    assert ok


@pytest.mark.parametrize("name", ["pandh_n1", "pandh_n2"])
def test_criterion_06_loop_composition(name):
    report, _ = verify(load_scenario(name), ["le-pandh"])
    recs = _records(report, "le-pandh")
    shifts = [r.value for r in recs if r.check == "index-shift"]
    ok = report.passed and len(shifts) == 3
    vals = {r.check: r.value for r in recs if r.check != "index-shift"}
    record_criterion(6, ok, f"{name}: maps {vals['time-one-maps']:.1e}, action "
                            f"{vals['action-shift']:.1e}, iterate action "
                            f"{vals['action-iterate']:.1e}, shifts {shifts}")
    assert ok


def test_criterion_07_cap_equivalence():
    sc = load_scenario("desk_n1_k13_l11")
    sc.pairs = [[13, 11]]
    t0 = time.perf_counter()
    report, _ = verify(sc, ["cap-equivalence"])
    dt = time.perf_counter() - t0
    pair = _records(report, "cap-equivalence", "orbit-pairing")[0]
    ok = report.passed and dt < 60
    record_criterion(7, ok, f"pairing defect {pair.value:.1e}, "
                            f"{pair.detail.get('orbits')} orbits, {dt:.1f}s")
    assert ok


@pytest.mark.xfail(strict=True, reason="the unscaled sup difference exceeds the additive "
                                       "bound by the factor 2 rho' of the loop reparametrization")
def test_criterion_08_cap_bound_literal(desk):
    SQ, H = desk
    cp = build_capped(H, build_pmu(SQ, 13, 11))
    sup, _ = sup_difference(cp, cp.R0 + 1)
    ok = sup <= cp.C_bound
    record_criterion(8, ok, f"literal: sup {sup:.3f} vs bound {cp.C_bound:.3f} (expected fail)")
    assert ok


def test_criterion_08_cap_bound_scaled(desk):
    SQ, H = desk
    ok = True
    lines = []
    for k, l in ((13, 11), (29, 23), (101, 97)):
        cp = build_capped(H, build_pmu(SQ, k, l))
        sup, _ = sup_difference(cp, cp.R0 + 1, scaled=True)
        ok &= sup <= cp.C_bound
        lines.append(f"({k},{l}) {sup:.2f}<={cp.C_bound:.2f}")
    # |eig B_hat| <= (k - l)(|B| + pi |mean_inf|) + 2 pi n gives a uniform bound on S0 / (k - l)
    R0 = cp.R0
    B = np.linalg.norm(SQ.form.matrix(0.0), 2)
    ps = primes_below(400)
    worst, cap, count = 0.0, np.inf, 0
    for i in range(3, len(ps)):
        for j in range(i + 1, min(i + 4, len(ps))):
            pmu = build_pmu(SQ, ps[j], ps[i])
            d = ps[j] - ps[i]
            worst = max(worst, cap_level(pmu.B_hat, R0) / d)
            cap = min(cap, 0.5 * R0 ** 2 * (B + np.pi * abs(pmu.mean_inf) + np.pi * SQ.n) + 0.5)
            count += 1
    ok &= worst <= cap
    record_criterion(8, ok, "scaled: " + ", ".join(lines)
                     + f"; max S0/(k-l) over {count} pairs {worst:.2f} <= {cap:.2f}")
    assert ok


def test_criterion_09_growth_constants():
    sc = load_scenario("desk_n1_k13_l11")
    report, _ = verify(sc, ["growth-constants"])
    finite = _records(report, "growth-constants", "growth-finite")
    bounds = _records(report, "growth-constants", "nonresonance")
    ok = report.passed and len(finite) == 2 and len(bounds) == 2
    ok &= all(np.all(np.isfinite(r.value)) for r in finite)
    parts = [f"M1,M2,C2 {np.round(f.value, 3).tolist()} max|z| {b.value:.3f} <= {b.tol:.2f}"
             for f, b in zip(finite, bounds)]
    record_criterion(9, ok, "; ".join(parts))
    assert ok


# ---------------------------------------------------------------- 10-11: ledgers, harness

def test_criterion_10_twist_gap_ledger():
    primes = primes_below(10_000)
    i_z0, i_inf, n = Fraction(1, 2), Fraction(-1), 1
    others = [Fraction(1, 2), Fraction(-7, 3), Fraction(3), Fraction(2, 5)]
    m = case1_min_m(i_z0, i_inf, n)
    led = twist_gap_ledger(primes, m, i_z0, i_inf, others, n)
    exact = all(isinstance(r.margin, Fraction) for r in led.rows)
    report, _ = verify(load_scenario("twist_gap_primes"))
    a0, eps0 = Fraction(1, 3), Fraction(1, 10)
    # C / p = 1/100 is below eps0 / 6 = 1/60; 1/50 is above and must be rejected
    hold = all(interval_ledger(a0, eps0, p, Fraction(p, 100)).verdict for p in primes[:200])
    hold &= not any(interval_ledger(a0, eps0, p, Fraction(p, 50)).shift_small
                    for p in primes[:200])
    ok = led.sound and exact and report.passed and hold
    record_criterion(10, ok, f"{len(led.rows)} rows over {len(primes)} primes, m = {m}, "
                             f"counts {led.counts()}, windows hold {hold}")
    assert ok


@pytest.mark.parametrize("name", bundled_scenarios())
def test_criterion_11_determinism(name, tmp_path):
    texts, csvs = [], []
    for run in ("a", "b"):
        out = tmp_path / run
        main(["verify", "--scenario", name, "--out", str(out)])
        texts.append(strip_volatile((out / "report.json").read_text(encoding="utf-8")))
        csvs.append({p.name: p.read_bytes() for p in sorted(out.glob("*.csv"))})
    ok = texts[0] == texts[1] and csvs[0] == csvs[1]
    record_criterion(11, ok, f"{name}: report and {len(csvs[0])} csv files identical")
    assert ok
