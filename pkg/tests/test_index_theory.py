import math

import numpy as np
import pytest
import scipy.linalg as sla
from hypothesis import given, settings
from hypothesis import strategies as st

from twistpoints.errors import DegeneracyError, ParameterError, ResolutionError
from twistpoints.index import (SymplecticPath, admissible, admissible_primes, cz_index,
                               index_report, iterate_path, maslov_index, mean_index,
                               prime_sequence)
from twistpoints.index.primes import primes_below
from twistpoints.symplectic import random_symplectic_conjugator, standard_j

seeds = st.integers(0, 2 ** 31)


def _random_path(n, seed, lo=0.2, hi=1.9 * np.pi):
    rng = np.random.default_rng(seed)
    A = rng.standard_normal((2 * n, 2 * n))
    S = A + A.T
    S *= rng.uniform(lo, hi) / np.linalg.norm(S, 2)
    return S, SymplecticPath.exponential(standard_j(n) @ S)


def test_normalization_examples():
    J = standard_j(1)
    assert cz_index(SymplecticPath.exponential(J @ np.eye(2))) == -1
    assert cz_index(SymplecticPath.exponential(J @ -np.eye(2))) == 1
    assert cz_index(SymplecticPath.exponential(J @ np.diag([1.0, -1.0]))) == 0


def test_full_turn_loop_has_maslov_minus_one():
    loop = SymplecticPath.exponential(2 * np.pi * standard_j(1))
    assert maslov_index(loop) == -1
    assert maslov_index(loop.then(loop)) == -2


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 3), seeds)
def test_sampled_and_exact_routes_agree(n, seed):
    S, path = _random_path(n, seed)
    if np.min(np.abs(np.linalg.eigvalsh(S))) < 1e-3:
        return
    assert cz_index(path, "sampled") == cz_index(path, "exact")


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 3), seeds)
def test_refinement_keeps_index(n, seed):
    S, path = _random_path(n, seed)
    if np.min(np.abs(np.linalg.eigvalsh(S))) < 1e-3:
        return
    base = cz_index(path, "sampled")
    assert cz_index(path.refine(2), "sampled") == base
    assert cz_index(path.refine(4), "sampled") == base


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 3), seeds, st.integers(2, 9))
def test_iterates_stay_near_mean_line(n, seed, k):
    S, path = _random_path(n, seed, 0.5, 6.0)
    if not admissible(path.monodromy, k) or np.min(np.abs(np.linalg.eigvalsh(S))) < 1e-3:
        return
    rep = index_report(path)
    if not rep.nondegenerate:
        return
    ik = cz_index(iterate_path(path, k))
    assert k * rep.mean - n - 1e-6 <= ik <= k * rep.mean + n + 1e-6


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 3), seeds)
def test_conjugation_invariance(n, seed):
    S, path = _random_path(n, seed)
    if np.min(np.abs(np.linalg.eigvalsh(S))) < 1e-3:
        return
    P = random_symplectic_conjugator(n, np.random.default_rng(seed + 1), budget=3.0)
    a = index_report(path, method="sampled")
    b = index_report(path.conjugate(P), method="sampled")
    assert a.cz == b.cz
    assert abs(a.mean - b.mean) <= a.mean_error + b.mean_error + 1e-9


@settings(max_examples=30, deadline=None)
@given(st.integers(-3, 3), st.integers(-3, 3))
def test_loop_additivity(a, b):
    J = standard_j(1)
    la = SymplecticPath.exponential(2 * np.pi * a * J, samples=64 * abs(a) + 16)
    lb = SymplecticPath.exponential(2 * np.pi * b * J, samples=64 * abs(b) + 16)
    assert maslov_index(la.then(lb)) == maslov_index(la) + maslov_index(lb)


def test_rotation_mean_index():
    # rotation by theta per unit time: mean index -theta/pi in the clockwise convention
    path = SymplecticPath.exponential(0.5 * standard_j(1))
    rep = index_report(path)
    assert rep.mean == pytest.approx(-0.5 / math.pi, abs=1e-9)
    est = mean_index(SymplecticPath.from_samples(path.times, path.mats))
    assert abs(est.value - rep.mean) <= est.error


def test_degenerate_and_undersampled_paths():
    J = standard_j(1)
    with pytest.raises(DegeneracyError):
        cz_index(SymplecticPath.exponential(2 * np.pi * J))
    ts = np.linspace(0, 1, 3)
    coarse = SymplecticPath.from_samples(ts, [sla.expm(5.0 * t * J) for t in ts])
    with pytest.raises(ResolutionError):
        cz_index(coarse, "sampled")


def test_admissible_iterates():
    R = sla.expm(2 * np.pi / 3 * standard_j(1))
    assert not admissible(R, 3)
    assert admissible(R, 2)
    assert admissible_primes([2, 3, 5, 7], R) == [2, 5, 7]


def _is_prime(p):
    return p > 1 and all(p % d for d in range(2, int(p ** 0.5) + 1))


def test_primes_match_trial_division():
    assert list(primes_below(2000)) == [p for p in range(2000) if _is_prime(p)]
    seq = prime_sequence(24, 5)
    assert list(seq.primes) == [29, 31, 37, 41, 43]
    assert list(seq.gaps) == [2, 6, 4, 2]
    with pytest.raises(ParameterError):
        prime_sequence(10, 0)
