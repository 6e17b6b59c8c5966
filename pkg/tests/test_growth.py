import numpy as np
import pytest

from twistpoints.calculus import (PerturbedHamiltonian, StructuredQuadratic, build_capped,
                                  build_pmu, forced_periodic_trajectories, growth_constants,
                                  linear_growth_ratio)
from twistpoints.calculus.growth import RowForcing, random_forcing
from twistpoints.normal_forms import NormalFormBlock


@pytest.fixture(scope="module")
def hyperbolic():
    SQ = StructuredQuadratic.from_normal_forms([NormalFormBlock.mm(2.0)])
    H = PerturbedHamiltonian(SQ.form)
    cp = build_capped(H, build_pmu(SQ, 13, 11), R0=1.0)
    return cp, H, growth_constants(cp, H)


def test_forcing_norms_are_exact(hyperbolic):
    cp, H, g = hyperbolic
    F = RowForcing(cp.Hkodot, *random_forcing(6, 2, 0.1, modes=3, seed=4))
    t = np.linspace(0.0, 1.0, 4096, endpoint=False)
    P = np.stack([F.forcing(s) for s in t])          # (T, N, d)
    quad = np.sqrt(np.mean(np.sum(P ** 2, axis=2), axis=0))
    assert np.allclose(quad, F.l2_norms(), rtol=1e-12)
    assert np.all(F.l2_norms() <= 0.1 + 1e-15) and np.all(F.l2_norms() > 0)


def test_hyperbolic_constants(hyperbolic):
    cp, H, g = hyperbolic
    for v in (g.M1, g.M2, g.C2, g.c, g.C1):
        assert np.isfinite(v) and v >= 0
    assert g.M1 >= 1.0 and g.M2 >= 1.0
    assert g.min_singular > 0
    # without a perturbation the only source of C1 is the forcing itself
    assert g.grad_h_sup == 0.0 and g.C1 == 0.0
    assert g.nonres_bound(0.1) == pytest.approx(g.M1 * g.M2 * (g.C2 + 2 ** -0.5) * 0.1)


def test_hyperbolic_forced_trajectories(hyperbolic):
    cp, H, g = hyperbolic
    s = forced_periodic_trajectories(cp.Hkodot, g, N=12, eps=0.1, steps=512, samples=256)
    assert s.ok
    assert np.all(s.closure <= 1e-8)


def test_linear_growth(hyperbolic):
    cp, H, g = hyperbolic
    assert linear_growth_ratio(cp.Hkodot, 10.0, samples=512, time_samples=9) <= g.c
