import numpy as np
import pytest
import scipy.linalg as sla
from hypothesis import given, settings
from hypothesis import strategies as st

from twistpoints.calculus import (BumpTerm, CappedQuadratic, CompactPerturbation, Eta,
                                  PerturbedHamiltonian, QuadraticForm, Rho, build_capped,
                                  build_pmu, find_periodic_points, flow, integrate,
                                  linear_payload_sup, time_map)
from twistpoints.calculus.hamiltonians import bar, iterate, quadratic, sharp
from twistpoints.symplectic import symplectic_residual

seeds = st.integers(0, 2 ** 31)


def _sym(rng, d, scale=1.0):
    A = rng.standard_normal((d, d))
    return scale * 0.5 * (A + A.T)


# ---------------------------------------------------------------- profiles

def test_rho_profile():
    rho = Rho()
    t = np.linspace(0.0, 1.0, 20001)
    d = rho.deriv(t)
    assert np.all(d >= 0) and d.max() < 2.0
    assert rho.max_deriv == pytest.approx(d.max(), rel=1e-6)
    assert rho(0.0) == pytest.approx(0.0, abs=1e-15) and rho(1.0) == pytest.approx(1.0, abs=1e-13)
    # cumulative trapezoid on rho' reproduces the quadrature of rho
    cum = np.concatenate([[0.0], np.cumsum(0.5 * (d[1:] + d[:-1]) * np.diff(t))])
    assert np.max(np.abs(cum[::500] - rho(t[::500]))) <= 1e-8
    s = np.linspace(0.0, 2.0, 401)
    assert np.allclose(rho(s), rho(2.0 - s), atol=1e-14)
    fd = (rho.deriv(t[1:-1] + 1e-6) - rho.deriv(t[1:-1] - 1e-6)) / 2e-6
    assert np.max(np.abs(fd - rho.deriv2(t[1:-1]))) <= 1e-5


@pytest.mark.parametrize("S0", [0.0, 1.0, 11.5])
def test_eta_profile(S0):
    eta = Eta(S0)
    t = np.linspace(-S0 - 5, S0 + 5, 4001)
    assert np.allclose(eta(-t), -eta(t), atol=1e-14)
    inner = np.abs(t) <= S0
    assert np.all(eta(t)[inner] == 0.0)
    outer = t >= S0 + 2
    assert np.allclose(eta(t)[outer], t[outer] - (S0 + 1.0), atol=1e-12)
    d = eta.deriv(t)
    assert np.all((d >= 0) & (d <= 1))
    fd = np.gradient(eta(t), t)
    assert np.max(np.abs(fd[1:-1] - d[1:-1])) <= 1e-3


# ---------------------------------------------------------------- quadratic calculus

@settings(max_examples=25, deadline=None)
@given(st.integers(1, 3), seeds)
def test_quadratic_flow_matches_matrix_flow(n, seed):
    rng = np.random.default_rng(seed)
    Q = QuadraticForm.constant(_sym(rng, 2 * n))
    _, M, _ = flow(quadratic(Q), np.zeros(2 * n))
    assert np.max(np.abs(M - Q.flow(1.0))) <= 1e-8
    assert symplectic_residual(M) <= 1e-9


@settings(max_examples=25, deadline=None)
@given(st.integers(1, 3), seeds, st.integers(2, 4))
def test_form_calculus_identities(n, seed, k):
    rng = np.random.default_rng(seed)
    F = QuadraticForm.constant(_sym(rng, 2 * n))
    G = QuadraticForm.rotated(_sym(rng, 2 * n, 0.5) @ np.eye(2 * n))
    assert np.allclose(F.sharp(G).flow(1.0), F.flow(1.0) @ G.flow(1.0), atol=1e-8)
    assert np.allclose(F.bar().flow(1.0), np.linalg.inv(F.flow(1.0)), atol=1e-8)
    assert np.allclose(F.iterate(k).flow(1.0), np.linalg.matrix_power(F.flow(1.0), k),
                       atol=1e-8 * np.linalg.norm(F.flow(1.0)) ** k)


def test_nonlinear_composition(desk):
    SQ, H = desk
    P = QuadraticForm.constant(-2 * np.pi * np.eye(2))   # the loop e^{2 pi J t}
    z0 = np.array([0.5, 0.2])
    z1, M1, _ = flow(sharp(quadratic(P), H), z0)
    z2, M2, _ = flow(H, z0)
    assert np.max(np.abs(z1 - z2)) <= 1e-8 and np.max(np.abs(M1 - M2)) <= 1e-7
    B = bar(H)
    B.steps = 32   # inner flow steps per unit time
    back = integrate(B, z2[None, :], 0.0, 1.0, steps=32)
    assert np.max(np.abs(back.z[0] - z0)) <= 1e-6
    it = time_map(iterate(H, 3), z0[None, :], 1, 1024)
    step = z0[None, :]
    for _ in range(3):
        step = time_map(H, step, 1, 1024).z
    assert np.max(np.abs(it.z - step)) <= 1e-8


def test_cap_level_is_conserved(desk):
    SQ, H = desk
    cp = build_capped(H, build_pmu(SQ, 13, 11))
    K = CappedQuadratic(cp.B_hat, cp.eta)
    Z = np.random.default_rng(0).normal(size=(64, 2)) * 4
    r = integrate(K, Z, 0.0, 1.0, steps=2048)
    lev = lambda Z: 0.5 * np.einsum("ni,ij,nj->n", Z, cp.B_hat, Z)
    assert np.max(np.abs(lev(r.z) - lev(Z))) <= 1e-9


def test_exterior_trajectories_avoid_the_ball(desk):
    SQ, H = desk
    cp = build_capped(H, build_pmu(SQ, 13, 11))
    Z = np.random.default_rng(1).normal(size=(120, 2)) * 6
    end = time_map(iterate(H, cp.l), Z, 1, 1024).z
    lev = 0.5 * np.einsum("ni,ij,nj->n", end, cp.B_hat, end)
    Z = Z[np.abs(lev) >= cp.S0]
    assert len(Z) > 50
    r = integrate(cp.Hkodot, Z, 0.0, 1.0, steps=1024, record=128)
    assert np.linalg.norm(r.path_z, axis=2).min() > cp.R0


# ---------------------------------------------------------------- perturbations

def test_linear_payload_sup_matches_search():
    h = CompactPerturbation([BumpTerm((0, 0), 2.0, ((1.0, (1, 0)),), 0.3)])
    assert h.sup_norm("value") == pytest.approx(linear_payload_sup(2.0, 0.3), rel=1e-9)
    assert h.support_radius == 2.0


@settings(max_examples=25, deadline=None)
@given(seeds)
def test_perturbation_derivatives(seed):
    rng = np.random.default_rng(seed)
    h = CompactPerturbation([
        BumpTerm(tuple(rng.uniform(-0.5, 0.5, 2)), 1.5, ((1.0, (2, 0)), (-0.7, (0, 1))), 0.4, 1.0, 0.3),
        BumpTerm((0.0, 0.0), 2.0, ((0.5, (1, 1)),), 1.0),
    ])
    Z = rng.uniform(-1.5, 1.5, size=(5, 2))
    t, e = 0.37, 1e-6
    g = h.grad(t, Z)
    H2 = h.hess(t, Z)
    for i in range(2):
        dz = np.zeros(2)
        dz[i] = e
        fd = (h.value(t, Z + dz) - h.value(t, Z - dz)) / (2 * e)
        assert np.allclose(fd, g[:, i], atol=1e-7)
        fdg = (h.grad(t, Z + dz) - h.grad(t, Z - dz)) / (2 * e)
        assert np.allclose(fdg, H2[:, :, i], atol=1e-6)
    far = np.array([[5.0, 5.0]])
    assert h.value(t, far)[0] == 0.0 and np.all(h.grad(t, far) == 0.0)


# ---------------------------------------------------------------- orbit search

def test_quadratic_has_only_the_origin():
    H = PerturbedHamiltonian(QuadraticForm.constant(-0.5 * np.eye(2)))
    res = find_periodic_points(H, 1, radius=2.0, grid=9)
    assert len(res.orbits) == 1
    assert np.linalg.norm(res.orbits[0].z0) <= 1e-10
    # the path is e^{tJ0 S} with S = I / 2, so cz = Ind(S) - n = -1
    assert res.orbits[0].index.cz == -1


def test_flow_integrator_converges():
    Q = QuadraticForm.constant(np.diag([1.0, 4.0]))
    H = quadratic(Q)
    exact = sla.expm(-np.array([[0.0, -1.0], [1.0, 0.0]]) @ np.diag([1.0, 4.0]))
    z = np.array([[0.3, -0.2]])
    for steps, tol in ((64, 1e-5), (1024, 1e-10)):
        r = integrate(H, z, 0.0, 1.0, steps=steps)
        assert np.max(np.abs(r.z[0] - exact @ z[0])) <= tol
