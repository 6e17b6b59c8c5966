"""Linear-growth and nonresonance constants of a capped Hamiltonian.

The linear part K_hat of K = (F wedge Q^{x l}) + compact part has the
fundamental solution

    Phi(t, s) = phi_Q^{l rho(2t)}                          on [0, 1/2]
              = e^{-J0 B_hat s rho(2t - 1)} phi_Q^l          on [1/2, 1]

with s = eta'(1/2 <B_hat w, w>) in [0, 1] for the cap (s = 1 without it).
rho is monotone, so the suprema over t reduce to tau in [0, l] and
sigma = s rho in [0, 1]; grids are padded by the Lipschitz bound
|d/dt log|Phi|| <= |A(t)|, giving certified upper bounds for M1 and M2.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla
from scipy.optimize import minimize_scalar

from ..errors import NonresonanceError
from ..symplectic import standard_j
from .capped import CappedPair
from .hamiltonians import Hamiltonian
from .integrate import integrate


@dataclass
class GrowthConstants:
    c: float
    c1: float
    C1: float
    M1: float
    M2: float
    C2: float
    min_singular: float
    grad_h_sup: float
    capped: bool

    def nonres_bound(self, eps):
        return self.M1 * self.M2 * (self.C2 + 1.0 / np.sqrt(2.0)) * (self.C1 + eps)

    def as_dict(self, eps=0.1):
        return {"c": self.c, "c1": self.c1, "C1": self.C1, "M1": self.M1, "M2": self.M2,
                "C2": self.C2, "min_singular": self.min_singular,
                "grad_h_sup": self.grad_h_sup, "capped": self.capped,
                "nonres_bound": self.nonres_bound(eps), "eps": eps}


def _padded_sup(fn, lo, hi, rate, samples):
    """Certified sup of f >= 0 on [lo, hi] given |d log f| <= rate."""
    ts = np.linspace(lo, hi, samples)
    vals = np.array([fn(t) for t in ts])
    h = (hi - lo) / (samples - 1) if samples > 1 else 0.0
    return float(np.max(vals) * np.exp(0.5 * rate * h))


def resolvent_profile(pair: CappedPair, Q, samples=513, capped=True):
    """(sigmas, |(I - Phi(1))^{-1} Phi(1)|, smallest singular value of I - Phi(1))."""
    l = pair.l
    Phil = Q.iterate(l).flow(1.0)
    A = -standard_j(Q.n) @ pair.B_hat
    sig = np.linspace(0.0, 1.0, samples) if capped else np.array([1.0])
    I = np.eye(A.shape[0])
    res = np.empty(len(sig))
    smin = np.empty(len(sig))
    for i, s in enumerate(sig):
        P1 = sla.expm(s * A) @ Phil
        sv = np.linalg.svd(I - P1, compute_uv=False)
        smin[i] = sv[-1]
        res[i] = np.linalg.norm(np.linalg.solve(I - P1, P1), 2)
    return sig, res, smin


def growth_constants(pair: CappedPair, H, capped=True, samples=513, grad_h_sup=None,
                     singular_tol=1e-8) -> GrowthConstants:
    """M1, M2, C2, c1, C1 and c for H^{k odot l} (``capped``) or H^{k minus l}.

    ``H`` is the base Hamiltonian Q + h used to build ``pair``.
    """
    Q = H.Q
    l, k = pair.l, pair.k
    J = standard_j(Q.n)
    A = -J @ pair.B_hat
    a_norm = float(np.linalg.norm(A, 2))
    b_rate = max(float(np.linalg.norm(J @ Q.matrix(t), 2)) for t in np.linspace(0, 1, 33))
    Phil = Q.iterate(l).flow(1.0)

    def first(tau):
        return Q.flow(tau) if Q.is_autonomous else _iterated_flow(Q, tau)

    n_tau = max(samples, 64 * l)
    m1a = _padded_sup(lambda t: np.linalg.norm(first(t), 2), 0.0, float(l), b_rate, n_tau)
    m2a = _padded_sup(lambda t: np.linalg.norm(np.linalg.inv(first(t)), 2), 0.0, float(l),
                      b_rate, n_tau)
    hi = 1.0
    m1b = _padded_sup(lambda s: np.linalg.norm(sla.expm(s * A) @ Phil, 2), 0.0, hi, a_norm, samples)
    m2b = _padded_sup(lambda s: np.linalg.norm(np.linalg.inv(sla.expm(s * A) @ Phil), 2),
                      0.0, hi, a_norm, samples)
    sig, res, smin = resolvent_profile(pair, Q, samples, capped)
    if float(np.min(smin)) <= singular_tol:
        i = int(np.argmin(smin))
        raise NonresonanceError(f"I - Phi(1, s) is singular near s = {sig[i]:.6f}")
    C2 = float(np.max(res))
    if capped and len(sig) > 2:
        i = int(np.argmax(res))
        lo, up = sig[max(i - 1, 0)], sig[min(i + 1, len(sig) - 1)]

        def neg(s):
            P1 = sla.expm(s * A) @ Phil
            return -np.linalg.norm(np.linalg.solve(np.eye(len(A)) - P1, P1), 2)
        r = minimize_scalar(neg, bounds=(lo, up), method="bounded",
                            options={"xatol": 1e-12})
        C2 = max(C2, -float(r.fun))
    rho_max = pair.rho.max_deriv
    q_norm = max(float(np.linalg.norm(Q.matrix(t), 2)) for t in np.linspace(0, 1, 33))
    c1 = 2.0 * rho_max * max(l * q_norm, float(np.linalg.norm(pair.B_hat, 2)))
    if grad_h_sup is None:
        grad_h_sup = H.h.sup_norm("grad") if not H.h.is_zero else 0.0
    # the loop is unitary, so composing with it does not change |grad h|
    reach = l if capped else max(l, k - l)
    C1 = 2.0 * rho_max * reach * grad_h_sup
    return GrowthConstants(max(c1, C1), c1, C1, max(m1a, m1b), max(m2a, m2b), C2,
                           float(np.min(smin)), float(grad_h_sup), capped)


def _iterated_flow(Q, tau):
    """phi_Q^tau for a 1-periodic form, tau >= 0."""
    j = int(np.floor(tau))
    M = np.linalg.matrix_power(Q.flow(1.0), j)
    return Q.flow(tau - j) @ M


# ---------------------------------------------------------------- synthetic forced trajectories

class RowForcing(Hamiltonian):
    """K + <J0 p_i(t), z> for row i: the vector field gains the forcing p_i(t).

    p_i(t) = a0_i + sum_j a_ij cos(2 pi j t) + b_ij sin(2 pi j t).
    """

    def __init__(self, K, a0, a, b):
        self.K = K
        self.n = K.n
        self.a0 = np.asarray(a0, float)      # (N, d)
        self.a = np.asarray(a, float)        # (N, m, d)
        self.b = np.asarray(b, float)

    def forcing(self, t, rows=None):
        j = np.arange(1, self.a.shape[1] + 1)
        c = np.cos(2 * np.pi * j * t)
        s = np.sin(2 * np.pi * j * t)
        p = self.a0 + np.einsum("j,njd->nd", c, self.a) + np.einsum("j,njd->nd", s, self.b)
        return p if rows is None else p[rows]

    def l2_norms(self):
        return np.sqrt(np.sum(self.a0 ** 2, axis=1)
                       + 0.5 * np.sum(self.a ** 2 + self.b ** 2, axis=(1, 2)))

    def evaluate(self, t, Z, order=2):
        v, g, H = self.K.evaluate(t, Z, order)
        p = self.forcing(t, self._rows)
        Jp = p @ self.J.T
        v = v + np.einsum("ni,ni->n", Jp, Z)
        if order >= 1:
            g = g + Jp
        return v, g, H

    _rows = None


def random_forcing(N, d, eps, modes=3, seed=0):
    """Trigonometric forcings with L2 norms drawn uniformly from (0, eps]."""
    rng = np.random.Generator(np.random.Philox(seed))
    a0 = rng.normal(size=(N, d))
    a = rng.normal(size=(N, modes, d)) / np.arange(1, modes + 1)[None, :, None]
    b = rng.normal(size=(N, modes, d)) / np.arange(1, modes + 1)[None, :, None]
    nrm = np.sqrt(np.sum(a0 ** 2, axis=1) + 0.5 * np.sum(a ** 2 + b ** 2, axis=(1, 2)))
    target = eps * rng.uniform(0.05, 1.0, size=N)
    f = (target / nrm)
    return a0 * f[:, None], a * f[:, None, None], b * f[:, None, None]


@dataclass
class SyntheticTrajectories:
    z0: np.ndarray = field(repr=False)
    l2_norms: np.ndarray
    forcing_norms: np.ndarray
    closure: np.ndarray
    converged: np.ndarray
    bound: float

    @property
    def ok(self):
        return bool(np.all(self.converged) and np.all(self.l2_norms <= self.bound)
                    and np.all(self.forcing_norms <= self.eps + 1e-12))

    eps: float = 0.1


def forced_periodic_trajectories(K, constants: GrowthConstants, N=100, eps=0.1, seed=0,
                                 steps=4096, samples=512, max_iter=30, tol=1e-9,
                                 spread=3.0):
    """Periodic solutions of z' = X_K(z) + p(t) with |p|_{L2} <= eps, by Newton shooting.

    Returns the L2 norms of the trajectories next to the bound
    M1 M2 (C2 + 1/sqrt 2)(C1 + eps).
    """
    d = 2 * K.n
    a0, a, b = random_forcing(N, d, eps, seed=seed)
    F = RowForcing(K, a0, a, b)
    rng = np.random.Generator(np.random.Philox(seed + 1))
    Z = rng.normal(size=(N, d)) * spread
    I = np.eye(d)
    done = np.zeros(N, bool)
    closure = np.full(N, np.inf)
    for _ in range(max_iter):
        act = np.flatnonzero(~done)
        if act.size == 0:
            break
        F._rows = act
        r = integrate(F, Z[act], 0.0, 1.0, steps, variational=True)
        R = r.z - Z[act]
        closure[act] = np.linalg.norm(R, axis=1)
        ok = closure[act] <= tol * (1.0 + np.linalg.norm(Z[act], axis=1))
        step = np.linalg.solve(r.monodromy - I, -R[:, :, None])[:, :, 0]
        Z[act] = Z[act] + np.where(ok[:, None], 0.0, step)
        done[act] = ok
    F._rows = np.arange(N)
    r = integrate(F, Z, 0.0, 1.0, steps, record=samples)
    path = r.path_z                                   # (samples+1, N, d)
    sq = np.sum(path ** 2, axis=2)
    # trapezoid rule on the periodic grid
    l2 = np.sqrt(np.mean(sq[:-1], axis=0))
    out = SyntheticTrajectories(Z, l2, F.l2_norms(), closure, done,
                                constants.nonres_bound(eps))
    out.eps = eps
    return out


def linear_growth_ratio(K, radius, samples=4096, time_samples=33, seed=0):
    """max over sampled (t, z) of |X_K(t, z)| / (1 + |z|)."""
    d = 2 * K.n
    rng = np.random.Generator(np.random.Philox(seed))
    Z = rng.normal(size=(samples, d))
    Z *= (radius * rng.uniform(0, 1, size=samples) ** (1.0 / d)
          / np.linalg.norm(Z, axis=1))[:, None]
    den = 1.0 + np.linalg.norm(Z, axis=1)
    best = 0.0
    for t in np.linspace(0.0, 1.0, time_samples):
        X = K.vector_field(t, Z)
        best = max(best, float(np.max(np.linalg.norm(X, axis=1) / den)))
    return best
