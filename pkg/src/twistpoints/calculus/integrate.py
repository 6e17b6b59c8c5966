"""Batched classical RK4 for Hamiltonian flows with variational equation and action.

The augmented system for a batch of points is

    z'   = -J0 grad H_t(z)
    Phi' = -J0 hess H_t(z) Phi
    a'   = 1/2 <grad H_t(z), z> - H_t(z)

where a accumulates the action 1/2 int <J0 z', z> dt - int H_t(z) dt.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import DivergenceError
from ..symplectic import standard_j

STEPS_PER_UNIT = 1024


@dataclass
class FlowResult:
    z: np.ndarray                 # (N, 2n)
    monodromy: np.ndarray | None  # (N, 2n, 2n)
    action: np.ndarray | None     # (N,)
    diverged: np.ndarray          # (N,) bool
    times: np.ndarray | None = None
    path_z: np.ndarray | None = None     # (K+1, N, 2n)
    path_phi: np.ndarray | None = None   # (K+1, N, 2n, 2n)
    error: float | None = None
    steps: int = 0


def _rhs(H, t, Z, Phi, J, variational, action):
    order = 2 if variational else 1
    v, g, Hs = H.evaluate(t, Z, order)
    dz = g @ J
    dphi = None
    if variational:
        dphi = np.matmul(-J, np.matmul(Hs, Phi))
    da = 0.5 * np.einsum("ni,ni->n", g, Z) - v if action else None
    return dz, dphi, da


def integrate(H, Z0, t0=0.0, t1=1.0, steps=None, variational=False, action=False,
              record=0, bound=1e8, raise_on_divergence=False):
    """Integrate the flow of H from t0 to t1 for every row of Z0.

    ``record`` > 0 stores ``record + 1`` equally spaced snapshots (steps is
    rounded up to a multiple of it).  Rows whose norm exceeds ``bound`` are
    frozen and flagged in ``diverged``.
    """
    Z = np.array(np.atleast_2d(Z0), float)
    N, d = Z.shape
    J = standard_j(d // 2)
    T = t1 - t0
    if steps is None:
        steps = max(16, int(np.ceil(abs(T) * STEPS_PER_UNIT)))
    if record:
        steps = int(np.ceil(steps / record)) * record
    h = T / steps
    Phi = np.broadcast_to(np.eye(d), (N, d, d)).copy() if variational else None
    a = np.zeros(N) if action else None
    alive = np.ones(N, bool)
    rec_every = steps // record if record else 0
    path_z, path_phi = [], []
    if record:
        path_z.append(Z.copy())
        if variational:
            path_phi.append(Phi.copy())
    t = t0
    for i in range(steps):
        idx = np.flatnonzero(alive)
        if idx.size == 0:
            break
        Zi = Z[idx]
        Pi = Phi[idx] if variational else None
        k1 = _rhs(H, t, Zi, Pi, J, variational, action)
        k2 = _rhs(H, t + h / 2, Zi + h / 2 * k1[0],
                  Pi + h / 2 * k1[1] if variational else None, J, variational, action)
        k3 = _rhs(H, t + h / 2, Zi + h / 2 * k2[0],
                  Pi + h / 2 * k2[1] if variational else None, J, variational, action)
        k4 = _rhs(H, t + h, Zi + h * k3[0],
                  Pi + h * k3[1] if variational else None, J, variational, action)
        Z[idx] = Zi + h / 6 * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0])
        if variational:
            Phi[idx] = Pi + h / 6 * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1])
        if action:
            a[idx] += h / 6 * (k1[2] + 2 * k2[2] + 2 * k3[2] + k4[2])
        t = t0 + (i + 1) * h
        big = ~np.isfinite(Z[idx]).all(axis=1) | (np.linalg.norm(Z[idx], axis=1) > bound)
        if np.any(big):
            if raise_on_divergence:
                raise DivergenceError(f"trajectory left the ball of radius {bound:g} at t = {t:.4f}")
            alive[idx[big]] = False
        if record and (i + 1) % rec_every == 0:
            path_z.append(Z.copy())
            if variational:
                path_phi.append(Phi.copy())
    res = FlowResult(Z, Phi, a, ~alive, steps=steps)
    if record:
        res.times = np.linspace(t0, t1, record + 1)
        res.path_z = np.array(path_z)
        res.path_phi = np.array(path_phi) if variational else None
    return res


def flow(H, z0, T=1.0, steps=None, tol=1e-10, max_steps=1 << 16, t0=0.0, bound=1e8):
    """Certified flow: halve the step until successive results agree to tol.

    Returns (z(T), monodromy, FlowResult); the error estimate is the
    Richardson difference |z_h - z_{h/2}| / 15.
    """
    z0 = np.atleast_2d(np.asarray(z0, float))
    if steps is None:
        steps = max(16, int(np.ceil(abs(T) * STEPS_PER_UNIT)))
    coarse = integrate(H, z0, t0, t0 + T, steps, variational=True, action=True,
                       bound=bound, raise_on_divergence=True)
    while True:
        fine = integrate(H, z0, t0, t0 + T, 2 * steps, variational=True, action=True,
                         bound=bound, raise_on_divergence=True)
        scale = 1.0 + np.max(np.abs(fine.z))
        err = float(np.max(np.abs(fine.z - coarse.z))) / 15.0
        merr = float(np.max(np.abs(fine.monodromy - coarse.monodromy))) / 15.0
        if max(err / scale, merr) <= tol or 2 * steps >= max_steps:
            fine.error = max(err, merr)
            single = z0.shape[0] == 1
            return (fine.z[0] if single else fine.z,
                    fine.monodromy[0] if single else fine.monodromy, fine)
        coarse = fine
        steps *= 2


def action_along(H, z0, T=1.0, steps=None):
    """Action of the trajectory through z0 over [0, T] (closedness not checked)."""
    r = integrate(H, z0, 0.0, T, steps, action=True)
    return r.action
