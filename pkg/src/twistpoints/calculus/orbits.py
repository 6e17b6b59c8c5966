"""Time-k maps, periodic-point search and orbit data.

``time_map`` advances a batch of points by the time-k map of a 1-periodic
Hamiltonian and returns the Jacobian and action alongside.  Composite
Hamiltonians are split into pieces with exact endpoint relations:

    wedge(F, G):      phi^1 = phi^1_F o phi^1_G   (rho fixes 0 and 1)
    iterate(H, k):    phi^1 = phi^k_H
    eta(1/2<Bz,z>):   closed form, since 1/2<Bz,z> is conserved
    zero:             identity

and the action is additive over pieces and invariant under the
reparametrization.  Everything else is integrated with RK4.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

from ..errors import OrbitError, ResolutionError
from ..index.cz import IndexReport, cz_index, index_report, is_degenerate
from ..index.paths import SymplecticPath
from ..symplectic import standard_j
from .hamiltonians import (CappedQuadratic, Hamiltonian, Iterated, LinearPrecomposed,
                           PerturbedHamiltonian, SumHamiltonian, Wedge, ZeroHamiltonian)
from .integrate import STEPS_PER_UNIT, integrate

CLOSE_TOL = 1e-9
PAIR_TOL = 1e-6


def speed(H) -> float:
    """Rough bound on the rate of the vector field, used to pick step counts."""
    if isinstance(H, ZeroHamiltonian):
        return 0.0
    if isinstance(H, Iterated):
        return H.k * speed(H.H)
    if isinstance(H, Wedge):
        return 2.0 * H.rho.max_deriv * max(speed(H.F), speed(H.G))
    if isinstance(H, SumHamiltonian):
        return sum(speed(p) for p in H.parts)
    if isinstance(H, LinearPrecomposed):
        return speed(H.G)
    if isinstance(H, CappedQuadratic):
        return float(np.linalg.norm(H.B, 2))
    if isinstance(H, PerturbedHamiltonian):
        return max(1.0, float(np.linalg.norm(H.Q.matrix(0.0), 2)))
    return 1.0


@dataclass
class MapResult:
    z: np.ndarray            # (N, 2n)
    jac: np.ndarray          # (N, 2n, 2n)
    action: np.ndarray       # (N,)
    diverged: np.ndarray     # (N,)


def _cap_map(H: CappedQuadratic, Z, T=1.0):
    """Exact flow of eta(1/2 <Bz, z>) over time T, its Jacobian and action."""
    B = H.B
    J = standard_j(H.n)
    A = -J @ B
    c = 0.5 * np.einsum("ni,ij,nj->n", Z, B, Z)
    d1 = np.asarray(H.eta.deriv(c), float)
    d2 = np.asarray(H.eta.deriv2(c), float)
    N, d = Z.shape
    out = np.empty_like(Z)
    jac = np.empty((N, d, d))
    for i in range(N):
        E = sla.expm(A * (d1[i] * T))
        zi = E @ Z[i]
        out[i] = zi
        # d/dz0 of e^{A eta'(c) T} z0, with dc/dz0 = B z0
        jac[i] = E + T * d2[i] * np.outer(A @ zi, B @ Z[i])
    action = T * (d1 * c - np.asarray(H.eta(c), float))
    return out, jac, action


def time_map(H: Hamiltonian, Z, T: int = 1, spu=STEPS_PER_UNIT, bound=1e8) -> MapResult:
    """phi^T_H on the rows of Z with Jacobians and actions (H 1-periodic, T integer)."""
    Z = np.array(np.atleast_2d(Z), float)
    N, d = Z.shape
    if isinstance(H, Wedge) and T > 1:
        res = time_map(H, Z, 1, spu, bound)
        for _ in range(T - 1):
            nxt = time_map(H, res.z, 1, spu, bound)
            res = MapResult(nxt.z, np.einsum("nij,njk->nik", nxt.jac, res.jac),
                            res.action + nxt.action, res.diverged | nxt.diverged)
        return res
    if isinstance(H, ZeroHamiltonian):
        return MapResult(Z, np.broadcast_to(np.eye(d), (N, d, d)).copy(), np.zeros(N),
                         np.zeros(N, bool))
    if isinstance(H, Wedge):
        g = time_map(H.G, Z, 1, spu, bound)
        f = time_map(H.F, g.z, 1, spu, bound)
        return MapResult(f.z, np.einsum("nij,njk->nik", f.jac, g.jac),
                         g.action + f.action, g.diverged | f.diverged)
    if isinstance(H, Iterated):
        return time_map(H.H, Z, T * H.k, spu, bound)
    if isinstance(H, CappedQuadratic):
        z, jac, a = _cap_map(H, Z, T)
        return MapResult(z, jac, a, np.zeros(N, bool))
    steps = max(16, int(np.ceil(T * spu * max(1.0, speed(H)))))
    r = integrate(H, Z, 0.0, float(T), steps, variational=True, action=True, bound=bound)
    return MapResult(r.z, r.monodromy, r.action, r.diverged)


def linearized_path(H: Hamiltonian, z0, T: int = 1, spu=STEPS_PER_UNIT, samples=64):
    """Sampled path t -> D phi^{tT}_H(z0) on [0, 1], pieces catenated.

    ``samples`` is per unit time of each integrated piece.
    """
    return _linearized(H, np.asarray(z0, float), T, spu, samples)[0]


def _linearized(H, z0, T, spu, samples):
    """(path, end point) of the linearized flow over time T."""
    d = z0.shape[0]
    if isinstance(H, Wedge) and T > 1:
        path, z = _linearized(H, z0, 1, spu, samples)
        for _ in range(T - 1):
            nxt, z = _linearized(H, z, 1, spu, samples)
            path = path.then(nxt)
        return path, z
    if isinstance(H, ZeroHamiltonian):
        return SymplecticPath(np.array([0.0, 1.0]), np.array([np.eye(d), np.eye(d)])), z0
    if isinstance(H, Wedge):
        pg, z1 = _linearized(H.G, z0, 1, spu, samples)
        pf, z2 = _linearized(H.F, z1, 1, spu, samples)
        return pg.then(pf), z2
    if isinstance(H, Iterated):
        return _linearized(H.H, z0, T * H.k, spu, samples)
    if isinstance(H, CappedQuadratic):
        ts = np.linspace(0.0, 1.0, samples + 1)
        mats = [_cap_map(H, z0[None, :], T * t)[1][0] for t in ts]
        return SymplecticPath(ts, np.array(mats)), _cap_map(H, z0[None, :], T)[0][0]
    steps = max(16, int(np.ceil(T * spu * max(1.0, speed(H)))))
    rec = min(samples * T, steps)
    r = integrate(H, z0[None, :], 0.0, float(T), steps, variational=True, record=rec)
    return SymplecticPath(np.linspace(0.0, 1.0, len(r.path_phi)), r.path_phi[:, 0]), r.z[0]


def orbit_index(H, z0, k=1, spu=256, samples=(64, 256, 1024), s_max=64):
    """IndexReport of the linearized path, resampling when the lift is unresolved."""
    err = None
    for m in samples:
        try:
            return index_report(linearized_path(H, z0, k, spu, m), s_max=s_max, method="sampled")
        except ResolutionError as exc:
            err = exc
    raise err


def orbit_cz(H, z0, k=1, spu=256, samples=(64, 256, 1024)):
    """CZ index of the linearized path alone (no mean index), with the same resampling."""
    err = None
    for m in samples:
        try:
            return cz_index(linearized_path(H, z0, k, spu, m), "sampled")
        except ResolutionError as exc:
            err = exc
    raise err


@dataclass
class PeriodicOrbit:
    z0: np.ndarray
    k: int
    action: float
    monodromy: np.ndarray = field(repr=False)
    index: IndexReport | None
    residual: float
    minimal_period: int

    @property
    def simple(self):
        return self.minimal_period == self.k

    def as_dict(self):
        return {"z0": [float(x) for x in self.z0], "k": self.k, "action": self.action,
                "residual": self.residual, "minimal_period": self.minimal_period,
                "index": self.index.as_dict() if self.index else None}


@dataclass
class SearchResult:
    orbits: list
    failures: int
    seeds: int
    iterations: int


def _newton(H, Z, k, spu, tol, max_iter, damping=True, bound=1e6, merge_digits=12):
    """Damped Newton on phi^k(z) - z for all rows of Z; returns (Z, converged, iters).

    Rows whose iterates agree to ``merge_digits`` decimals are evaluated once.
    """
    Z = np.array(Z, float)
    N, d = Z.shape
    done = np.zeros(N, bool)
    dead = np.zeros(N, bool)
    I = np.eye(d)
    it = 0
    for it in range(1, max_iter + 1):
        act = np.flatnonzero(~done & ~dead)
        if act.size == 0:
            break
        # seeds that have merged share one evaluation
        Za = Z[act]
        key = np.round(Za, merge_digits)
        _, first, inv = np.unique(key, axis=0, return_index=True, return_inverse=True)
        inv = inv.ravel()
        m = time_map(H, Za[first], k, spu, bound)
        F = m.z - Za[first]
        res = np.linalg.norm(F, axis=1)
        scale = 1.0 + np.linalg.norm(Za[first], axis=1)
        ok = (res <= tol * scale) & ~m.diverged
        A = m.jac - I
        try:
            step = -np.linalg.solve(A, F[:, :, None])[:, :, 0]
        except np.linalg.LinAlgError:
            step = -np.array([np.linalg.lstsq(a, f, rcond=None)[0] for a, f in zip(A, F)])
        if damping:
            # cap the step at the current scale to avoid jumping out of the region
            lim = 2.0 * scale
            nrm = np.linalg.norm(step, axis=1)
            step *= np.minimum(1.0, lim / np.maximum(nrm, 1e-300))[:, None]
        bad = m.diverged | ~np.all(np.isfinite(step), axis=1)
        newZ = Za[first] + np.where(ok[:, None], 0.0, step)
        Z[act] = newZ[inv]
        done[act] = ok[inv]
        dead[act] = bad[inv]
        far = np.linalg.norm(Z, axis=1) > bound
        dead |= far & ~done
    return Z, done, it


def _minimal_period(H, z0, k, spu, tol):
    for j in range(1, k):
        if k % j:
            continue
        zj = time_map(H, z0, j, spu).z[0]
        if np.linalg.norm(zj - z0) <= tol * (1.0 + np.linalg.norm(z0)):
            return j
    return k


def _dedup(points, tol):
    keep = []
    for z in points:
        if all(np.linalg.norm(z - y) > tol for y in keep):
            keep.append(z)
    return keep


def canonical_order(orbits):
    return sorted(orbits, key=lambda o: tuple(np.round(o.z0, 9)))


def find_periodic_points(H, k=1, seeds=None, radius=None, grid=41, spu=256, coarse_spu=48,
                         tol=1e-10, max_iter=50, with_index=True,
                         pair_tol=PAIR_TOL) -> SearchResult:
    """k-periodic points of a 1-periodic H by Newton shooting from a seed grid.

    Seeds default to a grid x grid lattice on the square of half width
    ``radius`` (n = 1) or a fixed Philox sample (n > 1).  Newton first runs
    with ``coarse_spu`` steps per unit time, every distinct candidate is then
    polished at ``spu`` and certified by one step-halved evaluation at
    2 spu, which also supplies the action and monodromy.  Non-converging
    seeds are counted in ``failures``.
    """
    if seeds is None:
        if radius is None:
            raise ValueError("need seeds or a radius")
        seeds = seed_grid(H.n, radius, grid)
    seeds = np.atleast_2d(np.asarray(seeds, float))
    Zc, okc, it1 = _newton(H, seeds, k, coarse_spu, max(tol, 1e-8), max_iter, merge_digits=7)
    cands = _dedup(list(Zc[okc]), 1e-5)
    orbits = []
    failures = int(np.sum(~okc))
    it2 = 0
    if cands:
        Zf, okf, it2 = _newton(H, np.array(cands), k, spu, tol, max_iter)
        found = _dedup(list(Zf[okf]), pair_tol)
        failures += int(np.sum(~okf))
    else:
        found = []
    if found:
        fine = time_map(H, np.array(found), k, 2 * spu)
    for i, z in enumerate(found):
        resid = float(np.linalg.norm(fine.z[i] - z))
        if resid > 10 * CLOSE_TOL * (1.0 + np.linalg.norm(z)):
            raise OrbitError(f"orbit through {z} does not close: residual {resid:.2e}")
        mono = fine.jac[i]
        ind = None
        if with_index and not is_degenerate(mono):
            ind = orbit_index(H, z, k, spu)
        orbits.append(PeriodicOrbit(z, k, float(fine.action[i]), mono, ind, resid,
                                    _minimal_period(H, z, k, spu, 1e-8)))
    return SearchResult(canonical_order(orbits), failures, len(seeds), it1 + it2)


def seed_grid(n, radius, grid=41, seed=0):
    d = 2 * n
    if d == 2:
        ax = np.linspace(-radius, radius, grid)
        return np.stack(np.meshgrid(ax, ax, indexing="ij"), -1).reshape(-1, 2)
    rng = np.random.Generator(np.random.Philox(seed))
    return rng.uniform(-radius, radius, size=(grid * grid, d))


def pair_orbits(A, B, tol=PAIR_TOL):
    """One-to-one pairing of two orbit lists by starting point.

    Returns (pairs, unpaired_A, unpaired_B) with pairs as index tuples.
    """
    used = set()
    pairs = []
    lone_a = []
    for i, a in enumerate(A):
        best, arg = np.inf, None
        for j, b in enumerate(B):
            if j in used:
                continue
            dist = float(np.linalg.norm(a.z0 - b.z0))
            if dist < best:
                best, arg = dist, j
        if arg is not None and best <= tol:
            used.add(arg)
            pairs.append((i, arg, best))
        else:
            lone_a.append(i)
    lone_b = [j for j in range(len(B)) if j not in used]
    return pairs, lone_a, lone_b
