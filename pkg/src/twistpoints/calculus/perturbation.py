"""Compactly supported perturbations h_t(z) with exact gradient and Hessian.

Each term is  a * cos(2 pi f t + phase) * chi(|z - c|^2 / R^2) * p(z - c)
with the bump chi(u) = exp(1 - 1/(1 - u)) for u < 1 (chi(0) = 1), and
p a polynomial given as a list of (coefficient, exponent tuple).
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

from ..errors import DimensionError


def _bump_derivs(u):
    """chi, chi' and chi'' at u (vectorized), zero for u >= 1."""
    u = np.asarray(u, float)
    g = np.zeros_like(u)
    g1 = np.zeros_like(u)
    g2 = np.zeros_like(u)
    m = u < 1.0
    w = 1.0 / (1.0 - u[m])
    gm = np.exp(1.0 - w)
    g[m] = gm
    g1[m] = -gm * w ** 2
    g2[m] = gm * (w ** 4 - 2.0 * w ** 3)
    return g, g1, g2


class _MonomialTable:
    """Exponents of p, grad p and hess p for a list of monomials, stacked once.

    With u the unique exponent rows, p = mono_u @ (A0 c), and the i-th
    partial / (i, j)-th second partial use A1[i] / A2[i, j] likewise,
    where c are the (time-scaled) monomial coefficients.
    """

    def __init__(self, exps):
        exps = np.asarray(exps, int)
        m, d = exps.shape
        rows = {}

        def slot(e):
            key = tuple(int(x) for x in e)
            if key not in rows:
                rows[key] = len(rows)
            return rows[key]

        entries = []      # (output channel, unique row, monomial, factor)
        for k in range(m):
            e = exps[k]
            entries.append((0, slot(e), k, 1.0))
            for i in range(d):
                if e[i] == 0:
                    continue
                e1 = e.copy()
                e1[i] -= 1
                entries.append((1 + i, slot(e1), k, float(e[i])))
                for j in range(d):
                    if e1[j] == 0:
                        continue
                    e2 = e1.copy()
                    e2[j] -= 1
                    entries.append((1 + d + i * d + j, slot(e2), k, float(e[i] * e1[j])))
        self.d = d
        self.exps = np.array(list(rows), int).reshape(len(rows), d)
        self.top = int(self.exps.max()) if self.exps.size else 0
        U = len(rows)
        A = np.zeros((1 + d + d * d, U, m))
        for ch, u, k, f in entries:
            A[ch, u, k] += f
        self.A = A

    def evaluate(self, W, coefs, order):
        N, d = W.shape
        powers = np.ones((self.top + 1, N, d))
        for k in range(1, self.top + 1):
            powers[k] = powers[k - 1] * W
        cols = np.arange(d)
        mono = np.prod(powers[self.exps, :, cols], axis=1).T      # (N, U)
        nch = {0: 1, 1: 1 + d}.get(order, 1 + d + d * d)
        C = self.A[:nch] @ coefs                                   # (nch, U)
        out = mono @ C.T                                           # (N, nch)
        p = out[:, 0]
        dp = out[:, 1:1 + d] if order >= 1 else None
        ddp = out[:, 1 + d:].reshape(N, d, d) if order >= 2 else None
        return p, dp, ddp


@dataclass(frozen=True)
class BumpTerm:
    center: tuple
    radius: float
    poly: tuple = ((1.0, ()),)      # ((coef, exponents), ...); () means constant
    amplitude: float = 1.0
    frequency: float = 0.0
    phase: float = 0.0

    def __post_init__(self):
        if self.radius <= 0:
            raise ValueError("radius must be positive")
        d = len(self.center)
        poly = []
        for coef, exps in self.poly:
            exps = tuple(int(e) for e in exps) or (0,) * d
            if len(exps) != d or min(exps) < 0:
                raise DimensionError("exponent tuple must match the dimension")
            poly.append((float(coef), exps))
        object.__setattr__(self, "poly", tuple(poly))
        object.__setattr__(self, "center", tuple(float(x) for x in self.center))

    @property
    def dim(self):
        return len(self.center)

    def time_factor(self, t):
        return self.amplitude * np.cos(2 * np.pi * self.frequency * t + self.phase)

    def _poly(self, W, order):
        """p, grad p, hess p at rows of W."""
        N, d = W.shape
        p = np.zeros(N)
        dp = np.zeros((N, d)) if order >= 1 else None
        ddp = np.zeros((N, d, d)) if order >= 2 else None
        for coef, e in self.poly:
            e = np.array(e)
            p += coef * np.prod(W ** e, axis=1)
            if order >= 1:
                for i in range(d):
                    if e[i] == 0:
                        continue
                    ei = e.copy()
                    ei[i] -= 1
                    dp[:, i] += coef * e[i] * np.prod(W ** ei, axis=1)
                    if order >= 2:
                        for j in range(d):
                            if ei[j] == 0:
                                continue
                            eij = ei.copy()
                            eij[j] -= 1
                            ddp[:, i, j] += coef * e[i] * ei[j] * np.prod(W ** eij, axis=1)
        return p, dp, ddp

    def evaluate(self, t, Z, order=0):
        Z = np.atleast_2d(np.asarray(Z, float))
        W = Z - np.array(self.center)
        R2 = self.radius ** 2
        u = np.sum(W * W, axis=1) / R2
        g, g1, g2 = _bump_derivs(u)
        c = self.time_factor(t)
        p, dp, ddp = self._poly(W, order)
        val = c * g * p
        if order == 0:
            return val, None, None
        du = 2.0 * W / R2
        grad = c * ((g1 * p)[:, None] * du + g[:, None] * dp)
        if order == 1:
            return val, grad, None
        d = W.shape[1]
        hess = (g2 * p)[:, None, None] * du[:, :, None] * du[:, None, :]
        hess += (g1 * p)[:, None, None] * (2.0 / R2) * np.eye(d)
        hess += g1[:, None, None] * (du[:, :, None] * dp[:, None, :] + dp[:, :, None] * du[:, None, :])
        hess += g[:, None, None] * ddp
        return val, grad, c * hess

    def outer_radius(self):
        return float(np.linalg.norm(self.center)) + self.radius


@dataclass(frozen=True)
class CompactPerturbation:
    """Finite sum of bump terms; vanishes with its gradient for |z| >= support_radius."""

    terms: tuple = field(default=())

    def __post_init__(self):
        object.__setattr__(self, "terms", tuple(self.terms))
        dims = {t.dim for t in self.terms}
        if len(dims) > 1:
            raise DimensionError("all terms must share the dimension")

    @property
    def is_zero(self):
        return not self.terms

    @property
    def support_radius(self):
        return max((t.outer_radius() for t in self.terms), default=0.0)

    @property
    def time_dependent(self):
        return any(t.frequency != 0.0 for t in self.terms)

    def _groups(self):
        """Terms sharing a bump, with stacked monomial data for vectorized evaluation."""
        cache = self.__dict__.get("_group_cache")
        if cache is not None:
            return cache
        keyed = {}
        for term in self.terms:
            keyed.setdefault((term.center, term.radius), []).append(term)
        groups = []
        for (center, radius), terms in keyed.items():
            coefs, exps, owner = [], [], []
            for i, term in enumerate(terms):
                for c, e in term.poly:
                    coefs.append(c)
                    exps.append(e)
                    owner.append(i)
            groups.append((np.array(center), radius, terms, np.array(coefs),
                           _MonomialTable(exps), np.array(owner)))
        object.__setattr__(self, "_group_cache", groups)
        return groups

    def _sum(self, t, Z, order):
        Z = np.atleast_2d(np.asarray(Z, float))
        N, d = Z.shape
        v = np.zeros(N)
        g = np.zeros((N, d)) if order >= 1 else None
        H = np.zeros((N, d, d)) if order >= 2 else None
        for center, radius, terms, coefs, table, owner in self._groups():
            W = Z - center
            R2 = radius ** 2
            u = np.sum(W * W, axis=1) / R2
            inside = u < 1.0
            if not np.any(inside):
                continue
            idx = np.flatnonzero(inside)
            Wi = W[idx]
            b0, b1, b2 = _bump_derivs(u[idx])
            tf = np.array([term.time_factor(t) for term in terms])
            cm = coefs * tf[owner]                       # (m,)
            p, dp, ddp = table.evaluate(Wi, cm, order)
            v[idx] += b0 * p
            if order == 0:
                continue
            du = (2.0 / R2) * Wi
            b1p = b1 * p
            g[idx] += b1p[:, None] * du + b0[:, None] * dp
            if order == 1:
                continue
            # Hessian: b2 p du du^T + b1 p (2/R^2) I + b1 (du dp^T + dp du^T) + b0 ddp
            s1 = (b2 * p)[:, None] * du + b1[:, None] * dp
            hs = s1[:, :, None] * du[:, None, :]
            hs += (b1[:, None] * du)[:, :, None] * dp[:, None, :]
            hs += b0[:, None, None] * ddp
            diag = np.arange(d)
            hs[:, diag, diag] += ((2.0 / R2) * b1p)[:, None]
            if idx.size == N:
                H += hs
            else:
                H[idx] += hs
        return v, g, H

    def value(self, t, Z):
        return self._sum(t, Z, 0)[0]

    def grad(self, t, Z):
        return self._sum(t, Z, 1)[1]

    def hess(self, t, Z):
        return self._sum(t, Z, 2)[2]

    def sup_norm(self, which="value", grid=41, time_samples=16, seed=0):
        """sup over (t, z) of |h| (or |grad h|): dense sampling, then local polish.

        The candidates come from a grid over each term's support ball and a
        time grid; the best candidates are refined with Nelder-Mead.
        """
        if self.is_zero:
            return 0.0
        d = self.terms[0].dim
        f = (lambda t, Z: np.abs(self.value(t, Z))) if which == "value" else \
            (lambda t, Z: np.linalg.norm(self.grad(t, Z), axis=1))
        rng = np.random.default_rng(seed)
        ts = np.linspace(0.0, 1.0, time_samples, endpoint=False) if self.time_dependent else [0.0]
        cands = []
        for term in self.terms:
            c = np.array(term.center)
            if d <= 2:
                ax = np.linspace(-term.radius, term.radius, grid)
                P = np.stack(np.meshgrid(*([ax] * d), indexing="ij"), -1).reshape(-1, d)
            else:
                P = rng.uniform(-term.radius, term.radius, size=(grid ** 2 * 4, d))
            P = c + P[np.sum(P * P, axis=1) < term.radius ** 2]
            for t in ts:
                vals = f(t, P)
                for i in np.argsort(vals)[-3:]:
                    cands.append((float(vals[i]), t, P[i]))
        cands.sort(key=lambda x: -x[0])
        best = cands[0][0]
        for _, t, z in cands[:8]:
            x0 = np.concatenate([[t], z])
            obj = lambda x: -float(f(x[0], x[1:][None, :])[0])
            r = minimize(obj, x0, method="Nelder-Mead",
                         options={"xatol": 1e-12, "fatol": 1e-15, "maxiter": 4000})
            best = max(best, -r.fun)
        return float(best)

    def describe(self):
        return [{"center": list(t.center), "radius": t.radius,
                 "poly": [[c, list(e)] for c, e in t.poly], "amplitude": t.amplitude,
                 "frequency": t.frequency, "phase": t.phase} for t in self.terms]


# the bump chi(u) r with u = r^2 / R^2 peaks where (1 - u)^2 = 2u
_LINEAR_PEAK = 2.0 - np.sqrt(3.0)


def linear_payload_sup(radius, slope):
    """Exact sup over z of |slope| |w| chi(|w|^2 / R^2) (a linear payload under a bump)."""
    u = _LINEAR_PEAK
    return float(abs(slope) * radius * np.sqrt(u) * np.exp(1.0 - 1.0 / (1.0 - u)))
