"""Smooth reparametrization rho and the cutoff eta_{S0}.

rho' is the bump exp(-c / (t (1 - t))) on (0, 1) normalized to integral 1,
so rho(0) = 0, rho(1) = 1 and all derivatives of rho' vanish at the ends.
With c = 1/4 the maximum of rho' is about 1.657 < 2.

eta_{S0} is 0 on [0, S0], t - (S0 + 1) for t >= S0 + 2, and on [S0, S0 + 2]
its slope is the smooth step beta((t - S0) / 2) with
beta(u) = f(u) / (f(u) + f(1 - u)), f(u) = exp(-1/u).  Extended oddly.
"""
from __future__ import annotations

from functools import lru_cache

import numpy as np

_GL_NODES = 96


@lru_cache(maxsize=None)
def _gauss_legendre(k):
    return np.polynomial.legendre.leggauss(k)


def _integrate(f, a, b, k=_GL_NODES):
    """Gauss-Legendre quadrature of f over [a, b] (a, b scalars or arrays)."""
    x, w = _gauss_legendre(k)
    a = np.asarray(a, float)
    b = np.asarray(b, float)
    half = 0.5 * (b - a)
    mid = 0.5 * (b + a)
    pts = mid[..., None] + half[..., None] * x
    return half * np.sum(w * f(pts), axis=-1)


def _bump(t, c):
    t = np.asarray(t, float)
    out = np.zeros_like(t)
    inside = (t > 0) & (t < 1)
    ti = t[inside]
    out[inside] = np.exp(-c / (ti * (1 - ti)))
    return out


class Rho:
    """Non-decreasing reparametrization of [0, 1], 2-periodic and even about 1."""

    def __init__(self, c=0.25):
        self.c = float(c)
        # split at 1/2 so each panel sees a one-sided flat end
        half = _integrate(lambda s: _bump(s, self.c), 0.0, 0.5)
        self._norm = 2.0 * half

    def deriv(self, t):
        """rho'(t) on [0, 1]."""
        return _bump(t, self.c) / self._norm

    def deriv2(self, t):
        t = np.asarray(t, float)
        out = np.zeros_like(t)
        inside = (t > 0) & (t < 1)
        ti = t[inside]
        g = ti * (1 - ti)
        out[inside] = np.exp(-self.c / g) * self.c * (1 - 2 * ti) / g ** 2 / self._norm
        return out

    def __call__(self, t):
        t = np.asarray(t, float)
        u = np.mod(t, 2.0)
        u = np.where(u > 1.0, 2.0 - u, u)
        lo = np.minimum(u, 0.5)
        val = _integrate(lambda s: _bump(s, self.c), np.zeros_like(lo), lo)
        hi = np.maximum(u, 0.5)
        val2 = _integrate(lambda s: _bump(s, self.c), np.full_like(hi, 0.5), hi)
        out = (val + val2) / self._norm
        return out if out.ndim else float(out)

    @property
    def max_deriv(self):
        # the bump is maximal at t = 1/2
        return float(self.deriv(np.array(0.5)))


def _f(u):
    u = np.asarray(u, float)
    out = np.zeros_like(u)
    pos = u > 0
    out[pos] = np.exp(-1.0 / u[pos])
    return out


def smooth_step(u):
    """beta(u): 0 for u <= 0, 1 for u >= 1, smooth and increasing between."""
    u = np.asarray(u, float)
    a = _f(u)
    b = _f(1.0 - u)
    return a / (a + b)


def smooth_step_deriv(u):
    u = np.asarray(u, float)
    out = np.zeros_like(u)
    m = (u > 0) & (u < 1)
    um = u[m]
    a = np.exp(-1.0 / um)
    b = np.exp(-1.0 / (1.0 - um))
    da = a / um ** 2
    db = -b / (1.0 - um) ** 2
    out[m] = (da * b - a * db) / (a + b) ** 2
    return out


class Eta:
    """Odd cutoff eta_{S0} with 0 <= eta' <= 1."""

    def __init__(self, S0):
        if S0 < 0:
            raise ValueError("S0 must be nonnegative")
        self.S0 = float(S0)

    def __call__(self, t):
        t = np.asarray(t, float)
        s = np.sign(t)
        a = np.abs(t)
        u = np.clip((a - self.S0) / 2.0, 0.0, 1.0)
        ramp = 2.0 * _integrate(smooth_step, np.zeros_like(u), u)
        out = np.where(a >= self.S0 + 2.0, a - (self.S0 + 1.0), ramp)
        out = s * out
        return out if out.ndim else float(out)

    def deriv(self, t):
        t = np.asarray(t, float)
        out = smooth_step((np.abs(t) - self.S0) / 2.0)
        return out if out.ndim else float(out)

    def deriv2(self, t):
        t = np.asarray(t, float)
        out = np.sign(t) * 0.5 * smooth_step_deriv((np.abs(t) - self.S0) / 2.0)
        return out if out.ndim else float(out)


class SmoothingProfile:
    def __init__(self, S0=0.0, c=0.25):
        self.rho = Rho(c)
        self.eta = Eta(S0)
