"""Batched Hamiltonians H_t(z) and the composition operations on them.

Every Hamiltonian implements ``evaluate(t, Z, order)`` for a scalar time t
and points Z of shape (N, 2n), returning (value (N,), grad (N, 2n) or None,
hess (N, 2n, 2n) or None).  Vector field: X = -J0 grad H.

Operations:
    bar(F)_t(z)     = -F_t(phi_F^t z)
    sharp(F, G)_t   = F_t(z) + G_t((phi_F^t)^{-1} z)
    wedge(F, G)_t   = 2 rho'(2t) G_{rho(2t)} on [0, 1/2], 2 rho'(2t-1) F_{rho(2t-1)} on [1/2, 1]
    iterate(H, k)_t = k H_{kt}
"""
from __future__ import annotations

import numpy as np

from ..errors import UnsupportedError
from ..symplectic import standard_j
from .forms import QuadraticForm
from .perturbation import CompactPerturbation
from .profiles import Rho


class Hamiltonian:
    n: int

    def evaluate(self, t, Z, order=2):
        raise NotImplementedError

    def value(self, t, Z):
        return self.evaluate(t, np.atleast_2d(Z), 0)[0]

    def grad(self, t, Z):
        return self.evaluate(t, np.atleast_2d(Z), 1)[1]

    def hess(self, t, Z):
        return self.evaluate(t, np.atleast_2d(Z), 2)[2]

    def vector_field(self, t, Z):
        J = standard_j(self.n)
        return self.grad(t, Z) @ J

    @property
    def J(self):
        return standard_j(self.n)


def _shape(Z, order, d):
    N = Z.shape[0]
    return N, (np.zeros((N, d)) if order >= 1 else None), \
        (np.zeros((N, d, d)) if order >= 2 else None)


class ZeroHamiltonian(Hamiltonian):
    def __init__(self, n):
        self.n = n

    def evaluate(self, t, Z, order=2):
        N, g, H = _shape(Z, order, 2 * self.n)
        return np.zeros(N), g, H


class PerturbedHamiltonian(Hamiltonian):
    """Q_t(z) + h_t(z) with Q a QuadraticForm and h compactly supported."""

    def __init__(self, Q: QuadraticForm, h: CompactPerturbation | None = None):
        self.Q = Q
        self.h = h if h is not None else CompactPerturbation()
        self.n = Q.n

    def evaluate(self, t, Z, order=2):
        B = self.Q.matrix(t)
        ZB = Z @ B
        v = 0.5 * np.einsum("ni,ni->n", ZB, Z)
        g = ZB if order >= 1 else None
        H = np.broadcast_to(B, (Z.shape[0],) + B.shape).copy() if order >= 2 else None
        if not self.h.is_zero:
            hv, hg, hH = self.h._sum(t, Z, order)
            v = v + hv
            if order >= 1:
                g = g + hg
            if order >= 2:
                H += hH
        return v, g, H


def quadratic(Q):
    return PerturbedHamiltonian(Q)


class SumHamiltonian(Hamiltonian):
    def __init__(self, *parts):
        self.parts = parts
        self.n = parts[0].n

    def evaluate(self, t, Z, order=2):
        out = [p.evaluate(t, Z, order) for p in self.parts]
        v = sum(o[0] for o in out)
        g = sum(o[1] for o in out) if order >= 1 else None
        H = sum(o[2] for o in out) if order >= 2 else None
        return v, g, H


class LinearPrecomposed(Hamiltonian):
    """G_t(A(t) z) for a time-dependent matrix A(t)."""

    def __init__(self, G, A_fn):
        self.G = G
        self.A_fn = A_fn
        self.n = G.n

    def evaluate(self, t, Z, order=2):
        A = self.A_fn(t)
        v, g, H = self.G.evaluate(t, Z @ A.T, order)
        if order >= 1:
            g = g @ A
        if order >= 2:
            H = np.einsum("ji,njk,kl->nil", A, H, A)
        return v, g, H


class Iterated(Hamiltonian):
    """H^{x k}_t(z) = k H_{kt}(z)."""

    def __init__(self, H, k):
        self.H = H
        self.k = int(k)
        self.n = H.n

    def evaluate(self, t, Z, order=2):
        v, g, Hs = self.H.evaluate(self.k * t, Z, order)
        k = self.k
        return k * v, (k * g if g is not None else None), (k * Hs if Hs is not None else None)


class Wedge(Hamiltonian):
    """F wedge G: G reparametrized on [0, 1/2], then F on [1/2, 1]; 1-periodic."""

    def __init__(self, F, G, rho: Rho | None = None):
        self.F, self.G = F, G
        self.rho = rho or Rho()
        self.n = F.n

    def piece(self, t):
        """(hamiltonian, inner time, factor) at time t."""
        t = float(np.mod(t, 1.0))
        if t <= 0.5:
            s = 2.0 * t
            return self.G, self.rho(s), 2.0 * float(self.rho.deriv(np.array(s)))
        s = 2.0 * t - 1.0
        return self.F, self.rho(s), 2.0 * float(self.rho.deriv(np.array(s)))

    def evaluate(self, t, Z, order=2):
        H, s, c = self.piece(t)
        if c == 0.0:
            N, g, Hs = _shape(Z, order, 2 * self.n)
            return np.zeros(N), g, Hs
        v, g, Hs = H.evaluate(s, Z, order)
        return c * v, (c * g if g is not None else None), (c * Hs if Hs is not None else None)


class CappedQuadratic(Hamiltonian):
    """eta(1/2 <B z, z>) for a constant symmetric B and the cutoff eta."""

    def __init__(self, B, eta):
        self.B = np.asarray(B, float)
        self.eta = eta
        self.n = self.B.shape[0] // 2

    def evaluate(self, t, Z, order=2):
        BZ = Z @ self.B
        s = 0.5 * np.einsum("ni,ni->n", BZ, Z)
        v = np.asarray(self.eta(s))
        if order == 0:
            return v, None, None
        d1 = np.asarray(self.eta.deriv(s))
        g = d1[:, None] * BZ
        if order == 1:
            return v, g, None
        d2 = np.asarray(self.eta.deriv2(s))
        H = d2[:, None, None] * BZ[:, :, None] * BZ[:, None, :] + d1[:, None, None] * self.B
        return v, g, H


class NumericBar(Hamiltonian):
    """-F_t(phi_F^t z) for a nonlinear F; the inner flow is integrated numerically."""

    def __init__(self, F, steps_per_unit=512):
        self.F = F
        self.steps = steps_per_unit
        self.n = F.n

    def evaluate(self, t, Z, order=1):
        from .integrate import integrate
        if order >= 2:
            raise UnsupportedError("Hessian of a numerically barred Hamiltonian")
        k = max(8, int(np.ceil(abs(t) * self.steps)))
        r = integrate(self.F, Z, 0.0, t, steps=k, variational=order >= 1)
        v, g, _ = self.F.evaluate(t, r.z, order)
        if order >= 1:
            g = -np.einsum("nji,nj->ni", r.monodromy, g)
        return -v, g, None


class NumericSharp(Hamiltonian):
    """F_t(z) + G_t((phi_F^t)^{-1} z) for a nonlinear F."""

    def __init__(self, F, G, steps_per_unit=512):
        self.F, self.G = F, G
        self.steps = steps_per_unit
        self.n = F.n

    def evaluate(self, t, Z, order=1):
        from .integrate import integrate
        if order >= 2:
            raise UnsupportedError("Hessian of a numerically composed Hamiltonian")
        k = max(8, int(np.ceil(abs(t) * self.steps)))
        r = integrate(self.F, Z, t, 0.0, steps=k, variational=order >= 1)
        vF, gF, _ = self.F.evaluate(t, Z, order)
        vG, gG, _ = self.G.evaluate(t, r.z, order)
        g = None
        if order >= 1:
            g = gF + np.einsum("nji,nj->ni", r.monodromy, gG)
        return vF + vG, g, None


def _quadratic_form_of(H):
    if isinstance(H, PerturbedHamiltonian) and H.h.is_zero:
        return H.Q
    return None


def bar(F):
    """Hamiltonian generating the inverse flow of F."""
    Q = _quadratic_form_of(F)
    if Q is not None:
        return PerturbedHamiltonian(Q.bar())
    return NumericBar(F)


def sharp(F, G):
    """Hamiltonian generating phi_F^t o phi_G^t."""
    Q = _quadratic_form_of(F)
    if Q is not None:
        inner = LinearPrecomposed(G, lambda t: np.linalg.inv(Q.flow(t)))
        GQ = _quadratic_form_of(G)
        if GQ is not None:
            return PerturbedHamiltonian(Q.sharp(GQ))
        return SumHamiltonian(F, inner)
    return NumericSharp(F, G)


def wedge(F, G, rho=None):
    return Wedge(F, G, rho)


def iterate(H, k):
    if k == 1:
        return H
    Q = _quadratic_form_of(H)
    if Q is not None:
        return PerturbedHamiltonian(Q.iterate(k))
    return Iterated(H, k)
