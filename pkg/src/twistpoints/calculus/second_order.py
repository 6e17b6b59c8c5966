"""First-order form of u'' + grad_u F(t, u) = 0.

With z = (q, p) and H(t, q, p) = 1/2 |p|^2 + F(t, q) the flow is
q' = p, p' = -grad F.  F is assembled as

    F(t, q) = 1/2 q^T A_inf(t) q + 1/2 chi(|q|^2 / R0^2) q^T (A0(t) - A_inf(t)) q + f(t, q)

with chi the bump of the perturbation module (chi(0) = 1, chi = 0 for
|q| >= R0), so grad F(t, u) = A0(t) u + o(|u|) at the origin and
grad F = A_inf(t) u for |u| >= R0.  ``f`` is an optional compactly
supported payload in q-space whose gradient must be o(|u|) at 0.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import DegeneracyError, DimensionError
from ..index.cz import mean_index
from ..index.paths import SymplecticPath
from .forms import QuadraticForm
from .hamiltonians import Hamiltonian
from .perturbation import CompactPerturbation, _bump_derivs


def _as_fn(A):
    if callable(A):
        return A, False
    A = np.array(A, float)
    return (lambda t: A), True


def _sym(A):
    return 0.5 * (A + A.T)


def companion_form(A, N=None) -> QuadraticForm:
    """Quadratic form blockdiag(A(t), I_N) with flow matrix [[0, I], [-A, 0]]."""
    fn, const = _as_fn(A)
    N = N or np.asarray(fn(0.0)).shape[0]

    def B(t):
        out = np.zeros((2 * N, 2 * N))
        out[:N, :N] = _sym(np.asarray(fn(t), float))
        out[N:, N:] = np.eye(N)
        return out

    if const:
        return QuadraticForm.constant(B(0.0))
    return QuadraticForm.sampled(B, N)


def companion_matrix(A):
    """[[0, I], [-A, 0]] for a symmetric A."""
    A = np.asarray(A, float)
    N = A.shape[0]
    out = np.zeros((2 * N, 2 * N))
    out[:N, N:] = np.eye(N)
    out[N:, :N] = -A
    return out


class SecondOrderHamiltonian(Hamiltonian):
    """H(t, q, p) = 1/2 |p|^2 + F(t, q); see the module docstring."""

    def __init__(self, A0, A_inf, R0=1.0, payload: CompactPerturbation | None = None):
        self._A0, _ = _as_fn(A0)
        self._Ainf, _ = _as_fn(A_inf)
        self.N = np.asarray(self._Ainf(0.0)).shape[0]
        self.n = self.N
        self.R0 = float(R0)
        self.payload = payload if payload is not None else CompactPerturbation()
        if not self.payload.is_zero and self.payload.terms[0].dim != self.N:
            raise DimensionError("payload must live in q-space")

    def A0(self, t):
        return _sym(np.asarray(self._A0(t), float))

    def A_inf(self, t):
        return _sym(np.asarray(self._Ainf(t), float))

    def force(self, t, q):
        """grad_q F(t, q) for rows q."""
        Q = np.atleast_2d(np.asarray(q, float))
        z = np.concatenate([Q, np.zeros_like(Q)], axis=1)
        return self.evaluate(t, z, 1)[1][:, :self.N]

    def evaluate(self, t, Z, order=2):
        N = self.N
        q, p = Z[:, :N], Z[:, N:]
        Ai = self.A_inf(t)
        D = self.A0(t) - Ai
        qA = q @ Ai
        qD = q @ D
        s = np.einsum("ni,ni->n", qD, q)
        u = np.sum(q * q, axis=1) / self.R0 ** 2
        g, g1, g2 = _bump_derivs(u)
        v = 0.5 * np.einsum("ni,ni->n", p, p) + 0.5 * np.einsum("ni,ni->n", qA, q) + 0.5 * g * s
        grad = hess = None
        du = 2.0 * q / self.R0 ** 2
        if order >= 1:
            gq = qA + g[:, None] * qD + (0.5 * s * g1)[:, None] * du
            grad = np.concatenate([gq, p], axis=1)
        if order >= 2:
            Hq = np.broadcast_to(Ai, (len(q), N, N)).copy()
            Hq += g[:, None, None] * D
            Hq += g1[:, None, None] * (du[:, :, None] * qD[:, None, :] + qD[:, :, None] * du[:, None, :])
            Hq += (0.5 * s * g2)[:, None, None] * du[:, :, None] * du[:, None, :]
            Hq += (0.5 * s * g1 * 2.0 / self.R0 ** 2)[:, None, None] * np.eye(N)
            hess = np.zeros((len(q), 2 * N, 2 * N))
            hess[:, :N, :N] = Hq
            hess[:, N:, N:] = np.eye(N)
        if not self.payload.is_zero:
            hv, hg, hH = self.payload._sum(t, q, order)
            v = v + hv
            if order >= 1:
                grad[:, :N] += hg
            if order >= 2:
                hess[:, :N, :N] += hH
        return v, grad, hess


@dataclass
class SecondOrderSystem:
    H: SecondOrderHamiltonian = field(repr=False)
    Q_inf: QuadraticForm = field(repr=False)
    Q_zero: QuadraticForm = field(repr=False)

    def mean_indices(self, samples=256):
        """(mean index at the origin, mean index at infinity)."""
        return _mean(self.Q_zero, samples), _mean(self.Q_inf, samples)

    def mean_index_gap(self, samples=256):
        a, b = self.mean_indices(samples)
        return a - b


def _mean(form, samples):
    if form.is_autonomous:
        path = SymplecticPath.exponential(form.generator(0.0))
    else:
        path = SymplecticPath.from_function(form.flow, samples)
    return mean_index(path).value


def second_order_to_hamiltonian(A0, A_inf, R0=1.0, payload=None, check=True,
                                tol=1e-8) -> SecondOrderSystem:
    """Hamiltonian of u'' + grad F(t, u) = 0 with its two companion linear systems.

    Raises DegeneracyError if either companion monodromy has the eigenvalue 1
    and ``check`` is set.
    """
    H = SecondOrderHamiltonian(A0, A_inf, R0, payload)
    Qi = companion_form(A_inf, H.N)
    Q0 = companion_form(A0, H.N)
    if check:
        for name, Q in (("infinity", Qi), ("the origin", Q0)):
            if not Q.is_nondegenerate(tol):
                raise DegeneracyError(f"linear system at {name} is degenerate")
    return SecondOrderSystem(H, Qi, Q0)
