"""Time-periodic quadratic Hamiltonians Q_t(z) = 1/2 <B_t z, z> with their linear flows.

Closed-form kinds carry both t -> B_t and t -> flow(t); the bar and sharp
operations stay inside that algebra:

    bar:    B = -Phi_F^T B_F Phi_F,                     flow Phi_F^{-1}
    sharp:  B = B_F + Phi_F^{-T} B_G Phi_F^{-1},         flow Phi_F Phi_G
"""
from __future__ import annotations

import numpy as np
import scipy.linalg as sla

from ..errors import DimensionError
from ..symplectic import diamond, diamond_indices, is_symplectic, standard_j


def _sym(B):
    return 0.5 * (B + B.T)


class QuadraticForm:
    """A 1-periodic family of symmetric matrices with its fundamental solution.

    Use the constructors ``constant``, ``rotated``, ``sampled`` and the
    algebra (``bar``, ``sharp``, ``iterate``, ``conjugate``, ``diamond_of``).
    ``kind`` is "constant", "rotated", "sampled" or "composite".
    """

    def __init__(self, n, matrix_fn, flow_fn=None, kind="composite", data=None):
        self.n = int(n)
        self._matrix_fn = matrix_fn
        self._flow_fn = flow_fn
        self.kind = kind
        self.data = data or {}

    def __repr__(self):
        return f"QuadraticForm(n={self.n}, kind={self.kind})"

    # -- constructors
    @classmethod
    def constant(cls, B):
        B = np.array(B, float)
        if B.ndim != 2 or B.shape[0] != B.shape[1] or B.shape[0] % 2:
            raise DimensionError("B must be an even square matrix")
        if np.linalg.norm(B - B.T) > 1e-12 * max(1.0, np.linalg.norm(B)):
            raise ValueError("B must be symmetric")
        B = _sym(B)
        n = B.shape[0] // 2
        X = -standard_j(n) @ B
        return cls(n, lambda t: B, lambda t: sla.expm(t * X), "constant", {"B": B, "X": X})

    @classmethod
    def from_generator(cls, X):
        """Autonomous form with flow e^{tX}; B = J0 X."""
        X = np.asarray(X, float)
        n = X.shape[0] // 2
        return cls.constant(_sym(standard_j(n) @ X))

    @classmethod
    def rotated(cls, m_hat):
        """B_t = -pi I + e^{pi J0 t} J0 m_hat e^{-pi J0 t}; flow e^{pi J0 t} e^{m_hat t}."""
        m_hat = np.asarray(m_hat, float)
        n = m_hat.shape[0] // 2
        J = standard_j(n)
        C = _sym(J @ m_hat)
        I = np.eye(2 * n)

        def rot(t):
            return np.cos(np.pi * t) * I + np.sin(np.pi * t) * J

        def matrix(t):
            R = rot(t)
            return -np.pi * I + R @ C @ R.T

        def flow(t):
            return rot(t) @ sla.expm(t * m_hat)

        return cls(n, matrix, flow, "rotated", {"m_hat": m_hat})

    @classmethod
    def sampled(cls, matrix_fn, n, steps=2048):
        """Arbitrary periodic B_t; the flow is integrated numerically (RK4)."""
        J = standard_j(n)

        def flow(t):
            k = max(16, int(np.ceil(abs(t) * steps)))
            h = t / k
            Phi = np.eye(2 * n)
            s = 0.0
            f = lambda s, P: -J @ _sym(np.asarray(matrix_fn(s), float)) @ P
            for _ in range(k):
                k1 = f(s, Phi)
                k2 = f(s + h / 2, Phi + h / 2 * k1)
                k3 = f(s + h / 2, Phi + h / 2 * k2)
                k4 = f(s + h, Phi + h * k3)
                Phi = Phi + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
                s += h
            return Phi

        return cls(n, lambda t: _sym(np.asarray(matrix_fn(t), float)), flow, "sampled")

    @classmethod
    def zero(cls, n):
        return cls.constant(np.zeros((2 * n, 2 * n)))

    # -- evaluation
    def matrix(self, t):
        return self._matrix_fn(t)

    def flow(self, t):
        return self._flow_fn(t)

    def generator(self, t):
        return -standard_j(self.n) @ self.matrix(t)

    def value(self, t, Z):
        Z = np.atleast_2d(Z)
        return 0.5 * np.einsum("ni,ij,nj->n", Z, self.matrix(t), Z)

    @property
    def monodromy(self):
        return self.flow(1.0)

    @property
    def closed_form(self):
        return self.kind != "sampled"

    @property
    def is_autonomous(self):
        return self.kind == "constant"

    def is_loop(self, tol=1e-10):
        return bool(np.linalg.norm(self.flow(1.0) - np.eye(2 * self.n)) <= tol)

    def is_nondegenerate(self, tol=1e-8):
        w = np.linalg.eigvals(self.monodromy)
        return bool(np.min(np.abs(w - 1.0)) > tol)

    def periodicity_defect(self, samples=32):
        ts = np.linspace(0.0, 1.0, samples, endpoint=False)
        return max(float(np.linalg.norm(self.matrix(t + 1.0) - self.matrix(t))) for t in ts)

    def time_dependence(self, samples=32):
        """max_t |B_t - B_0|; zero for forms that are time-independent."""
        B0 = self.matrix(0.0)
        ts = np.linspace(0.0, 1.0, samples, endpoint=False)
        return max(float(np.linalg.norm(self.matrix(t) - B0)) for t in ts)

    def flow_residual(self, t, h=1e-5):
        """|d/dt flow - X_t flow| by central differences (closed-form consistency)."""
        d = (self.flow(t + h) - self.flow(t - h)) / (2 * h)
        return float(np.linalg.norm(d - self.generator(t) @ self.flow(t)))

    # -- algebra
    def frozen(self):
        """Replace by the constant form B_0 (for forms verified time-independent)."""
        return QuadraticForm.constant(self.matrix(0.0))

    def bar(self):
        F = self

        def matrix(t):
            P = F.flow(t)
            return _sym(-P.T @ F.matrix(t) @ P)

        return QuadraticForm(self.n, matrix, lambda t: np.linalg.inv(F.flow(t)))

    def sharp(self, other):
        F, G = self, other
        if F.n != G.n:
            raise DimensionError("forms must share the dimension")

        def matrix(t):
            Pi = np.linalg.inv(F.flow(t))
            return _sym(F.matrix(t) + Pi.T @ G.matrix(t) @ Pi)

        return QuadraticForm(self.n, matrix, lambda t: F.flow(t) @ G.flow(t))

    def iterate(self, k):
        if k == 1:
            return self
        F = self
        if self.kind == "constant":
            return QuadraticForm.constant(k * self.data["B"])
        return QuadraticForm(self.n, lambda t: k * F.matrix(k * t), lambda t: F.flow(k * t))

    def scale_time(self, c):
        """B -> c B for an autonomous form (flow at time c t)."""
        if self.kind != "constant":
            raise ValueError("only autonomous forms can be time-scaled")
        return QuadraticForm.constant(c * self.data["B"])

    def conjugate(self, C):
        """Change of coordinates z = C w: B -> C^T B C, flow -> C^{-1} flow C."""
        C = np.asarray(C, float)
        if not is_symplectic(C, 1e-9):
            raise ValueError("conjugating matrix must be symplectic")
        Ci = np.linalg.inv(C)
        F = self
        return QuadraticForm(self.n, lambda t: _sym(C.T @ F.matrix(t) @ C),
                             lambda t: Ci @ F.flow(t) @ C)

    @staticmethod
    def diamond_of(*forms):
        """Direct sum in the interleaved coordinates of the diamond product."""
        n = sum(f.n for f in forms)
        if all(f.kind == "constant" for f in forms):
            return QuadraticForm.constant(diamond(*[f.data["B"] for f in forms]))
        return QuadraticForm(n, lambda t: diamond(*[f.matrix(t) for f in forms]),
                             lambda t: diamond(*[f.flow(t) for f in forms]))


def block_coordinates(half_dims):
    """Index arrays of each diamond block inside R^{2n}."""
    return diamond_indices(half_dims)
