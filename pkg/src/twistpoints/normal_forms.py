"""Constructors for the standard normal forms of symplectic matrices."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConstraintError, ParameterError
from .symplectic import is_symplectic, rotation, standard_j, symplectic_residual


def jordan_block(m, lam):
    """m x m Jordan block lam*I + superdiagonal ones."""
    return lam * np.eye(m) + np.eye(m, k=1)


def lower_inverse_transpose(m, lam):
    """C_m(lam): lower triangular with entries -(-lam)^{-(i-j+1)}, equal to A_m(lam)^{-T}."""
    C = np.zeros((m, m))
    for i in range(m):
        for j in range(i + 1):
            C[i, j] = -((-lam) ** (-(i - j + 1)))
    return C


def coupling_block(m, lam, b):
    """B_m(lam, b): lower triangular, entry (i, j) = (-lam)^j b_i (0-based)."""
    b = np.asarray(b, float)
    B = np.zeros((m, m))
    for i in range(m):
        for j in range(i + 1):
            B[i, j] = (-lam) ** j * b[i]
    return B


def block_jordan_rotation(m, theta, rho=1.0):
    """2m x 2m block Jordan matrix with rho*R(theta) on the diagonal and I_2 above it."""
    A = np.zeros((2 * m, 2 * m))
    for i in range(m):
        A[2 * i:2 * i + 2, 2 * i:2 * i + 2] = rho * rotation(theta)
        if i < m - 1:
            A[2 * i:2 * i + 2, 2 * i + 2:2 * i + 4] = np.eye(2)
    return A


def block_lower_rotation(m, theta, rho=1.0):
    """Block lower triangular partner of block_jordan_rotation.

    Block (i, j), i >= j, is -(-1/rho)^(i-j+1) R((i-j+1) theta); for rho = 1
    this is (-1)^(i-j) R((i-j+1) theta).
    """
    C = np.zeros((2 * m, 2 * m))
    for i in range(m):
        for j in range(i + 1):
            k = i - j + 1
            C[2 * i:2 * i + 2, 2 * j:2 * j + 2] = -((-1.0 / rho) ** k) * rotation(k * theta)
    return C


@dataclass(frozen=True)
class NormalFormBlock:
    """Tagged normal form with its parameters.

    Use the classmethod constructors; ``variant`` is one of N1, Nm, Rtheta,
    N2mUnit, N2mPlus1Unit, Mm, N2mQuad.
    """

    variant: str
    params: dict = field(default_factory=dict)

    # -- constructors with range checks
    @classmethod
    def n1(cls, lam, b):
        if lam not in (1.0, -1.0, 1, -1):
            raise ParameterError("N1 needs lambda = +-1")
        if b not in (-1, 0, 1):
            raise ParameterError("N1 needs b in {-1, 0, 1}")
        return cls("N1", {"lam": float(lam), "b": float(b)})

    @classmethod
    def nm(cls, lam, b):
        b = tuple(float(x) for x in b)
        if lam not in (1.0, -1.0, 1, -1):
            raise ParameterError("Nm needs lambda = +-1")
        if len(b) < 2:
            raise ParameterError("Nm needs m >= 2")
        return cls("Nm", {"lam": float(lam), "b": b})

    @classmethod
    def rtheta(cls, theta):
        theta = float(theta)
        if not (-np.pi < theta < np.pi) or theta == 0.0:
            raise ParameterError("R(theta) needs theta in (-pi, 0) u (0, pi)")
        return cls("Rtheta", {"theta": theta})

    @classmethod
    def n2m_unit(cls, theta_hat, B):
        B = np.array(B, float)
        if B.ndim != 2 or B.shape[0] != B.shape[1] or B.shape[0] % 2:
            raise ParameterError("N2mUnit needs a 2m x 2m coupling matrix")
        if not (-np.pi < theta_hat < np.pi) or theta_hat == 0.0:
            raise ParameterError("theta_hat must lie in (-pi, 0) u (0, pi)")
        return cls("N2mUnit", {"theta_hat": float(theta_hat),
                               "B": tuple(map(tuple, B))})

    @classmethod
    def n2m_plus1_unit(cls, theta, b_last, B, F, G):
        B = np.array(B, float)
        m2 = B.shape[0]
        if B.shape != (m2, m2) or m2 % 2 or m2 == 0:
            raise ParameterError("N2mPlus1Unit needs a 2m x 2m coupling matrix")
        if b_last not in (-1, 1):
            raise ParameterError("b_{m+1} must be +-1")
        if not (-np.pi < theta < np.pi) or theta == 0.0:
            raise ParameterError("theta must lie in (-pi, 0) u (0, pi)")
        F = tuple(float(x) for x in F)
        G = tuple(float(x) for x in G)
        if len(F) != m2 or len(G) != m2:
            raise ParameterError("F and G must have length 2m")
        return cls("N2mPlus1Unit", {"theta": float(theta), "b_last": int(b_last),
                                    "B": tuple(map(tuple, B)), "F": F, "G": G})

    @classmethod
    def mm(cls, lam, m=1):
        lam = float(lam)
        if lam == 0 or abs(lam) == 1:
            raise ParameterError("M_m needs real lambda not in {0, 1, -1}")
        if m < 1:
            raise ParameterError("m >= 1")
        return cls("Mm", {"lam": lam, "m": int(m)})

    @classmethod
    def quad(cls, rho, theta, m=1):
        if rho <= 0 or rho == 1:
            raise ParameterError("rho must be positive and not 1")
        if not (-np.pi < theta < np.pi) or theta == 0.0:
            raise ParameterError("theta must lie in (-pi, 0) u (0, pi)")
        return cls("N2mQuad", {"rho": float(rho), "theta": float(theta), "m": int(m)})

    @property
    def half_dim(self) -> int:
        v, p = self.variant, self.params
        if v in ("N1", "Rtheta"):
            return 1
        if v == "Nm":
            return len(p["b"])
        if v == "Mm":
            return p["m"]
        if v == "N2mQuad":
            return 2 * p["m"]
        if v == "N2mUnit":
            return len(p["B"])
        if v == "N2mPlus1Unit":
            return len(p["B"]) + 1
        raise ParameterError(v)

    def describe(self) -> str:
        p = {k: v for k, v in self.params.items() if k not in ("B", "F", "G")}
        return f"{self.variant}{p}"


def odd_unit_offsets(m, b_last):
    """The fixed D, E columns and the rotation sign for N_{2m+1}."""
    D = np.zeros(2 * m)
    E = np.zeros(2 * m)
    if b_last == -1:
        D[2 * m - 2] = 1.0
        E[2 * m - 1] = 1.0
        sign = 1.0
    else:
        D[2 * m - 1] = 1.0
        E[2 * m - 2] = 1.0
        sign = -1.0
    return D, E, sign


def _assemble_odd_unit(theta, b_last, B, F, G):
    m2 = B.shape[0]
    m = m2 // 2
    D, E, sign = odd_unit_offsets(m, b_last)
    th = sign * theta
    A = block_jordan_rotation(m, th)
    C = block_lower_rotation(m, th)
    d = m2
    n = d + 1
    N = np.zeros((2 * n, 2 * n))
    N[:d, :d] = A
    N[:d, d] = D
    N[:d, d + 1:2 * d + 1] = B
    N[:d, 2 * d + 1] = E
    N[d, d] = np.cos(th)
    N[d, d + 1:2 * d + 1] = F
    N[d, 2 * d + 1] = -np.sin(th)
    N[d + 1:2 * d + 1, d + 1:2 * d + 1] = C
    N[2 * d + 1, d] = np.sin(th)
    N[2 * d + 1, d + 1:2 * d + 1] = G
    N[2 * d + 1, 2 * d + 1] = np.cos(th)
    return N


def build_normal_form(block: NormalFormBlock, tol: float = 1e-12) -> np.ndarray:
    """Realize a normal form as a matrix and verify it is symplectic."""
    v, p = block.variant, block.params
    if v == "N1":
        M = np.array([[p["lam"], p["b"]], [0.0, p["lam"]]])
    elif v == "Nm":
        m = len(p["b"])
        lam = p["lam"]
        M = np.block([[jordan_block(m, lam), coupling_block(m, lam, p["b"])],
                      [np.zeros((m, m)), lower_inverse_transpose(m, lam)]])
    elif v == "Rtheta":
        M = rotation(p["theta"])
    elif v == "N2mUnit":
        B = np.array(p["B"])
        m = B.shape[0] // 2
        th = p["theta_hat"]
        C = block_lower_rotation(m, th)
        gap = np.linalg.norm(B.T @ C - C.T @ B)
        if gap > 1e-12 * max(1.0, np.linalg.norm(B)):
            raise ConstraintError(f"coupling blocks violate B^T C = C^T B (gap {gap:.2e})")
        for i in range(m):
            for j in range(i + 2, m):
                if np.any(B[2 * i:2 * i + 2, 2 * j:2 * j + 2] != 0):
                    raise ConstraintError("coupling block b_ij must vanish for j > i+1")
        M = np.block([[block_jordan_rotation(m, th), B],
                      [np.zeros((2 * m, 2 * m)), C]])
    elif v == "N2mPlus1Unit":
        M = _assemble_odd_unit(p["theta"], p["b_last"], np.array(p["B"]),
                               np.array(p["F"]), np.array(p["G"]))
        if not is_symplectic(M, 1e-10):
            raise ConstraintError(
                f"N_(2m+1) with these F, G, B is not symplectic "
                f"(residual {symplectic_residual(M):.2e})")
        return M
    elif v == "Mm":
        m, lam = p["m"], p["lam"]
        M = np.block([[jordan_block(m, lam), np.zeros((m, m))],
                      [np.zeros((m, m)), lower_inverse_transpose(m, lam)]])
    elif v == "N2mQuad":
        m, rho, th = p["m"], p["rho"], p["theta"]
        z = np.zeros((2 * m, 2 * m))
        M = np.block([[block_jordan_rotation(m, th, rho), z],
                      [z, block_lower_rotation(m, th, rho)]])
    else:
        raise ParameterError(f"unknown variant {v}")
    if not is_symplectic(M, tol):
        raise ConstraintError(f"{block.describe()} is not symplectic "
                              f"(residual {symplectic_residual(M):.2e})")
    return M


def complete_odd_unit(m, theta, b_last, seed=0, attempts=20):
    """Find B, F, G that make N_{2m+1} symplectic, by nonlinear least squares.

    The fixed layout leaves these entries free; this helper produces one
    admissible choice (useful for tests and scenarios).
    """
    from scipy.optimize import least_squares

    d = 2 * m
    n = d + 1
    J = standard_j(n)

    def unpack(x):
        return x[:d * d].reshape(d, d), x[d * d:d * d + d], x[d * d + d:]

    def resid(x):
        B, F, G = unpack(x)
        N = _assemble_odd_unit(theta, b_last, B, F, G)
        return (N.T @ J @ N - J).ravel()

    rng = np.random.default_rng(seed)
    best = None
    for _ in range(attempts):
        r = least_squares(resid, rng.normal(size=d * d + 2 * d), xtol=1e-15, ftol=1e-15, gtol=1e-15)
        if best is None or r.cost < best.cost:
            best = r
        if best.cost < 1e-28:
            break
    B, F, G = unpack(best.x)
    return B, F, G
