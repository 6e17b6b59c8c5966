"""Real logarithms of symplectic matrices.

Three independent routes are offered: the principal logarithm (Schur based
inverse scaling and squaring), a Gauss-Legendre evaluation of the resolvent
integral, and closed forms for the normal-form families.  On top of these
``exp_representation`` splits a matrix into blocks of the form (+-) e^m.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

from .errors import DomainError, ParameterError, UnsupportedError
from .normal_forms import NormalFormBlock, build_normal_form
from .spectral import krein_clusters, real_invariant_basis, single_linkage, symplectic_gram_schmidt
from .symplectic import (SymplecticMatrix, diamond, infinitesimal_residual, is_symplectic,
                         rotation, standard_j)


@dataclass(frozen=True)
class InfinitesimallySymplectic:
    """A real 2n x 2n matrix X with J X + X^T J = 0 and spectrum in |Im| < pi."""

    matrix: np.ndarray = field(repr=False)
    strip_certificate: float = 0.0

    def __post_init__(self):
        X = np.array(self.matrix, float)
        X.setflags(write=False)
        object.__setattr__(self, "matrix", X)
        res = infinitesimal_residual(X)
        if res > 1e-8 * max(1.0, float(np.linalg.norm(X))):
            raise DomainError(f"not infinitesimally symplectic (residual {res:.2e})")
        strip = float(np.max(np.abs(np.linalg.eigvals(X).imag))) if X.size else 0.0
        if strip >= np.pi:
            raise DomainError(f"spectrum leaves the strip |Im| < pi ({strip:.6g})")
        object.__setattr__(self, "strip_certificate", strip)

    @property
    def n(self):
        return self.matrix.shape[0] // 2

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.matrix, dtype=dtype)


def _check_log_domain(A, tol):
    w = np.linalg.eigvals(A)
    for lam in w:
        if abs(lam) <= tol:
            raise DomainError(f"singular matrix: eigenvalue {lam!r}", lam)
        if lam.real < 0 and abs(lam.imag) <= tol * max(1.0, abs(lam)):
            raise DomainError(f"eigenvalue {lam!r} on the closed negative real axis", lam)
    return w


def principal_log(A, tol: float = 1e-8):
    """Principal logarithm of a real matrix with spectrum off the closed negative axis.

    Returns an ``InfinitesimallySymplectic`` when A is symplectic, otherwise a
    plain ndarray.  Raises DomainError when the spectrum touches R^-.
    """
    A = np.asarray(A, float)
    _check_log_domain(A, tol)
    X = sla.logm(A)
    if np.iscomplexobj(X):
        imag = float(np.max(np.abs(X.imag)))
        if imag > 1e-8 * max(1.0, float(np.max(np.abs(X.real)))):
            raise DomainError(f"logarithm is not real (imaginary part {imag:.2e})")
        X = X.real
    X = np.ascontiguousarray(X)
    back = sla.expm(X)
    err = np.linalg.norm(back - A) / max(1.0, np.linalg.norm(A))
    if err > 1e-8:
        raise DomainError(f"logarithm round trip failed (relative error {err:.2e})")
    if A.shape[0] % 2 == 0 and is_symplectic(A, 1e-9):
        # project onto the Lie algebra to remove rounding drift
        n = A.shape[0] // 2
        J = standard_j(n)
        X = 0.5 * (X + J @ X.T @ J)
        return InfinitesimallySymplectic(X)
    return X


def integral_log(A, quadrature_nodes: int = 64, return_error: bool = False):
    """log A as the integral of (A - I)[t(A - I) + I]^{-1} over [0, 1].

    Evaluated with Gauss-Legendre; the error estimate is the difference to the
    rule with half as many nodes.
    """
    A = np.asarray(A, float)
    _check_log_domain(A, 1e-12)
    I = np.eye(A.shape[0])
    D = A - I

    def rule(k):
        x, w = np.polynomial.legendre.leggauss(k)
        t = 0.5 * (x + 1.0)
        w = 0.5 * w
        acc = np.zeros_like(A)
        for ti, wi in zip(t, w):
            R = ti * D + I
            if np.linalg.cond(R) > 1e12:
                raise DomainError(f"resolvent t(A-I)+I singular near t={ti:.6g}")
            acc += wi * np.linalg.solve(R.T, D.T).T
        return acc

    X = rule(quadrature_nodes)
    if return_error:
        coarse = rule(max(2, quadrature_nodes // 2))
        return X, float(np.linalg.norm(X - coarse))
    return X


def nilpotent_log(X):
    """log X by the terminating series sum (-1)^{k-1} (X - I)^k / k for unipotent X."""
    X = np.asarray(X, float)
    d = X.shape[0]
    N = X - np.eye(d)
    term = np.eye(d)
    out = np.zeros_like(X)
    for k in range(1, d + 1):
        term = term @ N
        out += (-1) ** (k - 1) * term / k
    if np.linalg.norm(term @ N) > 1e-12 * max(1.0, np.linalg.norm(N)) ** (d + 1):
        raise DomainError("X - I is not nilpotent; series does not terminate")
    return out


def _toeplitz_log(m, lam, sign_pattern):
    """Upper triangular Toeplitz with log|lam| diagonal; offset k entry sign_pattern(k)/(k lam^k)."""
    T = np.log(abs(lam)) * np.eye(m)
    for k in range(1, m):
        T += sign_pattern(k) / (k * abs(lam) ** k) * np.eye(m, k=k)
    return T


def _lie_pair(upper):
    z = np.zeros_like(upper)
    return np.block([[upper, z], [z, -upper.T]])


def closed_form_log(block: NormalFormBlock):
    """Closed-form logarithm of a normal form: returns (sign, generator) with M = sign e^m."""
    v, p = block.variant, block.params
    if v == "N1":
        b = p["b"]
        if p["lam"] > 0:
            X = np.array([[0.0, b], [0.0, 0.0]])
            return 1, InfinitesimallySymplectic(X)
        # -[[1, -b], [0, 1]] = [[-1, b], [0, -1]]
        X = np.array([[0.0, -b], [0.0, 0.0]])
        return -1, InfinitesimallySymplectic(X)
    if v == "Nm":
        M = build_normal_form(block)
        if p["lam"] > 0:
            return 1, InfinitesimallySymplectic(nilpotent_log(M))
        return -1, InfinitesimallySymplectic(nilpotent_log(-M))
    if v == "Rtheta":
        t = p["theta"]
        return 1, InfinitesimallySymplectic(np.array([[0.0, -t], [t, 0.0]]))
    if v == "Mm":
        m, lam = p["m"], p["lam"]
        if lam > 0:
            up = _toeplitz_log(m, lam, lambda k: (-1.0) ** (k + 1))
            return 1, InfinitesimallySymplectic(_lie_pair(up))
        up = _toeplitz_log(m, lam, lambda k: -1.0)
        return -1, InfinitesimallySymplectic(_lie_pair(up))
    if v == "N2mQuad":
        m, rho, th = p["m"], p["rho"], p["theta"]
        base = rho * rotation(th)
        inv = np.linalg.inv(base)
        up = np.zeros((2 * m, 2 * m))
        diag = np.array([[np.log(rho), -th], [th, np.log(rho)]])
        for i in range(m):
            up[2 * i:2 * i + 2, 2 * i:2 * i + 2] = diag
            for k in range(1, m - i):
                j = i + k
                up[2 * i:2 * i + 2, 2 * j:2 * j + 2] = (-1.0) ** (k + 1) / k * np.linalg.matrix_power(inv, k)
        return 1, InfinitesimallySymplectic(_lie_pair(up))
    raise UnsupportedError(f"no closed-form logarithm for {v}; unit-circle Jordan "
                           "families are handled by build_vg")


# ---------------------------------------------------------------- V(theta) + G

@dataclass(frozen=True)
class VGPair:
    """Semisimple plus nilpotent split m = V + G of a unit-circle generator."""

    theta: float
    epsilon: int
    t_j: int
    V: np.ndarray = field(repr=False)
    G: np.ndarray = field(repr=False)

    @property
    def m(self):
        return self.V + self.G

    @property
    def half_dim(self):
        return self.t_j + 1

    def exp_v(self):
        """Closed form of e^V."""
        d = 2 * (self.t_j + 1)
        if self.t_j % 2:
            return sla.block_diag(*[rotation(self.theta)] * (d // 2))
        return np.cos(self.theta) * np.eye(d) + np.sin(self.theta) / self.theta * self.V


def build_vg(t_j: int, theta: float, epsilon: int = 1) -> VGPair:
    """Assemble the unit-circle generator m = V(theta) + G for a given t_j.

    Layout is in (q | p) coordinates with half dimension t_j + 1.
    Odd t_j, r = (t_j+1)/2: the q-q quadrant is block lower bidiagonal with
    L = [[0, -theta], [theta, 0]] on the diagonal and I_2 below, the p-p
    quadrant has L on the diagonal and -I_2 above, the p-q quadrant is zero
    except its last 2x2 block (-1)^(r-1) epsilon I_2.
    Even t_j, m = t_j + 1: [[N, B], [-B, -N^T]] with N the subdiagonal shift
    and B = epsilon theta K, K anti-diagonal with K[i, m-1-i] = (-1)^(i+1).
    """
    if t_j < 0 or int(t_j) != t_j:
        raise ParameterError("t_j must be a nonnegative integer")
    t_j = int(t_j)
    if epsilon not in (1, -1):
        raise ParameterError("epsilon must be +-1")
    if not (-np.pi < theta < np.pi) or theta == 0.0:
        raise DomainError("theta must lie in (-pi, 0) u (0, pi)", theta)
    n = t_j + 1
    L = np.array([[0.0, -theta], [theta, 0.0]])
    if t_j % 2:
        r = n // 2
        V = np.zeros((2 * n, 2 * n))
        G = np.zeros((2 * n, 2 * n))
        for i in range(r):
            V[2 * i:2 * i + 2, 2 * i:2 * i + 2] = L
            V[n + 2 * i:n + 2 * i + 2, n + 2 * i:n + 2 * i + 2] = L
            if i > 0:
                G[2 * i:2 * i + 2, 2 * i - 2:2 * i] = np.eye(2)
                G[n + 2 * i - 2:n + 2 * i, n + 2 * i:n + 2 * i + 2] = -np.eye(2)
        G[n + 2 * r - 2:n + 2 * r, 2 * r - 2:2 * r] = (-1) ** (r - 1) * epsilon * np.eye(2)
    else:
        N = np.eye(n, k=-1)
        K = np.zeros((n, n))
        for i in range(n):
            K[i, n - 1 - i] = (-1.0) ** (i + 1)
        B = epsilon * theta * K
        z = np.zeros((n, n))
        V = np.block([[z, B], [-B, z]])
        G = np.block([[N, z], [z, -N.T]])
    V.setflags(write=False)
    G.setflags(write=False)
    return VGPair(float(theta), int(epsilon), t_j, V, G)


# ---------------------------------------------------------------- exp representation

@dataclass(frozen=True)
class ExpRepresentation:
    """P^{-1} M P = (s_1 e^{m_1}) diamond ... diamond (s_k e^{m_k})."""

    conjugator: np.ndarray = field(repr=False)
    signs: tuple
    generators: tuple = field(repr=False)

    @property
    def half_dims(self):
        return tuple(g.n for g in self.generators)

    def reconstruct(self):
        """The diamond product of the signed exponentials (conjugated frame)."""
        return diamond(*[s * sla.expm(np.asarray(g)) for s, g in zip(self.signs, self.generators)])

    def generator(self):
        """Generator in the original frame, meaningful when all signs are +1."""
        m = diamond(*[np.asarray(g) for g in self.generators])
        P = self.conjugator
        return P @ m @ np.linalg.inv(P)

    def residual(self, M):
        P = self.conjugator
        M = np.asarray(M, float)
        return float(np.linalg.norm(np.linalg.solve(P, M @ P) - self.reconstruct()))


def _block_log(Mb):
    """(sign, generator) for a block whose spectrum is all negative or off R^-."""
    w = np.linalg.eigvals(Mb)
    neg = [(lam.real < 0 and abs(lam.imag) <= 1e-6 * max(1.0, abs(lam))) for lam in w]
    if all(neg):
        return -1, principal_log(-Mb, tol=1e-12)
    if any(neg):
        raise UnsupportedError("block mixes negative real and other eigenvalues")
    return 1, principal_log(Mb, tol=1e-12)


def exp_representation(M=None, blocks=None, conjugator=None, split_tol: float = 1e-6):
    """Exponential representation of a symplectic matrix.

    Either pass ``blocks`` (NormalFormBlock factors, with an optional known
    ``conjugator`` P so that M = P (diamond blocks) P^{-1}), or a generic
    ``M`` whose spectrum splits into well-separated symplectic clusters.
    """
    if blocks is not None:
        n = sum(b.half_dim for b in blocks)
        P = np.eye(2 * n) if conjugator is None else np.asarray(conjugator, float)
        signs, gens = [], []
        for b in blocks:
            if b.variant in ("N2mUnit", "N2mPlus1Unit"):
                s, g = _block_log(build_normal_form(b))
            else:
                s, g = closed_form_log(b)
            signs.append(s)
            gens.append(g)
        rep = ExpRepresentation(P, tuple(signs), tuple(gens))
        if M is not None:
            _certify_rep(rep, M)
        return rep

    M = np.asarray(M, float)
    n = M.shape[0] // 2
    J = standard_j(n)
    w = np.linalg.eigvals(M)
    # group eigenvalue orbits {lam, 1/lam, conj}
    keyed = []
    for lam in w:
        cands = [lam, 1 / lam, np.conj(lam), 1 / np.conj(lam)]
        keyed.append(min(cands, key=lambda z: (round(float(abs(z)), 6), round(float(np.angle(z)), 6))))
    keyed = np.array(keyed)
    groups = single_linkage(keyed, lambda a, b: split_tol * max(1.0, abs(a), abs(b)))
    # check separation of different orbits
    for i, gi in enumerate(groups):
        for gj in groups[i + 1:]:
            d = np.min(np.abs(keyed[gi][:, None] - keyed[gj][None, :]))
            if d < 10 * split_tol:
                raise UnsupportedError("spectrum is not well separated for splitting")
    Es, Fs, dims = [], [], []
    for g in groups:
        mask = np.zeros(len(w), bool)
        mask[g] = True
        W = real_invariant_basis(M, w[mask], w[~mask])
        if W is None:
            raise UnsupportedError("invariant subspace split failed")
        try:
            E, F = symplectic_gram_schmidt(W, J)
        except ValueError as exc:
            raise UnsupportedError(str(exc)) from exc
        Es.append(E)
        Fs.append(F)
        dims.append(E.shape[1])
    P = np.hstack(Es + Fs)
    Mc = np.linalg.solve(P, M @ P)
    signs, gens = [], []
    from .symplectic import diamond_indices
    for idx, h in zip(diamond_indices(dims), dims):
        Mb = Mc[np.ix_(idx, idx)]
        s, g = _block_log(Mb)
        signs.append(s)
        gens.append(g)
    rep = ExpRepresentation(P, tuple(signs), tuple(gens))
    _certify_rep(rep, M)
    return rep


def _certify_rep(rep, M):
    M = np.asarray(M, float)
    res = rep.residual(M)
    if res > 1e-8 * max(1.0, float(np.linalg.norm(M))):
        raise UnsupportedError(f"exponential representation residual {res:.2e} too large")
