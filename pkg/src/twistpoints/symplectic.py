"""Symplectic linear algebra: standard structure, the diamond product,
certification, eigenvalue classification, random test matrices."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

from .errors import AmbiguityError, DimensionError
from .spectral import krein_clusters, single_linkage


def standard_j(n: int) -> np.ndarray:
    """The 2n x 2n matrix [[0, -I], [I, 0]]."""
    if n < 1:
        raise DimensionError("n must be positive")
    z = np.zeros((n, n))
    e = np.eye(n)
    return np.block([[z, -e], [e, z]])


def _half_dim(M):
    M = np.asarray(M)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise DimensionError(f"expected a square matrix, got shape {M.shape}")
    if M.shape[0] % 2:
        raise DimensionError(f"odd dimension {M.shape[0]}")
    return M.shape[0] // 2


def symplectic_residual(M) -> float:
    """Frobenius norm of M^T J M - J."""
    n = _half_dim(M)
    J = standard_j(n)
    M = np.asarray(M, float)
    return float(np.linalg.norm(M.T @ J @ M - J))


def is_symplectic(M, tol: float = 1e-10) -> bool:
    """True iff ||M^T J M - J||_F <= tol * max(1, ||M||_F^2)."""
    M = np.asarray(M, float)
    scale = max(1.0, float(np.linalg.norm(M)) ** 2)
    return symplectic_residual(M) <= tol * scale


def infinitesimal_residual(X) -> float:
    """Frobenius norm of J X + X^T J."""
    n = _half_dim(X)
    J = standard_j(n)
    X = np.asarray(X, float)
    return float(np.linalg.norm(J @ X + X.T @ J))


def is_infinitesimally_symplectic(X, tol: float = 1e-8) -> bool:
    X = np.asarray(X, float)
    return infinitesimal_residual(X) <= tol * max(1.0, float(np.linalg.norm(X)))


@dataclass(frozen=True)
class SymplecticMatrix:
    """A real 2n x 2n matrix certified symplectic to ``certified_tol``."""

    matrix: np.ndarray = field(repr=False)
    certified_tol: float = 1e-10

    def __post_init__(self):
        M = np.array(self.matrix, float)
        M.setflags(write=False)
        object.__setattr__(self, "matrix", M)
        if not np.all(np.isfinite(M)):
            raise DimensionError("non-finite entries")
        if not is_symplectic(M, self.certified_tol):
            raise DimensionError(
                f"matrix is not symplectic at tol {self.certified_tol:g} "
                f"(residual {symplectic_residual(M):.3e})")

    @property
    def n(self) -> int:
        return self.matrix.shape[0] // 2

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.matrix, dtype=dtype)


def certify(M, tol: float = 1e-10) -> SymplecticMatrix:
    return M if isinstance(M, SymplecticMatrix) else SymplecticMatrix(np.asarray(M, float), tol)


def quadrants(M):
    """Split a 2n x 2n matrix into its four n x n blocks."""
    n = _half_dim(M)
    M = np.asarray(M)
    return M[:n, :n], M[:n, n:], M[n:, :n], M[n:, n:]


def diamond(*mats) -> np.ndarray:
    """Diamond product: interleave the (q, p) blocks of each factor.

    For M_k = [[A_k, B_k], [C_k, D_k]] the product is
    [[diag(A), diag(B)], [diag(C), diag(D)]].  Works for any even-square
    matrices (also symmetric forms and generators, not only symplectic ones).
    """
    if not mats:
        raise DimensionError("diamond of nothing")
    parts = [quadrants(np.asarray(m, float)) for m in mats]
    A = sla.block_diag(*[p[0] for p in parts])
    B = sla.block_diag(*[p[1] for p in parts])
    C = sla.block_diag(*[p[2] for p in parts])
    D = sla.block_diag(*[p[3] for p in parts])
    return np.block([[A, B], [C, D]])


def diamond_indices(half_dims):
    """Coordinate index arrays of each factor inside a diamond product."""
    n = int(sum(half_dims))
    out = []
    off = 0
    for h in half_dims:
        q = np.arange(off, off + h)
        out.append(np.concatenate([q, q + n]))
        off += h
    return out


def rotation(theta: float) -> np.ndarray:
    c, s = np.cos(theta), np.sin(theta)
    return np.array([[c, -s], [s, c]])


# ---------------------------------------------------------------- classification

@dataclass(frozen=True)
class EigenClass:
    """One symplectic eigenvalue orbit type with its multiplicity.

    ``multiplicity`` counts orbits: one pair {lam, 1/lam}, one conjugate
    unit pair, or one quadruple.  For One/MinusOne it counts pairs of the
    (even) algebraic multiplicity.  ``eigenvalue_count`` gives the number of
    eigenvalues covered, and these sum to 2n.
    """

    tag: str
    multiplicity: int
    theta: float | None = None
    lam: float | None = None
    rho: float | None = None

    @property
    def eigenvalue_count(self) -> int:
        return (4 if self.tag == "ComplexQuadruple" else 2) * self.multiplicity

    def key(self):
        return (self.tag, self.theta, self.lam, self.rho)

    def __str__(self):
        if self.tag == "UnitNonReal":
            arg = f"({self.theta:.12g})"
        elif self.tag in ("PositiveReal", "NegativeReal"):
            arg = f"({self.lam:.12g})"
        elif self.tag == "ComplexQuadruple":
            arg = f"({self.rho:.12g}, {self.theta:.12g})"
        else:
            arg = ""
        return f"{self.tag}{arg}x{self.multiplicity}"


_GUARD = 100.0


def _decide(value, tol, what, lam):
    """Three-way decision: True below tol, False above guard*tol, else error."""
    if value <= tol:
        return True
    if value >= _GUARD * tol:
        return False
    raise AmbiguityError(f"eigenvalue {lam!r} is ambiguous for the test '{what}' "
                         f"(distance {value:.3e}, tol {tol:g})", lam)


def classify_eigenvalues(M, tol: float = 1e-8, split_tol: float = 1e-6):
    """Partition the spectrum of a symplectic matrix into EigenClass entries.

    Unit eigenvalues off the real axis are reported by the angle of their
    first-kind member (positive Krein sign), so R(t) and R(-t) differ.
    Values within a factor 100 of a class boundary raise AmbiguityError.
    Eigenvalues closer than ``split_tol`` (relative) are treated as one group.
    """
    M = np.asarray(certify(M, max(tol, 1e-10)).matrix)
    clusters = krein_clusters(M, tight=split_tol)
    counts = {}

    def add(key, tag, mult, **kw):
        cur = counts.get(key)
        if cur is None:
            counts[key] = [tag, mult, kw]
        else:
            cur[1] += mult

    raw = []
    for c in clusters:
        z = c.center
        on_circle = _decide(abs(abs(z) - 1.0), tol, "|lambda| = 1", z)
        real = _decide(abs(z.imag), tol * max(1.0, abs(z)), "Im lambda = 0", z)
        raw.append((c, z, on_circle, real))

    for c, z, on_circle, real in raw:
        if real and on_circle:
            tag = "One" if z.real > 0 else "MinusOne"
            add((tag,), tag, c.size)   # halved below
        elif real:
            if abs(z) > 1:
                tag = "PositiveReal" if z.real > 0 else "NegativeReal"
                add((tag, round(abs(z.real), 10) * np.sign(z.real)), tag, c.size,
                    lam=float(z.real))
        elif on_circle:
            if z.imag > 0:
                if c.m_plus:
                    th = float(np.angle(z))
                    add(("UnitNonReal", round(th, 10)), "UnitNonReal", c.m_plus, theta=th)
                if c.m_minus:
                    th = -float(np.angle(z))
                    add(("UnitNonReal", round(th, 10)), "UnitNonReal", c.m_minus, theta=th)
        else:
            if abs(z) > 1 and z.imag > 0:
                th = float(np.angle(z))
                add(("ComplexQuadruple", round(abs(z), 10), round(th, 10)),
                    "ComplexQuadruple", c.size, rho=float(abs(z)), theta=th)

    out = []
    for key, (tag, mult, kw) in counts.items():
        if tag in ("One", "MinusOne"):
            if mult % 2:
                raise AmbiguityError(f"odd multiplicity of eigenvalue {tag}", mult)
            mult //= 2
        out.append(EigenClass(tag, int(mult), **kw))
    total = sum(e.eigenvalue_count for e in out)
    if total != M.shape[0]:
        raise AmbiguityError(
            f"classification covers {total} of {M.shape[0]} eigenvalues; "
            "spectrum is not numerically symplectic-symmetric at this tolerance", total)
    order = {"One": 0, "MinusOne": 1, "UnitNonReal": 2, "PositiveReal": 3,
             "NegativeReal": 4, "ComplexQuadruple": 5}
    out.sort(key=lambda e: (order[e.tag], e.theta or 0.0, e.lam or 0.0, e.rho or 0.0))
    return out


def eigenvalue_symmetry_defect(M, tol: float = 1e-8) -> float:
    """max over eigenvalues lam (|lam-1|>tol) of min_mu |lam*mu - 1| / (1+|lam|^2)."""
    w = np.linalg.eigvals(np.asarray(M, float))
    worst = 0.0
    for lam in w:
        if abs(lam - 1) <= tol:
            continue
        worst = max(worst, float(np.min(np.abs(lam * w - 1))) / (1 + abs(lam) ** 2))
    return worst


# ---------------------------------------------------------------- random inputs

def random_symplectic_conjugator(n, rng, budget=10.0):
    """exp(J S) for a random symmetric S scaled so cond(P) stays near ``budget``."""
    J = standard_j(n)
    A = rng.standard_normal((2 * n, 2 * n))
    S = 0.5 * (A + A.T)
    X = J @ S
    nrm = np.linalg.norm(X, 2)
    target = 0.5 * np.log(max(budget, 1.0 + 1e-12))
    if nrm > 0:
        X *= target / nrm
    return sla.expm(X)


def random_symplectic(n, seed=0, budget=10.0, allow_negative=False,
                      return_blocks=False):
    """Random certified symplectic matrix: random normal forms, diamond, conjugate.

    Parameters
    ----------
    n : int
        Half dimension.
    seed : int or numpy Generator
        Seed for a deterministic draw.
    budget : float
        Rough bound for the condition number of the conjugator.
    allow_negative : bool
        Whether families with negative real spectrum may be drawn.
    return_blocks : bool
        Also return the list of NormalFormBlock factors and the conjugator.
    """
    from .normal_forms import NormalFormBlock, build_normal_form

    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    blocks = []
    left = n
    while left > 0:
        choices = ["R", "M", "N1"]
        if left >= 2:
            choices += ["Quad", "M2"]
        if allow_negative:
            choices += ["M-", "N1-"]
        kind = choices[rng.integers(len(choices))]
        if kind == "R":
            th = rng.uniform(0.2, np.pi - 0.2) * rng.choice([-1, 1])
            blk = NormalFormBlock.rtheta(th)
        elif kind == "M":
            blk = NormalFormBlock.mm(float(rng.uniform(1.3, 3.0)), 1)
        elif kind == "M2":
            blk = NormalFormBlock.mm(float(rng.uniform(1.3, 3.0)), 2)
        elif kind == "N1":
            blk = NormalFormBlock.n1(1.0, float(rng.choice([-1.0, 0.0, 1.0])))
        elif kind == "Quad":
            blk = NormalFormBlock.quad(float(rng.uniform(1.3, 2.5)),
                                       float(rng.uniform(0.3, np.pi - 0.3)), 1)
        elif kind == "M-":
            blk = NormalFormBlock.mm(-float(rng.uniform(1.3, 3.0)), 1)
        else:
            blk = NormalFormBlock.n1(-1.0, float(rng.choice([-1.0, 0.0, 1.0])))
        blocks.append(blk)
        left -= blk.half_dim
    M0 = diamond(*[build_normal_form(b) for b in blocks])
    P = random_symplectic_conjugator(n, rng, budget)
    M = np.linalg.solve(P, M0 @ P)
    S = SymplecticMatrix(M, 1e-9)
    if return_blocks:
        return S, blocks, P
    return S
