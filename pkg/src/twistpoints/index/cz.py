"""Conley-Zehnder, mean and Maslov indices of symplectic paths.

Sign convention: indices count half-turns clockwise, so e^{tJ0S} with S
symmetric, invertible and small has index Ind(S) - n, and the loop
e^{2 pi J0 t} on R^2 has Maslov index -1.

The CZ index of a sampled path is computed from the continuous lift of
the rotation function rho(M(t)) (see ``spectral.rotation_function``),
which only depends on eigenvalues and Krein signatures, so the endpoint
correction can be read off the monodromy.  Loops use the winding of the
complex determinant of the unitary polar factor.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import DegeneracyError, LoopError, ResolutionError
from ..spectral import first_kind_angles, krein_clusters, rotation_function
from .paths import SymplecticPath, iterate_path

DEGENERACY_TOL = 1e-8
MAX_INCREMENT = np.pi / 2
MAX_BISECTIONS = 48


@dataclass(frozen=True)
class IndexReport:
    """Index data of a path; ``unit_angles`` are clockwise angles in (0, 2pi) minus pi."""

    cz: int | None
    mean: float
    nondegenerate: bool
    unit_angles: tuple
    r: int
    mean_error: float = 0.0
    s_used: int | None = None

    def as_dict(self):
        return {"cz": self.cz, "mean": self.mean, "nondegenerate": self.nondegenerate,
                "unit_angles": list(self.unit_angles), "r": self.r,
                "mean_error": self.mean_error, "s_used": self.s_used}


@dataclass(frozen=True)
class MeanIndex:
    value: float
    error: float
    s_used: int | None
    exact: bool


def _lift(phases, what="rotation"):
    """Continuous lift of the argument of unit complex samples, starting at 0."""
    d = np.angle(phases[1:] / phases[:-1])
    big = np.abs(d) >= MAX_INCREMENT
    if np.any(big):
        i = int(np.argmax(big))
        raise ResolutionError(
            f"{what} increment {abs(d[i]):.3f} rad between samples {i} and {i + 1} "
            f"exceeds pi/2; refine the path")
    return float(np.sum(d)) + float(np.angle(phases[0]))


def _bisect_lift(f, t0, t1, p0, p1, depth):
    """Increment of arg rho(f(t)) over [t0, t1], bisecting until steps are small."""
    d = float(np.angle(p1 / p0))
    if abs(d) < MAX_INCREMENT:
        return d
    if depth >= MAX_BISECTIONS:
        raise ResolutionError(f"rotation increment near t = {t0:.6g} does not resolve "
                              f"after {MAX_BISECTIONS} bisections")
    tm = 0.5 * (t0 + t1)
    pm = rotation_function(f(tm))
    return _bisect_lift(f, t0, tm, p0, pm, depth + 1) + _bisect_lift(f, tm, t1, pm, p1, depth + 1)


def _sampled_rotation(path):
    phases = np.array([rotation_function(M) for M in path.mats])
    if path.generator is None or path.generator[0] != "fn":
        return _lift(phases)
    f = path.generator[1]
    t = path.times
    total = sum(_bisect_lift(f, t[i], t[i + 1], phases[i], phases[i + 1], 0)
                for i in range(len(t) - 1))
    return total + float(np.angle(phases[0]))


def is_degenerate(M, tol=DEGENERACY_TOL):
    w = np.linalg.eigvals(np.asarray(M, float))
    return bool(np.min(np.abs(w - 1.0)) <= tol)


def clockwise_unit_angles(M):
    """Clockwise angles of the net first-kind unit eigenvalues, excluding +-1."""
    return tuple(sorted(2 * np.pi - a for a in first_kind_angles(M)))


def _axis_clusters(X, axis_tol):
    """(omega, signature) for the clusters of X at i*omega, omega > 0."""
    X = np.asarray(X, float)
    # cluster the normalized generator so tolerances do not depend on scale
    scale = float(np.linalg.norm(X, 2)) or 1.0
    out = []
    for c in krein_clusters(X / scale, generator=True):
        z = c.center
        if abs(z.real) <= axis_tol and z.imag > axis_tol:
            out.append((float(z.imag) * scale, c.signature))
    return out


def rotation_rate(X, axis_tol=1e-7):
    """Exact slope of arg rho(e^{tX}) in t.

    Sum of omega * (m+ - m-) over the clusters of X at i*omega, omega > 0.
    """
    return float(sum(w * sig for w, sig in _axis_clusters(X, axis_tol)))


def exp_unit_angles(X, axis_tol=1e-7, tol=1e-9):
    """Clockwise first-kind unit angles of e^X read off the clusters of X.

    Avoids eigen-decomposing e^X, whose Jordan blocks split badly once the
    nilpotent part has grown.
    """
    out = []
    for w, sig in _axis_clusters(X, axis_tol):
        if sig == 0:
            continue
        phi = float(np.mod(w, 2 * np.pi))
        if min(phi, 2 * np.pi - phi) <= tol or abs(phi - np.pi) <= tol:
            continue
        ccw = phi if sig > 0 else 2 * np.pi - phi
        out.extend([2 * np.pi - ccw] * abs(sig))
    return tuple(sorted(out))


def _cz_from_rotation(alpha, M1, angles=None):
    if angles is None:
        angles = clockwise_unit_angles(M1)
    value = (-alpha + sum(np.pi - a for a in angles)) / np.pi
    k = int(round(value))
    if abs(value - k) > 1e-6:
        raise ResolutionError(f"index estimate {value:.8f} is not an integer")
    return k, angles


def cz_index(path: SymplecticPath, method: str = "auto") -> int:
    """Conley-Zehnder index of a path with nondegenerate endpoint.

    ``method`` is "sampled" (lift rho along the samples), "exact" (closed
    form for exponential generators) or "auto" (exact when available).
    """
    return _cz_and_angles(path, method)[0]


def _cz_and_angles(path, method):
    M1 = path.monodromy
    if is_degenerate(M1):
        raise DegeneracyError("1 is an eigenvalue of the endpoint")
    exp_gen = path.generator is not None and path.generator[0] == "exp"
    if method == "exact" or (method == "auto" and exp_gen):
        if not exp_gen:
            raise ValueError("exact method needs an exponential generator")
        X = path.generator[1]
        return _cz_from_rotation(rotation_rate(X), M1, exp_unit_angles(X))
    elif method in ("sampled", "auto"):
        alpha = _sampled_rotation(path)
    else:
        raise ValueError(f"unknown method {method!r}")
    return _cz_from_rotation(alpha, M1)


def mean_index(path: SymplecticPath, s_max: int = 64) -> MeanIndex:
    """Mean index: exact for exponential generators, else i(s)/s with error n/s."""
    if path.generator is not None and path.generator[0] == "exp":
        return MeanIndex(-rotation_rate(path.generator[1]) / np.pi, 0.0, None, True)
    M1 = path.monodromy
    n = path.n
    cap = min(s_max, _conditioned_iterates(M1))
    while True:
        s = _nearest_admissible(M1, cap)
        try:
            return MeanIndex(cz_index(iterate_path(path, s), "sampled") / s, n / s, s, False)
        except ResolutionError:
            # the iterate turns faster than the samples resolve; trade accuracy for resolution
            if s <= 1:
                raise
            cap = max(1, s // 2)


def _conditioned_iterates(M1, cond_max=1e8):
    """Largest s with cond(M1^s) <= |M1|^(2s) <= cond_max."""
    g = np.log(max(float(np.linalg.norm(M1, 2)), 1.0))
    if g <= 0.0:
        return 1 << 30
    return max(1, int(np.log(cond_max) / (2.0 * g)))


def _nearest_admissible(M1, s_max):
    if is_degenerate(M1):
        raise DegeneracyError("1 is an eigenvalue of the endpoint")
    for d in range(s_max):
        for s in (s_max - d, s_max + d):
            if s >= 1 and admissible(M1, s):
                return s
    raise DegeneracyError("no admissible iterate near s_max")


def index_report(path: SymplecticPath, s_max: int = 64, method: str = "auto") -> IndexReport:
    """CZ index, mean index and unit-circle data of a path."""
    M1 = path.monodromy
    mi = mean_index(path, s_max)
    if is_degenerate(M1):
        return IndexReport(None, mi.value, False, clockwise_unit_angles(M1),
                           len(clockwise_unit_angles(M1)), mi.error, mi.s_used)
    cz, angles = _cz_and_angles(path, method)
    return IndexReport(cz, mi.value, True, angles, len(angles), mi.error, mi.s_used)


def mean_from_cz(cz, angles):
    """Mean index predicted from cz and the clockwise unit angles."""
    return cz - len(angles) + sum(angles) / np.pi


def complex_det_of_unitary_part(mats):
    """det_C of the unitary polar factor, batched over a stack of matrices."""
    mats = np.asarray(mats, float)
    n = mats.shape[-1] // 2
    W, _, Vt = np.linalg.svd(mats)
    U = W @ Vt
    X = U[..., :n, :n]
    Y = U[..., n:, :n]
    return np.linalg.det(X + 1j * Y)


def maslov_index(loop: SymplecticPath, tol: float = 1e-10) -> int:
    """Maslov index of a loop of symplectic matrices (clockwise convention)."""
    M1 = loop.monodromy
    gap = float(np.linalg.norm(M1 - np.eye(M1.shape[0])))
    if gap > tol:
        raise LoopError(f"path is not a loop: |M(1) - I| = {gap:.2e}")
    d = complex_det_of_unitary_part(loop.mats)
    d = d / np.abs(d)
    wind = _lift(d, "determinant") / (2 * np.pi)
    k = int(round(wind))
    if abs(wind - k) > 1e-6:
        raise ResolutionError(f"winding {wind:.8f} is not an integer")
    return -k


def admissible(M, k: int, tol: float = DEGENERACY_TOL) -> bool:
    """True iff no eigenvalue lambda != 1 of M has lambda^k = 1."""
    w = np.linalg.eigvals(np.asarray(M, float))
    w = w[np.abs(w - 1.0) > tol]
    return not bool(np.any(np.abs(w ** int(k) - 1.0) <= tol))
