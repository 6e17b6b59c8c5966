"""Spectral helpers for real symplectic matrices.

Eigenvalues are grouped into clusters, each cluster gets an orthonormal
basis of its invariant subspace and the signature of the Krein form
``h(v) = -i v^H J v`` restricted to it.  This is what the rotation
function, the eigenvalue classifier and the block splitting of
``exp_representation`` are built on.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla


def _standard_j(n):
    z = np.zeros((n, n))
    e = np.eye(n)
    return np.block([[z, -e], [e, z]])


@dataclass(frozen=True)
class Cluster:
    """A group of numerically close eigenvalues and its invariant subspace."""

    eigenvalues: np.ndarray
    basis: np.ndarray          # orthonormal complex basis, shape (2n, size)
    m_plus: int
    m_minus: int
    krein_eigs: np.ndarray

    @property
    def size(self):
        return len(self.eigenvalues)

    @property
    def center(self):
        return complex(np.mean(self.eigenvalues))

    @property
    def signature(self):
        return self.m_plus - self.m_minus


def single_linkage(values, tol):
    """Group complex numbers whose chained pairwise distance is below tol.

    ``tol`` may be a scalar or a callable of the pair (a, b).
    """
    values = np.asarray(values)
    k = len(values)
    parent = list(range(k))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(k):
        for j in range(i + 1, k):
            t = tol(values[i], values[j]) if callable(tol) else tol
            if abs(values[i] - values[j]) <= t:
                ri, rj = find(i), find(j)
                if ri != rj:
                    parent[rj] = ri
    groups = {}
    for i in range(k):
        groups.setdefault(find(i), []).append(i)
    return [np.array(g) for g in groups.values()]


def schur_subspace(M, targets, others):
    """Orthonormal basis of the invariant subspace for ``targets``.

    Uses a reordered complex Schur form; every Schur eigenvalue is assigned
    to whichever of ``targets``/``others`` contains its nearest point.
    """
    targets = np.asarray(targets, complex)
    others = np.asarray(others, complex)

    def select(x):
        dt = np.min(np.abs(targets - x))
        do = np.min(np.abs(others - x)) if others.size else np.inf
        return dt <= do

    _, Z, sdim = sla.schur(np.asarray(M, complex), output="complex", sort=select)
    if sdim != len(targets):
        return None
    return Z[:, :sdim]


def _krein_form(basis, J):
    H = -1j * (basis.conj().T @ J @ basis)
    return 0.5 * (H + H.conj().T)


def krein_clusters(M, tight=1e-9, loose=1e-3, zero_tol=1e-9, definite_tol=1e-5,
                   generator=False, widest=0.05):
    """Cluster the spectrum of a real symplectic matrix with Krein data.

    Tight clusters are formed first; any whose Krein form has eigenvalues
    below ``definite_tol`` in absolute value (the mark of a numerically
    split Jordan block or near collision) is merged with its
    neighbours within ``loose`` and recomputed on a Schur subspace; the
    radius grows by 4x per round up to ``widest``.
    Isotropic clusters only count as weak near the unit circle (near the
    imaginary axis when ``generator`` is set, for infinitesimally
    symplectic M), since off it the Krein form vanishes anyway.
    """
    M = np.asarray(M, float)
    n = M.shape[0] // 2
    J = _standard_j(n)
    w, V = np.linalg.eig(M)
    scale = lambda a, b: tight * max(1.0, abs(a), abs(b))
    groups = single_linkage(w, scale)

    def analyse(idx, force_schur=False):
        vals = w[idx]
        basis = None
        if not force_schur:
            B = V[:, idx]
            s = np.linalg.svd(B, compute_uv=False)
            if s[-1] > 1e-6 * s[0]:
                basis, _ = np.linalg.qr(B)
        if basis is None:
            mask = np.zeros(len(w), bool)
            mask[idx] = True
            basis = schur_subspace(M, w[mask], w[~mask])
            if basis is None:
                B = V[:, idx]
                basis, _ = np.linalg.qr(B)
        heig = np.linalg.eigvalsh(_krein_form(basis, J))
        return vals, basis, heig

    def near_unit(z, radius):
        if generator:
            return abs(z.real) <= radius * max(1.0, abs(z))
        return abs(abs(z) - 1.0) <= radius

    def grey(vals, heig, radius):
        a = np.abs(heig)
        if np.any((a > zero_tol) & (a < definite_tol)):
            return True
        # an eigenvector of a split Jordan block on the circle is isotropic
        return bool(np.any(a <= zero_tol)) and near_unit(np.mean(vals), radius)

    info = [analyse(g) for g in groups]
    radius = loose
    # a Jordan block of size m splits by about eps^(1/m), so widen the
    # merge radius until no weak cluster is left or ``widest`` is reached
    while radius <= widest:
        weak = [grey(v, h, radius) for (v, _, h) in info]
        if not any(weak):
            break
        k = len(groups)
        parent = list(range(k))

        def find(i):
            while parent[i] != i:
                parent[i] = parent[parent[i]]
                i = parent[i]
            return i

        for i in range(k):
            if not weak[i]:
                continue
            c = abs(np.mean(w[groups[i]]))
            for j in range(k):
                if i == j:
                    continue
                d = np.min(np.abs(w[groups[i]][:, None] - w[groups[j]][None, :]))
                if d <= radius * max(1.0, c):
                    parent[find(j)] = find(i)
        merged = {}
        for i in range(k):
            merged.setdefault(find(i), []).append(i)
        new_groups = []
        new_info = []
        for members in merged.values():
            idx = np.concatenate([groups[i] for i in members])
            new_groups.append(idx)
            if len(members) == 1:
                new_info.append(info[members[0]])
            else:
                new_info.append(analyse(idx, force_schur=True))
        groups, info = new_groups, new_info
        radius *= 4.0

    clusters = []
    for vals, basis, heig in info:
        top = max(1.0, float(np.max(np.abs(heig)))) if heig.size else 1.0
        thr = zero_tol * top
        mp = int(np.sum(heig > thr))
        mm = int(np.sum(heig < -thr))
        clusters.append(Cluster(vals, basis, mp, mm, heig))
    return clusters


def _is_real_cluster(c, real_tol):
    z = c.center
    if abs(z.imag) <= real_tol * max(1.0, abs(z)):
        return True
    # conjugation-closed clusters have a real center up to rounding
    vals = c.eigenvalues
    return bool(np.all(np.min(np.abs(vals[:, None] - vals.conj()[None, :]), axis=1)
                       <= 1e-9 * max(1.0, abs(z))))


def rotation_data(M, real_tol=1e-7, **kw):
    """Return (negative-real count, [(angle, signature)] for upper clusters)."""
    clusters = krein_clusters(M, **kw)
    neg = 0
    upper = []
    for c in clusters:
        if _is_real_cluster(c, real_tol):
            if c.center.real < 0:
                neg += c.size
            continue
        if c.center.imag > 0 and c.signature != 0:
            upper.append((float(np.angle(c.center)), c.signature))
    return neg, upper


def rotation_function(M, **kw):
    """Unit complex number rho(M) used to lift the rotation of a path.

    ``rho = (-1)^(m0/2) * prod lambda^{m+(lambda)}`` over unit eigenvalues off
    the real axis, where m0 counts negative real eigenvalues and m+ is the
    positive Krein index.  Continuous on Sp(2n), equal to det_C on U(n).
    """
    neg, upper = rotation_data(M, **kw)
    if neg % 2:
        from .errors import AmbiguityError
        raise AmbiguityError("odd number of negative real eigenvalues", neg)
    phase = sum(phi * s for phi, s in upper)
    return (-1.0) ** (neg // 2) * np.exp(1j * phase)


def first_kind_angles(M, **kw):
    """Counter-clockwise angles in (0, 2pi) of the net first-kind unit eigenvalues.

    An upper cluster at angle phi with signature s contributes s copies of phi
    when s > 0 and |s| copies of 2pi - phi when s < 0.
    """
    _, upper = rotation_data(M, **kw)
    out = []
    for phi, s in upper:
        ang = phi if s > 0 else 2 * np.pi - phi
        out.extend([ang] * abs(s))
    return sorted(out)


def real_invariant_basis(M, targets, others):
    """Real orthonormal basis of the invariant subspace of a conjugation-closed set."""
    Z = schur_subspace(M, targets, others)
    if Z is None:
        return None
    k = Z.shape[1]
    R = np.hstack([Z.real, Z.imag])
    U, s, _ = np.linalg.svd(R, full_matrices=False)
    if k < len(s) and s[k] > 1e-8 * s[0]:
        return None
    return U[:, :k]


def symplectic_gram_schmidt(W, J):
    """Turn a basis of a symplectic subspace into a canonical one.

    Returns (E, F) with columns e_i, f_i satisfying e_i^T J f_j = -delta_ij
    and e^T J e = f^T J f = 0 (the relations of the standard basis).
    Raises ValueError when the subspace is not symplectic.
    """
    W = np.array(W, float)
    es, fs = [], []
    while W.shape[1] > 0:
        G = W.T @ J @ W
        i, j = np.unravel_index(np.argmax(np.abs(G)), G.shape)
        g = G[i, j]
        if abs(g) < 1e-10:
            raise ValueError("subspace is not symplectic")
        e = W[:, i]
        f = -W[:, j] / g
        es.append(e)
        fs.append(f)
        keep = [c for c in range(W.shape[1]) if c not in (i, j)]
        rest = W[:, keep]
        if rest.size:
            a = -(f @ J @ rest)
            b = e @ J @ rest
            rest = rest + np.outer(e, a) + np.outer(f, b)
        W = rest
    return np.column_stack(es), np.column_stack(fs)
