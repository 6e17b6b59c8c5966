"""Generating loops of quadratic Hamiltonians.

``build_leQ_loop`` turns a form Q with phi^1_Q = +-e^{m} (blockwise) into a
loop P with P # Q equal to the normal form Q_hat (constant J0 m, or the
rotated form for the -e^{m} blocks).

``build_pmu`` constructs, for primes k > l, the unitary loop P^mu for which
bar(P^mu) # Q^{x(k-l)} is autonomous with matrix B_hat, and the capped path
t -> e^{-J0 B_hat t} phi^1_{Q^{x l}} avoids the eigenvalue 1.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

from ..errors import AdmissibilityError, UnsupportedError
from ..index.cz import admissible, cz_index, maslov_index, rotation_rate
from ..index.paths import SymplecticPath
from ..matrix_log import VGPair, build_vg, closed_form_log, exp_representation
from ..normal_forms import NormalFormBlock
from ..symplectic import diamond, diamond_indices, standard_j
from .forms import QuadraticForm


@dataclass(frozen=True)
class QBlock:
    """One diamond factor of a structured quadratic form.

    kind "exp": phi^1 = e^{X} (autonomous form J0 X);
    kind "neg": phi^1 = -e^{X} (rotated form);
    kind "vg":  phi^1 = e^{V + G} for a V + G pair (autonomous).
    """

    kind: str
    X: np.ndarray = field(repr=False)
    vg: VGPair | None = None

    @property
    def n(self):
        return self.X.shape[0] // 2

    def form(self):
        if self.kind == "neg":
            return QuadraticForm.rotated(self.X)
        return QuadraticForm.from_generator(self.X)


def _rotation_rate_2d(X, tol=1e-12):
    """c if the 2x2 generator X equals c J0 with 0 < |c| < pi, else None."""
    if X.shape != (2, 2):
        return None
    c = 0.5 * (X[1, 0] - X[0, 1])
    if np.linalg.norm(X - c * standard_j(1)) > tol * max(1.0, abs(c)):
        return None
    if c == 0.0 or abs(c) >= np.pi:
        return None
    return float(c)


class StructuredQuadratic:
    """Quadratic form given as a diamond product of QBlocks."""

    def __init__(self, blocks):
        self.blocks = tuple(blocks)
        self.half_dims = tuple(b.n for b in self.blocks)
        self.n = sum(self.half_dims)
        self.form = QuadraticForm.diamond_of(*[b.form() for b in self.blocks])

    @classmethod
    def from_normal_forms(cls, nf_blocks):
        out = []
        for nb in nf_blocks:
            sign, X = closed_form_log(nb)
            X = np.asarray(X, float)
            rot = _rotation_rate_2d(X) if sign > 0 else None
            if rot is not None:
                # a plane rotation is the t_j = 0 member of the V + G family
                pair = build_vg(0, rot, 1)
                out.append(QBlock("vg", pair.m, pair))
            else:
                out.append(QBlock("exp" if sign > 0 else "neg", X))
        return cls(out)

    @classmethod
    def vg(cls, t_j, theta, epsilon=1):
        pair = build_vg(t_j, theta, epsilon)
        return cls([QBlock("vg", pair.m, pair)])

    @property
    def monodromy(self):
        return self.form.monodromy


# ---------------------------------------------------------------- le:Q

@dataclass
class LeQLoop:
    P: QuadraticForm
    Q_hat: QuadraticForm
    signs: tuple
    conjugator: np.ndarray = field(repr=False)


def build_leQ_loop(Q: QuadraticForm, split_tol=1e-6) -> LeQLoop:
    """Loop P with phi^1_P = I and P # Q = Q_hat in closed form."""
    try:
        rep = exp_representation(Q.monodromy, split_tol=split_tol)
    except Exception as exc:
        raise UnsupportedError(f"monodromy has no signed exponential splitting: {exc}") from exc
    parts = []
    for s, X in zip(rep.signs, rep.generators):
        X = np.asarray(X, float)
        parts.append(QuadraticForm.from_generator(X) if s > 0 else QuadraticForm.rotated(X))
    Q_hat = QuadraticForm.diamond_of(*parts)
    C = rep.conjugator
    if np.linalg.norm(C - np.eye(C.shape[0])) > 0:
        Q_hat = Q_hat.conjugate(np.linalg.inv(C))
    P = Q_hat.sharp(Q.bar())
    return LeQLoop(P, Q_hat, tuple(rep.signs), C)


# ---------------------------------------------------------------- Qklit

def _floor_count(s, theta):
    return int(np.floor(s * abs(theta) / (2 * np.pi)))


def signed_frac(x):
    """{x} with x = sgn(x) floor|x| + {x}."""
    return x - np.sign(x) * np.floor(abs(x))


@dataclass
class BlockLoop:
    case: int
    mu: int                  # from the indices at infinity
    mu_loop: int             # Maslov index of the constructed loop
    theta_mu: float | None
    loop: QuadraticForm = field(repr=False)


@dataclass
class PmuResult:
    P: QuadraticForm = field(repr=False)
    mu: int
    mu_loop: int
    k: int
    l: int
    blocks: tuple
    B_hat: np.ndarray = field(repr=False)
    capped_form: QuadraticForm = field(repr=False)
    time_dependence: float
    loop_defect: float
    i_inf_k: int
    i_inf_l: int
    mean_inf: float

    @property
    def cases(self):
        return tuple(b.case for b in self.blocks)


def _infinity_index(block: QBlock, s, method="auto"):
    """CZ index of the block's linear flow on [0, s].

    For a "neg" block and odd s the path e^{pi J0 t} e^{X t} is homotopic
    with fixed nondegenerate endpoints (-e^{eps X s}, eps in [0, 1]) to the
    rotation e^{pi J0 t}, whose index is exact.  ``method="sampled"`` lifts
    rho along the flow instead, which only resolves moderate s |X|.
    """
    if block.kind == "neg":
        if s % 2 and method != "sampled":
            J = standard_j(block.n)
            return cz_index(SymplecticPath.exponential(np.pi * J, T=s), "exact")
        F = block.form()
        nrm = np.pi + np.linalg.norm(block.X, 2)
        K = int(np.ceil(8 * block.n * s * nrm / np.pi)) + 16
        path = SymplecticPath.from_function(lambda u: F.flow(s * u), K)
        return cz_index(path, "sampled")
    return cz_index(SymplecticPath.exponential(block.X, T=s), "exact")


def _classify_block(block: QBlock, tol=1e-9):
    w = np.linalg.eigvals(block.X)
    if block.kind == "vg":
        return 3 if block.vg.t_j % 2 else 4
    if block.kind == "exp":
        if np.all(np.abs(w.real) > tol):
            return 1
        raise UnsupportedError("autonomous block with spectrum on the imaginary axis "
                               "needs the V + G structure")
    if np.all(np.abs(w.imag) <= tol):
        return 2
    raise UnsupportedError("negative block generator must have real spectrum")


def _unit_loop(V):
    path = SymplecticPath.exponential(V)
    return maslov_index(path)


def build_pmu(SQ: StructuredQuadratic, k: int, l: int) -> PmuResult:
    """Loop P^mu for the prime pair k > l, blockwise over SQ."""
    k, l = int(k), int(l)
    if not k > l >= 1:
        raise ValueError("need k > l >= 1")
    M = SQ.monodromy
    for s in (l, k):
        if not admissible(M, s):
            raise AdmissibilityError(f"phi^1_Q is not admissible for the iterate {s}")
    out = []
    for b in SQ.blocks:
        case = _classify_block(b)
        n = b.n
        J = standard_j(n)
        ik = _infinity_index(b, k)
        il = _infinity_index(b, l)
        if (ik - il) % 2:
            raise UnsupportedError("indices at infinity of the iterates differ in parity")
        mu = (ik - il) // 2
        theta_mu = None
        if case == 1:
            loop = QuadraticForm.zero(n)
            mu_loop = 0
        elif case == 2:
            loop = QuadraticForm.constant(-(k - l) * np.pi * np.eye(2 * n))
            mu_loop = _unit_loop((k - l) * np.pi * J)
        else:
            th = b.vg.theta
            theta_mu = float(np.sign(th) * 2 * np.pi * (_floor_count(k, th) - _floor_count(l, th)))
            V_mu = (theta_mu / th) * np.asarray(b.vg.V)
            loop = QuadraticForm.from_generator(V_mu)
            mu_loop = _unit_loop(V_mu) if theta_mu != 0.0 else 0
        out.append(BlockLoop(case, mu, mu_loop, theta_mu, loop))
    P = QuadraticForm.diamond_of(*[b.loop for b in out])
    capped = P.bar().sharp(SQ.form.iterate(k - l))
    td = capped.time_dependence()
    B_hat = 0.5 * (capped.matrix(0.0) + capped.matrix(0.0).T)
    defect = float(np.linalg.norm(P.flow(1.0) - np.eye(2 * SQ.n)))
    ik = sum(_infinity_index(b, k) for b in SQ.blocks)
    il = sum(_infinity_index(b, l) for b in SQ.blocks)
    mean_inf = 0.0
    for b in SQ.blocks:
        if b.kind == "neg":
            # e^{pi J0 t} turns every plane by half a turn per unit time; the
            # real-spectrum factor e^{X t} only adds a bounded winding
            mean_inf += -float(b.n)
        else:
            mean_inf += -rotation_rate(b.X) / np.pi
    return PmuResult(P, sum(b.mu for b in out), sum(b.mu_loop for b in out), k, l,
                     tuple(out), B_hat, capped, td, defect, ik, il, mean_inf)


# ---------------------------------------------------------------- nondegeneracy of the capped path

@dataclass
class NondegReport:
    min_dist: float
    angle_error: float | None
    times: np.ndarray = field(repr=False)
    dists: np.ndarray = field(repr=False)
    ok: bool = True


def capped_path_matrices(SQ, pmu: PmuResult, ts):
    Ml = SQ.form.flow(float(pmu.l))
    X = -standard_j(SQ.n) @ pmu.B_hat
    return np.array([sla.expm(t * X) @ Ml for t in ts])


def _cluster_angle_error(sub, phi):
    """Distance of the spectrum of sub from {e^{+-i phi}} via power sums.

    The first two normalized traces pin every unit eigenvalue to +-phi and,
    unlike the eigenvalues of a split Jordan block, are well conditioned.
    """
    d = sub.shape[0]
    t1 = np.trace(sub) / d
    t2 = np.trace(sub @ sub) / d
    return float(max(abs(t1 - np.cos(phi)), abs(t2 - np.cos(2 * phi))))


def check_nondeg_path(SQ, pmu: PmuResult, samples=401, tol=1e-3) -> NondegReport:
    """min over t of the distance of the capped path spectrum from 1."""
    ts = np.linspace(0.0, 1.0, samples)
    mats = capped_path_matrices(SQ, pmu, ts)
    w = np.linalg.eigvals(mats)
    dists = np.min(np.abs(w - 1.0), axis=1)
    angle_err = None
    idx = diamond_indices(SQ.half_dims)
    for b, info, ix in zip(SQ.blocks, pmu.blocks, idx):
        if info.case not in (3, 4):
            continue
        th = b.vg.theta
        k, l = pmu.k, pmu.l
        df = signed_frac(k * th / (2 * np.pi)) - signed_frac(l * th / (2 * np.pi))
        sub = mats[:, ix][:, :, ix]
        errs = [_cluster_angle_error(sub[i], l * th + 2 * np.pi * t * df) for i, t in enumerate(ts)]
        e = float(np.max(errs))
        angle_err = e if angle_err is None else max(angle_err, e)
    m = float(np.min(dists))
    return NondegReport(m, angle_err, ts, dists, bool(m >= tol))
