"""Capped Hamiltonians built from a generating loop.

For primes k > l and the loop P^mu of ``build_pmu``:

    H^{k minus l} = (bar(P^mu) # H^{x(k-l)}) wedge H^{x l}
    H^{k odot l}  = eta_{S0}(1/2 <B_hat z, z>) wedge H^{x l}

where bar(P^mu) # Q^{x(k-l)} has the constant matrix B_hat and
S0 = 1/2 R0^2 max|eig B_hat| + 1 is the exact maximum of the cap
quadratic over the ball |z| <= R0, plus one.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import ParameterError
from .hamiltonians import (CappedQuadratic, Hamiltonian, PerturbedHamiltonian, Wedge,
                           ZeroHamiltonian, bar, iterate, sharp)
from .loops import PmuResult
from .profiles import Eta, Rho


@dataclass
class CappedPair:
    Hkminus: Hamiltonian = field(repr=False)
    Hkodot: Hamiltonian = field(repr=False)
    zero_wedge: Hamiltonian = field(repr=False)
    S0: float
    C_bound: float
    h_sup: float
    R0: float
    k: int
    l: int
    B_hat: np.ndarray = field(repr=False)
    rho: Rho = field(repr=False)
    eta: Eta = field(repr=False)

    @property
    def cap_value_bound(self):
        """sup |eta(t) - t| + (k - l) |h|_inf, the gap between the glued pieces."""
        return self.S0 + 1.0 + (self.k - self.l) * self.h_sup


def cap_level(B_hat, R0):
    """Exact max over |z| <= R0 of |1/2 <B_hat z, z>| plus one."""
    w = np.linalg.eigvalsh(0.5 * (B_hat + B_hat.T))
    return 0.5 * R0 ** 2 * float(np.max(np.abs(w))) + 1.0


def build_capped(H: PerturbedHamiltonian, pmu: PmuResult, rho: Rho | None = None,
                 R0: float | None = None, h_sup: float | None = None) -> CappedPair:
    """Assemble H^{k minus l}, H^{k odot l} and 0 wedge H^{x l}.

    ``R0`` defaults to the support radius of the perturbation and ``h_sup``
    to its sup norm; pass them to reuse known values.
    """
    k, l = pmu.k, pmu.l
    if pmu.B_hat.shape != (2 * H.n, 2 * H.n):
        raise ParameterError("loop and Hamiltonian dimensions differ")
    rho = rho or Rho()
    R0 = float(H.h.support_radius if R0 is None else R0)
    if h_sup is None:
        h_sup = H.h.sup_norm("value") if not H.h.is_zero else 0.0
    B_hat = 0.5 * (pmu.B_hat + pmu.B_hat.T)
    S0 = cap_level(B_hat, R0)
    eta = Eta(S0)
    P = PerturbedHamiltonian(pmu.P)
    Hl = iterate(H, l)
    Hkminus = Wedge(sharp(bar(P), iterate(H, k - l)), Hl, rho)
    Hkodot = Wedge(CappedQuadratic(B_hat, eta), Hl, rho)
    zero = Wedge(ZeroHamiltonian(H.n), Hl, rho)
    C = S0 + 2.0 + (k - l) * h_sup
    return CappedPair(Hkminus, Hkodot, zero, S0, C, float(h_sup), R0, k, l, B_hat, rho, eta)


def sup_difference(pair: CappedPair, radius, grid=41, time_samples=65, scaled=False):
    """Grid sup over (t, z) of |H^{k odot l} - H^{k minus l}|.

    The grid covers the cube of half width ``radius`` (n = 1: a full
    grid; otherwise random points from a fixed generator) and
    ``time_samples`` times on [1/2, 1], the only half where the two
    Hamiltonians differ.  With ``scaled`` the difference is divided by the
    reparametrization factor 2 rho', giving the gap between the glued pieces.
    """
    n = pair.Hkodot.n
    d = 2 * n
    if d == 2:
        ax = np.linspace(-radius, radius, grid)
        Z = np.stack(np.meshgrid(ax, ax, indexing="ij"), -1).reshape(-1, 2)
    else:
        rng = np.random.Generator(np.random.Philox(12345))
        Z = rng.uniform(-radius, radius, size=(grid * grid, d))
    best = 0.0
    arg = None
    ts = np.linspace(0.5, 1.0, time_samples)[1:-1]
    for t in ts:
        a = pair.Hkodot.value(t, Z)
        b = pair.Hkminus.value(t, Z)
        diff = np.abs(a - b)
        if scaled:
            _, _, c = pair.Hkodot.piece(t)
            if c == 0.0:
                continue
            diff = diff / c
        i = int(np.argmax(diff))
        if diff[i] > best:
            best = float(diff[i])
            arg = (float(t), Z[i].copy())
    return best, arg
