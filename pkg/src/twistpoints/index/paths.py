"""Sampled symplectic paths starting at the identity."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

from ..errors import DimensionError


def _auto_samples(X, scale=1.0):
    n = X.shape[0] // 2
    nrm = float(np.linalg.norm(X, 2)) * abs(scale)
    return int(np.ceil(8.0 * n * nrm / np.pi)) + 16


@dataclass(frozen=True)
class SymplecticPath:
    """Path t -> M(t), t in [0, 1], stored as samples with M(0) = I.

    ``generator`` records closed-form kinds: ``("exp", X)`` for e^{tX}, or
    ``("fn", f)`` when M(t) = f(t) can be evaluated between the samples.
    """

    times: np.ndarray = field(repr=False)
    mats: np.ndarray = field(repr=False)
    generator: tuple | None = field(default=None, repr=False)

    def __post_init__(self):
        t = np.array(self.times, float)
        M = np.array(self.mats, float)
        if M.ndim != 3 or M.shape[1] != M.shape[2] or M.shape[1] % 2:
            raise DimensionError("samples must be an array of even square matrices")
        if len(t) != len(M) or len(t) < 2:
            raise DimensionError("need at least two samples with matching times")
        if t[0] != 0.0 or abs(t[-1] - 1.0) > 1e-12 or np.any(np.diff(t) <= 0):
            raise DimensionError("times must increase from 0 to 1")
        M[0] = np.eye(M.shape[1])
        t.setflags(write=False)
        M.setflags(write=False)
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "mats", M)

    @property
    def n(self):
        return self.mats.shape[1] // 2

    @property
    def monodromy(self):
        return self.mats[-1]

    def __len__(self):
        return len(self.times)

    # -- constructors
    @classmethod
    def exponential(cls, X, samples=None, T=1.0):
        """e^{s T X} for s in [0, 1]; the endpoint is computed directly."""
        X = np.asarray(X, float)
        K = samples or _auto_samples(X, T)
        t = np.linspace(0.0, 1.0, K + 1)
        step = sla.expm((T / K) * X)
        mats = np.empty((K + 1,) + X.shape)
        mats[0] = np.eye(X.shape[0])
        for i in range(K):
            mats[i + 1] = mats[i] @ step
        mats[-1] = sla.expm(T * X)
        return cls(t, mats, ("exp", T * X))

    @classmethod
    def from_function(cls, f, samples):
        t = np.linspace(0.0, 1.0, samples + 1)
        return cls(t, np.array([f(s) for s in t]), ("fn", f))

    @classmethod
    def from_samples(cls, times, mats):
        return cls(times, mats)

    # -- transformations
    def refine(self, factor):
        """Resample a closed-form path more densely."""
        if self.generator is None:
            raise ValueError("only closed-form paths can be refined")
        kind, X = self.generator
        if kind == "fn":
            return SymplecticPath.from_function(X, (len(self) - 1) * factor)
        return SymplecticPath.exponential(X, samples=(len(self) - 1) * factor)

    def conjugate(self, P):
        P = np.asarray(P, float)
        Pi = np.linalg.inv(P)
        mats = np.einsum("ij,tjk,kl->til", Pi, self.mats, P)
        gen = None
        if self.generator is not None:
            kind, X = self.generator
            if kind == "fn":
                gen = ("fn", lambda s, f=X: Pi @ f(s) @ P)
            else:
                gen = (kind, Pi @ X @ P)
        return SymplecticPath(self.times, mats, gen)

    def then(self, other):
        """Catenation: this path on [0, 1/2], then other(t) * M(1) on [1/2, 1]."""
        t = np.concatenate([0.5 * self.times, 0.5 + 0.5 * other.times[1:]])
        tail = np.einsum("tij,jk->tik", other.mats[1:], self.monodromy)
        return SymplecticPath(t, np.concatenate([self.mats, tail]))


def iterate_path(path: SymplecticPath, k: int) -> SymplecticPath:
    """Path on [0, k] by gamma(t) = gamma(t - j) gamma(1)^j, rescaled to [0, 1]."""
    if k < 1 or int(k) != k:
        raise ValueError("k must be a positive integer")
    k = int(k)
    if k == 1:
        return path
    if path.generator is not None and path.generator[0] == "exp":
        X = path.generator[1]
        return SymplecticPath.exponential(X, samples=(len(path) - 1) * k, T=k)
    M1 = path.monodromy
    times = [path.times]
    mats = [path.mats]
    power = np.eye(M1.shape[0])
    for j in range(1, k):
        power = power @ M1
        times.append(j + path.times[1:])
        mats.append(np.einsum("tij,jk->tik", path.mats[1:], power))
    t = np.concatenate(times) / k
    t[-1] = 1.0
    gen = None
    if path.generator is not None and path.generator[0] == "fn":
        f = path.generator[1]

        def g(u):
            j = min(int(np.floor(u * k)), k - 1)
            return f(u * k - j) @ np.linalg.matrix_power(M1, j)
        gen = ("fn", g)
    return SymplecticPath(t, np.concatenate(mats), gen)
