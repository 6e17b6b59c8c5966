import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from twistpoints.calculus import BumpTerm, CompactPerturbation, integrate
from twistpoints.calculus.second_order import (companion_matrix, second_order_to_hamiltonian)
from twistpoints.errors import DegeneracyError, DimensionError


def test_harmonic_oscillator_flow():
    w = 1.3
    sys = second_order_to_hamiltonian([[w * w]], [[w * w]])
    z0 = np.array([[0.4, -0.1]])
    r = integrate(sys.H, z0, 0.0, 1.0, steps=1024)
    q = 0.4 * np.cos(w) - 0.1 / w * np.sin(w)
    p = -0.4 * w * np.sin(w) - 0.1 * np.cos(w)
    assert np.allclose(r.z[0], [q, p], atol=1e-12)


def test_companion_matrix():
    A = np.array([[2.0, 0.5], [0.5, 1.0]])
    C = companion_matrix(A)
    assert np.array_equal(C[:2, 2:], np.eye(2)) and np.array_equal(C[2:, :2], -A)
    sys = second_order_to_hamiltonian(A, A)
    X = sys.Q_inf.generator(0.0)
    assert np.allclose(X, C)


def test_mean_index_gap():
    # u'' + w^2 u = 0 turns at rate w, mean index w / pi
    sys = second_order_to_hamiltonian([[1.0]], [[9.0]], R0=1.5)
    m0, minf = sys.mean_indices()
    assert m0 == pytest.approx(1 / np.pi, abs=1e-9)
    assert minf == pytest.approx(3 / np.pi, abs=1e-9)
    assert sys.mean_index_gap() == pytest.approx(-2 / np.pi, abs=1e-9)


def test_degenerate_linear_system():
    with pytest.raises(DegeneracyError):
        second_order_to_hamiltonian([[1.0]], [[4 * np.pi ** 2]])
    second_order_to_hamiltonian([[1.0]], [[4 * np.pi ** 2]], check=False)


def test_payload_dimension():
    h = CompactPerturbation([BumpTerm((0, 0), 1.0, ((1.0, (3, 0)),))])
    with pytest.raises(DimensionError):
        second_order_to_hamiltonian([[1.0]], [[2.0]], payload=h)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2 ** 31))
def test_gradient_limits(seed):
    rng = np.random.default_rng(seed)
    N = int(rng.integers(1, 3))
    A0 = rng.standard_normal((N, N))
    A0 = A0 + A0.T
    Ai = A0 + np.eye(N) * 2.0
    payload = CompactPerturbation([BumpTerm((0,) * N, 1.0, ((0.3, (3,) + (0,) * (N - 1)),))])
    H = second_order_to_hamiltonian(A0, Ai, R0=1.5, payload=payload, check=False).H
    u = rng.standard_normal(N)
    u /= np.linalg.norm(u)
    # grad F(u) - A0 u = o(|u|)
    rel = [np.linalg.norm(H.force(0.0, r * u)[0] - A0 @ (r * u)) / r for r in (1e-2, 1e-4)]
    assert rel[1] <= 1e-3 and rel[1] <= 0.05 * rel[0] + 1e-12
    big = 3.0 * u
    assert np.allclose(H.force(0.0, big)[0], Ai @ big, atol=1e-12)
    # the Hessian agrees with finite differences of the gradient
    z = np.concatenate([0.8 * u, rng.standard_normal(N)])[None, :]
    _, _, Hs = H.evaluate(0.0, z, 2)
    e = 1e-6
    for i in range(2 * N):
        dz = np.zeros(2 * N)
        dz[i] = e
        fd = (H.grad(0.0, z + dz) - H.grad(0.0, z - dz)) / (2 * e)
        assert np.allclose(fd[0], Hs[0, :, i], atol=1e-6)
