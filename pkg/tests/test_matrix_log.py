import numpy as np
import pytest
import scipy.linalg as sla
from hypothesis import given, settings
from hypothesis import strategies as st

from twistpoints.errors import DomainError, ParameterError
from twistpoints.matrix_log import (InfinitesimallySymplectic, build_vg, closed_form_log,
                                    exp_representation, integral_log, nilpotent_log,
                                    principal_log)
from twistpoints.normal_forms import NormalFormBlock, build_normal_form
from twistpoints.symplectic import random_symplectic, standard_j

seeds = st.integers(0, 2 ** 31)
dims = st.integers(1, 4)


def _lie_defect(X):
    n = X.shape[0] // 2
    J = standard_j(n)
    return np.linalg.norm(J @ X + X.T @ J) / max(1.0, np.linalg.norm(X))


@settings(max_examples=60, deadline=None)
@given(dims, seeds)
def test_principal_and_integral_logs_agree(n, seed):
    M = np.asarray(random_symplectic(n, seed, budget=4.0))
    X = np.asarray(principal_log(M))
    Y = integral_log(M, 96)
    assert np.linalg.norm(sla.expm(X) - M) <= 1e-8 * np.linalg.norm(M)
    assert _lie_defect(X) <= 1e-8
    assert np.linalg.norm(X - Y) <= 1e-6 * max(1.0, np.linalg.norm(X))
    assert np.max(np.abs(np.linalg.eigvals(X).imag)) < np.pi - 1e-10


@settings(max_examples=40, deadline=None)
@given(dims, seeds, st.sampled_from([-1.0, 0.5, -0.5]))
def test_scaling_law(n, seed, alpha):
    M = np.asarray(random_symplectic(n, seed, budget=4.0))
    if alpha == -1.0:
        A = np.linalg.inv(M)
    else:
        A = sla.sqrtm(M).real
        if alpha < 0:
            A = np.linalg.inv(A)
    lhs = np.asarray(principal_log(A))
    rhs = alpha * np.asarray(principal_log(M))
    assert np.linalg.norm(lhs - rhs) <= 1e-8 * max(1.0, np.linalg.norm(rhs))


@settings(max_examples=40, deadline=None)
@given(dims, seeds)
def test_exp_representation_with_negative_spectrum(n, seed):
    M = np.asarray(random_symplectic(n, seed, allow_negative=True, budget=4.0))
    rep = exp_representation(M)
    assert rep.residual(M) <= 1e-8 * np.linalg.norm(M)
    assert sum(rep.half_dims) == n
    for X in rep.generators:
        assert _lie_defect(np.asarray(X)) <= 1e-8


@pytest.mark.parametrize("t_j", [0, 1, 2, 3, 4])
@pytest.mark.parametrize("theta", [0.7, -2.1])
def test_vg_spectrum_matches_v(t_j, theta):
    vg = build_vg(t_j, theta)
    a = np.sort_complex(np.linalg.eigvals(vg.m))
    b = np.sort_complex(np.linalg.eigvals(vg.V))
    # V + G is triangular in a suitable basis: compare characteristic polynomials
    assert np.allclose(np.poly(a), np.poly(b), atol=1e-8)
    assert _lie_defect(vg.m) <= 1e-12
    assert np.allclose(vg.exp_v(), sla.expm(vg.V), atol=1e-12)


def test_closed_forms_examples():
    sign, X = closed_form_log(NormalFormBlock.rtheta(0.4))
    assert sign == 1 and np.allclose(np.asarray(X), [[0, -0.4], [0.4, 0]])
    sign, X = closed_form_log(NormalFormBlock.n1(-1, 1))
    assert sign == -1
    assert np.allclose(-sla.expm(np.asarray(X)), build_normal_form(NormalFormBlock.n1(-1, 1)))
    sign, X = closed_form_log(NormalFormBlock.mm(-3.0, 2))
    M = build_normal_form(NormalFormBlock.mm(-3.0, 2))
    assert sign == -1 and np.linalg.norm(-sla.expm(np.asarray(X)) - M) <= 1e-10


def test_nilpotent_log_terminates():
    U = np.eye(3) + np.eye(3, k=1)
    Y = nilpotent_log(U)
    assert np.allclose(Y, sla.logm(U).real)


def test_log_domain_errors():
    with pytest.raises(DomainError):
        principal_log(-np.eye(2))
    with pytest.raises(DomainError):
        principal_log(np.diag([0.0, 1.0]))
    with pytest.raises(DomainError):
        InfinitesimallySymplectic(np.array([[1.0, 0.0], [0.0, 1.0]]))
    with pytest.raises(DomainError):
        InfinitesimallySymplectic(np.array([[0.0, -4.0], [4.0, 0.0]]))
    with pytest.raises(ParameterError):
        build_vg(1, 0.5, epsilon=2)
