import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from twistpoints.errors import AmbiguityError, DimensionError, ParameterError
from twistpoints.normal_forms import NormalFormBlock, build_normal_form
from twistpoints.symplectic import (certify, classify_eigenvalues, diamond,
                                    eigenvalue_symmetry_defect, random_symplectic,
                                    random_symplectic_conjugator, standard_j,
                                    symplectic_residual)

angles = st.floats(0.2, np.pi - 0.2).flatmap(lambda a: st.sampled_from([a, -a]))
radii = st.floats(1.2, 3.0).flatmap(lambda r: st.sampled_from([r, 1.0 / r]))


@st.composite
def blocks(draw):
    kind = draw(st.sampled_from(["N1", "Nm", "R", "Mm", "Quad"]))
    m = draw(st.integers(1, 3))
    if kind == "N1":
        return NormalFormBlock.n1(draw(st.sampled_from([1, -1])), draw(st.sampled_from([-1, 0, 1])))
    if kind == "Nm":
        b = draw(st.lists(st.sampled_from([-1.0, 0.0, 1.0]), min_size=max(m, 2), max_size=max(m, 2)))
        return NormalFormBlock.nm(draw(st.sampled_from([1, -1])), b)
    if kind == "R":
        return NormalFormBlock.rtheta(draw(angles))
    if kind == "Mm":
        return NormalFormBlock.mm(draw(radii) * draw(st.sampled_from([1, -1])), m)
    return NormalFormBlock.quad(draw(radii), draw(angles), m)


@settings(max_examples=80, deadline=None)
@given(blocks())
def test_normal_forms_are_symplectic(blk):
    M = build_normal_form(blk)
    assert M.shape == (2 * blk.half_dim,) * 2
    J = standard_j(blk.half_dim)
    assert np.linalg.norm(M.T @ J @ M - J) <= 1e-12 * np.linalg.norm(M) ** 2


@settings(max_examples=40, deadline=None)
@given(blocks(), blocks())
def test_diamond_joins_spectra(b1, b2):
    M1, M2 = build_normal_form(b1), build_normal_form(b2)
    M = diamond(M1, M2)
    assert symplectic_residual(M) <= 1e-12 * np.linalg.norm(M) ** 2
    joint = np.sort_complex(np.concatenate([np.linalg.eigvals(M1), np.linalg.eigvals(M2)]))
    both = np.sort_complex(np.linalg.eigvals(M))
    # Jordan blocks perturb eigenvalues by eps^(1/m); compare characteristic polynomials instead
    assert np.allclose(np.poly(both), np.poly(joint), atol=1e-8)


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 4), st.integers(0, 2 ** 31))
def test_classification_counts_and_conjugation(n, seed):
    rng = np.random.default_rng(seed)
    try:
        M = np.asarray(random_symplectic(n, rng, allow_negative=True))
        classes = classify_eigenvalues(M)
        P = random_symplectic_conjugator(n, rng, budget=3.0)
        again = classify_eigenvalues(np.linalg.solve(P, M @ P))
    except AmbiguityError:
        return  # repeated Jordan spectra near a class boundary are refused, not guessed
    assert sum(c.eigenvalue_count for c in classes) == 2 * n
    assert sorted(c.tag for c in classes) == sorted(c.tag for c in again)


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 4), st.integers(0, 2 ** 31))
def test_eigenvalue_reciprocal_symmetry(n, seed):
    M = np.asarray(random_symplectic(n, seed))
    assert eigenvalue_symmetry_defect(M, 1e-6) <= 1e-6


def test_classify_examples():
    unit = classify_eigenvalues(build_normal_form(NormalFormBlock.rtheta(0.5)))
    assert [c.tag for c in unit] == ["UnitNonReal"]
    assert unit[0].theta == pytest.approx(0.5)
    quad = classify_eigenvalues(build_normal_form(NormalFormBlock.quad(1.5, 0.7)))
    assert [(c.tag, c.eigenvalue_count) for c in quad] == [("ComplexQuadruple", 4)]


def test_diamond_of_two_rotations():
    a, b = build_normal_form(NormalFormBlock.rtheta(0.3)), build_normal_form(NormalFormBlock.rtheta(1.1))
    M = diamond(a, b)
    # interleaving puts the q-coordinates first
    assert M[0, 0] == pytest.approx(np.cos(0.3)) and M[1, 1] == pytest.approx(np.cos(1.1))
    assert M[2, 0] == pytest.approx(np.sin(0.3))


def test_rejects_bad_input():
    with pytest.raises(DimensionError):
        certify(2.0 * np.eye(2))
    with pytest.raises(ParameterError):
        NormalFormBlock.rtheta(0.0)
    with pytest.raises(ParameterError):
        NormalFormBlock.mm(1.0)
    with pytest.raises(ParameterError):
        NormalFormBlock.n1(1, 2)
