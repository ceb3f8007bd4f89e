"""Tests for subspace membership, scaling and the positive-point LP."""

import numpy as np
import pytest

from core.hadamard import DimensionMismatchError
from core.subspace import (
    AffineSubspace,
    EmptySubspaceError,
    SolverError,
    affine_contains,
    affine_equal,
    find_positive_point,
    maximize_lp,
    membership_residual,
    scale_by_point,
    spans_equal,
    subspace_contains,
    subspace_from_basis,
)


def test_basis_is_orthonormal(vandermonde) -> None:
    """Stored basis rows are orthonormal."""
    B = vandermonde.basis
    assert vandermonde.dim == 2
    assert vandermonde.ambient_dim == 3
    assert np.allclose(B @ B.T, np.eye(2))


def test_rank_deficient_generators() -> None:
    """Dependent generators collapse to the span's dimension."""
    S = subspace_from_basis([[1.0, 0.0, 0.0], [2.0, 0.0, 0.0], [0.0, 1.0, 0.0]])
    assert S.dim == 2


def test_all_zero_generators() -> None:
    """The zero span is rejected."""
    with pytest.raises(EmptySubspaceError):
        subspace_from_basis([[0.0, 0.0], [0.0, 0.0]])


def test_inconsistent_generator_lengths() -> None:
    """Generators must share a dimension."""
    with pytest.raises(DimensionMismatchError):
        subspace_from_basis([[1.0, 2.0], [1.0, 2.0, 3.0]])


def test_membership_of_generators_and_combinations(vandermonde) -> None:
    """Generators and their combinations are members."""
    assert subspace_contains(vandermonde, [1.0, 1.0, 1.0]).contained
    assert subspace_contains(vandermonde, [3.0, 5.0, 9.0]).contained


def test_membership_residual_of_square(vandermonde) -> None:
    """(1,4,16) is off the plane with normal (2,-3,1)."""
    check = subspace_contains(vandermonde, [1.0, 4.0, 16.0])
    assert not check.contained
    distance = 6.0 / np.sqrt(14.0)
    assert check.residual == pytest.approx(distance / np.sqrt(273.0), rel=1e-12)


def test_residual_is_scale_aware(vandermonde) -> None:
    """Large members are not rejected by absolute rounding error."""
    big = 1e8 * np.array([3.0, 5.0, 9.0])
    assert membership_residual(vandermonde, big) < 1e-12


def test_membership_dimension_mismatch(vandermonde) -> None:
    """Vectors from another ambient space are rejected."""
    with pytest.raises(DimensionMismatchError):
        subspace_contains(vandermonde, [1.0, 2.0])


def test_spans_equal_for_different_generators() -> None:
    """Different generators of one plane give residual zero."""
    S = subspace_from_basis([[1.0, 1.0, 0.0], [0.0, 0.0, 1.0]])
    T = subspace_from_basis([[1.0, 1.0, 1.0], [2.0, 2.0, -1.0]])
    assert spans_equal(S, T) < 1e-12
    U = subspace_from_basis([[1.0, 0.0, 0.0], [0.0, 0.0, 1.0]])
    assert spans_equal(S, U) > 0.1


def test_scale_by_point_keeps_dimension(running_example) -> None:
    """a^{-1} ∘ W contains e when a is in W."""
    a = np.array([1.0, 2.0, 0.3, 0.7])
    V = scale_by_point(running_example, a, invert=True)
    assert V.dim == running_example.dim
    assert subspace_contains(V, np.ones(4)).contained
    back = scale_by_point(V, a)
    assert spans_equal(back, running_example) < 1e-12


def test_affine_membership_and_equality() -> None:
    """Affine subspaces compare by direction and offset."""
    direction = subspace_from_basis([[1.0, 0.0, 0.0]])
    A = AffineSubspace(np.array([0.0, 1.0, 0.0]), direction)
    B = AffineSubspace(np.array([5.0, 1.0, 0.0]), direction)
    C = AffineSubspace(np.array([0.0, 2.0, 0.0]), direction)
    assert affine_contains(A, [3.0, 1.0, 0.0]).contained
    assert not affine_contains(A, [3.0, 1.5, 0.0]).contained
    assert affine_equal(A, B) < 1e-12
    assert affine_equal(A, C) > 0.1


def test_maximize_lp_small_program() -> None:
    """max x + y subject to x <= 1, y <= 2, x + y <= 2.5."""
    result = maximize_lp(
        np.array([1.0, 1.0]),
        np.array([[1.0, 0.0], [0.0, 1.0], [1.0, 1.0]]),
        np.array([1.0, 2.0, 2.5]),
    )
    assert result.value == pytest.approx(2.5)
    assert result.x.sum() == pytest.approx(2.5)


def test_maximize_lp_unbounded() -> None:
    """An unbounded program raises."""
    with pytest.raises(SolverError):
        maximize_lp(np.array([1.0]), np.array([[-1.0]]), np.array([1.0]))


def test_maximize_lp_requires_nonnegative_rhs() -> None:
    """The slack basis needs b >= 0."""
    with pytest.raises(ValueError):
        maximize_lp(np.array([1.0]), np.array([[1.0]]), np.array([-1.0]))


def test_positive_point_found(running_example, vandermonde) -> None:
    """Subspaces meeting the open orthant yield a positive member."""
    for W in (running_example, vandermonde):
        a = find_positive_point(W)
        assert a is not None
        assert a.min() > 0
        assert subspace_contains(W, a).contained


def test_no_positive_point() -> None:
    """span{(1,-1,0),(0,0,1)} only touches the orthant's boundary."""
    W = subspace_from_basis([[1.0, -1.0, 0.0], [0.0, 0.0, 1.0]])
    assert find_positive_point(W) is None


def test_positive_point_is_deterministic(vandermonde) -> None:
    """Repeated runs return the same point."""
    assert np.array_equal(find_positive_point(vandermonde), find_positive_point(vandermonde))
