"""Linear and affine subspaces of R^{n+1}: membership, scaling and positive points."""

from dataclasses import dataclass
from typing import NamedTuple, Optional, Sequence
import logging

import numpy as np

from core.hadamard import (
    DimensionMismatchError,
    VectorLike,
    as_positive_vector,
    as_vector,
)

logger = logging.getLogger(__name__)

DEFAULT_TOL = 1e-9
# LP optimum below this means only boundary-touching nonnegative vectors exist.
POSITIVITY_FLOOR = 1e-10
_PIVOT_EPS = 1e-12


class EmptySubspaceError(ValueError):
    """Raised when generators span only the zero vector."""


class PreconditionError(ValueError):
    """Raised when an operation's documented precondition does not hold."""


class SolverError(RuntimeError):
    """Raised when the simplex procedure fails to reach an optimum."""


def _frozen(arr: np.ndarray) -> np.ndarray:
    out = np.array(arr, dtype=np.float64)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class Subspace:
    """
    Linear subspace held as orthonormal rows.

    Attributes:
        basis: (dim, ambient_dim) array with orthonormal rows
        original_basis: The generating vectors as supplied, kept for reporting
    """

    basis: np.ndarray
    original_basis: np.ndarray

    @property
    def ambient_dim(self) -> int:
        return int(self.basis.shape[1])

    @property
    def dim(self) -> int:
        return int(self.basis.shape[0])

    def project(self, x: VectorLike) -> np.ndarray:
        """Orthogonal projection of x onto the subspace."""
        xv = as_vector(x)
        _check_ambient(self, xv)
        return self.basis.T @ (self.basis @ xv)

    def combine(self, coefficients: VectorLike) -> np.ndarray:
        """Element of the subspace with the given coordinates in the orthonormal basis."""
        return np.asarray(coefficients, dtype=np.float64) @ self.basis


@dataclass(frozen=True)
class AffineSubspace:
    """Affine subspace base + direction."""

    base: np.ndarray
    direction: Subspace


class Membership(NamedTuple):
    contained: bool
    residual: float


class LinearProgramResult(NamedTuple):
    x: np.ndarray
    value: float
    iterations: int


def _check_ambient(S: Subspace, x: np.ndarray) -> None:
    if x.size != S.ambient_dim:
        raise DimensionMismatchError(
            f"Vector of dimension {x.size} tested against subspace of R^{S.ambient_dim}"
        )


def _orthonormal_rows(matrix: np.ndarray, tol: float, rank: Optional[int] = None) -> np.ndarray:
    _, s, vt = np.linalg.svd(matrix, full_matrices=False)
    if s.size == 0 or s[0] == 0.0:
        raise EmptySubspaceError("Generators span only the zero vector")
    if rank is None:
        rank = int((s > tol * s[0]).sum())
    return vt[:rank]


def subspace_from_basis(vectors: Sequence[VectorLike], tol: float = DEFAULT_TOL) -> Subspace:
    """
    Build a subspace from generating vectors.

    Args:
        vectors: Non-empty list of vectors sharing one dimension
        tol: Relative singular-value threshold deciding the numerical rank

    Returns:
        Subspace whose orthonormal basis spans the generators

    Raises:
        ValueError: If the list is empty
        DimensionMismatchError: If generator lengths differ
        EmptySubspaceError: If every generator is zero
    """
    if len(vectors) == 0:
        raise ValueError("At least one generating vector is required")
    rows = [as_vector(v) for v in vectors]
    dims = {r.size for r in rows}
    if len(dims) != 1:
        raise DimensionMismatchError(f"Generators have inconsistent dimensions: {sorted(dims)}")
    generators = np.vstack(rows)
    basis = _orthonormal_rows(generators, tol)
    return Subspace(basis=_frozen(basis), original_basis=_frozen(generators))


def membership_residual(S: Subspace, x: VectorLike) -> float:
    """||x - Proj_S(x)|| / max(1, ||x||)."""
    xv = as_vector(x)
    _check_ambient(S, xv)
    distance = np.linalg.norm(xv - S.project(xv))
    return float(distance / max(1.0, float(np.linalg.norm(xv))))


def subspace_contains(S: Subspace, x: VectorLike, tol: float = DEFAULT_TOL) -> Membership:
    """Membership test; the residual is returned whatever the verdict."""
    residual = membership_residual(S, x)
    return Membership(residual <= tol, residual)


def spans_equal(S: Subspace, T: Subspace) -> float:
    """Largest residual of mutual containment of the two bases (0 when spans coincide)."""
    if S.ambient_dim != T.ambient_dim:
        raise DimensionMismatchError("Subspaces live in different ambient spaces")
    residuals = [membership_residual(T, b) for b in S.basis]
    residuals += [membership_residual(S, b) for b in T.basis]
    return max(residuals)


def scale_by_point(S: Subspace, a: VectorLike, invert: bool = False) -> Subspace:
    """
    The scaled subspace a^{-1} ∘ S (invert=True) or a ∘ S.

    Scaling by a positive vector is a bijection, so the dimension is kept.
    """
    av = as_positive_vector(a)
    _check_ambient(S, av)
    factor = 1.0 / av if invert else av
    basis = _orthonormal_rows(S.basis * factor, tol=0.0, rank=S.dim)
    return Subspace(basis=_frozen(basis), original_basis=_frozen(S.original_basis * factor))


def affine_contains(A: AffineSubspace, x: VectorLike, tol: float = DEFAULT_TOL) -> Membership:
    """Membership of x in base + direction."""
    xv = as_vector(x)
    return subspace_contains(A.direction, xv - A.base, tol)


def affine_equal(A: AffineSubspace, B: AffineSubspace) -> float:
    """Largest residual certifying A and B are the same affine subspace."""
    direction = spans_equal(A.direction, B.direction)
    offset = membership_residual(A.direction, as_vector(B.base) - A.base)
    return max(direction, offset)


def maximize_lp(
    c: np.ndarray, A_ub: np.ndarray, b_ub: np.ndarray, max_iter: int = 10000
) -> LinearProgramResult:
    """
    Dense tableau simplex for max c.x subject to A_ub x <= b_ub, x >= 0.

    Requires b_ub >= 0 so the origin is a feasible starting vertex. Pivoting
    follows Bland's rule, which rules out cycling on degenerate rows.

    Raises:
        ValueError: If some right-hand side is negative
        SolverError: If the program is unbounded or the iteration limit is hit
    """
    A = np.asarray(A_ub, dtype=np.float64)
    b = np.asarray(b_ub, dtype=np.float64)
    cost = np.asarray(c, dtype=np.float64)
    m, n = A.shape
    if np.any(b < 0):
        raise ValueError("Right-hand side must be nonnegative for a slack starting basis")

    tableau = np.zeros((m + 1, n + m + 1))
    tableau[:m, :n] = A
    tableau[:m, n : n + m] = np.eye(m)
    tableau[:m, -1] = b
    tableau[m, :n] = -cost
    basis = list(range(n, n + m))

    for iteration in range(max_iter):
        entering = np.flatnonzero(tableau[m, :-1] < -_PIVOT_EPS)
        if entering.size == 0:
            x = np.zeros(n + m)
            x[basis] = tableau[:m, -1]
            return LinearProgramResult(x[:n], float(tableau[m, -1]), iteration)
        col = int(entering[0])
        column = tableau[:m, col]
        rows = np.flatnonzero(column > _PIVOT_EPS)
        if rows.size == 0:
            raise SolverError(f"Linear program is unbounded along column {col}")
        ratios = tableau[rows, -1] / column[rows]
        best = ratios.min()
        ties = rows[ratios <= best + _PIVOT_EPS]
        row = int(min(ties, key=lambda r: basis[r]))

        tableau[row] /= tableau[row, col]
        factors = tableau[:, col].copy()
        factors[row] = 0.0
        tableau -= np.outer(factors, tableau[row])
        basis[row] = col

    raise SolverError(f"Simplex did not converge in {max_iter} iterations")


def maximize_free_lp(c: np.ndarray, A_ub: np.ndarray, b_ub: np.ndarray) -> LinearProgramResult:
    """max c.x subject to A_ub x <= b_ub with x free (split as x+ - x-)."""
    A = np.asarray(A_ub, dtype=np.float64)
    cost = np.asarray(c, dtype=np.float64)
    n = A.shape[1]
    result = maximize_lp(np.concatenate([cost, -cost]), np.hstack([A, -A]), b_ub)
    return LinearProgramResult(result.x[:n] - result.x[n:], result.value, result.iterations)


def find_positive_point(S: Subspace) -> Optional[np.ndarray]:
    """
    Strictly positive element of S, or None when S meets the open orthant nowhere.

    Solves max t subject to x = B^T c, x_i >= t, ||x||_inf <= 1 over the
    orthonormal basis B. The origin (c = 0, t = 0) is feasible, so the optimum
    t* is never negative; t* below POSITIVITY_FLOOR means no positive point.

    Raises:
        SolverError: If the simplex procedure fails
    """
    B = S.basis
    d, N = B.shape
    ones = np.ones((N, 1))
    zeros = np.zeros((N, 1))
    A_ub = np.vstack(
        [
            np.hstack([-B.T, ones]),
            np.hstack([B.T, zeros]),
            np.hstack([-B.T, zeros]),
        ]
    )
    b_ub = np.concatenate([np.zeros(N), np.ones(N), np.ones(N)])
    cost = np.zeros(d + 1)
    cost[-1] = 1.0

    result = maximize_free_lp(cost, A_ub, b_ub)
    t_star = result.value
    logger.info(f"Positive-point LP: t*={t_star:.3e} after {result.iterations} pivots")
    if t_star < POSITIVITY_FLOOR:
        return None
    x = S.combine(result.x[:d])
    if x.min() <= 0.0:
        raise SolverError(f"LP reported t*={t_star:.3e} but the point has min entry {x.min():.3e}")
    return as_positive_vector(x)


def random_element(S: Subspace, rng: np.random.Generator) -> np.ndarray:
    """Gaussian random element of S."""
    return S.combine(rng.standard_normal(S.dim))
