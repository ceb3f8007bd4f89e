"""Componentwise (Hadamard) algebra on R^{n+1} and its mutations."""

from typing import Optional, Sequence, Union
import logging

import numpy as np

logger = logging.getLogger(__name__)

VectorLike = Union[Sequence[float], np.ndarray]

# An entry counts as zero below this magnitude.
ZERO_THRESHOLD = 1e-300
# min|a_i| / max|a_i| below this triggers a conditioning warning in reports.
CONDITIONING_THRESHOLD = 1e-8


class DimensionMismatchError(ValueError):
    """Raised when two vectors do not share the ambient dimension."""


class NotInvertibleError(ValueError):
    """Raised when an element has a zero entry and so has no Hadamard inverse."""

    def __init__(self, index: int, value: float = 0.0) -> None:
        self.index = index
        self.value = value
        super().__init__(f"Vector is not invertible: entry {index} is {value!r}")


def as_vector(x: VectorLike) -> np.ndarray:
    """
    Validate and freeze a vector of R^{n+1}.

    Args:
        x: Sequence of n+1 >= 2 finite reals

    Returns:
        Read-only float64 copy of x

    Raises:
        ValueError: If x is not one-dimensional, too short or not finite
    """
    arr = np.array(x, dtype=np.float64)
    if arr.ndim != 1:
        raise ValueError(f"Expected a one-dimensional vector, got shape {arr.shape}")
    if arr.size < 2:
        raise ValueError(f"Ambient dimension must be at least 2, got {arr.size}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("Vector entries must be finite")
    arr.setflags(write=False)
    return arr


def as_positive_vector(x: VectorLike) -> np.ndarray:
    """
    Validate a strictly positive vector (an element of R_+^{n+1}).

    Raises:
        NotInvertibleError: If some entry is zero
        ValueError: If some entry is negative
    """
    arr = as_vector(x)
    _check_invertible(arr)
    negative = np.flatnonzero(arr < 0)
    if negative.size:
        idx = int(negative[0])
        raise ValueError(f"Vector is not positive: entry {idx} is {arr[idx]!r}")
    return arr


def identity(dim: int) -> np.ndarray:
    """The all-ones identity element e of the Hadamard product."""
    return as_vector(np.ones(dim))


def _check_invertible(x: np.ndarray) -> None:
    zeros = np.flatnonzero(np.abs(x) < ZERO_THRESHOLD)
    if zeros.size:
        idx = int(zeros[0])
        raise NotInvertibleError(idx, float(x[idx]))


def _check_dims(*vectors: np.ndarray) -> None:
    dims = {v.size for v in vectors}
    if len(dims) != 1:
        raise DimensionMismatchError(f"Dimension mismatch: {sorted(dims)}")


def hadamard_product(x: VectorLike, y: VectorLike) -> np.ndarray:
    """Componentwise product x ∘ y."""
    xv, yv = as_vector(x), as_vector(y)
    _check_dims(xv, yv)
    return as_vector(xv * yv)


def hadamard_inverse(x: VectorLike) -> np.ndarray:
    """
    Componentwise reciprocal x^{-1}.

    Raises:
        NotInvertibleError: Naming the first zero entry
    """
    xv = as_vector(x)
    _check_invertible(xv)
    return as_vector(1.0 / xv)


def mutation_product(x: VectorLike, y: VectorLike, a: VectorLike) -> np.ndarray:
    """
    Mutated product x ∘ a^{-1} ∘ y, whose identity element is a.

    Args:
        x: Left factor
        y: Right factor
        a: Invertible element defining the mutation

    Returns:
        Vector with entries x_i y_i / a_i
    """
    return hadamard_product(hadamard_product(x, hadamard_inverse(a)), y)


def mutation_power(x: VectorLike, k: int, a: VectorLike) -> np.ndarray:
    """k-fold mutated power of x; k = 1 returns x."""
    if k < 1:
        raise ValueError(f"Power must be a positive integer, got {k}")
    result = as_vector(x)
    for _ in range(k - 1):
        result = mutation_product(result, x, a)
    return result


def conditioning_ratio(a: VectorLike) -> float:
    """min_i |a_i| / max_i |a_i|."""
    av = np.abs(as_vector(a))
    return float(av.min() / av.max())


def conditioning_warning(a: VectorLike) -> Optional[str]:
    """Warning text for a badly scaled mutation element, or None."""
    ratio = conditioning_ratio(a)
    if ratio < CONDITIONING_THRESHOLD:
        logger.warning(f"Ill-conditioned base point: min/max entry ratio {ratio:.3e}")
        return (
            f"base point is ill-conditioned: min/max entry ratio {ratio:.3e} "
            f"< {CONDITIONING_THRESHOLD:.0e}"
        )
    return None


def power_matrix(x: VectorLike, degree: Optional[int] = None) -> np.ndarray:
    """
    Columns e, x, x^2, ..., x^degree (a Vandermonde matrix).

    The default degree n makes the matrix square for x in R^{n+1}.
    """
    xv = as_vector(x)
    if degree is None:
        degree = xv.size - 1
    return np.vander(xv, degree + 1, increasing=True)


def power_rank(x: VectorLike, tol: float = 1e-9) -> int:
    """
    Numerical rank of the power matrix of x.

    Equals the number of distinct entries of x; a vector whose powers all lie
    in a proper subspace must repeat an entry. Entries are normalized by
    ||x||_inf first so the threshold is scale-free.
    """
    xv = as_vector(x)
    scale = np.abs(xv).max()
    if scale == 0.0:
        return 1
    mat = power_matrix(xv / scale)
    s = np.linalg.svd(mat, compute_uv=False)
    return int((s > tol * s[0]).sum())


def vandermonde_gap(x: VectorLike) -> float:
    """Smallest pairwise |x_i - x_j| after normalizing x by ||x||_inf."""
    xv = as_vector(x)
    scale = np.abs(xv).max()
    if scale == 0.0:
        return 0.0
    srt = np.sort(xv / scale)
    return float(np.diff(srt).min())
