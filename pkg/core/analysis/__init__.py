"""Double autoparallelism of M = W ∩ S^n: closure test, block classification, generators."""

from dataclasses import dataclass
from typing import List, NamedTuple, Optional, Sequence, Tuple
import logging

import numpy as np

from core.hadamard import (
    DimensionMismatchError,
    VectorLike,
    as_positive_vector,
    as_vector,
    conditioning_warning,
    identity,
    mutation_product,
)
from core.models import CanonicalForm, DAReport, Verdict
from core.subspace import (
    DEFAULT_TOL,
    AffineSubspace,
    PreconditionError,
    Subspace,
    affine_contains,
    affine_equal,
    find_positive_point,
    maximize_free_lp,
    membership_residual,
    random_element,
    scale_by_point,
    subspace_contains,
    subspace_from_basis,
)

logger = logging.getLogger(__name__)

# log a + V and log a' + V' must agree to this residual for DA inputs.
BASE_POINT_TOL = 1e-8
# Step size for the second base point a' = a + eps * w, relative to min(a) / max|w|.
BASE_POINT_STEP = 0.1
MAX_SAMPLING_ATTEMPTS = 60


class CriterionDisagreementError(RuntimeError):
    """The closure test and the block classification reached different verdicts."""

    def __init__(self, closure_residual: float, class_separation: float, classes: int, dim: int):
        self.closure_residual = closure_residual
        self.class_separation = class_separation
        self.classes = classes
        self.dim = dim
        super().__init__(
            f"Closure residual {closure_residual:.3e} disagrees with block classification "
            f"({classes} coordinate classes for dim W = {dim}, closest distinct rows "
            f"{class_separation:.3e}); the input is ill-conditioned at this tolerance"
        )


class SamplingError(RuntimeError):
    """Rejection sampling could not find a positive point of a + W."""


class ClosureResult(NamedTuple):
    closed: bool
    max_residual: float
    witness: Optional[Tuple[int, int]]


class CoordinateClasses(NamedTuple):
    classes: List[List[int]]
    separation: float


@dataclass(frozen=True)
class SimplexChart:
    """
    Affine parametrization xi -> origin + xi @ tangent of M = W ∩ S^n.

    Tangent rows are orthonormal and sum to zero, so every image point sums
    to one. The open parameter domain is the polytope
    {xi : origin + xi @ tangent > 0}; `contains` is its membership predicate.
    bounding_box holds the coordinatewise extent of that polytope as rows
    (lower, upper). Its corners generally lie outside the domain.
    """

    origin: np.ndarray
    tangent: np.ndarray
    bounding_box: np.ndarray

    @property
    def dim(self) -> int:
        return int(self.tangent.shape[0])

    @property
    def ambient_dim(self) -> int:
        return int(self.origin.size)

    def point(self, xi: VectorLike) -> np.ndarray:
        return self.origin + np.asarray(xi, dtype=np.float64) @ self.tangent

    def jacobian(self) -> np.ndarray:
        """d p / d xi, shape (ambient_dim, dim)."""
        return self.tangent.T.copy()

    def coordinates(self, p: VectorLike) -> np.ndarray:
        return (np.asarray(p, dtype=np.float64) - self.origin) @ self.tangent.T

    def domain_constraints(self) -> Tuple[np.ndarray, np.ndarray]:
        """(A, b) with the parameter domain equal to {xi : A @ xi < b}."""
        return -self.tangent.T.copy(), self.origin.copy()

    def contains(self, xi: VectorLike, margin: float = 0.0) -> bool:
        return bool(self.point(xi).min() > margin)


def _require_base_point(W: Subspace, a: VectorLike, tol: float = DEFAULT_TOL) -> np.ndarray:
    av = as_positive_vector(a)
    if av.size != W.ambient_dim:
        raise DimensionMismatchError(f"Base point has dimension {av.size}, W lives in R^{W.ambient_dim}")
    membership = subspace_contains(W, av, tol)
    if not membership.contained:
        raise PreconditionError(f"Base point is not in W (residual {membership.residual:.3e})")
    return av


def closure_check(W: Subspace, a: VectorLike, tol: float = DEFAULT_TOL) -> ClosureResult:
    """
    Test whether W is closed under the mutated product u ∘ a^{-1} ∘ w.

    The product is bilinear, so checking every unordered pair of basis vectors
    certifies the condition for all of W.

    Args:
        W: Subspace defining the model
        a: Strictly positive point of W
        tol: Membership tolerance

    Returns:
        Verdict, largest membership residual over all pairs and, when not
        closed, the worst pair of original generators

    Raises:
        PreconditionError: If a is not in W
        NotInvertibleError: If a has a zero entry
    """
    av = _require_base_point(W, a, tol)
    B = W.basis
    worst = 0.0
    for i in range(W.dim):
        for j in range(i, W.dim):
            worst = max(worst, membership_residual(W, mutation_product(B[i], B[j], av)))
    closed = worst <= tol
    witness = None
    if not closed:
        witness = _worst_generator_pair(W, av)
        logger.info(f"Closure fails: residual {worst:.3e}, witness generators {witness}")
    return ClosureResult(closed, worst, witness)


def _worst_generator_pair(W: Subspace, a: np.ndarray) -> Tuple[int, int]:
    G = W.original_basis
    best, pair = -1.0, (0, 0)
    for i in range(G.shape[0]):
        for j in range(i, G.shape[0]):
            residual = membership_residual(W, mutation_product(G[i], G[j], a))
            if residual > best:
                best, pair = residual, (i, j)
    return pair


def hadamard_closure_check(V: Subspace, tol: float = DEFAULT_TOL) -> ClosureResult:
    """Whether V is a subalgebra of the plain Hadamard algebra containing e."""
    e = identity(V.ambient_dim)
    membership = subspace_contains(V, e, DEFAULT_TOL)
    if not membership.contained:
        return ClosureResult(False, membership.residual, None)
    return closure_check(V, e, tol)


def coordinate_classes(V: Subspace, tol: float = DEFAULT_TOL) -> CoordinateClasses:
    """
    Partition coordinates i ~ j when every basis vector of V has equal i-th and j-th entries.

    Rows of the basis matrix are normalized by the largest row norm and compared
    with absolute tolerance tol. Union-find makes the relation transitive.
    """
    rows = V.basis.T
    rows = rows / np.linalg.norm(rows, axis=1).max()
    N = rows.shape[0]
    parent = list(range(N))

    def find(i: int) -> int:
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(N):
        for j in range(i + 1, N):
            if np.abs(rows[i] - rows[j]).max() <= tol:
                ri, rj = find(i), find(j)
                if ri != rj:
                    parent[max(ri, rj)] = min(ri, rj)

    groups: dict = {}
    for i in range(N):
        groups.setdefault(find(i), []).append(i)
    classes = sorted(groups.values(), key=lambda c: c[0])

    separation = float("inf")
    for i in range(N):
        for j in range(i + 1, N):
            if find(i) != find(j):
                separation = min(separation, float(np.abs(rows[i] - rows[j]).max()))
    return CoordinateClasses(classes, separation)


def classify_blocks(
    W: Subspace, a: VectorLike, tol: float = DEFAULT_TOL
) -> Optional[CanonicalForm]:
    """
    Canonical block form of W, or None when W is not doubly autoparallel.

    Blocks are ordered by size, ties by their smallest original coordinate;
    free coordinates come first in ascending order.

    Raises:
        PreconditionError: If a is not in W, or W is the whole space
        NotInvertibleError: If a has a zero entry
    """
    av = _require_base_point(W, a, tol)
    N = W.ambient_dim
    if W.dim == N:
        raise PreconditionError("The whole space has no block decomposition")
    V = scale_by_point(W, av, invert=True)
    found = coordinate_classes(V, tol)
    if len(found.classes) != W.dim:
        logger.info(f"{len(found.classes)} coordinate classes for dim W = {W.dim}: not DA")
        return None

    free = [c[0] for c in found.classes if len(c) == 1]
    blocks = sorted((c for c in found.classes if len(c) > 1), key=lambda c: (len(c), c[0]))
    permutation = free + [i for block in blocks for i in block]
    return CanonicalForm(
        ambient_dim=N,
        q=len(free),
        r=len(blocks),
        block_sizes=[len(b) for b in blocks],
        permutation=permutation,
        block_vectors=[[float(av[i]) for i in b] for b in blocks],
    )


def log_affine_model(W: Subspace, a: VectorLike) -> AffineSubspace:
    """The affine subspace log a + a^{-1} ∘ W."""
    av = as_positive_vector(a)
    return AffineSubspace(base=np.log(av), direction=scale_by_point(W, av, invert=True))


def second_base_point(W: Subspace, a: VectorLike, rng: np.random.Generator) -> np.ndarray:
    """a' = a + eps w for a random basis vector w of W, with eps keeping a' positive."""
    av = as_positive_vector(a)
    w = W.basis[int(rng.integers(W.dim))]
    eps = BASE_POINT_STEP * av.min() / np.abs(w).max()
    return as_positive_vector(av + eps * w)


def base_point_residual(W: Subspace, a: VectorLike, a_prime: VectorLike) -> float:
    """Distance between log a + V and log a' + V' (0 when they coincide)."""
    return affine_equal(log_affine_model(W, a), log_affine_model(W, a_prime))


def analyze(
    W: Subspace,
    tol: float = DEFAULT_TOL,
    base_point: Optional[VectorLike] = None,
    seed: int = 0,
) -> DAReport:
    """
    Decide whether M = W ∩ S^n is doubly autoparallel.

    Runs the closure test and the block classification independently and
    requires them to agree. For DA inputs the log-affine model is rebuilt at
    a second positive point and compared.

    Args:
        W: Subspace defining the model
        tol: Membership and coordinate-tying tolerance
        base_point: Positive point of W to use; found by linear programming when omitted
        seed: Seed for the second base point

    Raises:
        CriterionDisagreementError: If the two criteria disagree
        SolverError: If the positive-point search fails
    """
    N = W.ambient_dim
    if base_point is None:
        a = find_positive_point(W)
    else:
        a = _require_base_point(W, base_point, tol)
    if a is None:
        logger.info("W meets the positive orthant nowhere")
        return DAReport(
            verdict=Verdict.NO_POSITIVE_POINT,
            ambient_dim=N,
            dim=W.dim,
            tolerance=tol,
            warnings=["W contains no strictly positive vector; M is empty"],
        )

    warnings: List[str] = []
    conditioning = conditioning_warning(a)
    if conditioning:
        warnings.append(conditioning)

    if W.dim == N:
        warnings.append("W is the whole space; M is the full simplex and vacuously DA")
        return DAReport(
            verdict=Verdict.TRIVIAL_FULL_SPACE,
            ambient_dim=N,
            dim=W.dim,
            tolerance=tol,
            base_point=a.tolist(),
            warnings=warnings,
        )

    closure = closure_check(W, a, tol)
    form = classify_blocks(W, a, tol)
    if closure.closed != (form is not None):
        V = scale_by_point(W, a, invert=True)
        found = coordinate_classes(V, tol)
        raise CriterionDisagreementError(
            closure.max_residual, found.separation, len(found.classes), W.dim
        )

    if form is None:
        logger.info(f"Not doubly autoparallel: closure residual {closure.max_residual:.3e}")
        return DAReport(
            verdict=Verdict.NOT_DA,
            ambient_dim=N,
            dim=W.dim,
            tolerance=tol,
            base_point=a.tolist(),
            closure_residual_max=closure.max_residual,
            warnings=warnings,
        )

    rng = np.random.default_rng(seed)
    residual = base_point_residual(W, a, second_base_point(W, a, rng))
    if residual > BASE_POINT_TOL:
        logger.warning(f"Base-point independence residual {residual:.3e}")
        warnings.append(
            f"log-affine models at two base points differ by {residual:.3e} > {BASE_POINT_TOL:.0e}"
        )
    logger.info(f"Doubly autoparallel: q={form.q}, r={form.r}, sizes={form.block_sizes}")
    return DAReport(
        verdict=Verdict.DOUBLY_AUTOPARALLEL,
        ambient_dim=N,
        dim=W.dim,
        tolerance=tol,
        base_point=a.tolist(),
        closure_residual_max=closure.max_residual,
        canonical=form,
        base_point_residual=residual,
        warnings=warnings,
    )


def _positive_step(
    W: Subspace, a: np.ndarray, rng: np.random.Generator, max_attempts: int
) -> np.ndarray:
    direction = random_element(W, rng)
    peak = np.abs(direction).max()
    if peak == 0.0:
        return np.zeros_like(a)
    direction = direction / peak
    scale = a.max() * rng.uniform(0.05, 1.0)
    for _ in range(max_attempts):
        w = scale * direction
        if np.all(a + w > 0):
            return w
        scale *= 0.5
    raise SamplingError(f"No positive point of a + W found in {max_attempts} attempts")


def log_affine_verify(
    W: Subspace,
    a: VectorLike,
    samples: int = 200,
    tol: float = DEFAULT_TOL,
    rng: Optional[np.random.Generator] = None,
    max_attempts: int = MAX_SAMPLING_ATTEMPTS,
) -> float:
    """
    Largest residual of log(a + w) against log a + V over random w in W with a + w > 0.

    Small for doubly autoparallel W; for other W it reports the largest
    violation found.

    Raises:
        SamplingError: If a positive sample cannot be found
    """
    av = _require_base_point(W, a, tol)
    rng = rng if rng is not None else np.random.default_rng(0)
    model = log_affine_model(W, av)
    worst = 0.0
    for _ in range(samples):
        w = _positive_step(W, av, rng, max_attempts)
        worst = max(worst, affine_contains(model, np.log(av + w), tol).residual)
    if worst > tol:
        logger.info(f"Log-affine violation {worst:.3e} over {samples} samples")
    return worst


def denormalization_residual(
    W: Subspace, a: VectorLike, p: VectorLike, taus: Sequence[float] = (0.5, 2.0)
) -> float:
    """Largest residual of log(tau p) against log a + V for the given scalings."""
    av = _require_base_point(W, a)
    model = log_affine_model(W, av)
    pv = as_positive_vector(p)
    return max(affine_contains(model, np.log(tau * pv)).residual for tau in taus)


def generate_canonical(
    q: int,
    block_sizes: Sequence[int],
    block_vectors: Sequence[VectorLike],
    permutation: Optional[Sequence[int]] = None,
) -> Subspace:
    """
    The subspace spanned by q free coordinate vectors and r embedded positive blocks.

    Canonical position j maps to original coordinate permutation[j]; the
    identity is used when no permutation is given.

    Raises:
        ValueError: If sizes, vectors and permutation are inconsistent
    """
    sizes = [int(s) for s in block_sizes]
    if q < 0:
        raise ValueError(f"q must be nonnegative, got {q}")
    if not sizes:
        raise ValueError("At least one block is required")
    if any(s < 2 for s in sizes):
        raise ValueError(f"Every block needs at least two coordinates, got sizes {sizes}")
    if len(block_vectors) != len(sizes):
        raise ValueError(f"{len(block_vectors)} block vectors for {len(sizes)} blocks")
    vectors = [as_positive_vector(v) for v in block_vectors]
    for size, v in zip(sizes, vectors):
        if v.size != size:
            raise ValueError(f"Block vector of length {v.size} for a block of size {size}")

    N = q + sum(sizes)
    perm = list(range(N)) if permutation is None else [int(i) for i in permutation]
    if sorted(perm) != list(range(N)):
        raise ValueError(f"Permutation must be a bijection on range({N})")

    generators = []
    for j in range(q):
        g = np.zeros(N)
        g[perm[j]] = 1.0
        generators.append(g)
    start = q
    for size, v in zip(sizes, vectors):
        g = np.zeros(N)
        g[perm[start : start + size]] = v
        generators.append(g)
        start += size
    return subspace_from_basis(generators)


def random_partition(
    rng: np.random.Generator, ambient_dim: int, dim: int
) -> Tuple[int, List[int]]:
    """Random (q, sorted block sizes) with q + r = dim and q + sum(sizes) = ambient_dim."""
    if not 1 <= dim < ambient_dim:
        raise ValueError(f"Need 1 <= dim < ambient_dim, got dim={dim}, ambient_dim={ambient_dim}")
    q = int(rng.integers(max(0, 2 * dim - ambient_dim), dim))
    r = dim - q
    sizes = np.full(r, 2)
    for _ in range(ambient_dim - q - 2 * r):
        sizes[rng.integers(r)] += 1
    return q, sorted(int(s) for s in sizes)


def random_canonical(
    rng: np.random.Generator, ambient_dim: int, dim: int, shuffle: bool = True
) -> Tuple[Subspace, int, List[int], List[np.ndarray], List[int]]:
    """
    Random doubly autoparallel subspace with its construction data.

    Block vectors are drawn uniformly and normalized to sum 1 per block.

    Returns:
        (W, q, block sizes, block vectors, permutation)
    """
    q, sizes = random_partition(rng, ambient_dim, dim)
    vectors = []
    for size in sizes:
        v = rng.uniform(0.1, 1.0, size)
        vectors.append(v / v.sum())
    perm = [int(i) for i in rng.permutation(ambient_dim)] if shuffle else list(range(ambient_dim))
    return generate_canonical(q, sizes, vectors, perm), q, sizes, vectors, perm


def generate_vertex_span(n: int, d: int, v0: VectorLike) -> Subspace:
    """
    span{v0, v^(1), ..., v^(d)} for the first d vertices v^(k) of the simplex.

    Raises:
        ValueError: If d is out of range or v0 breaks the zero/positive pattern
    """
    if not 0 <= d < n:
        raise ValueError(f"Need 0 <= d < n, got d={d}, n={n}")
    v = as_vector(v0)
    N = n + 1
    if v.size != N:
        raise DimensionMismatchError(f"v0 has length {v.size}, expected {N}")
    if np.any(v[:d] != 0.0):
        raise ValueError(f"v0 must vanish on the first {d} coordinates")
    if np.any(v[d:] <= 0.0):
        raise ValueError(f"v0 must be positive on coordinates {d}..{n}")
    if abs(v[d:].sum() - 1.0) > DEFAULT_TOL:
        raise ValueError(f"v0 entries must sum to 1, got {v[d:].sum()!r}")
    generators = [v]
    for k in range(d):
        vertex = np.zeros(N)
        vertex[k] = 1.0
        generators.append(vertex)
    return subspace_from_basis(generators)


def sum_zero_directions(W: Subspace) -> np.ndarray:
    """Orthonormal rows spanning {w in W : sum(w) = 0}, shape (dim W - 1, N)."""
    sums = W.basis @ np.ones(W.ambient_dim)
    if np.abs(sums).max() == 0.0:
        raise PreconditionError("W lies in the sum-zero hyperplane and misses the simplex")
    _, _, vt = np.linalg.svd(sums[None, :])
    return vt[1:] @ W.basis


def simplex_chart(W: Subspace) -> SimplexChart:
    """
    Affine chart of M = W ∩ S^n of dimension dim W - 1.

    The origin is the normalized positive point of W; the tangent rows span
    the sum-zero part of W.

    Raises:
        PreconditionError: If M is empty
    """
    a = find_positive_point(W)
    if a is None:
        raise PreconditionError("W ∩ S^n is empty")
    origin = a / a.sum()
    tangent = sum_zero_directions(W)
    k = tangent.shape[0]

    lower = np.zeros(k)
    upper = np.zeros(k)
    A_ub = -tangent.T
    for i in range(k):
        axis = np.zeros(k)
        axis[i] = 1.0
        upper[i] = maximize_free_lp(axis, A_ub, origin).value
        lower[i] = -maximize_free_lp(-axis, A_ub, origin).value
    return SimplexChart(origin=origin, tangent=tangent, bounding_box=np.vstack([lower, upper]))
