"""
Dualistic geometry of the probability simplex.

Coordinates, Fisher metric, alpha-connections, geodesics, alpha-divergences
and alpha-projections. Tensor computations default to the expectation chart
eta_i = p_i (i < n), in which the mixture connection vanishes.
"""

from dataclasses import dataclass
from enum import Enum
from typing import List, NamedTuple, Optional, Sequence, Tuple, Union
import logging

import numpy as np

from core.analysis import SimplexChart, simplex_chart, sum_zero_directions
from core.hadamard import DimensionMismatchError, as_positive_vector, as_vector
from core.subspace import DEFAULT_TOL, PreconditionError, Subspace, membership_residual

logger = logging.getLogger(__name__)

# Any computed point with an entry below this is outside the open simplex.
INTERIOR_FLOOR = 1e-12
SUM_TOL = 1e-12
MIN_STEPS = 16
DEFAULT_STEPS = 256
SHOOTING_TOL = 1e-8
SHOOTING_MAX_ITER = 50
SHOOTING_FD_STEP = 1e-6
CONTINUATION_STAGES = 8
PROJECTION_GRAD_TOL = 1e-10
PROJECTION_MAX_ITER = 100
DEFAULT_STARTS = 8
UNIQUENESS_TOL = 1e-4


class InteriorError(ValueError):
    """A point is not in the open probability simplex."""


class GeodesicExitError(RuntimeError):
    """An integrated geodesic left the open simplex."""

    def __init__(self, exit_time: float, position: np.ndarray, velocity: np.ndarray):
        self.exit_time = exit_time
        self.position = position
        self.velocity = velocity
        super().__init__(
            f"Geodesic left the simplex at t={exit_time:.6g}; last valid eta={position.tolist()}"
        )


class ShootingError(RuntimeError):
    """Newton shooting did not hit the target endpoint."""

    def __init__(self, miss: float, iterations: int):
        self.miss = miss
        self.iterations = iterations
        super().__init__(f"Shooting did not converge in {iterations} iterations (miss {miss:.3e})")


class ProjectionError(RuntimeError):
    """The divergence minimization failed to converge."""


class UniquenessViolationError(ProjectionError):
    """Independent starts converged to different minimizers."""

    def __init__(self, diameter: float):
        self.diameter = diameter
        super().__init__(f"Multi-start minimizers disagree: diameter {diameter:.3e}")


@dataclass(frozen=True)
class SimplexPoint:
    """A strictly positive probability vector of length n+1."""

    probs: np.ndarray

    def __post_init__(self) -> None:
        try:
            arr = np.array(as_vector(self.probs))
        except ValueError as e:
            raise InteriorError(str(e)) from e
        if arr.min() < INTERIOR_FLOOR:
            raise InteriorError(f"Entry {int(arr.argmin())} is {arr.min()!r}, not in the open simplex")
        if abs(arr.sum() - 1.0) > SUM_TOL:
            raise InteriorError(f"Entries sum to {arr.sum()!r}, not 1")
        arr.setflags(write=False)
        object.__setattr__(self, "probs", arr)

    @property
    def n(self) -> int:
        return int(self.probs.size - 1)

    @property
    def eta(self) -> np.ndarray:
        return eta_coords(self)

    @property
    def theta(self) -> np.ndarray:
        return theta_coords(self)


PointLike = Union[SimplexPoint, Sequence[float], np.ndarray]


def as_point(p: PointLike) -> SimplexPoint:
    return p if isinstance(p, SimplexPoint) else SimplexPoint(np.asarray(p, dtype=np.float64))


class ChartKind(str, Enum):
    ETA = "eta"
    THETA = "theta"
    SUBMANIFOLD = "submanifold"


@dataclass(frozen=True)
class CoordinateChart:
    """A chart of the simplex (eta, theta) or of a submanifold W ∩ S^n."""

    kind: ChartKind
    dimension: int
    ambient_dim: int
    parametrization: Optional[SimplexChart] = None

    @classmethod
    def eta(cls, n: int) -> "CoordinateChart":
        return cls(ChartKind.ETA, n, n + 1)

    @classmethod
    def theta(cls, n: int) -> "CoordinateChart":
        return cls(ChartKind.THETA, n, n + 1)

    @classmethod
    def submanifold(cls, W: Subspace) -> "CoordinateChart":
        chart = simplex_chart(W)
        return cls(ChartKind.SUBMANIFOLD, chart.dim, chart.ambient_dim, chart)


@dataclass(frozen=True)
class GeodesicTrace:
    """
    Samples of an alpha-geodesic for t in [0, t_end].

    points has shape (len(times), n+1); max_constraint_residual is set when a
    reference subspace was supplied.
    """

    alpha: float
    times: np.ndarray
    points: np.ndarray
    max_constraint_residual: Optional[float] = None
    iterations: int = 0

    def point(self, index: int) -> SimplexPoint:
        return SimplexPoint(self.points[index])

    @property
    def start(self) -> SimplexPoint:
        return self.point(0)

    @property
    def end(self) -> SimplexPoint:
        return self.point(-1)


class ProjectionResult(NamedTuple):
    point: SimplexPoint
    divergence: float
    diameter: float
    starts: int


# Coordinates


def eta_coords(p: PointLike) -> np.ndarray:
    """eta_i = p_i for the first n coordinates."""
    return as_point(p).probs[:-1].copy()


def eta_inverse(eta: Sequence[float]) -> SimplexPoint:
    """
    Append p_{n+1} = 1 - sum(eta).

    Raises:
        InteriorError: If the result is not in the open simplex
    """
    ev = np.asarray(eta, dtype=np.float64).ravel()
    return SimplexPoint(np.append(ev, 1.0 - ev.sum()))


def theta_coords(p: PointLike) -> np.ndarray:
    """theta^i = log(p_i / p_{n+1})."""
    probs = as_point(p).probs
    return np.log(probs[:-1] / probs[-1])


def log_partition(theta: Sequence[float]) -> float:
    """psi(theta) = log(1 + sum exp theta^i), evaluated without overflow."""
    tv = np.asarray(theta, dtype=np.float64).ravel()
    top = max(0.0, float(tv.max())) if tv.size else 0.0
    return top + float(np.log(np.exp(-top) + np.exp(tv - top).sum()))


def theta_inverse(theta: Sequence[float]) -> SimplexPoint:
    """p_i = exp(theta^i - psi), p_{n+1} = exp(-psi)."""
    tv = np.asarray(theta, dtype=np.float64).ravel()
    psi = log_partition(tv)
    probs = np.exp(np.append(tv, 0.0) - psi)
    return SimplexPoint(probs / probs.sum())


def default_chart(p: PointLike) -> CoordinateChart:
    return CoordinateChart.eta(as_point(p).n)


def _check_chart(chart: CoordinateChart, point: SimplexPoint) -> None:
    if chart.ambient_dim != point.probs.size:
        raise DimensionMismatchError(
            f"Chart on R^{chart.ambient_dim} used with a point of length {point.probs.size}"
        )


def chart_coordinates(chart: CoordinateChart, p: PointLike) -> np.ndarray:
    point = as_point(p)
    _check_chart(chart, point)
    if chart.kind == ChartKind.ETA:
        return eta_coords(point)
    if chart.kind == ChartKind.THETA:
        return theta_coords(point)
    return chart.parametrization.coordinates(point.probs)


def chart_point(chart: CoordinateChart, x: Sequence[float]) -> SimplexPoint:
    if chart.kind == ChartKind.ETA:
        return eta_inverse(x)
    if chart.kind == ChartKind.THETA:
        return theta_inverse(x)
    return SimplexPoint(chart.parametrization.point(x))


def _derivatives_at(chart: CoordinateChart, probs: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """First (d, N) and second (d, d, N) coordinate derivatives of p."""
    N = probs.size
    d = chart.dimension
    if chart.kind == ChartKind.ETA:
        dp = np.hstack([np.eye(d), -np.ones((d, 1))])
        return dp, np.zeros((d, d, N))
    if chart.kind == ChartKind.SUBMANIFOLD:
        return chart.parametrization.tangent.copy(), np.zeros((d, d, N))

    centered = np.eye(d, N) - probs[:d, None]
    dp = probs[None, :] * centered
    mixed = probs[:d, None] * (np.eye(d) - probs[None, :d])
    d2p = np.einsum("ik,jk->ijk", centered, dp) - mixed[:, :, None] * probs[None, None, :]
    return dp, d2p


def chart_derivatives(
    chart: CoordinateChart, x: Sequence[float]
) -> Tuple[SimplexPoint, np.ndarray, np.ndarray]:
    """The point p(x) with dp/dx (d, N) and d^2p/dx^2 (d, d, N)."""
    point = chart_point(chart, x)
    dp, d2p = _derivatives_at(chart, point.probs)
    return point, dp, d2p


# Metric and connections


def _metric_from(probs: np.ndarray, dp: np.ndarray) -> np.ndarray:
    return (dp / probs) @ dp.T


def _connections_from(
    probs: np.ndarray, dp: np.ndarray, d2p: np.ndarray
) -> Tuple[np.ndarray, np.ndarray]:
    """(Gamma^e, Gamma^m) of the first kind, indexed [i, j, k]."""
    weighted = dp / probs
    gamma_m = np.einsum("ijx,kx->ijk", d2p, weighted)
    gamma_e = gamma_m - np.einsum("ix,jx,kx->ijk", dp, dp, weighted / probs)
    return gamma_e, gamma_m


def _blend(gamma_e: np.ndarray, gamma_m: np.ndarray, alpha: float) -> np.ndarray:
    return 0.5 * (1.0 + alpha) * gamma_e + 0.5 * (1.0 - alpha) * gamma_m


def fisher_metric(p: PointLike, chart: Optional[CoordinateChart] = None) -> np.ndarray:
    """
    g_ij = sum_X d_i p(X) d_j p(X) / p(X).

    In the eta chart this is diag(1/p_i) + 1/p_{n+1}.
    """
    point = as_point(p)
    chart = chart or default_chart(point)
    _check_chart(chart, point)
    dp, _ = _derivatives_at(chart, point.probs)
    return _metric_from(point.probs, dp)


def christoffel(
    p: PointLike, alpha: float, chart: Optional[CoordinateChart] = None
) -> np.ndarray:
    """
    Gamma^(alpha)_{ij,k} = (1+alpha)/2 Gamma^e + (1-alpha)/2 Gamma^m.

    Gamma^m_{ij,k} = sum_X d_ij p d_k p / p and
    Gamma^e_{ij,k} = sum_X (d_ij p - d_i p d_j p / p) d_k p / p.
    The returned array is indexed [i, j, k] and symmetric in (i, j).
    """
    point = as_point(p)
    chart = chart or default_chart(point)
    _check_chart(chart, point)
    gamma_e, gamma_m = _connections_from(point.probs, *_derivatives_at(chart, point.probs))
    return _blend(gamma_e, gamma_m, alpha)


def christoffel_second_kind(
    p: PointLike, alpha: float, chart: Optional[CoordinateChart] = None
) -> np.ndarray:
    """Gamma^k_{ij} = g^{kl} Gamma_{ij,l}, indexed [i, j, k]."""
    point = as_point(p)
    chart = chart or default_chart(point)
    metric_inv = np.linalg.inv(fisher_metric(point, chart))
    return np.einsum("ijl,lk->ijk", christoffel(point, alpha, chart), metric_inv)


def ambient_fisher_metric(x: Sequence[float]) -> np.ndarray:
    """Metric of the positive orthant in the coordinates x itself: diag(1/x)."""
    xv = as_positive_vector(x)
    return _metric_from(xv, np.eye(xv.size))


def ambient_christoffel(
    x: Sequence[float], alpha: float, log_coordinates: bool = False
) -> np.ndarray:
    """
    Alpha-connection of the positive orthant from the same defining sums.

    The coordinates x are mixture-affine; with log_coordinates=True the
    symbols are taken in u = log x, which are exponential-affine.
    """
    xv = as_positive_vector(x)
    N = xv.size
    if log_coordinates:
        dp = np.diag(xv)
        d2p = np.zeros((N, N, N))
        d2p[np.arange(N), np.arange(N), np.arange(N)] = xv
    else:
        dp = np.eye(N)
        d2p = np.zeros((N, N, N))
    return _blend(*_connections_from(xv, dp, d2p), alpha)


# Geodesics


def m_geodesic(p: PointLike, q: PointLike, t: float) -> SimplexPoint:
    """(1-t) p + t q."""
    pp, qq = as_point(p).probs, as_point(q).probs
    return SimplexPoint((1.0 - t) * pp + t * qq)


def e_geodesic(p: PointLike, q: PointLike, t: float) -> SimplexPoint:
    """p^(1-t) q^t, normalized."""
    pp, qq = as_point(p).probs, as_point(q).probs
    log_mix = (1.0 - t) * np.log(pp) + t * np.log(qq)
    weights = np.exp(log_mix - log_mix.max())
    return SimplexPoint(weights / weights.sum())


def _eta_acceleration(eta: np.ndarray, velocity: np.ndarray, alpha: float) -> np.ndarray:
    """
    -Gamma^k_ij v^i v^j in the eta chart.

    There Gamma^m = 0, Gamma^e_{ij,k} = -delta_ijk / p_k^2 + 1 / p_{n+1}^2 and
    g^{-1} = diag(p) - p p^T, so no linear solve is needed.
    """
    probs = np.append(eta, 1.0 - eta.sum())
    if probs.min() < INTERIOR_FLOOR:
        raise InteriorError("Stage point outside the open simplex")
    head, last = probs[:-1], probs[-1]
    force = 0.5 * (1.0 + alpha) * (-(velocity**2) / head**2 + velocity.sum() ** 2 / last**2)
    return -(head * force - head * (head @ force))


def _constraint_residual(reference: Optional[Subspace], points: np.ndarray) -> Optional[float]:
    if reference is None:
        return None
    return max(membership_residual(reference, row) for row in points)


def alpha_geodesic_ivp(
    p: PointLike,
    v: Sequence[float],
    alpha: float,
    t_end: float = 1.0,
    steps: int = DEFAULT_STEPS,
    reference: Optional[Subspace] = None,
) -> GeodesicTrace:
    """
    Integrate the alpha-geodesic equation in the eta chart with classical RK4.

    Args:
        p: Initial point
        v: Initial velocity in eta coordinates (length n)
        alpha: Connection parameter
        t_end: Final parameter value
        steps: Number of fixed steps, at least 16
        reference: Optional subspace whose membership residual is tracked

    Raises:
        GeodesicExitError: If the trajectory leaves the open simplex
    """
    if steps < MIN_STEPS:
        raise ValueError(f"At least {MIN_STEPS} steps are required, got {steps}")
    start = as_point(p)
    x = eta_coords(start)
    u = np.asarray(v, dtype=np.float64).ravel()
    if u.size != x.size:
        raise DimensionMismatchError(f"Velocity has length {u.size}, expected {x.size}")

    h = t_end / steps
    times = np.linspace(0.0, t_end, steps + 1)
    points = np.empty((steps + 1, x.size + 1))
    points[0] = start.probs

    def rhs(state_x: np.ndarray, state_u: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        return state_u, _eta_acceleration(state_x, state_u, alpha)

    for n in range(steps):
        try:
            k1x, k1u = rhs(x, u)
            k2x, k2u = rhs(x + 0.5 * h * k1x, u + 0.5 * h * k1u)
            k3x, k3u = rhs(x + 0.5 * h * k2x, u + 0.5 * h * k2u)
            k4x, k4u = rhs(x + h * k3x, u + h * k3u)
        except InteriorError:
            raise GeodesicExitError(float(times[n]), x.copy(), u.copy()) from None
        x_next = x + h / 6.0 * (k1x + 2 * k2x + 2 * k3x + k4x)
        u_next = u + h / 6.0 * (k1u + 2 * k2u + 2 * k3u + k4u)
        probs = np.append(x_next, 1.0 - x_next.sum())
        if probs.min() < INTERIOR_FLOOR:
            raise GeodesicExitError(float(times[n]), x.copy(), u.copy())
        x, u = x_next, u_next
        points[n + 1] = probs

    return GeodesicTrace(
        alpha=alpha,
        times=times,
        points=points,
        max_constraint_residual=_constraint_residual(reference, points),
    )


def _endpoint_miss(
    p: SimplexPoint, v: np.ndarray, target: np.ndarray, alpha: float, steps: int
) -> Tuple[Optional[np.ndarray], float]:
    try:
        trace = alpha_geodesic_ivp(p, v, alpha, 1.0, steps)
    except GeodesicExitError:
        return None, float("inf")
    residual = trace.points[-1, :-1] - target
    return residual, float(np.abs(residual).max())


def _endpoint_jacobian(
    start: SimplexPoint,
    v: np.ndarray,
    residual: np.ndarray,
    target: np.ndarray,
    alpha: float,
    steps: int,
) -> np.ndarray:
    """
    Finite-difference Jacobian of the endpoint map at v.

    Each column uses a forward bump, then a backward bump, then shrinking
    bumps when the bumped trajectory leaves the simplex.

    Raises:
        ShootingError: If no bump of a column stays inside
    """
    jacobian = np.empty((v.size, v.size))
    for j in range(v.size):
        for scale in (1.0, -1.0, 1e-3, -1e-3):
            bump = scale * SHOOTING_FD_STEP
            bumped = v.copy()
            bumped[j] += bump
            column, _ = _endpoint_miss(start, bumped, target, alpha, steps)
            if column is not None:
                jacobian[:, j] = (column - residual) / bump
                break
        else:
            raise ShootingError(float(np.abs(residual).max()), 0)
    return jacobian


def _shoot(
    start: SimplexPoint,
    target: np.ndarray,
    alpha: float,
    v: np.ndarray,
    steps: int,
    tol: float,
    max_iter: int,
) -> Tuple[np.ndarray, float, int]:
    """Damped Newton on the initial velocity; returns (velocity, miss, iterations)."""
    residual, miss = _endpoint_miss(start, v, target, alpha, steps)
    if residual is None:
        raise ShootingError(miss, 0)

    iteration = 0
    while miss > tol:
        if iteration >= max_iter:
            raise ShootingError(miss, iteration)
        iteration += 1
        jacobian = _endpoint_jacobian(start, v, residual, target, alpha, steps)
        try:
            step = np.linalg.solve(jacobian, -residual)
        except np.linalg.LinAlgError:
            raise ShootingError(miss, iteration) from None
        # step length capped at max|v| + 1
        limit = np.abs(v).max() + 1.0
        damping = min(1.0, limit / max(float(np.abs(step).max()), 1e-300))
        while True:
            candidate = v + damping * step
            new_residual, new_miss = _endpoint_miss(start, candidate, target, alpha, steps)
            if new_miss < miss:
                break
            damping *= 0.5
            if damping < 1e-8:
                raise ShootingError(miss, iteration)
        v, residual, miss = candidate, new_residual, new_miss
    return v, miss, iteration


def alpha_geodesic_bvp(
    p: PointLike,
    q: PointLike,
    alpha: float,
    steps: int = DEFAULT_STEPS,
    reference: Optional[Subspace] = None,
    tol: float = SHOOTING_TOL,
    max_iter: int = SHOOTING_MAX_ITER,
) -> GeodesicTrace:
    """
    Alpha-geodesic from p to q by Newton shooting on the initial eta-velocity.

    The Jacobian of the endpoint map is taken by finite differences and a
    step is halved while it does not reduce the miss distance. When shooting
    from the straight-line guess fails, alpha is continued from -1, where the
    straight line is exact, to the requested value.

    Raises:
        ShootingError: If the endpoint is not hit within tol (eta max-norm)
    """
    start, end = as_point(p), as_point(q)
    if start.probs.size != end.probs.size:
        raise DimensionMismatchError("Endpoints live in simplices of different dimension")
    target = eta_coords(end)
    straight = target - eta_coords(start)
    try:
        v, miss, iteration = _shoot(start, target, alpha, straight, steps, tol, max_iter)
    except ShootingError as direct:
        if alpha == -1.0:
            raise
        logger.info(f"Direct shooting failed ({direct}); continuing in alpha from -1")
        v, iteration = straight, 0
        try:
            for stage in np.linspace(-1.0, alpha, CONTINUATION_STAGES + 1)[1:]:
                v, miss, used = _shoot(start, target, float(stage), v, steps, tol, max_iter)
                iteration += used
        except ShootingError:
            raise direct from None

    trace = alpha_geodesic_ivp(start, v, alpha, 1.0, steps, reference)
    logger.info(f"Shooting alpha={alpha}: miss {miss:.3e} after {iteration} Newton steps")
    return GeodesicTrace(
        alpha=alpha,
        times=trace.times,
        points=trace.points,
        max_constraint_residual=trace.max_constraint_residual,
        iterations=iteration,
    )


# Submanifolds


def autoparallel_residual(W: Subspace, p: PointLike, alpha: float) -> float:
    """
    Largest normal component of the alpha-covariant derivative of tangent fields at p.

    Tangent fields are constant in eta, so the covariant derivative of t_b
    along t_a is Gamma^k_ij t_a^i t_b^j. Normal parts are taken with respect
    to the Fisher metric and measured in its norm over a g-orthonormal
    tangent basis. Zero up to rounding iff M = W ∩ S^n is alpha-autoparallel at p.

    Raises:
        PreconditionError: If p is not in W
    """
    point = as_point(p)
    residual = membership_residual(W, point.probs)
    if residual > DEFAULT_TOL:
        raise PreconditionError(f"Point is not on the model (membership residual {residual:.3e})")
    tangent = sum_zero_directions(W)[:, :-1]
    if tangent.shape[0] == 0:
        return 0.0

    metric = fisher_metric(point)
    gram = tangent @ metric @ tangent.T
    frame = np.linalg.solve(np.linalg.cholesky(gram), tangent)
    gamma = christoffel_second_kind(point, alpha)

    worst = 0.0
    for a in range(frame.shape[0]):
        for b in range(a, frame.shape[0]):
            derivative = np.einsum("ijk,i,j->k", gamma, frame[a], frame[b])
            along = frame @ metric @ derivative
            normal = derivative - along @ frame
            worst = max(worst, float(np.sqrt(max(normal @ metric @ normal, 0.0))))
    return worst


# Divergences and projections


def alpha_divergence(p: PointLike, q: PointLike, alpha: float) -> float:
    """
    D^(alpha)(p||q) = 4/(1-alpha^2) (1 - sum p^((1+alpha)/2) q^((1-alpha)/2)).

    alpha = 1 gives sum p log(p/q) and alpha = -1 gives sum q log(q/p), the
    limits of the general formula.
    """
    pp, qq = as_point(p).probs, as_point(q).probs
    if pp.size != qq.size:
        raise DimensionMismatchError("Points live in simplices of different dimension")
    if alpha == 1.0:
        return float(np.sum(pp * np.log(pp / qq)))
    if alpha == -1.0:
        return float(np.sum(qq * np.log(qq / pp)))
    a, b = 0.5 * (1.0 + alpha), 0.5 * (1.0 - alpha)
    return float(4.0 / (1.0 - alpha**2) * (1.0 - np.sum(pp**a * qq**b)))


def _divergence_derivatives(
    p: np.ndarray, q: np.ndarray, alpha: float
) -> Tuple[float, np.ndarray, np.ndarray]:
    """Value, q-gradient and diagonal q-Hessian of D^(alpha)(p||q)."""
    if alpha == 1.0:
        return float(np.sum(p * np.log(p / q))), -p / q, p / q**2
    if alpha == -1.0:
        return float(np.sum(q * np.log(q / p))), np.log(q / p) + 1.0, 1.0 / q
    a, b = 0.5 * (1.0 + alpha), 0.5 * (1.0 - alpha)
    c = 4.0 / (1.0 - alpha**2)
    terms = p**a * q**b
    return float(c * (1.0 - terms.sum())), -c * b * terms / q, c * b * (1.0 - b) * terms / q**2


def _newton_minimize(
    p: np.ndarray, chart: SimplexChart, alpha: float, xi: np.ndarray
) -> Tuple[np.ndarray, float]:
    T = chart.tangent
    q = chart.point(xi)
    value, grad_q, hess_q = _divergence_derivatives(p, q, alpha)
    for _ in range(PROJECTION_MAX_ITER):
        gradient = T @ grad_q
        if np.abs(gradient).max() <= PROJECTION_GRAD_TOL:
            return xi, value
        hessian = (T * hess_q) @ T.T
        step = -np.linalg.solve(hessian, gradient)
        damping = 1.0
        while damping > 1e-12:
            candidate = xi + damping * step
            q_new = chart.point(candidate)
            if q_new.min() >= INTERIOR_FLOOR:
                new_value, new_grad, new_hess = _divergence_derivatives(p, q_new, alpha)
                if new_value <= value + 1e-14 * max(1.0, abs(value)):
                    break
            damping *= 0.5
        else:
            break
        xi, q, value, grad_q, hess_q = candidate, q_new, new_value, new_grad, new_hess
    gradient = T @ grad_q
    if np.abs(gradient).max() <= 1e3 * PROJECTION_GRAD_TOL:
        return xi, value
    raise ProjectionError(
        f"Newton did not converge: gradient {np.abs(gradient).max():.3e} after "
        f"{PROJECTION_MAX_ITER} iterations"
    )


def _draw_start(chart: SimplexChart, rng: np.random.Generator) -> np.ndarray:
    floor = 0.01 * chart.origin.min()
    xi = rng.uniform(chart.bounding_box[0], chart.bounding_box[1])
    while chart.point(xi).min() < floor:
        xi = 0.5 * xi
    return xi


def alpha_projection(
    p: PointLike,
    W: Subspace,
    alpha: float,
    starts: int = DEFAULT_STARTS,
    rng: Optional[np.random.Generator] = None,
    unique_tol: Optional[float] = UNIQUENESS_TOL,
) -> ProjectionResult:
    """
    argmin over q in M = W ∩ S^n of D^(alpha)(p||q).

    Damped Newton on the chart parameters from several starts drawn from the
    chart's feasible box. The diameter of the set of minimizers is reported.

    Args:
        p: Point to project
        W: Subspace defining the target model
        alpha: Divergence parameter
        starts: Number of independent starts
        rng: Generator for the starts
        unique_tol: Diameter above which the minimizers are declared
            inconsistent; None disables the check

    Raises:
        PreconditionError: If M is empty
        ProjectionError: If a start fails to converge
        UniquenessViolationError: If the minimizers disagree beyond unique_tol
    """
    point = as_point(p)
    if point.probs.size != W.ambient_dim:
        raise DimensionMismatchError("Point and model live in different dimensions")
    rng = rng if rng is not None else np.random.default_rng(0)
    chart = simplex_chart(W)
    if chart.dim == 0:
        q = SimplexPoint(chart.origin)
        return ProjectionResult(q, alpha_divergence(point, q, alpha), 0.0, 1)

    minimizers: List[np.ndarray] = []
    values: List[float] = []
    for _ in range(starts):
        xi, value = _newton_minimize(point.probs, chart, alpha, _draw_start(chart, rng))
        minimizers.append(chart.point(xi))
        values.append(value)

    stacked = np.vstack(minimizers)
    diameter = float(
        max(np.linalg.norm(a - b) for a in stacked for b in stacked) if len(stacked) > 1 else 0.0
    )
    if unique_tol is not None and diameter > unique_tol:
        raise UniquenessViolationError(diameter)
    best = int(np.argmin(values))
    logger.info(f"alpha={alpha} projection: divergence {values[best]:.6g}, diameter {diameter:.3e}")
    return ProjectionResult(SimplexPoint(stacked[best]), values[best], diameter, starts)


def duality_residual(
    p: PointLike, chart: Optional[CoordinateChart] = None, h: float = 1e-4, alpha: float = 1.0
) -> float:
    """
    max |d_i g_jk - Gamma^(alpha)_{ij,k} - Gamma^(-alpha)_{ik,j}| over all index triples.

    The left side uses central differences of step h in the chart coordinates.
    """
    if h <= 0:
        raise ValueError(f"Step must be positive, got {h}")
    point = as_point(p)
    chart = chart or default_chart(point)
    x = chart_coordinates(chart, point)
    d = chart.dimension

    derivative = np.empty((d, d, d))
    for i in range(d):
        shift = np.zeros(d)
        shift[i] = h
        upper = fisher_metric(chart_point(chart, x + shift), chart)
        lower = fisher_metric(chart_point(chart, x - shift), chart)
        derivative[i] = (upper - lower) / (2.0 * h)

    forward = christoffel(point, alpha, chart)
    dual = christoffel(point, -alpha, chart)
    expected = forward + np.transpose(dual, (0, 2, 1))
    return float(np.abs(derivative - expected).max())


def sample_interior(rng: np.random.Generator, n: int, spread: float = 0.5) -> SimplexPoint:
    """Random point with entries bounded away from the boundary."""
    weights = rng.uniform(1.0 - spread, 1.0 + spread, n + 1)
    return SimplexPoint(weights / weights.sum())


def model_point(W: Subspace, rng: np.random.Generator) -> SimplexPoint:
    """Random point of M = W ∩ S^n drawn inside the chart domain."""
    chart = simplex_chart(W)
    if chart.dim == 0:
        return SimplexPoint(chart.origin)
    return SimplexPoint(chart.point(_draw_start(chart, rng)))
