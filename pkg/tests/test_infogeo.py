"""Tests for coordinates, connections, geodesics, divergences and projections."""

import numpy as np
import pytest

from core.infogeo import (
    CoordinateChart,
    GeodesicExitError,
    InteriorError,
    SimplexPoint,
    _endpoint_jacobian,
    _eta_acceleration,
    alpha_divergence,
    alpha_geodesic_bvp,
    alpha_geodesic_ivp,
    alpha_projection,
    ambient_christoffel,
    ambient_fisher_metric,
    autoparallel_residual,
    chart_coordinates,
    chart_derivatives,
    chart_point,
    christoffel,
    christoffel_second_kind,
    duality_residual,
    e_geodesic,
    eta_coords,
    eta_inverse,
    fisher_metric,
    m_geodesic,
    model_point,
    sample_interior,
    theta_coords,
    theta_inverse,
)
from core.subspace import PreconditionError, membership_residual, subspace_from_basis

ALPHAS = [-1.0, -0.5, 0.0, 0.5, 1.0]
P = SimplexPoint(np.array([0.5, 0.3, 0.2]))
Q = SimplexPoint(np.array([0.2, 0.3, 0.5]))


def test_simplex_point_validation() -> None:
    """Points must be positive and sum to one."""
    with pytest.raises(InteriorError):
        SimplexPoint(np.array([0.5, 0.6]))
    with pytest.raises(InteriorError):
        SimplexPoint(np.array([1.0, 0.0]))
    assert SimplexPoint(np.array([0.25, 0.75])).n == 1


def test_eta_coordinates() -> None:
    """eta drops the last coordinate; the inverse restores it up to rounding in 1 - sum."""
    uniform = SimplexPoint(np.full(3, 1.0 / 3.0))
    assert np.allclose(eta_coords(uniform), [1.0 / 3.0, 1.0 / 3.0])
    restored = eta_inverse(eta_coords(P)).probs
    assert np.array_equal(restored[:-1], P.probs[:-1])
    assert np.allclose(restored, P.probs, rtol=0, atol=1e-15)
    with pytest.raises(InteriorError):
        eta_inverse([0.5, 0.6])


def test_theta_coordinates(rng) -> None:
    """theta = log(p_i / p_{n+1}) with inverse through the log-partition."""
    assert np.allclose(theta_coords(np.full(3, 1.0 / 3.0)), 0.0)
    assert np.allclose(theta_coords([0.5, 0.25, 0.25]), [np.log(2.0), 0.0])
    for _ in range(20):
        p = sample_interior(rng, 4, spread=0.9)
        assert np.allclose(theta_coords(theta_inverse(theta_coords(p))), theta_coords(p), atol=1e-12)


def test_chart_round_trip(running_example) -> None:
    """chart_point inverts chart_coordinates on every chart kind."""
    for chart in (CoordinateChart.eta(2), CoordinateChart.theta(2)):
        assert np.allclose(chart_point(chart, chart_coordinates(chart, P)).probs, P.probs)
    sub = CoordinateChart.submanifold(running_example)
    p = SimplexPoint(np.array([0.2, 0.3, 0.15, 0.35]))
    assert sub.dimension == 2
    assert np.allclose(chart_point(sub, chart_coordinates(sub, p)).probs, p.probs)


def test_theta_chart_derivatives_match_finite_differences() -> None:
    """Closed-form dp and d2p agree with central differences."""
    chart = CoordinateChart.theta(2)
    x = chart_coordinates(chart, P)
    _, dp, d2p = chart_derivatives(chart, x)
    h = 1e-5
    for i in range(2):
        step = np.zeros(2)
        step[i] = h
        plus = chart_derivatives(chart, x + step)
        minus = chart_derivatives(chart, x - step)
        assert np.allclose((plus[0].probs - minus[0].probs) / (2 * h), dp[i], atol=1e-8)
        assert np.allclose((plus[1] - minus[1]) / (2 * h), d2p[i], atol=1e-8)


def test_fisher_metric_values() -> None:
    """g_11 = 1/p + 1/(1-p) for n = 1."""
    assert fisher_metric([0.5, 0.5])[0, 0] == pytest.approx(4.0)
    assert fisher_metric([0.25, 0.75])[0, 0] == pytest.approx(16.0 / 3.0)
    expected = np.diag(1.0 / P.probs[:-1]) + 1.0 / P.probs[-1]
    assert np.allclose(fisher_metric(P), expected)


def test_fisher_metric_positive_definite(rng) -> None:
    """All eigenvalues are positive in every chart."""
    for _ in range(100):
        p = sample_interior(rng, 3, spread=0.9)
        for chart in (CoordinateChart.eta(3), CoordinateChart.theta(3)):
            assert np.linalg.eigvalsh(fisher_metric(p, chart)).min() > 0


def test_affine_charts_flatten_their_connection() -> None:
    """Gamma^m vanishes in eta and Gamma^e vanishes in theta."""
    assert np.allclose(christoffel(P, -1.0, CoordinateChart.eta(2)), 0.0, atol=1e-12)
    assert np.allclose(christoffel(P, 1.0, CoordinateChart.theta(2)), 0.0, atol=1e-12)


def test_christoffel_symmetric(rng) -> None:
    """Gamma_{ij,k} is symmetric in i and j."""
    p = sample_interior(rng, 3)
    for alpha in ALPHAS:
        for chart in (CoordinateChart.eta(3), CoordinateChart.theta(3)):
            gamma = christoffel(p, alpha, chart)
            assert np.abs(gamma - gamma.transpose(1, 0, 2)).max() < 1e-12


def test_eta_acceleration_matches_christoffel_contraction(rng) -> None:
    """The integrator's closed form equals -Gamma^k_ij v^i v^j."""
    p = sample_interior(rng, 3)
    v = rng.standard_normal(3)
    for alpha in ALPHAS:
        gamma = christoffel_second_kind(p, alpha)
        expected = -np.einsum("ijk,i,j->k", gamma, v, v)
        assert np.allclose(_eta_acceleration(eta_coords(p), v, alpha), expected)


def test_closed_form_geodesics() -> None:
    """Endpoints, symmetric midpoints and affinity in the matching chart."""
    a, b = [0.8, 0.2], [0.2, 0.8]
    for geodesic in (m_geodesic, e_geodesic):
        assert np.allclose(geodesic(a, b, 0.0).probs, a)
        assert np.allclose(geodesic(a, b, 1.0).probs, b)
        assert np.allclose(geodesic(a, b, 0.5).probs, [0.5, 0.5])
    for t in np.linspace(0.0, 1.0, 5):
        expected = (1 - t) * theta_coords(P) + t * theta_coords(Q)
        assert np.allclose(theta_coords(e_geodesic(P, Q, t)), expected, atol=1e-12)
        assert m_geodesic(P, Q, t).probs.sum() == pytest.approx(1.0)


def test_ivp_mixture_is_straight() -> None:
    """alpha = -1 geodesics are straight lines in eta."""
    v = eta_coords(Q) - eta_coords(P)
    trace = alpha_geodesic_ivp(P, v, -1.0, steps=64)
    for t, row in zip(trace.times, trace.points):
        assert np.abs(row - m_geodesic(P, Q, t).probs).max() < 1e-10


def test_ivp_exponential_matches_closed_form() -> None:
    """alpha = +1 integration reproduces the geometric interpolation."""
    v = np.linalg.solve(fisher_metric(P), theta_coords(Q) - theta_coords(P))
    trace = alpha_geodesic_ivp(P, v, 1.0, steps=256)
    for t, row in zip(trace.times, trace.points):
        assert np.abs(row - e_geodesic(P, Q, t).probs).max() < 1e-6


def test_ivp_fourth_order_convergence() -> None:
    """Doubling the steps cuts the endpoint error about 16-fold."""
    v = np.linalg.solve(fisher_metric(P), theta_coords(Q) - theta_coords(P))
    errors = [
        np.abs(alpha_geodesic_ivp(P, v, 1.0, steps=s).points[-1] - Q.probs).max() for s in (16, 32)
    ]
    assert 8.0 <= errors[0] / errors[1] <= 32.0


def test_ivp_zero_velocity_and_step_floor() -> None:
    """v = 0 stays put; fewer than 16 steps is rejected."""
    trace = alpha_geodesic_ivp(P, [0.0, 0.0], 0.5, steps=16)
    assert np.allclose(trace.points, P.probs)
    with pytest.raises(ValueError):
        alpha_geodesic_ivp(P, [0.0, 0.0], 0.5, steps=8)


def test_ivp_exit_is_reported() -> None:
    """Leaving the simplex raises with the last valid state."""
    with pytest.raises(GeodesicExitError) as exc:
        alpha_geodesic_ivp(P, [2.0, 0.0], -1.0, steps=64)
    assert 0.0 < exc.value.exit_time < 1.0
    assert exc.value.position.size == 2


@pytest.mark.parametrize("alpha,closed_form", [(-1.0, m_geodesic), (1.0, e_geodesic)])
def test_bvp_matches_closed_forms(alpha, closed_form) -> None:
    """Shooting recovers the closed-form geodesics."""
    trace = alpha_geodesic_bvp(P, Q, alpha)
    assert np.abs(trace.points[-1] - Q.probs).max() < 1e-8
    for t, row in zip(trace.times[::16], trace.points[::16]):
        assert np.abs(row - closed_form(P, Q, t).probs).max() < 1e-6


def test_endpoint_jacobian_bumps_backward_at_boundary() -> None:
    """A forward bump that leaves the simplex falls back to a backward bump."""
    start = SimplexPoint(np.array([0.5, 0.5]))
    v = np.array([0.5 - 5e-7])
    target = np.array([0.9])
    residual = alpha_geodesic_ivp(start, v, -1.0, 1.0, 16).points[-1, :-1] - target
    jacobian = _endpoint_jacobian(start, v, residual, target, -1.0, 16)
    assert jacobian == pytest.approx(np.array([[1.0]]), abs=1e-6)


def test_bvp_between_far_endpoints() -> None:
    """Shooting converges between points near opposite vertices."""
    p = SimplexPoint(np.array([0.9, 0.05, 0.05]))
    q = SimplexPoint(np.array([0.05, 0.05, 0.9]))
    trace = alpha_geodesic_bvp(p, q, 1.0, steps=512)
    assert np.abs(trace.points[-1] - q.probs).max() < 1e-8
    for t, row in zip(trace.times[::64], trace.points[::64]):
        assert np.abs(row - e_geodesic(p, q, t).probs).max() < 1e-5


def test_bvp_same_endpoints_is_constant() -> None:
    """p = q gives a constant trace."""
    trace = alpha_geodesic_bvp(P, P, 0.0, steps=32)
    assert np.allclose(trace.points, P.probs)
    assert trace.iterations == 0


def test_bvp_stays_on_da_model(running_example) -> None:
    """Every alpha-geodesic between points of a DA model stays on it."""
    p = [0.2, 0.3, 0.15, 0.35]
    q = [0.1, 0.3, 0.18, 0.42]
    for alpha in ALPHAS:
        trace = alpha_geodesic_bvp(p, q, alpha, reference=running_example)
        assert trace.max_constraint_residual < 1e-6


def test_autoparallel_on_da_model(running_example) -> None:
    """A DA model is autoparallel for every alpha."""
    p = [0.2, 0.3, 0.15, 0.35]
    for alpha in ALPHAS:
        assert autoparallel_residual(running_example, p, alpha) < 1e-8


def test_autoparallel_fails_off_da(vandermonde) -> None:
    """The Vandermonde model is m-autoparallel only."""
    p = np.array([1.1, 1.2, 1.4]) / 3.7
    assert autoparallel_residual(vandermonde, p, 0.0) > 1e-3
    assert autoparallel_residual(vandermonde, p, 1.0) > 1e-3
    assert autoparallel_residual(vandermonde, p, -1.0) < 1e-10


def test_autoparallel_at_two_alphas_implies_all(rng) -> None:
    """Passing at two alphas on a DA model means passing on the whole grid."""
    W = subspace_from_basis([[1.0, 0.0, 0.0, 0.0], [0.0, 1.0, 1.0, 1.0]])
    p = model_point(W, rng)
    assert autoparallel_residual(W, p, 0.3) < 1e-8
    assert autoparallel_residual(W, p, -0.7) < 1e-8
    assert all(autoparallel_residual(W, p, alpha) < 1e-8 for alpha in ALPHAS)


def test_autoparallel_requires_point_on_model(running_example) -> None:
    """Points off the model are rejected."""
    with pytest.raises(PreconditionError):
        autoparallel_residual(running_example, [0.25, 0.25, 0.25, 0.25], 0.0)


def test_divergence_basics(rng) -> None:
    """Zero on the diagonal, the KL example and the alpha <-> -alpha duality."""
    for alpha in ALPHAS:
        assert alpha_divergence(P, P, alpha) == pytest.approx(0.0, abs=1e-12)
    kl = 0.5 * np.log(2.0) + 0.5 * np.log(2.0 / 3.0)
    assert alpha_divergence([0.5, 0.5], [0.25, 0.75], 1.0) == pytest.approx(kl)
    assert kl == pytest.approx(0.14384, abs=1e-5)
    for _ in range(20):
        p, q = sample_interior(rng, 3), sample_interior(rng, 3)
        for alpha in ALPHAS:
            assert alpha_divergence(p, q, alpha) > 0
            assert alpha_divergence(p, q, alpha) == pytest.approx(alpha_divergence(q, p, -alpha))


def test_divergence_is_continuous_at_kl() -> None:
    """The general formula tends to KL as alpha -> 1."""
    near = alpha_divergence([0.5, 0.5], [0.25, 0.75], 1.0 - 1e-7)
    assert near == pytest.approx(alpha_divergence([0.5, 0.5], [0.25, 0.75], 1.0), rel=1e-5)


def test_divergence_second_order_matches_metric() -> None:
    """D(p || p + d) is about g(d, d) / 2 for small d."""
    d = 1e-3 * np.array([1.0, -2.0, 1.0]) / np.sqrt(6.0)
    q = SimplexPoint(P.probs + d)
    quadratic = 0.5 * d[:-1] @ fisher_metric(P) @ d[:-1]
    for alpha in ALPHAS:
        assert alpha_divergence(P, q, alpha) == pytest.approx(quadratic, rel=0.05)


def test_worked_projection() -> None:
    """(0.7, 0.2, 0.1) projects to (0.45, 0.45, 0.1) on {(s, s, 1-2s)}."""
    W = subspace_from_basis([[1.0, 1.0, 0.0], [0.0, 0.0, 1.0]])
    result = alpha_projection([0.7, 0.2, 0.1], W, 1.0)
    assert np.allclose(result.point.probs, [0.45, 0.45, 0.1], atol=1e-6)
    assert result.diameter < 1e-6
    assert result.starts == 8


def test_projection_matches_grid_for_mixture_direction() -> None:
    """alpha = -1 agrees with a fine grid search."""
    W = subspace_from_basis([[1.0, 1.0, 0.0], [0.0, 0.0, 1.0]])
    p = [0.7, 0.2, 0.1]
    result = alpha_projection(p, W, -1.0)
    grid = np.arange(1, 50000) * 1e-5
    values = [alpha_divergence(p, [s, s, 1.0 - 2.0 * s], -1.0) for s in grid]
    assert result.point.probs[0] == pytest.approx(grid[int(np.argmin(values))], abs=1e-5)


def test_projection_of_point_on_model(running_example) -> None:
    """A point already on the model is its own projection."""
    p = [0.2, 0.3, 0.15, 0.35]
    for alpha in (-1.0, 0.0, 1.0):
        result = alpha_projection(p, running_example, alpha)
        assert np.allclose(result.point.probs, p, atol=1e-8)
        assert result.divergence == pytest.approx(0.0, abs=1e-12)


def test_projection_unique_on_da_model(running_example, rng) -> None:
    """Independent starts agree on a DA target."""
    for alpha in (-1.0, 0.0, 1.0):
        result = alpha_projection(sample_interior(rng, 3), running_example, alpha, rng=rng)
        assert result.diameter < 1e-6
        assert membership_residual(running_example, result.point.probs) < 1e-9


def test_duality_at_uniform_point() -> None:
    """The dual-connection identity holds at h = 1e-4."""
    uniform = SimplexPoint(np.array([0.5, 0.5]))
    for alpha in (-1.0, 0.0, 1.0):
        assert duality_residual(uniform, h=1e-4, alpha=alpha) < 1e-6


def test_duality_in_theta_chart(rng) -> None:
    """The identity holds at random points in canonical coordinates."""
    for n in (1, 2, 3):
        p = sample_interior(rng, n)
        for alpha in (-1.0, 0.0, 1.0):
            assert duality_residual(p, CoordinateChart.theta(n), h=1e-4, alpha=alpha) < 1e-6


def test_duality_residual_is_second_order() -> None:
    """Halving h quarters the residual at a generic point."""
    chart = CoordinateChart.eta(2)
    ratio = duality_residual(P, chart, h=1e-3) / duality_residual(P, chart, h=5e-4)
    assert 3.5 <= ratio <= 4.5


def test_ambient_structure() -> None:
    """x is mixture-affine and log x is exponential-affine on the orthant."""
    x = [0.5, 2.0, 3.0]
    assert np.allclose(ambient_fisher_metric(x), np.diag([2.0, 0.5, 1.0 / 3.0]))
    assert np.allclose(ambient_christoffel(x, -1.0), 0.0)
    assert np.allclose(ambient_christoffel(x, 1.0, log_coordinates=True), 0.0)
    assert not np.allclose(ambient_christoffel(x, 1.0), 0.0)
