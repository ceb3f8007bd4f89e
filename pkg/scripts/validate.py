#!/usr/bin/env python
"""
Self-test battery for daprobe.

Every suite runs independent cases, each with its own seed derived from the
master seed, and reports pass/fail counts plus the seeds of failing cases.
Geodesic and projection solver failures count as skipped (inconclusive),
not as failures.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, List, Optional, Sequence
import logging
import sys

import numpy as np

from core.analysis import (
    base_point_residual,
    classify_blocks,
    closure_check,
    analyze,
    denormalization_residual,
    generate_vertex_span,
    log_affine_model,
    log_affine_verify,
    random_canonical,
    second_base_point,
)
from core.hadamard import vandermonde_gap
from core.infogeo import (
    CoordinateChart,
    GeodesicExitError,
    ProjectionError,
    ShootingError,
    alpha_divergence,
    alpha_geodesic_bvp,
    alpha_geodesic_ivp,
    alpha_projection,
    autoparallel_residual,
    duality_residual,
    e_geodesic,
    fisher_metric,
    model_point,
    sample_interior,
    theta_coords,
)
from core.models import SelftestSummary, SuiteResult, Verdict
from core.subspace import (
    Subspace,
    affine_equal,
    find_positive_point,
    random_element,
    scale_by_point,
    subspace_from_basis,
)

logger = logging.getLogger(__name__)

ALPHA_GRID = (-1.0, -0.5, 0.0, 0.5, 1.0)
PROJECTION_ALPHAS = (-1.0, 0.0, 1.0)
AUTOPARALLEL_TOL = 1e-8
CONTAINMENT_TOL = 1e-6
AGREEMENT_TOL = 1e-6
AFFINE_TOL = 1e-8
MIN_ENDPOINT_SEPARATION = 0.5
MAX_ENDPOINT_DRAWS = 100
ROUNDOFF_FLOOR = 1e-12

# A case returns True (pass), False (fail) or None (inconclusive).
CaseFn = Callable[[np.random.Generator, float, int], Optional[bool]]


@dataclass(frozen=True)
class Suite:
    name: str
    run_case: CaseFn
    count: Callable[[int], int]


def case_seed(master: int, suite_index: int, case: int) -> int:
    return int(np.random.SeedSequence([master, suite_index, case]).generate_state(1)[0])


def vandermonde_subspace() -> Subspace:
    return subspace_from_basis([[1.0, 1.0, 1.0], [1.0, 2.0, 4.0]])


def running_example_subspace() -> Subspace:
    return generate_vertex_span(3, 2, [0.0, 0.0, 0.3, 0.7])


def criterion_equivalence_case(rng: np.random.Generator, tol: float, index: int) -> Optional[bool]:
    N = 3 + index % 7
    dim = int(rng.integers(1, N))
    canonical = index % 2 == 0
    if canonical:
        W = random_canonical(rng, N, dim)[0]
    else:
        positive = rng.uniform(0.1, 1.0, N)
        W = subspace_from_basis([positive] + [rng.standard_normal(N) for _ in range(dim - 1)])
    a = find_positive_point(W)
    if a is None:
        return None
    closed = closure_check(W, a, tol).closed
    classified = classify_blocks(W, a, tol) is not None
    if canonical and not classified:
        return False
    return closed == classified


def round_trip_case(rng: np.random.Generator, tol: float, index: int) -> Optional[bool]:
    N = int(rng.integers(3, 10))
    dim = int(rng.integers(1, N))
    W, q, sizes, _, _ = random_canonical(rng, N, dim)
    a = find_positive_point(W)
    form = classify_blocks(W, a, tol)
    if form is None or (form.q, form.r, form.block_sizes) != (q, len(sizes), sizes):
        return False
    constructed = W.original_basis.sum(axis=0)
    if affine_equal(log_affine_model(W, a), log_affine_model(W, constructed)) >= AFFINE_TOL:
        return False
    # every element of V repeats a coordinate
    x = random_element(scale_by_point(W, a, invert=True), rng)
    return vandermonde_gap(x) < 1e-9


def log_affinity_case(rng: np.random.Generator, tol: float, index: int) -> Optional[bool]:
    N = int(rng.integers(3, 10))
    W = random_canonical(rng, N, int(rng.integers(1, N)))[0]
    a = find_positive_point(W)
    if log_affine_verify(W, a, samples=200, tol=tol, rng=rng) > tol:
        return False
    if base_point_residual(W, a, second_base_point(W, a, rng)) >= AFFINE_TOL:
        return False
    return denormalization_residual(W, a, model_point(W, rng).probs) <= max(tol, 1e-12)


def running_example_case(rng: np.random.Generator, tol: float, index: int) -> Optional[bool]:
    report = analyze(running_example_subspace(), tol)
    form = report.canonical
    return (
        report.verdict == Verdict.DOUBLY_AUTOPARALLEL
        and form is not None
        and (form.q, form.r, form.block_sizes) == (2, 1, [2])
        and form.permutation == [0, 1, 2, 3]
    )


def vandermonde_case(rng: np.random.Generator, tol: float, index: int) -> Optional[bool]:
    W = vandermonde_subspace()
    e = np.ones(3)
    if analyze(W, tol).verdict != Verdict.NOT_DA:
        return False
    if closure_check(W, e, tol).closed or classify_blocks(W, e, tol) is not None:
        return False
    if log_affine_verify(W, e, samples=200, tol=tol, rng=rng) < 1e-3:
        return False
    return autoparallel_residual(W, model_point(W, rng), 0.0) > 1e-3


def all_alpha_case(rng: np.random.Generator, tol: float, index: int) -> Optional[bool]:
    N = int(rng.integers(3, 6))
    W = random_canonical(rng, N, int(rng.integers(2, N)))[0]
    p, q = model_point(W, rng), model_point(W, rng)
    for alpha in ALPHA_GRID:
        if autoparallel_residual(W, p, alpha) >= AUTOPARALLEL_TOL:
            return False
    try:
        for alpha in ALPHA_GRID:
            trace = alpha_geodesic_bvp(p, q, alpha, steps=256, reference=W)
            if trace.max_constraint_residual >= CONTAINMENT_TOL:
                return False
        target = sample_interior(rng, N - 1)
        for alpha in PROJECTION_ALPHAS:
            result = alpha_projection(target, W, alpha, rng=rng, unique_tol=None)
            if result.diameter >= AGREEMENT_TOL:
                return False
    except (ShootingError, GeodesicExitError, ProjectionError) as e:
        logger.warning(f"Inconclusive case {index}: {e}")
        return None
    return True


def integrator_case(rng: np.random.Generator, tol: float, index: int) -> Optional[bool]:
    n = int(rng.integers(1, 4))
    p = sample_interior(rng, n)
    for _ in range(MAX_ENDPOINT_DRAWS):
        q = sample_interior(rng, n)
        if np.linalg.norm(theta_coords(q) - theta_coords(p)) >= MIN_ENDPOINT_SEPARATION:
            break
    else:
        return None
    v = np.linalg.solve(fisher_metric(p), theta_coords(q) - theta_coords(p))

    def endpoint_error(steps: int) -> float:
        trace = alpha_geodesic_ivp(p, v, 1.0, 1.0, steps)
        return float(np.abs(trace.points[-1] - q.probs).max())

    try:
        coarse, fine = endpoint_error(16), endpoint_error(32)
    except GeodesicExitError as e:
        logger.warning(f"Inconclusive case {index}: {e}")
        return None
    if fine < ROUNDOFF_FLOOR:
        # error already at rounding level
        return None
    if not 8.0 <= coarse / fine <= 32.0:
        return False
    trace = alpha_geodesic_ivp(p, v, 1.0, 1.0, 256)
    closed = np.vstack([e_geodesic(p, q, t).probs for t in trace.times])
    if np.abs(trace.points - closed).max() >= 1e-6:
        return False
    straight = alpha_geodesic_ivp(p, q.probs[:-1] - p.probs[:-1], -1.0, 1.0, 256)
    return float(np.abs(straight.points[-1] - q.probs).max()) < 1e-10


def duality_case(rng: np.random.Generator, tol: float, index: int) -> Optional[bool]:
    n = 1 + index % 3
    p = sample_interior(rng, n)
    theta, eta = CoordinateChart.theta(n), CoordinateChart.eta(n)
    for alpha in PROJECTION_ALPHAS:
        # third metric derivatives are cumulants in theta, so the bound is uniform there
        if duality_residual(p, theta, h=1e-4, alpha=alpha) >= 1e-6:
            return False
        coarse = duality_residual(p, eta, h=1e-3, alpha=alpha)
        ratio = coarse / duality_residual(p, eta, h=5e-4, alpha=alpha)
        if not 3.5 <= ratio <= 4.5:
            return False
    return True


def worked_projection_case(rng: np.random.Generator, tol: float, index: int) -> Optional[bool]:
    W = subspace_from_basis([[1.0, 1.0, 0.0], [0.0, 0.0, 1.0]])
    p = np.array([0.7, 0.2, 0.1])
    result = alpha_projection(p, W, 1.0, rng=rng)
    if np.abs(result.point.probs - np.array([0.45, 0.45, 0.1])).max() >= 1e-6:
        return False
    grid = np.arange(1, 50000) * 1e-5
    values = [alpha_divergence(p, [s, s, 1.0 - 2.0 * s], 1.0) for s in grid]
    s_grid = grid[int(np.argmin(values))]
    return abs(s_grid - result.point.probs[0]) <= 1e-5


SUITES: List[Suite] = [
    Suite("criterion-equivalence", criterion_equivalence_case, lambda c: 7 * c),
    Suite("round-trip", round_trip_case, lambda c: max(1, c // 2)),
    Suite("log-affinity", log_affinity_case, lambda c: max(1, c // 2)),
    Suite("running-example", running_example_case, lambda c: 1),
    Suite("vandermonde", vandermonde_case, lambda c: 1),
    Suite("all-alpha", all_alpha_case, lambda c: max(1, c // 20)),
    Suite("integrator", integrator_case, lambda c: max(1, c // 50)),
    Suite("duality", duality_case, lambda c: max(3, c // 50)),
    Suite("worked-projection", worked_projection_case, lambda c: 1),
]


def run_suite(
    suite_index: int, suite: Suite, cases: int, seed: int, tol: float, workers: int
) -> SuiteResult:
    """Run one suite's cases on a thread pool; results are collected in case order."""
    count = suite.count(cases)
    seeds = [case_seed(seed, suite_index, i) for i in range(count)]

    def run_one(i: int) -> Optional[bool]:
        try:
            return suite.run_case(np.random.default_rng(seeds[i]), tol, i)
        except Exception as e:
            logger.warning(f"{suite.name} case {i} (seed {seeds[i]}) raised {type(e).__name__}: {e}")
            return False

    with ThreadPoolExecutor(max_workers=max(1, workers)) as executor:
        outcomes = list(executor.map(run_one, range(count)))

    result = SuiteResult(name=suite.name)
    for i, outcome in enumerate(outcomes):
        if outcome is None:
            result.skipped += 1
        elif outcome:
            result.passed += 1
        else:
            result.failed += 1
            result.failing_seeds.append(seeds[i])
    logger.info(f"{suite.name}: {result.passed} passed, {result.failed} failed, {result.skipped} skipped")
    return result


def run_selftest(
    cases: int = 1000,
    seed: int = 0,
    tol: float = 1e-9,
    workers: int = 4,
    only: Optional[Sequence[str]] = None,
) -> SelftestSummary:
    """Run the battery (optionally only the named suites) and collect a summary."""
    summary = SelftestSummary(seed=seed, cases=cases, tolerance=tol)
    for index, suite in enumerate(SUITES):
        if only is not None and suite.name not in only:
            continue
        summary.suites.append(run_suite(index, suite, cases, seed, tol, workers))
    return summary


def print_summary(summary: SelftestSummary) -> None:
    print("=" * 60)
    print(f"daprobe self-test (seed {summary.seed}, cases {summary.cases}, tol {summary.tolerance:g})")
    print("=" * 60)
    for result in summary.suites:
        mark = "✓" if result.ok else "✗"
        line = f"{mark} {result.name}: {result.passed} passed, {result.failed} failed"
        if result.skipped:
            line += f", {result.skipped} inconclusive"
        print(line)
        if result.failing_seeds:
            print(f"    failing seeds: {', '.join(str(s) for s in result.failing_seeds)}")
    print("=" * 60)
    if summary.ok:
        print("✓ All suites passed")
    else:
        failed = sum(1 for r in summary.suites if not r.ok)
        print(f"✗ {failed} suite(s) failed")


if __name__ == "__main__":
    result = run_selftest(cases=int(sys.argv[1]) if len(sys.argv) > 1 else 1000)
    print_summary(result)
    sys.exit(0 if result.ok else 1)
