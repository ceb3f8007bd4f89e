"""Tests for the self-test battery."""

import numpy as np

from scripts.validate import (
    SUITES,
    case_seed,
    criterion_equivalence_case,
    duality_case,
    integrator_case,
    log_affinity_case,
    round_trip_case,
    run_selftest,
    worked_projection_case,
)


def test_case_seeds_are_independent() -> None:
    """Seeds differ across suites and cases and are reproducible."""
    seeds = {case_seed(0, s, c) for s in range(3) for c in range(10)}
    assert len(seeds) == 30
    assert case_seed(5, 1, 2) == case_seed(5, 1, 2)
    assert case_seed(5, 1, 2) != case_seed(6, 1, 2)


def test_suite_names_are_unique() -> None:
    names = [suite.name for suite in SUITES]
    assert len(names) == len(set(names))


def test_quick_selftest_passes() -> None:
    """Cheap suites pass on a handful of cases."""
    summary = run_selftest(
        cases=4,
        seed=1,
        workers=2,
        only=["criterion-equivalence", "round-trip", "log-affinity", "running-example", "vandermonde"],
    )
    assert [s.name for s in summary.suites] == [
        "criterion-equivalence",
        "round-trip",
        "log-affinity",
        "running-example",
        "vandermonde",
    ]
    assert summary.suites[0].passed + summary.suites[0].skipped == 28
    assert summary.ok, summary.model_dump()


def test_selftest_is_reproducible() -> None:
    """The same master seed gives the same summary."""
    first = run_selftest(cases=2, seed=9, only=["round-trip", "log-affinity"])
    second = run_selftest(cases=2, seed=9, only=["round-trip", "log-affinity"])
    assert first == second


def test_zero_tolerance_is_caught() -> None:
    """Fault injection: tol = 0 fails the reconstruction suites."""
    summary = run_selftest(cases=4, seed=0, tol=0.0, only=["round-trip", "log-affinity"])
    assert not summary.ok
    assert all(s.failing_seeds for s in summary.suites if not s.ok)


def test_individual_cases() -> None:
    """Single cases pass for fixed seeds."""
    rng = np.random.default_rng(3)
    for index in range(6):
        assert criterion_equivalence_case(rng, 1e-9, index) in (True, None)
    assert round_trip_case(rng, 1e-9, 0)
    assert log_affinity_case(rng, 1e-9, 0)
    assert duality_case(rng, 1e-9, 0)
    assert worked_projection_case(rng, 1e-9, 0)


def test_integrator_case_with_nearby_endpoints() -> None:
    """A seed whose first endpoints nearly coincide is redrawn, not failed."""
    assert integrator_case(np.random.default_rng(4209209025), 1e-9, 0) is not False
    for seed in range(10):
        assert integrator_case(np.random.default_rng(seed), 1e-9, seed) is not False
