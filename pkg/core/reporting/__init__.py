"""Report assembly shared by the CLI commands and the batch script."""

from pathlib import Path
from typing import Dict, List, Optional, TextIO, Union
import csv
import logging

import numpy as np
import pydantic

from core import __version__
from core.analysis import BASE_POINT_TOL, SamplingError, analyze, log_affine_verify
from core.infogeo import (
    DEFAULT_STARTS,
    PROJECTION_GRAD_TOL,
    SHOOTING_TOL,
    UNIQUENESS_TOL,
    GeodesicTrace,
    PointLike,
    alpha_projection,
    as_point,
    autoparallel_residual,
)
from core.models import ModelSpecFile, ProjectionReport, ReportFile, Residuals, Verdict
from core.subspace import Subspace, membership_residual

logger = logging.getLogger(__name__)

AUTOPARALLEL_ALPHAS = (-1.0, 0.0, 1.0)


def versions() -> Dict[str, str]:
    return {"daprobe": __version__, "numpy": np.__version__, "pydantic": pydantic.VERSION}


def alpha_key(alpha: float) -> str:
    return f"{alpha:g}"


def build_report(
    spec: ModelSpecFile, tol: float, seed: int = 0, samples: int = 200
) -> ReportFile:
    """
    Analyze a model spec and collect every residual into a report.

    Log-affinity and autoparallel residuals are evaluated at the base point
    for DA and NotDA verdicts; the other verdicts carry no residuals.
    """
    W = spec.subspace(tol)
    da = analyze(W, tol, base_point=spec.base_point, seed=seed)
    warnings = list(da.warnings)
    residuals = Residuals(closure=da.closure_residual_max, base_point=da.base_point_residual)

    if da.verdict in (Verdict.DOUBLY_AUTOPARALLEL, Verdict.NOT_DA):
        a = np.asarray(da.base_point)
        try:
            residuals.log_affine = log_affine_verify(
                W, a, samples=samples, tol=tol, rng=np.random.default_rng(seed)
            )
        except SamplingError as e:
            logger.warning(f"Log-affine sampling failed: {e}")
            warnings.append(str(e))
        p = as_point(a / a.sum())
        residuals.autoparallel = {
            alpha_key(alpha): autoparallel_residual(W, p, alpha) for alpha in AUTOPARALLEL_ALPHAS
        }

    return ReportFile(
        verdict=da.verdict,
        ambient_dim=da.ambient_dim,
        dim=da.dim,
        basis=[list(row) for row in spec.basis],
        base_point=da.base_point,
        canonical=da.canonical,
        cross_check_agreed=da.cross_check_agreed,
        residuals=residuals,
        warnings=warnings,
        labels=spec.labels,
        versions=versions(),
        tolerances={
            "tol": tol,
            "seed": seed,
            "samples": samples,
            "base_point": BASE_POINT_TOL,
        },
    )


def build_projection_report(
    point: PointLike,
    W: Subspace,
    alpha: float,
    starts: int = DEFAULT_STARTS,
    seed: int = 0,
) -> ProjectionReport:
    point = as_point(point)
    result = alpha_projection(point, W, alpha, starts=starts, rng=np.random.default_rng(seed))
    return ProjectionReport(
        alpha=alpha,
        point=point.probs.tolist(),
        minimizer=result.point.probs.tolist(),
        divergence=result.divergence,
        agreement_diameter=result.diameter,
        starts=result.starts,
        tolerances={
            "gradient": PROJECTION_GRAD_TOL,
            "uniqueness": UNIQUENESS_TOL,
            "seed": seed,
        },
    )


def trace_residuals(trace: GeodesicTrace, reference: Optional[Subspace]) -> List[float]:
    """Per-sample constraint residual: membership in the model, else |sum(p) - 1|."""
    if reference is not None:
        return [membership_residual(reference, row) for row in trace.points]
    return [abs(float(row.sum()) - 1.0) for row in trace.points]


def write_trace(
    trace: GeodesicTrace, out: Union[str, Path, TextIO], reference: Optional[Subspace] = None
) -> float:
    """
    Write a trace as comma-separated rows t, p_1..p_N, constraint_residual.

    Returns:
        The largest constraint residual
    """
    residuals = trace_residuals(trace, reference)
    N = trace.points.shape[1]
    header = ["t"] + [f"p_{i + 1}" for i in range(N)] + ["constraint_residual"]

    def emit(handle: TextIO) -> None:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(header)
        for t, row, residual in zip(trace.times, trace.points, residuals):
            writer.writerow([repr(float(t))] + [repr(float(x)) for x in row] + [repr(residual)])

    if isinstance(out, (str, Path)):
        with open(out, "w", newline="") as f:
            emit(f)
    else:
        emit(out)
    logger.info(f"Trace written: {len(residuals)} samples, shooting tolerance {SHOOTING_TOL}")
    return max(residuals)
