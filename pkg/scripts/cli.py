#!/usr/bin/env python3
"""daprobe CLI - decide, classify and probe doubly autoparallel models of the simplex."""

import argparse
import json
import logging
import os
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional

import numpy as np

from core.analysis import CriterionDisagreementError, SamplingError
from core.analysis import generate_canonical, generate_vertex_span
from core.config import NUMERICS_KEYS, get_config_path, get_numerics_config, set_numerics_config
from core.hadamard import DimensionMismatchError, NotInvertibleError
from core.infogeo import (
    GeodesicExitError,
    InteriorError,
    ProjectionError,
    ShootingError,
    SimplexPoint,
    alpha_geodesic_bvp,
)
from core.models import ModelSpecFile, SpecParseError, Verdict, dump_json, load_model_spec
from core.reporting import build_projection_report, build_report, write_trace
from core.subspace import EmptySubspaceError, PreconditionError, SolverError, membership_residual

logger = logging.getLogger("daprobe")

EXIT_OK = 0
EXIT_NOT_DA = 1
EXIT_NO_POSITIVE_POINT = 2
EXIT_INPUT_ERROR = 3
EXIT_NUMERICAL_ERROR = 4
EXIT_SELFTEST_FAILED = 5

VERDICT_EXIT = {
    Verdict.DOUBLY_AUTOPARALLEL: EXIT_OK,
    Verdict.TRIVIAL_FULL_SPACE: EXIT_OK,
    Verdict.NOT_DA: EXIT_NOT_DA,
    Verdict.NO_POSITIVE_POINT: EXIT_NO_POSITIVE_POINT,
}

INPUT_ERRORS = (
    SpecParseError,
    PreconditionError,
    DimensionMismatchError,
    NotInvertibleError,
    EmptySubspaceError,
    InteriorError,
    FileNotFoundError,
    KeyError,
    ValueError,
)
NUMERICAL_ERRORS = (
    SolverError,
    CriterionDisagreementError,
    SamplingError,
    GeodesicExitError,
    ShootingError,
    ProjectionError,
)


def parse_vector(text: str) -> List[float]:
    """Comma-separated reals with a decimal point, e.g. '0.7,0.2,0.1'."""
    try:
        return [float(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise ValueError(f"Cannot parse '{text}' as a comma-separated list of numbers") from None


def _setting(args: argparse.Namespace, key: str) -> Any:
    value = getattr(args, key, None)
    return value if value is not None else get_numerics_config()[key]


def _emit(text: str, output: Optional[str]) -> None:
    if output:
        Path(output).write_text(text, encoding="utf-8")
    else:
        print(text, end="")


def cmd_analyze(args: argparse.Namespace) -> int:
    spec = load_model_spec(args.input)
    tol, seed = _setting(args, "tol"), _setting(args, "seed")
    report = build_report(spec, tol, seed=seed, samples=_setting(args, "samples"))

    if args.cmd == "classify":
        if report.canonical is not None:
            _emit(dump_json(report.canonical), args.output)
        else:
            _emit(json.dumps({"verdict": report.verdict.value}) + "\n", args.output)
    else:
        _emit(dump_json(report), args.output)

    if args.output:
        marker = "✅" if VERDICT_EXIT[report.verdict] == EXIT_OK else "❌"
        print(f"{marker} {report.verdict.value}: report written to {args.output}")
        if report.canonical is not None:
            form = report.canonical
            print(f"   q={form.q}, r={form.r}, block sizes {form.block_sizes}")
        for warning in report.warnings:
            print(f"⚠️  {warning}")
    return VERDICT_EXIT[report.verdict]


def cmd_geodesic(args: argparse.Namespace) -> int:
    p = SimplexPoint(np.array(parse_vector(args.from_point)))
    q = SimplexPoint(np.array(parse_vector(args.to_point)))
    tol = _setting(args, "tol")

    reference = None
    if args.input:
        reference = load_model_spec(args.input).subspace(tol)
        for name, point in (("--from", p), ("--to", q)):
            residual = membership_residual(reference, point.probs)
            if residual > tol:
                raise PreconditionError(
                    f"{name} point is not on the model (membership residual {residual:.3e})"
                )

    trace = alpha_geodesic_bvp(p, q, args.alpha, steps=_setting(args, "steps"), reference=reference)
    if args.output:
        worst = write_trace(trace, args.output, reference)
    else:
        worst = write_trace(trace, sys.stdout, reference)
    print(
        f"✅ alpha={args.alpha:g} geodesic: {len(trace.times)} samples, "
        f"{trace.iterations} Newton steps, max constraint residual {worst:.3e}",
        file=sys.stderr if not args.output else sys.stdout,
    )
    return EXIT_OK


def cmd_project(args: argparse.Namespace) -> int:
    spec = load_model_spec(args.input)
    W = spec.subspace(_setting(args, "tol"))
    point = SimplexPoint(np.array(parse_vector(args.point)))
    report = build_projection_report(
        point, W, args.alpha, starts=_setting(args, "starts"), seed=_setting(args, "seed")
    )
    _emit(dump_json(report), args.output)
    if args.output:
        print(f"✅ minimizer {report.minimizer}")
        print(f"   divergence {report.divergence:.12g}, agreement diameter {report.agreement_diameter:.3e}")
    return EXIT_OK


def cmd_generate(args: argparse.Namespace) -> int:
    rng = np.random.default_rng(_setting(args, "seed"))
    if args.vertex_span:
        n, d = args.vertex_span
        v0 = np.zeros(n + 1)
        weights = rng.uniform(0.1, 1.0, n + 1 - d)
        v0[d:] = weights / weights.sum()
        W = generate_vertex_span(n, d, v0)
    else:
        if args.q is None or not args.sizes:
            raise ValueError("generate needs --q and --sizes, or --vertex-span N D")
        vectors = []
        for size in args.sizes:
            weights = rng.uniform(0.1, 1.0, size)
            vectors.append(weights / weights.sum())
        W = generate_canonical(args.q, args.sizes, vectors)

    generators = W.original_basis
    spec = ModelSpecFile(
        ambient_dim=W.ambient_dim,
        basis=generators.tolist(),
        base_point=generators.sum(axis=0).tolist(),
    )
    _emit(dump_json(spec), args.output)
    if args.output:
        print(f"✅ Model with ambient dimension {W.ambient_dim}, dim W = {W.dim} written to {args.output}")
    return EXIT_OK


def cmd_selftest(args: argparse.Namespace) -> int:
    from scripts.validate import print_summary, run_selftest

    summary = run_selftest(
        cases=args.cases,
        seed=_setting(args, "seed"),
        tol=_setting(args, "tol"),
        workers=_setting(args, "workers"),
    )
    print_summary(summary)
    if args.output:
        Path(args.output).write_text(dump_json(summary), encoding="utf-8")
    return EXIT_OK if summary.ok else EXIT_SELFTEST_FAILED


def cmd_batch(args: argparse.Namespace) -> int:
    from scripts.batch_analyze import analyze_directory

    results = analyze_directory(
        args.directory,
        tol=_setting(args, "tol"),
        seed=_setting(args, "seed"),
        samples=_setting(args, "samples"),
        workers=_setting(args, "workers"),
    )
    return EXIT_OK if all(r.error is None for r in results) else EXIT_INPUT_ERROR


def cmd_config(args: argparse.Namespace) -> int:
    if args.config_cmd in ["set", "use"]:
        updates: Dict[str, str] = {}
        for item in args.pairs:
            if "=" not in item:
                raise ValueError(f"Expected KEY=VALUE, got '{item}'")
            key, value = item.split("=", 1)
            updates[key.strip()] = value.strip()
        stored = set_numerics_config(**updates)
        print(f"✅ Saved to {get_config_path()}: {json.dumps(stored, sort_keys=True)}")
        return EXIT_OK

    print(f"⚙️  Config file: {get_config_path()}")
    for key, value in get_numerics_config().items():
        env_var = NUMERICS_KEYS[key][0]
        source = " (from env)" if os.getenv(env_var) else ""
        print(f"  {key} = {value}{source}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        description="daprobe - doubly autoparallel submanifolds of the probability simplex",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  daprobe generate --q 2 --sizes 2 -o model.json     # Running-example shape
  daprobe analyze -i model.json -o report.json       # Decide and classify
  daprobe geodesic -i model.json --alpha 0 --from 0.2,0.3,0.15,0.35 --to 0.4,0.1,0.15,0.35
  daprobe project -i model.json --alpha 1 --point 0.4,0.3,0.2,0.1
  daprobe selftest --cases 10                        # Quick invariant battery
        """,
    )
    sub = parser.add_subparsers(dest="cmd", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("-o", "--output", default=None, help="Output path (default: stdout)")
    common.add_argument("--tol", type=float, default=None, help="Tolerance (default: config, 1e-9)")
    common.add_argument("--seed", type=int, default=None, help="Random seed (default: config, 0)")

    for name, aliases, help_text in [
        ("analyze", ["a"], "Decide double autoparallelism and write a report"),
        ("classify", ["c"], "Print only the canonical block form"),
    ]:
        cmd = sub.add_parser(name, aliases=aliases, parents=[common], help=help_text)
        cmd.add_argument("-i", "--input", required=True, help="Model spec file (JSON)")
        cmd.add_argument("--samples", type=int, default=None, help="Log-affinity samples")

    geo = sub.add_parser("geodesic", aliases=["g"], parents=[common], help="Alpha-geodesic between two points")
    geo.add_argument("-i", "--input", default=None, help="Optional model spec; endpoints must lie on it")
    geo.add_argument("--alpha", type=float, required=True, help="Connection parameter")
    geo.add_argument("--from", dest="from_point", required=True, help="Start point, e.g. 0.5,0.5")
    geo.add_argument("--to", dest="to_point", required=True, help="End point")
    geo.add_argument("--steps", type=int, default=None, help="Integration steps (default 256)")

    proj = sub.add_parser("project", aliases=["p"], parents=[common], help="Alpha-projection onto a model")
    proj.add_argument("-i", "--input", required=True, help="Model spec file (JSON)")
    proj.add_argument("--alpha", type=float, required=True, help="Divergence parameter")
    proj.add_argument("--point", required=True, help="Point to project, e.g. 0.7,0.2,0.1")
    proj.add_argument("--starts", type=int, default=None, help="Multi-start count (default 8)")

    gen = sub.add_parser("generate", aliases=["gen"], parents=[common], help="Write a DA model spec")
    gen.add_argument("--q", type=int, default=None, help="Number of free coordinates")
    gen.add_argument("--sizes", type=int, nargs="+", default=None, help="Block sizes (each >= 2)")
    gen.add_argument(
        "--vertex-span",
        type=int,
        nargs=2,
        metavar=("N", "D"),
        default=None,
        help="span{v0, first D vertices} in R^(N+1)",
    )

    st = sub.add_parser("selftest", aliases=["test"], parents=[common], help="Run the invariant battery")
    st.add_argument("--cases", type=int, default=1000, help="Base case count per suite")
    st.add_argument("--workers", type=int, default=None, help="Worker threads (default 4)")

    batch = sub.add_parser("batch", parents=[common], help="Analyze every *.json spec in a directory")
    batch.add_argument("directory", help="Directory of model specs")
    batch.add_argument("--samples", type=int, default=None, help="Log-affinity samples")
    batch.add_argument("--workers", type=int, default=None, help="Worker threads (default 4)")

    cfg = sub.add_parser("config", help="Show or set numeric defaults")
    cfg_sub = cfg.add_subparsers(dest="config_cmd", required=True)
    cfg_sub.add_parser("show", aliases=["status"], help="Show effective settings")
    cfg_set = cfg_sub.add_parser("set", aliases=["use"], help="Persist settings")
    cfg_set.add_argument("pairs", nargs="+", metavar="KEY=VALUE", help=f"Keys: {', '.join(NUMERICS_KEYS)}")

    return parser


HANDLERS = {
    "analyze": cmd_analyze,
    "a": cmd_analyze,
    "classify": cmd_analyze,
    "c": cmd_analyze,
    "geodesic": cmd_geodesic,
    "g": cmd_geodesic,
    "project": cmd_project,
    "p": cmd_project,
    "generate": cmd_generate,
    "gen": cmd_generate,
    "selftest": cmd_selftest,
    "test": cmd_selftest,
    "batch": cmd_batch,
    "config": cmd_config,
}


def main(argv: Optional[List[str]] = None) -> int:
    logging.basicConfig(
        level=os.getenv("DAPROBE_LOG_LEVEL", "WARNING"),
        format="%(asctime)s %(levelname)s %(name)s %(message)s",
        stream=sys.stderr,
    )
    args = build_parser().parse_args(argv)
    if args.cmd == "c":
        args.cmd = "classify"

    try:
        return HANDLERS[args.cmd](args)
    except NUMERICAL_ERRORS as e:
        logger.error(f"{args.cmd} failed: {e}")
        print(f"❌ {type(e).__name__}: {e}")
        return EXIT_NUMERICAL_ERROR
    except INPUT_ERRORS as e:
        print(f"❌ Error: {e}")
        return EXIT_INPUT_ERROR


if __name__ == "__main__":
    sys.exit(main())
