#!/usr/bin/env python
"""Batch analysis script for daprobe."""

from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import List, NamedTuple, Optional
import logging
import sys

from core.config import get_numerics_config
from core.models import Verdict, load_model_spec
from core.reporting import build_report

logger = logging.getLogger(__name__)


class BatchResult(NamedTuple):
    path: str
    verdict: Optional[Verdict]
    error: Optional[str]


def find_files(directory: str, extensions: List[str]) -> List[str]:
    """
    Recursively find files with specified extensions.

    Args:
        directory: Root directory to search
        extensions: List of file extensions (e.g., ['.json'])

    Returns:
        Sorted list of file paths
    """
    files = []
    path = Path(directory)

    for ext in extensions:
        files.extend([str(f) for f in path.rglob(f"*{ext}")])

    return sorted(files)


def analyze_file(path: str, tol: float, seed: int, samples: int) -> BatchResult:
    try:
        report = build_report(load_model_spec(path), tol, seed=seed, samples=samples)
        return BatchResult(path, report.verdict, None)
    except Exception as e:
        logger.exception("Failed to analyze model spec", extra={"file_path": path})
        return BatchResult(path, None, f"{type(e).__name__}: {e}")


def analyze_directory(
    directory: str, tol: float, seed: int = 0, samples: int = 200, workers: int = 4
) -> List[BatchResult]:
    """
    Analyze every model spec under a directory and print one line per file.

    Returns:
        Results in path order
    """
    if not Path(directory).is_dir():
        raise FileNotFoundError(f"{directory} is not a valid directory")

    file_paths = find_files(directory, [".json"])
    if not file_paths:
        print(f"No model specs found in {directory}")
        return []

    print(f"Found {len(file_paths)} model spec(s) in {directory}")
    with ThreadPoolExecutor(max_workers=max(1, min(workers, len(file_paths)))) as executor:
        results = list(executor.map(lambda p: analyze_file(p, tol, seed, samples), file_paths))

    tally = {}
    for result in results:
        if result.error:
            print(f"✗ {result.path}: {result.error}")
            key = "error"
        else:
            print(f"✓ {result.path}: {result.verdict.value}")
            key = result.verdict.value
        tally[key] = tally.get(key, 0) + 1
    print("Summary: " + ", ".join(f"{k}={v}" for k, v in sorted(tally.items())))
    return results


def main() -> None:
    """Main entry point."""
    if len(sys.argv) < 2:
        print("Usage: python batch_analyze.py <directory>")
        print("Example: python batch_analyze.py ./models")
        sys.exit(1)

    numerics = get_numerics_config()
    results = analyze_directory(
        sys.argv[1],
        tol=numerics["tol"],
        seed=numerics["seed"],
        samples=numerics["samples"],
        workers=numerics["workers"],
    )
    sys.exit(0 if all(r.error is None for r in results) else 1)


if __name__ == "__main__":
    main()
