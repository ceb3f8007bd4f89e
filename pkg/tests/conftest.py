"""Pytest configuration and fixtures."""

import numpy as np
import pytest

from core.analysis import generate_vertex_span
from core.subspace import Subspace, subspace_from_basis


@pytest.fixture
def running_example() -> Subspace:
    """span{e1, e2, (0, 0, 0.3, 0.7)}: doubly autoparallel with q=2, r=1."""
    return generate_vertex_span(3, 2, [0.0, 0.0, 0.3, 0.7])


@pytest.fixture
def vandermonde() -> Subspace:
    """span{(1,1,1), (1,2,4)}: contains e but is not closed under powers."""
    return subspace_from_basis([[1.0, 1.0, 1.0], [1.0, 2.0, 4.0]])


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(12345)


@pytest.fixture(autouse=True)
def isolated_config(tmp_path, monkeypatch) -> None:
    """Keep config reads and writes inside a temporary directory."""
    monkeypatch.chdir(tmp_path)
    monkeypatch.setattr("pathlib.Path.home", lambda: tmp_path)
    for var in ["DAPROBE_TOL", "DAPROBE_STEPS", "DAPROBE_SEED", "DAPROBE_SAMPLES", "DAPROBE_STARTS", "DAPROBE_WORKERS"]:
        monkeypatch.delenv(var, raising=False)
