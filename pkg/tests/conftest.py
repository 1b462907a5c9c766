"""Pytest fixtures for nodal-lab tests."""

import logging
from pathlib import Path

import pytest
from click.testing import CliRunner

from nodal_lab.eigenfunction import build_bourgain, build_single_pair, save_spec
from nodal_lab.models import EigenfunctionSpec, LatticePoint


@pytest.fixture
def cli_runner() -> CliRunner:
    """Create a CLI runner for testing."""
    return CliRunner()


@pytest.fixture
def bourgain_25() -> EigenfunctionSpec:
    """Bourgain eigenfunction on the 12 lattice points of |xi|^2 = 25."""
    return build_bourgain(25)


@pytest.fixture
def cos_line() -> EigenfunctionSpec:
    """sqrt(2) cos(2 pi 3 x1): nodal set is six vertical lines."""
    return build_single_pair(LatticePoint(3, 0))


@pytest.fixture
def spec_file(tmp_path: Path, bourgain_25: EigenfunctionSpec) -> Path:
    """The lambda = 25 Bourgain spec saved as JSON."""
    path = tmp_path / "bourgain-25.json"
    save_spec(bourgain_25, path)
    return path


@pytest.fixture
def cos_line_file(tmp_path: Path, cos_line: EigenfunctionSpec) -> Path:
    path = tmp_path / "cos-line.json"
    save_spec(cos_line, path)
    return path


@pytest.fixture(autouse=True)
def _package_logging():
    """Undo the CLI's rich handler so caplog sees package records."""
    yield
    logger = logging.getLogger("nodal_lab")
    logger.handlers.clear()
    logger.propagate = True
    logger.setLevel(logging.NOTSET)
