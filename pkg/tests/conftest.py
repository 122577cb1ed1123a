"""Pytest configuration and fixtures for false-theta tests."""

from pathlib import Path

import pytest

DATA_DIR = Path(__file__).parent.parent / "src" / "false_theta" / "data"


@pytest.fixture
def data_dir() -> Path:
    """Return the path to the bundled input files."""
    return DATA_DIR


@pytest.fixture
def star_graph_path(data_dir: Path) -> Path:
    """Return the path to the (2, 3, 7) star plumbing."""
    return data_dir / "star_2_3_7.json"


@pytest.fixture
def h_graph_path(data_dir: Path) -> Path:
    """Return the path to the two-node H-shaped plumbing."""
    return data_dir / "h_graph.json"


@pytest.fixture
def fsqe_diagonal_path(data_dir: Path) -> Path:
    """Return the path to the diagonal quadrant-sum spec."""
    return data_dir / "fsqe_diagonal.json"
