"""Tests for MCP server functionality."""

import json
import subprocess
import sys
from pathlib import Path
from typing import Any

from false_theta.mcp_server import FalseThetaServer
from false_theta.types import PrecisionMode


def _call(server: FalseThetaServer, name: str, arguments: dict[str, Any]) -> Any:
    result = server._call_tool(name, arguments)
    assert len(result) == 1
    return json.loads(result[0].text)


class TestFalseThetaServer:
    """Tests for FalseThetaServer class."""

    def test_default_precision(self) -> None:
        """Servers evaluate in double precision unless told otherwise."""
        assert FalseThetaServer().precision == PrecisionMode.DOUBLE
        assert FalseThetaServer(PrecisionMode.EXTENDED).precision == PrecisionMode.EXTENDED

    def test_lists_tools(self) -> None:
        """Every tool has a name and an input schema."""
        tools = FalseThetaServer()._list_tools()
        assert [t.name for t in tools] == [
            "expand_series",
            "verify_identity",
            "evaluate",
            "modular_residual",
            "zhat",
            "list_series",
        ]
        assert all(t.inputSchema["type"] == "object" for t in tools)

    def test_expand_series(self) -> None:
        """order N returns coefficients through q^N."""
        record = _call(FalseThetaServer(), "expand_series", {"name": "A2char", "order": 9})
        assert record["series"] == "A2char"
        assert record["trunc"] == 10
        assert record["coeffs"][-1] == [9, "1156/1"]

    def test_verify_identity(self) -> None:
        """Reports come back as JSON records."""
        record = _call(FalseThetaServer(), "verify_identity", {"which": "JTP", "order": 5})
        assert record["status"] == "pass"
        assert record["order"] == "6/1"

    def test_evaluate_series(self) -> None:
        """Series values at [re, im] points."""
        record = _call(FalseThetaServer(), "evaluate", {"series": "eta", "tau": [0, 1]})
        assert record["label"] == "eta"
        assert abs(record["value"][0] - 0.7682254223260566) < 1e-10
        assert abs(record["value"][1]) < 1e-10

    def test_modular_residual(self) -> None:
        """The psi completion transforms under S."""
        record = _call(
            FalseThetaServer(),
            "modular_residual",
            {"kind": "psi", "matrix": [0, -1, 1, 0], "tau": [0.2, 1.1], "w": [-0.3, 1.6]},
        )
        assert record["value"][0] < 1e-6

    def test_zhat(self, star_graph_path: Path) -> None:
        """The star plumbing has a unimodular linking matrix."""
        record = _call(FalseThetaServer(), "zhat", {"graph_path": str(star_graph_path), "order": 8})
        assert record["linking_matrix"]["determinant"] == 1
        assert record["series"]["trunc"] is not None

    def test_list_series(self) -> None:
        """The listing has registry entries and check names."""
        record = _call(FalseThetaServer(), "list_series", {})
        assert "Lambda" in [entry["name"] for entry in record["series"]]
        assert "B2" in record["checks"]

    def test_domain_errors_are_returned(self) -> None:
        """Errors come back as JSON instead of being raised."""
        record = _call(FalseThetaServer(), "expand_series", {"name": "zeta"})
        assert record["error"] == "UnknownSeries"
        assert "zeta" in record["message"]

    def test_point_must_be_in_upper_half_plane(self) -> None:
        """tau with im <= 0 is a usage error."""
        record = _call(FalseThetaServer(), "evaluate", {"series": "eta", "tau": [0, -1]})
        assert record["error"] == "UsageError"

    def test_bad_order(self) -> None:
        """order must be a positive integer."""
        record = _call(FalseThetaServer(), "expand_series", {"name": "eta", "order": 0})
        assert record["error"] == "UsageError"

    def test_unknown_tool(self) -> None:
        """Unknown tools get a plain text reply."""
        result = FalseThetaServer()._call_tool("nope", {})
        assert result[0].text == "Unknown tool: nope"


class TestMCPServerCLI:
    """Tests for MCP server command-line interface."""

    def test_help_flag(self) -> None:
        """--help should print help and exit."""
        result = subprocess.run(
            [sys.executable, "-m", "false_theta.mcp_server", "--help"],
            capture_output=True,
            text=True,
        )
        assert result.returncode == 0
        assert "MCP" in result.stdout
        assert "--precision" in result.stdout

    def test_rejects_unknown_precision(self) -> None:
        """--precision is double or extended."""
        result = subprocess.run(
            [sys.executable, "-m", "false_theta.mcp_server", "--precision", "quad"],
            capture_output=True,
            text=True,
        )
        assert result.returncode == 2
