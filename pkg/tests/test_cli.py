"""Tests for the false-theta command line."""

import json
import math
import subprocess
import sys
from pathlib import Path

import pytest

from false_theta.cli import build_config, dispatch, main
from false_theta.types import EXIT_MISMATCH, EXIT_OK, RunConfig, UsageError

CLI = [sys.executable, "-m", "false_theta"]


class TestExpand:
    """Tests for the expand verb."""

    def test_a2_character(self) -> None:
        """-N 9 prints coefficients through q^9."""
        result = subprocess.run(
            [*CLI, "expand", "--series", "A2char", "-N", "9", "--no-color"],
            capture_output=True,
            text=True,
        )
        assert result.returncode == 0, result.stderr
        assert result.stdout.startswith("A2char = 1 + 3 q^2 + 8 q^3")
        assert "1156 q^9" in result.stdout
        assert "O(q^10)" in result.stdout

    def test_json_record(self) -> None:
        """--format json prints the series record."""
        result = subprocess.run(
            [*CLI, "expand", "--series", "psi", "-N", "3", "--format", "json"],
            capture_output=True,
            text=True,
        )
        assert result.returncode == 0, result.stderr
        record = json.loads(result.stdout)
        assert record == {
            "series": "psi",
            "denom": 8,
            "trunc": 32,
            "coeffs": [[1, "1/1"], [9, "-1/1"], [25, "1/1"]],
        }

    def test_zero_order_is_a_usage_error(self) -> None:
        """-N must be positive."""
        result = subprocess.run(
            [*CLI, "expand", "--series", "eta", "-N", "0"], capture_output=True, text=True
        )
        assert result.returncode == 2
        assert "UsageError" in result.stderr

    def test_unknown_series(self) -> None:
        """Unknown registry names exit 2 and name the error."""
        result = subprocess.run(
            [*CLI, "expand", "--series", "zeta"], capture_output=True, text=True
        )
        assert result.returncode == 2
        assert "UnknownSeries" in result.stderr

    def test_missing_series_flag(self) -> None:
        """--series is required."""
        result = subprocess.run([*CLI, "expand"], capture_output=True, text=True)
        assert result.returncode == 2


class TestVerify:
    """Tests for the verify verb."""

    def test_b2_passes(self) -> None:
        """A passing check exits 0 and prints PASS."""
        result = subprocess.run(
            [*CLI, "verify", "--which", "B2", "-N", "7", "--no-color"],
            capture_output=True,
            text=True,
        )
        assert result.returncode == 0, result.stderr
        assert "PASS" in result.stdout

    def test_json_report(self) -> None:
        """The report record carries name, status and order."""
        result = subprocess.run(
            [*CLI, "verify", "--which", "D00", "-N", "9", "--format", "json"],
            capture_output=True,
            text=True,
        )
        assert result.returncode == 0, result.stderr
        record = json.loads(result.stdout)
        assert record["name"] == "D(0,0)"
        assert record["status"] == "pass"
        assert record["order"] == "10/1"

    def test_output_file(self, tmp_path: Path) -> None:
        """-o writes the JSON record alongside the human output."""
        target = tmp_path / "report.json"
        result = subprocess.run(
            [*CLI, "verify", "--which", "eta3", "-N", "6", "-o", str(target), "--no-color"],
            capture_output=True,
            text=True,
        )
        assert result.returncode == 0, result.stderr
        assert "PASS" in result.stdout
        assert json.loads(target.read_text())["status"] == "pass"

    def test_unknown_check(self) -> None:
        """--which is restricted to the named checks."""
        result = subprocess.run(
            [*CLI, "verify", "--which", "C4"], capture_output=True, text=True
        )
        assert result.returncode == 2


class TestEval:
    """Tests for the eval verb."""

    def test_eta_at_i(self) -> None:
        """eta(i) = 0.76822542..."""
        result = subprocess.run(
            [*CLI, "eval", "--series", "eta", "--tau", "1i", "--no-color"],
            capture_output=True,
            text=True,
        )
        assert result.returncode == 0, result.stderr
        assert "0.7682254223" in result.stdout

    @pytest.mark.parametrize("kind", ["psi", "phi"])
    def test_completion_to_infinity(self, kind: str) -> None:
        """The regularized completions converge along the vertical ray."""
        result = subprocess.run(
            [*CLI, "eval", "--completion", kind, "--tau", "2i", "--format", "json"],
            capture_output=True,
            text=True,
        )
        assert result.returncode == 0, result.stderr
        record = json.loads(result.stdout)
        assert record["label"] == f"{kind}-completion"
        assert all(math.isfinite(x) for x in record["value"])

    def test_real_point_is_a_usage_error(self) -> None:
        """tau must lie in the upper half-plane."""
        result = subprocess.run(
            [*CLI, "eval", "--series", "eta", "--tau=0.5"], capture_output=True, text=True
        )
        assert result.returncode == 2

    def test_needs_a_source(self) -> None:
        """Either --series or --completion is required."""
        result = subprocess.run([*CLI, "eval", "--tau", "2i"], capture_output=True, text=True)
        assert result.returncode == 2


class TestOtherVerbs:
    """Tests for transform, zhat, fsqe and list."""

    def test_eta_transform(self) -> None:
        """The eta multiplier check passes under S."""
        result = subprocess.run(
            [*CLI, "transform", "--kind", "eta", "--matrix", "0", "-1", "1", "0", "--tau", "0.2+1.1i"],
            capture_output=True,
            text=True,
        )
        assert result.returncode == 0, result.stderr

    def test_zhat_both_pipelines(self, star_graph_path: Path) -> None:
        """zhat prints the linking matrix and the pipeline report."""
        result = subprocess.run(
            [*CLI, "zhat", "--graph", str(star_graph_path), "-N", "8", "--pipeline", "both",
             "--format", "json"],
            capture_output=True,
            text=True,
        )
        assert result.returncode == 0, result.stderr
        record = json.loads(result.stdout)
        assert record["linking_matrix"]["determinant"] == 1
        assert record["zhat-pipelines"]["status"] == "pass"

    def test_zhat_missing_graph(self, tmp_path: Path) -> None:
        """A missing graph file is a parameter error."""
        result = subprocess.run(
            [*CLI, "zhat", "--graph", str(tmp_path / "absent.json")], capture_output=True, text=True
        )
        assert result.returncode == 2
        assert "MalformedParams" in result.stderr

    def test_fsqe_check(self, fsqe_diagonal_path: Path) -> None:
        """fsqe --check compares against the symmetrized form."""
        result = subprocess.run(
            [*CLI, "fsqe", "--spec", str(fsqe_diagonal_path), "-N", "9", "--check", "--format", "json"],
            capture_output=True,
            text=True,
        )
        assert result.returncode == 0, result.stderr
        record = json.loads(result.stdout)
        assert record["F"]["coeffs"] == [[1, "1/1"], [5, "2/1"], [9, "1/1"]]
        assert record["symmetrized"]["status"] == "pass"

    def test_list(self) -> None:
        """list shows the registry table."""
        result = subprocess.run(
            [*CLI, "list", "--format", "json"], capture_output=True, text=True
        )
        assert result.returncode == 0, result.stderr
        names = [entry["name"] for entry in json.loads(result.stdout)]
        assert {"eta", "A2char", "Lambda", "zhat"} <= set(names)


class TestInProcess:
    """Tests that call main() and dispatch() directly."""

    def test_main_returns_exit_code(self, capsys: pytest.CaptureFixture[str]) -> None:
        """main() returns rather than exiting."""
        assert main(["expand", "--series", "eta3", "-N", "2", "--format", "json"]) == EXIT_OK
        assert json.loads(capsys.readouterr().out)["coeffs"] == [[1, "1/1"], [9, "-3/1"]]

    def test_dispatch_reports_mismatch(self) -> None:
        """A failing report turns into EXIT_MISMATCH."""
        cfg = RunConfig(
            verb="transform",
            tau=0.23 + 0.91j,
            options={"kind": "eta", "matrix": (1, 1, 0, 1), "max_residual": -1.0},
        )
        status, results = dispatch(cfg)
        assert status == EXIT_MISMATCH
        assert not results[0][1].passed

    def test_precision_from_environment(self, monkeypatch: pytest.MonkeyPatch) -> None:
        """FALSE_THETA_PRECISION sets the default precision mode."""
        from false_theta.cli import _build_parser

        monkeypatch.setenv("FALSE_THETA_PRECISION", "extended")
        args = _build_parser().parse_args(["eval", "--series", "eta", "--tau", "2i"])
        assert build_config(args).precision.value == "extended"
        args = _build_parser().parse_args(
            ["eval", "--series", "eta", "--tau", "2i", "--precision", "double"]
        )
        assert build_config(args).precision.value == "double"

    def test_bad_class_vector(self) -> None:
        """--class takes comma-separated integers."""
        from false_theta.cli import _build_parser

        args = _build_parser().parse_args(["zhat", "--graph", "g.json", "--class", "1,x"])
        with pytest.raises(UsageError):
            build_config(args)


class TestInstallation:
    """Tests for package installation."""

    def test_module_runnable(self) -> None:
        """Test that the package can be run as a module."""
        result = subprocess.run([*CLI, "--version"], capture_output=True, text=True)
        assert result.returncode == 0
        assert "0.1.0" in result.stdout

    def test_help(self) -> None:
        """--help lists the verbs."""
        result = subprocess.run([*CLI, "--help"], capture_output=True, text=True)
        assert result.returncode == 0
        for verb in ("expand", "verify", "eval", "transform", "zhat", "fsqe", "list"):
            assert verb in result.stdout

    def test_entry_point_exists(self) -> None:
        """Test that the entry point is installed."""
        result = subprocess.run(["false-theta", "--version"], capture_output=True, text=True)
        assert result.returncode == 0
        assert "false-theta" in result.stdout
