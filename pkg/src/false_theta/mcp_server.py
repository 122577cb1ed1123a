"""MCP Server for false-theta.

Provides tools for code agents to expand named series, run identity checks,
and evaluate completions and transformation residuals. Every tool returns a
single JSON text block; domain errors come back as
{"error": <class name>, "message": ...} rather than being raised into the
transport.

Usage:
    false-theta-mcp
    false-theta-mcp --precision extended
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path
from typing import Any

from mcp.server import Server
from mcp.server.stdio import stdio_server
from mcp.types import TextContent, Tool

from false_theta.records import (
    linking_matrix_to_dict,
    numeric_to_dict,
    parse_complex,
    qexpansion_to_dict,
    report_to_dict,
)
from false_theta.registry import CHECKS, build_series, list_series, run_check
from false_theta.types import (
    FalseThetaError,
    PrecisionMode,
    QuadratureConfig,
    UsageError,
)

logger = logging.getLogger(__name__)

_POINT_SCHEMA = {
    "type": "array",
    "items": {"type": "number"},
    "minItems": 2,
    "maxItems": 2,
    "description": "Complex point as [re, im] with im > 0",
}

_QUADRATURE_PROPERTIES: dict[str, Any] = {
    "nodes": {"type": "integer", "default": 24, "description": "Gauss-Legendre nodes per panel"},
    "panels": {"type": "integer", "default": 12, "description": "Panels per path"},
    "tolerance": {"type": "number", "default": 1e-10, "description": "Target error"},
}


class FalseThetaServer:
    """MCP Server exposing the false-theta engines as tools."""

    def __init__(self, precision: PrecisionMode = PrecisionMode.DOUBLE):
        self.precision = precision
        self._server = Server("false-theta")
        self._setup_tools()

    def _setup_tools(self) -> None:
        """Set up MCP tool handlers."""

        @self._server.list_tools()
        async def list_tools() -> list[Tool]:
            return self._list_tools()

        @self._server.call_tool()
        async def call_tool(name: str, arguments: dict[str, Any]) -> list[TextContent]:
            return self._call_tool(name, arguments)

    def _list_tools(self) -> list[Tool]:
        """List available tools."""
        return [
            Tool(
                name="expand_series",
                description="Exact q-expansion of a registered series through q^order. Returns "
                'a record {"denom", "trunc", "coeffs": [[n, "p/q"], ...]} for sum c_n q^(n/denom). '
                "Use list_series for the available names.",
                inputSchema={
                    "type": "object",
                    "properties": {
                        "name": {
                            "type": "string",
                            "description": 'Registry name with arguments, e.g. "theta(3,1,1)"',
                        },
                        "order": {"type": "integer", "default": 10, "minimum": 1},
                    },
                    "required": ["name"],
                },
            ),
            Tool(
                name="verify_identity",
                description="Run a named identity check and return its report "
                "(status, first mismatching exponent or numeric residual, elapsed seconds).",
                inputSchema={
                    "type": "object",
                    "properties": {
                        "which": {"type": "string", "enum": list(CHECKS)},
                        "order": {"type": "integer", "default": 10, "minimum": 1},
                        "k": {"type": "integer", "default": 1, "description": "k for Fk"},
                        "tau": _POINT_SCHEMA,
                        "exact_only": {"type": "boolean", "default": False},
                    },
                    "required": ["which"],
                },
            ),
            Tool(
                name="evaluate",
                description="Numeric value with error estimate: a registered series at tau, "
                "or a completion (psi, phi, fk, fsqe) integrated from tau to w.",
                inputSchema={
                    "type": "object",
                    "properties": {
                        "series": {"type": "string"},
                        "completion": {"type": "string", "enum": ["psi", "phi", "fk", "fsqe"]},
                        "tau": _POINT_SCHEMA,
                        "w": _POINT_SCHEMA,
                        "k": {"type": "integer", "default": 1},
                        "spec_path": {
                            "type": "string",
                            "description": "Quadrant-sum spec file for the fsqe completion",
                        },
                        **_QUADRATURE_PROPERTIES,
                    },
                    "required": ["tau"],
                },
            ),
            Tool(
                name="modular_residual",
                description="Residual of the weight 2 (psi) or weight 3 (phi) transformation "
                "law of a completion under an SL2(Z) matrix [a, b, c, d].",
                inputSchema={
                    "type": "object",
                    "properties": {
                        "kind": {"type": "string", "enum": ["psi", "phi"]},
                        "matrix": {
                            "type": "array",
                            "items": {"type": "integer"},
                            "minItems": 4,
                            "maxItems": 4,
                        },
                        "tau": _POINT_SCHEMA,
                        "w": _POINT_SCHEMA,
                        **_QUADRATURE_PROPERTIES,
                    },
                    "required": ["kind", "matrix", "tau", "w"],
                },
            ),
            Tool(
                name="zhat",
                description="Homological block of a plumbing graph file through q^order, with "
                "its linking matrix. pipeline=both compares the two enumerations.",
                inputSchema={
                    "type": "object",
                    "properties": {
                        "graph_path": {"type": "string"},
                        "order": {"type": "integer", "default": 20, "minimum": 1},
                        "class_vector": {"type": "array", "items": {"type": "integer"}},
                        "pipeline": {
                            "type": "string",
                            "enum": ["theta", "support", "both"],
                            "default": "theta",
                        },
                    },
                    "required": ["graph_path"],
                },
            ),
            Tool(
                name="list_series",
                description="Names, arguments and descriptions of every registered series.",
                inputSchema={"type": "object", "properties": {}},
            ),
        ]

    def _call_tool(self, name: str, arguments: dict[str, Any]) -> list[TextContent]:
        """Handle tool calls."""
        try:
            if name == "expand_series":
                return self._handle_expand_series(arguments)
            elif name == "verify_identity":
                return self._handle_verify_identity(arguments)
            elif name == "evaluate":
                return self._handle_evaluate(arguments)
            elif name == "modular_residual":
                return self._handle_modular_residual(arguments)
            elif name == "zhat":
                return self._handle_zhat(arguments)
            elif name == "list_series":
                return self._handle_list_series()
        except FalseThetaError as exc:
            logger.info("%s failed: %s", name, exc)
            return self._respond({"error": type(exc).__name__, "message": str(exc)})
        return [TextContent(type="text", text=f"Unknown tool: {name}")]

    def _respond(self, payload: dict[str, Any]) -> list[TextContent]:
        return [TextContent(type="text", text=json.dumps(payload, indent=2))]

    def _order(self, arguments: dict[str, Any], default: int = 10) -> int:
        order = arguments.get("order", default)
        if not isinstance(order, int) or order <= 0:
            raise UsageError(f"order: must be a positive integer, got {order!r}")
        return order

    def _optional_point(self, arguments: dict[str, Any], key: str) -> complex | None:
        if arguments.get(key) is None:
            return None
        return self._point(arguments, key)

    def _point(self, arguments: dict[str, Any], key: str) -> complex:
        if arguments.get(key) is None:
            raise UsageError(f"{key}: required")
        point = parse_complex(arguments[key], key)
        if point.imag <= 0:
            raise UsageError(f"{key}: point must lie in the upper half-plane, got {point}")
        return point

    def _quadrature(self, arguments: dict[str, Any]) -> QuadratureConfig:
        defaults = QuadratureConfig()
        return QuadratureConfig(
            nodes=arguments.get("nodes", defaults.nodes),
            panels=arguments.get("panels", defaults.panels),
            tolerance=arguments.get("tolerance", defaults.tolerance),
        )

    def _handle_expand_series(self, arguments: dict[str, Any]) -> list[TextContent]:
        """Expand a registry series."""
        name = arguments.get("name")
        if not name:
            raise UsageError("name: required")
        series = build_series(name, None, self._order(arguments) + 1)
        return self._respond({"series": name, **qexpansion_to_dict(series)})

    def _handle_verify_identity(self, arguments: dict[str, Any]) -> list[TextContent]:
        """Run a named check."""
        which = arguments.get("which", "")
        report = run_check(
            which,
            self._order(arguments) + 1,
            k=arguments.get("k", 1),
            tau=self._optional_point(arguments, "tau"),
            cfg=self._quadrature(arguments),
            numeric=not arguments.get("exact_only", False),
        )
        return self._respond(report_to_dict(report))

    def _handle_evaluate(self, arguments: dict[str, Any]) -> list[TextContent]:
        """Series value or completion at a point."""
        from false_theta.eichler import completion, evaluate_series

        tau = self._point(arguments, "tau")
        cfg = self._quadrature(arguments)
        if arguments.get("series"):
            value = evaluate_series(
                arguments["series"],
                None,
                tau,
                cfg.tolerance,
                extended=self.precision == PrecisionMode.EXTENDED,
            )
            return self._respond({"label": arguments["series"], **numeric_to_dict(value)})

        kind = arguments.get("completion")
        if not kind:
            raise UsageError("evaluate needs either series or completion")
        spec = None
        if kind == "fsqe":
            from false_theta.invariants import load_fsqe

            if not arguments.get("spec_path"):
                raise UsageError("spec_path: required for the fsqe completion")
            spec = load_fsqe(Path(arguments["spec_path"]))
        value = completion(
            kind,
            tau,
            self._optional_point(arguments, "w"),
            cfg,
            k=arguments.get("k", 1),
            fsqe=spec,
        )
        return self._respond({"label": f"{kind}-completion", **numeric_to_dict(value)})

    def _handle_modular_residual(self, arguments: dict[str, Any]) -> list[TextContent]:
        """Transformation-law residual of a completion."""
        from false_theta.eichler import modular_residual

        matrix = arguments.get("matrix")
        if not isinstance(matrix, list) or len(matrix) != 4:
            raise UsageError(f"matrix: expected [a, b, c, d], got {matrix!r}")
        tau = self._point(arguments, "tau")
        w = self._point(arguments, "w")
        value = modular_residual(
            arguments.get("kind", ""), [int(x) for x in matrix], tau, w, self._quadrature(arguments)
        )
        return self._respond({"label": "residual", **numeric_to_dict(value)})

    def _handle_zhat(self, arguments: dict[str, Any]) -> list[TextContent]:
        """Homological block of a plumbing graph."""
        from false_theta.invariants import linking_matrix, load_graph, zhat_compare, zhat_series

        path = arguments.get("graph_path")
        if not path:
            raise UsageError("graph_path: required")
        graph = load_graph(Path(path))
        prec = self._order(arguments, default=20) + 1
        class_vector = arguments.get("class_vector")
        pipeline = arguments.get("pipeline", "theta")
        result: dict[str, Any] = {"linking_matrix": linking_matrix_to_dict(linking_matrix(graph))}
        if pipeline == "both":
            result["report"] = report_to_dict(zhat_compare(graph, prec, class_vector))
        else:
            result["series"] = qexpansion_to_dict(zhat_series(graph, class_vector, prec, pipeline))
        return self._respond(result)

    def _handle_list_series(self) -> list[TextContent]:
        """Registry listing."""
        return self._respond(
            {
                "series": [
                    {"name": b.name, "description": b.describe()} for b in list_series()
                ],
                "checks": CHECKS,
            }
        )

    async def run(self) -> None:
        """Run the MCP server."""
        async with stdio_server() as (read_stream, write_stream):
            await self._server.run(
                read_stream, write_stream, self._server.create_initialization_options()
            )


def main() -> int:
    """Main entry point for the MCP server."""
    import asyncio

    parser = argparse.ArgumentParser(
        description="MCP Server for false-theta - provides tools for code agents",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
    false-theta-mcp
    FALSE_THETA_PRECISION=extended false-theta-mcp
        """,
    )
    parser.add_argument(
        "--precision",
        choices=[m.value for m in PrecisionMode],
        default=os.environ.get("FALSE_THETA_PRECISION", PrecisionMode.DOUBLE.value),
        help="Numeric precision mode for series evaluation",
    )
    args = parser.parse_args()

    server = FalseThetaServer(precision=PrecisionMode(args.precision))
    asyncio.run(server.run())
    return 0


if __name__ == "__main__":
    sys.exit(main())
