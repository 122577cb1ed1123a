"""Command-line interface and argument parsing for false-theta.

Contains the main() entry point which parses CLI arguments into a RunConfig
and dispatches to the verb handlers (expand, verify, eval, transform, zhat,
fsqe, list).

This is the entry point called by the `false-theta` console script and by
`python -m false_theta`.

Key functions:
- main(): Parse args, configure logging, dispatch, render, return exit code
- build_config(): argparse namespace -> RunConfig
- dispatch(): Run a RunConfig and return (exit status, labelled results)

Update this docstring if you add new CLI flags, new verbs, or change
the argument parsing logic.
"""

from __future__ import annotations

import argparse
import logging
import math
import os
import sys
import time
from collections.abc import Callable, Sequence
from typing import Any

from rich.console import Console
from rich.logging import RichHandler

from false_theta.display import (
    print_error,
    print_linking_matrix,
    print_numeric,
    print_report,
    print_series,
    print_series_list,
)
from false_theta.qseries import QExpansion
from false_theta.records import (
    linking_matrix_to_dict,
    numeric_to_dict,
    parse_complex,
    qexpansion_to_dict,
    report_to_dict,
    write_output,
)
from false_theta.registry import CHECKS, build_series, list_series, run_check
from false_theta.types import (
    EXIT_MISMATCH,
    EXIT_NONCONVERGENT,
    EXIT_OK,
    CheckStatus,
    FalseThetaError,
    LinkingMatrix,
    NonconvergentEvaluation,
    NumericValue,
    PrecisionMode,
    QuadratureConfig,
    RunConfig,
    UsageError,
    VerificationReport,
)

__version__ = "0.1.0"

PRECISION_ENV = "FALSE_THETA_PRECISION"

logger = logging.getLogger(__name__)

Result = tuple[str, Any]

# Verb-specific flags carried in RunConfig.options
_VERB_OPTIONS = (
    "which",
    "k",
    "exact_only",
    "completion",
    "straight",
    "kind",
    "matrix",
    "max_residual",
    "pipeline",
    "check",
)


def _common_options() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument(
        "-v",
        "--verbose",
        action="count",
        default=0,
        help="Show details (-v) and debug logging (-vv)",
    )
    common.add_argument("--no-color", action="store_true", help="Disable colored output")
    common.add_argument(
        "--format",
        choices=["human", "json"],
        default="human",
        help="Output format (default: human)",
    )
    common.add_argument("-o", "--output", help="Also write the JSON record to this file")
    common.add_argument(
        "--precision",
        choices=[m.value for m in PrecisionMode],
        help=f"Numeric precision mode (default: ${PRECISION_ENV} or double)",
    )
    return common


def _order_option(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "-N", "--order", type=int, default=10, help="Coefficients through q^N (default: 10)"
    )


def _numeric_options(parser: argparse.ArgumentParser, tau_required: bool = False) -> None:
    group = parser.add_argument_group("numeric evaluation")
    group.add_argument(
        "--tau",
        required=tau_required,
        help='Point in the upper half-plane, e.g. "2i", "1/3+1.5i"',
    )
    group.add_argument("--w", help="Upper endpoint of the integrals (default: tau + i infinity)")
    defaults = QuadratureConfig()
    group.add_argument(
        "--nodes", type=int, default=defaults.nodes, help="Gauss-Legendre nodes per panel"
    )
    group.add_argument("--panels", type=int, default=defaults.panels, help="Panels per path")
    group.add_argument(
        "--tail", type=float, default=None, help="Height of the vertical tail (default: automatic)"
    )
    group.add_argument(
        "--tol", type=float, default=defaults.tolerance, help="Target error of the evaluation"
    )


def _build_parser() -> argparse.ArgumentParser:
    common = _common_options()
    parser = argparse.ArgumentParser(
        prog="false-theta",
        description="Exact q-expansions, identity checks and numeric completions "
        "of rank two false theta functions",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
    # q-expansions from the series registry
    false-theta expand --series A2char -N 9
    false-theta expand --series "Lambda(0,1)" -N 12 --format json

    # Identity checks (exit 0 iff every check passes)
    false-theta verify --which B2 -N 12
    false-theta verify --which Fk --k 2 -N 12 --tau 2i

    # Numeric values and modular transformations
    false-theta eval --completion psi --tau 2i
    false-theta transform --kind phi --matrix 0 -1 1 0 --tau 0.1+1.2i --w 0.3+2i

    # Plumbing graphs and quadrant sums
    false-theta zhat --graph star_2_3_7.json -N 20 --pipeline both
    false-theta fsqe --spec fsqe_213.json -N 12 --check --tau 2i
        """,
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    verbs = parser.add_subparsers(dest="verb", required=True, metavar="VERB")

    expand = verbs.add_parser("expand", parents=[common], help="Print a q-expansion")
    expand.add_argument("--series", required=True, help='Registry name, e.g. "theta(3,1,1)"')
    _order_option(expand)

    verify = verbs.add_parser("verify", parents=[common], help="Run an identity check")
    verify.add_argument("--which", required=True, choices=list(CHECKS), help="Check to run")
    verify.add_argument("--k", type=int, default=1, help="k for the Fk check (default: 1)")
    verify.add_argument(
        "--exact-only", action="store_true", help="Skip the numeric part of the Fk check"
    )
    _order_option(verify)
    _numeric_options(verify)

    evaluate = verbs.add_parser("eval", parents=[common], help="Evaluate a series or completion")
    source = evaluate.add_mutually_exclusive_group(required=True)
    source.add_argument("--series", help="Registry series evaluated at q = e^(2 pi i tau)")
    source.add_argument(
        "--completion",
        choices=["psi", "phi", "fk", "fsqe"],
        help="Double-integral completion at (tau, w)",
    )
    evaluate.add_argument("--k", type=int, default=1, help="k for the fk completion")
    evaluate.add_argument("--spec", help="Quadrant-sum spec file for the fsqe completion")
    evaluate.add_argument(
        "--straight", action="store_true", help="Integrate on the straight segment tau -> w"
    )
    _numeric_options(evaluate, tau_required=True)

    transform = verbs.add_parser(
        "transform", parents=[common], help="Check a modular transformation law"
    )
    transform.add_argument("--kind", required=True, choices=["psi", "phi", "eta"])
    transform.add_argument(
        "--matrix",
        required=True,
        nargs=4,
        type=int,
        metavar=("A", "B", "C", "D"),
        help="Entries of an SL2(Z) matrix",
    )
    transform.add_argument(
        "--max-residual",
        type=float,
        default=1e-6,
        help="Residual accepted as a pass (default: 1e-6)",
    )
    _numeric_options(transform, tau_required=True)

    zhat = verbs.add_parser("zhat", parents=[common], help="Homological block of a plumbing graph")
    zhat.add_argument("--graph", required=True, help="Plumbing graph JSON file")
    zhat.add_argument(
        "--class", dest="class_vector", help="Class vector a as comma-separated integers"
    )
    zhat.add_argument(
        "--pipeline",
        choices=["theta", "support", "both"],
        default="theta",
        help="Enumeration to use; both compares them (default: theta)",
    )
    _order_option(zhat)

    fsqe = verbs.add_parser("fsqe", parents=[common], help="Sum over shifted positive quadrants")
    fsqe.add_argument("--spec", required=True, help="Quadrant-sum spec JSON file")
    fsqe.add_argument(
        "--check", action="store_true", help="Compare against the symmetrized lattice sum"
    )
    _order_option(fsqe)
    _numeric_options(fsqe)

    verbs.add_parser("list", parents=[common], help="List the series registry")
    return parser


def _precision_mode(flag: str | None) -> PrecisionMode:
    value = flag or os.environ.get(PRECISION_ENV) or PrecisionMode.DOUBLE.value
    try:
        return PrecisionMode(value.strip().lower())
    except ValueError:
        raise UsageError(f"{PRECISION_ENV}: expected double or extended, got {value!r}") from None


def _point(text: str | None, label: str) -> complex | None:
    return None if text is None else parse_complex(text, label)


def build_config(args: argparse.Namespace) -> RunConfig:
    """Resolve parsed arguments into a RunConfig; field errors raise UsageError."""
    quadrature = QuadratureConfig()
    if hasattr(args, "nodes"):
        quadrature = QuadratureConfig(
            nodes=args.nodes,
            panels=args.panels,
            tail_cutoff=args.tail,
            tolerance=args.tol,
        )
    options = {key: getattr(args, key) for key in _VERB_OPTIONS if hasattr(args, key)}
    class_vector = getattr(args, "class_vector", None)
    if class_vector:
        try:
            options["class_vector"] = tuple(int(x) for x in class_vector.split(","))
        except ValueError:
            message = f"class: expected comma-separated integers, got {class_vector!r}"
            raise UsageError(message) from None
    return RunConfig(
        verb=args.verb,
        series=getattr(args, "series", None),
        spec_path=getattr(args, "spec", None) or getattr(args, "graph", None),
        order=getattr(args, "order", 10),
        tau=_point(getattr(args, "tau", None), "tau"),
        w=_point(getattr(args, "w", None), "w"),
        quadrature=quadrature,
        precision=_precision_mode(args.precision),
        output_path=args.output,
        output_format=args.format,
        options=options,
    )


def _require_tau(cfg: RunConfig) -> complex:
    if cfg.tau is None:
        raise UsageError(f"tau: required for {cfg.verb}")
    return cfg.tau


def _run_expand(cfg: RunConfig) -> list[Result]:
    if not cfg.series:
        raise UsageError("series: required for expand")
    return [(cfg.series, build_series(cfg.series, None, cfg.order + 1))]


def _run_verify(cfg: RunConfig) -> list[Result]:
    which = cfg.options["which"]
    report = run_check(
        which,
        cfg.order + 1,
        k=cfg.options.get("k", 1),
        tau=cfg.tau,
        cfg=cfg.quadrature,
        numeric=not cfg.options.get("exact_only", False),
    )
    return [(which, report)]


def _finite(value: NumericValue) -> NumericValue:
    z = complex(value.value)
    if not (math.isfinite(z.real) and math.isfinite(z.imag) and math.isfinite(value.error)):
        raise NonconvergentEvaluation(f"evaluation did not converge (value {z}, error {value.error})")
    return value


def _run_eval(cfg: RunConfig) -> list[Result]:
    from false_theta.eichler import completion, evaluate_series

    tau = _require_tau(cfg)
    extended = cfg.precision == PrecisionMode.EXTENDED
    if cfg.series:
        value = evaluate_series(cfg.series, None, tau, cfg.quadrature.tolerance, extended)
        return [(f"{cfg.series}(tau)", _finite(value))]
    kind = cfg.options["completion"]
    spec = None
    if kind == "fsqe":
        from false_theta.invariants import load_fsqe

        if not cfg.spec_path:
            raise UsageError("spec: required for the fsqe completion")
        spec = load_fsqe(cfg.spec_path)
    value = completion(
        kind,
        tau,
        cfg.w,
        cfg.quadrature,
        k=cfg.options.get("k", 1),
        fsqe=spec,
        straight=cfg.options.get("straight", False),
    )
    return [(f"{kind}-completion", _finite(value))]


def _run_transform(cfg: RunConfig) -> list[Result]:
    from false_theta.eichler import modular_residual, verify_eta_multiplier

    tau = _require_tau(cfg)
    kind, matrix = cfg.options["kind"], cfg.options["matrix"]
    limit = cfg.options.get("max_residual", 1e-6)
    if kind == "eta":
        extended = cfg.precision == PrecisionMode.EXTENDED
        return [("eta", verify_eta_multiplier(matrix, tau, extended, limit))]
    if cfg.w is None:
        raise UsageError(f"w: required for the {kind} transformation law")
    started = time.perf_counter()
    residual = _finite(modular_residual(kind, matrix, tau, cfg.w, cfg.quadrature))
    report = VerificationReport(
        name=f"{kind}-transform",
        status=CheckStatus.PASS if abs(residual.value) < limit else CheckStatus.FAIL,
        residual=abs(residual.value),
        tolerance=limit,
        elapsed=time.perf_counter() - started,
        details={"matrix": list(matrix), "error_estimate": residual.error, **residual.details},
    )
    return [(report.name, report)]


def _run_zhat(cfg: RunConfig) -> list[Result]:
    from false_theta.invariants import linking_matrix, load_graph, zhat_compare, zhat_series

    if not cfg.spec_path:
        raise UsageError("graph: required for zhat")
    graph = load_graph(cfg.spec_path)
    lm = linking_matrix(graph)
    class_vector = cfg.options.get("class_vector")
    pipeline = cfg.options.get("pipeline", "theta")
    prec = cfg.order + 1
    results: list[Result] = [("linking_matrix", lm)]
    if pipeline == "both":
        results.append(("zhat-pipelines", zhat_compare(graph, prec, class_vector)))
    else:
        results.append(("Zhat", zhat_series(graph, class_vector, prec, pipeline)))
    return results


def _run_fsqe(cfg: RunConfig) -> list[Result]:
    from false_theta.invariants import (
        fsqe_series,
        load_fsqe,
        verify_fsqe_integral,
        verify_fsqe_symmetrized,
    )

    if not cfg.spec_path:
        raise UsageError("spec: required for fsqe")
    spec = load_fsqe(cfg.spec_path)
    prec = cfg.order + 1
    results: list[Result] = [("F", fsqe_series(spec, prec))]
    if cfg.options.get("check"):
        results.append(("symmetrized", verify_fsqe_symmetrized(spec, prec)))
    if cfg.tau is not None:
        results.append(("integral", verify_fsqe_integral(spec, cfg.tau, cfg.quadrature)))
    return results


def _run_list(cfg: RunConfig) -> list[Result]:
    return [("series", list_series())]


_HANDLERS: dict[str, Callable[[RunConfig], list[Result]]] = {
    "expand": _run_expand,
    "verify": _run_verify,
    "eval": _run_eval,
    "transform": _run_transform,
    "zhat": _run_zhat,
    "fsqe": _run_fsqe,
    "list": _run_list,
}


def dispatch(cfg: RunConfig) -> tuple[int, list[Result]]:
    """Run the verb; the status is EXIT_MISMATCH when any report failed."""
    handler = _HANDLERS.get(cfg.verb)
    if handler is None:
        raise UsageError(f"verb: unknown verb {cfg.verb!r}")
    logger.info("running %s", cfg.verb)
    results = handler(cfg)
    failed = any(isinstance(r, VerificationReport) and not r.passed for _, r in results)
    return (EXIT_MISMATCH if failed else EXIT_OK), results


def _record(label: str, result: Any) -> Any:
    if isinstance(result, QExpansion):
        return {"series": label, **qexpansion_to_dict(result)}
    if isinstance(result, VerificationReport):
        return report_to_dict(result)
    if isinstance(result, NumericValue):
        return {"label": label, **numeric_to_dict(result)}
    if isinstance(result, LinkingMatrix):
        return linking_matrix_to_dict(result)
    if isinstance(result, list):
        return [{"name": b.name, "description": b.describe()} for b in result]
    return result


def _payload(results: Sequence[Result]) -> Any:
    if len(results) == 1:
        return _record(*results[0])
    return {label: _record(label, result) for label, result in results}


def _render(console: Console, results: Sequence[Result], verbose: bool) -> None:
    for label, result in results:
        if isinstance(result, QExpansion):
            print_series(console, label, result, verbose)
        elif isinstance(result, VerificationReport):
            print_report(console, result, verbose)
        elif isinstance(result, NumericValue):
            print_numeric(console, label, result, verbose)
        elif isinstance(result, LinkingMatrix):
            print_linking_matrix(console, result)
        elif isinstance(result, list):
            print_series_list(console, result)


def _setup_logging(verbosity: int, no_color: bool) -> None:
    level = logging.WARNING if verbosity == 0 else logging.INFO if verbosity == 1 else logging.DEBUG
    handler = RichHandler(
        console=Console(stderr=True, no_color=no_color),
        show_time=False,
        show_path=False,
    )
    logging.basicConfig(level=level, format="%(message)s", handlers=[handler], force=True)


def main(argv: Sequence[str] | None = None) -> int:
    """Main entry point for the CLI."""
    args = _build_parser().parse_args(argv)
    _setup_logging(args.verbose, args.no_color)
    err_console = Console(stderr=True, no_color=args.no_color, soft_wrap=True)

    try:
        cfg = build_config(args)
        status, results = dispatch(cfg)

        if cfg.output_path:
            write_output(_payload(results), cfg.output_path)
        if cfg.output_format == "json":
            write_output(_payload(results))
        else:
            console = Console(
                force_terminal=not args.no_color,
                no_color=args.no_color,
                soft_wrap=True,
            )
            _render(console, results, args.verbose > 0)
        return status

    except FalseThetaError as exc:
        print_error(err_console, exc)
        return exc.exit_code
    except (FloatingPointError, OverflowError) as exc:
        print_error(err_console, exc)
        return EXIT_NONCONVERGENT
    except KeyboardInterrupt:
        print("\n\nInterrupted.", file=sys.stderr)
        return 130
