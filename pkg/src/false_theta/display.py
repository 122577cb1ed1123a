"""Display and formatting functions for false-theta output.

Contains all Rich-based rendering of series, verification reports, numeric
values, and registry listings for the human output format.

Key functions:
- format_series(): Render a QExpansion as "1 + 3 q^2 + 8 q^3"
- print_series(): Series with its truncation order
- print_report(): PASS/FAIL line plus a details table
- print_numeric(): Value with error estimate and diagnostics
- print_series_list(): Registry table for the `list` verb
- print_linking_matrix(): Linking matrix with its flags
- print_error(): One-line diagnostic for a domain error

Update this docstring if you add new display/formatting functions or change
the rendering approach (e.g., switching from Rich to another library).
"""

from __future__ import annotations

from collections.abc import Sequence
from fractions import Fraction
from typing import Any

from rich.console import Console
from rich.panel import Panel
from rich.table import Table
from rich.text import Text

from false_theta.qseries import QExpansion
from false_theta.registry import SeriesBuilder
from false_theta.types import LinkingMatrix, NumericValue, VerificationReport

# Terms shown before eliding the middle of a long series
MAX_TERMS_SHOWN = 40


def _power(exponent: Fraction) -> str:
    if exponent == 0:
        return ""
    if exponent == 1:
        return "q"
    if exponent.denominator == 1 and exponent > 0:
        return f"q^{exponent}"
    return f"q^({exponent})"


def _term(coeff: Fraction, exponent: Fraction, first: bool) -> str:
    sign = "-" if coeff < 0 else "+"
    magnitude = abs(coeff)
    power = _power(exponent)
    if not power:
        body = str(magnitude)
    elif magnitude == 1:
        body = power
    else:
        body = f"{magnitude} {power}"
    if first:
        return f"-{body}" if sign == "-" else body
    return f" {sign} {body}"


def format_series(series: QExpansion, max_terms: int | None = MAX_TERMS_SHOWN) -> str:
    """Render stored terms in ascending order; zero renders as "0"."""
    items = list(series.items())
    if not items:
        return "0"
    if max_terms is not None and len(items) > max_terms:
        head = items[: max_terms // 2]
        tail = items[-(max_terms - len(head)) :]
        skipped = len(items) - len(head) - len(tail)
        text = "".join(_term(c, e, i == 0) for i, (e, c) in enumerate(head))
        text += f" + ... ({skipped} terms) ..."
        return text + "".join(_term(c, e, False) for e, c in tail)
    return "".join(_term(c, e, i == 0) for i, (e, c) in enumerate(items))


def print_series(
    console: Console, label: str, series: QExpansion, verbose: bool = False
) -> None:
    """Print a labelled series followed by its O(q^N) remainder."""
    line = Text()
    line.append(f"{label} = ", style="bold cyan")
    line.append(format_series(series, None if verbose else MAX_TERMS_SHOWN))
    if series.precision is not None:
        line.append(f" + O({_power(series.precision) or '1'})", style="dim")
    console.print(line)


def _format_value(value: Any) -> str:
    if isinstance(value, complex):
        return f"{value.real:.12g} {'+' if value.imag >= 0 else '-'} {abs(value.imag):.12g}i"
    if isinstance(value, float):
        return f"{value:.6g}"
    if isinstance(value, (list, tuple)):
        return ", ".join(_format_value(v) for v in value)
    return str(value)


def _details_table(details: dict[str, Any]) -> Table:
    table = Table(show_header=False, box=None, padding=(0, 2))
    table.add_column(style="dim")
    table.add_column()
    for key, value in details.items():
        if isinstance(value, dict):
            value = "; ".join(f"{k}: {_format_value(v)}" for k, v in value.items())
        table.add_row(str(key), _format_value(value))
    return table


def print_report(console: Console, report: VerificationReport, verbose: bool = False) -> None:
    """Print the outcome line of a verification and, when verbose, its details."""
    header = Text()
    if report.passed:
        header.append("✓ PASS ", style="green bold")
    else:
        header.append("✗ FAIL ", style="red bold")
    header.append(report.name, style="bold")
    if report.order is not None:
        header.append(f"  below {_power(report.order) or '1'}", style="dim")
    header.append(f"  ({report.elapsed:.2f}s)", style="dim")
    console.print(header)

    if report.first_mismatch is not None:
        console.print(f"  [red]first mismatch at exponent {report.first_mismatch}[/red]")
    if report.residual is not None:
        style = "green" if report.passed else "red"
        tolerance = f" (tolerance {report.tolerance:.0e})" if report.tolerance is not None else ""
        console.print(f"  [{style}]residual {report.residual:.3e}[/{style}][dim]{tolerance}[/dim]")
    if report.details and (verbose or not report.passed):
        console.print(_details_table(report.details))


def print_numeric(
    console: Console, label: str, value: NumericValue, verbose: bool = False
) -> None:
    """Print a complex value with its error estimate."""
    line = Text()
    line.append(f"{label} = ", style="bold cyan")
    line.append(_format_value(complex(value.value)))
    line.append(f"  ± {value.error:.2e}", style="dim")
    console.print(line)
    if value.details and verbose:
        console.print(_details_table(value.details))


def print_series_list(console: Console, builders: Sequence[SeriesBuilder]) -> None:
    """Registry listing used by the `list` verb."""
    table = Table(title="Registered series", title_style="bold")
    table.add_column("Name", style="cyan", no_wrap=True)
    table.add_column("Description")
    for builder in builders:
        signature, _, summary = builder.describe().partition(": ")
        table.add_row(signature, summary)
    console.print(table)


def print_linking_matrix(console: Console, lm: LinkingMatrix) -> None:
    rows = "\n".join("  ".join(f"{x:>3}" for x in row) for row in lm.entries)
    flags = Text()
    flags.append(f"det {lm.determinant}", style="bold")
    if lm.positive_definite:
        flags.append("  positive definite", style="green")
    else:
        flags.append("  not positive definite", style="yellow")
    if lm.unimodular:
        flags.append("  unimodular", style="green")
    console.print(Panel(rows, title="Linking matrix", expand=False))
    console.print(flags)


def print_error(console: Console, exc: Exception) -> None:
    """One-line diagnostic naming the error class."""
    line = Text()
    line.append(f"Error ({type(exc).__name__}): ", style="red bold")
    line.append(str(exc))
    console.print(line)
