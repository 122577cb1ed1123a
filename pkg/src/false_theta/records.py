"""Structured-text records shared by the CLI and the MCP server.

Rationals are written as "p/q" strings and complex numbers as [re, im]
pairs of doubles. Series records keep exponents ascending so output is
stable across runs.

Key functions:
- rational_to_str(), parse_rational(), parse_complex(): scalar encodings
- qexpansion_to_dict(), qexpansion_from_dict(): the QExpansion record
- false_theta_spec_to_dict(), false_theta_spec_from_dict(): rank two lattice sum specs
- report_to_dict(), numeric_to_dict(), linking_matrix_to_dict()
- write_output(): JSON to stdout or to a file

Update this docstring if you add new record types.
"""

from __future__ import annotations

import json
import os
import re
import sys
from fractions import Fraction
from pathlib import Path
from typing import Any

from false_theta.qseries import QExpansion
from false_theta.types import (
    FalseThetaSpec,
    LinkingMatrix,
    MalformedParams,
    NumericValue,
    QuadraticConvention,
    Rational,
    SignPair,
    UsageError,
    VerificationReport,
)

_COMPLEX_TOKEN = re.compile(r"[+-]?[^+-]+")


def rational_to_str(x: Rational) -> str:
    x = Fraction(x)
    return f"{x.numerator}/{x.denominator}"


def parse_rational(value: Any, label: str = "value") -> Fraction:
    """Accept "p/q", decimal strings and ints; floats are rejected as lossy."""
    if isinstance(value, (bool, float)):
        raise MalformedParams(f"{label}: expected a rational as \"p/q\", got {value!r}")
    try:
        return Fraction(value)
    except (TypeError, ValueError, ZeroDivisionError) as exc:
        raise MalformedParams(f"{label}: cannot parse {value!r} as a rational") from exc


def complex_to_list(z: complex) -> list[float]:
    return [float(z.real), float(z.imag)]


def parse_complex(value: Any, label: str = "point") -> complex:
    """Read a point given as [re, im], a number, or text like "2i", "1/3+1.5i", "0.2+i".

    Real and imaginary parts in text form may be decimals or fractions.
    """
    if isinstance(value, (list, tuple)):
        if len(value) != 2:
            raise UsageError(f"{label}: expected [re, im], got {value!r}")
        try:
            return complex(float(value[0]), float(value[1]))
        except (TypeError, ValueError) as exc:
            raise UsageError(f"{label}: expected [re, im] numbers, got {value!r}") from exc
    if isinstance(value, (int, float, complex)) and not isinstance(value, bool):
        return complex(value)
    if not isinstance(value, str):
        raise UsageError(f"{label}: cannot parse {value!r} as a complex number")
    text = value.replace(" ", "").replace("j", "i")
    if not text:
        raise UsageError(f"{label}: empty value")
    re_part = Fraction(0)
    im_part = Fraction(0)
    consumed = ""
    for token in _COMPLEX_TOKEN.findall(text):
        consumed += token
        imaginary = "i" in token
        body = token.replace("*", "").replace("i", "", 1) if imaginary else token
        if imaginary and body in ("", "+", "-"):
            body += "1"
        try:
            part = Fraction(body)
        except (ValueError, ZeroDivisionError) as exc:
            raise UsageError(f"{label}: cannot parse {value!r} as a complex number") from exc
        if imaginary:
            im_part += part
        else:
            re_part += part
    if consumed != text:
        raise UsageError(f"{label}: cannot parse {value!r} as a complex number")
    return complex(float(re_part), float(im_part))


def qexpansion_to_dict(a: QExpansion) -> dict[str, Any]:
    """{"denom": D, "trunc": N or null, "coeffs": [[n, "p/q"], ...]} for sum c_n q^(n/D)."""
    return {
        "denom": a.denom,
        "trunc": a.trunc,
        "coeffs": [[n, rational_to_str(c)] for n, c in sorted(a.coeffs.items())],
    }


def qexpansion_from_dict(data: dict[str, Any]) -> QExpansion:
    try:
        denom = int(data["denom"])
        trunc = data.get("trunc")
        coeffs = {int(n): parse_rational(c, f"coefficient of index {n}") for n, c in data["coeffs"]}
    except (KeyError, TypeError, ValueError) as exc:
        raise MalformedParams(f"series record: expected denom, trunc and coeffs ({exc})") from exc
    if denom <= 0:
        raise MalformedParams(f"series record: denom must be positive, got {denom}")
    return QExpansion(denom, coeffs, None if trunc is None else int(trunc))


def false_theta_spec_to_dict(spec: FalseThetaSpec) -> dict[str, Any]:
    return {
        "gram": [[rational_to_str(x) for x in row] for row in spec.gram],
        "shift": [rational_to_str(x) for x in spec.shift],
        "signs": [
            {
                "lam": [rational_to_str(x) for x in pair.lam],
                "mu": [rational_to_str(x) for x in pair.mu],
                "coeff": rational_to_str(pair.coeff),
            }
            for pair in spec.signs
        ],
        "weight": [[i, j, rational_to_str(c)] for i, j, c in spec.weight],
        "parity": list(spec.parity),
        "scale": rational_to_str(spec.scale),
        "convention": spec.convention.value,
        "prefactor_exponent": rational_to_str(spec.prefactor_exponent),
    }


def _rational_pair(values: Any, label: str) -> tuple[Fraction, Fraction]:
    if len(values) != 2:
        raise MalformedParams(f"{label}: expected two entries, got {len(values)}")
    return parse_rational(values[0], label), parse_rational(values[1], label)


def false_theta_spec_from_dict(data: dict[str, Any]) -> FalseThetaSpec:
    """Inverse of false_theta_spec_to_dict; only "gram" is required."""
    try:
        rows = data["gram"]
        gram = (_rational_pair(rows[0], "gram"), _rational_pair(rows[1], "gram"))
        signs = [
            SignPair(
                _rational_pair(s["lam"], "signs.lam"),
                _rational_pair(s["mu"], "signs.mu"),
                parse_rational(s.get("coeff", "1"), "signs.coeff"),
            )
            for s in data.get("signs", [])
        ]
        weight = [
            (int(i), int(j), parse_rational(c, "weight")) for i, j, c in data.get("weight", [[0, 0, "1"]])
        ]
        parity = tuple(int(p) for p in data.get("parity", (0, 0)))
        convention = QuadraticConvention(data.get("convention", "half"))
    except (KeyError, TypeError, IndexError) as exc:
        raise MalformedParams(f"false theta spec: expected gram, shift, signs, weight ({exc})") from exc
    except ValueError as exc:
        raise MalformedParams(f"false theta spec: {exc}") from exc
    if len(parity) != 2:
        raise MalformedParams(f"parity: expected two entries, got {len(parity)}")
    return FalseThetaSpec(
        gram=gram,
        shift=_rational_pair(data.get("shift", ("0", "0")), "shift"),
        signs=signs,
        weight=weight,
        parity=parity,  # type: ignore[arg-type]
        scale=parse_rational(data.get("scale", "1"), "scale"),
        convention=convention,
        prefactor_exponent=parse_rational(data.get("prefactor_exponent", "0"), "prefactor_exponent"),
    )


def _plain(value: Any) -> Any:
    """Make detail values JSON-safe."""
    if isinstance(value, Fraction):
        return rational_to_str(value)
    if isinstance(value, complex):
        return complex_to_list(value)
    if isinstance(value, dict):
        return {str(k): _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if isinstance(value, QExpansion):
        return qexpansion_to_dict(value)
    if hasattr(value, "item"):  # numpy scalars
        return _plain(value.item())
    return value


def report_to_dict(report: VerificationReport) -> dict[str, Any]:
    result: dict[str, Any] = {
        "name": report.name,
        "status": report.status.value,
        "elapsed": round(report.elapsed, 3),
    }
    if report.order is not None:
        result["order"] = rational_to_str(report.order)
    if report.first_mismatch is not None:
        result["first_mismatch_exponent"] = rational_to_str(report.first_mismatch)
    if report.residual is not None:
        result["residual"] = float(report.residual)
    if report.tolerance is not None:
        result["tolerance"] = report.tolerance
    if report.details:
        result["details"] = _plain(report.details)
    return result


def numeric_to_dict(value: NumericValue) -> dict[str, Any]:
    result: dict[str, Any] = {
        "value": complex_to_list(complex(value.value)),
        "error": float(value.error),
    }
    if value.details:
        result["details"] = _plain(value.details)
    return result


def linking_matrix_to_dict(lm: LinkingMatrix) -> dict[str, Any]:
    return {
        "entries": [list(row) for row in lm.entries],
        "determinant": lm.determinant,
        "positive_definite": lm.positive_definite,
        "unimodular": lm.unimodular,
    }


def dumps(payload: Any) -> str:
    return json.dumps(_plain(payload), indent=2)


def write_output(payload: Any, path: str | Path | None = None) -> Path | None:
    """Write a JSON record to path, or to stdout when path is None.

    File writes go through a temporary file and a rename so readers never see
    a partial record.
    """
    text = dumps(payload)
    if path is None:
        sys.stdout.write(text + "\n")
        return None
    target = Path(path)
    temp_path = target.with_suffix(target.suffix + ".tmp")
    try:
        temp_path.write_text(text + "\n")
        os.replace(temp_path, target)
    except OSError as exc:
        temp_path.unlink(missing_ok=True)
        raise UsageError(f"output: cannot write {target} ({exc.strerror})") from exc
    return target
