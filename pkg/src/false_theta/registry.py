"""Named-series registry.

Every series the CLI and the MCP server can expand is registered here under a
short name. Names take positional arguments in call syntax, e.g.
``theta(3,1,1)``, ``Lambda(0,1)`` or ``fsqe(data/fsqe_213.json)``.

The named identity checks behind the `verify` verb live here too (CHECKS,
run_check()).
"""

from __future__ import annotations

import re
from collections.abc import Callable
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Protocol, runtime_checkable

from false_theta.qseries import QExpansion
from false_theta.types import (
    MalformedParams,
    QuadratureConfig,
    Rational,
    UnaryThetaSpec,
    UnknownSeries,
    UsageError,
    VerificationReport,
)

_CALL = re.compile(r"^\s*([A-Za-z_][A-Za-z0-9_]*)\s*(?:\((.*)\))?\s*$")


@runtime_checkable
class SeriesBuilder(Protocol):
    """Interface each registry entry must implement."""

    name: str

    def describe(self) -> str:
        """One-line description including the argument names."""
        ...

    def build(self, params: dict[str, Any], prec: Fraction) -> QExpansion:
        """Expand the series, exact for exponents below prec."""
        ...


@dataclass(frozen=True)
class NamedSeries:
    """Registry entry backed by a function of keyword arguments and prec."""

    name: str
    summary: str
    func: Callable[..., QExpansion]
    arguments: tuple[str, ...] = ()
    defaults: tuple[tuple[str, Any], ...] = ()

    def describe(self) -> str:
        signature = f"{self.name}({', '.join(self.arguments)})" if self.arguments else self.name
        return f"{signature}: {self.summary}"

    def build(self, params: dict[str, Any], prec: Fraction) -> QExpansion:
        values = dict(self.defaults)
        values.update(params)
        unknown = set(values) - set(self.arguments)
        if unknown:
            raise MalformedParams(f"{self.name}: unexpected parameters {sorted(unknown)}")
        missing = [a for a in self.arguments if a not in values]
        if missing:
            raise MalformedParams(f"{self.name}: missing parameters {missing}")
        return self.func(prec=prec, **values)


def _integer(value: Any, label: str) -> int:
    number = Fraction(value)
    if number.denominator != 1:
        raise MalformedParams(f"{label} must be an integer, got {value}")
    return int(number)


def _eta(prec: Fraction) -> QExpansion:
    from false_theta.special import eta_series

    return eta_series(prec)


def _eta3(prec: Fraction) -> QExpansion:
    from false_theta.special import eta_cubed_series

    return eta_cubed_series(prec)


def _e2(prec: Fraction) -> QExpansion:
    from false_theta.special import e2_series

    return e2_series(prec)


def _theta(prec: Fraction, m: Any, r: Any, k: Any = 0) -> QExpansion:
    from false_theta.special import theta_unary_series

    spec = UnaryThetaSpec(Fraction(m), _integer(r, "r"), _integer(k, "k"))
    return theta_unary_series(spec, prec)


def _theta_torsion(prec: Fraction, l1: Any, l2: Any) -> QExpansion:
    from false_theta.special import theta_torsion_series

    return theta_torsion_series(_integer(l1, "l1"), _integer(l2, "l2"), prec).series


def _lattice(attr: str, *names: str) -> Callable[..., QExpansion]:
    def build(prec: Fraction, **kwargs: Any) -> QExpansion:
        from false_theta import lattice

        args = [_integer(kwargs[n], n) for n in names]
        return getattr(lattice, attr)(*args, prec)

    return build


def _jacobi(attr: str, *names: str, half: tuple[str, ...] = ()) -> Callable[..., QExpansion]:
    def build(prec: Fraction, **kwargs: Any) -> QExpansion:
        from false_theta import jacobi_ct

        args = [Fraction(kwargs[n]) if n in half else _integer(kwargs[n], n) for n in names]
        if attr == "tk_coefficient":
            return jacobi_ct.tk_coefficient(args[0], (args[1], args[2]), prec)
        if names:
            return getattr(jacobi_ct, attr)(tuple(args), prec)
        return getattr(jacobi_ct, attr)(prec)

    return build


def _fsqe(prec: Fraction, path: str) -> QExpansion:
    from false_theta.invariants import fsqe_series, load_fsqe

    return fsqe_series(load_fsqe(path), prec)


def _zhat(prec: Fraction, path: str) -> QExpansion:
    from false_theta.invariants import load_graph, zhat_series

    return zhat_series(load_graph(path), None, prec)


_ENTRIES: tuple[NamedSeries, ...] = (
    NamedSeries("eta", "Dedekind eta q^(1/24) prod (1 - q^n)", _eta),
    NamedSeries("eta3", "eta^3 = sum (-1)^n (2n+1) q^((2n+1)^2/8)", _eta3),
    NamedSeries("E2", "Eisenstein series 1 - 24 sum sigma_1(n) q^n", _e2),
    NamedSeries(
        "theta", "unary theta^[k]_{m,r}", _theta, ("m", "r", "k"), (("k", 0),)
    ),
    NamedSeries(
        "theta_torsion",
        "theta((l1 tau + l2)/2) divided by i^(1+l2)",
        _theta_torsion,
        ("l1", "l2"),
    ),
    NamedSeries("psi", "sum sgn(n + 1/4) q^(2 (n + 1/4)^2)", _lattice("psi_series")),
    NamedSeries("phi", "sum over Z + r/6 of sgn(n) q^(3 n^2)", _lattice("phi_series", "r"), ("r",)),
    NamedSeries(
        "omega",
        "alternating sum over Z + r/3 + 1/2 of sgn(n) q^(3 n^2 / 2)",
        _lattice("omega_series", "r"),
        ("r",),
    ),
    NamedSeries("G0", "holomorphic part G_0 of the A2 constant term", _lattice("g0_series")),
    NamedSeries("Psi", "rank two false theta Psi over Z^2 + (1/3, 1/3)", _lattice("big_psi_series")),
    NamedSeries("Phi", "rank two false theta Phi = Phi_1 + Phi_2", _lattice("big_phi_series")),
    NamedSeries("Phi1", "first part of Phi with its E2 coupling", _lattice("big_phi1_series")),
    NamedSeries("Phi2", "second part of Phi", _lattice("big_phi2_series")),
    NamedSeries(
        "Lambda",
        "rank two false theta Lambda_a on the B2 form",
        _lattice("lambda_series", "a1", "a2"),
        ("a1", "a2"),
    ),
    NamedSeries("F0", "holomorphic part F_0 of the B2 constant term", _lattice("f0_series")),
    NamedSeries("Fk", "Schur index series F_k", _lattice("fk_series", "k"), ("k",)),
    NamedSeries("A2char", "constant term of the A2 character product", _jacobi("a2_constant_term")),
    NamedSeries("B2char", "constant term of the B2 character product", _jacobi("b2_constant_term")),
    NamedSeries(
        "D", "Fourier coefficient D(r) of the A2 quotient", _jacobi("coeff_D", "r1", "r2"), ("r1", "r2")
    ),
    NamedSeries(
        "C",
        "Fourier coefficient C(r) of the B2 quotient, r2 half-integral",
        _jacobi("coeff_C", "r1", "r2", half=("r2",)),
        ("r1", "r2"),
    ),
    NamedSeries(
        "Tk",
        "Fourier coefficient of the Schur-index Jacobi form",
        _jacobi("tk_coefficient", "k", "r1", "r2"),
        ("k", "r1", "r2"),
    ),
    NamedSeries("fsqe", "sum over shifted positive quadrants from a spec file", _fsqe, ("path",)),
    NamedSeries("zhat", "homological block of a plumbing graph file", _zhat, ("path",)),
)

# Registry of available series (lazily populated)
_registry: dict[str, SeriesBuilder] | None = None


def _get_registry() -> dict[str, SeriesBuilder]:
    global _registry
    if _registry is None:
        _registry = {entry.name: entry for entry in _ENTRIES}
    return _registry


def register(builder: SeriesBuilder) -> None:
    """Add or replace a registry entry."""
    _get_registry()[builder.name] = builder


def list_series() -> list[SeriesBuilder]:
    """All registered builders in registration order."""
    return list(_get_registry().values())


def get_builder(name: str) -> SeriesBuilder:
    builders = _get_registry()
    if name not in builders:
        raise UnknownSeries(f"unknown series {name!r}; run `false-theta list` for the registry")
    return builders[name]


def _parse_argument(text: str) -> Any:
    text = text.strip()
    try:
        return Fraction(text)
    except ValueError:
        return text


def parse_series_name(text: str) -> tuple[str, dict[str, Any]]:
    """Split ``name(a, b)`` into the registry name and its keyword parameters."""
    match = _CALL.match(text)
    if not match:
        raise MalformedParams(f"cannot parse series name {text!r}")
    name, args = match.group(1), match.group(2)
    builder = get_builder(name)
    if args is None or not args.strip():
        return name, {}
    values = [_parse_argument(a) for a in args.split(",")]
    arguments = getattr(builder, "arguments", ())
    if len(values) > len(arguments):
        raise MalformedParams(f"{name} takes at most {len(arguments)} arguments, got {len(values)}")
    return name, dict(zip(arguments, values, strict=False))


def build_series(name: str, params: dict[str, Any] | None, prec: Rational) -> QExpansion:
    """Expand the named series, exact for exponents below prec.

    name may carry positional arguments (``Lambda(0,1)``); keyword params
    override them.
    """
    base, parsed = parse_series_name(name)
    parsed.update(params or {})
    return get_builder(base).build(parsed, Fraction(prec))


# Identity checks the `verify` verb and the verify_identity tool can run
CHECKS: dict[str, str] = {
    "A2": "A2 constant term: oracle, closed form and false theta decomposition agree",
    "B2": "B2 constant term: oracle, closed form and false theta decomposition agree",
    "JTP": "Jacobi triple product, coefficientwise in zeta and q",
    "eta3": "eta^3 as a unary theta series and as theta'(0)",
    "k1theta": "k = 1 Schur theta identity against eta(3 w1)^3 eta(w2)^3 / 8",
    "Fk": "F_k: constant term of the Jacobi form, k = 1 theta identity, integral form",
    "D00": "D(0,0) closed form against the oracle and sum n q^(n^2)",
    "signlemma": "sign lemma residuals on a 3 x 3 x 3 grid",
    "lemmas": "partial-fraction theta identities at sample points",
    "rank2": "rank two sign products against their double-integral form",
}


def run_check(
    which: str,
    prec: Rational,
    *,
    k: int = 1,
    tau: complex | None = None,
    cfg: QuadratureConfig | None = None,
    numeric: bool = True,
) -> VerificationReport:
    """Run a named identity check; exact checks cover exponents below prec.

    tau overrides the sample point of the numeric checks. numeric=False
    restricts Fk to its exact parts.
    """
    if which in ("A2", "B2"):
        from false_theta.jacobi_ct import verify_decomposition

        return verify_decomposition(which, prec)
    if which == "JTP":
        from false_theta.jacobi_ct import verify_triple_product

        return verify_triple_product(prec)
    if which == "eta3":
        from false_theta.special import verify_eta_cubed

        return verify_eta_cubed(prec)
    if which == "k1theta":
        from false_theta.invariants import verify_k1_theta_identity

        return verify_k1_theta_identity(prec)
    if which == "Fk":
        from false_theta.invariants import fk_identity_suite

        point = (tau if tau is not None else 2j) if numeric else None
        return fk_identity_suite(k, prec, point, cfg)
    if which == "D00":
        from false_theta.jacobi_ct import verify_coefficient

        return verify_coefficient("D", (0, 0), prec)
    if which == "signlemma":
        from false_theta.eichler import sign_lemma_grid

        return sign_lemma_grid(tau if tau is not None else 1j, cfg)
    if which == "lemmas":
        from false_theta.eichler import lemma_suite

        return lemma_suite()
    if which == "rank2":
        from false_theta.eichler import rank_two_suite

        return rank_two_suite(tau if tau is not None else 1j, cfg)
    raise UsageError(f"which: unknown check {which!r}; expected one of {', '.join(CHECKS)}")
