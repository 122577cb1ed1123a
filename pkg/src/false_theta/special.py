"""Named modular building blocks as exact q-series.

Key functions:
- eta_series(), eta_cubed_series(), eta_power(): Dedekind eta and its powers
- e2_series(): the quasimodular Eisenstein series E2
- theta_unary_series(): unary theta functions theta^[k]_{m,r} for integer and half-integer m
- theta_torsion_series(): the Jacobi theta function at the 2-torsion points (l1 tau + l2)/2
- theta_derivative_at_zero(): z-derivative of the Jacobi theta function at z = 0
- eta6_over_theta_squared(): the quotients eta^6 / theta((l1 tau + l2)/2)^2
- serre_derivative(): the Ramanujan-Serre derivative D_k
- verify_eta_cubed(): eta^3 against the cube of eta and the theta derivative at zero

All precisions are exclusive exponent bounds: coefficients of q^e are exact for e < prec.

Update this docstring if you add new constructors.
"""

from __future__ import annotations

import logging
import math
import time
from dataclasses import dataclass
from fractions import Fraction

from sympy import divisor_sigma

from false_theta.qseries import (
    QExpansion,
    first_mismatch,
    from_terms,
    invert,
    mul,
    power,
    q_derivative,
    scale,
    sub,
    truncate,
)
from false_theta.types import (
    CheckStatus,
    InvalidTorsionPoint,
    Rational,
    TruncationRequired,
    UnaryThetaSpec,
    VerificationReport,
)

logger = logging.getLogger(__name__)

# Working margin (in powers of q) for quotients whose operands have leads within +-1/2
_MARGIN = 1


@dataclass(frozen=True)
class PhasedExpansion:
    """A value i^phase * series with a rational series."""

    phase: int
    series: QExpansion

    def __post_init__(self) -> None:
        object.__setattr__(self, "phase", self.phase % 4)

    def square(self) -> QExpansion:
        """(i^p S)^2 = (-1)^p S^2 as a rational series."""
        sq = mul(self.series, self.series)
        return scale(sq, -1) if self.phase % 2 else sq


def _bilateral_range(center: Fraction, radius: float) -> range:
    """Integers t with |t + center| possibly below radius."""
    lo = math.floor(-radius - float(center)) - 1
    hi = math.ceil(radius - float(center)) + 1
    return range(lo, hi + 1)


def eta_series(prec: Rational) -> QExpansion:
    """q^(1/24) prod (1 - q^n) via sum_k (-1)^k q^((6k-1)^2/24)."""
    p = Fraction(prec)
    terms: dict[Fraction, int] = {}
    bound = math.isqrt(max(int(24 * p), 0)) + 2
    for k in range(-bound // 6 - 1, bound // 6 + 2):
        e = Fraction((6 * k - 1) ** 2, 24)
        if e < p:
            terms[e] = (-1) ** (k % 2)
    return from_terms(terms, p)


def eta_cubed_series(prec: Rational) -> QExpansion:
    """eta^3 = sum_{n>=0} (-1)^n (2n+1) q^((2n+1)^2/8)."""
    p = Fraction(prec)
    terms: dict[Fraction, int] = {}
    n = 0
    while Fraction((2 * n + 1) ** 2, 8) < p:
        terms[Fraction((2 * n + 1) ** 2, 8)] = (-1) ** n * (2 * n + 1)
        n += 1
    return from_terms(terms, p)


def eta_power(k: int, prec: Rational) -> QExpansion:
    """eta^k for an integer k, exact below prec."""
    p = Fraction(prec)
    if k >= 0:
        return truncate(power(eta_series(p), k), p)
    # eta^k with k < 0 has lead k/24; the inverse of eta^|k| needs |k|/12 extra room
    base = power(eta_series(p + Fraction(-k, 12) + _MARGIN), -k)
    return truncate(invert(base), p)


def e2_series(prec: Rational) -> QExpansion:
    """E2 = 1 - 24 sum sigma_1(n) q^n."""
    p = Fraction(prec)
    terms: dict[int, int] = {0: 1}
    n = 1
    while n < p:
        terms[n] = -24 * int(divisor_sigma(n, 1))
        n += 1
    return from_terms(terms, p)


def theta_unary_series(spec: UnaryThetaSpec, prec: Rational) -> QExpansion:
    """theta^[k]_{m,r}: sum n^k q^(m n^2) over n in Z + r/2m, alternating for half-integer m.

    For half-integer m the sum runs over n in Z + r/2m + 1/2 with the sign
    (-1)^(n - r/2m - 1/2).
    """
    p = Fraction(prec)
    m = spec.m
    offset = Fraction(spec.r) / (2 * m)
    if not spec.is_integral:
        offset += Fraction(1, 2)
    radius = math.sqrt(max(float(p / m), 0.0))
    terms: dict[Fraction, Fraction] = {}
    for t in _bilateral_range(offset, radius):
        n = t + offset
        e = m * n * n
        if e >= p:
            continue
        c = n**spec.k
        if not spec.is_integral and (n - offset) % 2:
            c = -c
        terms[e] = terms.get(e, Fraction(0)) + c
    logger.debug("%s: %d lattice points below q^%s", spec.label, len(terms), p)
    return from_terms(terms, p)


def theta_torsion_series(l1: int, l2: int, prec: Rational) -> PhasedExpansion:
    """theta((l1 tau + l2)/2; tau) from the bilateral sum of the Jacobi theta function.

    With n = m + 1/2 the value is i^(1 + l2) sum_m (-1)^(m(1 + l2)) q^(n^2/2 + l1 n/2).
    """
    if l1 % 2 == 0 and l2 % 2 == 0:
        raise InvalidTorsionPoint(
            f"theta vanishes identically at the lattice point ({l1} tau + {l2})/2"
        )
    p = Fraction(prec)
    half = Fraction(1, 2)
    # exponent = ((n + l1/2)^2 - l1^2/4) / 2
    radius = math.sqrt(max(float(2 * p + Fraction(l1 * l1, 4)), 0.0))
    terms: dict[Fraction, int] = {}
    for m in _bilateral_range(half + Fraction(l1, 2), radius):
        n = m + half
        e = n * n / 2 + l1 * n / 2
        if e >= p:
            continue
        terms[e] = terms.get(e, 0) + (-1) ** ((m * (1 + l2)) % 2)
    return PhasedExpansion(1 + l2, from_terms(terms, p))


def theta_derivative_at_zero(prec: Rational) -> PhasedExpansion:
    """(1/2 pi i) d/dz theta(z; tau) at z = 0, i.e. sum over n in Z + 1/2 of e^(pi i n) n q^(n^2/2)."""
    p = Fraction(prec)
    terms: dict[Fraction, Fraction] = {}
    radius = math.sqrt(max(float(2 * p), 0.0))
    for m in _bilateral_range(Fraction(1, 2), radius):
        n = m + Fraction(1, 2)
        e = n * n / 2
        if e < p:
            terms[e] = terms.get(e, Fraction(0)) + (-1) ** (m % 2) * n
    # e^(pi i n) = i (-1)^m
    return PhasedExpansion(1, from_terms(terms, p))


def eta6_over_theta_squared(l1: int, l2: int, prec: Rational) -> QExpansion:
    """eta^6 / theta((l1 tau + l2)/2; tau)^2 as a rational series."""
    p = Fraction(prec)
    work = p + _MARGIN
    theta_sq = theta_torsion_series(l1, l2, work).square()
    quotient = mul(eta_power(6, work), invert(theta_sq))
    return truncate(quotient, p)


def serre_derivative(f: QExpansion, k: Rational, prec: Rational | None = None) -> QExpansion:
    """D_k f = q d/dq f - (k/12) E2 f."""
    target = f.precision if prec is None else Fraction(prec)
    if target is None:
        raise TruncationRequired("serre_derivative of an exact series needs a precision")
    if f.precision is not None:
        target = min(target, f.precision)
    lead = f.lead_exponent or Fraction(0)
    e2 = e2_series(max(target - min(lead, Fraction(0)), Fraction(1)))
    result = sub(q_derivative(f), scale(mul(e2, f), Fraction(k) / 12))
    return truncate(result, target)


def verify_eta_cubed(prec: Rational) -> VerificationReport:
    """eta^3 three ways: the cube of eta, the odd-square sum, and the z-derivative of theta at 0."""
    p = Fraction(prec)
    started = time.perf_counter()
    series = eta_cubed_series(p)
    cube = truncate(power(eta_series(p), 3), p)
    derivative = theta_derivative_at_zero(p)
    checks = [first_mismatch(series, cube), first_mismatch(series, derivative.series)]
    mismatches = [m for m in checks if m is not None]
    if derivative.phase != 1:
        mismatches.append(Fraction(0))
    first = min(mismatches) if mismatches else None
    return VerificationReport(
        name="eta3",
        status=CheckStatus.PASS if first is None else CheckStatus.FAIL,
        order=p,
        first_mismatch=first,
        elapsed=time.perf_counter() - started,
        details={"terms": len(series.coeffs)},
    )
