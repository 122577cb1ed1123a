"""Exact truncated q-series with rational exponents and rational coefficients.

Every q-series in the package is a QExpansion: a finite map from integer
indices n to exact rationals c_n, read as sum c_n q^(n/denom), together with
an exclusive truncation index. Coefficients below trunc/denom are exact, those
above are unknown. trunc=None marks an exact (finite) series such as a
polynomial.

Key functions:
- arith(), add(), sub(), mul(), scale(): truncated ring arithmetic
- invert(), power(): reciprocals and integer powers
- substitute_power(), shift(), truncate(): exponent manipulations
- q_derivative(): the q d/dq derivative
- eval_numeric(): value at a point of the upper half-plane with a tail estimate
- from_terms(), monomial(), constant(), qpochhammer(): constructors
- first_mismatch(): lowest exponent where two series disagree

Update this docstring if you add new operations or change the truncation rules.
"""

from __future__ import annotations

import logging
import math
from collections.abc import Callable, Iterable, Iterator, Mapping
from dataclasses import dataclass
from fractions import Fraction
from typing import Literal

import mpmath
import numpy as np

from false_theta.types import (
    NonconvergentEvaluation,
    NumericValue,
    Rational,
    TruncationRequired,
    ZeroLeadingCoefficient,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class QExpansion:
    """Truncated series sum c_n q^(n/denom), exact for exponents below trunc/denom.

    Construction canonicalizes: zero coefficients and indices at or above trunc
    are dropped and the denominator is reduced as far as indices and trunc allow.
    """

    denom: int
    coeffs: Mapping[int, Fraction]
    trunc: int | None = None

    def __post_init__(self) -> None:
        if self.denom <= 0:
            raise ValueError(f"denominator must be positive, got {self.denom}")
        kept = {
            int(n): Fraction(c)
            for n, c in self.coeffs.items()
            if c != 0 and (self.trunc is None or n < self.trunc)
        }
        g = self.denom
        for n in kept:
            g = math.gcd(g, n)
        if self.trunc is not None:
            g = math.gcd(g, self.trunc)
        if g > 1:
            kept = {n // g: c for n, c in kept.items()}
        object.__setattr__(self, "coeffs", dict(sorted(kept.items())))
        object.__setattr__(self, "denom", self.denom // g)
        if self.trunc is not None:
            object.__setattr__(self, "trunc", self.trunc // g)

    @property
    def is_exact(self) -> bool:
        return self.trunc is None

    @property
    def is_zero(self) -> bool:
        return not self.coeffs

    @property
    def precision(self) -> Fraction | None:
        """Exclusive exponent bound below which coefficients are known."""
        return None if self.trunc is None else Fraction(self.trunc, self.denom)

    @property
    def lead(self) -> int | None:
        """Smallest stored index; trunc for a truncated zero, None for exact zero."""
        return next(iter(self.coeffs)) if self.coeffs else self.trunc

    @property
    def lead_exponent(self) -> Fraction | None:
        lead = self.lead
        return None if lead is None else Fraction(lead, self.denom)

    @property
    def lead_coefficient(self) -> Fraction:
        if not self.coeffs:
            return Fraction(0)
        return next(iter(self.coeffs.values()))

    def items(self) -> Iterator[tuple[Fraction, Fraction]]:
        """Yield (exponent, coefficient) pairs in ascending exponent order."""
        for n, c in self.coeffs.items():
            yield Fraction(n, self.denom), c

    def coefficient(self, exponent: Rational) -> Fraction:
        """Coefficient of q^exponent, which must lie below the precision."""
        e = Fraction(exponent)
        if self.precision is not None and e >= self.precision:
            raise TruncationRequired(
                f"coefficient of q^{e} requested beyond precision {self.precision}"
            )
        scaled = e * self.denom
        if scaled.denominator != 1:
            return Fraction(0)
        return self.coeffs.get(int(scaled), Fraction(0))

    def coefficients(self, start: Rational, stop: Rational, step: Rational = 1) -> list[Fraction]:
        """Coefficients at start, start+step, ... below stop."""
        out = []
        e = Fraction(start)
        while e < stop:
            out.append(self.coefficient(e))
            e += Fraction(step)
        return out

    def truncate(self, precision: Rational) -> QExpansion:
        return truncate(self, precision)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, QExpansion):
            return NotImplemented
        return (
            self.denom == other.denom
            and self.trunc == other.trunc
            and self.coeffs == other.coeffs
        )

    def __hash__(self) -> int:
        return hash((self.denom, self.trunc, tuple(self.coeffs.items())))

    def __add__(self, other: QExpansion | Rational) -> QExpansion:
        return add(self, _coerce(other))

    __radd__ = __add__

    def __sub__(self, other: QExpansion | Rational) -> QExpansion:
        return sub(self, _coerce(other))

    def __rsub__(self, other: QExpansion | Rational) -> QExpansion:
        return sub(_coerce(other), self)

    def __neg__(self) -> QExpansion:
        return scale(self, -1)

    def __mul__(self, other: QExpansion | Rational) -> QExpansion:
        if isinstance(other, QExpansion):
            return mul(self, other)
        return scale(self, other)

    __rmul__ = __mul__

    def __pow__(self, k: int) -> QExpansion:
        return power(self, k)

    def __repr__(self) -> str:
        terms = ", ".join(f"{e}: {c}" for e, c in self.items())
        return f"QExpansion({{{terms}}}, precision={self.precision})"


def _coerce(x: QExpansion | Rational) -> QExpansion:
    return x if isinstance(x, QExpansion) else constant(x)


def from_terms(
    terms: Mapping[Rational, Rational] | Iterable[tuple[Rational, Rational]],
    precision: Rational | None = None,
) -> QExpansion:
    """Build a series from exponent -> coefficient pairs; repeated exponents accumulate."""
    pairs = terms.items() if isinstance(terms, Mapping) else terms
    acc: dict[Fraction, Fraction] = {}
    for e, c in pairs:
        key = Fraction(e)
        acc[key] = acc.get(key, Fraction(0)) + Fraction(c)
    denom = 1
    for e in acc:
        denom = math.lcm(denom, e.denominator)
    trunc = None
    if precision is not None:
        p = Fraction(precision)
        denom = math.lcm(denom, p.denominator)
        trunc = int(p * denom)
    return QExpansion(denom, {int(e * denom): c for e, c in acc.items()}, trunc)


def constant(c: Rational, precision: Rational | None = None) -> QExpansion:
    return from_terms({0: c}, precision)


def monomial(exponent: Rational, c: Rational = 1, precision: Rational | None = None) -> QExpansion:
    return from_terms({exponent: c}, precision)


def zero(precision: Rational | None = None) -> QExpansion:
    return from_terms({}, precision)


def _rescaled(a: QExpansion, denom: int) -> tuple[dict[int, Fraction], int | None]:
    f = denom // a.denom
    trunc = None if a.trunc is None else a.trunc * f
    return {n * f: c for n, c in a.coeffs.items()}, trunc


def _min_trunc(*truncs: int | None) -> int | None:
    known = [t for t in truncs if t is not None]
    return min(known) if known else None


def _integerize(coeffs: Mapping[int, Fraction]) -> tuple[dict[int, int], int]:
    common = 1
    for c in coeffs.values():
        common = math.lcm(common, c.denominator)
    return {n: c.numerator * (common // c.denominator) for n, c in coeffs.items()}, common


def add(a: QExpansion, b: QExpansion) -> QExpansion:
    denom = math.lcm(a.denom, b.denom)
    ca, ta = _rescaled(a, denom)
    cb, tb = _rescaled(b, denom)
    for n, c in cb.items():
        ca[n] = ca.get(n, Fraction(0)) + c
    return QExpansion(denom, ca, _min_trunc(ta, tb))


def sub(a: QExpansion, b: QExpansion) -> QExpansion:
    return add(a, scale(b, -1))


def scale(a: QExpansion, c: Rational) -> QExpansion:
    factor = Fraction(c)
    return QExpansion(a.denom, {n: v * factor for n, v in a.coeffs.items()}, a.trunc)


def mul(a: QExpansion, b: QExpansion) -> QExpansion:
    """Product with trunc(ab) = min(trunc(a) + lead(b), trunc(b) + lead(a))."""
    denom = math.lcm(a.denom, b.denom)
    ca, ta = _rescaled(a, denom)
    cb, tb = _rescaled(b, denom)
    if (not ca and ta is None) or (not cb and tb is None):
        return zero()
    lead_a = min(ca) if ca else ta
    lead_b = min(cb) if cb else tb
    candidates = []
    if ta is not None and lead_b is not None:
        candidates.append(ta + lead_b)
    if tb is not None and lead_a is not None:
        candidates.append(tb + lead_a)
    trunc = min(candidates) if candidates else None

    ia, sa = _integerize(ca)
    ib, sb = _integerize(cb)
    keys_b = sorted(ib)
    acc: dict[int, int] = {}
    for i in sorted(ia):
        x = ia[i]
        for j in keys_b:
            k = i + j
            if trunc is not None and k >= trunc:
                break
            acc[k] = acc.get(k, 0) + x * ib[j]
    common = sa * sb
    return QExpansion(denom, {k: Fraction(v, common) for k, v in acc.items()}, trunc)


def arith(
    kind: Literal["add", "sub", "mul", "scale"],
    a: QExpansion,
    b: QExpansion | Rational,
) -> QExpansion:
    """Dispatch a binary ring operation by name."""
    if kind == "scale":
        if isinstance(b, QExpansion):
            raise TypeError("scale expects a rational factor")
        return scale(a, b)
    operand = _coerce(b)
    if kind == "add":
        return add(a, operand)
    if kind == "sub":
        return sub(a, operand)
    if kind == "mul":
        return mul(a, operand)
    raise ValueError(f"unknown arithmetic kind: {kind}")


def shift(a: QExpansion, exponent: Rational) -> QExpansion:
    """Multiply by q^exponent."""
    e = Fraction(exponent)
    denom = math.lcm(a.denom, e.denominator)
    ca, ta = _rescaled(a, denom)
    offset = int(e * denom)
    trunc = None if ta is None else ta + offset
    return QExpansion(denom, {n + offset: c for n, c in ca.items()}, trunc)


def truncate(a: QExpansion, precision: Rational) -> QExpansion:
    """Forget coefficients at exponents >= precision."""
    p = Fraction(precision)
    denom = math.lcm(a.denom, p.denominator)
    ca, ta = _rescaled(a, denom)
    return QExpansion(denom, ca, _min_trunc(ta, int(p * denom)))


def invert(a: QExpansion, precision: Rational | None = None) -> QExpansion:
    """Reciprocal series.

    For a truncated input with lead index l the result is known below index
    trunc - 2l. An exact input needs an explicit precision; when both are
    available the smaller bound wins.
    """
    if not a.coeffs:
        raise ZeroLeadingCoefficient("cannot invert a series with no nonzero coefficient")
    denom = a.denom
    if precision is not None:
        denom = math.lcm(denom, Fraction(precision).denominator)
    ca, ta = _rescaled(a, denom)
    lead = min(ca)
    bounds = []
    if ta is not None:
        bounds.append(ta - 2 * lead)
    if precision is not None:
        bounds.append(int(Fraction(precision) * denom))
    if not bounds:
        raise TruncationRequired("inverting an exact series needs a target precision")
    target = min(bounds)
    length = target + lead  # relative coefficients needed
    c0 = ca[lead]
    rel = sorted((n - lead, c) for n, c in ca.items() if 0 < n - lead < length)
    out: list[Fraction] = []
    for k in range(max(length, 0)):
        if k == 0:
            out.append(1 / c0)
            continue
        s = Fraction(0)
        for j, c in rel:
            if j > k:
                break
            s += c * out[k - j]
        out.append(-s / c0)
    return QExpansion(denom, {k - lead: v for k, v in enumerate(out)}, target)


def power(a: QExpansion, k: int) -> QExpansion:
    """Integer power; negative powers go through invert."""
    if k < 0:
        return power(invert(a), -k)
    result = constant(1)
    base = a
    while k:
        if k & 1:
            result = mul(result, base)
        k >>= 1
        if k:
            base = mul(base, base)
    return result


def substitute_power(a: QExpansion, m: Rational) -> QExpansion:
    """Return a(q^m) for a positive rational m."""
    factor = Fraction(m)
    if factor <= 0:
        raise ValueError(f"substitution power must be positive, got {factor}")
    p, r = factor.numerator, factor.denominator
    trunc = None if a.trunc is None else a.trunc * p
    return QExpansion(a.denom * r, {n * p: c for n, c in a.coeffs.items()}, trunc)


def q_derivative(a: QExpansion) -> QExpansion:
    """Apply q d/dq, which multiplies the coefficient of q^e by e."""
    return QExpansion(a.denom, {n: c * Fraction(n, a.denom) for n, c in a.coeffs.items()}, a.trunc)


def first_mismatch(a: QExpansion, b: QExpansion) -> Fraction | None:
    """Lowest exponent inside the common precision where a and b differ."""
    denom = math.lcm(a.denom, b.denom)
    ca, ta = _rescaled(a, denom)
    cb, tb = _rescaled(b, denom)
    window = _min_trunc(ta, tb)
    for n in sorted(set(ca) | set(cb)):
        if window is not None and n >= window:
            break
        if ca.get(n, 0) != cb.get(n, 0):
            return Fraction(n, denom)
    return None


def qpochhammer(offset: Rational, precision: Rational, step: Rational = 1) -> QExpansion:
    """Truncated product prod_{n>=0} (1 - q^(offset + n*step)) for positive offset and step."""
    a, b, p = Fraction(offset), Fraction(step), Fraction(precision)
    if a <= 0 or b <= 0:
        raise ValueError("qpochhammer needs positive offset and step")
    denom = math.lcm(a.denominator, b.denominator, p.denominator)
    trunc = int(p * denom)
    coeffs = [0] * max(trunc, 0)
    if trunc > 0:
        coeffs[0] = 1
    e = int(a * denom)
    inc = int(b * denom)
    while e < trunc:
        # multiply by (1 - q^e) in place, high indices first
        for n in range(trunc - 1, e - 1, -1):
            coeffs[n] -= coeffs[n - e]
        e += inc
    return QExpansion(denom, {n: Fraction(c) for n, c in enumerate(coeffs)}, trunc)


def euler_product(precision: Rational) -> QExpansion:
    """(q; q)_infinity."""
    return qpochhammer(1, precision)


def eval_numeric(
    a: QExpansion,
    tau: complex,
    growth: Callable[[float], float] | None = None,
    extended: bool = False,
) -> NumericValue:
    """Evaluate the stored terms at tau with an estimate of the truncation tail.

    The tail estimate sums growth(e) |q|^e over the unknown exponents. Without
    a growth bound the largest stored coefficient, grown cubically in the
    exponent, is used; the estimate is heuristic, not rigorous.
    """
    if tau.imag <= 0:
        raise NonconvergentEvaluation(f"q-series evaluation needs Im(tau) > 0, got {tau}")
    if extended:
        with mpmath.mp.workdps(30):
            t = mpmath.mpc(tau.real, tau.imag)
            total = mpmath.fsum(
                _mpq(c) * mpmath.exp(2j * mpmath.pi * t * _mpq(e)) for e, c in a.items()
            )
            value = complex(total)
    elif a.coeffs:
        exps = np.array([float(e) for e, _ in a.items()])
        cs = np.array([float(c) for _, c in a.items()])
        value = complex(np.sum(cs * np.exp(2j * np.pi * tau * exps)))
    else:
        value = 0j
    return NumericValue(value, _tail_estimate(a, tau.imag, growth))


def _mpq(x: Fraction) -> mpmath.mpf:
    return mpmath.mpf(x.numerator) / x.denominator


def _tail_estimate(
    a: QExpansion, im_tau: float, growth: Callable[[float], float] | None
) -> float:
    if a.trunc is None:
        return 0.0
    rate = 2 * math.pi * im_tau / a.denom  # decay per index step
    steps = min(int(60 / rate) + 1, 200_000)
    exps = np.arange(a.trunc, a.trunc + steps) / a.denom
    if growth is None:
        cmax = max((abs(float(c)) for c in a.coeffs.values()), default=1.0)
        base = abs(float(a.precision or 1)) or 1.0
        bounds = cmax * np.maximum(1.0, exps / base) ** 3
    else:
        bounds = np.array([growth(float(e)) for e in exps])
    tail = float(np.sum(bounds * np.exp(-2 * math.pi * im_tau * exps)))
    logger.debug("tail estimate %.3e over %d unknown indices", tail, steps)
    return tail
