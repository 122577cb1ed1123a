"""Rank one and rank two false theta sums and the named series built from them.

The engine sums over a shifted lattice Z^2 + alpha, weighting each point by a
polynomial, a sum of sign products, and a parity character, and enumerates
exactly the points whose exponent lies below the requested precision.

Key functions:
- enumerate_quadratic(): integer points of a positive definite quadratic region (any rank)
- false_theta_sum(): rank two sum described by a FalseThetaSpec
- one_dim_sum(): rank one sum described by a OneDimFalseSpec
- theta_companion(): the same lattice sum with the sign factors removed
- builtin(): named series by registry name

Named series: psi_series, phi_series, omega_series, g0_series, big_psi_series,
big_phi_series (with big_phi1_series / big_phi2_series), lambda_series,
f0_series, fk_series.

Update this docstring if you add new named series.
"""

from __future__ import annotations

import dataclasses
import logging
import math
from collections.abc import Iterator, Sequence
from fractions import Fraction
from typing import Any

import sympy

from false_theta.qseries import (
    QExpansion,
    add,
    from_terms,
    mul,
    scale,
    shift,
    sub,
    truncate,
)
from false_theta.special import (
    e2_series,
    eta6_over_theta_squared,
    serre_derivative,
)
from false_theta.types import (
    FalseThetaSpec,
    MalformedParams,
    NotPositiveDefinite,
    OneDimFalseSpec,
    QuadraticConvention,
    Rational,
    SignPair,
)

logger = logging.getLogger(__name__)

F = Fraction
HALF = F(1, 2)

# Gram matrices in the n^T G n / 2 normalization
GRAM_A2 = ((F(2), F(1)), (F(1), F(2)))  # n1^2 + n1 n2 + n2^2
GRAM_B2 = ((F(3), F(3)), (F(3), F(6)))  # 3/2 n1^2 + 3 n1 n2 + 3 n2^2


def sgn(x: Rational) -> int:
    """Sign with sgn(0) = 0."""
    return (x > 0) - (x < 0)


def _to_sympy(matrix: Sequence[Sequence[Fraction]]) -> sympy.Matrix:
    return sympy.Matrix(
        [[sympy.Rational(v.numerator, v.denominator) for v in row] for row in matrix]
    )


def _from_sympy(matrix: sympy.Matrix) -> list[list[Fraction]]:
    return [
        [F(int(sympy.fraction(v)[0]), int(sympy.fraction(v)[1])) for v in matrix.row(i)]
        for i in range(matrix.rows)
    ]


def enumerate_quadratic(
    matrix: Sequence[Sequence[Rational]],
    linear: Sequence[Rational],
    const: Rational,
    bound: Rational,
) -> Iterator[tuple[int, ...]]:
    """Integer vectors x with x^T A x + b.x + c < bound, for positive definite A.

    Coordinates are fixed one at a time. At each level the remaining form is
    minimized exactly through the inverse of the trailing block, which bounds
    the next coordinate by |x_k - x*_k| <= sqrt(R (A_k^-1)_00).
    """
    A = [[F(v) for v in row] for row in matrix]
    n = len(A)
    if n == 0:
        if F(const) < F(bound):
            yield ()
        return
    full = _to_sympy(A)
    if not full.is_positive_definite:
        raise NotPositiveDefinite(f"quadratic form {A} is not positive definite")
    inverses = [_from_sympy(full[k:, k:].inv()) for k in range(n)]
    yield from _descend(A, inverses, 0, [F(v) for v in linear], F(const), F(bound), ())


def _descend(
    A: list[list[Fraction]],
    inverses: list[list[list[Fraction]]],
    level: int,
    b: list[Fraction],
    c: Fraction,
    bound: Fraction,
    prefix: tuple[int, ...],
) -> Iterator[tuple[int, ...]]:
    inv = inverses[level]
    size = len(b)
    # minimum of the remaining form is c - b^T inv b / 4 at x* = -inv b / 2
    inv_b = [sum((inv[i][j] * b[j] for j in range(size)), F(0)) for i in range(size)]
    room = bound - (c - sum((b[i] * inv_b[i] for i in range(size)), F(0)) / 4)
    if room <= 0:
        return
    center = -inv_b[0] / 2
    half_width = math.sqrt(float(room * inv[0][0]))
    lo = math.floor(float(center) - half_width) - 1
    hi = math.ceil(float(center) + half_width) + 1
    k = level
    a_kk = A[k][k]
    for v in range(lo, hi + 1):
        c_next = c + a_kk * v * v + b[0] * v
        if size == 1:
            if c_next < bound:
                yield (*prefix, v)
            continue
        b_next = [b[i] + 2 * v * A[k][k + i] for i in range(1, size)]
        yield from _descend(A, inverses, level + 1, b_next, c_next, bound, (*prefix, v))


def _exponent_scale(spec: FalseThetaSpec) -> Fraction:
    factor = F(spec.scale)
    return factor / 2 if spec.convention == QuadraticConvention.HALF else factor


def _sign_factor(signs: list[SignPair], n: tuple[Fraction, Fraction]) -> Fraction:
    if not signs:
        return F(1)
    total = F(0)
    for pair in signs:
        lam = pair.lam[0] * n[0] + pair.lam[1] * n[1]
        mu = pair.mu[0] * n[0] + pair.mu[1] * n[1]
        total += F(pair.coeff) * sgn(lam) * sgn(mu)
    return total


def _weight(monomials: list[tuple[int, int, Fraction]], n: tuple[Fraction, Fraction]) -> Fraction:
    return sum((F(c) * n[0] ** i * n[1] ** j for i, j, c in monomials), F(0))


def false_theta_sum(spec: FalseThetaSpec, prec: Rational) -> QExpansion:
    """Sum over n in Z^2 + shift of weight * signs * parity * q^(exponent), exponent < prec."""
    p = F(prec)
    s = _exponent_scale(spec)
    (g11, g12), (_, g22) = ((F(a), F(b)) for a, b in spec.gram)
    a1, a2 = (F(v) for v in spec.shift)
    if any(F(v).denominator != 1 for v in spec.parity):
        raise MalformedParams(f"parity vector must be integral, got {spec.parity}")
    p1, p2 = (int(v) for v in spec.parity)
    # exponent as a function of x = n - alpha
    A = [[s * g11, s * g12], [s * g12, s * g22]]
    b = [2 * s * (g11 * a1 + g12 * a2), 2 * s * (g12 * a1 + g22 * a2)]
    c = s * (g11 * a1 * a1 + 2 * g12 * a1 * a2 + g22 * a2 * a2) + F(spec.prefactor_exponent)
    terms: dict[Fraction, Fraction] = {}
    count = 0
    for x1, x2 in enumerate_quadratic(A, b, c, p):
        count += 1
        n = (x1 + a1, x2 + a2)
        value = _sign_factor(spec.signs, n)
        if value == 0:
            continue
        value *= _weight(spec.weight, n)
        if value == 0:
            continue
        if (p1 * x1 + p2 * x2) % 2:
            value = -value
        e = s * (g11 * n[0] ** 2 + 2 * g12 * n[0] * n[1] + g22 * n[1] ** 2)
        e += F(spec.prefactor_exponent)
        terms[e] = terms.get(e, F(0)) + value
    logger.debug("false_theta_sum: %d lattice points below q^%s", count, p)
    return from_terms(terms, p)


def theta_companion(spec: FalseThetaSpec, prec: Rational) -> QExpansion:
    """The lattice sum of spec with signs and weight removed (parity kept)."""
    plain = dataclasses.replace(spec, signs=[], weight=[(0, 0, F(1))])
    return false_theta_sum(plain, prec)


def one_dim_sum(spec: OneDimFalseSpec, prec: Rational) -> QExpansion:
    """Sum over n in Z + shift of sgn(n + sign_offset) n^power (-1)^(n - shift) q^(m n^2)."""
    p = F(prec)
    m = F(spec.modulus)
    offset = F(spec.shift)
    radius = math.sqrt(max(float(p / m), 0.0))
    terms: dict[Fraction, Fraction] = {}
    for t in range(math.floor(-radius - float(offset)) - 1, math.ceil(radius - float(offset)) + 2):
        n = t + offset
        e = m * n * n
        if e >= p:
            continue
        value = F(n) ** spec.power
        if spec.signed:
            value *= sgn(n + F(spec.sign_offset))
        if spec.alternating and t % 2:
            value = -value
        if value:
            terms[e] = terms.get(e, F(0)) + value
    return from_terms(terms, p)


def psi_series(prec: Rational) -> QExpansion:
    """psi = sum over n in Z + 1/4 of sgn(n) q^(2 n^2)."""
    return one_dim_sum(OneDimFalseSpec(F(2), F(1, 4)), prec)


def phi_series(r: int, prec: Rational) -> QExpansion:
    """phi_r = sum over n in Z + r/6 of sgn(n) q^(3 n^2)."""
    return one_dim_sum(OneDimFalseSpec(F(3), F(r, 6)), prec)


def omega_series(r: int, prec: Rational) -> QExpansion:
    """omega_r = sum over n in Z + r/3 + 1/2 of (-1)^(n - r/3 - 1/2) sgn(n) q^(3 n^2 / 2)."""
    return one_dim_sum(OneDimFalseSpec(F(3, 2), F(r, 3) + HALF, alternating=True), prec)


def g0_series(prec: Rational) -> QExpansion:
    """G_0 = 1 + 3 sum_Z |n| q^(n^2) - 6 q^(-1/4) sum_(Z+1/2) |n| q^(n^2)."""
    p = F(prec)
    integral = one_dim_sum(OneDimFalseSpec(F(1), F(0), power=1), p)
    half_integral = one_dim_sum(OneDimFalseSpec(F(1), HALF, power=1), p + F(1, 4))
    result = add(scale(integral, 3), scale(shift(half_integral, F(-1, 4)), -6))
    return truncate(add(result, from_terms({0: 1})), p)


def big_psi_spec() -> FalseThetaSpec:
    return FalseThetaSpec(
        gram=GRAM_A2,
        shift=(F(1, 3), F(1, 3)),
        signs=[SignPair((F(1), F(0)), (F(0), F(1)))],
        weight=[(1, 0, F(1))],
    )


def big_psi_series(prec: Rational) -> QExpansion:
    """Psi = sum over Z^2 + (1/3, 1/3) of sgn(n1) sgn(n2) n1 q^(Q_A(n))."""
    return false_theta_sum(big_psi_spec(), prec)


def _b2_spec(**kwargs: Any) -> FalseThetaSpec:
    return FalseThetaSpec(gram=GRAM_B2, shift=(F(1, 3), F(1, 6)), parity=(1, 0), **kwargs)


def big_phi1_series(prec: Rational) -> QExpansion:
    """Phi_1, with its E2 coupling split off as -(E2/18) times the unweighted sum."""
    p = F(prec)
    signs = [
        SignPair((F(0), F(1)), (F(1), F(0))),
        SignPair((F(1), F(1)), (F(1), F(0))),
    ]
    # (n1 + 2 n2)^2
    weighted = false_theta_sum(
        _b2_spec(signs=signs, weight=[(2, 0, F(1)), (1, 1, F(4)), (0, 2, F(4))]), p
    )
    plain = false_theta_sum(_b2_spec(signs=signs), p)
    return sub(weighted, scale(mul(e2_series(p), plain), F(1, 18)))


def big_phi2_series(prec: Rational) -> QExpansion:
    """Phi_2 = sum (-1)^(n1 - 1/3) sgn(n1 + n2) sgn(n2) n1 (n1 + 2 n2) q^(Q_B(n))."""
    spec = _b2_spec(
        signs=[SignPair((F(1), F(1)), (F(0), F(1)))],
        weight=[(2, 0, F(1)), (1, 1, F(2))],
    )
    return false_theta_sum(spec, prec)


def big_phi_series(prec: Rational) -> QExpansion:
    return add(big_phi1_series(prec), big_phi2_series(prec))


def lambda_spec(a1: int, a2: int) -> FalseThetaSpec:
    return FalseThetaSpec(
        gram=GRAM_B2,
        shift=(F(1, 3), F(a1, 2) + F(1, 6)),
        signs=[SignPair((F(1), F(0)), (F(1), F(2)))],
        parity=(a2 + 1, 0),
    )


def lambda_series(a1: int, a2: int, prec: Rational) -> QExpansion:
    """Lambda_a = sum over Z^2 + (1/3, a1/2 + 1/6) of (-1)^((a2+1)(n1-1/3)) sgn(n1) sgn(n1+2n2) q^(Q_B)."""
    return false_theta_sum(lambda_spec(a1, a2), prec)


def f0_series(prec: Rational) -> QExpansion:
    """The holomorphic part F_0 of the B2 constant term.

    Assembled from E2, the rank one sums phi_1, phi_2, omega_0, omega_1, their
    Serre derivatives of weight 1/2, and the quotients eta^6 / theta(.)^2 at
    the three nonzero 2-torsion points.
    """
    p = F(prec)
    work = p + 1
    e2 = e2_series(work)
    q01 = eta6_over_theta_squared(0, 1, work)
    q10 = eta6_over_theta_squared(1, 0, work)
    q11 = eta6_over_theta_squared(1, 1, work)
    phi1, phi2 = phi_series(1, work), phi_series(2, work)
    omega0, omega1 = omega_series(0, work), omega_series(1, work)
    d = F(1, 2)

    total = scale(add(e2, from_terms({0: 2})), F(1, 4))
    total = add(total, q01)
    total = add(total, scale(shift(serre_derivative(omega1, d), F(-1, 24)), 6))
    total = sub(total, scale(shift(serre_derivative(omega0, d), F(-3, 8)), 6))

    bracket1 = scale(serre_derivative(phi1, d), 6)
    bracket1 = sub(bracket1, mul(q01, phi1))
    bracket1 = add(bracket1, shift(mul(q10, phi1), -HALF))
    bracket1 = sub(bracket1, shift(mul(q11, phi1), -HALF))
    total = add(total, shift(bracket1, F(-1, 12)))

    bracket2 = scale(serre_derivative(phi2, d), 6)
    bracket2 = add(bracket2, mul(add(add(q01, q10), q11), phi2))
    total = sub(total, shift(bracket2, F(-1, 3)))
    return truncate(total, p)


def fk_spec(k: int) -> FalseThetaSpec:
    if k < 1:
        raise MalformedParams(f"k must be a positive integer, got {k}")
    return FalseThetaSpec(
        gram=((F(1), F(1)), (F(1), F(2 * (k + 1)))),
        shift=(F(0), HALF),
        signs=[SignPair((F(1), F(0)), (F(0), F(1)), HALF)],
        parity=(1, 0),
    )


def fk_series(k: int, prec: Rational) -> QExpansion:
    """F_k = 1/2 sum over Z^2 + (0, 1/2) of (-1)^n1 sgn(n1) sgn(n2) q^(n1^2/2 + n1 n2 + (k+1) n2^2)."""
    return false_theta_sum(fk_spec(k), prec)


def builtin(name: str, params: dict[str, Any] | None, prec: Rational) -> QExpansion:
    """Expand a registry series by name."""
    from false_theta.registry import build_series

    return build_series(name, params or {}, prec)
