"""Laurent expansions in two elliptic variables and exact constant terms.

A LaurentBlock is a finite Laurent polynomial in zeta1, zeta2 whose
coefficients are truncated q-series. Reciprocal Pochhammer symbols are
expanded in nonnegative powers of their own monomial, which is the expansion
valid in the annulus |q| < |zeta^e| < 1 of every factor.

Key functions:
- inv_pochhammer(), pochhammer_block(), monomial_block(), series_block(): block constructors
- block_mul(), product_ct(): products and constant-term extraction
- a2_block(), b2_block(): the affine character products for A2 and B2
- coeff_D(), coeff_C(), c_terms(): closed-form Fourier coefficients
- coeff_D_oracle(), coeff_C_oracle(): the same coefficients read off the brute-force expansion
- a2_decomposition(), b2_decomposition(): false theta decompositions of the constant terms
- verify_decomposition(), verify_triple_product(), verify_coefficient(): exact identity checks
- tk_coefficient(): Fourier coefficients of the Schur-index Jacobi form

Update this docstring if you add new block constructors or checks.
"""

from __future__ import annotations

import logging
import math
import time
from collections.abc import Callable, Iterable, Mapping, Sequence
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

from false_theta.lattice import (
    big_phi_series,
    big_psi_series,
    enumerate_quadratic,
    f0_series,
    g0_series,
    lambda_series,
)
from false_theta.qseries import (
    QExpansion,
    add,
    constant,
    euler_product,
    first_mismatch,
    from_terms,
    invert,
    mul,
    power,
    scale,
    shift,
    truncate,
    zero,
)
from false_theta.special import e2_series, eta6_over_theta_squared, theta_torsion_series
from false_theta.types import (
    CheckStatus,
    IncompatibleLattices,
    MalformedParams,
    NonpositiveOffset,
    Rational,
    VerificationReport,
)

logger = logging.getLogger(__name__)

F = Fraction
HALF = F(1, 2)

# Monomials zeta^e of the reciprocal Pochhammer factors
A2_DIRECTIONS = ((1, 0), (-1, 0), (0, 1), (0, -1), (1, 1), (-1, -1))
B2_DIRECTIONS = (*A2_DIRECTIONS, (2, 1), (-2, -1))

# Shift vectors and signs of the closed-form constant terms
EPSILON_A = {(1, 0): 1, (0, 1): 1, (-1, -1): 1, (-1, 0): -1, (0, -1): -1, (1, 1): -1}
EPSILON_B = {
    (-2, F(-3, 2)): 1,
    (-1, F(1, 2)): 1,
    (1, F(-1, 2)): 1,
    (2, F(3, 2)): 1,
    (-1, F(-3, 2)): -1,
    (-2, F(-1, 2)): -1,
    (1, F(3, 2)): -1,
    (2, F(1, 2)): -1,
}
TORSION_POINTS = ((0, 1), (1, 0), (1, 1))

# Published constant-term coefficients of q^0 .. q^9
A2_PRINTED = (1, 0, 3, 8, 21, 48, 116, 252, 555, 1156)
B2_PRINTED = (1, 0, 4, 12, 38, 100, 276, 688, 1709, 4020)

Key = tuple[int, int, int]  # (e1, e2, q index)


@dataclass(frozen=True, eq=False)
class LaurentBlock:
    """sum c * zeta1^(e1/z1) zeta2^(e2/z2) q^(n/qdenom), known for q-exponents below trunc/qdenom."""

    zdenoms: tuple[int, int]
    qdenom: int
    coeffs: Mapping[Key, Fraction]
    trunc: int | None = None

    def __post_init__(self) -> None:
        kept = {
            key: F(c)
            for key, c in self.coeffs.items()
            if c != 0 and (self.trunc is None or key[2] < self.trunc)
        }
        object.__setattr__(self, "coeffs", kept)

    @property
    def precision(self) -> Fraction | None:
        return None if self.trunc is None else F(self.trunc, self.qdenom)

    @property
    def q_lead(self) -> int | None:
        return min((key[2] for key in self.coeffs), default=self.trunc)

    def coefficient(self, e1: Rational, e2: Rational = 0) -> QExpansion:
        """The q-series multiplying zeta1^e1 zeta2^e2."""
        k1, k2 = F(e1) * self.zdenoms[0], F(e2) * self.zdenoms[1]
        if k1.denominator != 1 or k2.denominator != 1:
            return zero(self.precision)
        i1, i2 = int(k1), int(k2)
        picked = {n: c for (a, b, n), c in self.coeffs.items() if a == i1 and b == i2}
        return QExpansion(self.qdenom, picked, self.trunc)

    @property
    def terms(self) -> dict[tuple[Fraction, Fraction], QExpansion]:
        grouped: dict[tuple[int, int], dict[int, Fraction]] = {}
        for (a, b, n), c in self.coeffs.items():
            grouped.setdefault((a, b), {})[n] = c
        z1, z2 = self.zdenoms
        return {
            (F(a, z1), F(b, z2)): QExpansion(self.qdenom, series, self.trunc)
            for (a, b), series in sorted(grouped.items())
        }

    @property
    def zbounds(self) -> dict[Fraction, tuple[Fraction, Fraction, Fraction, Fraction]]:
        """Per q-exponent window (min e1, max e1, min e2, max e2) of nonzero coefficients.

        Every factor expansion is complete at each q-order, so the window is the
        full support at that order.
        """
        windows: dict[int, list[int]] = {}
        for a, b, n in self.coeffs:
            w = windows.setdefault(n, [a, a, b, b])
            w[0], w[1] = min(w[0], a), max(w[1], a)
            w[2], w[3] = min(w[2], b), max(w[3], b)
        z1, z2 = self.zdenoms
        return {
            F(n, self.qdenom): (F(w[0], z1), F(w[1], z1), F(w[2], z2), F(w[3], z2))
            for n, w in sorted(windows.items())
        }

    def truncate(self, precision: Rational) -> LaurentBlock:
        p = F(precision)
        denom = math.lcm(self.qdenom, p.denominator)
        block = _rescale_q(self, denom)
        limit = int(p * denom)
        trunc = limit if block.trunc is None else min(block.trunc, limit)
        return LaurentBlock(block.zdenoms, denom, block.coeffs, trunc)

    def __mul__(self, other: LaurentBlock) -> LaurentBlock:
        return block_mul(self, other)


def _rescale_q(block: LaurentBlock, denom: int) -> LaurentBlock:
    f = denom // block.qdenom
    if f == 1:
        return block
    coeffs = {(a, b, n * f): c for (a, b, n), c in block.coeffs.items()}
    trunc = None if block.trunc is None else block.trunc * f
    return LaurentBlock(block.zdenoms, denom, coeffs, trunc)


def block_mul(x: LaurentBlock, y: LaurentBlock) -> LaurentBlock:
    """Product of two blocks with the product truncation rule applied to the q-variable."""
    if x.zdenoms != y.zdenoms:
        raise IncompatibleLattices(f"zeta lattices differ: {x.zdenoms} vs {y.zdenoms}")
    denom = math.lcm(x.qdenom, y.qdenom)
    x, y = _rescale_q(x, denom), _rescale_q(y, denom)
    candidates = []
    if x.trunc is not None and y.q_lead is not None:
        candidates.append(x.trunc + y.q_lead)
    if y.trunc is not None and x.q_lead is not None:
        candidates.append(y.trunc + x.q_lead)
    trunc = min(candidates) if candidates else None

    sx, ix = _integerize(x.coeffs)
    sy, iy = _integerize(y.coeffs)
    right = sorted(((n, a, b, v) for (a, b, n), v in iy.items()))
    acc: dict[Key, int] = {}
    for (a, b, n), v in ix.items():
        for m, c, d, w in right:
            if trunc is not None and n + m >= trunc:
                break
            key = (a + c, b + d, n + m)
            acc[key] = acc.get(key, 0) + v * w
    common = sx * sy
    return LaurentBlock(x.zdenoms, denom, {k: F(v, common) for k, v in acc.items()}, trunc)


def _integerize(coeffs: Mapping[Key, Fraction]) -> tuple[int, dict[Key, int]]:
    common = 1
    for c in coeffs.values():
        common = math.lcm(common, c.denominator)
    return common, {k: c.numerator * (common // c.denominator) for k, c in coeffs.items()}


def _zeta_index(e: tuple[Rational, Rational], zdenoms: tuple[int, int]) -> tuple[int, int]:
    k1, k2 = F(e[0]) * zdenoms[0], F(e[1]) * zdenoms[1]
    if k1.denominator != 1 or k2.denominator != 1:
        raise IncompatibleLattices(f"exponent {e} does not lie on the lattice {zdenoms}")
    return int(k1), int(k2)


def _partition_tables(count: int, length: int) -> list[list[int]]:
    """Coefficient lists of 1/(q;q)_m for m < count, each of the given length."""
    tables = []
    current = [1] + [0] * (length - 1) if length > 0 else []
    for m in range(count):
        tables.append(list(current))
        part = m + 1
        for j in range(part, length):
            current[j] += current[j - part]
    return tables


def _euler_block(
    e: tuple[Rational, Rational],
    b: Fraction,
    prec: Rational,
    zdenoms: tuple[int, int],
    alternating: bool,
) -> LaurentBlock:
    # sum_k (+-1)^k zeta^(k e) q^(k b [+ k(k-1)/2]) / (q;q)_k
    p = F(prec)
    qden = math.lcm(b.denominator, p.denominator)
    trunc = int(p * qden)
    i1, i2 = _zeta_index(e, zdenoms)
    starts = []
    k = 0
    while True:
        start = k * b + (F(k * (k - 1), 2) if alternating else 0)
        if start >= p:
            break
        starts.append(start)
        k += 1
    length = max(math.ceil(p), 0)
    tables = _partition_tables(len(starts), length)
    coeffs: dict[Key, Fraction] = {}
    for k, start in enumerate(starts):
        sign = -1 if alternating and k % 2 else 1
        base = int(start * qden)
        for j, c in enumerate(tables[k]):
            n = base + j * qden
            if n >= trunc:
                break
            if c:
                coeffs[(k * i1, k * i2, n)] = F(sign * c)
    return LaurentBlock(zdenoms, qden, coeffs, trunc)


def inv_pochhammer(
    e: tuple[Rational, Rational],
    b: Rational,
    prec: Rational,
    zdenoms: tuple[int, int] = (1, 1),
) -> LaurentBlock:
    """1/(zeta^e q^b; q)_infinity = sum_m (zeta^e q^b)^m / (q;q)_m."""
    offset = F(b)
    if offset <= 0:
        raise NonpositiveOffset(f"reciprocal Pochhammer needs a positive q-offset, got {offset}")
    return _euler_block(e, offset, prec, zdenoms, alternating=False)


def pochhammer_block(
    e: tuple[Rational, Rational],
    b: Rational,
    prec: Rational,
    zdenoms: tuple[int, int] = (1, 1),
) -> LaurentBlock:
    """(zeta^e q^b; q)_infinity = sum_k (-1)^k zeta^(k e) q^(k b + k(k-1)/2) / (q;q)_k, b >= 0."""
    offset = F(b)
    if offset < 0:
        raise NonpositiveOffset(f"Pochhammer block needs a nonnegative q-offset, got {offset}")
    return _euler_block(e, offset, prec, zdenoms, alternating=True)


def monomial_block(
    e: tuple[Rational, Rational],
    q_exponent: Rational = 0,
    coeff: Rational = 1,
    zdenoms: tuple[int, int] = (1, 1),
) -> LaurentBlock:
    """Exact block coeff * zeta^e q^q_exponent."""
    qe = F(q_exponent)
    i1, i2 = _zeta_index(e, zdenoms)
    return LaurentBlock(
        zdenoms, qe.denominator, {(i1, i2, qe.numerator): F(coeff)}, None
    )


def series_block(series: QExpansion, zdenoms: tuple[int, int] = (1, 1)) -> LaurentBlock:
    """A q-series placed at zeta^0."""
    coeffs = {(0, 0, n): c for n, c in series.coeffs.items()}
    return LaurentBlock(zdenoms, series.denom, coeffs, series.trunc)


def product_ct(factors: Sequence[LaurentBlock], prec: Rational) -> QExpansion:
    """Multiply all blocks and return the zeta^0 coefficient, exact below prec."""
    if not factors:
        return constant(1, prec)
    zd = factors[0].zdenoms
    if any(f.zdenoms != zd for f in factors):
        raise IncompatibleLattices("all factors must share the zeta exponent lattice")
    result = factors[0].truncate(prec)
    for factor in factors[1:]:
        result = block_mul(result, factor.truncate(prec))
    logger.debug("product_ct: %d terms in the full product", len(result.coeffs))
    return result.coefficient(0, 0)


@lru_cache(maxsize=8)
def a2_block(prec: Fraction) -> LaurentBlock:
    """G(zeta) = 1 / (zeta1 q, zeta1^-1 q, zeta2 q, zeta2^-1 q, zeta1 zeta2 q, zeta1^-1 zeta2^-1 q; q)."""
    return _character_block(A2_DIRECTIONS, prec)


@lru_cache(maxsize=8)
def b2_block(prec: Fraction) -> LaurentBlock:
    """F(zeta): the A2 factors and (zeta1^2 zeta2 q, zeta1^-2 zeta2^-1 q; q)."""
    return _character_block(B2_DIRECTIONS, prec)


def _character_block(directions: Iterable[tuple[int, int]], prec: Fraction) -> LaurentBlock:
    blocks = [inv_pochhammer(d, 1, prec) for d in directions]
    result = blocks[0]
    for block in blocks[1:]:
        result = block_mul(result, block)
    return result


def a2_constant_term(prec: Rational) -> QExpansion:
    """CT of G by brute-force expansion."""
    return a2_block(F(prec)).coefficient(0, 0)


def b2_constant_term(prec: Rational) -> QExpansion:
    """CT of F by brute-force expansion."""
    return b2_block(F(prec)).coefficient(0, 0)


@lru_cache(maxsize=4096)
def _composition_count(target: tuple[int, int], directions: tuple[tuple[int, int], ...]) -> int:
    """Number of ways to write target as a nonnegative combination of the directions, in order."""
    if not directions:
        return 1 if target == (0, 0) else 0
    (d1, d2), rest = directions[0], directions[1:]
    total = 0
    a, b = target
    while a >= 0 and b >= 0:
        total += _composition_count((a, b), rest)
        if d1 == 0 and d2 == 0:
            break
        a, b = a - d1, b - d2
    return total


def _divided_coefficient(
    block: LaurentBlock,
    target: tuple[int, int],
    divisors: tuple[tuple[int, int], ...],
) -> QExpansion:
    """zeta^target coefficient of block / prod (1 - zeta^d), each divisor expanded geometrically."""
    acc = zero(block.precision)
    for (e1, e2), series in block.terms.items():
        count = _composition_count((target[0] - int(e1), target[1] - int(e2)), divisors)
        if count:
            acc = add(acc, scale(series, count))
    return acc


def coeff_D_oracle(r: tuple[int, int], prec: Rational) -> QExpansion:
    """D(r) from the expansion of (q)^6 zeta1 zeta2 G / ((1-zeta1)(1-zeta2)(1-zeta1 zeta2))."""
    p = F(prec)
    target = (-r[0] - 1, -r[1] - 1)
    inner = _divided_coefficient(a2_block(p), target, ((1, 0), (0, 1), (1, 1)))
    return truncate(mul(power(euler_product(p), 6), inner), p)


def coeff_C_oracle(r: tuple[Rational, Rational], prec: Rational) -> QExpansion:
    """C(r) from the expansion of (q)^8 zeta1^2 zeta2^(3/2) F / prod over the four positive roots."""
    p = F(prec)
    r1, r2 = F(r[0]), F(r[1])
    a, b = -r1 - 2, -r2 - F(3, 2)
    if a.denominator != 1 or b.denominator != 1:
        raise MalformedParams(f"C(r) needs r1 integral and r2 half-integral, got {r}")
    inner = _divided_coefficient(
        b2_block(p), (int(a), int(b)), ((1, 0), (0, 1), (1, 1), (2, 1))
    )
    return truncate(mul(power(euler_product(p), 8), inner), p)


def _quad_value(
    A: Sequence[Sequence[Fraction]], b: Sequence[Fraction], c: Fraction, x: tuple[int, int]
) -> Fraction:
    x1, x2 = x
    return A[0][0] * x1 * x1 + 2 * A[0][1] * x1 * x2 + A[1][1] * x2 * x2 + b[0] * x1 + b[1] * x2 + c


def _quadrant_sum(
    A: Sequence[Sequence[Fraction]],
    b: Sequence[Fraction],
    c: Fraction,
    weight: Callable[[int, int], Fraction | int],
    prec: Fraction,
) -> QExpansion:
    """sum over n in N_0^2 of weight(n) q^(n^T A n + b.n + c), exponents below prec."""
    terms: dict[Fraction, Fraction] = {}
    for x in enumerate_quadratic(A, b, c, prec):
        if x[0] < 0 or x[1] < 0:
            continue
        w = weight(*x)
        if w:
            e = _quad_value(A, b, c, x)
            terms[e] = terms.get(e, F(0)) + w
    return from_terms(terms, prec)


def _times(factor: Callable[[Fraction], QExpansion], series: QExpansion, target: Fraction) -> QExpansion:
    """factor * series exact below target, with factor built at the precision the product needs."""
    if not series.coeffs:
        return zero(target)
    lead = series.lead_exponent or F(0)
    built = factor(target - min(lead, F(0)) + 1)
    return truncate(mul(built, series), target)


def coeff_D(r: tuple[int, int], prec: Rational) -> QExpansion:
    """D(r) = D_1(r) + D_2(r) by direct enumeration over N_0^2."""
    p = F(prec)
    r1, r2 = F(r[0]), F(r[1])
    d1 = _quadrant_sum(
        [[F(1), HALF], [HALF, F(1)]], [-r2, -r1], F(0), lambda n1, n2: n1 + 2 * n2 - r1, p
    )
    d2 = _quadrant_sum(
        [[F(1), -HALF], [-HALF, F(1)]],
        [-r2, r2 - r1],
        F(0),
        lambda n1, n2: n1 - 2 * n2 + r1 - r2,
        p,
    )
    return add(d1, d2)


def c_terms(r: tuple[Rational, Rational], prec: Rational) -> dict[str, QExpansion]:
    """The named pieces C1..C6, C7(l) and C8(l) of C(r) for r1 integral, r2 half-integral."""
    p = F(prec)
    r1, r2 = F(r[0]), F(r[1])
    if r1.denominator != 1 or (2 * r2).denominator != 1 or r2.denominator != 2:
        raise MalformedParams(f"C(r) needs r1 integral and r2 half-integral, got {r}")
    work = p + 1
    three_half = F(3, 2)
    A1 = [[three_half, three_half], [three_half, F(3)]]
    b1 = [-r2, -r1]
    A2 = [[three_half, -three_half], [-three_half, F(3)]]
    b2 = [-r2, 2 * r2 - r1]
    A3 = [[three_half, F(0)], [F(0), three_half]]
    b3 = [-r2, r2 - r1]

    def alt(n1: int, n2: int = 0) -> int:
        return -1 if (n1 + n2) % 2 else 1

    terms: dict[str, QExpansion] = {}
    terms["C1"] = scale(
        _quadrant_sum(A1, b1, F(0), lambda n1, n2: alt(n1) * (6 * n2 + 3 * n1 - r1) ** 2, work),
        F(1, 4),
    )
    terms["C2"] = scale(
        _quadrant_sum(
            A2, b2, F(0), lambda n1, n2: alt(n1) * (6 * n2 - 3 * n1 + 2 * r2 - r1) ** 2, work
        ),
        F(1, 4),
    )
    terms["C3"] = scale(
        _quadrant_sum(A3, b3, F(0), lambda n1, n2: alt(n1, n2) * (3 * n2 + r2 - r1) ** 2, work),
        F(-1, 2),
    )
    plain1 = _quadrant_sum(A1, b1, F(0), lambda n1, n2: alt(n1), work)
    plain2 = _quadrant_sum(A2, b2, F(0), lambda n1, n2: alt(n1), work)
    plain3 = _quadrant_sum(A3, b3, F(0), alt, work)
    terms["C4"] = scale(_times(e2_series, plain1, work), F(-1, 8))
    terms["C5"] = scale(_times(e2_series, plain2, work), F(-1, 8))
    terms["C6"] = scale(_times(e2_series, plain3, work), F(1, 8))

    for l1, l2 in TORSION_POINTS:

        def quotient(prec_: Fraction, l1: int = l1, l2: int = l2) -> QExpansion:
            return eta6_over_theta_squared(l1, l2, prec_)

        pre7 = F(l1 * (l1 - r1), 2)
        b7 = [b1[0] + three_half * l1, b1[1] + 3 * l1]
        s7 = _quadrant_sum(A1, b7, pre7, lambda n1, n2, l2=l2: alt((l2 + 1) * n1), work)
        sign7 = -1 if (l1 + (r1 + 1) * l2) % 2 else 1
        terms[f"C7{l1}{l2}"] = scale(_times(quotient, s7, work), F(-sign7, 2))

        pre8 = F(l1 * (l1 - r1), 2) + l1 * r2
        b8 = [b2[0] - three_half * l1, b2[1] + 3 * l1]
        s8 = _quadrant_sum(A2, b8, pre8, lambda n1, n2, l2=l2: alt((1 + l2) * n1), work)
        sign8 = -1 if (l1 + r1 * l2) % 2 else 1
        terms[f"C8{l1}{l2}"] = scale(_times(quotient, s8, work), F(-sign8, 2))

    return {name: truncate(series, p) for name, series in terms.items()}


def coeff_C(r: tuple[Rational, Rational], prec: Rational) -> QExpansion:
    """C(r) as the sum of its ten closed-form pieces."""
    p = F(prec)
    total = zero(p)
    for series in c_terms(r, p).values():
        total = add(total, series)
    return total


def _over_euler(series: QExpansion, k: int, prec: Fraction) -> QExpansion:
    """series / (q;q)^k, exact below prec when series has no negative exponents."""
    return truncate(mul(series, invert(power(euler_product(prec + 1), k))), prec)


def a2_closed_form(prec: Rational) -> QExpansion:
    """CT of G as (1/(q)^6) sum eps_A(r) D(r)."""
    p = F(prec)
    total = zero(p)
    for r, eps in EPSILON_A.items():
        total = add(total, scale(coeff_D(r, p), eps))
    return _over_euler(total, 6, p)


def b2_closed_form(prec: Rational) -> QExpansion:
    """CT of F as (1/(q)^8) sum eps_B(r) C(r)."""
    p = F(prec)
    total = zero(p)
    for r, eps in EPSILON_B.items():
        total = add(total, scale(coeff_C(r, p), eps))
    return _over_euler(total, 8, p)


def a2_decomposition(prec: Rational, omit: Iterable[str] = ()) -> QExpansion:
    """G_0/(q)^6 + 9 q^(-1/3) Psi/(q)^6; names in omit ("G0", "Psi") are dropped."""
    p = F(prec)
    skip = set(omit)
    total = zero(p + 1)
    if "G0" not in skip:
        total = add(total, g0_series(p + 1))
    if "Psi" not in skip:
        total = add(total, scale(shift(big_psi_series(p + F(4, 3)), F(-1, 3)), 9))
    return _over_euler(total, 6, p)


def b2_decomposition(prec: Rational, omit: Iterable[str] = ()) -> QExpansion:
    """F_0/(q)^8 + (9/2) q^(-5/12) Phi/(q)^8 + the three Lambda / theta^2 terms over (q)^2.

    Names in omit ("F0", "Phi", "Lambda") are dropped.
    """
    p = F(prec)
    skip = set(omit)
    work = p + 1
    main = zero(work)
    if "F0" not in skip:
        main = add(main, f0_series(work))
    if "Phi" not in skip:
        main = add(main, scale(shift(big_phi_series(work + F(5, 12)), F(-5, 12)), F(9, 2)))
    total = _over_euler(main, 8, p)
    if "Lambda" in skip:
        return total

    def over_theta_sq(l1: int, l2: int) -> QExpansion:
        return invert(theta_torsion_series(l1, l2, work + 1).square())

    lam = mul(lambda_series(0, 1, work), over_theta_sq(0, 1))
    lam = add(lam, shift(mul(lambda_series(1, 0, work + 1), over_theta_sq(1, 0)), F(-1, 4)))
    lam = add(
        lam, scale(shift(mul(lambda_series(1, 1, work + 1), over_theta_sq(1, 1)), F(-1, 4)), -1)
    )
    lam = shift(lam, F(-1, 6))
    return add(total, _over_euler(truncate(lam, work), 2, p))


def verify_decomposition(
    which: str, prec: Rational, omit: Iterable[str] = ()
) -> VerificationReport:
    """Compare the brute-force constant term, the closed form, and the false theta decomposition."""
    p = F(prec)
    started = time.perf_counter()
    if which == "A2":
        oracle = a2_constant_term(p)
        closed = a2_closed_form(p)
        decomposed = a2_decomposition(p, omit)
        printed = A2_PRINTED
    elif which == "B2":
        oracle = b2_constant_term(p)
        closed = b2_closed_form(p)
        decomposed = b2_decomposition(p, omit)
        printed = B2_PRINTED
    else:
        raise MalformedParams(f"unknown decomposition {which!r}; expected A2 or B2")

    checks = (first_mismatch(oracle, closed), first_mismatch(oracle, decomposed))
    mismatches = [m for m in checks if m is not None]
    known = [n for n in range(len(printed)) if n < p]
    table_ok = all(oracle.coefficient(n) == printed[n] for n in known)
    first = min(mismatches) if mismatches else None
    status = CheckStatus.PASS if first is None and table_ok else CheckStatus.FAIL
    return VerificationReport(
        name=which,
        status=status,
        order=p,
        first_mismatch=first,
        elapsed=time.perf_counter() - started,
        details={
            "oracle": [str(c) for c in oracle.coefficients(0, p)],
            "closed_form": [str(c) for c in closed.coefficients(0, p)],
            "decomposition": [str(c) for c in decomposed.coefficients(0, p)],
            "printed_table_matches": table_ok,
            "omitted": sorted(set(omit)),
        },
    )


def verify_triple_product(prec: Rational) -> VerificationReport:
    """theta(z) as a bilateral sum against -i q^(1/8) zeta^(-1/2) (q;q)(zeta;q)(zeta^-1 q;q).

    Both sides carry the factor i, so the check compares the rational blocks
    sum_m (-1)^m q^(n^2/2) zeta^n and -q^(1/8) zeta^(-1/2) (q;q)(zeta;q)(zeta^-1 q;q).
    """
    p = F(prec)
    started = time.perf_counter()
    zd = (2, 1)
    coeffs: dict[Key, Fraction] = {}
    radius = math.isqrt(max(int(2 * p), 0)) + 2
    for m in range(-radius - 1, radius + 1):
        n = m + HALF
        e = n * n / 2
        if e < p:
            coeffs[(int(2 * n), 0, int(8 * e))] = F(-1 if m % 2 else 1)
    bilateral = LaurentBlock(zd, 8, coeffs, math.ceil(8 * p))

    product = monomial_block((-HALF, 0), F(1, 8), -1, zd)
    product = block_mul(product, series_block(euler_product(p), zd))
    product = block_mul(product, pochhammer_block((1, 0), 0, p, zd))
    product = block_mul(product, pochhammer_block((-1, 0), 1, p, zd))
    product = product.truncate(p)

    first = _first_block_mismatch(bilateral, product)
    return VerificationReport(
        name="JTP",
        status=CheckStatus.PASS if first is None else CheckStatus.FAIL,
        order=p,
        first_mismatch=first,
        elapsed=time.perf_counter() - started,
        details={"terms": len(bilateral.coeffs)},
    )


def _first_block_mismatch(x: LaurentBlock, y: LaurentBlock) -> Fraction | None:
    denom = math.lcm(x.qdenom, y.qdenom)
    x, y = _rescale_q(x, denom), _rescale_q(y, denom)
    window = min(t for t in (x.trunc, y.trunc) if t is not None)
    bad = [
        key[2]
        for key in set(x.coeffs) | set(y.coeffs)
        if key[2] < window and x.coeffs.get(key, 0) != y.coeffs.get(key, 0)
    ]
    return F(min(bad), denom) if bad else None


def rho(m: int, n: int) -> int:
    """(sgn(m + 1/2) + sgn(n + 1/2)) / 2 on integers: 1 if both >= 0, -1 if both < 0, else 0."""
    if m >= 0 and n >= 0:
        return 1
    if m < 0 and n < 0:
        return -1
    return 0


def tk_coefficient(k: int, r: tuple[int, int], prec: Rational) -> QExpansion:
    """The r-th Fourier coefficient of the normalized Schur-index Jacobi form T_k.

    q^((k+1)(2 r2 + 1)/4) sum over Z^2 of (-1)^n1 rho(n1, n2 + r1) rho(n2 + r2, n2)
    q^(n1(n1+1)/2 + n1(n2 + r1) + (k+1) n2^2 + (k+1)(r2+1) n2).
    """
    if k < 1:
        raise MalformedParams(f"k must be a positive integer, got {k}")
    p = F(prec)
    r1, r2 = r
    A = [[HALF, HALF], [HALF, F(k + 1)]]
    b = [HALF + r1, F((k + 1) * (r2 + 1))]
    c = F((k + 1) * (2 * r2 + 1), 4)
    terms: dict[Fraction, Fraction] = {}
    for n1, n2 in enumerate_quadratic(A, b, c, p):
        weight = rho(n1, n2 + r1) * rho(n2 + r2, n2)
        if weight:
            if n1 % 2:
                weight = -weight
            e = _quad_value(A, b, c, (n1, n2))
            terms[e] = terms.get(e, F(0)) + weight
    return from_terms(terms, p)


def verify_coefficient(which: str, r: tuple[Rational, Rational], prec: Rational) -> VerificationReport:
    """Closed-form D(r) or C(r) against the same coefficient of the brute-force expansion.

    For D(0, 0) the series is also compared with sum_{n >= 1} n q^(n^2).
    """
    p = F(prec)
    started = time.perf_counter()
    if which == "D":
        key = (int(r[0]), int(r[1]))
        closed, oracle = coeff_D(key, p), coeff_D_oracle(key, p)
    elif which == "C":
        key_c = (F(r[0]), F(r[1]))
        closed, oracle = coeff_C(key_c, p), coeff_C_oracle(key_c, p)
    else:
        raise MalformedParams(f"unknown coefficient family {which!r}; expected D or C")
    mismatches = [m for m in (first_mismatch(oracle, closed),) if m is not None]
    if which == "D" and tuple(r) == (0, 0):
        squares = from_terms(
            {n * n: n for n in range(1, math.isqrt(max(int(p), 0)) + 2) if n * n < p}, p
        )
        mismatch = first_mismatch(squares, closed)
        if mismatch is not None:
            mismatches.append(mismatch)
    first = min(mismatches) if mismatches else None
    return VerificationReport(
        name=f"{which}({r[0]},{r[1]})",
        status=CheckStatus.PASS if first is None else CheckStatus.FAIL,
        order=p,
        first_mismatch=first,
        elapsed=time.perf_counter() - started,
        details={"closed_form": [str(c) for c in closed.coefficients(0, p)]},
    )
