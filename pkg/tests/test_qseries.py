"""Tests for exact truncated q-series arithmetic."""

import cmath
import math
from fractions import Fraction

import pytest

from false_theta.qseries import (
    QExpansion,
    arith,
    constant,
    euler_product,
    eval_numeric,
    first_mismatch,
    from_terms,
    invert,
    monomial,
    power,
    q_derivative,
    qpochhammer,
    shift,
    substitute_power,
    truncate,
    zero,
)
from false_theta.types import (
    NonconvergentEvaluation,
    TruncationRequired,
    ZeroLeadingCoefficient,
)


class TestQExpansion:
    """Tests for construction and canonical form."""

    def test_canonicalizes_denominator(self) -> None:
        """Common factors of indices, trunc and denom are removed."""
        a = QExpansion(2, {2: Fraction(1), 0: Fraction(3)}, 4)
        assert a.denom == 1
        assert a.coeffs == {0: 3, 1: 1}
        assert a.trunc == 2

    def test_drops_zero_and_truncated_coefficients(self) -> None:
        """Zeros and indices at or above trunc are not stored."""
        a = QExpansion(1, {0: Fraction(0), 1: Fraction(2), 5: Fraction(7)}, 3)
        assert a.coeffs == {1: 2}

    def test_precision_is_exclusive(self) -> None:
        """Coefficients at the precision are unknown."""
        a = from_terms({0: 1, 1: 2}, 3)
        assert a.precision == 3
        assert a.coefficient(2) == 0
        with pytest.raises(TruncationRequired):
            a.coefficient(3)

    def test_exact_series_has_no_precision(self) -> None:
        """trunc=None marks a finite exact series."""
        a = constant(5)
        assert a.is_exact
        assert a.precision is None
        assert a.coefficient(100) == 0

    def test_rational_exponents(self) -> None:
        """Exponents may be rational; items() yields them ascending."""
        a = from_terms({Fraction(1, 8): 1, Fraction(9, 8): -1}, Fraction(17, 8))
        assert list(a.items()) == [(Fraction(1, 8), 1), (Fraction(9, 8), -1)]
        assert a.lead_exponent == Fraction(1, 8)

    def test_equality_and_hash(self) -> None:
        """Equal series compare and hash equal."""
        a = from_terms({0: 1, 2: 3}, 5)
        b = QExpansion(1, {2: Fraction(3), 0: Fraction(1)}, 5)
        assert a == b
        assert hash(a) == hash(b)
        assert a != from_terms({0: 1, 2: 3}, 6)


class TestArithmetic:
    """Tests for ring operations and their truncation bounds."""

    def test_add_takes_smaller_precision(self) -> None:
        """Sum is known only where both operands are."""
        a = from_terms({0: 1, 3: 1}, 4)
        b = from_terms({1: 2}, 2)
        s = a + b
        assert s.precision == 2
        assert s.coeffs == {0: 1, 1: 2}

    def test_exact_operand_takes_other_precision(self) -> None:
        """An exact operand does not limit precision."""
        s = constant(1) + from_terms({1: 1}, 3)
        assert s.precision == 3

    def test_mul_precision_rule(self) -> None:
        """trunc(ab) = min(trunc(a) + lead(b), trunc(b) + lead(a))."""
        a = from_terms({0: 1, 1: 1}, 3)
        b = from_terms({2: 1}, 4)
        assert (a * b).precision == 4  # min(3 + 2, 4 + 0)

    def test_arith_dispatch(self) -> None:
        """arith routes add, sub, mul and scale."""
        a = from_terms({0: 1, 1: 1}, 5)
        assert arith("add", a, a) == arith("scale", a, 2)
        assert arith("sub", a, a).is_zero
        assert arith("mul", a, a).coeffs == {0: 1, 1: 2, 2: 1}

    def test_scale_rejects_series(self) -> None:
        """scale takes a rational factor only."""
        a = constant(1)
        with pytest.raises(TypeError):
            arith("scale", a, a)

    def test_mixed_denominators(self) -> None:
        """Series on different exponent lattices combine on the common one."""
        a = monomial(Fraction(1, 2)) + monomial(Fraction(1, 3))
        assert a.denom == 6
        assert a.coefficient(Fraction(1, 2)) == 1
        assert a.coefficient(Fraction(1, 3)) == 1

    def test_power(self) -> None:
        """(1 + q)^3 = 1 + 3q + 3q^2 + q^3."""
        a = from_terms({0: 1, 1: 1})
        assert power(a, 3).coeffs == {0: 1, 1: 3, 2: 3, 3: 1}
        assert (a**2).coeffs == {0: 1, 1: 2, 2: 1}

    def test_zero_times_anything(self) -> None:
        """Exact zero absorbs truncation."""
        assert (zero() * from_terms({0: 1}, 3)).is_exact


class TestInvert:
    """Tests for reciprocals."""

    def test_geometric_series(self) -> None:
        """1 / (1 - q) = sum q^n."""
        inv = invert(from_terms({0: 1, 1: -1}), 6)
        assert inv.coefficients(0, 6) == [1] * 6
        assert inv.precision == 6

    def test_truncated_input_bound(self) -> None:
        """Precision is trunc - 2 lead for a truncated input."""
        a = from_terms({1: 2, 2: 1}, 6)
        inv = invert(a)
        assert inv.precision == 4
        assert inv.coefficient(-1) == Fraction(1, 2)
        assert inv * a == from_terms({0: 1}, 5)

    def test_exact_needs_precision(self) -> None:
        """Inverting an exact series without a target raises."""
        with pytest.raises(TruncationRequired):
            invert(from_terms({0: 1, 1: 1}))

    def test_zero_raises(self) -> None:
        """Zero has no inverse."""
        with pytest.raises(ZeroLeadingCoefficient):
            invert(zero(5))

    def test_euler_reciprocal_counts_partitions(self) -> None:
        """1 / (q; q) generates p(n)."""
        partitions = invert(euler_product(10)).coefficients(0, 10)
        assert partitions == [1, 1, 2, 3, 5, 7, 11, 15, 22, 30]


class TestExponentOperations:
    """Tests for substitution, shift, derivative and truncation."""

    def test_substitute_power(self) -> None:
        """a(q^(1/2)) halves exponents and precision."""
        a = from_terms({0: 1, 1: 2}, 3)
        b = substitute_power(a, Fraction(1, 2))
        assert b.coefficient(Fraction(1, 2)) == 2
        assert b.precision == Fraction(3, 2)

    def test_substitute_power_rejects_nonpositive(self) -> None:
        """Only positive powers are allowed."""
        with pytest.raises(ValueError):
            substitute_power(constant(1), 0)

    def test_shift(self) -> None:
        """Multiplying by q^(1/8) moves terms and precision."""
        b = shift(from_terms({0: 1}, 2), Fraction(1, 8))
        assert list(b.items()) == [(Fraction(1, 8), 1)]
        assert b.precision == Fraction(17, 8)

    def test_q_derivative(self) -> None:
        """q d/dq multiplies by the exponent."""
        a = from_terms({Fraction(1, 2): 4, 2: 1}, 3)
        assert q_derivative(a) == from_terms({Fraction(1, 2): 2, 2: 2}, 3)

    def test_truncate(self) -> None:
        """truncate forgets coefficients at and above the bound."""
        a = from_terms({0: 1, 1: 1, 2: 1})
        assert truncate(a, 2) == from_terms({0: 1, 1: 1}, 2)

    def test_first_mismatch(self) -> None:
        """Lowest differing exponent inside the common window."""
        a = from_terms({0: 1, 2: 3, 5: 1}, 6)
        b = from_terms({0: 1, 2: 4}, 4)
        assert first_mismatch(a, b) == 2
        assert first_mismatch(a, truncate(a, 3)) is None


class TestPochhammer:
    """Tests for q-Pochhammer builders."""

    def test_pentagonal_numbers(self) -> None:
        """(q; q) = 1 - q - q^2 + q^5 + q^7 - ..."""
        e = qpochhammer(1, 8)
        assert e.coefficients(0, 8) == [1, -1, -1, 0, 0, 1, 0, 1]

    def test_fractional_offset(self) -> None:
        """(q^(1/2); q) starts 1 - q^(1/2) - q^(3/2)."""
        e = qpochhammer(Fraction(1, 2), 2)
        assert e.coefficient(Fraction(1, 2)) == -1
        assert e.coefficient(Fraction(3, 2)) == -1
        assert e.coefficient(1) == 0

    def test_rejects_nonpositive_offset(self) -> None:
        """Offset and step must be positive."""
        with pytest.raises(ValueError):
            qpochhammer(0, 5)


class TestEvalNumeric:
    """Tests for numeric evaluation."""

    def test_exact_polynomial(self) -> None:
        """1 + q at tau = i is 1 + e^(-2 pi) with no tail."""
        value = eval_numeric(from_terms({0: 1, 1: 1}), 1j)
        assert value.value == pytest.approx(1 + math.exp(-2 * math.pi))
        assert value.error == 0.0

    def test_truncated_series_has_tail(self) -> None:
        """Truncated input reports a positive tail estimate."""
        value = eval_numeric(invert(euler_product(20)), 1j)
        assert value.error > 0
        assert value.error < 1e-20

    def test_extended_matches_double(self) -> None:
        """mpmath and numpy paths agree."""
        a = from_terms({Fraction(1, 24): 1, Fraction(25, 24): -1}, 2)
        tau = 0.25 + 0.8j
        fast = eval_numeric(a, tau).value
        slow = eval_numeric(a, tau, extended=True).value
        assert abs(fast - slow) < 1e-14
        expected = cmath.exp(2j * math.pi * tau / 24) * (1 - cmath.exp(2j * math.pi * tau))
        assert abs(fast - expected) < 1e-14

    def test_lower_half_plane_raises(self) -> None:
        """Evaluation needs Im(tau) > 0."""
        with pytest.raises(NonconvergentEvaluation):
            eval_numeric(constant(1), 0.5 + 0j)
