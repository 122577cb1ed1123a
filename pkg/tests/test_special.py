"""Tests for eta, E2, theta functions and the Serre derivative."""

from fractions import Fraction

import pytest

from false_theta.qseries import constant, mul, power, truncate
from false_theta.special import (
    e2_series,
    eta6_over_theta_squared,
    eta_cubed_series,
    eta_power,
    eta_series,
    serre_derivative,
    theta_derivative_at_zero,
    theta_torsion_series,
    theta_unary_series,
    verify_eta_cubed,
)
from false_theta.types import (
    InvalidTorsionPoint,
    MalformedParams,
    TruncationRequired,
    UnaryThetaSpec,
)

F = Fraction


class TestEta:
    """Tests for the Dedekind eta function."""

    def test_pentagonal_prefix(self) -> None:
        """eta = q^(1/24) - q^(25/24) - q^(49/24) + ..."""
        assert list(eta_series(3).items()) == [(F(1, 24), 1), (F(25, 24), -1), (F(49, 24), -1)]

    def test_precision(self) -> None:
        """The requested precision is kept."""
        assert eta_series(7).precision == 7

    def test_eta_cubed_prefix(self) -> None:
        """eta^3 = q^(1/8) - 3 q^(9/8) + 5 q^(25/8) - ..."""
        assert list(eta_cubed_series(4).items()) == [(F(1, 8), 1), (F(9, 8), -3), (F(25, 8), 5)]

    def test_eta_cubed_is_cube(self) -> None:
        """The odd-square sum equals the cube of eta through q^10."""
        p = 11
        assert eta_cubed_series(p) == truncate(power(eta_series(p), 3), p)

    def test_negative_power(self) -> None:
        """1/eta = q^(-1/24) (1 + q + 2 q^2 + ...)."""
        inv = eta_power(-1, 3)
        assert inv.precision == 3
        assert inv.coefficient(F(-1, 24)) == 1
        assert inv.coefficient(F(23, 24)) == 1
        assert inv.coefficient(F(47, 24)) == 2

    def test_verify_eta_cubed(self) -> None:
        """Three representations of eta^3 agree."""
        report = verify_eta_cubed(11)
        assert report.passed
        assert report.first_mismatch is None


class TestE2:
    """Tests for the quasimodular Eisenstein series."""

    def test_prefix(self) -> None:
        """E2 = 1 - 24 q - 72 q^2 - 96 q^3 - 168 q^4."""
        assert e2_series(5).coefficients(0, 5) == [1, -24, -72, -96, -168]

    def test_serre_derivative_kills_eta(self) -> None:
        """D_(1/2) eta = 0 since q d/dq log eta = E2 / 24."""
        result = serre_derivative(eta_series(6), F(1, 2))
        assert result.is_zero
        assert result.precision == 6

    def test_serre_derivative_of_eta_cubed(self) -> None:
        """D_(3/2) eta^3 = 0 as well."""
        assert serre_derivative(eta_cubed_series(8), F(3, 2)).is_zero

    def test_serre_derivative_needs_precision(self) -> None:
        """An exact input needs an explicit precision."""
        with pytest.raises(TruncationRequired):
            serre_derivative(constant(1), 2)


class TestUnaryTheta:
    """Tests for theta^[k]_{m,r}."""

    def test_index_one(self) -> None:
        """theta_{1,0} = 1 + 2 q + 2 q^4 + ..."""
        series = theta_unary_series(UnaryThetaSpec(F(1), 0), 5)
        assert series.coefficients(0, 5) == [1, 2, 0, 0, 2]

    def test_integer_periodicity(self) -> None:
        """theta_{m,r} = theta_{m,r+2m} for integer m."""
        a = theta_unary_series(UnaryThetaSpec(F(3), 1, 1), 9)
        b = theta_unary_series(UnaryThetaSpec(F(3), 7, 1), 9)
        assert a == b

    def test_integer_reflection(self) -> None:
        """theta^[k]_{m,-r} = (-1)^k theta^[k]_{m,r}."""
        for k in (0, 1, 2):
            a = theta_unary_series(UnaryThetaSpec(F(3), 1, k), 9)
            b = theta_unary_series(UnaryThetaSpec(F(3), -1, k), 9)
            assert b == a * (-1) ** k

    def test_half_integer_period_flips_sign(self) -> None:
        """theta_{m,r+2m} = -theta_{m,r} for half-integer m."""
        a = theta_unary_series(UnaryThetaSpec(F(3, 2), 1), 9)
        b = theta_unary_series(UnaryThetaSpec(F(3, 2), 4), 9)
        assert b == -a

    def test_half_integer_reflection(self) -> None:
        """theta^[k]_{m,-r} = (-1)^(k+1) theta^[k]_{m,r} for half-integer m."""
        for k in (0, 1):
            a = theta_unary_series(UnaryThetaSpec(F(3, 2), 1, k), 9)
            b = theta_unary_series(UnaryThetaSpec(F(3, 2), -1, k), 9)
            assert b == a * (-1) ** (k + 1)

    def test_residue_is_reduced(self) -> None:
        """Residues reduce mod 2m or mod 4m."""
        assert UnaryThetaSpec(F(3), 7).r == 1
        assert UnaryThetaSpec(F(3, 2), 7).r == 1

    def test_rejects_bad_index(self) -> None:
        """Index must be a positive half-integer."""
        with pytest.raises(MalformedParams):
            UnaryThetaSpec(F(1, 3), 0)
        with pytest.raises(MalformedParams):
            UnaryThetaSpec(F(0), 0)

    def test_rejects_negative_derivative(self) -> None:
        """Derivative order must be nonnegative."""
        with pytest.raises(MalformedParams):
            UnaryThetaSpec(F(1), 0, -1)


class TestTorsionTheta:
    """Tests for theta at the 2-torsion points."""

    def test_half(self) -> None:
        """theta(1/2) = -2 q^(1/8) (1 + q + q^3 + ...)."""
        value = theta_torsion_series(0, 1, 4)
        assert value.phase == 2
        assert list(value.series.items()) == [(F(1, 8), 2), (F(9, 8), 2), (F(25, 8), 2)]

    def test_square_is_rational(self) -> None:
        """(i^p S)^2 = (-1)^p S^2."""
        value = theta_torsion_series(1, 0, 4)
        assert value.phase % 2 == 1
        assert value.square() == -mul(value.series, value.series)

    def test_zero_point_raises(self) -> None:
        """theta vanishes identically at lattice points."""
        with pytest.raises(InvalidTorsionPoint):
            theta_torsion_series(0, 0, 4)

    def test_derivative_at_zero_is_eta_cubed(self) -> None:
        """(1/2 pi i) theta'(0) = i eta^3."""
        derivative = theta_derivative_at_zero(8)
        assert derivative.phase == 1
        assert derivative.series == eta_cubed_series(8)

    def test_eta6_quotient_leading_term(self) -> None:
        """eta^6 / theta(1/2)^2 starts at 1/4."""
        quotient = eta6_over_theta_squared(0, 1, 4)
        assert quotient.lead_exponent == 0
        assert quotient.lead_coefficient == F(1, 4)
