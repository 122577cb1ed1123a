"""Tests for numeric evaluation, quadrature and the modular checks."""

import cmath
import math
from fractions import Fraction

import numpy as np
import pytest

from false_theta.eichler import (
    CallableTerm,
    ExponentialTerm,
    GeodesicPath,
    ProductTerm,
    ThetaTerm,
    completion,
    dedekind_sum,
    double_integral,
    eisenstein_e2,
    eta_multiplier,
    evaluate_series,
    generator_word,
    jacobi_theta,
    lemma_residual,
    lemma_suite,
    modular_residual,
    rank_two_examples,
    rank_two_residual,
    rank_two_suite,
    sign_lemma_grid,
    sign_lemma_integral,
    sign_lemma_residual,
    theta_numeric,
    verify_eta_multiplier,
    word_matrix,
)
from false_theta.types import (
    MalformedParams,
    NonconvergentEvaluation,
    NotUnimodular,
    PolePoint,
    QuadratureConfig,
    UsageError,
)

# Gamma(1/4) / (2 pi^(3/4))
ETA_AT_I = 0.7682254223260566


class TestPointValues:
    """Tests for theta, eta and E2 at points of the upper half-plane."""

    def test_eta_at_i(self) -> None:
        """eta(i) = Gamma(1/4) / (2 pi^(3/4))."""
        assert theta_numeric("eta", 1j) == pytest.approx(ETA_AT_I, rel=1e-12)

    def test_extended_precision_agrees(self) -> None:
        """The mpmath path matches the numpy path."""
        tau = 0.3 + 0.9j
        assert abs(theta_numeric("eta3", tau, extended=True) - theta_numeric("eta3", tau)) < 1e-12

    def test_eta_cubed(self) -> None:
        """eta3 is the cube of eta."""
        tau = -0.2 + 1.1j
        assert abs(theta_numeric("eta3", tau) - theta_numeric("eta", tau) ** 3) < 1e-12

    def test_e2_at_i(self) -> None:
        """E2(i) = 3 / pi."""
        assert eisenstein_e2(1j) == pytest.approx(3 / math.pi, rel=1e-12)

    def test_jacobi_theta_symmetries(self) -> None:
        """theta is odd in z and antiperiodic under z -> z + 1."""
        z, tau = 0.17 + 0.05j, 0.1 + 1.2j
        value = jacobi_theta(z, tau)
        assert abs(jacobi_theta(-z, tau) + value) < 1e-12
        assert abs(jacobi_theta(z + 1, tau) + value) < 1e-12

    def test_lower_half_plane_raises(self) -> None:
        """Point values need Im(tau) > 0."""
        with pytest.raises(NonconvergentEvaluation):
            theta_numeric("eta", -1j)
        with pytest.raises(NonconvergentEvaluation):
            eisenstein_e2(0.5 + 0j)

    def test_unknown_kind_raises(self) -> None:
        """Only eta, eta3, unary and torsion are known."""
        with pytest.raises(MalformedParams):
            theta_numeric("sigma", 1j)

    def test_evaluate_series(self) -> None:
        """A registry series evaluates through its q-expansion."""
        value = evaluate_series("eta", None, 1j, 1e-12)
        assert abs(value.value - ETA_AT_I) < 1e-10
        assert value.error < 1e-10


class TestGeodesicPath:
    """Tests for integration paths."""

    def test_kinds(self) -> None:
        """Ray, vertical segment, circle arc and straight segment."""
        tau = 0.1 + 1j
        assert GeodesicPath(tau).kind == "ray"
        assert GeodesicPath(tau, 0.1 + 2j).kind == "vertical"
        assert GeodesicPath(tau, 0.6 + 1.5j).kind == "circle"
        assert GeodesicPath(tau, 0.6 + 1.5j, straight=True).kind == "segment"

    def test_circle_endpoints(self) -> None:
        """The arc starts at tau and ends at w."""
        tau, w = 0.1 + 1j, 0.6 + 1.5j
        path = GeodesicPath(tau, w)
        start, end = path.offset([0.0, 1.0])
        assert abs(start) < 1e-14
        assert abs(tau + end - w) < 1e-12
        assert abs(abs(w - path.center) - path.radius) < 1e-12

    def test_rejects_bad_points(self) -> None:
        """Paths live in the upper half-plane and have distinct endpoints."""
        with pytest.raises(NonconvergentEvaluation):
            GeodesicPath(-1j)
        with pytest.raises(MalformedParams):
            GeodesicPath(1j, 1j)


class TestDoubleIntegral:
    """Tests for the quadrature engine and the sign lemma."""

    def test_regularized_needs_vanishing_diagonal(self) -> None:
        """The (3/2)-kernel only converges when the integrand vanishes at tau."""
        terms = [ProductTerm(1.0, ExponentialTerm(1.0, 0.5), ExponentialTerm(1.0, 0.5))]
        with pytest.raises(MalformedParams):
            double_integral(terms, GeodesicPath(1j), regularized=True)

    def test_zero_direction_vanishes(self) -> None:
        """a = 0 or b = 0 gives an identically zero integral."""
        assert sign_lemma_integral(0.0, 1.0, 1j).value == 0

    def test_sign_lemma(self) -> None:
        """sgn(l1) sgn(l2 + kappa l1) q^(|l|^2/2) as two ray integrals plus an arctan term."""
        assert sign_lemma_residual(1.0, 0.5, 1 / 3, 1j) < 1e-8

    def test_sign_lemma_on_the_wall(self) -> None:
        """At l1 = 0 the sign product vanishes and the identity still holds."""
        assert sign_lemma_residual(0.0, 1.0, -2.0, 1j) < 1e-8

    def test_rank_two_integral_form(self) -> None:
        """A generic shifted sign product matches its double-integral form."""
        report = rank_two_residual(rank_two_examples()[0], 1j)
        assert report.passed, report.residual

    def test_rank_two_suite(self) -> None:
        """Every rank two example, including the alternating one, matches."""
        report = rank_two_suite(1j)
        assert report.passed, report.details
        assert len(report.details["residuals"]) == len(rank_two_examples())

    @pytest.mark.parametrize("tau", [1j, 0.2 + 1.5j])
    def test_sign_lemma_grid(self, tau: complex) -> None:
        """The sign lemma holds on the 3 x 3 x 3 grid of l1, l2 and kappa."""
        report = sign_lemma_grid(tau)
        assert report.passed, report.residual
        assert len(report.details["grid"]) == 27

    def test_theta_difference_far_up_the_ray(self) -> None:
        """Increments far above tau stay finite and tend to -theta(tau)."""
        term = ThetaTerm(Fraction(1), Fraction(1, 2))
        tau = 2j
        d = np.array([1e-3j, 0.5 + 3j, 57j])
        expected = term.values(tau + d) - term.values(np.full(d.shape, tau))
        diff = term.difference(tau, d)
        assert np.all(np.isfinite(diff))
        assert np.allclose(diff, expected, rtol=0, atol=1e-12)

    def test_non_finite_integrand_raises(self) -> None:
        """An integrand that blows up is reported as nonconvergent."""
        blowup = CallableTerm(lambda w: np.full(w.shape, np.inf, dtype=complex))
        ones = CallableTerm(lambda w: np.ones(w.shape, dtype=complex))
        with pytest.raises(NonconvergentEvaluation):
            double_integral([ProductTerm(1.0, blowup, ones)], GeodesicPath(1j, 2j))


class TestEtaMultiplier:
    """Tests for SL2(Z) words and the eta multiplier."""

    @pytest.mark.parametrize(
        "matrix",
        [(0, -1, 1, 0), (1, 1, 1, 2), (-1, 0, -1, -1), (2, 1, 1, 1), (1, 5, 0, 1)],
    )
    def test_word_round_trip(self, matrix: tuple[int, int, int, int]) -> None:
        """The generator word multiplies back to the matrix."""
        assert word_matrix(generator_word(matrix)) == matrix

    def test_s_word(self) -> None:
        """S is its own word."""
        assert generator_word((0, -1, 1, 0)) == "S"

    def test_non_unimodular_raises(self) -> None:
        """Determinant must be 1."""
        with pytest.raises(NotUnimodular):
            generator_word((1, 1, 0, 2))

    def test_dedekind_sum(self) -> None:
        """s(1, k) = (k - 1)(k - 2) / 12k."""
        for k in (2, 3, 7):
            assert dedekind_sum(1, k) * 12 * k == (k - 1) * (k - 2)

    def test_translation_multiplier(self) -> None:
        """eta(tau + 1) = e^(pi i / 12) eta(tau)."""
        assert abs(eta_multiplier((1, 1, 0, 1)).value - cmath.exp(1j * math.pi / 12)) < 1e-15

    @pytest.mark.parametrize(
        "matrix", [(0, -1, 1, 0), (1, 1, 1, 2), (2, 1, 1, 1), (-1, 0, -1, -1), (3, -1, 4, -1)]
    )
    def test_multiplier_numerically(self, matrix: tuple[int, int, int, int]) -> None:
        """eta(M tau) = nu(M) (c tau + d)^(1/2) eta(tau)."""
        report = verify_eta_multiplier(matrix, 0.23 + 0.91j)
        assert report.passed, report.residual


class TestCompletions:
    """Tests for the completed false theta functions."""

    def test_unknown_kind_raises(self) -> None:
        """Only psi, phi, fk and fsqe are known."""
        with pytest.raises(UsageError):
            completion("chi", 1j)

    def test_fsqe_needs_spec(self) -> None:
        """The quadrant-sum completion needs its spec."""
        with pytest.raises(MalformedParams):
            completion("fsqe", 1j)

    def test_psi_completion_is_finite(self) -> None:
        """The weight 2 completion converges to w = tau + i infinity."""
        value = completion("psi", 0.1 + 1.2j)
        assert cmath.isfinite(value.value)
        assert value.error < 1e-6

    @pytest.mark.parametrize(("kind", "series"), [("psi", "Psi"), ("phi", "Phi")])
    @pytest.mark.parametrize("tau", [2j, 1 / 3 + 1.5j])
    def test_integral_to_infinity_is_the_series(self, kind: str, series: str, tau: complex) -> None:
        """With w = tau + i infinity the completion is the false theta series itself."""
        integral = completion(kind, tau)
        value = evaluate_series(series, None, tau, 1e-12)
        assert abs(integral.value - value.value) < 1e-6

    @pytest.mark.parametrize("kind", ["psi", "phi"])
    @pytest.mark.parametrize("matrix", [(1, 1, 0, 1), (0, -1, 1, 0)])
    @pytest.mark.parametrize(("tau", "w"), [(0.2 + 1.1j, -0.3 + 1.6j), (0.15 + 1.2j, -0.25 + 1.7j)])
    def test_transformation_law(
        self, kind: str, matrix: tuple[int, int, int, int], tau: complex, w: complex
    ) -> None:
        """Psi-hat (weight 2, nu_eta^8) and Phi-hat (weight 3, nu_eta^10) transform under T and S."""
        residual = modular_residual(kind, matrix, tau, w)
        assert residual.value.real < 1e-6

    def test_refined_quadrature_agrees(self) -> None:
        """Doubling nodes and panels does not move the psi completion."""
        coarse = completion("psi", 2j)
        fine = completion("psi", 2j, None, QuadratureConfig().refined())
        assert fine.details["nodes"] == 2 * coarse.details["nodes"]
        assert abs(fine.value - coarse.value) < 1e-8


    def test_residual_rejects_unknown_kind(self) -> None:
        """Transformation laws are known for psi and phi."""
        with pytest.raises(UsageError):
            modular_residual("eta", (1, 1, 0, 1), 1j, 2j)


class TestLemmas:
    """Tests for the partial-fraction theta identities."""

    def test_suite(self) -> None:
        """Every identity holds at the sample points."""
        report = lemma_suite()
        assert report.passed, report.details

    def test_unknown_identity(self) -> None:
        """Unknown names are usage errors."""
        with pytest.raises(UsageError):
            lemma_residual("theta_quartic", 0.2 + 0.1j, 1j, 0)

    def test_pole_point(self) -> None:
        """z on the period lattice is a pole."""
        with pytest.raises(PolePoint):
            lemma_residual("theta_square", 0j, 1j, 0)

    def test_wrong_residue_class(self) -> None:
        """theta_pair needs an integral r."""
        with pytest.raises(MalformedParams):
            lemma_residual("theta_pair", 0.21 + 0.3j, 2j, 0.5, 0.37 + 0.41j)
