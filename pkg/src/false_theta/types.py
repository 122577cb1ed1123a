"""Shared types for false-theta.

This module contains the data types and the error hierarchy used across the
series engines, the numeric integrators, the CLI, and the MCP server.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Any

Rational = Fraction | int

# Exit statuses used by the CLI
EXIT_OK = 0
EXIT_MISMATCH = 1
EXIT_USAGE = 2
EXIT_NONCONVERGENT = 3


class FalseThetaError(Exception):
    """Base class for all domain errors."""

    exit_code = EXIT_USAGE


class ZeroLeadingCoefficient(FalseThetaError):
    """Inverse requested for a series with no nonzero coefficient below its truncation."""


class TruncationRequired(FalseThetaError):
    """An operation needs a finite precision that neither operand provides."""


class NonconvergentEvaluation(FalseThetaError):
    """Numeric evaluation outside the region of convergence or above tolerance."""

    exit_code = EXIT_NONCONVERGENT


class BranchCrossing(FalseThetaError):
    """A principal square root jumped sheets along an integration path."""

    exit_code = EXIT_NONCONVERGENT


class InvalidTorsionPoint(FalseThetaError):
    """Theta requested at the zero 2-torsion point."""


class UnknownSeries(FalseThetaError):
    """Series name not present in the registry."""


class MalformedParams(FalseThetaError):
    """Parameters for a builder or input file are ill-formed."""


class NonpositiveOffset(FalseThetaError):
    """Reciprocal Pochhammer symbol with a non-positive q-offset."""


class IncompatibleLattices(FalseThetaError):
    """Laurent blocks with mismatched elliptic exponent lattices."""


class NotUnimodular(FalseThetaError):
    """Matrix is not in SL2(Z)."""


class PolePoint(FalseThetaError):
    """Evaluation point lies on an excluded lattice."""


class NotATree(FalseThetaError):
    """Plumbing graph edge set is not a tree."""


class NotPositiveDefinite(FalseThetaError):
    """Linking matrix or Gram matrix is not positive definite."""


class NotPositiveDefiniteQ(FalseThetaError):
    """Binary form (sigma1, sigma2, sigma3) has non-positive discriminant D."""


class ClassVectorMismatch(FalseThetaError):
    """Class vector does not represent 2 coker(M) + delta."""


class ClosureViolation(FalseThetaError):
    """Shift set or sign map violates the required reflection symmetries."""


class UsageError(FalseThetaError):
    """Invalid command-line or tool input."""


class QuadraticConvention(Enum):
    """Normalization of the quadratic form attached to a Gram matrix."""

    HALF = "half"  # exponent K/2 * n^T G n
    FULL = "full"  # exponent K * n^T G n


class CheckStatus(Enum):
    """Outcome of a verification."""

    PASS = "pass"
    FAIL = "fail"


class PrecisionMode(Enum):
    """Floating precision used by numeric evaluation."""

    DOUBLE = "double"
    EXTENDED = "extended"  # mpmath at 30 digits


@dataclass(frozen=True)
class UnaryThetaSpec:
    """Index, residue and derivative order of a unary theta function."""

    m: Fraction  # positive integer or half-integer
    r: int
    k: int = 0

    def __post_init__(self) -> None:
        m = Fraction(self.m)
        if m <= 0 or (2 * m).denominator != 1:
            raise MalformedParams(f"theta index must be a positive half-integer, got {m}")
        if self.k < 0:
            raise MalformedParams(f"derivative order must be nonnegative, got {self.k}")
        object.__setattr__(self, "m", m)
        # Integer index: period 2m. Half-integer index: the alternating sign makes the period 4m.
        period = int(2 * m) if m.denominator == 1 else int(4 * m)
        object.__setattr__(self, "r", self.r % period)

    @property
    def is_integral(self) -> bool:
        return self.m.denominator == 1

    @property
    def label(self) -> str:
        base = f"theta_{{{self.m},{self.r}}}"
        return base if self.k == 0 else f"theta^[{self.k}]_{{{self.m},{self.r}}}"


@dataclass(frozen=True)
class OneDimFalseSpec:
    """Rank one false theta sum over n in Z + shift.

    Each term is sgn(n + sign_offset) * n^power * q^(modulus n^2), times
    (-1)^(n - shift) when alternating. With signed=False the sign factor is dropped.
    """

    modulus: Fraction
    shift: Fraction
    sign_offset: Fraction = Fraction(0)
    alternating: bool = False
    power: int = 0
    signed: bool = True

    def __post_init__(self) -> None:
        if Fraction(self.modulus) <= 0:
            raise MalformedParams(f"modulus must be positive, got {self.modulus}")
        if self.power not in (0, 1, 2):
            raise MalformedParams(f"weight power must be 0, 1 or 2, got {self.power}")


@dataclass(frozen=True)
class SignPair:
    """Term coeff * sgn(lam . n) * sgn(mu . n) of a sign structure."""

    lam: tuple[Fraction, Fraction]
    mu: tuple[Fraction, Fraction]
    coeff: Fraction = Fraction(1)


@dataclass
class FalseThetaSpec:
    """Rank two shifted-lattice sum with signs, polynomial weight and parity character."""

    gram: tuple[tuple[Fraction, Fraction], tuple[Fraction, Fraction]]
    shift: tuple[Fraction, Fraction] = (Fraction(0), Fraction(0))
    signs: list[SignPair] = field(default_factory=list)  # empty means no sign factor
    weight: list[tuple[int, int, Fraction]] = field(
        default_factory=lambda: [(0, 0, Fraction(1))]
    )  # monomials (i, j, c) for c * n1^i * n2^j
    parity: tuple[int, int] = (0, 0)  # (-1)^(p . (n - shift))
    scale: Fraction = Fraction(1)  # K
    convention: QuadraticConvention = QuadraticConvention.HALF
    prefactor_exponent: Fraction = Fraction(0)

    def __post_init__(self) -> None:
        (a, b), (b2, c) = self.gram
        if Fraction(b) != Fraction(b2):
            raise MalformedParams("gram matrix must be symmetric")
        if Fraction(a) <= 0 or Fraction(a) * Fraction(c) - Fraction(b) ** 2 <= 0:
            raise NotPositiveDefinite(f"gram matrix {self.gram} is not positive definite")
        if Fraction(self.scale) <= 0:
            raise MalformedParams(f"scale must be positive, got {self.scale}")

    @property
    def discriminant(self) -> Fraction:
        """Delta = ac - b^2 of the gram matrix."""
        (a, b), (_, c) = self.gram
        return Fraction(a) * Fraction(c) - Fraction(b) ** 2


@dataclass(frozen=True)
class QuadratureConfig:
    """Gauss-Legendre settings for the iterated integrals."""

    nodes: int = 24  # per panel
    panels: int = 12
    tail_cutoff: float | None = None  # height T of the vertical tail; None picks it from decay
    tolerance: float = 1e-10

    def __post_init__(self) -> None:
        if self.nodes <= 0 or self.panels <= 0 or self.tolerance <= 0:
            raise MalformedParams("quadrature nodes, panels and tolerance must be positive")
        if self.tail_cutoff is not None and self.tail_cutoff <= 0:
            raise MalformedParams("tail cutoff must be positive")

    def refined(self) -> QuadratureConfig:
        """Configuration with doubled nodes and panels."""
        return QuadratureConfig(
            nodes=2 * self.nodes,
            panels=2 * self.panels,
            tail_cutoff=self.tail_cutoff,
            tolerance=self.tolerance,
        )


@dataclass(frozen=True)
class NumericValue:
    """A complex value with an error estimate."""

    value: complex
    error: float = 0.0
    details: dict[str, Any] = field(default_factory=dict)  # cutoffs, branch signs


@dataclass(frozen=True)
class EtaMultiplierState:
    """Multiplier of eta at an SL2(Z) matrix and its generator word."""

    matrix: tuple[int, int, int, int]  # (a, b, c, d)
    value: complex
    word: str  # letters T, t (T^-1), S, and N (-I)


@dataclass
class PlumbingGraph:
    """Weighted tree of a plumbed 3-manifold."""

    weights: dict[int, int]  # vertex id -> weight m_jj
    edges: list[tuple[int, int]] = field(default_factory=list)

    @property
    def vertices(self) -> list[int]:
        return sorted(self.weights)

    @property
    def degrees(self) -> dict[int, int]:
        degree = dict.fromkeys(self.weights, 0)
        for u, v in self.edges:
            degree[u] += 1
            degree[v] += 1
        return degree

    @property
    def delta(self) -> tuple[int, ...]:
        """Shift vector with entries deg(v) mod 2."""
        degree = self.degrees
        return tuple(degree[v] % 2 for v in self.vertices)


@dataclass(frozen=True)
class LinkingMatrix:
    """Linking matrix of a plumbing graph with exact flags."""

    entries: tuple[tuple[int, ...], ...]
    determinant: int
    positive_definite: bool

    @property
    def unimodular(self) -> bool:
        return abs(self.determinant) == 1

    @property
    def size(self) -> int:
        return len(self.entries)


@dataclass
class FsqeSpec:
    """Input data (S, Q, eps, K) of a sum over shifted positive quadrants."""

    sigma: tuple[int, int, int]
    scale: int
    shifts: list[tuple[Fraction, Fraction]] = field(default_factory=list)
    signs: list[int] = field(default_factory=list)  # eps(alpha), aligned with shifts

    @property
    def discriminant(self) -> int:
        """D = sigma1 sigma3 - sigma2^2."""
        s1, s2, s3 = self.sigma
        return s1 * s3 - s2 * s2

    def sign_map(self) -> dict[tuple[Fraction, Fraction], int]:
        return dict(zip(self.shifts, self.signs, strict=True))


@dataclass
class VerificationReport:
    """Outcome of an identity check."""

    name: str
    status: CheckStatus
    order: Fraction | None = None  # precision the check covered
    first_mismatch: Fraction | None = None  # lowest differing exponent, exact checks
    residual: float | None = None  # numeric checks
    tolerance: float | None = None
    elapsed: float = 0.0
    details: dict[str, Any] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.status == CheckStatus.PASS


@dataclass
class RunConfig:
    """Resolved command-line request."""

    verb: str
    series: str | None = None
    spec_path: str | None = None
    order: int = 10  # N: coefficients through q^N
    tau: complex | None = None
    w: complex | None = None  # None means tau + i*infinity
    quadrature: QuadratureConfig = field(default_factory=QuadratureConfig)
    precision: PrecisionMode = PrecisionMode.DOUBLE
    output_path: str | None = None
    output_format: str = "human"  # human | json
    options: dict[str, Any] = field(default_factory=dict)  # verb-specific flags

    def __post_init__(self) -> None:
        if self.order <= 0:
            raise UsageError(f"order: -N must be positive, got {self.order}")
        for label, point in (("tau", self.tau), ("w", self.w)):
            if point is not None and point.imag <= 0:
                raise UsageError(f"{label}: point must lie in the upper half-plane, got {point}")
        if self.output_format not in ("human", "json"):
            raise UsageError(f"format: expected human or json, got {self.output_format}")
