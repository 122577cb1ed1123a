"""Numeric evaluation in the upper half-plane.

Theta functions are evaluated as vectorised lattice sums, iterated
Eichler-type integrals by composite Gauss-Legendre quadrature along
hyperbolic geodesics, and the completions of the rank two false theta
functions are assembled from sums of products of unary theta functions.

Every integration path starts at tau. The substitution s = u^2 of the path
parameter turns the (distance)^(-1/2) kernels into analytic integrands; the
regularized (3/2)-kernel is handled by subtracting f(tau) and adding the
antiderivative term 2i f(tau) (i(w1 - tau))^(-1/2).

Key functions:
- theta_numeric(), jacobi_theta(), eisenstein_e2(): point values
- ThetaTerm, ExponentialTerm: vectorised one-variable integrands
- GeodesicPath: the geodesic, straight segment, or vertical ray from tau
- double_integral(), regularized_inner(): the quadrature engine
- completion(): Psi-hat, Phi-hat, Fk-hat and the quadrant-sum completion
- eta_multiplier(), generator_word(), verify_eta_multiplier(): the eta multiplier
- modular_residual(): transformation-law residuals of the completions
- sign_lemma_residual(), rank_two_residual(), lemma_residual(): numeric identity checks
- sign_lemma_grid(), lemma_suite(), rank_two_suite(): the same checks over fixed samples
- evaluate_series(): a registry series at a point with a tail estimate

Update this docstring if you add new completions or identities.
"""

from __future__ import annotations

import cmath
import dataclasses
import logging
import math
import time
from collections.abc import Callable, Sequence
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Protocol

import mpmath
import numpy as np

from false_theta.lattice import false_theta_sum, theta_companion
from false_theta.qseries import eval_numeric
from false_theta.types import (
    BranchCrossing,
    CheckStatus,
    EtaMultiplierState,
    FalseThetaSpec,
    FsqeSpec,
    InvalidTorsionPoint,
    MalformedParams,
    NonconvergentEvaluation,
    NotUnimodular,
    NumericValue,
    PolePoint,
    QuadraticConvention,
    QuadratureConfig,
    Rational,
    SignPair,
    UnaryThetaSpec,
    UsageError,
    VerificationReport,
)

logger = logging.getLogger(__name__)

F = Fraction
TWO_PI_I = 2j * math.pi

# Lattice sums keep every term above e^-_CUT
_CUT = 40.0
# Points closer than this to an excluded lattice are treated as poles
_POLE_GAP = 1e-9

Matrix = tuple[int, int, int, int]


def _as_points(w: complex | np.ndarray) -> np.ndarray:
    return np.asarray(w, dtype=complex)


def _sqrt(z: np.ndarray) -> np.ndarray:
    """Principal square root with the cut convention sqrt(-t) = i sqrt(t)."""
    z = np.asarray(z, dtype=complex)
    on_cut = (z.imag == 0) & (z.real < 0)
    return np.where(on_cut, 1j * np.sqrt(np.abs(z.real)), np.sqrt(z))


def _expm1(y: np.ndarray) -> np.ndarray:
    """e^y - 1 without cancellation for small complex y.

    Far down the ray Re y is very negative; e^y underflows to 0 there and the
    result is -1.
    """
    y = np.asarray(y, dtype=complex)
    with np.errstate(under="ignore"):
        out = np.exp(y) - 1
    small = np.abs(y) < 1
    out[small] = 2 * np.sinh(y[small] / 2) * np.exp(y[small] / 2)
    return out



def _mpq(x: Fraction) -> mpmath.mpf:
    return mpmath.mpf(x.numerator) / x.denominator


class Integrand(Protocol):
    """A holomorphic function of one variable in the upper half-plane."""

    def values(self, w: np.ndarray) -> np.ndarray: ...

    def difference(self, tau: complex, d: np.ndarray) -> np.ndarray: ...

    @property
    def decay(self) -> float: ...


@dataclass(frozen=True)
class ThetaTerm:
    """coeff * sum over n in offset + period*Z of (+-1)^s n^power e^(2 pi i index n^2 scale w).

    s is the step index (n = offset + period*s); the sign alternates in s when
    alternating is set.
    """

    index: Fraction
    offset: Fraction
    period: Fraction = F(1)
    power: int = 0
    alternating: bool = False
    scale: Fraction = F(1)
    coeff: complex = 1.0

    @classmethod
    def unary(cls, spec: UnaryThetaSpec, scale: Rational = 1, coeff: complex = 1.0) -> ThetaTerm:
        """theta^[k]_{m,r}(scale * w)."""
        offset = F(spec.r) / (2 * spec.m)
        if not spec.is_integral:
            offset += F(1, 2)
        return cls(spec.m, offset, F(1), spec.k, not spec.is_integral, F(scale), coeff)

    def _lattice(self, im_min: float) -> tuple[np.ndarray, np.ndarray]:
        rate = 2 * math.pi * float(self.index * self.scale) * im_min
        radius = math.sqrt(_CUT / rate) + 1.0
        off, per = float(self.offset), float(self.period)
        lo = math.floor((-radius - off) / per) - 1
        hi = math.ceil((radius - off) / per) + 1
        steps = np.arange(lo, hi + 1)
        n = off + per * steps
        weights = n**self.power if self.power else np.ones_like(n)
        if self.alternating:
            weights = np.where(steps % 2 == 1, -weights, weights)
        keep = weights != 0
        return n[keep], weights[keep]

    def _heights(self, x: np.ndarray) -> float:
        im_min = float(np.min(x.imag))
        if im_min <= 0:
            raise NonconvergentEvaluation(f"theta evaluation needs Im > 0, got {im_min:.3g}")
        return im_min

    def values(self, w: np.ndarray) -> np.ndarray:
        w = _as_points(w)
        x = (float(self.scale) * w).ravel()
        n, weights = self._lattice(self._heights(x))
        phase = np.exp(TWO_PI_I * float(self.index) * np.multiply.outer(x, n * n))
        return (self.coeff * (phase @ weights)).reshape(w.shape)

    def difference(self, tau: complex, d: np.ndarray) -> np.ndarray:
        """values(tau + d) - values(tau), accurate when d is small."""
        d = _as_points(d)
        scale = float(self.scale)
        x0 = scale * tau
        xd = (scale * d).ravel()
        n, weights = self._lattice(min(x0.imag, self._heights(x0 + xd)))
        base = weights * np.exp(TWO_PI_I * float(self.index) * x0 * n * n)
        y = TWO_PI_I * float(self.index) * np.multiply.outer(xd, n * n)
        return (self.coeff * (_expm1(y) @ base)).reshape(d.shape)

    @property
    def decay(self) -> float:
        """Smallest exponent e with a nonzero e^(2 pi i e w) term."""
        r = self.offset % self.period
        nearest = min(r, self.period - r)
        if nearest == 0 and self.power > 0:
            nearest = self.period
        return float(self.index * self.scale * nearest * nearest)

    def value_mp(self, w: complex, dps: int = 30) -> complex:
        """Single-point evaluation in mpmath at dps digits."""
        with mpmath.mp.workdps(dps):
            x = mpmath.mpc(w.real, w.imag) * _mpq(self.scale)
            if x.imag <= 0:
                raise NonconvergentEvaluation(f"theta evaluation needs Im > 0 at {w}")
            rate = 2 * math.pi * float(self.index * self.scale) * float(x.imag)
            radius = math.sqrt((_CUT + dps * 2.4) / rate) + 1.0
            lo = math.floor((-radius - float(self.offset)) / float(self.period)) - 1
            hi = math.ceil((radius - float(self.offset)) / float(self.period)) + 1
            index = _mpq(self.index)
            terms = []
            for s in range(lo, hi + 1):
                n = self.offset + self.period * s
                weight = _mpq(n) ** self.power if self.power else mpmath.mpf(1)
                if self.alternating and s % 2:
                    weight = -weight
                if weight:
                    terms.append(weight * mpmath.exp(2j * mpmath.pi * index * x * _mpq(n) ** 2))
            total = mpmath.fsum(terms)
            return complex(total) * complex(self.coeff)


@dataclass(frozen=True)
class ExponentialTerm:
    """coeff * e^(2 pi i exponent w)."""

    coeff: float
    exponent: float

    def values(self, w: np.ndarray) -> np.ndarray:
        return self.coeff * np.exp(TWO_PI_I * self.exponent * _as_points(w))

    def difference(self, tau: complex, d: np.ndarray) -> np.ndarray:
        base = self.coeff * cmath.exp(TWO_PI_I * self.exponent * tau)
        return base * _expm1(TWO_PI_I * self.exponent * _as_points(d))

    @property
    def decay(self) -> float:
        return self.exponent


@dataclass(frozen=True)
class CallableTerm:
    """Adapter for a plain vectorised callable."""

    func: Callable[[np.ndarray], np.ndarray]
    rate: float = 0.0

    def values(self, w: np.ndarray) -> np.ndarray:
        return np.asarray(self.func(_as_points(w)), dtype=complex)

    def difference(self, tau: complex, d: np.ndarray) -> np.ndarray:
        d = _as_points(d)
        return self.values(tau + d) - self.values(np.full(d.shape, tau))

    @property
    def decay(self) -> float:
        return self.rate


def eta_term(scale: Rational = 1) -> ThetaTerm:
    """eta(scale*w) = sum_k (-1)^k q^((6k-1)^2/24)."""
    return ThetaTerm(F(1, 24), F(-1), F(6), 0, True, F(scale))


def eta_cubed_term(scale: Rational = 1) -> ThetaTerm:
    """eta(scale*w)^3 = theta^[1]_{1/2,0}(scale*w)."""
    return ThetaTerm.unary(UnaryThetaSpec(F(1, 2), 0, 1), scale)


def theta_numeric(
    kind: str,
    w: complex,
    scale: Rational = 1,
    *,
    spec: UnaryThetaSpec | None = None,
    torsion: tuple[int, int] | None = None,
    extended: bool = False,
) -> complex:
    """eta, eta3, unary or torsion theta at scale*w.

    kind is one of "eta", "eta3", "unary" (needs spec) and "torsion" (needs
    torsion=(l1, l2), evaluating theta((l1 tau + l2)/2; tau) at tau = scale*w).
    """
    x = complex(F(scale)) * complex(w)
    if x.imag <= 0:
        raise NonconvergentEvaluation(f"theta evaluation needs Im(scale*w) > 0, got {x}")
    if kind == "eta":
        term = eta_term()
    elif kind == "eta3":
        term = eta_cubed_term()
    elif kind == "unary":
        if spec is None:
            raise MalformedParams("unary theta needs a UnaryThetaSpec")
        term = ThetaTerm.unary(spec)
    elif kind == "torsion":
        if torsion is None:
            raise MalformedParams("torsion theta needs (l1, l2)")
        l1, l2 = torsion
        if l1 % 2 == 0 and l2 % 2 == 0:
            raise InvalidTorsionPoint(f"theta vanishes at ({l1} tau + {l2})/2")
        # i^(1+l2) q^(-l1^2/8) sum over v in Z + (1+l1)/2 of (-1)^(m(1+l2)) q^(v^2/2)
        phase = 1j ** ((1 + l2) % 4) * cmath.exp(-TWO_PI_I * x * l1 * l1 / 8)
        term = ThetaTerm(F(1, 2), F(1 + l1, 2), F(1), 0, (1 + l2) % 2 == 1, F(1), phase)
    else:
        raise MalformedParams(f"unknown theta kind {kind!r}")
    if extended:
        return term.value_mp(x)
    return complex(term.values(np.array([x]))[0])


def jacobi_theta(z: complex, tau: complex) -> complex:
    """theta(z; tau) = sum over n in Z + 1/2 of e^(pi i n) q^(n^2/2) zeta^n."""
    if tau.imag <= 0:
        raise NonconvergentEvaluation(f"theta needs Im(tau) > 0, got {tau}")
    reach = abs(z.imag) / tau.imag + math.sqrt(2 * _CUT / (math.pi * tau.imag)) + 2
    m = np.arange(-math.ceil(reach) - 1, math.ceil(reach) + 1)
    n = m + 0.5
    return complex(np.sum(np.exp(1j * math.pi * n + 1j * math.pi * tau * n * n + TWO_PI_I * n * z)))


def eisenstein_e2(tau: complex) -> complex:
    """E2 = 1 - 24 sum n q^n / (1 - q^n)."""
    if tau.imag <= 0:
        raise NonconvergentEvaluation(f"E2 needs Im(tau) > 0, got {tau}")
    count = math.ceil(_CUT / (2 * math.pi * tau.imag)) + 2
    n = np.arange(1, count + 1)
    qn = np.exp(TWO_PI_I * tau * n)
    return complex(1 - 24 * np.sum(n * qn / (1 - qn)))


@dataclass(frozen=True)
class GeodesicPath:
    """Path from tau to end, parametrised by s in [0, 1].

    end=None is the vertical ray tau + i t, t in [0, height]. Otherwise the
    path is the hyperbolic geodesic (a circle with real center, or a vertical
    segment when Re tau = Re end), or the straight segment when straight is set.
    """

    tau: complex
    end: complex | None = None
    straight: bool = False
    height: float = 1.0

    def __post_init__(self) -> None:
        if self.tau.imag <= 0:
            raise NonconvergentEvaluation(f"path start must lie in the upper half-plane: {self.tau}")
        if self.end is not None:
            if self.end.imag <= 0:
                raise NonconvergentEvaluation(f"path end must lie in the upper half-plane: {self.end}")
            if self.end == self.tau:
                raise MalformedParams("path end must differ from its start")
        if self.height <= 0:
            raise MalformedParams("ray height must be positive")

    @property
    def kind(self) -> str:
        if self.end is None:
            return "ray"
        diff = self.end - self.tau
        if abs(diff.real) <= 1e-14 * abs(diff):
            return "vertical"
        return "segment" if self.straight else "circle"

    @property
    def center(self) -> float:
        t, w = self.tau, self.end
        assert w is not None
        return (abs(w) ** 2 - abs(t) ** 2) / (2 * (w.real - t.real))

    @property
    def radius(self) -> float:
        return abs(self.tau - self.center)

    def _angles(self) -> tuple[float, float]:
        c = self.center
        assert self.end is not None
        start = cmath.phase(self.tau - c)
        return start, cmath.phase(self.end - c) - start

    def _rise(self) -> float:
        if self.end is None:
            return self.height
        return self.end.imag - self.tau.imag

    def offset(self, s: np.ndarray) -> np.ndarray:
        """w(s) - tau."""
        s = np.asarray(s, dtype=float)
        kind = self.kind
        if kind in ("ray", "vertical"):
            return 1j * (self._rise() * s)
        assert self.end is not None
        if kind == "segment":
            return s * (self.end - self.tau)
        start, sweep = self._angles()
        # R e^(i start) (e^(i s sweep) - 1)
        return self.radius * cmath.exp(1j * start) * 2j * np.sin(s * sweep / 2) * np.exp(
            0.5j * s * sweep
        )

    def kernel_argument(self, s: np.ndarray) -> np.ndarray:
        """i (w(s) - tau), exactly real and negative on vertical paths going up."""
        if self.kind in ("ray", "vertical"):
            return (-self._rise() * np.asarray(s, dtype=float)).astype(complex)
        return 1j * self.offset(s)

    def derivative(self, s: np.ndarray) -> np.ndarray:
        """dw/ds."""
        s = np.asarray(s, dtype=float)
        kind = self.kind
        if kind in ("ray", "vertical"):
            return np.full(s.shape, 1j * self._rise())
        assert self.end is not None
        if kind == "segment":
            return np.full(s.shape, self.end - self.tau, dtype=complex)
        start, sweep = self._angles()
        return 1j * sweep * self.radius * np.exp(1j * (start + s * sweep))


def branch_sign(t1: np.ndarray, t2: complex) -> np.ndarray:
    """chi = sqrt(i(t1-t2)/(t1 t2)) sqrt(t1) sqrt(t2) / sqrt(i(t1-t2)), rounded to +-1."""
    t1 = _as_points(t1)
    z = 1j * (t1 - t2)
    chi = _sqrt(z / (t1 * t2)) * _sqrt(t1) * _sqrt(np.asarray(t2)) / _sqrt(z)
    return np.where(chi.real >= 0, 1, -1)


@dataclass(frozen=True)
class ProductTerm:
    """coeff * outer(w1) inner(w2)."""

    coeff: complex
    outer: Integrand
    inner: Integrand


def _panel_rules(nodes: int, panels: int) -> tuple[np.ndarray, ...]:
    x, wts = np.polynomial.legendre.leggauss(nodes)
    edges = np.linspace(0.0, 1.0, panels + 1)
    a, b = edges[:-1, None], edges[1:, None]
    u = (a + b) / 2 + (b - a) / 2 * x
    wu = (b - a) / 2 * wts
    # Gauss rule from each panel start to each node
    half = (u - a) / 2
    sub_u = a[..., None] + half[..., None] * (x + 1)
    sub_w = half[..., None] * wts
    return u, wu, sub_u, sub_w


def _geometry(path: GeodesicPath, u: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    s = u * u
    return path.offset(s), path.kernel_argument(s), path.derivative(s) * 2 * u


def _check_sheets(roots: np.ndarray) -> None:
    flat = roots.ravel()
    overlap = (flat[:-1] * np.conj(flat[1:])).real
    if np.any(overlap < 0):
        raise BranchCrossing("principal square root changed sheets along the integration path")


def _cumulative(g_nodes: np.ndarray, g_sub: np.ndarray, wu: np.ndarray, sub_w: np.ndarray) -> tuple[np.ndarray, complex]:
    full = np.sum(wu * g_nodes, axis=1)
    prefix = np.concatenate(([0.0], np.cumsum(full)[:-1]))
    return prefix[:, None] + np.sum(sub_w * g_sub, axis=2), complex(np.sum(full))


def _double_integral_once(
    terms: Sequence[ProductTerm],
    path: GeodesicPath,
    regularized: bool,
    nodes: int,
    panels: int,
) -> tuple[complex, float]:
    tau = path.tau
    u, wu, sub_u, sub_w = _panel_rules(nodes, panels)
    d_o, z_o, jac_o = _geometry(path, u)
    d_s, z_s, jac_s = _geometry(path, sub_u)
    root_o, root_s = _sqrt(z_o), _sqrt(z_s)
    _check_sheets(root_o)

    end = np.array([1.0])
    d_e, z_e, _ = _geometry(path, end)
    root_e = _sqrt(z_e)

    total = np.zeros(u.shape, dtype=complex)
    total_end = 0j
    for term in terms:
        if regularized:
            g_o = term.inner.difference(tau, d_o) * jac_o / (z_o * root_o)
            g_s = term.inner.difference(tau, d_s) * jac_s / (z_s * root_s)
        else:
            g_o = term.inner.values(tau + d_o) * jac_o / root_o
            g_s = term.inner.values(tau + d_s) * jac_s / root_s
        inner, inner_end = _cumulative(g_o, g_s, wu, sub_w)
        piece = term.outer.values(tau + d_o) * inner
        piece_end = complex(term.outer.values(tau + d_e)[0]) * inner_end
        if regularized:
            b_tau = complex(term.inner.values(np.array([tau]))[0])
            piece = piece + 2j * b_tau * term.outer.difference(tau, d_o) / root_o
            piece_end += 2j * b_tau * complex(term.outer.difference(tau, d_e)[0] / root_e[0])
        total += term.coeff * piece
        total_end += term.coeff * piece_end
    value = complex(np.sum(wu * total * jac_o / root_o))
    # integrand per unit length at the far end of the path
    end_density = float(np.abs(total_end / root_e[0]))
    return value, end_density


def _diagonal(terms: Sequence[ProductTerm], tau: complex) -> tuple[complex, float]:
    point = np.array([tau])
    parts = [
        term.coeff * complex(term.outer.values(point)[0]) * complex(term.inner.values(point)[0])
        for term in terms
    ]
    return sum(parts, 0j), sum(abs(p) for p in parts)


def double_integral(
    terms: Sequence[ProductTerm],
    path: GeodesicPath,
    regularized: bool = False,
    cfg: QuadratureConfig | None = None,
) -> NumericValue:
    """sum_j c_j int_tau^w A_j(w1)/sqrt(i(w1-tau)) int_tau^w1 B_j(w2) K(w2) dw2 dw1.

    K is (i(w2-tau))^(-1/2) (plain) or the regularized (i(w2-tau))^(-3/2).
    The regularized form needs sum_j c_j A_j(tau) B_j(tau) = 0.
    The error estimate is the change against half the nodes per panel plus,
    on the vertical ray, the decay bound of the truncated tail.
    """
    cfg = cfg or QuadratureConfig()
    if regularized:
        diag, size = _diagonal(terms, path.tau)
        if abs(diag) > 1e-8 * max(size, 1.0):
            raise MalformedParams(
                "regularized integral needs an integrand vanishing on the diagonal"
            )
    value, end_density = _double_integral_once(terms, path, regularized, cfg.nodes, cfg.panels)
    coarse, _ = _double_integral_once(terms, path, regularized, max(cfg.nodes // 2, 4), cfg.panels)
    if not (np.isfinite(value) and np.isfinite(coarse)):
        raise NonconvergentEvaluation(f"double integral on the {path.kind} path is not finite")
    error = float(np.abs(value - coarse))
    if not math.isfinite(error):
        raise NonconvergentEvaluation(f"double integral on the {path.kind} path overflowed")
    details: dict[str, Any] = {"nodes": cfg.nodes, "panels": cfg.panels, "path": path.kind}
    if path.kind == "ray":
        mu = min(term.outer.decay for term in terms)
        tail = end_density / (2 * math.pi * mu) if mu > 0 else math.inf
        error += tail
        details["tail_cutoff"] = path.height
        details["tail_estimate"] = tail
        if tail > cfg.tolerance:
            logger.warning("tail estimate %.2e above tolerance %.0e; raise --tail", tail, cfg.tolerance)
    chi = branch_sign(path.tau + path.offset(np.linspace(0.05, 1.0, 20)), path.tau)
    if path.kind != "segment" and np.any(chi != chi[0]):
        raise BranchCrossing("branch sign chi is not constant along the geodesic")
    details["chi"] = int(chi[0])
    logger.debug("double integral on %s path: %s (error %.2e)", path.kind, value, error)
    return NumericValue(value, error, details)


def regularized_inner(
    f: Integrand | Callable[[np.ndarray], np.ndarray],
    tau: complex,
    w1: complex,
    cfg: QuadratureConfig | None = None,
) -> complex:
    """Regularized int_tau^w1 f(w2) (i(w2-tau))^(-3/2) dw2 along the geodesic.

    Computed as int (f(w2) - f(tau)) (i(w2-tau))^(-3/2) dw2 + 2i f(tau) (i(w1-tau))^(-1/2).
    """
    cfg = cfg or QuadratureConfig()
    term: Integrand = f if hasattr(f, "difference") else CallableTerm(f)  # type: ignore[arg-type]
    path = GeodesicPath(tau, w1)
    u, wu, _, _ = _panel_rules(cfg.nodes, cfg.panels)
    d, z, jac = _geometry(path, u)
    root = _sqrt(z)
    _check_sheets(root)
    body = complex(np.sum(wu * term.difference(tau, d) * jac / (z * root)))
    f_tau = complex(term.values(np.array([tau]))[0])
    end = complex(_sqrt(path.kernel_argument(np.array([1.0])))[0])
    return body + 2j * f_tau / end


def _unary(m: Rational, r: int, k: int = 0, scale: Rational = 1, coeff: complex = 1.0) -> ThetaTerm:
    return ThetaTerm.unary(UnaryThetaSpec(F(m), r, k), scale, coeff)


def psi_terms() -> list[ProductTerm]:
    """h(w) = theta^[1]_{3,1}(w1) theta_{1,1}(w2) - theta^[1]_{3,2}(w1) theta_{1,0}(w2)."""
    return [
        ProductTerm(1.0, _unary(3, 1, 1), _unary(1, 1)),
        ProductTerm(-1.0, _unary(3, 2, 1), _unary(1, 0)),
    ]


def phi_terms() -> list[ProductTerm]:
    """4 f_0(w) + g_0(w) with f_0, g_0 antisymmetric products of theta^[1]."""
    half3 = F(3, 2)
    return [
        ProductTerm(4.0, _unary(3, 1, 1), _unary(3, 2, 1)),
        ProductTerm(-4.0, _unary(3, 2, 1), _unary(3, 1, 1)),
        ProductTerm(1.0, _unary(half3, 1, 1), _unary(half3, 0, 1)),
        ProductTerm(-1.0, _unary(half3, 0, 1), _unary(half3, 1, 1)),
    ]


def fk_terms(k: int) -> list[ProductTerm]:
    """eta((2k+1)w1)^3 eta(w2)^3 + 2(k+1) sum_j (-1)^j theta^[1]_{k+1,j}((2k+1)w1) theta^[1]_{k+1,j+k+1}(w2)."""
    if k < 1:
        raise MalformedParams(f"k must be a positive integer, got {k}")
    dilation = 2 * k + 1
    terms = [ProductTerm(1.0, eta_cubed_term(dilation), eta_cubed_term())]
    for j in range(2 * k + 2):
        sign = -1.0 if j % 2 else 1.0
        terms.append(
            ProductTerm(
                2 * (k + 1) * sign,
                _unary(k + 1, j, 1, dilation),
                _unary(k + 1, j + k + 1, 1),
            )
        )
    return terms


def fsqe_parts(spec: FsqeSpec) -> tuple[list[ProductTerm], list[tuple[complex, ThetaTerm, ThetaTerm]]]:
    """Integral terms and theta products of the quadrant-sum completion.

    The integral terms carry the prefactors K sigma3 sqrt(D)/2 and
    K sigma1 sqrt(D)/2; the theta products are the modular part before the
    factor (1 - (2/pi) arctan(sigma2/sqrt(D)))/4.
    """
    s1, s2, s3 = spec.sigma
    K, D = spec.scale, spec.discriminant
    root_d = math.sqrt(D)
    terms: list[ProductTerm] = []
    modular: list[tuple[complex, ThetaTerm, ThetaTerm]] = []
    for (a1, a2), eps in spec.sign_map().items():
        a1, a2 = F(a1), F(a2)
        for r in range(s3):
            outer = ThetaTerm(F(K * D * s3), (a1 + r) / s3, power=1)
            inner = ThetaTerm(F(K * s3), (s2 * (a1 + r) + s3 * a2) / s3, power=1)
            terms.append(ProductTerm(eps * K * s3 * root_d / 2, outer, inner))
            modular.append(
                (
                    complex(eps),
                    dataclasses.replace(outer, power=0),
                    dataclasses.replace(inner, power=0),
                )
            )
        for r in range(s1):
            outer = ThetaTerm(F(K * D * s1), (a2 + r) / s1, power=1)
            inner = ThetaTerm(F(K * s1), (s2 * (a2 + r) + s1 * a1) / s1, power=1)
            terms.append(ProductTerm(eps * K * s1 * root_d / 2, outer, inner))
    return terms, modular


def _ray_height(terms: Sequence[ProductTerm], cfg: QuadratureConfig) -> float:
    if cfg.tail_cutoff is not None:
        return cfg.tail_cutoff
    mu = min(term.outer.decay for term in terms)
    if mu <= 0:
        raise NonconvergentEvaluation("outer integrand does not decay along the vertical ray")
    height = math.log(1e3 / cfg.tolerance) / (2 * math.pi * mu)
    logger.debug("vertical tail cut at height %.3g (decay %.4g)", height, mu)
    return max(height, 1.0)


def _path(terms: Sequence[ProductTerm], tau: complex, w: complex | None, cfg: QuadratureConfig, straight: bool) -> GeodesicPath:
    if w is None:
        return GeodesicPath(tau, None, height=_ray_height(terms, cfg))
    return GeodesicPath(tau, w, straight=straight)


def _combine(*parts: tuple[complex, NumericValue]) -> NumericValue:
    value = sum((c * p.value for c, p in parts), 0j)
    error = sum(abs(c) * p.error for c, p in parts)
    details: dict[str, Any] = {}
    for _, p in parts:
        details.update(p.details)
    return NumericValue(value, error, details)


def completion(
    kind: str,
    tau: complex,
    w: complex | None = None,
    cfg: QuadratureConfig | None = None,
    *,
    k: int = 1,
    fsqe: FsqeSpec | None = None,
    straight: bool = False,
) -> NumericValue:
    """Completion of a rank two false theta function at (tau, w); w=None means tau + i infinity.

    kind is "psi", "phi", "fk" (with k) or "fsqe" (with a FsqeSpec).
    """
    cfg = cfg or QuadratureConfig()
    if tau.imag <= 0:
        raise NonconvergentEvaluation(f"tau must lie in the upper half-plane, got {tau}")
    if kind == "psi":
        terms = psi_terms()
        path = _path(terms, tau, w, cfg, straight)
        reg = double_integral(terms, path, True, cfg)
        return _combine((math.sqrt(3) / (2 * math.pi), reg))
    if kind == "phi":
        terms = phi_terms()
        path = _path(terms, tau, w, cfg, straight)
        reg = double_integral(terms, path, True, cfg)
        plain = double_integral(terms, path, False, cfg)
        # (w2 - tau) / (i(w2 - tau))^(3/2) = -i (i(w2 - tau))^(-1/2)
        return _combine((1 / math.pi, reg), (-eisenstein_e2(tau) / 6, plain))
    if kind == "fk":
        terms = fk_terms(k)
        path = _path(terms, tau, w, cfg, straight)
        return _combine((math.sqrt(2 * k + 1) / 2, double_integral(terms, path, False, cfg)))
    if kind == "fsqe":
        if fsqe is None:
            raise MalformedParams("fsqe completion needs a FsqeSpec")
        terms, modular = fsqe_parts(fsqe)
        path = _path(terms, tau, w, cfg, straight)
        integral = double_integral(terms, path, False, cfg)
        s2, D = fsqe.sigma[1], fsqe.discriminant
        factor = (1 - 2 / math.pi * math.atan(s2 / math.sqrt(D))) / 4
        point = np.array([tau])
        theta_part = sum(
            (eps * complex(a.values(point)[0]) * complex(b.values(point)[0]) for eps, a, b in modular),
            0j,
        )
        return _combine((1.0, integral), (factor, NumericValue(theta_part)))
    raise UsageError(f"unknown completion kind {kind!r}; expected psi, phi, fk or fsqe")


def _validate_matrix(M: Sequence[int]) -> Matrix:
    if len(M) != 4:
        raise NotUnimodular(f"expected four entries (a, b, c, d), got {len(M)}")
    a, b, c, d = (int(x) for x in M)
    if a * d - b * c != 1:
        raise NotUnimodular(f"matrix ({a} {b}; {c} {d}) has determinant {a * d - b * c}, not 1")
    return a, b, c, d


def mobius(M: Sequence[int], z: complex) -> complex:
    a, b, c, d = M
    return (a * z + b) / (c * z + d)


def dedekind_sum(h: int, k: int) -> Fraction:
    """s(h, k) = sum_{r=1}^{k-1} ((r/k)) ((h r/k)) for k > 0."""

    def sawtooth(x: Fraction) -> Fraction:
        if x.denominator == 1:
            return F(0)
        return x - math.floor(x) - F(1, 2)

    return sum((sawtooth(F(r, k)) * sawtooth(F(h * r, k)) for r in range(1, k)), F(0))


def generator_word(M: Sequence[int]) -> str:
    """Word in T, t (= T^-1), S and N (= -I) whose product is M."""
    a, b, c, d = _validate_matrix(M)
    letters: list[str] = []
    while c != 0:
        q = a // c
        letters.append(("T" if q > 0 else "t") * abs(q))
        letters.append("S")
        a, b = a - q * c, b - q * d
        a, b, c, d = c, d, -a, -b
    if a == -1:
        letters.append("N")
        b = -b
    letters.append(("T" if b > 0 else "t") * abs(b))
    return "".join(letters)


_GENERATORS: dict[str, Matrix] = {
    "T": (1, 1, 0, 1),
    "t": (1, -1, 0, 1),
    "S": (0, -1, 1, 0),
    "N": (-1, 0, 0, -1),
}


def word_matrix(word: str) -> Matrix:
    """Product of the generator matrices of a word, left to right."""
    result: Matrix = (1, 0, 0, 1)
    for letter in word:
        a, b, c, d = result
        e, f, g, h = _GENERATORS[letter]
        result = (a * e + b * g, a * f + b * h, c * e + d * g, c * f + d * h)
    return result


def eta_multiplier(M: Sequence[int]) -> EtaMultiplierState:
    """nu_eta(M) with eta(M tau) = nu_eta(M) (c tau + d)^(1/2) eta(tau), principal root."""
    a, b, c, d = _validate_matrix(M)
    if c == 0:
        # M = T^b or -T^-b; (-1)^(1/2) = i
        value = cmath.exp(1j * math.pi * b / 12) if a == 1 else -1j * cmath.exp(-1j * math.pi * b / 12)
    elif c > 0:
        phase = F(a + d, 12 * c) - dedekind_sum(d, c) - F(1, 4)
        value = cmath.exp(1j * math.pi * float(phase))
    else:
        # (c tau + d)^(1/2) = -i (-c tau - d)^(1/2) for c < 0
        value = 1j * eta_multiplier((-a, -b, -c, -d)).value
    return EtaMultiplierState((a, b, c, d), value, generator_word((a, b, c, d)))


def verify_eta_multiplier(
    M: Sequence[int], tau: complex, extended: bool = False, tolerance: float = 1e-8
) -> VerificationReport:
    """Compare eta(M tau) against nu_eta(M) (c tau + d)^(1/2) eta(tau) numerically."""
    started = time.perf_counter()
    state = eta_multiplier(M)
    a, b, c, d = state.matrix
    image = mobius(state.matrix, tau)
    lhs = theta_numeric("eta", image, extended=extended)
    rhs = state.value * cmath.sqrt(c * tau + d) * theta_numeric("eta", tau, extended=extended)
    residual = abs(lhs - rhs)
    return VerificationReport(
        name="eta-multiplier",
        status=CheckStatus.PASS if residual < tolerance else CheckStatus.FAIL,
        residual=residual,
        tolerance=tolerance,
        elapsed=time.perf_counter() - started,
        details={"matrix": list(state.matrix), "word": state.word, "nu": [state.value.real, state.value.imag]},
    )


_WEIGHTS = {"psi": (8, 2), "phi": (10, 3)}


def modular_residual(
    kind: str,
    M: Sequence[int],
    tau: complex,
    w: complex,
    cfg: QuadratureConfig | None = None,
) -> NumericValue:
    """|C(M tau, M w) - nu_eta(M)^p (c tau + d)^k C(tau, w)| for C = Psi-hat (p=8, k=2) or Phi-hat (p=10, k=3)."""
    if kind not in _WEIGHTS:
        raise UsageError(f"transformation law known for psi and phi, got {kind!r}")
    if w is None or w.imag <= 0 or tau.imag <= 0:
        raise UsageError("modular residual needs tau and w in the upper half-plane")
    state = eta_multiplier(M)
    _, _, c, d = state.matrix
    power, weight = _WEIGHTS[kind]
    factor = state.value**power * (c * tau + d) ** weight
    moved = completion(kind, mobius(state.matrix, tau), mobius(state.matrix, w), cfg)
    base = completion(kind, tau, w, cfg)
    residual = abs(moved.value - factor * base.value)
    return NumericValue(
        residual,
        moved.error + abs(factor) * base.error,
        {"word": state.word, "transformed": [moved.value.real, moved.value.imag], "base": [base.value.real, base.value.imag]},
    )


def _sgn(x: float) -> int:
    return (x > 0) - (x < 0)


def sign_lemma_integral(a: float, b: float, tau: complex, cfg: QuadratureConfig | None = None) -> NumericValue:
    """int_tau^{tau+i inf} a e^(pi i a^2 w1)/sqrt(i(w1-tau)) int_tau^w1 b e^(pi i b^2 w2)/sqrt(i(w2-tau))."""
    if a == 0 or b == 0:
        return NumericValue(0j)
    cfg = cfg or QuadratureConfig()
    terms = [ProductTerm(1.0, ExponentialTerm(a, a * a / 2), ExponentialTerm(b, b * b / 2))]
    return double_integral(terms, _path(terms, tau, None, cfg, False), False, cfg)


def sign_lemma_residual(
    l1: float, l2: float, kappa: float, tau: complex, cfg: QuadratureConfig | None = None
) -> float:
    """|sgn(l1) sgn(l2 + kappa l1) q^((l1^2+l2^2)/2) - (two ray integrals + (2/pi) arctan(kappa) q^...)|.

    With (l1, l2 + kappa l1) = (0, 0) the left side is 0 and the residual is
    the arctan correction itself.
    """
    q_part = cmath.exp(1j * math.pi * tau * (l1 * l1 + l2 * l2))
    lhs = _sgn(l1) * _sgn(l2 + kappa * l1) * q_part
    norm = math.sqrt(1 + kappa * kappa)
    m1, m2 = (l2 + kappa * l1) / norm, (l1 - kappa * l2) / norm
    rhs = (
        sign_lemma_integral(l1, l2, tau, cfg).value
        + sign_lemma_integral(m1, m2, tau, cfg).value
        + 2 / math.pi * math.atan(kappa) * q_part
    )
    return abs(lhs - rhs)


def _rank_two_terms(spec: FalseThetaSpec) -> list[ProductTerm]:
    (a, b), (_, c) = spec.gram
    a, b, c = F(a), F(b), F(c)
    if any(x.denominator != 1 for x in (a, b, c)):
        raise MalformedParams("integral representation needs an integral gram matrix")
    delta = spec.discriminant
    al1, al2 = (F(x) for x in spec.shift)
    p1, p2 = spec.parity
    terms: list[ProductTerm] = []
    for j in range(int(c)):
        outer = ThetaTerm(
            delta / (2 * c), al1 + j, c, 1, (p1 * int(c) + p2 * int(b)) % 2 == 1, F(1), (-1.0) ** (p1 * j)
        )
        inner = ThetaTerm(c / 2, al2 + b / c * (al1 + j), F(1), 1, p2 % 2 == 1)
        terms.append(ProductTerm(1.0, outer, inner))
    for j in range(int(a)):
        outer = ThetaTerm(
            delta / (2 * a), al2 + j, a, 1, (p2 * int(a) + p1 * int(b)) % 2 == 1, F(1), (-1.0) ** (p2 * j)
        )
        inner = ThetaTerm(a / 2, al1 + b / a * (al2 + j), F(1), 1, p1 % 2 == 1)
        terms.append(ProductTerm(1.0, outer, inner))
    return terms


def rank_two_residual(
    spec: FalseThetaSpec, tau: complex, cfg: QuadratureConfig | None = None
) -> VerificationReport:
    """sum sgn(n1) sgn(n2) q^(Q(n)/2) - (2/pi) delta arctan(b/sqrt(Delta)) against
    sqrt(Delta) int int (Theta1 + Theta2) - (2/pi) arctan(b/sqrt(Delta)) Theta(tau).

    The spec's sign structure is replaced by sgn(n1) sgn(n2); its parity
    character (for example (-1)^n1) is kept.
    """
    cfg = cfg or QuadratureConfig()
    started = time.perf_counter()
    if spec.scale != 1 or spec.convention != QuadraticConvention.HALF or spec.weight != [(0, 0, F(1))]:
        raise MalformedParams("integral representation covers unweighted sums with exponent Q(n)/2")
    signed = dataclasses.replace(spec, signs=[SignPair((F(1), F(0)), (F(0), F(1)))])
    (_, b), _ = spec.gram
    delta = float(spec.discriminant)
    angle = 2 / math.pi * math.atan(float(b) / math.sqrt(delta))
    prec = math.ceil(math.log(1e3 / cfg.tolerance) / (2 * math.pi * tau.imag)) + 2
    series = eval_numeric(false_theta_sum(signed, prec), tau).value
    theta = eval_numeric(theta_companion(signed, prec), tau).value
    integral_shift = all(F(x).denominator == 1 for x in spec.shift)
    lhs = series - (angle if integral_shift else 0.0)

    terms = _rank_two_terms(spec)
    integral = double_integral(terms, _path(terms, tau, None, cfg, False), False, cfg)
    rhs = math.sqrt(delta) * integral.value - angle * theta
    residual = abs(lhs - rhs)
    tolerance = max(cfg.tolerance, 10 * integral.error * math.sqrt(delta))
    return VerificationReport(
        name="rank2",
        status=CheckStatus.PASS if residual < max(tolerance, 1e-8) else CheckStatus.FAIL,
        residual=residual,
        tolerance=tolerance,
        elapsed=time.perf_counter() - started,
        details={"series": [lhs.real, lhs.imag], "integral": [rhs.real, rhs.imag], **integral.details},
    )


def _lattice_gap(x: complex, tau: complex, fraction: int = 1) -> float:
    """Distance from x to (1/fraction)(Z tau + Z)."""
    b = x.imag / tau.imag
    a = x.real - b * tau.real
    nearest = round(a * fraction) / fraction + round(b * fraction) / fraction * tau
    return abs(x - nearest)


def _off_lattice(label: str, x: complex, tau: complex, fraction: int = 1) -> None:
    if _lattice_gap(x, tau, fraction) < _POLE_GAP:
        lattice = "Z tau + Z" if fraction == 1 else f"(Z tau + Z)/{fraction}"
        raise PolePoint(f"{label} = {x} lies on {lattice}")


def _pole_sum(
    log_weight: np.ndarray, log_x: np.ndarray, power: int, coeff: np.ndarray | None = None
) -> complex:
    """sum coeff e^(log_weight) / (1 - e^(log_x))^power, stable for |e^(log_x)| > 1."""
    out = np.empty(log_weight.shape, dtype=complex)
    big = log_x.real > 0
    small = ~big
    out[small] = np.exp(log_weight[small]) / (1 - np.exp(log_x[small])) ** power
    out[big] = (
        (-1) ** power
        * np.exp(log_weight[big] - power * log_x[big])
        / (1 - np.exp(-log_x[big])) ** power
    )
    if coeff is not None:
        out = out * coeff
    return complex(np.sum(out))


def _range(tau: complex, r: float, *points: complex) -> np.ndarray:
    linear = abs(r) + 4 + 4 * sum(abs(p.imag) for p in points) / tau.imag
    reach = linear + math.sqrt(_CUT / (2 * math.pi * tau.imag))
    count = math.ceil(reach) + 3
    return np.arange(-count, count + 1, dtype=float)


def _require_integer(r: Fraction, identity: str) -> None:
    if r.denominator != 1:
        raise MalformedParams(f"{identity} needs an integer r, got {r}")


def _require_half_integer(r: Fraction, identity: str) -> None:
    if r.denominator != 2:
        raise MalformedParams(f"{identity} needs r in Z + 1/2, got {r}")


def _pair(w: complex | tuple[complex, complex] | None, identity: str) -> tuple[complex, complex]:
    if not isinstance(w, tuple) or len(w) != 2:
        raise MalformedParams(f"{identity} needs a pair (w1, w2)")
    return complex(w[0]), complex(w[1])


def _theta_pair(z: complex, w: Any, tau: complex, r: Fraction) -> tuple[complex, complex]:
    _require_integer(r, "theta_pair")
    if w is None or isinstance(w, tuple):
        raise MalformedParams("theta_pair needs a single point w")
    w = complex(w)
    _off_lattice("w", w, tau)
    _off_lattice("z", z, tau)
    _off_lattice("z + w", z + w, tau)
    rf = float(r)
    n = _range(tau, rf, z, w)
    eta3 = theta_numeric("eta", tau) ** 3
    th_w = jacobi_theta(w, tau)
    quad = tau * (n * n - rf * n)
    s1 = _pole_sum(TWO_PI_I * (quad - n * w), TWO_PI_I * (z + n * tau), 1)
    s2 = _pole_sum(TWO_PI_I * (quad + n * w), TWO_PI_I * (z + w + n * tau), 1)
    rhs = 1j / (eta3 * th_w) * s1 - 1j * cmath.exp(-TWO_PI_I * rf * w) / (eta3 * th_w) * s2
    lhs = cmath.exp(TWO_PI_I * rf * z) / (jacobi_theta(z, tau) * jacobi_theta(z + w, tau))
    return lhs, rhs


def _theta_square(z: complex, w: Any, tau: complex, r: Fraction) -> tuple[complex, complex]:
    _require_integer(r, "theta_square")
    _off_lattice("z", z, tau)
    rf = float(r)
    n = _range(tau, rf, z)
    eta6 = theta_numeric("eta", tau) ** 6
    lw = TWO_PI_I * tau * (n * n - rf * n)
    lx = TWO_PI_I * (z + n * tau)
    total = _pole_sum(lw, lx, 1, 2 * n - rf - 1) + _pole_sum(lw, lx, 2)
    lhs = cmath.exp(TWO_PI_I * rf * z) / jacobi_theta(z, tau) ** 2
    return lhs, -total / eta6


def _theta_triple(z: complex, w: Any, tau: complex, r: Fraction) -> tuple[complex, complex]:
    _require_half_integer(r, "theta_triple")
    w1, w2 = _pair(w, "theta_triple")
    for label, x in (("w1", w1), ("w2", w2), ("w1 - w2", w1 - w2), ("z", z), ("z + w1", z + w1), ("z + w2", z + w2)):
        _off_lattice(label, x, tau)
    rf = float(r)
    n = _range(tau, rf, z, w1, w2)
    eta3 = theta_numeric("eta", tau) ** 3
    th = jacobi_theta
    base = TWO_PI_I * tau * (1.5 * n * n - rf * n) + 1j * math.pi * n
    t1 = 1j / (eta3 * th(w1, tau) * th(w2, tau)) * _pole_sum(
        base - TWO_PI_I * n * (w1 + w2), TWO_PI_I * (z + n * tau), 1
    )
    t2 = 1j * cmath.exp(-TWO_PI_I * rf * w1) / (eta3 * th(w1, tau) * th(w1 - w2, tau)) * _pole_sum(
        base - TWO_PI_I * n * (w2 - 2 * w1), TWO_PI_I * (z + w1 + n * tau), 1
    )
    t3 = 1j * cmath.exp(-TWO_PI_I * rf * w2) / (eta3 * th(w2, tau) * th(w2 - w1, tau)) * _pole_sum(
        base - TWO_PI_I * n * (w1 - 2 * w2), TWO_PI_I * (z + w2 + n * tau), 1
    )
    lhs = cmath.exp(TWO_PI_I * rf * z) / (th(z, tau) * th(z + w1, tau) * th(z + w2, tau))
    return lhs, t1 + t2 + t3


def _theta_triple_doubled(z: complex, w: Any, tau: complex, r: Fraction) -> tuple[complex, complex]:
    _require_integer(r, "theta_triple_doubled")
    w1, w2 = _pair(w, "theta_triple_doubled")
    _off_lattice("w1", w1, tau, 2)
    _off_lattice("w2", w2, tau, 2)
    _off_lattice("z", z, tau, 2)
    for label, x in (("w1 - w2", w1 - w2), ("z + w1", z + w1), ("z + w2", z + w2)):
        _off_lattice(label, x, tau)
    rf = float(r)
    n = _range(tau, rf, z, w1, w2)
    eta3 = theta_numeric("eta", tau) ** 3
    th = jacobi_theta
    quad = TWO_PI_I * tau * (3 * n * n - rf * n)
    t1 = 1j * cmath.exp(-TWO_PI_I * rf * w1) / (eta3 * th(2 * w1, tau) * th(w1 - w2, tau)) * _pole_sum(
        quad + TWO_PI_I * n * (5 * w1 - w2), TWO_PI_I * (z + w1 + n * tau), 1
    )
    t2 = 1j * cmath.exp(-TWO_PI_I * rf * w2) / (eta3 * th(2 * w2, tau) * th(w2 - w1, tau)) * _pole_sum(
        quad + TWO_PI_I * n * (5 * w2 - w1), TWO_PI_I * (z + w2 + n * tau), 1
    )
    t3 = 0j
    for l1 in (0, 1):
        for l2 in (0, 1):
            shift = (l1 * tau + l2) / 2
            sign = -1 if (l1 + l2 + int(r) * l2) % 2 else 1
            pref = sign * cmath.exp(TWO_PI_I * tau * l1 * (l1 + rf) / 2)
            pref /= th(w1 + shift, tau) * th(w2 + shift, tau)
            lw = TWO_PI_I * tau * (3 * n * n - (3 * l1 + rf) * n) - TWO_PI_I * n * (w1 + w2)
            lx = TWO_PI_I * (z + (n - l1 / 2) * tau) + 1j * math.pi * l2
            t3 += pref * _pole_sum(lw, lx, 1)
    t3 *= 1j / (2 * eta3)
    lhs = cmath.exp(TWO_PI_I * rf * z) / (th(2 * z, tau) * th(z + w1, tau) * th(z + w2, tau))
    return lhs, t1 + t2 + t3


def _theta_cube(z: complex, w: Any, tau: complex, r: Fraction) -> tuple[complex, complex]:
    _require_half_integer(r, "theta_cube")
    _off_lattice("z", z, tau)
    rf = float(r)
    n = _range(tau, rf, z)
    eta = theta_numeric("eta", tau)
    e2 = eisenstein_e2(tau)
    lw = TWO_PI_I * tau * (1.5 * n * n - rf * n) + 1j * math.pi * n
    lx = TWO_PI_I * (z + n * tau)
    total = (
        _pole_sum(lw, lx, 1, (4 * (3 * n - rf - 1) ** 2 - e2) / 8)
        + _pole_sum(lw, lx, 2, (6 * n - 2 * rf - 3) / 2)
        + _pole_sum(lw, lx, 3)
    )
    lhs = cmath.exp(TWO_PI_I * rf * z) / jacobi_theta(z, tau) ** 3
    return lhs, -1j / eta**9 * total


def _theta_square_doubled(z: complex, w: Any, tau: complex, r: Fraction) -> tuple[complex, complex]:
    _require_integer(r, "theta_square_doubled")
    _off_lattice("z", z, tau, 2)
    rf = float(r)
    n = _range(tau, rf, z)
    eta = theta_numeric("eta", tau)
    e2 = eisenstein_e2(tau)
    lw = TWO_PI_I * tau * (3 * n * n - rf * n)
    lx = TWO_PI_I * (z + n * tau)
    total = (
        _pole_sum(lw, lx, 1, (2 * (6 * n - rf - 1) ** 2 - e2) / 8)
        + _pole_sum(lw, lx, 2, (12 * n - 2 * rf - 3) / 4)
        + _pole_sum(lw, lx, 3, np.full(n.shape, 0.5))
    )
    torsion = 0j
    for l1, l2 in ((0, 1), (1, 0), (1, 1)):
        sign = -1 if (l1 + l2 + int(r) * l2) % 2 else 1
        theta_l = jacobi_theta((l1 * tau + l2) / 2, tau)
        lw_l = lw + TWO_PI_I * tau * (l1 * (l1 - rf) / 2 + 3 * l1 * n)
        lx_l = TWO_PI_I * (z + (n + l1 / 2) * tau) + 1j * math.pi * l2
        torsion += sign / theta_l**2 * _pole_sum(lw_l, lx_l, 1)
    total -= eta**6 / 2 * torsion
    lhs = cmath.exp(TWO_PI_I * rf * z) / (jacobi_theta(z, tau) ** 2 * jacobi_theta(2 * z, tau))
    return lhs, -1j / eta**9 * total


LEMMA_IDENTITIES: dict[str, Callable[[complex, Any, complex, Fraction], tuple[complex, complex]]] = {
    "theta_pair": _theta_pair,
    "theta_square": _theta_square,
    "theta_triple": _theta_triple,
    "theta_triple_doubled": _theta_triple_doubled,
    "theta_cube": _theta_cube,
    "theta_square_doubled": _theta_square_doubled,
}


def lemma_residual(
    identity: str,
    z: complex,
    tau: complex,
    r: Rational,
    w: complex | tuple[complex, complex] | None = None,
) -> float:
    """|lhs - rhs| of a partial-fraction expansion of a theta quotient at (z, w, tau)."""
    if identity not in LEMMA_IDENTITIES:
        known = ", ".join(sorted(LEMMA_IDENTITIES))
        raise UsageError(f"unknown identity {identity!r}; known: {known}")
    if tau.imag <= 0:
        raise NonconvergentEvaluation(f"tau must lie in the upper half-plane, got {tau}")
    lhs, rhs = LEMMA_IDENTITIES[identity](complex(z), w, complex(tau), F(r))
    logger.debug("%s: lhs %s rhs %s", identity, lhs, rhs)
    return abs(lhs - rhs)


def evaluate_series(
    name: str,
    params: dict[str, Any] | None,
    tau: complex,
    tolerance: float = 1e-12,
    extended: bool = False,
) -> NumericValue:
    """Value of a registry series at tau, expanded far enough for the tail to fall below tolerance."""
    from false_theta.registry import build_series

    if tau.imag <= 0:
        raise NonconvergentEvaluation(f"q-series evaluation needs Im(tau) > 0, got {tau}")
    prec = math.ceil(math.log(1 / tolerance) / (2 * math.pi * tau.imag)) + 2
    series = build_series(name, params or {}, prec)
    result = eval_numeric(series, tau, extended=extended)
    details = {"precision": str(series.precision), "terms": len(series.coeffs)}
    return NumericValue(result.value, result.error, details)


def sign_lemma_grid(
    tau: complex = 1j,
    cfg: QuadratureConfig | None = None,
    l1_values: Sequence[float] = (0.0, 1.0, -0.5),
    l2_values: Sequence[float] = (1.0, 0.5, -0.75),
    kappas: Sequence[float] = (0.0, 1.0 / 3.0, -2.0),
    tolerance: float = 1e-8,
) -> VerificationReport:
    """Sign lemma residuals on the product grid l1 x l2 x kappa."""
    started = time.perf_counter()
    worst = 0.0
    rows = []
    for l1 in l1_values:
        for l2 in l2_values:
            for kappa in kappas:
                residual = sign_lemma_residual(l1, l2, kappa, tau, cfg)
                worst = max(worst, residual)
                rows.append([l1, l2, kappa, residual])
    return VerificationReport(
        name="signlemma",
        status=CheckStatus.PASS if worst < tolerance else CheckStatus.FAIL,
        residual=worst,
        tolerance=tolerance,
        elapsed=time.perf_counter() - started,
        details={"tau": [tau.real, tau.imag], "grid": rows},
    )


# (z, w1, w2, tau) samples away from every excluded lattice
LEMMA_POINTS = (
    (0.21 + 0.3j, 0.37 + 0.41j, -0.18 + 0.23j, 2j),
    (0.13 + 0.27j, -0.29 + 0.55j, 0.44 + 0.12j, 0.1 + 1.3j),
)

_LEMMA_ARGUMENTS: dict[str, tuple[str, tuple[Fraction, ...]]] = {
    "theta_pair": ("single", (F(0), F(1))),
    "theta_square": ("none", (F(0), F(-1))),
    "theta_triple": ("pair", (F(1, 2), F(-1, 2))),
    "theta_triple_doubled": ("pair", (F(0), F(1))),
    "theta_cube": ("none", (F(1, 2), F(3, 2))),
    "theta_square_doubled": ("none", (F(0), F(1))),
}


def lemma_suite(tolerance: float = 1e-8) -> VerificationReport:
    """Every partial-fraction identity at the sample points, relative to the size of its left side."""
    started = time.perf_counter()
    worst = 0.0
    rows = []
    for identity, (shape, rs) in _LEMMA_ARGUMENTS.items():
        for (z, w1, w2, tau), r in zip(LEMMA_POINTS, rs, strict=True):
            w: Any = None
            if shape == "single":
                w = w1
            elif shape == "pair":
                w = (w1, w2)
            lhs, rhs = LEMMA_IDENTITIES[identity](z, w, tau, r)
            relative = abs(lhs - rhs) / max(1.0, abs(lhs))
            worst = max(worst, relative)
            rows.append([identity, str(r), relative])
    return VerificationReport(
        name="lemmas",
        status=CheckStatus.PASS if worst < tolerance else CheckStatus.FAIL,
        residual=worst,
        tolerance=tolerance,
        elapsed=time.perf_counter() - started,
        details={"checks": rows},
    )


def rank_two_examples() -> list[FalseThetaSpec]:
    """A generic shifted sum and the alternating variant whose theta part vanishes."""
    return [
        FalseThetaSpec(gram=((F(2), F(1)), (F(1), F(3))), shift=(F(1, 5), F(2, 7))),
        FalseThetaSpec(gram=((F(1), F(1)), (F(1), F(4))), shift=(F(0), F(1, 2)), parity=(1, 0)),
    ]


def rank_two_suite(tau: complex = 1j, cfg: QuadratureConfig | None = None) -> VerificationReport:
    started = time.perf_counter()
    reports = [rank_two_residual(spec, tau, cfg) for spec in rank_two_examples()]
    worst = max(r.residual or 0.0 for r in reports)
    return VerificationReport(
        name="rank2",
        status=CheckStatus.PASS if all(r.passed for r in reports) else CheckStatus.FAIL,
        residual=worst,
        tolerance=max(r.tolerance or 0.0 for r in reports),
        elapsed=time.perf_counter() - started,
        details={"residuals": [r.residual for r in reports]},
    )
