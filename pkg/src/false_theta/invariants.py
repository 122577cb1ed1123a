"""Homological blocks of plumbed 3-manifolds and the Schur-index series F_k.

Key functions:
- load_graph(), load_fsqe(): read the JSON input files
- linking_matrix(): the matrix M of a plumbing tree, with exact flags
- zhat_series(): the homological block by two independent enumerations
- zhat_compare(): agreement report of the two enumerations
- validate_fsqe(), fsqe_series(), fsqe_symmetrized(): sums over shifted positive quadrants
- verify_fsqe_symmetrized(), verify_fsqe_integral(): exact and numeric checks of those sums
- verify_k1_theta_identity(), verify_fk_constant_term(), fk_identity_suite(): F_k identities

Update this docstring if you add new invariants or checks.
"""

from __future__ import annotations

import itertools
import json
import logging
import math
import time
from collections.abc import Iterator, Sequence
from fractions import Fraction
from functools import lru_cache
from pathlib import Path
from typing import Any

import numpy as np
import sympy

from false_theta.lattice import enumerate_quadratic, false_theta_sum, fk_series
from false_theta.qseries import QExpansion, eval_numeric, first_mismatch, from_terms, substitute_power
from false_theta.special import eta_cubed_series, theta_unary_series
from false_theta.types import (
    CheckStatus,
    ClassVectorMismatch,
    ClosureViolation,
    FalseThetaSpec,
    FsqeSpec,
    LinkingMatrix,
    MalformedParams,
    NotATree,
    NotPositiveDefinite,
    NotPositiveDefiniteQ,
    PlumbingGraph,
    QuadraticConvention,
    QuadratureConfig,
    Rational,
    SignPair,
    UnaryThetaSpec,
    VerificationReport,
)

logger = logging.getLogger(__name__)

F = Fraction
PIPELINES = ("theta", "support")


def _read_json(path: str | Path) -> Any:
    try:
        return json.loads(Path(path).read_text())
    except FileNotFoundError as exc:
        raise MalformedParams(f"input file not found: {path}") from exc
    except json.JSONDecodeError as exc:
        raise MalformedParams(f"{path}: invalid JSON ({exc.msg} at line {exc.lineno})") from exc


def graph_from_dict(data: dict[str, Any]) -> PlumbingGraph:
    try:
        weights = {int(v["id"]): int(v["weight"]) for v in data["vertices"]}
        edges = [(int(a), int(b)) for a, b in data.get("edges", [])]
    except (KeyError, TypeError, ValueError) as exc:
        raise MalformedParams(f"plumbing graph: expected vertices with id and weight ({exc})") from exc
    if len(weights) != len(data["vertices"]):
        raise MalformedParams("plumbing graph: duplicate vertex ids")
    return PlumbingGraph(weights, edges)


def load_graph(path: str | Path) -> PlumbingGraph:
    """Read {"vertices": [{"id", "weight"}], "edges": [[id, id]]}."""
    return graph_from_dict(_read_json(path))


def fsqe_from_dict(data: dict[str, Any]) -> FsqeSpec:
    try:
        sigma = tuple(int(s) for s in data["sigma"])
        shifts = [(F(a), F(b)) for a, b in data.get("S", [])]
        signs = [int(e) for e in data.get("eps", [])]
        spec = FsqeSpec(sigma, int(data["K"]), shifts, signs)  # type: ignore[arg-type]
    except (KeyError, TypeError, ValueError, ZeroDivisionError) as exc:
        raise MalformedParams(f"quadrant sum spec: expected sigma, K, S and eps ({exc})") from exc
    if len(sigma) != 3:
        raise MalformedParams(f"sigma must have three entries, got {len(sigma)}")
    if len(shifts) != len(signs):
        raise MalformedParams(f"S has {len(shifts)} shifts but eps has {len(signs)} signs")
    if any(e not in (-1, 1) for e in signs):
        raise MalformedParams("eps entries must be +1 or -1")
    return spec


def load_fsqe(path: str | Path) -> FsqeSpec:
    """Read {"sigma": [s1, s2, s3], "K": int, "S": [["p/q", "p/q"], ...], "eps": [+-1, ...]}."""
    return fsqe_from_dict(_read_json(path))


def _check_tree(g: PlumbingGraph) -> None:
    vertices = set(g.weights)
    if not vertices:
        raise NotATree("plumbing graph has no vertices")
    seen: set[frozenset[int]] = set()
    for u, v in g.edges:
        if u not in vertices or v not in vertices:
            raise NotATree(f"edge ({u}, {v}) uses an unknown vertex")
        if u == v:
            raise NotATree(f"edge ({u}, {v}) is a loop")
        key = frozenset((u, v))
        if key in seen:
            raise NotATree(f"edge ({u}, {v}) appears twice")
        seen.add(key)
    if len(g.edges) != len(vertices) - 1:
        raise NotATree(f"{len(vertices)} vertices need {len(vertices) - 1} edges, got {len(g.edges)}")
    adjacency: dict[int, list[int]] = {v: [] for v in vertices}
    for u, v in g.edges:
        adjacency[u].append(v)
        adjacency[v].append(u)
    start = min(vertices)
    stack, reached = [start], {start}
    while stack:
        for nxt in adjacency[stack.pop()]:
            if nxt not in reached:
                reached.add(nxt)
                stack.append(nxt)
    if reached != vertices:
        raise NotATree("plumbing graph is not connected")


def linking_matrix(g: PlumbingGraph) -> LinkingMatrix:
    """Weights on the diagonal, -1 for each edge; flags from exact leading minors."""
    _check_tree(g)
    order = g.vertices
    index = {v: i for i, v in enumerate(order)}
    size = len(order)
    entries = [[0] * size for _ in range(size)]
    for v in order:
        entries[index[v]][index[v]] = g.weights[v]
    for u, v in g.edges:
        entries[index[u]][index[v]] = -1
        entries[index[v]][index[u]] = -1
    matrix = sympy.Matrix(entries)
    minors = [matrix[:k, :k].det() for k in range(1, size + 1)]
    return LinkingMatrix(
        entries=tuple(tuple(row) for row in entries),
        determinant=int(minors[-1]),
        positive_definite=all(m > 0 for m in minors),
    )


def _pv_coefficient(degree: int, k: int) -> Fraction:
    """Coefficient of w^k in the principal-value expansion of (w - 1/w)^(2 - degree)."""
    p = 2 - degree
    if p >= 0:
        # binomial expansion of (w - w^-1)^p
        if (k + p) % 2 or abs(k) > p:
            return F(0)
        j = (p - k) // 2
        return F((-1) ** j * math.comb(p, j))
    d = -p
    if (k - d) % 2:
        return F(0)
    if k <= -d:
        # |w| > 1: w^-d (1 - w^-2)^-d
        j = (-k - d) // 2
        return F(math.comb(d + j - 1, j), 2)
    if k >= d:
        # |w| < 1: (-1)^d w^d (1 - w^2)^-d
        j = (k - d) // 2
        return F((-1) ** d * math.comb(d + j - 1, j), 2)
    return F(0)


def _support(degree: int, radius: int) -> list[int]:
    """Exponents k with |k| <= radius and a nonzero principal-value coefficient."""
    return [k for k in range(-radius, radius + 1) if _pv_coefficient(degree, k)]


@lru_cache(maxsize=64)
def _inverse(entries: tuple[tuple[int, ...], ...]) -> tuple[tuple[Fraction, ...], ...]:
    inv = sympy.Matrix(entries).inv()
    return tuple(
        tuple(F(int(sympy.fraction(x)[0]), int(sympy.fraction(x)[1])) for x in inv.row(i))
        for i in range(inv.rows)
    )


def _quadratic(inv: Sequence[Sequence[Fraction]], ell: Sequence[int]) -> Fraction:
    size = len(ell)
    return sum((inv[i][j] * ell[i] * ell[j] for i in range(size) for j in range(size)), F(0)) / 4


def _class_vector(g: PlumbingGraph, lm: LinkingMatrix, a: Sequence[int] | None) -> tuple[int, ...]:
    delta = g.delta
    if a is None:
        if not lm.unimodular:
            raise ClassVectorMismatch(
                f"linking matrix has determinant {lm.determinant}; give the class vector a explicitly"
            )
        return delta
    vec = tuple(int(x) for x in a)
    if len(vec) != lm.size:
        raise ClassVectorMismatch(f"class vector has {len(vec)} entries, graph has {lm.size} vertices")
    if any((x - d) % 2 for x, d in zip(vec, delta, strict=True)):
        raise ClassVectorMismatch(f"class vector {vec} is not congruent to delta = {delta} mod 2")
    return vec


def _theta_pipeline(
    degrees: Sequence[int], lm: LinkingMatrix, a: Sequence[int], room: Fraction
) -> Iterator[tuple[Fraction, Fraction]]:
    """Enumerate x in Z^N with l = 2 M x + a, exponent x^T M x + a.x + a^T M^-1 a / 4."""
    M = lm.entries
    inv = _inverse(M)
    const = _quadratic(inv, a)
    for x in enumerate_quadratic(M, a, const, room):
        ell = [2 * sum(M[i][j] * x[j] for j in range(lm.size)) + a[i] for i in range(lm.size)]
        weight = F(1)
        for d, l in zip(degrees, ell, strict=True):
            weight *= _pv_coefficient(d, -l)
            if not weight:
                break
        if weight:
            yield _quadratic(inv, ell), weight


def _support_pipeline(
    degrees: Sequence[int], lm: LinkingMatrix, a: Sequence[int], room: Fraction
) -> Iterator[tuple[Fraction, Fraction]]:
    """Enumerate l from the per-vertex supports and keep those in 2 M Z^N + a."""
    inv = _inverse(lm.entries)
    # l^T M^-1 l / 4 >= |l|^2 / (4 lambda_max(M))
    lam_max = float(np.max(np.linalg.eigvalsh(np.array(lm.entries, dtype=float))))
    radius = math.isqrt(math.ceil(4 * float(room) * lam_max)) + 1
    supports = [[-k for k in _support(d, radius)] for d in degrees]
    for ell in itertools.product(*supports):
        diff = [ell[i] - a[i] for i in range(lm.size)]
        # l - a must lie in 2 M Z^N, i.e. M^-1 (l - a) / 2 is integral
        if any(
            (sum((inv[i][j] * diff[j] for j in range(lm.size)), F(0)) / 2).denominator != 1
            for i in range(lm.size)
        ):
            continue
        e = _quadratic(inv, ell)
        if e >= room:
            continue
        weight = F(1)
        for d, l in zip(degrees, ell, strict=True):
            weight *= _pv_coefficient(d, -l)
        if weight:
            yield e, weight


def zhat_series(
    g: PlumbingGraph,
    a: Sequence[int] | None,
    prec: Rational,
    pipeline: str = "theta",
) -> QExpansion:
    """Homological block q^((-3N + tr M)/4) CT_w [Theta_{-M,a}(q; w) prod (w_v - 1/w_v)^(2 - deg v)].

    a=None selects the single class delta of a unimodular graph.
    """
    if pipeline not in PIPELINES:
        raise MalformedParams(f"unknown pipeline {pipeline!r}; expected one of {PIPELINES}")
    lm = linking_matrix(g)
    if not lm.positive_definite:
        raise NotPositiveDefinite(f"linking matrix {lm.entries} is not positive definite")
    vec = _class_vector(g, lm, a)
    p = F(prec)
    trace = sum(lm.entries[i][i] for i in range(lm.size))
    prefactor = F(-3 * lm.size + trace, 4)
    degrees = [g.degrees[v] for v in g.vertices]
    room = p - prefactor
    enumerate_terms = _theta_pipeline if pipeline == "theta" else _support_pipeline
    terms: dict[Fraction, Fraction] = {}
    count = 0
    for e, weight in enumerate_terms(degrees, lm, vec, room):
        count += 1
        key = e + prefactor
        terms[key] = terms.get(key, F(0)) + weight
    logger.debug("zhat (%s pipeline): %d contributing vectors below q^%s", pipeline, count, p)
    return from_terms(terms, p)


def zhat_compare(g: PlumbingGraph, prec: Rational, a: Sequence[int] | None = None) -> VerificationReport:
    """Agreement of the theta and support enumerations."""
    started = time.perf_counter()
    p = F(prec)
    lm = linking_matrix(g)
    by_theta = zhat_series(g, a, p, "theta")
    by_support = zhat_series(g, a, p, "support")
    first = first_mismatch(by_theta, by_support)
    return VerificationReport(
        name="zhat",
        status=CheckStatus.PASS if first is None else CheckStatus.FAIL,
        order=p,
        first_mismatch=first,
        elapsed=time.perf_counter() - started,
        details={
            "determinant": lm.determinant,
            "positive_definite": lm.positive_definite,
            "degrees": [g.degrees[v] for v in g.vertices],
            "series": {str(e): str(c) for e, c in by_theta.items()},
        },
    )


def validate_fsqe(spec: FsqeSpec) -> None:
    """Positive definite Q, shifts in (0, 1)^2 with K S integral, and the reflection closure of S and eps."""
    s1, _, _ = spec.sigma
    if s1 <= 0 or spec.discriminant <= 0:
        raise NotPositiveDefiniteQ(
            f"sigma = {spec.sigma} has D = {spec.discriminant}; need sigma1 > 0 and D > 0"
        )
    if spec.scale <= 0:
        raise MalformedParams(f"K must be a positive integer, got {spec.scale}")
    signs = spec.sign_map()
    if len(signs) != len(spec.shifts):
        raise ClosureViolation("S contains repeated shifts")
    one = F(1)
    for alpha, eps in signs.items():
        if not all(0 < x < 1 for x in alpha):
            raise MalformedParams(f"shift {alpha} must lie in (0, 1)^2")
        if any((spec.scale * x).denominator != 1 for x in alpha):
            raise MalformedParams(f"K = {spec.scale} does not clear the denominators of {alpha}")
        for image in ((one - alpha[0], one - alpha[1]), (one - alpha[0], alpha[1])):
            if image not in signs:
                raise ClosureViolation(f"S contains {alpha} but not {image}")
            if signs[image] != eps:
                raise ClosureViolation(f"eps differs on {alpha} and {image}")
    minimal = math.lcm(1, *(x.denominator for alpha in spec.shifts for x in alpha))
    if spec.scale != minimal:
        logger.warning("K = %d is not minimal; %d already clears the shifts", spec.scale, minimal)


def fsqe_series(spec: FsqeSpec, prec: Rational) -> QExpansion:
    """sum over alpha in S of eps(alpha) sum over n in N_0^2 of q^(K Q(n + alpha))."""
    validate_fsqe(spec)
    p = F(prec)
    s1, s2, s3 = spec.sigma
    K = spec.scale
    A = [[K * s1, K * s2], [K * s2, K * s3]]
    terms: dict[Fraction, Fraction] = {}
    for (a1, a2), eps in spec.sign_map().items():
        b = [2 * K * (s1 * a1 + s2 * a2), 2 * K * (s2 * a1 + s3 * a2)]
        c = K * (s1 * a1 * a1 + 2 * s2 * a1 * a2 + s3 * a2 * a2)
        for x1, x2 in enumerate_quadratic(A, b, c, p):
            if x1 < 0 or x2 < 0:
                continue
            n1, n2 = x1 + a1, x2 + a2
            e = K * (s1 * n1 * n1 + 2 * s2 * n1 * n2 + s3 * n2 * n2)
            terms[e] = terms.get(e, F(0)) + eps
    return from_terms(terms, p)


def fsqe_symmetrized(spec: FsqeSpec, prec: Rational) -> QExpansion:
    """(1/4) sum eps(alpha) sum over Z^2 + alpha of sgn(n1) (sgn(n1) + sgn(n2)) q^(K Q(n))."""
    validate_fsqe(spec)
    p = F(prec)
    s1, s2, s3 = spec.sigma
    quarter = F(1, 4)
    signs = [
        SignPair((F(1), F(0)), (F(1), F(0)), quarter),
        SignPair((F(1), F(0)), (F(0), F(1)), quarter),
    ]
    terms: dict[Fraction, Fraction] = {}
    for alpha, eps in spec.sign_map().items():
        lattice_spec = FalseThetaSpec(
            gram=((F(s1), F(s2)), (F(s2), F(s3))),
            shift=alpha,
            signs=signs,
            scale=F(spec.scale),
            convention=QuadraticConvention.FULL,
        )
        for e, c in false_theta_sum(lattice_spec, p).items():
            terms[e] = terms.get(e, F(0)) + eps * c
    return from_terms(terms, p)


def verify_fsqe_symmetrized(spec: FsqeSpec, prec: Rational) -> VerificationReport:
    started = time.perf_counter()
    p = F(prec)
    direct = fsqe_series(spec, p)
    symmetric = fsqe_symmetrized(spec, p)
    first = first_mismatch(direct, symmetric)
    return VerificationReport(
        name="fsqe-symmetrized",
        status=CheckStatus.PASS if first is None else CheckStatus.FAIL,
        order=p,
        first_mismatch=first,
        elapsed=time.perf_counter() - started,
        details={"series": {str(e): str(c) for e, c in direct.items()}},
    )


def verify_fsqe_integral(
    spec: FsqeSpec,
    tau: complex,
    cfg: QuadratureConfig | None = None,
    tolerance: float = 1e-6,
) -> VerificationReport:
    """Series value against the double-integral plus arctan-weighted theta representation."""
    from false_theta.eichler import completion

    started = time.perf_counter()
    cfg = cfg or QuadratureConfig()
    validate_fsqe(spec)
    prec = math.ceil(math.log(1e3 / cfg.tolerance) / (2 * math.pi * tau.imag)) + 2
    series = eval_numeric(fsqe_series(spec, prec), tau)
    integral = completion("fsqe", tau, None, cfg, fsqe=spec)
    residual = abs(series.value - integral.value)
    return VerificationReport(
        name="fsqe-integral",
        status=CheckStatus.PASS if residual < tolerance else CheckStatus.FAIL,
        residual=residual,
        tolerance=tolerance,
        elapsed=time.perf_counter() - started,
        details={
            "series": [series.value.real, series.value.imag],
            "integral": [integral.value.real, integral.value.imag],
            "error_estimate": integral.error + series.error,
        },
    )


def _outer_product(
    left: QExpansion, right: QExpansion, prec: Fraction, factor: Fraction = F(1)
) -> dict[tuple[Fraction, Fraction], Fraction]:
    return {
        (e1, e2): factor * c1 * c2
        for e1, c1 in left.items()
        if e1 < prec
        for e2, c2 in right.items()
        if e2 < prec
    }


def verify_k1_theta_identity(prec: Rational) -> VerificationReport:
    """sum_j (-1)^j theta^[1]_{2,j}(3 w1) theta^[1]_{2,j+2}(w2) = eta(3 w1)^3 eta(w2)^3 / 8.

    Both sides are compared as series in q1 = e(w1), q2 = e(w2), each below prec.
    """
    started = time.perf_counter()
    p = F(prec)
    inner_prec = p / 3 + 1
    lhs: dict[tuple[Fraction, Fraction], Fraction] = {}
    for j in range(4):
        outer = substitute_power(theta_unary_series(UnaryThetaSpec(F(2), j, 1), inner_prec), 3)
        inner = theta_unary_series(UnaryThetaSpec(F(2), j + 2, 1), p)
        for key, c in _outer_product(outer, inner, p, F((-1) ** j)).items():
            lhs[key] = lhs.get(key, F(0)) + c
    rhs = _outer_product(
        substitute_power(eta_cubed_series(inner_prec), 3), eta_cubed_series(p), p, F(1, 8)
    )
    keys = {k for k in set(lhs) | set(rhs) if lhs.get(k, 0) != rhs.get(k, 0)}
    first = min((max(k) for k in keys), default=None)
    return VerificationReport(
        name="k1theta",
        status=CheckStatus.PASS if first is None else CheckStatus.FAIL,
        order=p,
        first_mismatch=first,
        elapsed=time.perf_counter() - started,
        details={"terms": sum(1 for c in rhs.values() if c)},
    )


def verify_fk_constant_term(k: int, prec: Rational) -> VerificationReport:
    """The zeroth Fourier coefficient of the Schur-index Jacobi form against F_k."""
    from false_theta.jacobi_ct import tk_coefficient

    started = time.perf_counter()
    p = F(prec)
    first = first_mismatch(tk_coefficient(k, (0, 0), p), fk_series(k, p))
    return VerificationReport(
        name=f"Fk-constant-term(k={k})",
        status=CheckStatus.PASS if first is None else CheckStatus.FAIL,
        order=p,
        first_mismatch=first,
        elapsed=time.perf_counter() - started,
    )


def verify_fk_integral(
    k: int, tau: complex, cfg: QuadratureConfig | None = None, tolerance: float = 1e-6
) -> VerificationReport:
    from false_theta.eichler import completion

    started = time.perf_counter()
    cfg = cfg or QuadratureConfig()
    prec = math.ceil(math.log(1e3 / cfg.tolerance) / (2 * math.pi * tau.imag)) + 2
    series = eval_numeric(fk_series(k, prec), tau)
    integral = completion("fk", tau, None, cfg, k=k)
    residual = abs(series.value - integral.value)
    return VerificationReport(
        name=f"Fk-integral(k={k})",
        status=CheckStatus.PASS if residual < tolerance else CheckStatus.FAIL,
        residual=residual,
        tolerance=tolerance,
        elapsed=time.perf_counter() - started,
        details={"series": [series.value.real, series.value.imag], "integral": [integral.value.real, integral.value.imag]},
    )


def fk_identity_suite(
    k: int, prec: Rational, tau: complex | None = 2j, cfg: QuadratureConfig | None = None
) -> VerificationReport:
    """Constant term, the k = 1 theta identity, and the integral form of F_k; tau=None skips the numeric part."""
    started = time.perf_counter()
    reports = [verify_fk_constant_term(k, prec)]
    if k == 1:
        reports.append(verify_k1_theta_identity(prec))
    if tau is not None:
        reports.append(verify_fk_integral(k, tau, cfg))
    mismatches = [r.first_mismatch for r in reports if r.first_mismatch is not None]
    residuals = [r.residual for r in reports if r.residual is not None]
    return VerificationReport(
        name=f"Fk(k={k})",
        status=CheckStatus.PASS if all(r.passed for r in reports) else CheckStatus.FAIL,
        order=F(prec),
        first_mismatch=min(mismatches) if mismatches else None,
        residual=max(residuals) if residuals else None,
        elapsed=time.perf_counter() - started,
        details={r.name: r.status.value for r in reports},
    )
