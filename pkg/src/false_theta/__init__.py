"""Exact and numeric rank one and rank two false theta functions.

This is the package facade: the public symbols are re-exported here, but the
implementation lives in focused submodules:

- qseries.py: QExpansion arithmetic with exact rational coefficients
- special.py: eta, E2, unary and torsion theta functions, Serre derivative
- lattice.py: rank one and rank two false theta lattice sums
- jacobi_ct.py: constant terms of Jacobi forms and the A2/B2 decompositions
- eichler.py: numeric theta values, double-integral completions, modular residuals
- invariants.py: plumbing graphs, homological blocks, quadrant sums, F_k checks
- registry.py: named-series registry and named identity checks
- records.py: JSON records for series, reports and numeric values
- display.py: Rich-based rendering
- cli.py: Argument parsing and main() entry point
- mcp_server.py: MCP server for code agent integration
- types.py: Shared data types and the error hierarchy

Usage:
    false-theta expand --series A2char -N 9
    false-theta verify --which B2 -N 12
    false-theta eval --completion psi --tau 2i

Update this docstring if you add new submodules or change the public API surface.
"""

from __future__ import annotations

from false_theta.cli import __version__, dispatch, main
from false_theta.eichler import (
    completion,
    eta_multiplier,
    lemma_residual,
    modular_residual,
    regularized_inner,
    sign_lemma_residual,
    theta_numeric,
)
from false_theta.invariants import (
    fk_identity_suite,
    fsqe_series,
    linking_matrix,
    load_fsqe,
    load_graph,
    verify_fsqe_integral,
    zhat_series,
)
from false_theta.jacobi_ct import (
    LaurentBlock,
    coeff_C,
    coeff_D,
    inv_pochhammer,
    product_ct,
    tk_coefficient,
    verify_decomposition,
)
from false_theta.lattice import builtin, false_theta_sum, one_dim_sum
from false_theta.qseries import (
    QExpansion,
    arith,
    eval_numeric,
    first_mismatch,
    invert,
    q_derivative,
    substitute_power,
)
from false_theta.records import qexpansion_from_dict, qexpansion_to_dict
from false_theta.registry import build_series, list_series, run_check
from false_theta.special import (
    e2_series,
    eta_series,
    serre_derivative,
    theta_torsion_series,
    theta_unary_series,
)
from false_theta.types import (
    BranchCrossing,
    CheckStatus,
    ClassVectorMismatch,
    ClosureViolation,
    EtaMultiplierState,
    FalseThetaError,
    FalseThetaSpec,
    FsqeSpec,
    IncompatibleLattices,
    InvalidTorsionPoint,
    LinkingMatrix,
    MalformedParams,
    NonconvergentEvaluation,
    NonpositiveOffset,
    NotATree,
    NotPositiveDefinite,
    NotPositiveDefiniteQ,
    NotUnimodular,
    NumericValue,
    OneDimFalseSpec,
    PlumbingGraph,
    PolePoint,
    PrecisionMode,
    QuadraticConvention,
    QuadratureConfig,
    RunConfig,
    SignPair,
    TruncationRequired,
    UnaryThetaSpec,
    UnknownSeries,
    UsageError,
    VerificationReport,
    ZeroLeadingCoefficient,
)

__all__ = [
    # Data classes
    "QExpansion",
    "LaurentBlock",
    "UnaryThetaSpec",
    "OneDimFalseSpec",
    "SignPair",
    "FalseThetaSpec",
    "QuadraticConvention",
    "QuadratureConfig",
    "NumericValue",
    "EtaMultiplierState",
    "PlumbingGraph",
    "LinkingMatrix",
    "FsqeSpec",
    "VerificationReport",
    "CheckStatus",
    "PrecisionMode",
    "RunConfig",
    # Errors
    "FalseThetaError",
    "ZeroLeadingCoefficient",
    "TruncationRequired",
    "NonconvergentEvaluation",
    "BranchCrossing",
    "InvalidTorsionPoint",
    "UnknownSeries",
    "MalformedParams",
    "NonpositiveOffset",
    "IncompatibleLattices",
    "NotUnimodular",
    "PolePoint",
    "NotATree",
    "NotPositiveDefinite",
    "NotPositiveDefiniteQ",
    "ClassVectorMismatch",
    "ClosureViolation",
    "UsageError",
    # q-series
    "arith",
    "invert",
    "substitute_power",
    "q_derivative",
    "eval_numeric",
    "first_mismatch",
    # Special functions
    "eta_series",
    "e2_series",
    "theta_unary_series",
    "theta_torsion_series",
    "serre_derivative",
    # Lattice sums
    "false_theta_sum",
    "one_dim_sum",
    "builtin",
    # Constant terms
    "inv_pochhammer",
    "product_ct",
    "coeff_D",
    "coeff_C",
    "verify_decomposition",
    "tk_coefficient",
    # Numeric completions
    "theta_numeric",
    "sign_lemma_residual",
    "regularized_inner",
    "completion",
    "eta_multiplier",
    "modular_residual",
    "lemma_residual",
    # Invariants
    "load_graph",
    "load_fsqe",
    "linking_matrix",
    "zhat_series",
    "fsqe_series",
    "verify_fsqe_integral",
    "fk_identity_suite",
    # Registry and records
    "build_series",
    "list_series",
    "run_check",
    "qexpansion_to_dict",
    "qexpansion_from_dict",
    # CLI
    "main",
    "dispatch",
    "__version__",
]
