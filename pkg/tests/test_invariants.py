"""Tests for plumbing graphs, homological blocks and quadrant sums."""

from fractions import Fraction
from pathlib import Path

import pytest

from false_theta.invariants import (
    fk_identity_suite,
    fsqe_from_dict,
    fsqe_series,
    graph_from_dict,
    linking_matrix,
    load_fsqe,
    load_graph,
    validate_fsqe,
    verify_fk_constant_term,
    verify_fk_integral,
    verify_fsqe_integral,
    verify_fsqe_symmetrized,
    verify_k1_theta_identity,
    zhat_compare,
    zhat_series,
)
from false_theta.qseries import from_terms
from false_theta.types import (
    ClassVectorMismatch,
    ClosureViolation,
    FsqeSpec,
    MalformedParams,
    NotATree,
    NotPositiveDefinite,
    NotPositiveDefiniteQ,
    PlumbingGraph,
)

F = Fraction


class TestPlumbingGraph:
    """Tests for graph input and the linking matrix."""

    def test_star_linking_matrix(self, star_graph_path: Path) -> None:
        """Weights on the diagonal, -1 per edge, determinant 1."""
        lm = linking_matrix(load_graph(star_graph_path))
        assert lm.entries == (
            (1, -1, -1, -1),
            (-1, 2, 0, 0),
            (-1, 0, 3, 0),
            (-1, 0, 0, 7),
        )
        assert lm.determinant == 1
        assert lm.positive_definite
        assert lm.unimodular

    def test_h_graph_is_unimodular(self, h_graph_path: Path) -> None:
        """The H-shaped plumbing is positive definite with determinant 1."""
        lm = linking_matrix(load_graph(h_graph_path))
        assert lm.size == 6
        assert lm.determinant == 1
        assert lm.positive_definite

    def test_delta(self, star_graph_path: Path) -> None:
        """Every vertex of the star has odd degree."""
        assert load_graph(star_graph_path).delta == (1, 1, 1, 1)

    def test_cycle_is_not_a_tree(self) -> None:
        """Three vertices with three edges form a cycle."""
        g = PlumbingGraph({0: 1, 1: 1, 2: 1}, [(0, 1), (1, 2), (2, 0)])
        with pytest.raises(NotATree):
            linking_matrix(g)

    def test_repeated_edge_is_not_a_tree(self) -> None:
        """A doubled edge leaves a vertex unreachable."""
        g = PlumbingGraph({0: 1, 1: 1, 2: 1}, [(0, 1), (1, 0)])
        with pytest.raises(NotATree):
            linking_matrix(g)

    def test_unknown_vertex(self) -> None:
        """Edges must join known vertices."""
        with pytest.raises(NotATree):
            linking_matrix(PlumbingGraph({0: 1, 1: 1}, [(0, 5)]))

    def test_malformed_graph_dict(self) -> None:
        """Vertices need id and weight."""
        with pytest.raises(MalformedParams):
            graph_from_dict({"vertices": [{"id": 0}]})

    def test_missing_file(self, tmp_path: Path) -> None:
        """A missing input file is a parameter error."""
        with pytest.raises(MalformedParams):
            load_graph(tmp_path / "absent.json")

    def test_invalid_json(self, tmp_path: Path) -> None:
        """Unparseable input is a parameter error."""
        path = tmp_path / "graph.json"
        path.write_text("{not json")
        with pytest.raises(MalformedParams):
            load_graph(path)


class TestZhat:
    """Tests for homological blocks."""

    def test_pipelines_agree_on_star(self, star_graph_path: Path) -> None:
        """Theta and support enumerations give the same block."""
        report = zhat_compare(load_graph(star_graph_path), 20)
        assert report.passed, report.details
        assert report.details["degrees"] == [3, 1, 1, 1]

    def test_pipelines_agree_on_h_graph(self, h_graph_path: Path) -> None:
        """The same holds with two high-degree vertices."""
        assert zhat_compare(load_graph(h_graph_path), 20).passed

    def test_star_block_is_nonzero(self, star_graph_path: Path) -> None:
        """The (2, 3, 7) block has terms below q^12."""
        assert not zhat_series(load_graph(star_graph_path), None, 12).is_zero

    def test_relabelling_invariance(self, star_graph_path: Path) -> None:
        """Renumbering the vertices leaves the block unchanged."""
        relabelled = graph_from_dict(
            {
                "vertices": [
                    {"id": 0, "weight": 7},
                    {"id": 1, "weight": 3},
                    {"id": 2, "weight": 1},
                    {"id": 3, "weight": 2},
                ],
                "edges": [[2, 0], [2, 1], [2, 3]],
            }
        )
        original = zhat_series(load_graph(star_graph_path), None, 10)
        assert zhat_series(relabelled, None, 10) == original

    def test_single_vertex(self) -> None:
        """One vertex of weight 2 with a = 0 gives -2 q^(-1/4)."""
        g = PlumbingGraph({0: 2})
        expected = from_terms({F(-1, 4): -2}, 5)
        assert zhat_series(g, (0,), 5, "theta") == expected
        assert zhat_series(g, (0,), 5, "support") == expected

    def test_non_unimodular_needs_class_vector(self) -> None:
        """det M = 2 leaves the class ambiguous."""
        with pytest.raises(ClassVectorMismatch):
            zhat_series(PlumbingGraph({0: 2}), None, 5)

    def test_class_vector_parity(self) -> None:
        """a must be congruent to delta mod 2."""
        with pytest.raises(ClassVectorMismatch):
            zhat_series(PlumbingGraph({0: 2}), (1,), 5)

    def test_class_vector_length(self) -> None:
        """a has one entry per vertex."""
        with pytest.raises(ClassVectorMismatch):
            zhat_series(PlumbingGraph({0: 2}), (0, 0), 5)

    def test_not_positive_definite(self) -> None:
        """Negative weights give no convergent q-series."""
        with pytest.raises(NotPositiveDefinite):
            zhat_series(PlumbingGraph({0: -1}), None, 5)

    def test_unknown_pipeline(self, star_graph_path: Path) -> None:
        """Only the theta and support pipelines exist."""
        with pytest.raises(MalformedParams):
            zhat_series(load_graph(star_graph_path), None, 5, "brute")


class TestQuadrantSums:
    """Tests for sums over shifted positive quadrants."""

    def test_diagonal_series(self, fsqe_diagonal_path: Path) -> None:
        """Q = n1^2 + n2^2, K = 2, alpha = (1/2, 1/2) squares sum q^(2 (n + 1/2)^2)."""
        series = fsqe_series(load_fsqe(fsqe_diagonal_path), 10)
        assert series == from_terms({1: 1, 5: 2, 9: 1}, 10)

    @pytest.mark.parametrize("name", ["fsqe_diagonal.json", "fsqe_213.json", "fsqe_pair.json"])
    def test_symmetrized_form(self, data_dir: Path, name: str) -> None:
        """The quadrant sum equals its sign-symmetrized lattice form."""
        report = verify_fsqe_symmetrized(load_fsqe(data_dir / name), 12)
        assert report.passed, report.details

    @pytest.mark.parametrize("name", ["fsqe_diagonal.json", "fsqe_213.json"])
    def test_integral_form(self, data_dir: Path, name: str) -> None:
        """The series value matches its integral representation for diagonal and mixed Q."""
        report = verify_fsqe_integral(load_fsqe(data_dir / name), 2j)
        assert report.passed, report.details

    def test_closure_violation(self) -> None:
        """S must be closed under alpha -> (1 - alpha1, 1 - alpha2)."""
        spec = FsqeSpec((1, 0, 1), 4, [(F(1, 4), F(1, 4))], [1])
        with pytest.raises(ClosureViolation):
            validate_fsqe(spec)

    def test_sign_closure_violation(self) -> None:
        """eps must agree on reflected shifts."""
        shifts = [(F(1, 2), F(1, 4)), (F(1, 2), F(3, 4))]
        with pytest.raises(ClosureViolation):
            validate_fsqe(FsqeSpec((1, 0, 1), 4, shifts, [1, -1]))

    def test_indefinite_form(self) -> None:
        """Q must be positive definite."""
        with pytest.raises(NotPositiveDefiniteQ):
            validate_fsqe(FsqeSpec((1, 2, 1), 2, [(F(1, 2), F(1, 2))], [1]))

    def test_shift_outside_unit_square(self) -> None:
        """Shifts lie strictly inside (0, 1)^2."""
        with pytest.raises(MalformedParams):
            validate_fsqe(FsqeSpec((1, 0, 1), 2, [(F(0), F(1, 2))], [1]))

    def test_scale_must_clear_denominators(self) -> None:
        """K alpha must be integral."""
        with pytest.raises(MalformedParams):
            validate_fsqe(FsqeSpec((1, 0, 1), 1, [(F(1, 2), F(1, 2))], [1]))

    def test_bad_signs_in_dict(self) -> None:
        """eps entries are +1 or -1, one per shift."""
        base = {"sigma": [1, 0, 1], "K": 2, "S": [["1/2", "1/2"]]}
        with pytest.raises(MalformedParams):
            fsqe_from_dict({**base, "eps": [2]})
        with pytest.raises(MalformedParams):
            fsqe_from_dict({**base, "eps": [1, 1]})


class TestSchurIndex:
    """Tests for the F_k identities."""

    @pytest.mark.parametrize("k", [1, 2, 3])
    def test_constant_term(self, k: int) -> None:
        """F_k is the zeroth Fourier coefficient of the Jacobi form."""
        assert verify_fk_constant_term(k, 6).passed

    def test_k1_theta_identity(self) -> None:
        """The k = 1 theta product identity holds in both variables."""
        assert verify_k1_theta_identity(6).passed

    def test_exact_suite(self) -> None:
        """tau=None runs only the exact parts."""
        report = fk_identity_suite(1, 5, None)
        assert report.passed
        assert report.residual is None
        assert set(report.details) == {"Fk-constant-term(k=1)", "k1theta"}

    @pytest.mark.parametrize("tau", [2j, 1 / 3 + 1.5j])
    def test_fk_integral_form(self, tau: complex) -> None:
        """F_1 at tau equals its double integral to tau + i infinity."""
        report = verify_fk_integral(1, tau)
        assert report.passed, report.residual

    def test_full_suite(self) -> None:
        """With a sample point the suite adds the integral form."""
        report = fk_identity_suite(1, 5, 2j)
        assert report.passed, report.details
        assert "Fk-integral(k=1)" in report.details
