"""
Testes dos diagnósticos de gap: bivariado, inversão de aresta e melhor contra segunda melhor árvore.
"""
import numpy as np
import pytest

from src.arborescence import iter_trees, tree_total
from src.config import RUN_SLOW
from src.data.presets import CHAIN3_NAMES, CHAIN3_WEIGHTS, weight_table
from src.gap import bivariate_gap, bivariate_gap_test, edge_reversal_gaps, empirical_gap
from src.models import ScoreKind
from src.pipeline import fit_tree
from src.simulate import bivariate_preset, sample_scm
from src.weights import WeightMatrix

needs_slow = pytest.mark.skipif(not RUN_SLOW, reason="Requer CAT_RUN_SLOW=1")


def _cubic_pair(n: int, seed: int) -> tuple[np.ndarray, np.ndarray]:
    rng = np.random.default_rng(seed)
    x = rng.normal(size=n)
    return x, x ** 3 + rng.normal(size=n)


def _entropy_matrix(values, names=None) -> WeightMatrix:
    values = np.asarray(values, dtype=float)
    names = names or tuple(f"X{k + 1}" for k in range(values.shape[0]))
    return WeightMatrix(names, ScoreKind.ENTROPY, values)


class TestBivariateGap:
    def test_identifiable_cubic_pair(self):
        x, y = _cubic_pair(3000, seed=0)
        assert bivariate_gap(x, y) > 0.05

    def test_linear_gaussian_pair_is_small(self):
        d = sample_scm(bivariate_preset(1.0), 3000, seed=1)
        assert abs(bivariate_gap(d.column(0), d.column(1))) < 0.05

    def test_independent_pair(self):
        rng = np.random.default_rng(2)
        assert abs(bivariate_gap(rng.normal(size=2000), rng.normal(size=2000))) < 0.05

    def test_affine_rescaling_of_cause(self):
        x, y = _cubic_pair(2000, seed=3)
        assert bivariate_gap(2 * x + 1, y) == pytest.approx(bivariate_gap(x, y), abs=0.03)

    def test_requires_100_points(self):
        x, y = _cubic_pair(99, seed=4)
        with pytest.raises(ValueError, match="n >= 100"):
            bivariate_gap(x, y)

    def test_length_mismatch(self):
        with pytest.raises(ValueError, match="tamanhos"):
            bivariate_gap(np.zeros(120), np.zeros(130))


class TestBivariateGapTest:
    def test_identifiable_pair_is_significant(self):
        x, y = _cubic_pair(3000, seed=5)
        report = bivariate_gap_test(x, y, permutations=50, seed=1)
        assert report.p_value < 0.05
        assert report.permutations == 50
        assert report.gap_clamped == max(report.gap, 0.0)

    def test_without_permutations(self):
        x, y = _cubic_pair(200, seed=6)
        report = bivariate_gap_test(x, y, permutations=0, names=("A", "B"))
        assert report.p_value is None
        assert (report.x, report.y, report.n) == ("A", "B", 200)

    def test_reproducible_across_threads(self):
        x, y = _cubic_pair(300, seed=7)
        one = bivariate_gap_test(x, y, permutations=20, seed=3, threads=1)
        many = bivariate_gap_test(x, y, permutations=20, seed=3, threads=3)
        assert one == many

    def test_p_value_bounds(self):
        rng = np.random.default_rng(8)
        report = bivariate_gap_test(rng.normal(size=300), rng.normal(size=300), permutations=19, seed=2)
        assert 1 / 20 <= report.p_value <= 1.0


class TestEdgeReversalGaps:
    def test_antisymmetric(self):
        values = np.random.default_rng(9).uniform(-1, 0, size=(4, 4))
        gaps = edge_reversal_gaps(_entropy_matrix(values))
        for (j, i), gap in gaps.items():
            assert gap == -gaps[(i, j)]

    def test_symmetric_weights_give_zero(self):
        values = np.array([[0.0, -0.3, -0.2], [-0.3, 0.0, -0.5], [-0.2, -0.5, 0.0]])
        assert all(gap == 0.0 for gap in edge_reversal_gaps(_entropy_matrix(values)).values())

    def test_reference_ordering(self):
        # Δ(Y↔Z) = w(Z→Y) − w(Y→Z) = −0.05: inverter Y→Z reduz o escore
        w = _entropy_matrix(weight_table(CHAIN3_WEIGHTS, CHAIN3_NAMES), CHAIN3_NAMES)
        gaps = edge_reversal_gaps(w)
        assert gaps[(1, 2)] == pytest.approx(-0.05)
        assert gaps[(2, 1)] == pytest.approx(0.05)

    def test_path_reversal_is_sum_of_edge_reversals(self):
        values = np.random.default_rng(10).uniform(-1, 0, size=(3, 3))
        w = _entropy_matrix(values)
        gaps = edge_reversal_gaps(w)
        chain = next(t for t in iter_trees(3) if t.edge_set == {(0, 1), (1, 2)})
        reversed_chain = next(t for t in iter_trees(3) if t.edge_set == {(2, 1), (1, 0)})
        difference = tree_total(values, reversed_chain) - tree_total(values, chain)
        assert difference == pytest.approx(gaps[(0, 1)] + gaps[(1, 2)], abs=1e-12)


class TestEmpiricalGap:
    def test_two_nodes(self):
        w = _entropy_matrix([[0.0, -0.7], [-0.2, 0.0]])
        report = empirical_gap(w)
        assert report.empirical_gap == pytest.approx(0.5)
        assert report.best_total == pytest.approx(-0.7)
        assert report.second_best_total == pytest.approx(-0.2)

    def test_equal_weights(self):
        report = empirical_gap(_entropy_matrix(np.full((4, 4), -0.25)))
        assert report.empirical_gap == 0.0

    def test_matches_enumeration(self):
        rng = np.random.default_rng(11)
        for _ in range(10):
            values = rng.uniform(-1, 1, size=(4, 4))
            totals = sorted(tree_total(values, t) for t in iter_trees(4))
            report = empirical_gap(WeightMatrix(tuple("ABCD"), ScoreKind.GAUSSIAN, values))
            assert report.empirical_gap == pytest.approx(totals[1] - totals[0], abs=1e-12)

    def test_reversal_gaps_for_best_tree_edges(self):
        w = _entropy_matrix(weight_table(CHAIN3_WEIGHTS, CHAIN3_NAMES), CHAIN3_NAMES)
        report = empirical_gap(w)
        pairs = [(g.source, g.target) for g in report.reversal_gaps]
        assert pairs == [("X", "Y"), ("Y", "Z")]
        assert report.min_reversal_gap == pytest.approx(-0.05)
        assert report.best_tree.root == "X"

    def test_gaussian_weights_without_entropy(self):
        w = WeightMatrix(CHAIN3_NAMES, ScoreKind.GAUSSIAN, weight_table(CHAIN3_WEIGHTS, CHAIN3_NAMES))
        report = empirical_gap(w)
        assert report.reversal_gaps == []
        assert report.min_reversal_gap is None
        assert report.empirical_gap == pytest.approx(0.13)

    def test_separate_entropy_weights(self):
        values = weight_table(CHAIN3_WEIGHTS, CHAIN3_NAMES)
        w = WeightMatrix(CHAIN3_NAMES, ScoreKind.GAUSSIAN, values)
        report = empirical_gap(w, entropy_weights=_entropy_matrix(values, CHAIN3_NAMES))
        assert len(report.reversal_gaps) == 2

    def test_json_aliases(self):
        report = empirical_gap(_entropy_matrix([[0.0, -0.7], [-0.2, 0.0]]))
        data = report.model_dump(by_alias=True)
        assert data["reversal_gaps"][0]["from"] == "X1"


@needs_slow
class TestLargeSampleGaps:
    def test_linear_gaussian_corner(self):
        d = sample_scm(bivariate_preset(1.0), 50_000, seed=12)
        assert abs(bivariate_gap(d.column(0), d.column(1))) <= 0.02

    def test_cubic_pair(self):
        x, y = _cubic_pair(50_000, seed=13)
        assert bivariate_gap(x, y) > 0.1


@needs_slow
class TestLinearGaussianCorner:
    def test_permutation_test_does_not_reject(self):
        p_values = []
        for rep in range(100):
            d = sample_scm(bivariate_preset(1.0, seed=rep), 5000)
            report = bivariate_gap_test(d.column(0), d.column(1), permutations=99, seed=rep)
            p_values.append(report.p_value)
        assert np.mean(np.array(p_values) > 0.05) >= 0.9

    def test_recovery_is_a_coin_flip(self):
        hits = 0
        for rep in range(100):
            d = sample_scm(bivariate_preset(1.0, seed=rep), 5000)
            hits += fit_tree(d).tree.edges == [(0, 1)]
        assert 0.3 <= hits / 100 <= 0.7
