"""
Testes da região de confiança dos pesos e dos testes de subestrutura.
"""
import logging
from dataclasses import replace

import numpy as np
import pytest

from src import inference
from src.arborescence import EdgeConstraintSet, min_arborescence
from src.config import RUN_SLOW
from src.data.presets import CHAIN3_NAMES, CHAIN3_WEIGHTS, weight_table
from src.dataset import Dataset, split
from src.errors import DegenerateError
from src.models import SmootherConfig
from src.pipeline import confidence_region
from src.simulate import gen_tree_type2, random_scm, sample_scm
from src.weights import ordered_pairs, weight_matrix

needs_slow = pytest.mark.skipif(not RUN_SLOW, reason="Requer CAT_RUN_SLOW=1")

FIXED = SmootherConfig(tuning=0.4)
# CV numa subamostra de 500 pontos com 5 folds; a banda escolhida é reescalada para n
SUBSAMPLED_CV = SmootherConfig(cv_max_samples=500, cv_folds=5)


def _summaries(p: int, n: int, seed: int = 0) -> inference.MomentSummaries:
    rng = np.random.default_rng(seed)
    m = rng.uniform(0.5, 1.5, size=(p * (p - 1), n))
    v = rng.uniform(0.5, 1.5, size=(p, n))
    return inference.MomentSummaries.from_arrays(tuple(f"X{k + 1}" for k in range(p)), m, v)


def _zero_width_region() -> inference.ConfidenceRegion:
    w = weight_table(CHAIN3_WEIGHTS, CHAIN3_NAMES)
    zero = np.where(np.isnan(w), np.nan, 0.0)
    return inference.ConfidenceRegion(CHAIN3_NAMES, 0.05, 2.0, 100, w, zero, w.copy(), w.copy())


def _chain_data(n: int = 600, seed: int = 0) -> Dataset:
    rng = np.random.default_rng(seed)
    x = rng.normal(size=n)
    y = np.tanh(2 * x) + 0.2 * rng.normal(size=n)
    z = np.sin(2 * y) + 0.2 * rng.normal(size=n)
    return Dataset(("X", "Y", "Z"), np.column_stack([x, y, z]))


class TestMomentSummaries:
    def test_constant_vectors_have_zero_covariance(self):
        ms = inference.MomentSummaries.from_arrays(("A", "B"), np.full((2, 6), 0.5), np.full((2, 6), 2.0))
        assert np.array_equal(ms.covariance, np.zeros((4, 4)))
        assert np.array_equal(ms.mu, [0.5, 0.5])
        assert np.array_equal(ms.nu, [2.0, 2.0])

    def test_block_shapes(self):
        ms = _summaries(2, 5)
        sigma_m, sigma_v, sigma_mv = ms.blocks()
        assert sigma_m.shape == (2, 2) and sigma_v.shape == (2, 2) and sigma_mv.shape == (2, 2)
        assert np.allclose(ms.covariance, ms.covariance.T)

    def test_divisor_n(self):
        rng = np.random.default_rng(1)
        m = rng.uniform(0.5, 1.5, size=(6, 40))
        v = rng.uniform(0.5, 1.5, size=(3, 40))
        ms = inference.MomentSummaries.from_arrays(("A", "B", "C"), m, v)
        assert np.allclose(ms.var_m, m.var(axis=1))
        assert np.allclose(ms.var_v, v.var(axis=1))
        # aresta (0, 1) tem cabeça 1
        expected = np.mean((m[0] - m[0].mean()) * (v[1] - v[1].mean()))
        assert ms.cov_mv[0] == pytest.approx(expected)

    def test_large_p_keeps_only_needed_entries(self):
        p = 46
        ms = _summaries(p, 8, seed=2)
        assert ms.covariance is None
        with pytest.raises(ValueError, match="não armazenada"):
            ms.blocks()
        small = _summaries(3, 8, seed=2)
        assert small.covariance is not None

    def test_large_p_matches_full_formula(self):
        rng = np.random.default_rng(3)
        p, n = 46, 6
        m = rng.uniform(0.5, 1.5, size=(p * (p - 1), n))
        v = rng.uniform(0.5, 1.5, size=(p, n))
        ms = inference.MomentSummaries.from_arrays(tuple(str(k) for k in range(p)), m, v)
        assert np.allclose(ms.var_m, m.var(axis=1))
        heads = [i for _, i in ordered_pairs(p)]
        expected = np.mean((m - m.mean(axis=1, keepdims=True)) * (v[heads] - v[heads].mean(axis=1, keepdims=True)), axis=1)
        assert np.allclose(ms.cov_mv, expected)

    def test_zero_mean_square(self):
        m = np.ones((2, 5))
        m[1] = 0.0
        with pytest.raises(DegenerateError, match="B -> A"):
            inference.MomentSummaries.from_arrays(("A", "B"), m, np.ones((2, 5)))

    def test_shape_mismatch(self):
        with pytest.raises(ValueError, match="incompatíveis"):
            inference.MomentSummaries.from_arrays(("A", "B"), np.ones((3, 5)), np.ones((2, 5)))


class TestMomentSummariesFromWeights:
    def test_requires_split(self):
        d = _chain_data()
        w = weight_matrix(d, smoother_cfg=FIXED)
        with pytest.raises(ValueError, match="divisão da amostra"):
            inference.moment_summaries(w, split(d, 0.5, 0))

    def test_mu_is_mean_squared_residual(self):
        halves = split(_chain_data(), 0.5, seed=1)
        w = weight_matrix(halves, smoother_cfg=FIXED)
        ms = inference.moment_summaries(w, halves)
        for k, pair in enumerate(ms.pairs):
            assert ms.mu[k] == pytest.approx(np.mean(w.residuals[pair] ** 2))

    def test_estimate_equals_split_weight(self):
        halves = split(_chain_data(), 0.5, seed=2)
        w = weight_matrix(halves, smoother_cfg=FIXED)
        cr = inference.confidence_intervals(inference.moment_summaries(w, halves), 0.05)
        off = ~np.eye(3, dtype=bool)
        assert np.allclose(cr.estimate[off], w.values[off])


class TestConfidenceIntervals:
    def test_bonferroni_quantile(self):
        assert inference.bonferroni_quantile(0.05, 2) == pytest.approx(2.2414, abs=1e-4)

    def test_interval_is_symmetric(self):
        cr = inference.confidence_intervals(_summaries(3, 50), 0.05)
        off = ~np.eye(3, dtype=bool)
        assert np.allclose(cr.estimate[off] - cr.lower[off], cr.upper[off] - cr.estimate[off], atol=1e-12)
        assert np.all(cr.lower[off] <= cr.estimate[off])

    def test_width(self):
        cr = inference.confidence_intervals(_summaries(3, 50), 0.1)
        off = ~np.eye(3, dtype=bool)
        width = cr.upper[off] - cr.lower[off]
        assert np.allclose(width, 2 * cr.z * cr.sigma[off] / (2 * np.sqrt(50)))

    def test_zero_variance_gives_zero_width(self):
        ms = inference.MomentSummaries.from_arrays(("A", "B"), np.full((2, 6), 0.5), np.full((2, 6), 2.0))
        cr = inference.confidence_intervals(ms, 0.05)
        assert cr.lower[0, 1] == cr.upper[0, 1] == cr.estimate[0, 1]
        assert cr.estimate[0, 1] == pytest.approx(0.5 * np.log(0.25))

    def test_doubling_n(self):
        ms = _summaries(3, 50)
        narrow = inference.confidence_intervals(replace(ms, n=100), 0.05)
        wide = inference.confidence_intervals(ms, 0.05)
        ratio = (wide.upper[0, 1] - wide.lower[0, 1]) / (narrow.upper[0, 1] - narrow.lower[0, 1])
        assert ratio == pytest.approx(np.sqrt(2))

    @pytest.mark.parametrize("alpha", [0.0, 1.0, 1.5, -0.1])
    def test_invalid_alpha(self, alpha):
        with pytest.raises(ValueError, match="alpha"):
            inference.confidence_intervals(_summaries(2, 10), alpha)

    def test_negative_variance_is_clamped(self, caplog):
        ms = replace(_summaries(2, 10), cov_mv=np.full(2, 100.0))
        with caplog.at_level(logging.WARNING, logger="src.inference"):
            cr = inference.confidence_intervals(ms, 0.05)
        assert cr.sigma[0, 1] == 0.0
        assert "truncado" in caplog.text

    def test_report_json(self):
        report = inference.confidence_intervals(_summaries(2, 10), 0.05).to_model()
        data = report.model_dump(by_alias=True)
        assert [(e["from"], e["to"]) for e in data["edges"]] == [("X1", "X2"), ("X2", "X1")]
        assert data["z"] == pytest.approx(inference.bonferroni_quantile(0.05, 2))


class TestSubstructure:
    def test_empty_hypothesis_never_rejects(self):
        cr = confidence_region(_chain_data(), smoother_cfg=FIXED)
        report = inference.test_substructure(cr, [])
        assert not report.reject
        assert report.s_lower <= report.s_upper

    def test_two_parents_is_infeasible(self):
        cr = _zero_width_region()
        report = inference.test_substructure(cr, ["X->Y", "Z->Y"])
        assert report.reject and report.infeasible
        assert report.s_lower is None
        assert "dois pais" in report.reason

    def test_zero_width_fitted_tree(self):
        cr = _zero_width_region()
        tree, _ = min_arborescence(cr.estimate)
        report = inference.test_substructure(cr, EdgeConstraintSet.from_tree(tree))
        assert report.s_lower == report.s_upper
        assert not report.reject

    def test_zero_width_other_tree_rejects(self):
        report = inference.test_substructure(_zero_width_region(), ["root:Z"])
        assert report.reject
        assert report.lower_tree.root == "Z"

    def test_unknown_name(self):
        with pytest.raises(ValueError, match="'W'"):
            inference.test_substructure(_zero_width_region(), ["W->X"])


class TestMany:
    def test_empty_list(self):
        assert inference.test_many(_zero_width_region(), []) == []

    def test_duplicates_are_identical(self):
        reports = inference.test_many(_zero_width_region(), [["root:Y"], ["root:Y"]], threads=2)
        assert reports[0] == reports[1]

    def test_superset_rejects_when_subset_rejects(self):
        cr = confidence_region(_chain_data(seed=5), smoother_cfg=FIXED)
        small = ["Z->X"]
        large = ["Z->X", "root:Z"]
        a, b = inference.test_many(cr, [small, large])
        if a.s_lower is not None and b.s_lower is not None:
            assert b.s_lower >= a.s_lower
        if a.reject:
            assert b.reject


@needs_slow
class TestLevelAndPower:
    def test_true_tree_level_and_reversed_edge_power(self):
        reject_true, reject_reversed = [], []
        for rep in range(200):
            truth = gen_tree_type2(4, seed=rep)
            d = sample_scm(random_scm(truth, seed=rep), 5000)
            cr = confidence_region(d, alpha=0.05, seed=rep, smoother_cfg=SUBSAMPLED_CV)
            reject_true.append(inference.test_substructure(cr, EdgeConstraintSet.from_tree(truth)).reject)
            j, i = truth.edges[0]
            reversed_edge = EdgeConstraintSet(required=frozenset({(i, j)}))
            reject_reversed.append(inference.test_substructure(cr, reversed_edge).reject)
        assert np.mean(reject_true) <= 0.07
        assert np.mean(reject_reversed) >= 0.5

