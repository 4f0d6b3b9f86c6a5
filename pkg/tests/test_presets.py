"""
Testes das constantes dos modelos de referência.
"""
import numpy as np
import pytest

from src.arborescence import min_arborescence, tree_total
from src.data.presets import (
    CHAIN3_BEST_TOTAL,
    CHAIN3_CUBIC_SCALE,
    CHAIN3_NAMES,
    CHAIN3_WEIGHTS,
    weight_table,
)


class TestWeightTable:
    def test_diagonal_is_nan(self):
        values = weight_table(CHAIN3_WEIGHTS, CHAIN3_NAMES)
        assert values.shape == (3, 3)
        assert np.all(np.isnan(np.diag(values)))

    def test_orientation(self):
        values = weight_table(CHAIN3_WEIGHTS, CHAIN3_NAMES)
        assert values[0, 1] == -0.46
        assert values[1, 0] == -0.28

    def test_best_total(self):
        tree, total = min_arborescence(weight_table(CHAIN3_WEIGHTS, CHAIN3_NAMES))
        assert total == pytest.approx(CHAIN3_BEST_TOTAL)
        assert tree_total(weight_table(CHAIN3_WEIGHTS, CHAIN3_NAMES), tree) == pytest.approx(total)


def test_cubic_scale_normalizes_variance():
    x = np.random.default_rng(0).normal(0.0, np.sqrt(1.5), size=200_000)
    assert np.var(x ** 3) * CHAIN3_CUBIC_SCALE == pytest.approx(1.0, abs=0.1)
