"""
Diagnósticos do gap de identificabilidade.

  - gap bivariado: I(X − E[X|Y]; Y), com p-valor por permutação de Y;
  - gap de inversão de aresta: Δ(j↔i) = w_E(i→j) − w_E(j→i), o aumento do escore
    ao trocar j→i por i→j;
  - gap empírico: segunda melhor árvore menos a melhor.
"""
import logging
from concurrent.futures import ThreadPoolExecutor
from typing import Optional, Sequence

import numpy as np

from src import smoother
from src.arborescence import min_arborescence, second_best_trees
from src.config import get_threads
from src.entropy import entropy_knn, mutual_information
from src.models import (
    BivariateGapReport,
    EntropyConfig,
    GapReport,
    ReversalGap,
    ScoreKind,
    SmootherConfig,
)
from src.weights import WeightMatrix, ordered_pairs

logger = logging.getLogger(__name__)

MIN_BIVARIATE_N = 100
DEFAULT_PERMUTATIONS = 200


def _anticausal_residual(x: np.ndarray, y: np.ndarray, smoother_cfg: Optional[SmootherConfig]) -> np.ndarray:
    x = np.asarray(x, dtype=float).ravel()
    y = np.asarray(y, dtype=float).ravel()
    if x.size != y.size:
        raise ValueError(f"x e y com tamanhos diferentes: {x.size} != {y.size}")
    if x.size < MIN_BIVARIATE_N:
        raise ValueError(f"Gap bivariado requer n >= {MIN_BIVARIATE_N}, recebido {x.size}")
    fitted = smoother.fit(y, x, smoother_cfg or SmootherConfig())
    return x - smoother.predict(fitted, y)


def bivariate_gap(x, y, smoother_cfg: Optional[SmootherConfig] = None,
                  entropy_cfg: Optional[EntropyConfig] = None) -> float:
    """I(x − φ̂(y); y) para o modelo x → y. Valor bruto (pode ser levemente negativo)."""
    r = _anticausal_residual(x, y, smoother_cfg)
    return mutual_information(r, y, entropy_cfg or EntropyConfig())


def bivariate_gap_test(
    x,
    y,
    smoother_cfg: Optional[SmootherConfig] = None,
    entropy_cfg: Optional[EntropyConfig] = None,
    permutations: int = DEFAULT_PERMUTATIONS,
    seed: int = 0,
    threads: Optional[int] = None,
    names: Sequence[str] = ("X", "Y"),
) -> BivariateGapReport:
    """
    Gap bivariado com teste de permutação de H0: gap = 0.

    p-valor = (1 + #{I_b >= I_obs}) / (1 + B); as entropias marginais são calculadas uma vez.
    """
    entropy_cfg = entropy_cfg or EntropyConfig()
    y = np.asarray(y, dtype=float).ravel()
    r = _anticausal_residual(x, y, smoother_cfg)
    observed = mutual_information(r, y, entropy_cfg)
    report = BivariateGapReport(x=names[0], y=names[1], n=y.size, gap=observed, gap_clamped=max(observed, 0.0))
    if permutations <= 0:
        return report

    marginal = entropy_knn(r, entropy_cfg) + entropy_knn(y, entropy_cfg)

    def replicate(b: int) -> float:
        rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(b,)))
        return marginal - entropy_knn(np.column_stack([r, y[rng.permutation(y.size)]]), entropy_cfg)

    with ThreadPoolExecutor(max_workers=get_threads(threads)) as pool:
        null = np.array(list(pool.map(replicate, range(permutations))))
    p_value = (1 + int(np.sum(null >= observed))) / (1 + permutations)
    logger.info(f"Gap bivariado {names[0]} -> {names[1]}: {observed:.4f} (p = {p_value:.3f})")
    return report.model_copy(update={"p_value": p_value, "permutations": permutations})


def edge_reversal_gaps(w_entropy: WeightMatrix) -> dict[tuple[int, int], float]:
    """Δ(j↔i) = w(i→j) − w(j→i) para cada aresta ordenada (j, i); antissimétrico."""
    values = w_entropy.values
    return {(j, i): float(values[i, j] - values[j, i]) for j, i in ordered_pairs(w_entropy.p)}


def empirical_gap(w: WeightMatrix, entropy_weights: Optional[WeightMatrix] = None,
                  threads: Optional[int] = None) -> GapReport:
    """
    Gap entre a melhor árvore e a segunda melhor (p−1 re-soluções).

    Com pesos de entropia (os próprios w, se forem de entropia) anexa os gaps de
    inversão das arestas da melhor árvore e o seu mínimo.
    """
    best, best_total = min_arborescence(w)
    names = w.names
    report = GapReport(best_total=best_total, best_tree=best.to_model())

    alternatives = second_best_trees(w, threads=threads)
    if alternatives:
        second, second_total = alternatives[0]
        report = report.model_copy(update={
            "second_best_total": second_total,
            "empirical_gap": max(second_total - best_total, 0.0),
            "second_best_tree": second.to_model(),
        })

    if entropy_weights is None and w.kind == ScoreKind.ENTROPY:
        entropy_weights = w
    if entropy_weights is not None:
        gaps = edge_reversal_gaps(entropy_weights)
        reversal = [ReversalGap(source=names[j], target=names[i], gap=gaps[(j, i)]) for j, i in best.edges]
        report = report.model_copy(update={
            "reversal_gaps": reversal,
            "min_reversal_gap": min(g.gap for g in reversal),
        })
    return report
