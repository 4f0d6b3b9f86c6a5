"""
Fluxos de ponta a ponta usados pela CLI, pela API e pelos benchmarks.

fit_tree: pesos estimados + árvore de menor peso (CAT).
confidence_region: divisão da amostra, pesos com resíduos guardados, intervalos simultâneos.
"""
import logging
from dataclasses import dataclass
from typing import Optional

from src import inference
from src.arborescence import DirectedTree, min_arborescence
from src.config import DEFAULT_ALPHA, DEFAULT_SEED, DEFAULT_SPLIT_FRACTION
from src.dataset import Dataset, split
from src.models import EntropyConfig, FitReport, ScoreKind, SmootherConfig
from src.weights import WeightMatrix, weight_matrix

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class CatFit:
    tree: DirectedTree
    total: float
    weights: WeightMatrix

    def to_model(self) -> FitReport:
        return FitReport(tree=self.tree.to_model(), total=self.total, weights=self.weights.to_model())


def fit_tree(
    d: Dataset,
    kind: ScoreKind = ScoreKind.GAUSSIAN,
    smoother_cfg: Optional[SmootherConfig] = None,
    entropy_cfg: Optional[EntropyConfig] = None,
    threads: Optional[int] = None,
    standardize: bool = False,
) -> CatFit:
    if standardize:
        d = d.standardized()
    w = weight_matrix(d, kind, smoother_cfg, entropy_cfg, threads=threads)
    tree, total = min_arborescence(w)
    logger.info(f"Árvore {kind.value}: raiz {d.columns[tree.root]}, escore total {total:.4f}")
    return CatFit(tree=tree, total=total, weights=w)


def confidence_region(
    d: Dataset,
    alpha: float = DEFAULT_ALPHA,
    fraction: float = DEFAULT_SPLIT_FRACTION,
    seed: int = DEFAULT_SEED,
    smoother_cfg: Optional[SmootherConfig] = None,
    threads: Optional[int] = None,
    standardize: bool = False,
) -> inference.ConfidenceRegion:
    if not 0 < alpha < 1:
        raise ValueError(f"alpha deve estar em (0, 1), recebido {alpha}")
    if standardize:
        d = d.standardized()
    halves = split(d, fraction, seed)
    w = weight_matrix(halves, ScoreKind.GAUSSIAN, smoother_cfg, threads=threads)
    ms = inference.moment_summaries(w, halves)
    return inference.confidence_intervals(ms, alpha)
