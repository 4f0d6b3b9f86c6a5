"""
Pesos de aresta estimados w(j→i) para as p(p−1) arestas ordenadas.

  gaussiano: ½·log( Var(resíduo) / Var(marginal) )
  entropia:  ĥ(resíduo) − ĥ(marginal)

Sem divisão da amostra as regressões são ajustadas e avaliadas nos mesmos dados
(resíduo centrado). Com SplitDataset, o suavizador é treinado na metade auxiliar e
o resíduo avaliado na principal; o numerador gaussiano passa a ser a média dos
quadrados sem centrar, a mesma quantidade usada pela inferência.
"""
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence, Union

import numpy as np

from src import smoother
from src.config import get_threads
from src.dataset import Dataset, SplitDataset, population_variance, require_variance
from src.entropy import entropy_knn
from src.errors import DegenerateError
from src.models import (
    EntropyConfig,
    ScoreKind,
    SmootherConfig,
    WeightEntry,
    WeightMatrixModel,
)

logger = logging.getLogger(__name__)


def gaussian_weight(residuals, marginal, centered: bool = True) -> float:
    r = np.asarray(residuals, dtype=float)
    numerator = population_variance(r) if centered else float(np.mean(r ** 2))
    denominator = population_variance(marginal)
    if numerator <= 0:
        raise DegenerateError("Variância residual zero: ajuste perfeito, log indefinido")
    if denominator <= 0:
        raise DegenerateError("Variância marginal zero")
    return float(0.5 * np.log(numerator / denominator))


def entropy_weight(residuals, marginal, cfg: EntropyConfig = EntropyConfig()) -> float:
    return entropy_knn(residuals, cfg) - entropy_knn(marginal, cfg)


@dataclass(frozen=True)
class WeightMatrix:
    """values[j, i] = w(j→i); diagonal NaN. residuals[(j, i)] = X_i − φ̂_ji(X_j) na amostra de avaliação."""
    names: tuple[str, ...]
    kind: ScoreKind
    values: np.ndarray
    residuals: dict = field(default_factory=dict, repr=False, compare=False)
    split: bool = False

    def __post_init__(self):
        values = np.array(self.values, dtype=float, copy=True)
        p = len(self.names)
        if values.shape != (p, p):
            raise ValueError(f"Matriz de pesos {values.shape} incompatível com {p} nomes")
        off = ~np.eye(p, dtype=bool)
        if not np.all(np.isfinite(values[off])):
            j, i = np.argwhere(~np.isfinite(values) & off)[0]
            raise ValueError(f"Peso não finito em {self.names[j]} -> {self.names[i]}")
        np.fill_diagonal(values, np.nan)
        values.setflags(write=False)
        object.__setattr__(self, "names", tuple(self.names))
        object.__setattr__(self, "values", values)

    @property
    def p(self) -> int:
        return len(self.names)

    def weight(self, j: int, i: int) -> float:
        return float(self.values[j, i])

    def permuted(self, order: Sequence[int]) -> "WeightMatrix":
        """Reindexa os nós: o novo nó a é o antigo order[a]."""
        order = list(order)
        position = {old: new for new, old in enumerate(order)}
        residuals = {(position[j], position[i]): r for (j, i), r in self.residuals.items()}
        return WeightMatrix(
            names=tuple(self.names[k] for k in order),
            kind=self.kind,
            values=self.values[np.ix_(order, order)],
            residuals=residuals,
            split=self.split,
        )

    def to_model(self) -> WeightMatrixModel:
        entries = [
            WeightEntry(source=self.names[j], target=self.names[i], weight=self.weight(j, i))
            for j in range(self.p)
            for i in range(self.p)
            if i != j
        ]
        return WeightMatrixModel(names=list(self.names), kind=self.kind, split=self.split, entries=entries)

    @classmethod
    def from_model(cls, model: WeightMatrixModel) -> "WeightMatrix":
        index = {name: k for k, name in enumerate(model.names)}
        values = np.full((len(index), len(index)), np.nan)
        for entry in model.entries:
            values[index[entry.source], index[entry.target]] = entry.weight
        return cls(tuple(model.names), model.kind, values, split=model.split)


def ordered_pairs(p: int) -> list[tuple[int, int]]:
    """Arestas (j, i), j ≠ i, em ordem lexicográfica."""
    return [(j, i) for j in range(p) for i in range(p) if i != j]


def weight_matrix(
    d: Union[Dataset, SplitDataset],
    kind: ScoreKind = ScoreKind.GAUSSIAN,
    smoother_cfg: Optional[SmootherConfig] = None,
    entropy_cfg: Optional[EntropyConfig] = None,
    threads: Optional[int] = None,
) -> WeightMatrix:
    smoother_cfg = smoother_cfg or SmootherConfig()
    entropy_cfg = entropy_cfg or EntropyConfig()
    is_split = isinstance(d, SplitDataset)
    train, evaluate = (d.auxiliary, d.main) if is_split else (d, d)
    names = evaluate.columns
    for i in range(evaluate.p):
        require_variance(evaluate, i)

    def job(pair: tuple[int, int]) -> tuple[np.ndarray, float]:
        j, i = pair
        try:
            fitted = smoother.fit(train.column(j), train.column(i), smoother_cfg, predictor=j, response=i)
            r = evaluate.column(i) - smoother.predict(fitted, evaluate.column(j))
            if kind == ScoreKind.GAUSSIAN:
                w = gaussian_weight(r, evaluate.column(i), centered=not is_split)
            else:
                w = entropy_weight(r, evaluate.column(i), entropy_cfg)
        except ValueError as e:
            raise DegenerateError(f"Par {names[j]} -> {names[i]}: {e}") from e
        return r, w

    pairs = ordered_pairs(evaluate.p)
    with ThreadPoolExecutor(max_workers=get_threads(threads)) as pool:
        results = list(pool.map(job, pairs))

    values = np.full((evaluate.p, evaluate.p), np.nan)
    residuals = {}
    for (j, i), (r, w) in zip(pairs, results):
        values[j, i] = w
        r.setflags(write=False)
        residuals[(j, i)] = r
    logger.info(f"Pesos {kind.value} calculados: p={evaluate.p}, n={evaluate.n}, split={is_split}")
    return WeightMatrix(names, kind, values, residuals=residuals, split=is_split)
