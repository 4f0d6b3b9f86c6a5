from enum import Enum
from typing import Optional, Union

from pydantic import BaseModel, ConfigDict, Field, field_validator


class ScoreKind(str, Enum):
    GAUSSIAN = "gaussian"
    ENTROPY = "entropy"


class SmootherBackend(str, Enum):
    LOCAL_LINEAR = "local-linear"
    SPLINE = "spline"


class TreeType(str, Enum):
    """Grafo verdadeiro das simulações. DAG: árvore tipo 1 com arestas extras e raiz única."""
    TYPE1 = "type1"
    TYPE2 = "type2"
    DAG = "dag"


class SmootherConfig(BaseModel):
    """
    Configuração da regressão univariada E[X_i | X_j].

    tuning: bandwidth (local-linear) ou penalidade (spline); "auto" seleciona por validação cruzada.
    """
    model_config = ConfigDict(frozen=True)

    backend: SmootherBackend = SmootherBackend.LOCAL_LINEAR
    tuning: Union[float, str] = "auto"
    cv_folds: int = Field(default=10, ge=2)
    cv_max_samples: int = Field(default=2000, ge=10)
    seed: int = 0

    @field_validator("tuning")
    @classmethod
    def _check_tuning(cls, value):
        if isinstance(value, str):
            if value != "auto":
                value = float(value)
            else:
                return value
        if not value > 0:
            raise ValueError(f"bandwidth/penalidade deve ser > 0, recebido {value}")
        return float(value)

    @property
    def is_auto(self) -> bool:
        return self.tuning == "auto"


class EntropyConfig(BaseModel):
    """Estimador de Kozachenko–Leonenko: k vizinhos, distância euclidiana, jitter semeado."""
    model_config = ConfigDict(frozen=True)

    k: int = Field(default=3, ge=1)
    seed: int = 0


class EdgeModel(BaseModel):
    model_config = ConfigDict(populate_by_name=True)

    source: str = Field(alias="from")
    target: str = Field(alias="to")


class TreeModel(BaseModel):
    root: str
    edges: list[EdgeModel]


class WeightEntry(EdgeModel):
    weight: float


class WeightMatrixModel(BaseModel):
    names: list[str]
    kind: ScoreKind
    split: bool = False
    entries: list[WeightEntry]


class FitReport(BaseModel):
    tree: TreeModel
    total: float
    weights: WeightMatrixModel


class EdgeInterval(EdgeModel):
    w: float
    sigma: float
    lo: float
    hi: float


class ConfidenceReport(BaseModel):
    alpha: float
    z: float
    n: int
    names: list[str]
    edges: list[EdgeInterval]


class TestReport(BaseModel):
    __test__ = False  # não é uma classe de teste do pytest

    constraints: list[str]
    s_lower: Optional[float] = None
    s_upper: float
    reject: bool
    infeasible: bool = False
    reason: Optional[str] = None
    alpha: float
    lower_tree: Optional[TreeModel] = None


class ReversalGap(EdgeModel):
    gap: float


class BivariateGapReport(BaseModel):
    x: str
    y: str
    n: int
    gap: float
    gap_clamped: float
    p_value: Optional[float] = None
    permutations: int = 0


class GapReport(BaseModel):
    best_total: float
    second_best_total: Optional[float] = None
    empirical_gap: Optional[float] = None
    best_tree: TreeModel
    second_best_tree: Optional[TreeModel] = None
    reversal_gaps: list[ReversalGap] = []
    min_reversal_gap: Optional[float] = None
    bivariate: Optional[BivariateGapReport] = None


class BenchmarkGrid(BaseModel):
    p: list[int] = Field(min_length=1)
    n: list[int] = Field(min_length=1)
    tree_type: list[TreeType] = [TreeType.TYPE1]
    alpha: list[float] = [1.0]
    reps: int = Field(default=1, ge=1)
    scores: list[ScoreKind] = [ScoreKind.GAUSSIAN]

    @field_validator("p")
    @classmethod
    def _check_p(cls, values):
        if any(v < 2 for v in values):
            raise ValueError("p deve ser >= 2")
        return values

    @field_validator("n")
    @classmethod
    def _check_n(cls, values):
        if any(v < 10 for v in values):
            raise ValueError("n deve ser >= 10")
        return values

    @field_validator("alpha")
    @classmethod
    def _check_alpha(cls, values):
        if any(not v > 0 for v in values):
            raise ValueError("alpha do ruído deve ser > 0")
        return values


class GraphMetrics(BaseModel):
    shd: int = Field(ge=0)
    ancestor_tpr: Optional[float] = None
    ancestor_recall: Optional[float] = None


class BenchmarkFailure(BaseModel):
    p: int
    n: int
    tree_type: TreeType
    alpha: float
    score: ScoreKind
    rep: int
    error: str


class BenchmarkCell(BaseModel):
    p: int
    n: int
    tree_type: TreeType
    alpha: float
    score: ScoreKind
    reps: int
    failures: int
    shd_median: Optional[float] = None
    shd_iqr: Optional[float] = None
    ancestor_tpr_median: Optional[float] = None
    ancestor_recall_median: Optional[float] = None


class BenchmarkSummary(BaseModel):
    seed: int
    grid: BenchmarkGrid
    cells: list[BenchmarkCell]
    failures: list[BenchmarkFailure] = []


class GraphModel(BaseModel):
    """Grafo verdadeiro de uma simulação; root é None quando o grafo não é uma árvore."""
    names: list[str]
    root: Optional[str] = None
    edges: list[EdgeModel]
