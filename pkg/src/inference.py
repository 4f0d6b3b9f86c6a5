"""
Região de confiança para os pesos de aresta e testes de subestrutura.

Trabalha sobre resíduos com divisão da amostra (suavizador treinado na metade
auxiliar, momentos avaliados na principal):

  M̂_k = r_k²            para cada aresta k = (j→i)
  V̂_i = (X_i − X̄_i)²    para cada nó i

O intervalo de cada peso vem do método delta com correção de Bonferroni sobre as
p(p−1) arestas. O teste ψ_R rejeita H0(R) quando a melhor árvore compatível com R
sob os limites inferiores é pior que a melhor árvore livre sob os limites superiores.
"""
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence, Union

import numpy as np
from scipy.stats import norm

from src.arborescence import EdgeConstraintSet, min_arborescence
from src.config import get_threads
from src.dataset import SplitDataset
from src.errors import DegenerateError, InfeasibleConstraintsError
from src.models import ConfidenceReport, EdgeInterval, TestReport
from src.weights import WeightMatrix, ordered_pairs

logger = logging.getLogger(__name__)

# Acima deste número de linhas (p(p−1) + p) a covariância completa não é guardada
FULL_COVARIANCE_LIMIT = 2048


@dataclass(frozen=True)
class MomentSummaries:
    names: tuple[str, ...]
    n: int
    mu: np.ndarray
    nu: np.ndarray
    var_m: np.ndarray
    var_v: np.ndarray
    cov_mv: np.ndarray
    covariance: Optional[np.ndarray] = field(default=None, repr=False)

    @property
    def p(self) -> int:
        return len(self.names)

    @property
    def pairs(self) -> list[tuple[int, int]]:
        return ordered_pairs(self.p)

    def blocks(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """(Σ̂_M, Σ̂_V, Σ̂_MV); só disponível quando a covariância completa foi guardada."""
        if self.covariance is None:
            raise ValueError("Covariância completa não armazenada para este p")
        k = self.mu.size
        return self.covariance[:k, :k], self.covariance[k:, k:], self.covariance[:k, k:]

    @classmethod
    def from_arrays(cls, names: Sequence[str], squared_residuals: np.ndarray,
                    squared_centered: np.ndarray) -> "MomentSummaries":
        """squared_residuals: (p(p−1), n) na ordem de ordered_pairs; squared_centered: (p, n)."""
        m = np.asarray(squared_residuals, dtype=float)
        v = np.asarray(squared_centered, dtype=float)
        p = len(names)
        pairs = ordered_pairs(p)
        if m.shape[0] != len(pairs) or v.shape[0] != p or m.shape[1] != v.shape[1]:
            raise ValueError(f"Formas incompatíveis: M {m.shape}, V {v.shape}, p={p}")
        n = m.shape[1]
        mu = m.mean(axis=1)
        nu = v.mean(axis=1)
        if np.any(mu <= 0):
            j, i = pairs[int(np.argmin(mu))]
            raise DegenerateError(f"Média dos resíduos ao quadrado nula em {names[j]} -> {names[i]}")
        if np.any(nu <= 0):
            raise DegenerateError(f"Variância nula na coluna '{names[int(np.argmin(nu))]}'")

        heads = np.array([i for _, i in pairs], dtype=np.int64)
        covariance = None
        if m.shape[0] + p <= FULL_COVARIANCE_LIMIT:
            covariance = np.atleast_2d(np.cov(np.vstack([m, v]), bias=True))
            k = m.shape[0]
            var_m = np.diag(covariance)[:k].copy()
            var_v = np.diag(covariance)[k:].copy()
            cov_mv = covariance[np.arange(k), k + heads].copy()
        else:
            mc = m - mu[:, None]
            vc = v - nu[:, None]
            var_m = np.mean(mc ** 2, axis=1)
            var_v = np.mean(vc ** 2, axis=1)
            cov_mv = np.mean(mc * vc[heads], axis=1)
        return cls(tuple(names), n, mu, nu, var_m, var_v, cov_mv, covariance)


def moment_summaries(w: WeightMatrix, d: SplitDataset) -> MomentSummaries:
    """Momentos a partir dos resíduos guardados na matriz de pesos (calculada com divisão da amostra)."""
    if not w.split:
        raise ValueError("A inferência exige resíduos calculados com divisão da amostra")
    main = d.main
    if tuple(main.columns) != tuple(w.names):
        raise ValueError("Colunas da amostra diferem dos nós da matriz de pesos")
    pairs = ordered_pairs(w.p)
    missing = [pair for pair in pairs if pair not in w.residuals]
    if missing:
        raise ValueError(f"Resíduos ausentes para {len(missing)} arestas")
    lengths = {w.residuals[pair].size for pair in pairs}
    if lengths != {main.n}:
        raise ValueError(f"Resíduos com tamanho {sorted(lengths)} diferente de n={main.n}")
    if main.n < len(pairs) + w.p:
        logger.warning(f"n={main.n} menor que p(p−1)+p={len(pairs) + w.p}: covariância mal condicionada")

    squared_residuals = np.vstack([w.residuals[pair] ** 2 for pair in pairs])
    centered = main.values - main.values.mean(axis=0)
    return MomentSummaries.from_arrays(w.names, squared_residuals, (centered ** 2).T)


@dataclass(frozen=True)
class ConfidenceRegion:
    """Matrizes p×p (diagonal NaN) com estimativa, σ̂ e limites de cada peso."""
    names: tuple[str, ...]
    alpha: float
    z: float
    n: int
    estimate: np.ndarray
    sigma: np.ndarray
    lower: np.ndarray
    upper: np.ndarray

    @property
    def p(self) -> int:
        return len(self.names)

    def to_model(self) -> ConfidenceReport:
        edges = [
            EdgeInterval(
                source=self.names[j],
                target=self.names[i],
                w=float(self.estimate[j, i]),
                sigma=float(self.sigma[j, i]),
                lo=float(self.lower[j, i]),
                hi=float(self.upper[j, i]),
            )
            for j, i in ordered_pairs(self.p)
        ]
        return ConfidenceReport(alpha=self.alpha, z=self.z, n=self.n, names=list(self.names), edges=edges)


def bonferroni_quantile(alpha: float, p: int) -> float:
    """Quantil superior α/(2·p(p−1)) da normal padrão."""
    return float(norm.ppf(1 - alpha / (2 * p * (p - 1))))


def confidence_intervals(ms: MomentSummaries, alpha: float) -> ConfidenceRegion:
    if not 0 < alpha < 1:
        raise ValueError(f"alpha deve estar em (0, 1), recebido {alpha}")
    p = ms.p
    pairs = ms.pairs
    heads = np.array([i for _, i in pairs], dtype=np.int64)
    mu, nu = ms.mu, ms.nu[heads]

    variance = ms.var_m / mu ** 2 + ms.var_v[heads] / nu ** 2 - 2 * ms.cov_mv / (mu * nu)
    negative = variance < 0
    if negative.any():
        logger.warning(f"σ̂² negativo em {int(negative.sum())} arestas (mínimo {variance.min():.3g}); truncado em 0")
        variance = np.where(negative, 0.0, variance)
    sigma = np.sqrt(variance)
    estimate = 0.5 * np.log(mu / nu)
    z = bonferroni_quantile(alpha, p)
    half = z * sigma / (2 * np.sqrt(ms.n))

    def as_matrix(values: np.ndarray) -> np.ndarray:
        out = np.full((p, p), np.nan)
        for (j, i), value in zip(pairs, values):
            out[j, i] = value
        return out

    return ConfidenceRegion(
        names=ms.names,
        alpha=alpha,
        z=z,
        n=ms.n,
        estimate=as_matrix(estimate),
        sigma=as_matrix(sigma),
        lower=as_matrix(estimate - half),
        upper=as_matrix(estimate + half),
    )


ConstraintsLike = Union[EdgeConstraintSet, Sequence[str]]


def _constraints(cr: ConfidenceRegion, R: ConstraintsLike) -> EdgeConstraintSet:
    c = R if isinstance(R, EdgeConstraintSet) else EdgeConstraintSet.parse(R, cr.names)
    c.check(cr.p)
    return c


def _test(cr: ConfidenceRegion, c: EdgeConstraintSet, s_upper: float) -> TestReport:
    described = c.describe(cr.names)
    try:
        lower_tree, s_lower = min_arborescence(cr.lower, c)
    except InfeasibleConstraintsError as e:
        logger.warning(f"Hipótese {described} impossível: {e}")
        return TestReport(constraints=described, s_upper=s_upper, reject=True, infeasible=True,
                          reason=str(e), alpha=cr.alpha)
    return TestReport(
        constraints=described,
        s_lower=s_lower,
        s_upper=s_upper,
        reject=bool(s_lower > s_upper),
        alpha=cr.alpha,
        lower_tree=lower_tree.with_names(cr.names).to_model(),
    )


def test_substructure(cr: ConfidenceRegion, R: ConstraintsLike) -> TestReport:
    """ψ_R = 1{s_T(R)(l̂) > s(û)}; 𝒯(R) vazio rejeita com a flag infeasible."""
    c = _constraints(cr, R)
    _, s_upper = min_arborescence(cr.upper)
    return _test(cr, c, s_upper)


def test_many(cr: ConfidenceRegion, hypotheses: Sequence[ConstraintsLike],
              threads: Optional[int] = None) -> list[TestReport]:
    """Todas as hipóteses contra a mesma região, sem correção adicional de multiplicidade."""
    if not hypotheses:
        return []
    constraints = [_constraints(cr, R) for R in hypotheses]
    _, s_upper = min_arborescence(cr.upper)
    with ThreadPoolExecutor(max_workers=get_threads(threads)) as pool:
        reports = list(pool.map(lambda c: _test(cr, c, s_upper), constraints))
    logger.info(f"{len(reports)} hipóteses testadas, {sum(r.reject for r in reports)} rejeitadas")
    return reports


# nomes começam com "test": o pytest não deve coletá-las quando importadas
test_substructure.__test__ = False
test_many.__test__ = False
