"""
Regressão univariada não paramétrica: φ̂_ji(x) ≈ E[X_i | X_j = x].

Backends (ambos suavizadores lineares):
  - local-linear com kernel gaussiano (padrão);
  - spline cúbica penalizada (scipy.interpolate.make_smoothing_spline).

Fora do intervalo de treino a previsão continua em linha reta a partir do valor
e da inclinação na fronteira. Os ajustes são imutáveis e podem ser compartilhados.
"""
import logging
from dataclasses import dataclass, field, replace
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.interpolate import make_smoothing_spline

from src.errors import DegenerateError
from src.models import SmootherBackend, SmootherConfig

logger = logging.getLogger(__name__)

GRID_SIZE = 25
MIN_POINTS = 5

# Acima deste tamanho de treino o local-linear é avaliado numa grade e interpolado
EXACT_EVAL_LIMIT = 5000
EVAL_GRID_POINTS = 2048

# Número máximo de entradas da matriz consulta × treino por bloco
_CHUNK_BUDGET = 2_000_000

# Penalidade da spline em unidades padronizadas, por unidade de peso, a partir da qual
# o ajuste é a reta de mínimos quadrados. Também é o topo da grade de CV.
LINEAR_PENALTY = 1e3
_SPLINE_TOLERANCE = 1e-6


@dataclass(frozen=True)
class RegressionFit:
    backend: SmootherBackend
    tuning: float
    n_train: int
    lower: float
    upper: float
    lower_value: float
    upper_value: float
    lower_slope: float
    upper_slope: float
    evaluate: Callable[[np.ndarray], np.ndarray] = field(repr=False, compare=False)
    predictor: Optional[int] = None
    response: Optional[int] = None

    def predict(self, x) -> np.ndarray:
        return predict(self, x)


def _validate(x, y) -> tuple[np.ndarray, np.ndarray]:
    x = np.asarray(x, dtype=float).ravel()
    y = np.asarray(y, dtype=float).ravel()
    if x.size != y.size:
        raise ValueError(f"x e y com tamanhos diferentes: {x.size} != {y.size}")
    if x.size < MIN_POINTS:
        raise DegenerateError(f"São necessários pelo menos {MIN_POINTS} pontos, recebido {x.size}")
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
        raise ValueError("x e y devem ser finitos")
    if np.ptp(x) == 0:
        raise DegenerateError("Todos os valores de x são idênticos")
    return x, y


def _local_linear(x: np.ndarray, y: np.ndarray, h: float, t: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Valor e inclinação do ajuste local-linear em cada ponto de t."""
    t = np.atleast_1d(np.asarray(t, dtype=float))
    values = np.empty(t.shape)
    slopes = np.empty(t.shape)
    chunk = max(1, _CHUNK_BUDGET // x.size)
    for start in range(0, t.size, chunk):
        tc = t[start:start + chunk]
        d = x[None, :] - tc[:, None]
        u = 0.5 * (d / h) ** 2
        # normaliza pelo vizinho mais próximo: evita underflow com bandwidth pequeno
        u -= u.min(axis=1, keepdims=True)
        k = np.exp(-u)
        kd = k * d
        s0 = k.sum(axis=1)
        s1 = kd.sum(axis=1)
        s2 = (kd * d).sum(axis=1)
        t0 = k @ y
        t1 = kd @ y
        det = s0 * s2 - s1 ** 2
        regular = det > 1e-10 * s0 * s2
        safe_det = np.where(regular, det, 1.0)
        # desenho local singular: cai para o estimador local-constante
        values[start:start + chunk] = np.where(regular, (s2 * t0 - s1 * t1) / safe_det, t0 / s0)
        slopes[start:start + chunk] = np.where(regular, (s0 * t1 - s1 * t0) / safe_det, 0.0)
    return values, slopes


def _fit_local_linear(x: np.ndarray, y: np.ndarray, h: float) -> RegressionFit:
    ends, end_slopes = _local_linear(x, y, h, np.array([x.min(), x.max()]))
    if x.size > EXACT_EVAL_LIMIT:
        grid = np.linspace(x.min(), x.max(), EVAL_GRID_POINTS)
        grid_values, _ = _local_linear(x, y, h, grid)

        def evaluate(t):
            return np.interp(t, grid, grid_values)
    else:
        def evaluate(t):
            return _local_linear(x, y, h, t)[0]

    return RegressionFit(
        backend=SmootherBackend.LOCAL_LINEAR,
        tuning=float(h),
        n_train=x.size,
        lower=float(x.min()),
        upper=float(x.max()),
        lower_value=float(ends[0]),
        upper_value=float(ends[1]),
        lower_slope=float(end_slopes[0]),
        upper_slope=float(end_slopes[1]),
        evaluate=evaluate,
    )


def _spline_fit(lam: float, n_train: int, xs: np.ndarray, center: tuple[float, float],
                scale: tuple[float, float], curve: Callable, slope: Callable) -> RegressionFit:
    """Volta das unidades padronizadas para as originais."""
    x_center, y_center = center
    x_scale, y_scale = scale

    def evaluate(t):
        return y_center + y_scale * curve((np.asarray(t, dtype=float) - x_center) / x_scale)

    ends = np.array([xs[0], xs[-1]])
    values = evaluate(ends)
    slopes = y_scale / x_scale * slope((ends - x_center) / x_scale)
    return RegressionFit(
        backend=SmootherBackend.SPLINE,
        tuning=float(lam),
        n_train=n_train,
        lower=float(xs[0]),
        upper=float(xs[-1]),
        lower_value=float(values[0]),
        upper_value=float(values[1]),
        lower_slope=float(slopes[0]),
        upper_slope=float(slopes[1]),
        evaluate=evaluate,
    )


def _fit_spline(x: np.ndarray, y: np.ndarray, lam: float) -> RegressionFit:
    """
    Spline suavizante ajustada com x e y padronizados.

    Com λ grande a solução é a reta de mínimos quadrados ponderada, calculada
    diretamente. O resultado do scipy também é trocado pela reta quando viola as
    condições que a solução exata satisfaz: resíduo ortogonal a 1 e a x, e soma
    de quadrados não maior que a da reta.
    """
    # make_smoothing_spline exige abscissas estritamente crescentes: agrega repetidas com peso
    xs, inverse, counts = np.unique(x, return_inverse=True, return_counts=True)
    if xs.size < MIN_POINTS:
        raise DegenerateError(f"Spline requer pelo menos {MIN_POINTS} valores distintos de x, recebido {xs.size}")
    w = counts.astype(float)
    ys = np.bincount(inverse, weights=y) / counts
    total = float(w.sum())

    x_center = float(np.average(xs, weights=w))
    x_scale = float(np.sqrt(np.average((xs - x_center) ** 2, weights=w)))
    y_center = float(np.average(ys, weights=w))
    y_scale = float(np.sqrt(np.average((ys - y_center) ** 2, weights=w))) or 1.0
    u = (xs - x_center) / x_scale
    v = (ys - y_center) / y_scale
    # u tem média 0 e variância 1 com os pesos w
    line_slope = float(np.sum(w * u * v) / total)
    center, scale = (x_center, y_center), (x_scale, y_scale)

    # ∫f''² escala com (escala de x)^-3
    lam_u = lam / x_scale ** 3
    if lam_u < LINEAR_PENALTY * total:
        spline = make_smoothing_spline(u, v, w=w, lam=lam_u)
        if _spline_is_stable(spline(u), u, v, w, line_slope):
            return _spline_fit(lam, x.size, xs, center, scale, spline, spline.derivative())
        logger.debug(f"Spline instável com lam={lam:.4g} (n={x.size}); usando a reta de mínimos quadrados")

    return _spline_fit(
        lam, x.size, xs, center, scale,
        curve=lambda t: line_slope * t,
        slope=lambda t: np.full(np.shape(t), line_slope),
    )


def _spline_is_stable(fitted: np.ndarray, u: np.ndarray, v: np.ndarray, w: np.ndarray, line_slope: float) -> bool:
    if not np.all(np.isfinite(fitted)):
        return False
    total = w.sum()
    r = v - fitted
    moments = max(abs(np.sum(w * r)), abs(np.sum(w * u * r))) / total
    rss = np.sum(w * r ** 2)
    rss_line = np.sum(w * (v - line_slope * u) ** 2)
    return bool(moments < _SPLINE_TOLERANCE and rss <= rss_line + _SPLINE_TOLERANCE * total)


_FITTERS = {
    SmootherBackend.LOCAL_LINEAR: _fit_local_linear,
    SmootherBackend.SPLINE: _fit_spline,
}


def predict(f: RegressionFit, x) -> np.ndarray:
    """Estimativas pontuais; fora de [lower, upper] extrapola linearmente."""
    x = np.asarray(x, dtype=float)
    flat = np.atleast_1d(x).ravel()
    out = np.empty(flat.shape)
    below = flat < f.lower
    above = flat > f.upper
    inside = ~(below | above)
    if inside.any():
        out[inside] = f.evaluate(flat[inside])
    out[below] = f.lower_value + f.lower_slope * (flat[below] - f.lower)
    out[above] = f.upper_value + f.upper_slope * (flat[above] - f.upper)
    return out.reshape(x.shape) if x.ndim else out


def tuning_grid(x: np.ndarray, backend: SmootherBackend) -> np.ndarray:
    """25 candidatos log-espaçados, do menos para o mais suave."""
    sd = float(np.std(x))
    if backend == SmootherBackend.LOCAL_LINEAR:
        silverman = 1.06 * sd * x.size ** (-1 / 5)
        return np.geomspace(0.05 * silverman, 20 * silverman, GRID_SIZE)
    # ∫f''² escala com (escala de x)^-3; o topo coincide com a reta de mínimos quadrados
    return sd ** 3 * x.size * np.logspace(-8, np.log10(LINEAR_PENALTY), GRID_SIZE)


def _cv_error(x: np.ndarray, y: np.ndarray, folds: np.ndarray, n_folds: int,
              backend: SmootherBackend, tuning: float) -> float:
    total = 0.0
    for k in range(n_folds):
        test = folds == k
        train = ~test
        try:
            xt, yt = _validate(x[train], y[train])
            f = _FITTERS[backend](xt, yt, tuning)
        except DegenerateError:
            return np.inf
        total += float(np.sum((y[test] - predict(f, x[test])) ** 2))
    return total


def _prefer_smooth(errors: np.ndarray) -> int:
    """Índice do menor erro; empates vão para o candidato mais suave (maior índice)."""
    best = np.min(errors)
    tolerance = 1e-12 * abs(best) if np.isfinite(best) else 0.0
    tied = np.flatnonzero(errors <= best + tolerance)
    return int(tied[-1])


def select_tuning(x, y, cfg: SmootherConfig, grid: Optional[Sequence[float]] = None) -> float:
    """
    Validação cruzada k-fold sobre a grade de candidatos.

    Com mais de cfg.cv_max_samples pontos a seleção roda numa subamostra semeada de
    tamanho m e o valor escolhido é reescalado para n: bandwidth por (m/n)^(1/5),
    penalidade por (n/m)^(1/5). Uma grade explícita não é reescalada.
    """
    x, y = _validate(x, y)
    if cfg.cv_folds > x.size:
        raise ValueError(f"cv_folds={cfg.cv_folds} maior que n={x.size}")
    rng = np.random.default_rng(cfg.seed)
    n = x.size
    if n > cfg.cv_max_samples:
        keep = np.sort(rng.choice(n, size=cfg.cv_max_samples, replace=False))
        xs, ys = x[keep], y[keep]
    else:
        xs, ys = x, y
    m = xs.size

    candidates = tuning_grid(xs, cfg.backend) if grid is None else np.asarray(grid, dtype=float)
    if candidates.size == 1:
        return float(candidates[0])
    folds = rng.permutation(m) % cfg.cv_folds
    errors = np.array([_cv_error(xs, ys, folds, cfg.cv_folds, cfg.backend, c) for c in candidates])
    best = _prefer_smooth(errors)
    chosen = float(candidates[best])
    logger.debug(f"CV {cfg.backend.value}: candidato {best}/{candidates.size - 1} = {chosen:.4g}")

    if grid is None and m < n:
        if cfg.backend == SmootherBackend.LOCAL_LINEAR:
            chosen *= (m / n) ** (1 / 5)
        else:
            chosen *= (n / m) ** (1 / 5)
    return chosen


def fit(x, y, cfg: Optional[SmootherConfig] = None,
        predictor: Optional[int] = None, response: Optional[int] = None) -> RegressionFit:
    cfg = cfg or SmootherConfig()
    x, y = _validate(x, y)
    if cfg.is_auto:
        folds = min(cfg.cv_folds, x.size)
        tuning = select_tuning(x, y, cfg.model_copy(update={"cv_folds": folds}))
    else:
        tuning = float(cfg.tuning)
    result = _FITTERS[cfg.backend](x, y, tuning)
    return replace(result, predictor=predictor, response=response)
