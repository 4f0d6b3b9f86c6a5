"""
Entropia diferencial (nats) pelo estimador de k vizinhos de Kozachenko–Leonenko
e informação mútua derivada dele. Suporta amostras de dimensão 1 e 2.
"""
import logging

import numpy as np
from scipy.spatial import cKDTree
from scipy.special import digamma

from src.errors import DegenerateError
from src.models import EntropyConfig

logger = logging.getLogger(__name__)

# log do volume da bola unitária euclidiana
_LOG_UNIT_BALL = {1: np.log(2.0), 2: np.log(np.pi)}

JITTER_SCALE = 1e-10


def _as_matrix(samples) -> np.ndarray:
    z = np.asarray(samples, dtype=float)
    if z.ndim == 1:
        z = z[:, None]
    if z.ndim != 2 or z.shape[1] not in _LOG_UNIT_BALL:
        raise ValueError(f"Amostra deve ter dimensão 1 ou 2, recebido shape={z.shape}")
    if not np.all(np.isfinite(z)):
        raise ValueError("Amostra contém valores não finitos")
    return z


def _check_geometry(z: np.ndarray) -> np.ndarray:
    sd = z.std(axis=0)
    if np.any(sd == 0):
        raise DegenerateError("Amostra com coordenada constante: entropia diferencial é -inf")
    if z.shape[1] == 2:
        eig = np.linalg.eigvalsh(np.corrcoef(z, rowvar=False))
        if eig[0] <= 1e-10 * eig[-1]:
            raise DegenerateError("Geometria degenerada: as duas coordenadas são colineares")
    return sd


def _jitter(z: np.ndarray, sd: np.ndarray, seed: int) -> np.ndarray:
    """Desfaz pontos repetidos somando u·1e-10·sd, u ~ U(-1, 1) de um gerador semeado."""
    _, first = np.unique(z, axis=0, return_index=True)
    repeated = np.ones(z.shape[0], dtype=bool)
    repeated[first] = False
    if not repeated.any():
        return z
    logger.debug(f"{int(repeated.sum())} pontos repetidos recebem jitter")
    u = np.random.default_rng(seed).uniform(-1.0, 1.0, size=(int(repeated.sum()), z.shape[1]))
    z = z.copy()
    z[repeated] += u * JITTER_SCALE * sd
    return z


def entropy_knn(samples, cfg: EntropyConfig = EntropyConfig()) -> float:
    """ĥ = ψ(n) − ψ(k) + log c_d + (d/n)·Σ log ρ_k."""
    z = _as_matrix(samples)
    n, d = z.shape
    if cfg.k >= n:
        raise ValueError(f"k={cfg.k} deve ser menor que n={n}")
    sd = _check_geometry(z)
    z = _jitter(z, sd, cfg.seed)

    dist, _ = cKDTree(z).query(z, k=cfg.k + 1)
    rho = dist[:, -1]
    if np.any(rho <= 0):
        raise DegenerateError(f"Mais de {cfg.k} pontos coincidentes mesmo após o jitter")
    return float(digamma(n) - digamma(cfg.k) + _LOG_UNIT_BALL[d] + d * np.mean(np.log(rho)))


def _canonical(x: np.ndarray, y: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    return (y, x) if y.tobytes() < x.tobytes() else (x, y)


def mutual_information(x, y, cfg: EntropyConfig = EntropyConfig()) -> float:
    """I(x; y) = ĥ(x) + ĥ(y) − ĥ(x, y). Valor bruto, pode ser levemente negativo."""
    x = np.asarray(x, dtype=float).ravel()
    y = np.asarray(y, dtype=float).ravel()
    if x.size != y.size:
        raise ValueError(f"x e y com tamanhos diferentes: {x.size} != {y.size}")
    x, y = _canonical(x, y)
    return entropy_knn(x, cfg) + entropy_knn(y, cfg) - entropy_knn(np.column_stack([x, y]), cfg)
