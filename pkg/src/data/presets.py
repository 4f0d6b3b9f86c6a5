# src/data/presets.py
"""
Constantes dos modelos de referência e dos protocolos de simulação.

Mantidas como dicts/tuplas Python (determinísticos) para que testes e scripts
de reprodução usem exatamente os mesmos valores.
"""
import numpy as np

# Modelo de três nós X -> Y -> Z em que a busca gulosa falha
CHAIN3_NAMES: tuple[str, ...] = ("X", "Y", "Z")
CHAIN3_VARIANCES: tuple[float, ...] = (1.5, 0.5, 0.5)
# Var(X³) para X ~ N(0, 1.5): E[X⁶] = 15·σ⁶
CHAIN3_CUBIC_SCALE: float = 1.0 / (15 * 1.5 ** 3)

# Pesos gaussianos de referência para o modelo de três nós (n = 10⁶)
CHAIN3_WEIGHTS: dict[tuple[str, str], float] = {
    ("X", "Y"): -0.46,
    ("Y", "Z"): -0.95,
    ("Z", "Y"): -1.00,
    ("Y", "X"): -0.28,
    ("Z", "X"): -0.17,
    ("X", "Z"): -0.26,
}
CHAIN3_BEST_TOTAL: float = -1.41
CHAIN3_SECOND_BEST_TOTAL: float = -1.28

BIVARIATE_NAMES: tuple[str, ...] = ("X", "Y")

# Protocolo de simulação das árvores
RFF_FEATURES: int = 100
ROOT_SIGMA_RANGE: tuple[float, float] = (1.0, 2.0)
CHILD_SIGMA_RANGE: tuple[float, float] = (1 / 5, float(np.sqrt(2)) / 5)
TYPE1_EDGE_PROB: float = 0.1
DAG_EXTRA_EDGE_PROB: float = 0.05


def weight_table(table: dict[tuple[str, str], float], names: tuple[str, ...]) -> np.ndarray:
    """Converte um dict {(origem, destino): peso} numa matriz p×p com diagonal NaN."""
    index = {name: k for k, name in enumerate(names)}
    values = np.full((len(names), len(names)), np.nan)
    for (source, target), weight in table.items():
        values[index[source], index[target]] = weight
    return values
