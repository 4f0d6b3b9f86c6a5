"""
Modelos causais aditivos de referência e geração de dados.

X_i := Σ_{j ∈ pa(i)} f_ij(X_j) + N_i, com N_i = sign(Z)|Z|^α, Z ~ N(0, σ_i²).

As funções causais aleatórias são amostras de processo gaussiano com kernel RBF de
bandwidth 1, aproximadas por 100 features de Fourier aleatórias. Toda aleatoriedade
vem de SeedSequence(seed, spawn_key=...): cada nó e cada papel tem o seu fluxo.
"""
import logging
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import networkx as nx
import numpy as np

from src.arborescence import DirectedTree
from src.data.presets import (
    BIVARIATE_NAMES,
    CHAIN3_CUBIC_SCALE,
    CHAIN3_NAMES,
    CHAIN3_VARIANCES,
    CHILD_SIGMA_RANGE,
    DAG_EXTRA_EDGE_PROB,
    ROOT_SIGMA_RANGE,
    RFF_FEATURES,
    TYPE1_EDGE_PROB,
)
from src.dataset import Dataset
from src.models import EdgeModel, GraphModel, TreeType

logger = logging.getLogger(__name__)

Mechanism = Callable[[np.ndarray], np.ndarray]

# papéis no spawn_key
_TREE, _SIGMA, _FUNCTION, _NOISE, _DAG = range(5)

_EVAL_CHUNK = 100_000


def child_rng(seed: int, *key: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=tuple(key)))


def noise_seed(seed: int, node: int) -> np.random.SeedSequence:
    """Semente do ruído do nó em sample_scm."""
    return np.random.SeedSequence(seed, spawn_key=(_NOISE, node))


# ---------------------------------------------------------------------------
# Árvores
# ---------------------------------------------------------------------------

def gen_tree_type1(p: int, edge_prob: float = TYPE1_EDGE_PROB, seed: int = 0) -> DirectedTree:
    """Muitas folhas: varre j < i; i = j+1 sem pai recebe j, senão Bernoulli(edge_prob)."""
    if p < 2:
        raise ValueError(f"p deve ser >= 2, recebido {p}")
    rng = child_rng(seed, _TREE)
    parent: list[Optional[int]] = [None] * p
    for j in range(p):
        for i in range(j + 1, p):
            if parent[i] is not None:
                continue
            if i == j + 1 or rng.random() < edge_prob:
                parent[i] = j
    return DirectedTree(tuple(parent))


def gen_tree_type2(p: int, seed: int = 0) -> DirectedTree:
    """Muitos nós internos: o pai de i é uniforme em {0, …, i−1}."""
    if p < 2:
        raise ValueError(f"p deve ser >= 2, recebido {p}")
    rng = child_rng(seed, _TREE)
    parent: list[Optional[int]] = [None]
    for i in range(1, p):
        parent.append(int(rng.integers(0, i)))
    return DirectedTree(tuple(parent))


def gen_tree(tree_type: TreeType, p: int, seed: int) -> DirectedTree:
    if tree_type == TreeType.TYPE1:
        return gen_tree_type1(p, seed=seed)
    if tree_type == TreeType.TYPE2:
        return gen_tree_type2(p, seed=seed)
    raise ValueError(f"{tree_type.value} não gera uma árvore; use gen_truth")


# ---------------------------------------------------------------------------
# Funções causais e ruído
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CausalFunction:
    """f(x) = √(2/M)·Σ a_m cos(ω_m x + b_m)."""
    amplitude: np.ndarray
    frequency: np.ndarray
    phase: np.ndarray

    def __call__(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        flat = x.ravel()
        out = np.empty(flat.shape)
        scale = np.sqrt(2.0 / self.amplitude.size)
        for start in range(0, flat.size, _EVAL_CHUNK):
            chunk = flat[start:start + _EVAL_CHUNK]
            out[start:start + _EVAL_CHUNK] = scale * (np.cos(np.outer(chunk, self.frequency) + self.phase) @ self.amplitude)
        return out.reshape(x.shape)


@dataclass(frozen=True)
class PolynomialFunction:
    """f(x) = cubic·x³ + linear·x."""
    cubic: float = 0.0
    linear: float = 1.0

    def __call__(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return self.cubic * x ** 3 + self.linear * x


def sample_causal_function(seed, features: int = RFF_FEATURES) -> CausalFunction:
    rng = np.random.default_rng(seed)
    frequency = rng.normal(size=features)
    phase = rng.uniform(0.0, 2 * np.pi, size=features)
    amplitude = rng.normal(size=features)
    return CausalFunction(amplitude=amplitude, frequency=frequency, phase=phase)


def is_nowhere_constant(f: Mechanism, lo: float = -3.0, hi: float = 3.0,
                        points: int = 1000, run: int = 10) -> bool:
    """Falso se houver `run` pontos consecutivos da grade com o mesmo valor."""
    values = f(np.linspace(lo, hi, points))
    flat = np.diff(values) == 0
    streak = 0
    for is_flat in flat:
        streak = streak + 1 if is_flat else 0
        if streak >= run - 1:
            return False
    return True


def sample_noise(alpha: float, sigma: float, n: int, seed) -> np.ndarray:
    """sign(Z)|Z|^α com Z ~ N(0, σ²); α = 1 é gaussiano."""
    if not alpha > 0 or not sigma > 0:
        raise ValueError(f"alpha e sigma devem ser > 0, recebido alpha={alpha}, sigma={sigma}")
    z = np.random.default_rng(seed).normal(0.0, sigma, size=n)
    return np.sign(z) * np.abs(z) ** alpha


# ---------------------------------------------------------------------------
# Modelos
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ScmSpec:
    """parents[i] e functions[i] andam juntos: um mecanismo por pai, efeitos somados."""
    parents: tuple[tuple[int, ...], ...]
    functions: tuple[tuple[Mechanism, ...], ...]
    sigmas: tuple[float, ...]
    alphas: tuple[float, ...]
    names: tuple[str, ...] = ()
    seed: int = 0

    def __post_init__(self):
        p = len(self.parents)
        names = tuple(self.names) or tuple(f"X{k + 1}" for k in range(p))
        if not (len(self.functions) == len(self.sigmas) == len(self.alphas) == len(names) == p):
            raise ValueError("parents, functions, sigmas, alphas e names devem ter o mesmo tamanho")
        for i, (pa, fs) in enumerate(zip(self.parents, self.functions)):
            if len(pa) != len(fs):
                raise ValueError(f"Nó {i}: {len(pa)} pais e {len(fs)} mecanismos")
        if any(not s > 0 for s in self.sigmas) or any(not a > 0 for a in self.alphas):
            raise ValueError("sigmas e alphas devem ser > 0")
        object.__setattr__(self, "names", names)
        if not nx.is_directed_acyclic_graph(self.graph()):
            raise ValueError("O grafo causal contém ciclo")

    @property
    def p(self) -> int:
        return len(self.parents)

    @property
    def edges(self) -> list[tuple[int, int]]:
        return [(j, i) for i, pa in enumerate(self.parents) for j in pa]

    def graph(self) -> nx.DiGraph:
        g = nx.DiGraph()
        g.add_nodes_from(range(self.p))
        g.add_edges_from(self.edges)
        return g

    @property
    def is_tree(self) -> bool:
        return sum(not pa for pa in self.parents) == 1 and all(len(pa) <= 1 for pa in self.parents)

    @property
    def tree(self) -> DirectedTree:
        if not self.is_tree:
            raise ValueError("O modelo não é uma árvore direcionada")
        return DirectedTree(tuple(pa[0] if pa else None for pa in self.parents), self.names)

    def order(self) -> list[int]:
        return list(nx.lexicographical_topological_sort(self.graph()))

    def to_model(self) -> GraphModel:
        roots = [self.names[i] for i, pa in enumerate(self.parents) if not pa]
        return GraphModel(
            names=list(self.names),
            root=roots[0] if self.is_tree else None,
            edges=[EdgeModel(source=self.names[j], target=self.names[i]) for j, i in self.edges],
        )

    def to_dot(self) -> str:
        lines = ["digraph {"]
        lines += [f'  "{self.names[j]}" -> "{self.names[i]}";' for j, i in self.edges]
        lines.append("}")
        return "\n".join(lines) + "\n"


def _sigma(rng: np.random.Generator, is_root: bool) -> float:
    lo, hi = ROOT_SIGMA_RANGE if is_root else CHILD_SIGMA_RANGE
    return float(rng.uniform(lo, hi))


def _function(seed: int, edge_key: tuple[int, ...]) -> CausalFunction:
    for attempt in range(100):
        f = sample_causal_function(np.random.SeedSequence(seed, spawn_key=(_FUNCTION, *edge_key, attempt)))
        if is_nowhere_constant(f):
            return f
    raise RuntimeError(f"Não foi possível amostrar função não constante para {edge_key}")


def _random_mechanisms(parents: Sequence[Sequence[int]], alpha: float, seed: int,
                       names: Sequence[str] = ()) -> ScmSpec:
    sigma_rng = child_rng(seed, _SIGMA)
    sigmas = tuple(_sigma(sigma_rng, not pa) for pa in parents)
    functions = tuple(tuple(_function(seed, (j, i)) for j in pa) for i, pa in enumerate(parents))
    return ScmSpec(
        parents=tuple(tuple(pa) for pa in parents),
        functions=functions,
        sigmas=sigmas,
        alphas=(float(alpha),) * len(parents),
        names=tuple(names),
        seed=seed,
    )


def random_scm(tree: DirectedTree, alpha: float = 1.0, seed: int = 0) -> ScmSpec:
    """Funções RFF por aresta; σ da raiz em (1, 2), dos demais em (1/5, √2/5)."""
    parents = [() if v is None else (v,) for v in tree.parent]
    return _random_mechanisms(parents, alpha, seed, tree.names)


def single_rooted_dag(p: int, seed: int = 0, extra_prob: float = DAG_EXTRA_EDGE_PROB,
                      alpha: float = 1.0) -> ScmSpec:
    """Experimental: árvore tipo 1 mais cada par j < i restante com probabilidade extra_prob."""
    tree = gen_tree_type1(p, seed=seed)
    rng = child_rng(seed, _DAG)
    parents = [[] if v is None else [v] for v in tree.parent]
    for j in range(p):
        for i in range(j + 1, p):
            if j not in parents[i] and rng.random() < extra_prob:
                parents[i].append(j)
    return _random_mechanisms([sorted(pa) for pa in parents], alpha, seed)


def chain3_preset(seed: int = 0) -> ScmSpec:
    """X := N_X, Y := X³/Var(X³) + N_Y, Z := Y + N_Z com variâncias (1.5, 0.5, 0.5)."""
    return ScmSpec(
        parents=((), (0,), (1,)),
        functions=((), (PolynomialFunction(cubic=CHAIN3_CUBIC_SCALE, linear=0.0),), (PolynomialFunction(),)),
        sigmas=tuple(float(np.sqrt(v)) for v in CHAIN3_VARIANCES),
        alphas=(1.0, 1.0, 1.0),
        names=CHAIN3_NAMES,
        seed=seed,
    )


def bivariate_preset(lam: float, alpha: float = 1.0, seed: int = 0) -> ScmSpec:
    """X := sign(N_X)|N_X|^α, Y := (1−λ)X³ + λX + N_Y, ruídos normais padrão."""
    if not 0 <= lam <= 1:
        raise ValueError(f"lambda deve estar em [0, 1], recebido {lam}")
    return ScmSpec(
        parents=((), (0,)),
        functions=((), (PolynomialFunction(cubic=1.0 - lam, linear=lam),)),
        sigmas=(1.0, 1.0),
        alphas=(float(alpha), 1.0),
        names=BIVARIATE_NAMES,
        seed=seed,
    )


def gen_truth(tree_type: TreeType, p: int, alpha: float = 1.0, seed: int = 0) -> ScmSpec:
    """Modelo verdadeiro de uma repetição de benchmark: árvore aleatória ou DAG de raiz única."""
    if tree_type == TreeType.DAG:
        return single_rooted_dag(p, seed=seed, alpha=alpha)
    return random_scm(gen_tree(tree_type, p, seed), alpha=alpha, seed=seed)


def sample_scm(spec: ScmSpec, n: int, seed: Optional[int] = None) -> Dataset:
    """Gera n linhas em ordem topológica; colunas com os nomes dos nós."""
    seed = spec.seed if seed is None else seed
    values = np.zeros((n, spec.p))
    for i in spec.order():
        signal = np.zeros(n)
        for j, f in zip(spec.parents[i], spec.functions[i]):
            signal += f(values[:, j])
        values[:, i] = signal + sample_noise(spec.alphas[i], spec.sigmas[i], n, noise_seed(seed, i))
    logger.debug(f"SCM amostrado: p={spec.p}, n={n}, seed={seed}")
    return Dataset(spec.names, values)
