"""
Métricas de avaliação de grafos estimados contra o grafo verdadeiro.

SHD conta, para cada par não ordenado de nós, se o estado (sem aresta, u→v, v→u)
difere entre os dois grafos; uma aresta invertida conta 1.
"""
from typing import Union

import networkx as nx
import numpy as np

from src.arborescence import DirectedTree
from src.models import GraphMetrics
from src.simulate import ScmSpec

GraphLike = Union[DirectedTree, ScmSpec, nx.DiGraph]


def to_digraph(g: GraphLike) -> nx.DiGraph:
    if isinstance(g, nx.DiGraph):
        return g
    if isinstance(g, ScmSpec):
        return g.graph()
    out = nx.DiGraph()
    out.add_nodes_from(range(g.p))
    out.add_edges_from(g.edges)
    return out


def _adjacency(g: nx.DiGraph, nodes: list) -> np.ndarray:
    return nx.to_numpy_array(g, nodelist=nodes, dtype=int, weight=None)


def _common_nodes(a: nx.DiGraph, b: nx.DiGraph) -> list:
    if set(a.nodes) != set(b.nodes):
        raise ValueError("Os grafos devem ter o mesmo conjunto de nós")
    return sorted(a.nodes)


def shd(a: GraphLike, b: GraphLike) -> int:
    ga, gb = to_digraph(a), to_digraph(b)
    nodes = _common_nodes(ga, gb)
    A, B = _adjacency(ga, nodes), _adjacency(gb, nodes)
    differs = (A != B) | (A.T != B.T)
    return int(np.triu(differs, k=1).sum())


def _ancestor_pairs(g: nx.DiGraph) -> set:
    return set(nx.transitive_closure_dag(g).edges)


def ancestor_metrics(estimate: GraphLike, truth: GraphLike) -> GraphMetrics:
    """
    ancestor_tpr: fração dos ancestrais previstos que são ancestrais verdadeiros.
    ancestor_recall: fração dos ancestrais verdadeiros encontrados.
    Ficam None quando o denominador é zero.
    """
    ge, gt = to_digraph(estimate), to_digraph(truth)
    _common_nodes(ge, gt)
    predicted, actual = _ancestor_pairs(ge), _ancestor_pairs(gt)
    hits = len(predicted & actual)
    return GraphMetrics(
        shd=shd(ge, gt),
        ancestor_tpr=hits / len(predicted) if predicted else None,
        ancestor_recall=hits / len(actual) if actual else None,
    )
