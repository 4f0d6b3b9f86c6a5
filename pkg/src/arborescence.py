"""
Árvore direcionada de peso mínimo (arborescência) sobre o grafo direcionado completo.

O solver é Chu–Liu–Edmonds com contração de ciclos. A raiz é livre: um nó virtual
liga-se a cada candidato a raiz com custo lexicográfico (1, 0) contra (0, w) das
arestas reais, de modo que a solução usa uma única raiz sempre que possível.
Restrições são aplicadas removendo arestas do conjunto disponível:
  - aresta exigida j→i: remove as demais arestas que entram em i;
  - aresta proibida: remove a aresta;
  - raiz fixada r: remove as arestas que entram em r.
"""
import itertools
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Iterable, Iterator, Optional, Sequence

import numpy as np

from src.config import get_threads
from src.errors import DataError, InfeasibleConstraintsError
from src.models import EdgeModel, TreeModel

logger = logging.getLogger(__name__)

BRUTE_FORCE_MAX_P = 7

Edge = tuple[int, int]


def _default_names(p: int) -> tuple[str, ...]:
    return tuple(f"X{k + 1}" for k in range(p))


@dataclass(frozen=True)
class DirectedTree:
    """parent[i] é o pai de i; None marca a raiz."""
    parent: tuple[Optional[int], ...]
    names: tuple[str, ...] = ()

    def __post_init__(self):
        parent = tuple(None if v is None else int(v) for v in self.parent)
        p = len(parent)
        names = tuple(self.names) or _default_names(p)
        if len(names) != p:
            raise ValueError(f"{len(names)} nomes para {p} nós")
        roots = [i for i, v in enumerate(parent) if v is None]
        if len(roots) != 1:
            raise ValueError(f"Árvore deve ter exatamente uma raiz, encontrado {len(roots)}")
        for i, v in enumerate(parent):
            if v is not None and not (0 <= v < p and v != i):
                raise ValueError(f"Pai inválido {v} para o nó {i}")
        if _has_cycle(parent):
            raise ValueError("Atribuição de pais contém ciclo")
        object.__setattr__(self, "parent", parent)
        object.__setattr__(self, "names", names)

    @property
    def p(self) -> int:
        return len(self.parent)

    @property
    def root(self) -> int:
        return self.parent.index(None)

    @property
    def edges(self) -> list[Edge]:
        """Arestas (pai, filho) na ordem dos filhos."""
        return [(v, i) for i, v in enumerate(self.parent) if v is not None]

    @property
    def edge_set(self) -> frozenset[Edge]:
        return frozenset(self.edges)

    def parent_key(self) -> tuple[int, ...]:
        """Vetor de pais com a raiz codificada como -1 (ordem lexicográfica dos empates)."""
        return tuple(-1 if v is None else v for v in self.parent)

    def with_names(self, names: Sequence[str]) -> "DirectedTree":
        return DirectedTree(self.parent, tuple(names))

    def to_model(self) -> TreeModel:
        return TreeModel(
            root=self.names[self.root],
            edges=[EdgeModel(source=self.names[j], target=self.names[i]) for j, i in self.edges],
        )

    def to_dot(self) -> str:
        lines = ["digraph {"]
        lines += [f'  "{self.names[j]}" -> "{self.names[i]}";' for j, i in self.edges]
        lines.append("}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_edges(cls, p: int, edges: Iterable[Edge], names: Sequence[str] = ()) -> "DirectedTree":
        parent: list[Optional[int]] = [None] * p
        for j, i in edges:
            if parent[i] is not None:
                raise ValueError(f"Nó {i} com dois pais")
            parent[i] = j
        return cls(tuple(parent), tuple(names))

    @classmethod
    def from_model(cls, model: TreeModel, names: Sequence[str]) -> "DirectedTree":
        index = _name_index(names)
        edges = [(index[_known(e.source, index)], index[_known(e.target, index)]) for e in model.edges]
        tree = cls.from_edges(len(names), edges, names)
        if tree.names[tree.root] != model.root:
            raise DataError(f"Raiz declarada '{model.root}' difere da raiz das arestas '{tree.names[tree.root]}'")
        return tree


def _has_cycle(parent: Sequence[Optional[int]]) -> bool:
    p = len(parent)
    for start in range(p):
        v, steps = start, 0
        while v is not None:
            v = parent[v]
            steps += 1
            if steps > p:
                return True
    return False


def _name_index(names: Sequence[str]) -> dict[str, int]:
    return {name: k for k, name in enumerate(names)}


def _known(name: str, index: dict[str, int]) -> str:
    name = name.strip()
    if name not in index:
        raise DataError(f"Nó '{name}' não existe; disponíveis: {list(index)}")
    return name


@dataclass(frozen=True)
class EdgeConstraintSet:
    """
    Hipótese de subestrutura: arestas exigidas, arestas proibidas e raiz opcional.

    A construção só verifica índices e laços; conjuntos contraditórios são
    detectados pelos solvers e reportados como InfeasibleConstraintsError.
    """
    required: frozenset[Edge] = frozenset()
    forbidden: frozenset[Edge] = frozenset()
    root: Optional[int] = None
    labels: tuple[str, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "required", frozenset((int(j), int(i)) for j, i in self.required))
        object.__setattr__(self, "forbidden", frozenset((int(j), int(i)) for j, i in self.forbidden))
        for j, i in self.required | self.forbidden:
            if j == i:
                raise DataError(f"Laço {j}->{i} não é uma aresta válida")

    @property
    def is_empty(self) -> bool:
        return not self.required and not self.forbidden and self.root is None

    def check(self, p: int) -> None:
        nodes = [k for edge in self.required | self.forbidden for k in edge]
        if self.root is not None:
            nodes.append(self.root)
        bad = [k for k in nodes if not 0 <= k < p]
        if bad:
            raise DataError(f"Restrição refere-se a nós inexistentes {sorted(set(bad))} (p={p})")

    def describe(self, names: Sequence[str]) -> list[str]:
        if self.labels:
            return list(self.labels)
        out = [f"{names[j]}->{names[i]}" for j, i in sorted(self.required)]
        out += [f"{names[j]}-x>{names[i]}" for j, i in sorted(self.forbidden)]
        if self.root is not None:
            out.append(f"root:{names[self.root]}")
        return out

    @classmethod
    def parse(cls, strings: Iterable[str], names: Sequence[str]) -> "EdgeConstraintSet":
        """Formatos: "A->B" (exige), "A-x>B" (proíbe), "root:A"."""
        index = _name_index(names)
        required, forbidden, root = set(), set(), None
        labels = []
        for raw in strings:
            text = raw.strip()
            if not text:
                continue
            labels.append(text)
            if text.startswith("root:"):
                name = _known(text[len("root:"):], index)
                if root is not None and root != index[name]:
                    raise DataError(f"Duas raízes diferentes nas restrições: '{names[root]}' e '{name}'")
                root = index[name]
            elif "-x>" in text:
                a, _, b = text.partition("-x>")
                forbidden.add((index[_known(a, index)], index[_known(b, index)]))
            elif "->" in text:
                a, _, b = text.partition("->")
                required.add((index[_known(a, index)], index[_known(b, index)]))
            else:
                raise DataError(f"Restrição malformada '{raw}': use 'A->B', 'A-x>B' ou 'root:A'")
        return cls(frozenset(required), frozenset(forbidden), root, tuple(labels))

    @classmethod
    def from_tree(cls, tree: DirectedTree) -> "EdgeConstraintSet":
        """Hipótese de estrutura completa: todas as arestas da árvore e a sua raiz."""
        c = cls(frozenset(tree.edges), frozenset(), tree.root)
        return cls(c.required, c.forbidden, c.root, tuple(c.describe(tree.names)))


def _matrix(w) -> np.ndarray:
    values = getattr(w, "values", w)
    values = np.asarray(values, dtype=float)
    if values.ndim != 2 or values.shape[0] != values.shape[1] or values.shape[0] < 2:
        raise ValueError(f"Matriz de pesos deve ser p×p com p >= 2, recebido {values.shape}")
    return values


def _names(w, p: int) -> tuple[str, ...]:
    return tuple(getattr(w, "names", ())) or _default_names(p)


def tree_total(w, tree: DirectedTree) -> float:
    """Soma dos pesos das arestas na ordem dos filhos; usada por todos os solvers."""
    values = _matrix(w)
    total = 0.0
    for j, i in tree.edges:
        total += float(values[j, i])
    return total


def iter_trees(p: int) -> Iterator[DirectedTree]:
    """Todas as p^(p−1) árvores direcionadas rotuladas, em ordem lexicográfica do vetor de pais."""
    choices = [[-1] + [k for k in range(p) if k != i] for i in range(p)]
    for key in itertools.product(*choices):
        if key.count(-1) != 1:
            continue
        parent = tuple(None if v == -1 else v for v in key)
        if not _has_cycle(parent):
            yield DirectedTree(parent)


def _satisfies(tree: DirectedTree, c: EdgeConstraintSet) -> bool:
    edges = tree.edge_set
    if not c.required <= edges or c.forbidden & edges:
        return False
    return c.root is None or tree.root == c.root


def _precheck(p: int, c: EdgeConstraintSet) -> None:
    """Contradições evidentes, com mensagem que aponta a causa."""
    c.check(p)
    heads: dict[int, int] = {}
    for j, i in sorted(c.required):
        if i in heads:
            raise InfeasibleConstraintsError(f"Nó {i} teria dois pais exigidos: {heads[i]}->{i} e {j}->{i}")
        heads[i] = j
    both = c.required & c.forbidden
    if both:
        raise InfeasibleConstraintsError(f"Arestas exigidas e proibidas ao mesmo tempo: {sorted(both)}")
    if c.root is not None and c.root in heads:
        raise InfeasibleConstraintsError(f"Raiz {c.root} tem aresta exigida {heads[c.root]}->{c.root}")
    for start in heads:
        v, steps = start, 0
        while v in heads:
            v = heads[v]
            steps += 1
            if steps > p:
                raise InfeasibleConstraintsError(f"Arestas exigidas formam um ciclo passando pelo nó {start}")


def _edge_pool(values: np.ndarray, c: EdgeConstraintSet):
    """Arestas disponíveis em ordem (cabeça, cauda); a cauda p é a raiz virtual."""
    p = values.shape[0]
    required_parent = {i: j for j, i in c.required}
    tails, heads, big, cost = [], [], [], []
    for i in range(p):
        for j in range(p):
            if j == i or (j, i) in c.forbidden or i == c.root:
                continue
            if i in required_parent and required_parent[i] != j:
                continue
            tails.append(j)
            heads.append(i)
            big.append(0)
            cost.append(values[j, i])
        if i not in required_parent and (c.root is None or c.root == i):
            tails.append(p)
            heads.append(i)
            big.append(1)
            cost.append(0.0)
    for i in range(p):
        if i not in heads:
            raise InfeasibleConstraintsError(f"Nó {i} não tem aresta de entrada disponível nem pode ser raiz")
    return (np.array(tails, dtype=np.int64), np.array(heads, dtype=np.int64),
            np.array(big, dtype=np.int64), np.array(cost, dtype=float))


def _best_in_edges(n: int, root: int, heads, big, cost, ids) -> np.ndarray:
    """Posição da melhor aresta de entrada de cada nó; empates vão para a primeira na ordem de varredura."""
    order = np.lexsort((ids, cost, big, heads))
    sorted_heads = heads[order]
    first = np.ones(order.size, dtype=bool)
    first[1:] = sorted_heads[1:] != sorted_heads[:-1]
    best = np.full(n, -1, dtype=np.int64)
    best[sorted_heads[first]] = order[first]
    missing = [v for v in range(n) if v != root and best[v] < 0]
    if missing:
        raise InfeasibleConstraintsError("Há nós que não são alcançáveis a partir de nenhuma raiz permitida")
    return best


def _find_cycles(n: int, root: int, parent: np.ndarray) -> list[list[int]]:
    state = np.zeros(n, dtype=np.int64)  # 0 novo, >0 visitado na caminhada de número state
    cycles = []
    for start in range(n):
        if state[start]:
            continue
        walk = start + 1
        v = start
        while v != root and state[v] == 0:
            state[v] = walk
            v = int(parent[v])
        if v != root and state[v] == walk:
            cycle = [v]
            u = int(parent[v])
            while u != v:
                cycle.append(u)
                u = int(parent[u])
            cycles.append(cycle)
    return cycles




def _chu_liu_edmonds(p: int, tails, heads, big, cost) -> set[int]:
    """Ids das arestas escolhidas (uma por nó real); a raiz virtual é o nó p."""
    n, root = p + 1, p
    ids = np.arange(tails.size)
    stack = []
    while True:
        best = _best_in_edges(n, root, heads, big, cost, ids)
        parent = np.where(best >= 0, tails[np.maximum(best, 0)], -1)
        cycles = _find_cycles(n, root, parent)
        if not cycles:
            chosen = {int(ids[best[v]]) for v in range(n) if v != root}
            break

        label = np.full(n, -1, dtype=np.int64)
        for k, cycle in enumerate(cycles):
            label[cycle] = k
        in_cycle = label >= 0
        next_label = len(cycles)
        for v in range(n):
            if label[v] < 0:
                label[v] = next_label
                next_label += 1
        stack.append((
            dict(zip(ids.tolist(), heads.tolist())),
            [{v: int(ids[best[v]]) for v in cycle} for cycle in cycles],
        ))

        # custo reduzido das arestas que entram num ciclo: desconta a aresta do ciclo substituída
        keep = label[tails] != label[heads]
        entering = keep & in_cycle[heads]
        reduce_big = np.zeros_like(big)
        reduce_cost = np.zeros_like(cost)
        reduce_big[entering] = big[best[heads[entering]]]
        reduce_cost[entering] = cost[best[heads[entering]]]
        big = (big - reduce_big)[keep]
        cost = (cost - reduce_cost)[keep]
        tails, heads, ids = label[tails[keep]], label[heads[keep]], ids[keep]
        n, root = next_label, int(label[root])

    for head_at_level, cycle_edges in reversed(stack):
        for edges in cycle_edges:
            entering = [e for e in chosen if head_at_level.get(e) in edges]
            skip = head_at_level[entering[0]]
            chosen |= {e for v, e in edges.items() if v != skip}
    return chosen


def min_arborescence(w, c: Optional[EdgeConstraintSet] = None) -> tuple[DirectedTree, float]:
    """
    Árvore de soma mínima em 𝒯(R). Sem restrições resolve o argmin sobre todas as árvores.

    Empates são resolvidos pela ordem de varredura (cabeça, cauda) das arestas.
    """
    values = _matrix(w)
    p = values.shape[0]
    c = c or EdgeConstraintSet()
    _precheck(p, c)
    tails, heads, big, cost = _edge_pool(values, c)
    chosen = _chu_liu_edmonds(p, tails, heads, big, cost)

    roots = [int(heads[e]) for e in chosen if tails[e] == p]
    if len(roots) != 1:
        raise InfeasibleConstraintsError(
            f"Nenhuma árvore com raiz única satisfaz as restrições ({len(roots)} componentes necessárias)"
        )
    tree = DirectedTree.from_edges(p, [(int(tails[e]), int(heads[e])) for e in chosen if tails[e] != p], _names(w, p))
    return tree, tree_total(values, tree)


def brute_force_arborescence(w, c: Optional[EdgeConstraintSet] = None) -> tuple[DirectedTree, float]:
    """Enumeração exaustiva; empates vão para o menor vetor de pais em ordem lexicográfica."""
    values = _matrix(w)
    p = values.shape[0]
    if p > BRUTE_FORCE_MAX_P:
        raise ValueError(f"Enumeração exaustiva limitada a p <= {BRUTE_FORCE_MAX_P}, recebido p={p}")
    c = c or EdgeConstraintSet()
    c.check(p)
    best, best_total = None, np.inf
    for tree in iter_trees(p):
        if not _satisfies(tree, c):
            continue
        total = tree_total(values, tree)
        if total < best_total:
            best, best_total = tree, total
    if best is None:
        raise InfeasibleConstraintsError("Nenhuma árvore direcionada satisfaz as restrições")
    return best.with_names(_names(w, p)), best_total


def second_best_trees(w, threads: Optional[int] = None) -> list[tuple[DirectedTree, float]]:
    """
    Para cada uma das p−1 arestas da árvore ótima, resolve de novo proibindo-a.

    Resultado ordenado pelo total; o primeiro item é a segunda melhor árvore.
    """
    best, _ = min_arborescence(w)
    problems = [EdgeConstraintSet(forbidden=frozenset({edge})) for edge in best.edges]
    with ThreadPoolExecutor(max_workers=get_threads(threads)) as pool:
        results = list(pool.map(lambda c: min_arborescence(w, c), problems))
    return sorted(results, key=lambda item: item[1])
