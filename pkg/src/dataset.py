"""
Representação da amostra observacional, leitura/escrita de CSV e divisão da amostra.

O Dataset é imutável depois de construído e pode ser compartilhado entre workers.
"""
import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import NamedTuple, Sequence, Union

import numpy as np
import pandas as pd

from src.errors import DataError, DegenerateError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Dataset:
    """Matriz n×p de reais finitos com nomes de coluna únicos."""
    columns: tuple[str, ...]
    values: np.ndarray
    min_rows: int = field(default=2, repr=False, compare=False)

    def __post_init__(self):
        values = np.array(self.values, dtype=float, copy=True)
        if values.ndim != 2:
            raise DataError(f"Esperada matriz 2-d, recebido ndim={values.ndim}")
        n, p = values.shape
        columns = tuple(str(c) for c in self.columns)
        if len(columns) != p:
            raise DataError(f"{len(columns)} nomes para {p} colunas")
        if p < 2:
            raise DataError(f"São necessárias pelo menos 2 colunas, recebido {p}")
        if n < self.min_rows:
            raise DataError(f"São necessárias pelo menos {self.min_rows} linhas, recebido {n}")
        if len(set(columns)) != p:
            duplicated = sorted({c for c in columns if columns.count(c) > 1})
            raise DataError(f"Nomes de coluna duplicados: {duplicated}")
        bad = np.argwhere(~np.isfinite(values))
        if bad.size:
            row, col = bad[0]
            raise DataError(f"Valor não finito na linha {row + 1}, coluna '{columns[col]}'")
        values.setflags(write=False)
        object.__setattr__(self, "columns", columns)
        object.__setattr__(self, "values", values)

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def p(self) -> int:
        return self.values.shape[1]

    def column(self, i: int) -> np.ndarray:
        return self.values[:, i]

    def index(self, name: str) -> int:
        try:
            return self.columns.index(name)
        except ValueError:
            raise DataError(f"Coluna '{name}' não existe; disponíveis: {list(self.columns)}")

    def take(self, rows: np.ndarray) -> "Dataset":
        return Dataset(self.columns, self.values[np.asarray(rows)], min_rows=1)

    def standardized(self) -> "Dataset":
        """Centraliza e escala cada coluna pelo desvio padrão de divisor n."""
        for i in range(self.p):
            require_variance(self, i)
        centered = self.values - self.values.mean(axis=0)
        return Dataset(self.columns, centered / np.sqrt(np.mean(centered ** 2, axis=0)), min_rows=self.min_rows)

    def permuted(self, order: Sequence[int]) -> "Dataset":
        order = list(order)
        return Dataset(tuple(self.columns[i] for i in order), self.values[:, order], min_rows=self.min_rows)

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(self.values, columns=list(self.columns))

    @classmethod
    def from_frame(cls, frame: pd.DataFrame) -> "Dataset":
        try:
            values = frame.to_numpy(dtype=float)
        except (TypeError, ValueError) as e:
            raise DataError(f"Colunas não numéricas: {e}")
        return cls(tuple(str(c) for c in frame.columns), values)


@dataclass(frozen=True)
class SplitDataset:
    """Par (principal, auxiliar): as regressões são treinadas no auxiliar e avaliadas no principal."""
    main: Dataset
    auxiliary: Dataset

    def __post_init__(self):
        if self.main.columns != self.auxiliary.columns:
            raise DataError("As duas metades devem ter as mesmas colunas")

    @property
    def columns(self) -> tuple[str, ...]:
        return self.main.columns

    @property
    def p(self) -> int:
        return self.main.p


class ColumnVariance(NamedTuple):
    value: float
    degenerate: bool


def load_csv(path: Union[str, Path], has_header: bool = True) -> Dataset:
    """
    Lê um CSV numérico separado por vírgulas.

    Sem cabeçalho, as colunas recebem os nomes X1..Xp. Erros de parsing indicam
    linha e coluna do arquivo (linhas contadas a partir de 1, incluindo o cabeçalho).
    """
    path = Path(path)
    if not path.exists():
        raise DataError(f"Arquivo não encontrado: {path}")
    try:
        raw = pd.read_csv(
            path,
            header=None,
            dtype=str,
            keep_default_na=False,
            skipinitialspace=True,
            skip_blank_lines=True,
        )
    except pd.errors.EmptyDataError:
        raise DataError(f"Arquivo vazio: {path}")
    except pd.errors.ParserError as e:
        raise DataError(f"Linhas com número diferente de campos em {path}: {e}")

    if has_header:
        columns = tuple(str(c).strip() for c in raw.iloc[0])
        body = raw.iloc[1:].reset_index(drop=True)
        line_offset = 2
    else:
        columns = tuple(f"X{i + 1}" for i in range(raw.shape[1]))
        body = raw
        line_offset = 1

    if raw.shape[1] < 2:
        raise DataError(f"São necessárias pelo menos 2 colunas em {path}, encontrado {raw.shape[1]}")
    if body.shape[0] == 0:
        raise DataError(f"Arquivo sem linhas de dados: {path}")

    values = np.empty(body.shape, dtype=float)
    for c in range(body.shape[1]):
        cells = body.iloc[:, c]
        try:
            # float() arredonda corretamente; pd.to_numeric não garante a ida e volta
            parsed = cells.to_numpy(dtype=object).astype(float)
        except ValueError:
            parsed = pd.to_numeric(cells, errors="coerce").to_numpy(dtype=float)
        bad = np.flatnonzero(~np.isfinite(parsed))
        if bad.size:
            row = int(bad[0])
            cell = cells.iloc[row]
            raise DataError(
                f"Valor inválido {cell!r} na linha {row + line_offset}, coluna {c + 1} ('{columns[c]}') de {path}"
            )
        values[:, c] = parsed

    dataset = Dataset(columns, values)
    logger.info(f"CSV carregado: {path} n={dataset.n} p={dataset.p}")
    return dataset


def save_csv(d: Dataset, path: Union[str, Path]) -> None:
    """Escreve cabeçalho e linhas com 17 dígitos significativos (ida e volta exata)."""
    d.to_frame().to_csv(path, index=False, float_format="%.17g")


def split(d: Dataset, fraction: float, seed: int) -> SplitDataset:
    """
    Permutação determinística das linhas; floor(fraction·n) linhas vão para a metade auxiliar.

    As linhas de cada metade mantêm a ordem original.
    """
    if not 0 < fraction < 1:
        raise DataError(f"fraction deve estar em (0, 1), recebido {fraction}")
    # Fraction(str(...)) lê 0.29 como 29/100 e não como o binário mais próximo
    n_aux = math.floor(Fraction(str(fraction)) * d.n)
    if n_aux < 1 or d.n - n_aux < 1:
        raise DataError(f"fraction={fraction} com n={d.n} deixa uma das metades vazia")
    perm = np.random.default_rng(seed).permutation(d.n)
    aux_rows = np.sort(perm[:n_aux])
    main_rows = np.sort(perm[n_aux:])
    return SplitDataset(main=d.take(main_rows), auxiliary=d.take(aux_rows))


def population_variance(x: np.ndarray) -> float:
    """Variância com divisor n, calculada na forma centrada."""
    x = np.asarray(x, dtype=float)
    return float(np.mean((x - x.mean()) ** 2))


def column_variance(d: Dataset, i: int) -> ColumnVariance:
    x = d.column(i)
    value = population_variance(x)
    return ColumnVariance(value, bool(np.ptp(x) == 0 or value <= 0))


def require_variance(d: Dataset, i: int) -> float:
    value, degenerate = column_variance(d, i)
    if degenerate:
        raise DegenerateError(f"Coluna '{d.columns[i]}' é constante (variância {value})")
    return value
