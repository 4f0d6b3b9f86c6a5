"""
Harness de simulação: árvore (ou DAG de raiz única) verdadeira → dados → CAT → SHD e métricas de ancestrais.

Cada repetição usa a semente SeedSequence(seed, spawn_key=(índices da célula, rep)),
então a tabela não depende da ordem de execução nem do número de threads.
"""
import itertools
import logging
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import NamedTuple, Optional, Union

import numpy as np
import pandas as pd

from src.config import get_threads
from src.metrics import ancestor_metrics
from src.models import (
    BenchmarkCell,
    BenchmarkFailure,
    BenchmarkGrid,
    BenchmarkSummary,
    EntropyConfig,
    ScoreKind,
    SmootherConfig,
    TreeType,
)
from src.pipeline import fit_tree
from src.simulate import gen_truth, sample_scm

logger = logging.getLogger(__name__)

COLUMNS = ["p", "n", "tree_type", "alpha", "score", "rep", "shd", "ancestor_tpr", "ancestor_recall"]


class BenchmarkJob(NamedTuple):
    p: int
    n: int
    tree_type: TreeType
    alpha: float
    score: ScoreKind
    rep: int
    key: tuple[int, ...]


class BenchmarkResult(NamedTuple):
    rows: pd.DataFrame
    summary: BenchmarkSummary


def _jobs(grid: BenchmarkGrid) -> list[BenchmarkJob]:
    jobs = []
    cells = itertools.product(
        enumerate(grid.p), enumerate(grid.n), enumerate(grid.tree_type), enumerate(grid.alpha), grid.scores
    )
    for (ip, p), (i_n, n), (it, tree_type), (ia, alpha), score in cells:
        for rep in range(grid.reps):
            # o score não entra na chave: os escores comparam-se nos mesmos dados
            jobs.append(BenchmarkJob(p, n, tree_type, alpha, score, rep, (ip, i_n, it, ia, rep)))
    return jobs


def _seed(seed: int, key: tuple[int, ...]) -> int:
    return int(np.random.SeedSequence(seed, spawn_key=key).generate_state(1)[0])


def _run_job(job: BenchmarkJob, seed: int, smoother_cfg: SmootherConfig,
             entropy_cfg: EntropyConfig) -> Union[dict, BenchmarkFailure]:
    rep_seed = _seed(seed, job.key)
    try:
        truth = gen_truth(job.tree_type, job.p, alpha=job.alpha, seed=rep_seed)
        d = sample_scm(truth, job.n)
        fitted = fit_tree(d, job.score, smoother_cfg, entropy_cfg, threads=1)
        m = ancestor_metrics(fitted.tree, truth)
    except (ValueError, RuntimeError) as e:
        return BenchmarkFailure(p=job.p, n=job.n, tree_type=job.tree_type, alpha=job.alpha,
                                score=job.score, rep=job.rep, error=str(e))
    return {
        "p": job.p, "n": job.n, "tree_type": job.tree_type.value, "alpha": job.alpha,
        "score": job.score.value, "rep": job.rep, "shd": m.shd,
        "ancestor_tpr": m.ancestor_tpr, "ancestor_recall": m.ancestor_recall,
    }


def _optional(value) -> Optional[float]:
    return None if pd.isna(value) else float(value)


def _summarize(grid: BenchmarkGrid, rows: pd.DataFrame, failures: list[BenchmarkFailure]) -> list[BenchmarkCell]:
    cells = []
    for p, n, tree_type, alpha, score in itertools.product(grid.p, grid.n, grid.tree_type, grid.alpha, grid.scores):
        mask = (
            (rows["p"] == p) & (rows["n"] == n) & (rows["tree_type"] == tree_type.value)
            & (rows["alpha"] == alpha) & (rows["score"] == score.value)
        )
        cell = rows[mask]
        failed = sum(
            f.p == p and f.n == n and f.tree_type == tree_type and f.alpha == alpha and f.score == score
            for f in failures
        )
        shd = cell["shd"].astype(float)
        cells.append(BenchmarkCell(
            p=p, n=n, tree_type=tree_type, alpha=alpha, score=score, reps=len(cell), failures=failed,
            shd_median=_optional(shd.median()),
            shd_iqr=_optional(shd.quantile(0.75) - shd.quantile(0.25)),
            ancestor_tpr_median=_optional(cell["ancestor_tpr"].astype(float).median()),
            ancestor_recall_median=_optional(cell["ancestor_recall"].astype(float).median()),
        ))
    return cells


def run_benchmark(
    grid: BenchmarkGrid,
    seed: int = 0,
    smoother_cfg: Optional[SmootherConfig] = None,
    entropy_cfg: Optional[EntropyConfig] = None,
    threads: Optional[int] = None,
) -> BenchmarkResult:
    """Falhas de uma repetição são registradas no resumo e não interrompem a grade."""
    smoother_cfg = smoother_cfg or SmootherConfig()
    entropy_cfg = entropy_cfg or EntropyConfig()
    jobs = _jobs(grid)
    logger.info(f"Benchmark: {len(jobs)} repetições, seed={seed}")
    with ThreadPoolExecutor(max_workers=get_threads(threads)) as pool:
        outcomes = list(pool.map(lambda job: _run_job(job, seed, smoother_cfg, entropy_cfg), jobs))

    failures = [o for o in outcomes if isinstance(o, BenchmarkFailure)]
    for f in failures:
        logger.warning(f"Repetição falhou (p={f.p}, n={f.n}, {f.score.value}, rep={f.rep}): {f.error}")
    rows = pd.DataFrame([o for o in outcomes if isinstance(o, dict)], columns=COLUMNS)
    summary = BenchmarkSummary(seed=seed, grid=grid, cells=_summarize(grid, rows, failures), failures=failures)
    return BenchmarkResult(rows=rows, summary=summary)


def write_benchmark(result: BenchmarkResult, out_dir: Union[str, Path]) -> tuple[Path, Path]:
    """Grava benchmark.csv (uma linha por repetição) e benchmark.json (resumo por célula)."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    csv_path = out_dir / "benchmark.csv"
    json_path = out_dir / "benchmark.json"
    result.rows.to_csv(csv_path, index=False, float_format="%.17g")
    json_path.write_text(result.summary.model_dump_json(indent=2) + "\n", encoding="utf-8")
    return csv_path, json_path
