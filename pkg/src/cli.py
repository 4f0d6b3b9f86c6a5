"""
Linha de comando: cat-trees <subcomando> [opções]

Subcomandos: fit, confidence, test, gap, simulate, benchmark.
Códigos de saída: 0 sucesso/aceita, 1 hipótese rejeitada, 2 erro de uso ou de dados.
JSON vai para --out (ou stdout); logs vão para stderr.
"""
import argparse
import logging
import sys
from pathlib import Path
from typing import Optional, Sequence

from pydantic import BaseModel

from src import inference
from src.arborescence import DirectedTree, EdgeConstraintSet
from src.benchmark import run_benchmark, write_benchmark
from src.config import DEFAULT_ALPHA, DEFAULT_SEED, DEFAULT_SPLIT_FRACTION, LOG_LEVEL
from src.dataset import Dataset, load_csv, save_csv
from src.errors import CatError
from src.gap import DEFAULT_PERMUTATIONS, bivariate_gap_test, empirical_gap
from src.models import (
    BenchmarkGrid,
    EntropyConfig,
    ScoreKind,
    SmootherBackend,
    SmootherConfig,
    TestReport,
    TreeModel,
    TreeType,
)
from src.pipeline import confidence_region, fit_tree
from src.simulate import (
    bivariate_preset,
    chain3_preset,
    gen_truth,
    sample_scm,
    single_rooted_dag,
)

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_REJECT = 1
EXIT_ERROR = 2

PRESETS = ("chain3", "bivariate", "random-tree", "dag")


def _emit(model: BaseModel, out: Optional[str]) -> None:
    text = model.model_dump_json(by_alias=True, indent=2) + "\n"
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _smoother_cfg(args) -> SmootherConfig:
    return SmootherConfig(
        backend=SmootherBackend(args.backend),
        tuning=args.bandwidth if args.bandwidth is not None else "auto",
        seed=args.seed,
    )


def _entropy_cfg(args) -> EntropyConfig:
    return EntropyConfig(k=args.entropy_k, seed=args.seed)


def _comma_list(cast):
    def parse(text: str) -> list:
        try:
            return [cast(item) for item in text.split(",") if item.strip()]
        except ValueError as e:
            raise argparse.ArgumentTypeError(f"Lista inválida '{text}': {e}")
    return parse


# ---------------------------------------------------------------------------
# Subcomandos
# ---------------------------------------------------------------------------

def cmd_fit(args) -> int:
    d = load_csv(args.input, has_header=not args.no_header)
    fitted = fit_tree(d, ScoreKind(args.score), _smoother_cfg(args), _entropy_cfg(args),
                      threads=args.threads, standardize=args.standardize)
    _emit(fitted.to_model(), args.out)
    if args.dot:
        Path(args.dot).write_text(fitted.tree.to_dot(), encoding="utf-8")
    return EXIT_OK


def _region(args, d: Dataset) -> inference.ConfidenceRegion:
    return confidence_region(d, alpha=args.alpha, fraction=args.split_fraction, seed=args.seed,
                             smoother_cfg=_smoother_cfg(args), threads=args.threads,
                             standardize=args.standardize)


def cmd_confidence(args) -> int:
    d = load_csv(args.input, has_header=not args.no_header)
    _emit(_region(args, d).to_model(), args.out)
    return EXIT_OK


class HypothesisBatch(BaseModel):
    reports: list[TestReport]


def _hypotheses(args, names: Sequence[str]) -> list[EdgeConstraintSet]:
    hypotheses = []
    if args.tree:
        model = TreeModel.model_validate_json(Path(args.tree).read_text(encoding="utf-8"))
        hypotheses.append(EdgeConstraintSet.from_tree(DirectedTree.from_model(model, names)))
    for text in args.hypothesis:
        hypotheses.append(EdgeConstraintSet.parse(text.split(","), names))
    if args.constraint or not hypotheses:
        hypotheses.append(EdgeConstraintSet.parse(args.constraint, names))
    return hypotheses


def cmd_test(args) -> int:
    if not 0 < args.alpha < 1:
        raise ValueError(f"alpha deve estar em (0, 1), recebido {args.alpha}")
    d = load_csv(args.input, has_header=not args.no_header)
    # restrições inválidas falham antes do ajuste, que é caro
    hypotheses = _hypotheses(args, d.columns)
    cr = _region(args, d)
    reports = inference.test_many(cr, hypotheses, threads=args.threads)
    if len(reports) == 1:
        _emit(reports[0], args.out)
    else:
        _emit(HypothesisBatch(reports=reports), args.out)
    return EXIT_REJECT if any(r.reject for r in reports) else EXIT_OK


def cmd_gap(args) -> int:
    d = load_csv(args.input, has_header=not args.no_header)
    fitted = fit_tree(d, ScoreKind(args.score), _smoother_cfg(args), _entropy_cfg(args),
                      threads=args.threads, standardize=args.standardize)
    report = empirical_gap(fitted.weights, threads=args.threads)
    if args.bivariate:
        x_name, y_name = args.bivariate
        source = d.standardized() if args.standardize else d
        bivariate = bivariate_gap_test(
            source.column(source.index(x_name)),
            source.column(source.index(y_name)),
            _smoother_cfg(args),
            _entropy_cfg(args),
            permutations=args.permutations,
            seed=args.seed,
            threads=args.threads,
            names=(x_name, y_name),
        )
        report = report.model_copy(update={"bivariate": bivariate})
    _emit(report, args.out)
    return EXIT_OK


def cmd_simulate(args) -> int:
    if args.preset == "chain3":
        spec = chain3_preset(seed=args.seed)
    elif args.preset == "bivariate":
        spec = bivariate_preset(args.lam, alpha=args.noise_alpha, seed=args.seed)
    elif args.preset == "random-tree":
        spec = gen_truth(TreeType(args.tree_type), args.p, alpha=args.noise_alpha, seed=args.seed)
    else:
        spec = single_rooted_dag(args.p, seed=args.seed, alpha=args.noise_alpha)

    out = Path(args.out)
    save_csv(sample_scm(spec, args.n), out)
    truth = Path(args.truth) if args.truth else out.with_suffix(".truth.json")
    truth.write_text(spec.to_model().model_dump_json(by_alias=True, indent=2) + "\n", encoding="utf-8")
    if args.dot:
        Path(args.dot).write_text(spec.to_dot(), encoding="utf-8")
    logger.info(f"Simulação {args.preset}: {args.n} linhas em {out}, grafo em {truth}")
    return EXIT_OK


def cmd_benchmark(args) -> int:
    grid = BenchmarkGrid(
        p=args.p,
        n=args.n,
        tree_type=[TreeType(t) for t in args.tree_type],
        alpha=args.noise_alpha,
        reps=args.reps,
        scores=[ScoreKind(s) for s in args.score],
    )
    result = run_benchmark(grid, seed=args.seed, smoother_cfg=_smoother_cfg(args),
                           entropy_cfg=_entropy_cfg(args), threads=args.threads)
    csv_path, json_path = write_benchmark(result, args.out)
    for cell in result.summary.cells:
        sys.stdout.write(
            f"p={cell.p} n={cell.n} {cell.tree_type.value} alpha={cell.alpha} {cell.score.value}: "
            f"SHD mediano={cell.shd_median} IQR={cell.shd_iqr} falhas={cell.failures}\n"
        )
    logger.info(f"Resultados em {csv_path} e {json_path}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------

def _common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--threads", type=int, default=None, help="Workers (padrão: CAT_THREADS ou 1)")
    parser.add_argument("--seed", type=int, default=DEFAULT_SEED)
    parser.add_argument("--verbose", "-v", action="store_true", help="Log DEBUG em stderr")
    parser.add_argument("--backend", choices=[b.value for b in SmootherBackend],
                        default=SmootherBackend.LOCAL_LINEAR.value)
    parser.add_argument("--bandwidth", type=float, default=None,
                        help="Bandwidth/penalidade fixa (padrão: validação cruzada)")
    parser.add_argument("--entropy-k", type=int, default=3)


def _data(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--input", required=True, help="CSV com uma coluna por variável")
    parser.add_argument("--no-header", action="store_true", help="CSV sem cabeçalho (colunas X1..Xp)")
    parser.add_argument("--standardize", action="store_true", help="Padroniza as colunas antes do ajuste")
    parser.add_argument("--out", default=None, help="Arquivo JSON de saída (padrão: stdout)")


def _inference(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--alpha", type=float, default=DEFAULT_ALPHA)
    parser.add_argument("--split-fraction", type=float, default=DEFAULT_SPLIT_FRACTION)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cat-trees",
        description="Aprendizado de árvores causais aditivas por arborescência de peso mínimo",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    fit = sub.add_parser("fit", help="Estima a árvore causal")
    _common(fit)
    _data(fit)
    fit.add_argument("--score", choices=[k.value for k in ScoreKind], default=ScoreKind.GAUSSIAN.value)
    fit.add_argument("--dot", default=None, help="Grava também a árvore em DOT")
    fit.set_defaults(handler=cmd_fit)

    confidence = sub.add_parser("confidence", help="Intervalos simultâneos dos pesos de aresta")
    _common(confidence)
    _data(confidence)
    _inference(confidence)
    confidence.set_defaults(handler=cmd_confidence)

    test = sub.add_parser("test", help="Testa hipóteses de subestrutura")
    _common(test)
    _data(test)
    _inference(test)
    test.add_argument("--constraint", action="append", default=[],
                      help="Restrição da hipótese: 'A->B', 'A-x>B' ou 'root:A' (repetível)")
    test.add_argument("--hypothesis", action="append", default=[],
                      help="Hipótese adicional com restrições separadas por vírgula (repetível)")
    test.add_argument("--tree", default=None, help="JSON de árvore: testa a estrutura completa")
    test.set_defaults(handler=cmd_test)

    gap = sub.add_parser("gap", help="Gap empírico, gaps de inversão e gap bivariado")
    _common(gap)
    _data(gap)
    gap.add_argument("--score", choices=[k.value for k in ScoreKind], default=ScoreKind.ENTROPY.value)
    gap.add_argument("--bivariate", nargs=2, metavar=("X", "Y"), default=None,
                     help="Gap bivariado para o modelo X -> Y com p-valor por permutação")
    gap.add_argument("--permutations", type=int, default=DEFAULT_PERMUTATIONS)
    gap.set_defaults(handler=cmd_gap)

    simulate = sub.add_parser("simulate", help="Gera dados de um modelo de referência")
    _common(simulate)
    simulate.add_argument("--preset", choices=PRESETS, required=True)
    simulate.add_argument("--n", type=int, required=True)
    simulate.add_argument("--p", type=int, default=8)
    simulate.add_argument("--tree-type", choices=[t.value for t in TreeType], default=TreeType.TYPE1.value)
    simulate.add_argument("--noise-alpha", type=float, default=1.0, help="Expoente do ruído sign(Z)|Z|^α")
    simulate.add_argument("--lam", type=float, default=0.5, help="λ do modelo bivariado")
    simulate.add_argument("--out", required=True, help="CSV de saída")
    simulate.add_argument("--truth", default=None, help="JSON do grafo verdadeiro (padrão: <out>.truth.json)")
    simulate.add_argument("--dot", default=None)
    simulate.set_defaults(handler=cmd_simulate)

    benchmark = sub.add_parser("benchmark", help="Grade de simulações com SHD e métricas de ancestrais")
    _common(benchmark)
    benchmark.add_argument("--p", type=_comma_list(int), required=True, help="Ex.: 8,16")
    benchmark.add_argument("--n", type=_comma_list(int), required=True, help="Ex.: 50,500")
    benchmark.add_argument("--tree-type", type=_comma_list(str), default=[TreeType.TYPE1.value])
    benchmark.add_argument("--noise-alpha", type=_comma_list(float), default=[1.0])
    benchmark.add_argument("--score", type=_comma_list(str), default=[ScoreKind.GAUSSIAN.value])
    benchmark.add_argument("--reps", type=int, default=1)
    benchmark.add_argument("--out", default="benchmark_out", help="Diretório de saída")
    benchmark.set_defaults(handler=cmd_benchmark)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_OK if e.code == 0 else EXIT_ERROR

    logging.basicConfig(
        level=logging.DEBUG if args.verbose else LOG_LEVEL,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    try:
        return args.handler(args)
    except (CatError, ValueError, OSError) as e:
        sys.stderr.write(f"erro: {e}\n")
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
