"""Command-line interface: expand, batch, evaluate, bench, model-info.

Exit codes (stable):

    0  success
    1  unexpected failure
    2  usage or configuration error
    3  model could not be loaded
    4  query not embeddable (all tokens out of vocabulary)
    5  suggestion provider failure
    6  input/output file error
    7  expansion failed (too few vectors for the requested clusters)
"""

import argparse
import csv
import io
import json
import logging
import os
import secrets
import sys
from concurrent.futures import ThreadPoolExecutor
from enum import IntEnum
from typing import List, Optional

from . import __version__
from .bench import run_bench, rows_to_csv
from .errors import (ClusteringError, ConfigError, CorpusError, ModelLoadError, NotEmbeddableError,
                     ProviderError, QueryExpansionError)
from .evaluation import evaluate_batch, load_corpus, load_queries
from .pipeline import Expander, PipelineConfig, make_provider, query_seed
from .vector_model import load_model

logger = logging.getLogger("qexpand")

ENV_PREFIX = "QEXPAND_"


class ExitCode(IntEnum):
    OK = 0
    FAILURE = 1
    CONFIG = 2
    MODEL_LOAD = 3
    OOV = 4
    PROVIDER = 5
    IO = 6
    EXPANSION = 7


def exit_code_for(exc: BaseException) -> ExitCode:
    if isinstance(exc, ConfigError):
        return ExitCode.CONFIG
    if isinstance(exc, ModelLoadError):
        return ExitCode.MODEL_LOAD
    if isinstance(exc, NotEmbeddableError):
        return ExitCode.OOV
    if isinstance(exc, ProviderError):
        return ExitCode.PROVIDER
    if isinstance(exc, (CorpusError, OSError)):
        return ExitCode.IO
    if isinstance(exc, ClusteringError):
        return ExitCode.EXPANSION
    return ExitCode.FAILURE


def _seed(text: str) -> int:
    if text == "random":
        return secrets.randbits(32)
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError("seed must be a non-negative integer or 'random'")
    if value < 0:
        raise argparse.ArgumentTypeError("seed must be non-negative")
    return value


def _env(name: str, default=None):
    return os.environ.get(ENV_PREFIX + name, default)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    g = common.add_argument_group("pipeline")
    g.add_argument("--model", dest="model_path", default=_env("MODEL"),
                   help="word2vec text-format model file (env QEXPAND_MODEL)")
    g.add_argument("--provider", choices=("datamuse", "local"), default=_env("PROVIDER", "datamuse"))
    g.add_argument("--lexicon", dest="lexicon_path", default=_env("LEXICON"),
                   help="JSON lexicon for --provider local (env QEXPAND_LEXICON)")
    g.add_argument("--max-suggestions", type=int, default=50, help="suggestions fetched per query (N)")
    g.add_argument("--top-n", type=int, default=25, help="suggestions kept for clustering (n)")
    g.add_argument("--clusters", type=int, default=3, help="number of OR groups (m)")
    g.add_argument("--iterations", type=int, default=10_000)
    g.add_argument("--seed", type=_seed, default=0, help="integer or 'random'")
    g.add_argument("--threads", type=int, default=os.cpu_count() or 1)
    g.add_argument("--output", dest="output_path", help="write primary output here instead of stdout")
    g.add_argument("--verbose", "-v", action="store_true")

    parser = argparse.ArgumentParser(prog="qexpand", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("expand", parents=[common], help="expand one query into a Boolean query")
    p.add_argument("query")

    p = sub.add_parser("batch", parents=[common], help="expand every query of a CSV")
    p.add_argument("queries_csv")

    p = sub.add_parser("evaluate", parents=[common], help="compare techniques against baselines")
    p.add_argument("queries_csv")
    p.add_argument("corpus_csv")
    p.add_argument("--text-col", default="content")
    p.add_argument("--id-col")
    p.add_argument("--title-col")
    p.add_argument("--no-title", action="store_true", help="match on body text only")
    p.add_argument("--report", dest="report_path", help="JSON report path (default: stdout)")
    p.add_argument("--report-csv", help="also write a flattened per-query CSV")

    p = sub.add_parser("bench", parents=[common], help="runtime sweeps")
    p.add_argument("mode", choices=("iterations", "wordcount"))
    p.add_argument("--query", required=True)
    p.add_argument("--values", type=int, nargs="+", help="sweep points")
    p.add_argument("--trials", type=int, default=3)
    p.add_argument("--figure", help="also render the sweep as an image (e.g. .png)")

    p = sub.add_parser("model-info", help="summarize a model file")
    p.add_argument("--model", dest="model_path", default=_env("MODEL"), required=_env("MODEL") is None)
    p.add_argument("--verbose", "-v", action="store_true")
    return parser


def config_from_args(args) -> PipelineConfig:
    cfg = PipelineConfig(
        model_path=args.model_path,
        provider=args.provider,
        lexicon_path=args.lexicon_path,
        max_suggestions=args.max_suggestions,
        top_n=args.top_n,
        clusters=args.clusters,
        iterations=args.iterations,
        seed=args.seed,
        threads=args.threads,
        output_path=args.output_path,
        report_path=getattr(args, "report_path", None),
        include_title=not getattr(args, "no_title", False),
    )
    if not cfg.model_path:
        raise ConfigError("--model is required")
    return cfg.validate()


def _emit(text: str, path: Optional[str], out):
    out = out or sys.stdout
    if path:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        out.write(text)


def _expander(cfg: PipelineConfig) -> Expander:
    return Expander(load_model(cfg.model_path), make_provider(cfg), cfg)


def cmd_expand(cfg: PipelineConfig, query: str, verbose: bool = False, out=None, err=None) -> str:
    err = err or sys.stderr
    exp = _expander(cfg).expand(query, query_seed(cfg.seed, 0))
    if verbose:
        print(f"seed: {cfg.seed}", file=err)
        print(f"suggestions: {len(exp.suggestions)}", file=err)
        print(f"selected: {len(exp.ranked)}", file=err)
        for r in exp.ranked:
            print(f"  {r.token}\t{r.distance:.6f}", file=err)
        print(f"group score: {exp.grouping.score:.9f} over {exp.grouping.m} clusters", file=err)
    _emit(exp.text + "\n", cfg.output_path, out)
    return exp.text


def expand_rows(expander: Expander, queries: List[str], seed: int, threads: int) -> List[tuple]:
    """(query, expansion, error) per query, in input order."""

    def one(item):
        i, q = item
        try:
            return q, expander.expand(q, query_seed(seed, i)).text, ""
        except QueryExpansionError as exc:
            return q, "", f"{type(exc).__name__}: {exc}"

    items = list(enumerate(queries))
    if threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            return list(pool.map(one, items))
    return [one(it) for it in items]


def cmd_batch(cfg: PipelineConfig, queries_csv: str, out=None) -> str:
    records = load_queries(queries_csv)
    rows = expand_rows(_expander(cfg), [r.raw_query for r in records], cfg.seed, cfg.threads)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["query", "expansion", "error"])
    w.writerows(rows)
    text = buf.getvalue()
    _emit(text, cfg.output_path, out)
    return text


def cmd_evaluate(cfg: PipelineConfig, queries_csv: str, corpus_csv: str, text_col: str = "content",
                 id_col: Optional[str] = None, title_col: Optional[str] = None,
                 report_csv: Optional[str] = None, out=None):
    out = out or sys.stdout
    corpus = load_corpus(corpus_csv, text_col, id_col, title_col)
    records = load_queries(queries_csv)
    report = evaluate_batch(records, corpus, _expander(cfg), cfg.seed, cfg.threads, cfg.include_title)
    if report_csv:
        report.write_csv(report_csv)
    text = report.to_json()
    if cfg.report_path:
        with open(cfg.report_path, "w", encoding="utf-8") as fh:
            fh.write(text)
        agg = report.aggregate()
        out.write(f"evaluated {len(report.evaluated)} of {report.records} queries "
                  f"over {report.corpus_size} documents\n")
        for tech, a in agg.items():
            acc = "n/a" if a["mean_accuracy"] is None else f"{a['mean_accuracy']:.4f}"
            out.write(f"{tech:9s} mean_accuracy={acc}\n")
    else:
        out.write(text)
    return report


def cmd_bench(cfg: PipelineConfig, mode: str, query: str, values=None, trials: int = 3,
              figure: Optional[str] = None, out=None):
    rows = run_bench(_expander(cfg), query, mode, values, trials)
    _emit(rows_to_csv(rows), cfg.output_path, out)
    if figure:
        from .plotting import plot_bench

        plot_bench(rows, figure)
    return rows


def cmd_model_info(model_path: str, out=None) -> dict:
    out = out or sys.stdout
    model = load_model(model_path)
    info = {
        "path": model_path,
        "vocab_size": model.vocab_size,
        "dimension": model.dimension,
        "duplicates_skipped": model.duplicate_count,
        "zero_norm_skipped": model.zero_norm_count,
    }
    out.write(json.dumps(info, indent=2) + "\n")
    return info


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    try:
        if args.command == "model-info":
            cmd_model_info(args.model_path)
            return ExitCode.OK
        cfg = config_from_args(args)
        if args.command == "expand":
            cmd_expand(cfg, args.query, args.verbose)
        elif args.command == "batch":
            cmd_batch(cfg, args.queries_csv)
        elif args.command == "evaluate":
            cmd_evaluate(cfg, args.queries_csv, args.corpus_csv, args.text_col, args.id_col,
                         args.title_col, args.report_csv)
        elif args.command == "bench":
            cmd_bench(cfg, args.mode, args.query, args.values, args.trials, args.figure)
    except NotEmbeddableError as exc:
        print(f"error: {exc}", file=sys.stderr)
        print("oov tokens: " + " ".join(exc.oov_tokens), file=sys.stderr)
        return ExitCode.OOV
    except (QueryExpansionError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exit_code_for(exc)
    return ExitCode.OK


if __name__ == "__main__":
    sys.exit(main())
