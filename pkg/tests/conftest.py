import json
import os
from pathlib import Path

import pytest

from qexpand.pipeline import Expander, PipelineConfig, make_provider
from qexpand.suggestions import LocalLexicon
from qexpand.vector_model import load_model

DATA = Path(__file__).parent / "data"
FIXTURE_MODEL = DATA / "fixture_model.txt"
FIXTURE_LEXICON = DATA / "fixture_lexicon.json"
FIXTURE_QUERIES = DATA / "fixture_queries.csv"
FIXTURE_CORPUS = DATA / "fixture_corpus.csv"
BENCH_MODEL = DATA / "bench_model.txt"
BENCH_LEXICON = DATA / "bench_lexicon.json"


def write_model(path, rows, header=None):
    """Write a word2vec text file; ``rows`` is a list of (token, components)."""
    dim = len(rows[0][1]) if rows else 0
    lines = [header if header is not None else f"{len(rows)} {dim}"]
    lines += [tok + " " + " ".join(str(x) for x in comps) for tok, comps in rows]
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


@pytest.fixture
def tiny_model_path(tmp_path):
    return write_model(tmp_path / "tiny.txt", [
        ("a", [1.0, 0.0, 0.0, 0.0]),
        ("b", [0.5, -1.5, 2.0, 0.25]),
        ("c", [0.0, 0.0, 3.0, 4.0]),
    ])


@pytest.fixture(scope="session")
def fixture_model():
    return load_model(FIXTURE_MODEL)


@pytest.fixture(scope="session")
def fixture_lexicon():
    return LocalLexicon.from_file(FIXTURE_LEXICON)


def fixture_config(**overrides):
    kw = dict(model_path=str(FIXTURE_MODEL), provider="local", lexicon_path=str(FIXTURE_LEXICON),
              seed=42, threads=1)
    kw.update(overrides)
    return PipelineConfig(**kw).validate()


@pytest.fixture
def fixture_expander(fixture_model):
    cfg = fixture_config()
    return Expander(fixture_model, make_provider(cfg), cfg)


def fixture_cli_args(*extra):
    return ["--model", str(FIXTURE_MODEL), "--provider", "local", "--lexicon", str(FIXTURE_LEXICON),
            *extra]


def strip_timings(obj):
    """Drop wall-clock fields from a report dict for golden comparison."""
    if isinstance(obj, dict):
        return {k: strip_timings(v) for k, v in obj.items() if k not in ("elapsed_s", "mean_elapsed_s")}
    if isinstance(obj, list):
        return [strip_timings(v) for v in obj]
    return obj


def load_json(path):
    return json.loads(Path(path).read_text(encoding="utf-8"))


ACCEPTANCE_LINES = []


@pytest.fixture
def acceptance():
    """Record one pass/fail line per criterion for the terminal summary."""

    def record(criterion, passed, detail):
        ACCEPTANCE_LINES.append(f"[{'PASS' if passed else 'FAIL'}] criterion {criterion}: {detail}")
        return passed

    return record


def pytest_collection_modifyitems(config, items):
    if os.environ.get("QEXPAND_LIVE") == "1":
        return
    skip = pytest.mark.skip(reason="live network test; set QEXPAND_LIVE=1")
    for item in items:
        if "live" in item.keywords:
            item.add_marker(skip)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
