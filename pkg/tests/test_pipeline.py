import csv
import io

import pytest

from qexpand.bench import rows_to_csv, run_bench
from qexpand.boolean_query import render
from qexpand.errors import ClusteringError, ConfigError, NotEmbeddableError
from qexpand.pipeline import Expander, PipelineConfig, make_provider, query_seed
from qexpand.plotting import plot_bench
from qexpand.vector_model import load_model

from conftest import BENCH_LEXICON, BENCH_MODEL, FIXTURE_LEXICON, fixture_config


def test_config_defaults():
    cfg = PipelineConfig()
    assert (cfg.max_suggestions, cfg.top_n, cfg.clusters, cfg.iterations, cfg.seed) == (50, 25, 3, 10_000, 0)


@pytest.mark.parametrize("kw", [
    dict(top_n=60), dict(clusters=0), dict(iterations=-1), dict(threads=0), dict(seed=-1),
    dict(provider="wordnet"), dict(lexicon_path=None),
])
def test_config_violations(kw):
    base = dict(provider="local", lexicon_path=str(FIXTURE_LEXICON))
    base.update(kw)
    with pytest.raises(ConfigError):
        PipelineConfig(**base).validate()


def test_query_seed_distinct_and_stable():
    seeds = [query_seed(42, i) for i in range(100)]
    assert len(set(seeds)) == 100
    assert query_seed(42, 0) == 42


def test_expand_includes_query_token(fixture_expander):
    exp = fixture_expander.expand("vaccine")
    assert "vaccine" in exp.ast.terms
    assert len(exp.ast.groups) == 3
    assert exp.text == render(exp.ast)
    tokens = [w.token for c in exp.grouping.clusters for w in c.members]
    assert len(tokens) == len(set(tokens))


def test_expand_multiword_query_tokens(fixture_expander):
    exp = fixture_expander.expand("climate change")
    assert {"climate", "change"} <= set(exp.ast.terms)


def test_expand_oov(fixture_expander):
    with pytest.raises(NotEmbeddableError):
        fixture_expander.expand("blorptastic")


def test_expand_too_few_vectors(fixture_model):
    cfg = fixture_config(clusters=3)
    exp = Expander(fixture_model, lambda q, n: [], cfg)
    with pytest.raises(ClusteringError):
        exp.expand("trial")


def test_flat_expansion(fixture_expander):
    ast = fixture_expander.flat_expansion("prosecution")
    assert len(ast.groups) == 1
    assert ast.groups[0][0] == "prosecution"
    assert "prosecutorial" in ast.groups[0]  # raw list keeps OOV terms


def test_expand_seed_changes_nothing_at_optimum(fixture_expander):
    texts = {fixture_expander.expand("election", seed=s).text for s in range(5)}
    assert len(texts) == 1


@pytest.fixture(scope="module")
def bench_expander():
    cfg = fixture_config(model_path=str(BENCH_MODEL), lexicon_path=str(BENCH_LEXICON), seed=0)
    return Expander(load_model(BENCH_MODEL), make_provider(cfg), cfg)


def test_run_bench_iterations(bench_expander):
    rows = run_bench(bench_expander, "benchquery", "iterations", [100, 300], trials=3)
    assert [r.value for r in rows] == [100, 300]
    assert all(r.iterations == r.value and r.vectors == 26 and r.trials == 3 for r in rows)
    assert all(r.mean_ms > 0 and r.stddev_ms >= 0 for r in rows)


def test_run_bench_wordcount(bench_expander):
    rows = run_bench(bench_expander, "benchquery", "wordcount", [10, 50], trials=1)
    assert [r.vectors for r in rows] == [11, 51]
    assert all(r.iterations == 10_000 for r in rows)


def test_run_bench_rejects_bad_args(bench_expander):
    with pytest.raises(ValueError):
        run_bench(bench_expander, "benchquery", "latency")
    with pytest.raises(ValueError):
        run_bench(bench_expander, "benchquery", "iterations", [10], trials=0)


def test_rows_to_csv(bench_expander):
    rows = run_bench(bench_expander, "benchquery", "wordcount", [10], trials=2)
    parsed = list(csv.DictReader(io.StringIO(rows_to_csv(rows))))
    assert list(parsed[0]) == ["word_count", "vectors", "iterations_run", "mean_ms", "stddev_ms",
                               "per_iteration_us", "trials"]
    assert parsed[0]["word_count"] == "10"


def test_plot_bench(bench_expander, tmp_path):
    rows = run_bench(bench_expander, "benchquery", "iterations", [50, 100], trials=1)
    path = plot_bench(rows, tmp_path / "fig.png", title="sweep")
    assert path.stat().st_size > 1000
    with pytest.raises(ValueError):
        plot_bench([], tmp_path / "empty.png")
