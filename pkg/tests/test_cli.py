import csv
import io
import json

import pytest

from qexpand.cli import ExitCode, main
from qexpand.suggestions import DATAMUSE_URL_ENV

from conftest import (BENCH_LEXICON, BENCH_MODEL, DATA, FIXTURE_CORPUS, FIXTURE_MODEL, FIXTURE_QUERIES,
                      fixture_cli_args, load_json, strip_timings)
from mock_datamuse import MockDatamuse

GOLDEN_EXPAND = (DATA / "golden_expand.txt").read_text(encoding="utf-8")


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_expand_golden(capsys):
    code, out, _ = run(capsys, "expand", "prosecution", *fixture_cli_args("--seed", "42"))
    assert code == ExitCode.OK
    assert out == GOLDEN_EXPAND


@pytest.mark.parametrize("threads", ["1", "8"])
def test_expand_independent_of_threads(capsys, threads):
    _, out, _ = run(capsys, "expand", "prosecution", *fixture_cli_args("--seed", "42", "--threads", threads))
    assert out == GOLDEN_EXPAND


def test_expand_output_file(capsys, tmp_path):
    target = tmp_path / "out.txt"
    code, out, _ = run(capsys, "expand", "prosecution", *fixture_cli_args("--seed", "42", "--output", str(target)))
    assert code == 0 and out == ""
    assert target.read_text() == GOLDEN_EXPAND


def test_expand_verbose(capsys):
    code, out, err = run(capsys, "expand", "prosecution", *fixture_cli_args("--seed", "42", "--verbose"))
    assert out == GOLDEN_EXPAND
    assert "suggestions: 11" in err and "selected: 10" in err and "group score:" in err


def test_expand_oov(capsys):
    code, out, err = run(capsys, "expand", "qqq zzz", *fixture_cli_args())
    assert code == ExitCode.OOV
    assert out == ""
    assert "oov tokens: qqq zzz" in err


def test_expand_model_load_failure(capsys, tmp_path):
    code, _, err = run(capsys, "expand", "x", "--model", str(tmp_path / "missing.txt"),
                       "--provider", "local", "--lexicon", str(DATA / "fixture_lexicon.json"))
    assert code == ExitCode.MODEL_LOAD


def test_config_violation(capsys):
    code, _, err = run(capsys, "expand", "prosecution", *fixture_cli_args("--top-n", "60"))
    assert code == ExitCode.CONFIG
    assert "top_n" in err


def test_local_provider_needs_lexicon(capsys):
    code, _, _ = run(capsys, "expand", "x", "--model", str(FIXTURE_MODEL), "--provider", "local")
    assert code == ExitCode.CONFIG


def test_too_few_vectors(capsys):
    code, _, err = run(capsys, "expand", "prosecution", *fixture_cli_args("--clusters", "20"))
    assert code == ExitCode.EXPANSION


def test_seed_random_accepted(capsys):
    code, out, err = run(capsys, "expand", "election", *fixture_cli_args("--seed", "random", "-v"))
    assert code == 0 and out.startswith("(")
    assert "seed:" in err


def test_bad_seed_is_usage_error(capsys):
    with pytest.raises(SystemExit) as info:
        main(["expand", "x", *fixture_cli_args("--seed", "-3")])
    assert info.value.code == 2


def test_datamuse_provider_against_mock(capsys, monkeypatch):
    words = ["prosecutor", "trial", "court", "judge", "nonexistentword"]
    with MockDatamuse(words) as mock:
        monkeypatch.setenv(DATAMUSE_URL_ENV, mock.url)
        code, out, _ = run(capsys, "expand", "prosecution", "--model", str(FIXTURE_MODEL),
                           "--provider", "datamuse", "--seed", "1")
    assert code == 0
    assert {"prosecutor", "trial", "court", "judge", "prosecution"} <= set(out.replace("'", " ").split())
    assert "max=50" in mock.calls[0]


def test_datamuse_provider_failure_exit_code(capsys, monkeypatch):
    with MockDatamuse([], status=400) as mock:
        monkeypatch.setenv(DATAMUSE_URL_ENV, mock.url)
        code, _, err = run(capsys, "expand", "prosecution", "--model", str(FIXTURE_MODEL), "--provider", "datamuse")
    assert code == ExitCode.PROVIDER


def _write_queries(path, queries):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["query", "expansion"])
        for q in queries:
            w.writerow([q, ""])
    return path


def test_batch_three_queries(capsys, tmp_path):
    path = _write_queries(tmp_path / "q.csv", ["vaccine", "election", "stock market"])
    code, out, _ = run(capsys, "batch", str(path), *fixture_cli_args())
    rows = list(csv.DictReader(io.StringIO(out)))
    assert code == 0
    assert [r["query"] for r in rows] == ["vaccine", "election", "stock market"]
    assert all(r["expansion"] and not r["error"] for r in rows)


def test_batch_threads_byte_identical(capsys, tmp_path):
    path = _write_queries(tmp_path / "q.csv", ["vaccine", "election", "stock market", "prosecution", "climate change"])
    _, one, _ = run(capsys, "batch", str(path), *fixture_cli_args("--threads", "1", "--seed", "5"))
    _, eight, _ = run(capsys, "batch", str(path), *fixture_cli_args("--threads", "8", "--seed", "5"))
    assert one == eight


def test_batch_survives_injected_failures(capsys, tmp_path):
    good = ["vaccine", "election", "stock market", "prosecution", "climate change"]
    queries = []
    for i in range(373):
        if i % 7 == 3:
            queries.append(f"unknownword{i}")      # not embeddable
        elif i % 11 == 5:
            queries.append("change")               # embeddable but too few vectors
        else:
            queries.append(good[i % len(good)])
    path = _write_queries(tmp_path / "q.csv", queries)
    code, out, _ = run(capsys, "batch", str(path), *fixture_cli_args("--iterations", "200", "--threads", "4"))
    rows = list(csv.DictReader(io.StringIO(out)))
    assert code == 0
    assert len(rows) == 373
    assert [r["query"] for r in rows] == queries
    failed = [i for i, r in enumerate(rows) if r["error"]]
    expected = [i for i in range(373) if i % 7 == 3 or i % 11 == 5]
    assert failed == expected
    assert all(rows[i]["error"].startswith("NotEmbeddableError") for i in expected if i % 7 == 3)


def test_batch_missing_file(capsys, tmp_path):
    code, _, _ = run(capsys, "batch", str(tmp_path / "none.csv"), *fixture_cli_args())
    assert code == ExitCode.IO


def test_evaluate_golden(capsys, tmp_path):
    report = tmp_path / "report.json"
    code, out, _ = run(capsys, "evaluate", str(FIXTURE_QUERIES), str(FIXTURE_CORPUS), *fixture_cli_args(
        "--seed", "42", "--id-col", "id", "--title-col", "title", "--report", str(report),
        "--report-csv", str(tmp_path / "r.csv")))
    assert code == 0
    assert "evaluated 5 of 5 queries over 20 documents" in out
    assert strip_timings(load_json(report)) == load_json(DATA / "golden_report.json")
    assert (tmp_path / "r.csv").exists()


def test_evaluate_to_stdout(capsys):
    code, out, _ = run(capsys, "evaluate", str(FIXTURE_QUERIES), str(FIXTURE_CORPUS), *fixture_cli_args(
        "--seed", "42", "--id-col", "id", "--title-col", "title", "--threads", "3"))
    assert code == 0
    assert strip_timings(json.loads(out)) == load_json(DATA / "golden_report.json")


def test_evaluate_missing_corpus(capsys, tmp_path):
    code, _, err = run(capsys, "evaluate", str(FIXTURE_QUERIES), str(tmp_path / "none.csv"), *fixture_cli_args())
    assert code == ExitCode.IO
    assert "cannot open corpus" in err


def test_model_info(capsys):
    code, out, _ = run(capsys, "model-info", "--model", str(FIXTURE_MODEL))
    info = json.loads(out)
    assert code == 0
    assert info["vocab_size"] == 46 and info["dimension"] == 8


def test_bench_cli_writes_csv_and_figure(capsys, tmp_path):
    fig = tmp_path / "bench.png"
    code, out, _ = run(capsys, "bench", "iterations", "--query", "benchquery", "--model", str(BENCH_MODEL),
                       "--provider", "local", "--lexicon", str(BENCH_LEXICON), "--values", "100", "200",
                       "--trials", "2", "--figure", str(fig))
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    assert [int(r["iterations"]) for r in rows] == [100, 200]
    assert all(int(r["vectors"]) == 26 for r in rows)
    assert fig.stat().st_size > 1000
    assert fig.read_bytes()[:8] == b"\x89PNG\r\n\x1a\n"
