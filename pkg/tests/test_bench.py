"""Benchmark harness: report assembly, emission formats, determinism."""

import csv
import json

import jsonschema
import numpy as np
import pytest

from titlmars.bench import (
    BenchSpec,
    CSV_COLUMNS,
    REPORT_JSON_SCHEMA,
    Report,
    emit,
    load_spec,
    report_to_csv,
    report_to_json,
    report_to_markdown,
    run_benchmark,
)
from titlmars.errors import ValidationError
from titlmars.fitter import make_dataset, save_dataset_csv


@pytest.fixture(scope="module")
def tiny_csv(tmp_path_factory):
    rng = np.random.default_rng(0)
    X = rng.uniform(-1, 1, size=(120, 2))
    y = np.maximum(X[:, 0], 0) - 2.0 * np.maximum(-0.3 - X[:, 1], 0) + X[:, 0] * X[:, 1]
    path = tmp_path_factory.mktemp("data") / "tiny.csv"
    save_dataset_csv(make_dataset(X, y), path)
    return str(path)


@pytest.fixture(scope="module")
def tiny_report(tiny_csv, tmp_path_factory):
    out = tmp_path_factory.mktemp("bench")
    spec = BenchSpec(sources=(tiny_csv,), repetitions=2,
                     presets=("grefenstette",), max_basis=12, measure_time=True)
    return run_benchmark(spec, out_dir=out), out


def test_spec_validation():
    with pytest.raises(ValidationError):
        BenchSpec(sources=())
    with pytest.raises(ValidationError):
        BenchSpec(sources=("f1",), repetitions=0)


def test_load_spec_rejects_unknown_fields(tmp_path):
    p = tmp_path / "spec.json"
    p.write_text(json.dumps({"sources": ["f1"], "bogus": 1}))
    with pytest.raises(ValidationError, match="bogus"):
        load_spec(p)


def test_unknown_source():
    spec = BenchSpec(sources=("not-a-thing",), repetitions=1)
    with pytest.raises(ValidationError, match="unknown benchmark source"):
        run_benchmark(spec)


def test_report_rows_structure(tiny_report):
    report, _ = tiny_report
    methods = {(r.method, r.sense) for r in report.rows}
    assert ("opt", "max") in methods and ("opt", "min") in methods
    assert ("oracle", "max") in methods  # 2-variable model is enumerable
    assert ("ga-grefenstette", "max") in methods
    for r in report.rows:
        if r.method == "opt":
            assert r.gap is not None and r.gap <= 1e-6
            assert r.flags == ""
        if r.method.startswith("ga-"):
            assert r.gap is None
        assert r.time_mean_s >= 0.0


def test_report_dominance(tiny_report):
    report, _ = tiny_report
    by = {(r.method, r.sense): r for r in report.rows}
    for m in ("oracle", "ga-grefenstette"):
        assert by[("opt", "max")].value_mean >= by[(m, "max")].value_best - 1e-9
        assert by[("opt", "min")].value_mean <= by[(m, "min")].value_best + 1e-9


def test_artifacts_written(tiny_report):
    _, out = tiny_report
    files = {p.name for p in out.iterdir()}
    assert any(f.endswith(".model") for f in files)
    assert any(f.endswith(".data.csv") for f in files)
    assert any(f.endswith(".surface.png") for f in files)
    assert any(f.endswith(".values.png") for f in files)


def test_csv_emission_and_round_trip(tiny_report, tmp_path):
    report, _ = tiny_report
    path = emit(report, "csv", tmp_path / "r.csv")
    with open(path) as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == len(report.rows)
    for got, want in zip(rows, report.rows):
        assert got["function"] == want.function
        assert got["method"] == want.method
        assert float(got["value_mean"]) == pytest.approx(want.value_mean, rel=1e-11)
        assert got["flags"] == want.flags
        xs = tuple(float(t) for t in got["x_best"].split(";"))
        assert xs == pytest.approx(want.x_best, rel=1e-11)


def test_csv_header_only_for_empty_report():
    text = report_to_csv(Report(rows=[]))
    assert text == ",".join(CSV_COLUMNS) + "\n"


def test_json_validates_against_schema(tiny_report):
    report, _ = tiny_report
    payload = json.loads(report_to_json(report))
    jsonschema.validate(payload, REPORT_JSON_SCHEMA)
    assert payload["meta"]["repetitions"] == 2


def test_markdown_mirrors_table_layout(tiny_report):
    report, _ = tiny_report
    text = report_to_markdown(report)
    assert "| Measurement |" in text
    assert text.count("| Maximum |") == 1
    assert text.count("| Minimum |") == 1
    assert text.count("| Time(seconds) |") == 2


def test_emit_unknown_format(tiny_report):
    report, _ = tiny_report
    with pytest.raises(ValidationError):
        emit(report, "xml", "/tmp/r.xml")


def test_emit_unwritable_path(tiny_report):
    from titlmars.errors import TitlMarsError

    report, _ = tiny_report
    with pytest.raises(TitlMarsError):
        emit(report, "csv", "/nonexistent-dir/r.csv")


def test_deterministic_csv_without_timing(tiny_csv, tmp_path):
    spec = BenchSpec(sources=(tiny_csv,), repetitions=2, presets=("grefenstette",),
                     max_basis=10, measure_time=False, figures=False)
    a = report_to_csv(run_benchmark(spec, out_dir=tmp_path / "a"))
    b = report_to_csv(run_benchmark(spec, out_dir=tmp_path / "b"))
    assert a == b
