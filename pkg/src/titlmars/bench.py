"""Benchmark harness: sample, fit, certified solve vs GA presets, report.

A benchmark source is an analytic function name (f1..f4), a built-in wind
scenario (fw1..fw4), a scenario file path, or a dataset CSV path.  Each
source is fitted once; the certified solver runs once per sense, the GA once
per (preset, sense, repetition) with seeds 1..repetitions.  Reports carry
the mean and best GA values, wall times, and the solver's certificate gap,
and can be emitted as CSV, JSON, or a markdown table; on the CSV/figure
path the harness also renders surface and value-distribution figures.
"""

from __future__ import annotations

import json
import math
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import CapacityError, CertificateError, TitlMarsError, ValidationError
from .fitter import Dataset, FitConfig, fit, load_dataset_csv, make_dataset, save_dataset_csv
from .funcs import FUNCTIONS, get_function
from .ga import optimize, preset
from .model import TitlMarsModel, oracle_optimum, serialize_model
from .solver import SolverConfig, solve
from .windfarm import BUILTIN_SCENARIOS, FarmConfig, load_scenario, monte_carlo_power_grid

DOMINANCE_SLACK = 1e-9

CSV_COLUMNS = (
    "function", "method", "sense", "value_mean", "value_best",
    "time_mean_s", "gap", "flags", "x_best",
)

REPORT_JSON_SCHEMA = {
    "type": "object",
    "required": ["meta", "rows"],
    "properties": {
        "meta": {"type": "object"},
        "rows": {
            "type": "array",
            "items": {
                "type": "object",
                "required": [
                    "function", "method", "sense", "value_mean", "value_best",
                    "time_mean_s", "gap", "flags", "x_best",
                ],
                "properties": {
                    "function": {"type": "string"},
                    "method": {"type": "string"},
                    "sense": {"enum": ["max", "min"]},
                    "value_mean": {"type": "number"},
                    "value_best": {"type": "number"},
                    "time_mean_s": {"type": "number"},
                    "gap": {"type": ["number", "null"]},
                    "flags": {"type": "string"},
                    "x_best": {"type": "array", "items": {"type": "number"}},
                },
            },
        },
    },
}


@dataclass(frozen=True)
class BenchSpec:
    sources: tuple[str, ...]
    presets: tuple[str, ...] = ("grefenstette", "michalewicz")
    repetitions: int = 30
    grid_points: int = 41
    random_points: int = 2000
    sample_seed: int = 0
    layouts: int = 1000
    turbines: int = 40
    max_basis: int = 40
    gap_tol: float = 1e-6
    time_limit: float = 600.0
    measure_time: bool = True
    figures: bool = True

    def __post_init__(self):
        if not self.sources:
            raise ValidationError("benchmark needs at least one source")
        if self.repetitions < 1:
            raise ValidationError("repetitions must be at least 1")
        object.__setattr__(self, "sources", tuple(self.sources))
        object.__setattr__(self, "presets", tuple(self.presets))


def load_spec(path) -> BenchSpec:
    with open(path) as fh:
        raw = json.load(fh)
    if not isinstance(raw, dict):
        raise ValidationError("benchmark spec must be a JSON object")
    known = {f.name for f in BenchSpec.__dataclass_fields__.values()}  # type: ignore[attr-defined]
    unknown = set(raw) - known
    if unknown:
        raise ValidationError(f"unknown benchmark spec fields: {sorted(unknown)}")
    return BenchSpec(**raw)


@dataclass
class ReportRow:
    function: str
    method: str  # opt | oracle | ga-<preset>
    sense: str
    value_mean: float
    value_best: float
    time_mean_s: float
    gap: float | None
    flags: str
    x_best: tuple


@dataclass
class Report:
    rows: list[ReportRow]
    meta: dict = field(default_factory=dict)


@dataclass
class SourceResult:
    """Everything the harness knows about one benchmark source."""

    name: str
    dataset: Dataset
    model: TitlMarsModel
    fit_seconds: float
    opt: dict
    oracle: dict
    ga_values: dict  # (preset, sense) -> list of per-run values
    ga_points: dict  # (preset, sense) -> x of the best run


def _sample_source(name: str, spec: BenchSpec) -> Dataset:
    if name in FUNCTIONS:
        fn = get_function(name)
        if fn.dim == 2:
            axes = [np.linspace(fn.lower[v], fn.upper[v], spec.grid_points) for v in range(2)]
            mesh = np.meshgrid(*axes, indexing="ij")
            X = np.column_stack([g.ravel() for g in mesh])
        else:
            rng = np.random.default_rng(spec.sample_seed)
            X = rng.uniform(fn.lower, fn.upper, size=(spec.random_points, fn.dim))
        return make_dataset(X, fn(X), lower=fn.lower, upper=fn.upper)
    if name in BUILTIN_SCENARIOS or name.endswith(".scenario"):
        farm = FarmConfig(turbines=spec.turbines)
        scenario = load_scenario(name)
        return monte_carlo_power_grid(farm, scenario, spec.layouts, spec.sample_seed)
    if name.endswith(".csv"):
        return load_dataset_csv(name)
    raise ValidationError(
        f"unknown benchmark source {name!r}: expected an analytic function, "
        "a wind scenario, or a dataset path"
    )


def _ga_label(preset_name: str) -> str:
    return f"ga-{preset_name}"


def run_source(name: str, spec: BenchSpec) -> SourceResult:
    dataset = _sample_source(name, spec)
    t0 = time.perf_counter()
    model = fit(dataset, FitConfig(max_basis=spec.max_basis))
    fit_seconds = time.perf_counter() - t0

    opt = {}
    for sense in ("max", "min"):
        opt[sense] = solve(model, sense, SolverConfig(gap_tol=spec.gap_tol,
                                                      time_limit=spec.time_limit))
    oracle = {}
    try:
        for sense in ("max", "min"):
            t0 = time.perf_counter()
            sol = oracle_optimum(model, sense)
            sol.millis = (time.perf_counter() - t0) * 1000.0
            oracle[sense] = sol
    except CapacityError:
        oracle = {}

    ga_values = {}
    ga_points = {}
    for preset_name in spec.presets:
        for sense in ("max", "min"):
            runs = []
            for seed in range(1, spec.repetitions + 1):
                runs.append(optimize(model, sense, preset(preset_name, seed=seed)))
            ga_values[(preset_name, sense)] = runs
            if sense == "max":
                ga_points[(preset_name, sense)] = max(runs, key=lambda s: s.value)
            else:
                ga_points[(preset_name, sense)] = min(runs, key=lambda s: s.value)

    _check_dominance(name, opt, ga_values)
    return SourceResult(name, dataset, model, fit_seconds, opt, oracle, ga_values, ga_points)


def _check_dominance(name, opt, ga_values):
    """The certificate must never be beaten by a heuristic run."""
    for (preset_name, sense), runs in ga_values.items():
        for run in runs:
            if sense == "max" and run.value > opt["max"].value + DOMINANCE_SLACK * max(1, abs(opt["max"].value)):
                raise CertificateError(
                    f"{name}: GA ({preset_name}) beat the certified maximum: "
                    f"{run.value} > {opt['max'].value}"
                )
            if sense == "min" and run.value < opt["min"].value - DOMINANCE_SLACK * max(1, abs(opt["min"].value)):
                raise CertificateError(
                    f"{name}: GA ({preset_name}) beat the certified minimum: "
                    f"{run.value} < {opt['min'].value}"
                )


def _rows_for(result: SourceResult, spec: BenchSpec) -> list[ReportRow]:
    rows = []
    tm = (lambda s: s / 1000.0) if spec.measure_time else (lambda s: 0.0)
    for sense in ("max", "min"):
        sol = result.opt[sense]
        rows.append(ReportRow(
            function=result.name, method="opt", sense=sense,
            value_mean=sol.value, value_best=sol.value,
            time_mean_s=tm(sol.millis), gap=sol.gap,
            flags="" if sol.status == "optimal" else sol.status,
            x_best=tuple(float(v) for v in sol.x),
        ))
    for sense in ("max", "min"):
        if sense in result.oracle:
            sol = result.oracle[sense]
            rows.append(ReportRow(
                function=result.name, method="oracle", sense=sense,
                value_mean=sol.value, value_best=sol.value,
                time_mean_s=tm(sol.millis), gap=0.0, flags="",
                x_best=tuple(float(v) for v in sol.x),
            ))
    for preset_name in spec.presets:
        for sense in ("max", "min"):
            runs = result.ga_values[(preset_name, sense)]
            values = [r.value for r in runs]
            best_run = result.ga_points[(preset_name, sense)]
            rows.append(ReportRow(
                function=result.name, method=_ga_label(preset_name), sense=sense,
                value_mean=float(np.mean(values)),
                value_best=float(max(values) if sense == "max" else min(values)),
                time_mean_s=tm(float(np.mean([r.millis for r in runs]))),
                gap=None, flags="",
                x_best=tuple(float(v) for v in best_run.x),
            ))
    return rows


def run_benchmark(spec: BenchSpec, out_dir=None) -> Report:
    """Run every source and assemble the report; optionally write artifacts.

    With an out_dir, each source's dataset and fitted model are saved and
    figures are rendered next to the delimited output (unless disabled).
    """
    out = Path(out_dir) if out_dir is not None else None
    if out is not None:
        out.mkdir(parents=True, exist_ok=True)
    rows = []
    meta = {
        "sources": list(spec.sources),
        "presets": list(spec.presets),
        "repetitions": spec.repetitions,
        "gap_tol": spec.gap_tol,
        "ga_seeds": f"1..{spec.repetitions}",
    }
    for name in spec.sources:
        result = run_source(name, spec)
        rows.extend(_rows_for(result, spec))
        if out is not None:
            stem = Path(name).stem if name.endswith(".csv") else name
            save_dataset_csv(result.dataset, out / f"{stem}.data.csv")
            (out / f"{stem}.model").write_text(serialize_model(result.model))
            if spec.figures:
                from . import figures
                figures.render_source_figures(result, out, stem)
    return Report(rows=rows, meta=meta)


# ---------------------------------------------------------------------------
# emission

def _num(x) -> str:
    if x is None or (isinstance(x, float) and math.isnan(x)):
        return ""
    return format(float(x), ".12g")


def report_to_csv(report: Report) -> str:
    lines = [",".join(CSV_COLUMNS)]
    for r in report.rows:
        lines.append(",".join([
            r.function, r.method, r.sense,
            _num(r.value_mean), _num(r.value_best),
            format(r.time_mean_s, ".6f"),
            _num(r.gap), r.flags,
            ";".join(format(v, ".12g") for v in r.x_best),
        ]))
    return "\n".join(lines) + "\n"


def report_to_json(report: Report) -> str:
    payload = {
        "meta": report.meta,
        "rows": [
            {
                "function": r.function, "method": r.method, "sense": r.sense,
                "value_mean": r.value_mean, "value_best": r.value_best,
                "time_mean_s": r.time_mean_s,
                "gap": r.gap, "flags": r.flags, "x_best": list(r.x_best),
            }
            for r in report.rows
        ],
    }
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"


def report_to_markdown(report: Report) -> str:
    """Per-function blocks with Maximum/Minimum value and time rows."""
    functions = []
    for r in report.rows:
        if r.function not in functions:
            functions.append(r.function)
    methods = []
    for r in report.rows:
        if r.method not in methods:
            methods.append(r.method)
    out = []
    for fn in functions:
        sub = {(r.method, r.sense): r for r in report.rows if r.function == fn}
        out.append(f"### {fn}")
        out.append("| Measurement | " + " | ".join(methods) + " |")
        out.append("|---" * (len(methods) + 1) + "|")
        for sense, label in (("max", "Maximum"), ("min", "Minimum")):
            vals, times = [], []
            for m in methods:
                r = sub.get((m, sense))
                vals.append("" if r is None else f"{r.value_mean:.2f}" + (f" ({r.flags})" if r.flags else ""))
                times.append("" if r is None else f"{r.time_mean_s:.2f}")
            out.append(f"| {label} | " + " | ".join(vals) + " |")
            out.append("| Time(seconds) | " + " | ".join(times) + " |")
        out.append("")
    return "\n".join(out)


EMITTERS = {"csv": report_to_csv, "json": report_to_json, "md": report_to_markdown}


def emit(report: Report, fmt: str, path) -> Path:
    """Write the report in the requested format; returns the path."""
    try:
        render = EMITTERS[fmt]
    except KeyError:
        raise ValidationError(f"unknown report format {fmt!r}; choose from {sorted(EMITTERS)}") from None
    path = Path(path)
    try:
        path.write_text(render(report))
    except OSError as exc:
        raise TitlMarsError(f"cannot write report to {path}: {exc}") from exc
    return path
