"""Command-line interface.

Subcommands: fit, solve, ga, oracle, windfarm, bench.
Exit codes: 0 success, 2 input error, 3 capacity or limit hit, 4 internal error.
"""

from __future__ import annotations

import argparse
import sys
import time
from pathlib import Path

from .bench import BenchSpec, emit, load_spec, run_benchmark
from .errors import CapacityError, CertificateError, TitlMarsError, ValidationError
from .fitter import FitConfig, fit, load_dataset_csv, save_dataset_csv
from .ga import GaParams, PRESETS, optimize, preset
from .model import oracle_optimum, parse_model, serialize_model
from .solver import SolverConfig, format_solution, solve
from .windfarm import FarmConfig, load_scenario, monte_carlo_power_grid

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_CAPACITY = 3
EXIT_INTERNAL = 4


def _read_model(path):
    return parse_model(Path(path).read_text())


def cmd_fit(args) -> int:
    data = load_dataset_csv(args.data)
    cfg = FitConfig(max_basis=args.max_basis, knot_quantiles=args.knots)
    model = fit(data, cfg)
    Path(args.out).write_text(serialize_model(model))
    print(f"fitted {model.n_bases} bases over {data.n} samples -> {args.out}")
    return EXIT_OK


def cmd_solve(args) -> int:
    model = _read_model(args.model)
    cfg = SolverConfig(gap_tol=args.gap, time_limit=args.time_limit,
                       node_limit=args.node_limit)
    sol = solve(model, args.sense, cfg)
    sys.stdout.write(format_solution(sol))
    return EXIT_OK if sol.status == "optimal" else EXIT_CAPACITY


def cmd_oracle(args) -> int:
    model = _read_model(args.model)
    t0 = time.perf_counter()
    sol = oracle_optimum(model, args.sense, vertex_cap=args.cap)
    sol.millis = (time.perf_counter() - t0) * 1000.0
    sys.stdout.write(format_solution(sol))
    return EXIT_OK


def cmd_ga(args) -> int:
    model = _read_model(args.model)
    if args.preset:
        params = preset(args.preset, seed=args.seed)
    else:
        params = GaParams(population=args.population, generations=args.generations,
                          crossover_rate=args.crossover_rate,
                          mutation_rate=args.mutation_rate,
                          bits_per_variable=args.bits, seed=args.seed)
    sol = optimize(model, args.sense, params)
    sys.stdout.write(format_solution(sol))
    return EXIT_OK


def cmd_windfarm(args) -> int:
    farm = FarmConfig(cells_per_side=args.cells, cell_width=args.cell_width,
                      rotor_radius=args.rotor_radius, wake_decay=args.wake_decay,
                      turbines=args.turbines)
    scenario = load_scenario(args.scenario)
    data = monte_carlo_power_grid(farm, scenario, args.layouts, args.seed)
    save_dataset_csv(data, args.out)
    print(f"wrote {data.n} cell rows -> {args.out}")
    return EXIT_OK


def cmd_bench(args) -> int:
    if args.spec:
        spec = load_spec(args.spec)
    else:
        spec = BenchSpec(sources=tuple(args.sources))
    if args.no_figures:
        spec = BenchSpec(**{**spec.__dict__, "figures": False})
    report = run_benchmark(spec, out_dir=args.out_dir)
    path = emit(report, args.format, Path(args.out_dir) / f"report.{args.format}")
    print(f"report -> {path}")
    incomplete = [r for r in report.rows if r.flags]
    if incomplete:
        print(f"{len(incomplete)} rows flagged incomplete", file=sys.stderr)
        return EXIT_CAPACITY
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="titlmars",
        description="Fit hinge-basis surrogate models and optimize them to "
                    "certified global optimality; includes a GA baseline and "
                    "a wind-farm benchmark.",
    )
    sub = p.add_subparsers(dest="command", required=True)

    f = sub.add_parser("fit", help="fit a model from a dataset CSV")
    f.add_argument("--data", required=True)
    f.add_argument("--max-basis", type=int, default=40)
    f.add_argument("--knots", type=int, default=100, help="knot candidates per variable")
    f.add_argument("--out", required=True)
    f.set_defaults(func=cmd_fit)

    s = sub.add_parser("solve", help="certified global optimization of a model file")
    s.add_argument("--model", required=True)
    s.add_argument("--sense", required=True, choices=["max", "min"])
    s.add_argument("--gap", type=float, default=1e-6)
    s.add_argument("--time-limit", type=float, default=600.0)
    s.add_argument("--node-limit", type=int, default=10_000_000)
    s.set_defaults(func=cmd_solve)

    o = sub.add_parser("oracle", help="brute-force vertex enumeration check")
    o.add_argument("--model", required=True)
    o.add_argument("--sense", required=True, choices=["max", "min"])
    o.add_argument("--cap", type=int, default=2_000_000)
    o.set_defaults(func=cmd_oracle)

    g = sub.add_parser("ga", help="genetic-algorithm baseline on a model file")
    g.add_argument("--model", required=True)
    g.add_argument("--sense", required=True, choices=["max", "min"])
    g.add_argument("--preset", choices=sorted(PRESETS))
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--population", type=int, default=50)
    g.add_argument("--generations", type=int, default=1000)
    g.add_argument("--crossover-rate", type=float, default=0.8)
    g.add_argument("--mutation-rate", type=float, default=0.15)
    g.add_argument("--bits", type=int, default=16)
    g.set_defaults(func=cmd_ga)

    w = sub.add_parser("windfarm", help="Monte Carlo power-distribution dataset")
    w.add_argument("--scenario", required=True,
                   help="fw1..fw4 or a scenario file of 'speed direction weight' lines")
    w.add_argument("--layouts", type=int, default=1000)
    w.add_argument("--turbines", type=int, default=40)
    w.add_argument("--seed", type=int, default=0)
    w.add_argument("--cells", type=int, default=41)
    w.add_argument("--cell-width", type=float, default=308.0)
    w.add_argument("--rotor-radius", type=float, default=40.0)
    w.add_argument("--wake-decay", type=float, default=0.03)
    w.add_argument("--out", required=True)
    w.set_defaults(func=cmd_windfarm)

    b = sub.add_parser("bench", help="full benchmark: fit, certified solve, GA presets")
    b.add_argument("--spec", help="JSON benchmark spec file")
    b.add_argument("--sources", nargs="*", default=(),
                   help="sources when no spec file is given (f1..f4, fw1..fw4, CSVs)")
    b.add_argument("--out-dir", required=True)
    b.add_argument("--format", choices=["csv", "json", "md"], default="csv")
    b.add_argument("--no-figures", action="store_true")
    b.set_defaults(func=cmd_bench)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except CapacityError as exc:
        print(f"capacity: {exc}", file=sys.stderr)
        return EXIT_CAPACITY
    except CertificateError as exc:
        print(f"certificate violation: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    except (ValidationError, TitlMarsError, FileNotFoundError, IsADirectoryError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except Exception as exc:  # pragma: no cover - defensive
        print(f"internal error: {exc!r}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
