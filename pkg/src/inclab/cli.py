"""Batch front-end: scenario configs in, deterministic tables out.

Commands take a scenario file and emit CSV sweep tables (one row per
quantity per sweep point, each row carrying its provenance), JSON single
reports, or SVG ratio charts.  Identical scenario and seed give
byte-identical artifacts; wall-clock diagnostics go to stderr only.
"""
from __future__ import annotations

import argparse
import json
import math
import os
import sys
import time

import numpy as np

from . import __version__
from .asymptotics import predict_scale1, predict_scale2, predict_scale3_bracket
from .config_space import ConfigSpace
from .errors import InclabError
from .generator import build_generator
from .measure import build_weights
from .model import chain_order, is_linear_chain
from .potential import (
    mean_hitting_time,
    series_capacity_birth_death,
    solve_equilibrium_potential,
)
from .scenario import Scenario, d_log_n, load_scenario
from .simulator import default_backend, simulate_condensate_path, simulate_hitting
from .svg import line_chart
from .verify import run_scale_battery

CSV_HEADER = "label,N,d,d_log_N,quantity,value,provenance"


def _fmt(x) -> str:
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    if isinstance(x, np.integer):
        return str(int(x))
    return str(x)


class SweepTable:
    """Ordered (N, d, quantity, value, provenance) rows for one command."""

    def __init__(self, label: str):
        self.label = label
        self.rows = []

    def add(self, n, d, quantity, value, provenance):
        if isinstance(value, (float, np.floating)):
            value = float(value)
        elif isinstance(value, np.integer):
            value = int(value)
        self.rows.append((self.label, n, d, d_log_n(n, d), quantity, value, provenance))

    def to_csv(self) -> str:
        lines = [CSV_HEADER]
        for row in self.rows:
            lines.append(",".join(_fmt(v) for v in row))
        return "\n".join(lines) + "\n"

    def to_json(self) -> str:
        keys = CSV_HEADER.split(",")
        return json.dumps(
            [dict(zip(keys, row)) for row in self.rows], sort_keys=True, indent=1
        ) + "\n"

    def series(self, quantity: str):
        xs, ys = [], []
        for _, n, _, _, q, v, _ in self.rows:
            if q == quantity:
                xs.append(n)
                ys.append(v)
        return xs, ys


def _write(out_dir, name, text) -> None:
    if out_dir:
        os.makedirs(out_dir, exist_ok=True)
        path = os.path.join(out_dir, name)
        with open(path, "w") as fh:
            fh.write(text)
        print(f"wrote {path}", file=sys.stderr)
    else:
        sys.stdout.write(text)


def _emit(table: SweepTable, args, chart_quantities=()) -> None:
    if args.format == "csv":
        _write(args.out_dir, f"{table.label}.csv", table.to_csv())
    elif args.format == "json":
        _write(args.out_dir, f"{table.label}.json", table.to_json())
    elif args.format == "svg":
        series = {}
        xs = None
        for q in chart_quantities:
            qx, qy = table.series(q)
            if qx:
                xs, series[q] = qx, qy
        if not series:
            raise InclabError("nothing to chart for this command")
        svg = line_chart(xs, series, table.label, "N", "value")
        _write(args.out_dir, f"{table.label}.svg", svg)


def _build_point(scenario: Scenario, n: int, d: float):
    space = ConfigSpace(n, scenario.kernel.kappa)
    return build_generator(scenario.kernel, build_weights(n, d), space)


def _ab_ranks(scenario: Scenario, gen):
    ranks = gen.metastable_ranks()
    s_star = list(scenario.kernel.s_star)
    a = [ranks[s_star.index(scenario.source_index())]]
    b = [ranks[s_star.index(t)] for t in scenario.target_indices()]
    return a, b


def cmd_validate(scenario: Scenario, args) -> int:
    k = scenario.kernel
    print(f"sites ({k.kappa}): {list(k.sites)}")
    print(f"measure m: {k.measure.tolist()}")
    print(f"m_star:    {k.m_star.tolist()}")
    print(f"maximal set: {[k.sites[i] for i in k.s_star]} (kappa_star={k.kappa_star})")
    order = chain_order(k)
    if is_linear_chain(k):
        print(f"shape: nearest-neighbor chain {[k.sites[i] for i in order]} "
              "with maximal endpoints")
    elif order is not None:
        print("shape: nearest-neighbor chain (endpoints not the maximal set)")
    else:
        print("shape: general graph")
    for n, d in scenario.points:
        print(f"point N={n} d={_fmt(d)} d*logN={_fmt(d_log_n(n, d))}")
    return 0


def cmd_capacity(scenario: Scenario, args) -> int:
    table = SweepTable(f"{scenario.label}-capacity")
    for n, d in scenario.points:
        gen = _build_point(scenario, n, d)
        a, b = _ab_ranks(scenario, gen)
        rep = solve_equilibrium_potential(gen, a, b)
        table.add(n, d, "capacity", rep.capacity, "exact-solve")
        table.add(n, d, "capacity_dirichlet", rep.capacity_dirichlet, "exact-solve")
        table.add(n, d, "mu_h", rep.mu_h, "exact-solve")
        if rep.mean_hitting_from_a is not None:
            table.add(n, d, "mean_hitting_two_route", rep.mean_hitting_from_a,
                      "exact-solve")
        if scenario.kernel.kappa == 2:
            table.add(n, d, "capacity_series", series_capacity_birth_death(gen),
                      "oracle")
    _emit(table, args, ("capacity", "capacity_series"))
    return 0


def cmd_hitting(scenario: Scenario, args) -> int:
    table = SweepTable(f"{scenario.label}-hitting")
    for n, d in scenario.points:
        gen = _build_point(scenario, n, d)
        a, b = _ab_ranks(scenario, gen)
        exact = mean_hitting_time(gen, a[0], b)
        table.add(n, d, "mean_hitting_exact", exact, "exact-solve")
        rep = solve_equilibrium_potential(gen, a, b)
        table.add(n, d, "mean_hitting_two_route", rep.mean_hitting_from_a,
                  "exact-solve")
        if scenario.scale in (1, 2):
            pred = (predict_scale1(scenario.kernel, d, scenario.source_index())
                    if scenario.scale == 1
                    else predict_scale2(scenario.kernel, d, n))
            table.add(n, d, "mean_hitting_predicted", pred.mean_hitting, "formula")
            table.add(n, d, "ratio_exact_over_predicted",
                      exact / pred.mean_hitting, "formula")
        if args.trials or scenario.trials:
            trials = args.trials or scenario.trials
            summary = simulate_hitting(
                gen, a[0], b, trials=trials, seed=scenario.seed,
                event_cap=scenario.event_cap, workers=args.workers,
            )
            table.add(n, d, "mc_mean", summary.mean_hitting, "monte-carlo")
            table.add(n, d, "mc_stderr", summary.stderr_hitting, "monte-carlo")
    _emit(table, args, ("mean_hitting_exact", "ratio_exact_over_predicted"))
    return 0


def cmd_simulate(scenario: Scenario, args) -> int:
    table = SweepTable(f"{scenario.label}-simulate")
    trial_rows = []
    for n, d in scenario.points:
        gen = _build_point(scenario, n, d)
        a, b = _ab_ranks(scenario, gen)
        summary = simulate_hitting(
            gen, a[0], b, trials=args.trials or scenario.trials,
            seed=scenario.seed, event_cap=scenario.event_cap,
            workers=args.workers,
        )
        table.add(n, d, "mc_mean", summary.mean_hitting, "monte-carlo")
        table.add(n, d, "mc_stderr", summary.stderr_hitting, "monte-carlo")
        table.add(n, d, "mc_trials", summary.trials, "monte-carlo")
        table.add(n, d, "mc_total_events", int(summary.event_counts.sum()),
                  "monte-carlo")
        for trial, t in enumerate(summary.hitting_times):
            trial_rows.append((n, d, trial, t))
        print(f"N={n}: {summary.trials} trials in {summary.wall_seconds:.2f}s "
              f"({summary.backend})", file=sys.stderr)
        if scenario.scale is not None:
            theta = {1: 1.0 / d, 2: n / d**2, 3: n**2 / d**3}[scenario.scale]
            path = simulate_condensate_path(
                gen, scenario.source_index(), scenario.horizon, theta,
                seed=scenario.seed, event_cap=scenario.event_cap,
            )
            table.add(n, d, "path_jump_count", len(path.jump_sites), "monte-carlo")
            table.add(n, d, "path_delta_time_fraction",
                      path.delta_time_fraction, "monte-carlo")
            _write(args.out_dir, f"{table.label}-path-N{n}.json",
                   path.to_json() + "\n")
    _emit(table, args, ("mc_mean",))
    if args.out_dir:
        lines = ["N,d,trial,hitting_time"]
        lines += [",".join(_fmt(v) for v in row) for row in trial_rows]
        _write(args.out_dir, f"{table.label}-trials.csv", "\n".join(lines) + "\n")
    return 0


def cmd_predict(scenario: Scenario, args) -> int:
    if scenario.scale is None:
        raise InclabError("predict needs a scale in the scenario or --scale")
    table = SweepTable(f"{scenario.label}-predict-scale{scenario.scale}")
    for n, d in scenario.points:
        if scenario.scale == 1:
            pred = predict_scale1(scenario.kernel, d, scenario.source_index())
            table.add(n, d, "mean_hitting_predicted", pred.mean_hitting, "formula")
        elif scenario.scale == 2:
            pred = predict_scale2(scenario.kernel, d, n)
            table.add(n, d, "mean_hitting_predicted", pred.mean_hitting, "formula")
        else:
            pred = predict_scale3_bracket(scenario.kernel, d, n)
            lo, hi = pred.hitting_bracket
            table.add(n, d, "mean_hitting_lower", lo, "formula")
            table.add(n, d, "mean_hitting_upper", hi, "formula")
        table.add(n, d, "theta", pred.theta, "formula")
    _emit(table, args, ("mean_hitting_predicted",))
    return 0


def cmd_verify(scenario: Scenario, args) -> int:
    scale = args.scale or scenario.scale
    if scale is None:
        raise InclabError("verify needs --scale or a scale in the scenario")
    results = run_scale_battery(scenario, scale)
    report = {"scale": scale, "label": scenario.label, "checks": []}
    ok = True
    for res in results:
        print(res.line())
        ok &= res.passed
        report["checks"].append(
            {"name": res.name, "passed": res.passed, "details": res.details}
        )
    report["passed"] = ok
    if args.out_dir:
        _write(args.out_dir, f"{scenario.label}-verify-scale{scale}.json",
               json.dumps(report, sort_keys=True, indent=1) + "\n")
    return 0 if ok else 1


COMMANDS = {
    "validate": cmd_validate,
    "capacity": cmd_capacity,
    "hitting": cmd_hitting,
    "simulate": cmd_simulate,
    "predict": cmd_predict,
    "verify": cmd_verify,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="inclab",
        description="Exact and stochastic analysis of condensate motion "
        "in the reversible inclusion process.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("command", choices=sorted(COMMANDS))
    parser.add_argument("scenario", help="scenario YAML file")
    parser.add_argument("--scale", type=int, choices=(1, 2, 3),
                        help="time-scale for predict/verify")
    parser.add_argument("--trials", type=int, default=0,
                        help="Monte Carlo trials (overrides the scenario)")
    parser.add_argument("--seed", type=int, help="override the scenario seed")
    parser.add_argument("--workers", type=int,
                        default=int(os.environ.get("INCLAB_WORKERS", "1")),
                        help="parallel trial workers (default $INCLAB_WORKERS or 1)")
    parser.add_argument("--epsilon", type=float,
                        help="test-function ramp width (overrides the scenario)")
    parser.add_argument("--out-dir", help="write artifacts here instead of stdout")
    parser.add_argument("--format", choices=("csv", "json", "svg"), default="csv")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        scenario = load_scenario(args.scenario)
        if args.seed is not None:
            scenario = _replace(scenario, seed=args.seed)
        if args.scale is not None:
            scenario = _replace(scenario, scale=args.scale)
        if args.epsilon is not None:
            scenario = _replace(scenario, epsilon=args.epsilon)
        t0 = time.perf_counter()
        code = COMMANDS[args.command](scenario, args)
        print(f"{args.command}: {time.perf_counter() - t0:.2f}s "
              f"(backend {default_backend()})", file=sys.stderr)
        return code
    except InclabError as exc:
        print(f"error [{type(exc).__name__}]: {exc}", file=sys.stderr)
        return 2


def _replace(scenario: Scenario, **kw) -> Scenario:
    from dataclasses import replace

    return replace(scenario, **kw)


if __name__ == "__main__":
    sys.exit(main())
