"""Command line front end: scenario in, machine-readable reports out.

Exit codes: 0 success, 1 verification failure, 2 malformed scenario.
"""

from __future__ import annotations

import argparse
import os
import sys
import tempfile
import time

import numpy as np

from .correlations import CorrelationSpec, cesaro_correlation, correlation_limit, make_system
from .engines import (
    BudgetError,
    ConvergenceReport,
    cesaro_direct,
    cesaro_nested,
    cesaro_spectral,
    convergence_report,
    error_bound,
    limit_operator,
    spectral_gap,
)
from .linalg import operator_norm
from .partitions import is_crossing, render_partition
from .scenario import Scenario, ScenarioError, load_scenario, scenario_from_dict
from .spectral import antidiagonal_spectrum, decomposition_residuals, invariant_projection
from .verify import run_invariant_suite

CSV_HEADER = "N,engine,error_op,error_frob,certified_bound,spectral_gap,seconds"

DEMO_SCENARIO = {
    "unitary": {
        "kind": "random",
        "dim": 4,
        "seed": 21,
        "phaseMode": "rational",
        "maxDenominator": 6,
    },
    "partition": [1, 2, 1, 3, 2, 3],
    "operators": [{"kind": "random"} for _ in range(5)],
    "engine": "spectral",
    "Ns": [100, 1000, 10000],
    "seed": 21,
}

DEMO_CROSS_CHECK_N = 30


def _write_atomic(path: str, text: str) -> None:
    directory = os.path.dirname(os.path.abspath(path)) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=".csv")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def report_csv(report: ConvergenceReport, include_timings: bool = False) -> str:
    """Fixed-schema CSV; the seconds column is blank unless timings are requested.

    Wall time is the one nondeterministic quantity in a report, so leaving it
    out by default keeps byte-identical output across runs and thread counts.
    """
    lines = [CSV_HEADER]
    for row in report.rows:
        seconds = repr(row.seconds) if include_timings else ""
        lines.append(
            f"{row.N},{row.engine},{row.error_op!r},{row.error_frob!r},"
            f"{row.certified_bound!r},{report.spectral_gap!r},{seconds}"
        )
    return "\n".join(lines) + "\n"


def _print_matrix(mat: np.ndarray, label: str) -> None:
    print(f"{label}:")
    if mat.shape[0] > 8:
        print(f"  ({mat.shape[0]}x{mat.shape[1]} matrix suppressed)")
        return
    for row in mat:
        print("  " + "  ".join(f"{v.real:+.6f}{v.imag:+.6f}j" for v in row))


def cmd_decompose(scenario: Scenario, args) -> int:
    u, dec = scenario.system()
    sigma = set(antidiagonal_spectrum(dec))
    print(f"dimension {dec.dim}, {len(dec.entries)} spectral lines")
    print("phase  rank  antidiagonal")
    for line in dec.entries:
        mark = "yes" if line.phase in sigma else "no"
        print(f"{str(line.phase):>12}  {line.rank:>4}  {mark}")
    e1 = invariant_projection(dec)
    print(f"invariant projection rank {round(float(np.trace(e1).real))}")
    for name, value in decomposition_residuals(dec, u).items():
        print(f"residual {name}: {value:.3e}")
    return 0


def cmd_mean(scenario: Scenario, args) -> int:
    if scenario.partition is None:
        raise ScenarioError("the 'mean' command needs a partition")
    u, dec = scenario.system()
    p = scenario.partition
    ops = scenario.operators(p.m - 1)
    horizon = args.N if args.N is not None else (scenario.horizons[-1] if scenario.horizons else 100)
    engine = args.engine or scenario.engine
    if engine == "direct":
        result = cesaro_direct(u, p, ops, horizon)
    elif engine == "nested":
        result = cesaro_nested(dec, p, ops, horizon)
    else:
        result = cesaro_spectral(dec, p, ops, horizon)
    print(f"partition {render_partition(p)}, engine {result.engine}, N={result.N}")
    print(f"operator norm {operator_norm(result.matrix):.12f}")
    print(f"elapsed {result.elapsed:.3f}s")
    _print_matrix(result.matrix, "mean")
    return 0


def cmd_limit(scenario: Scenario, args) -> int:
    if scenario.partition is None:
        raise ScenarioError("the 'limit' command needs a partition")
    _, dec = scenario.system()
    p = scenario.partition
    ops = scenario.operators(p.m - 1)
    limit = limit_operator(dec, p, ops)
    norm = operator_norm(limit)
    product = 1.0
    for a in ops:
        product *= operator_norm(a)
    print(f"partition {render_partition(p)}")
    print(f"limit operator norm {norm:.12f} (operator norm product {product:.12f})")
    _print_matrix(limit, "limit")
    return 0


def cmd_converge(scenario: Scenario, args) -> int:
    if scenario.partition is None:
        raise ScenarioError("the 'converge' command needs a partition")
    if not scenario.horizons:
        raise ScenarioError("the 'converge' command needs a nonempty 'Ns' list")
    _, dec = scenario.system()
    p = scenario.partition
    ops = scenario.operators(p.m - 1)
    engine = args.engine or scenario.engine
    report = convergence_report(dec, p, ops, scenario.horizons, engine)
    out = args.out or scenario.out
    text = report_csv(report, include_timings=args.timings)
    print(text, end="")
    if out:
        _write_atomic(out, text)
        print(f"wrote {out}", file=sys.stderr)
    bad = [row.N for row in report.rows if row.error_op > row.certified_bound + 1e-9]
    if bad:
        print(f"certified bound violated at N in {bad}", file=sys.stderr)
        return 1
    return 0


def cmd_verify(scenario: Scenario, args) -> int:
    checks = run_invariant_suite(scenario)
    failures = 0
    for check in checks:
        status = "PASS" if check.passed else "FAIL"
        detail = f"  ({check.detail})" if check.detail else ""
        print(f"{status}  {check.name}: {check.value:.3e} <= {check.threshold:.3e}{detail}")
        failures += 0 if check.passed else 1
    print(f"{len(checks) - failures}/{len(checks)} checks passed")
    return 0 if failures == 0 else 1


def cmd_bench(scenario: Scenario, args) -> int:
    if scenario.partition is None:
        raise ScenarioError("the 'bench' command needs a partition")
    if not scenario.horizons:
        raise ScenarioError("the 'bench' command needs a nonempty 'Ns' list")
    u, dec = scenario.system()
    p = scenario.partition
    ops = scenario.operators(p.m - 1)
    engines = ["spectral", "direct"] + ([] if is_crossing(p) else ["nested"])
    print("N        engine    seconds      max|diff vs spectral|")
    for horizon in scenario.horizons:
        reference = None
        for engine in engines:
            start = time.perf_counter()
            try:
                if engine == "direct":
                    result = cesaro_direct(u, p, ops, horizon)
                elif engine == "spectral":
                    result = cesaro_spectral(dec, p, ops, horizon)
                else:
                    result = cesaro_nested(dec, p, ops, horizon)
            except BudgetError:
                print(f"{horizon:<8} {engine:<9} (skipped: over budget)")
                continue
            elapsed = time.perf_counter() - start
            if engine == "spectral":
                reference = result.matrix
            diff = "" if reference is None else f"{np.abs(result.matrix - reference).max():.3e}"
            print(f"{horizon:<8} {engine:<9} {elapsed:<12.6f} {diff}")
    return 0


def cmd_correlate(scenario: Scenario, args) -> int:
    if scenario.partition is None:
        raise ScenarioError("the 'correlate' command needs a partition")
    p = scenario.partition
    u, dec = scenario.system()
    ops = scenario.operators(p.m + 1)
    system = make_system(u, scenario.state(), dec=dec, tolerances=scenario.tolerances)
    spec = CorrelationSpec(p, tuple(ops))
    limit = correlation_limit(system, spec)
    edge = operator_norm(ops[0]) * operator_norm(ops[-1])
    print(f"correlation limit: {limit.real:+.12f}{limit.imag:+.12f}j")
    print("N        value                          |value-limit|   certified")
    failures = 0
    for horizon in scenario.horizons or [100]:
        value = cesaro_correlation(system, spec, horizon)
        bound = error_bound(dec, p, ops[1:-1], horizon) * edge
        gap = abs(value - limit)
        ok = gap <= bound + 1e-9
        failures += 0 if ok else 1
        print(f"{horizon:<8} {value.real:+.9f}{value.imag:+.9f}j   {gap:.3e}       {bound:.3e}")
    return 0 if failures == 0 else 1


def cmd_demo_appendix(args) -> int:
    scenario_dict = dict(DEMO_SCENARIO)
    if args.seed is not None:
        scenario_dict["seed"] = args.seed
    scenario = scenario_from_dict(scenario_dict)

    u, dec = scenario.system()
    p = scenario.partition
    ops = scenario.operators(p.m - 1)
    print(f"entangled partition {render_partition(p)} on a dimension-{dec.dim} system")
    print("phases:", ", ".join(str(ph) for ph in dec.phases))
    print("antidiagonal spectrum:", ", ".join(str(ph) for ph in antidiagonal_spectrum(dec)))
    print(f"spectral gap: {spectral_gap(dec):.6f}")

    check_n = DEMO_CROSS_CHECK_N
    direct = cesaro_direct(u, p, ops, check_n)
    spectral = cesaro_spectral(dec, p, ops, check_n)
    agreement = float(np.abs(direct.matrix - spectral.matrix).max())
    print(f"direct vs spectral at N={check_n}: max deviation {agreement:.3e}")
    if agreement > 1e-10:
        print("engines disagree beyond tolerance", file=sys.stderr)
        return 1

    report = convergence_report(dec, p, ops, scenario.horizons, scenario.engine)
    text = report_csv(report, include_timings=args.timings)
    print(text, end="")
    if args.out:
        _write_atomic(args.out, text)
        print(f"wrote {args.out}", file=sys.stderr)
    bad = [row.N for row in report.rows if row.error_op > row.certified_bound + 1e-9]
    if bad:
        print(f"certified bound violated at N in {bad}", file=sys.stderr)
        return 1
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="entcesaro",
        description="entangled Cesaro means of unitary dynamics: engines, limits, reports",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    commands = {
        "decompose": "print eigenphases, the antidiagonal spectrum, and residuals",
        "mean": "evaluate one entangled Cesaro mean",
        "limit": "evaluate the limit operator and its norm bound",
        "converge": "emit a CSV convergence report with certified bounds",
        "verify": "run the full invariant suite; exit 0 iff all checks pass",
        "bench": "time the engines against each other across horizons",
        "correlate": "compare correlation averages against their limit",
        "demo-appendix": "built-in demonstration on the partition 1,2,1,3,2,3",
    }
    for name, help_text in commands.items():
        cmd = sub.add_parser(name, help=help_text)
        if name != "demo-appendix":
            cmd.add_argument("--scenario", required=True, help="path to the scenario JSON file")
        cmd.add_argument("--engine", choices=("direct", "spectral", "nested"),
                         help="override the scenario engine")
        cmd.add_argument("--out", help="output CSV path")
        cmd.add_argument("--seed", type=int, help="override the scenario seed")
        cmd.add_argument("--timings", action="store_true",
                         help="include wall time in CSV output (breaks byte reproducibility)")
        if name == "mean":
            cmd.add_argument("--N", type=int, help="horizon for the evaluation")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "demo-appendix":
            return cmd_demo_appendix(args)
        scenario = load_scenario(args.scenario)
        if args.seed is not None:
            scenario.seed = args.seed
        if args.engine is not None:
            scenario.engine = args.engine
        handler = {
            "decompose": cmd_decompose,
            "mean": cmd_mean,
            "limit": cmd_limit,
            "converge": cmd_converge,
            "verify": cmd_verify,
            "bench": cmd_bench,
            "correlate": cmd_correlate,
        }[args.command]
        return handler(scenario, args)
    except ScenarioError as exc:
        print(f"scenario error: {exc}", file=sys.stderr)
        return 2
    except (BudgetError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
