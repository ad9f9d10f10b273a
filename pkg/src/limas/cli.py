"""Command-line frontend: analyze, simulate, sweep, gen-example.

Exit codes are a stable contract: 0 consensusable (sufficient test passed),
1 nothing concluded, 2 necessary condition violated, 3 assumption violation,
64 configuration or usage error.
"""

import argparse
import csv
import json
import os
import sys

import numpy as np

from . import cases, consensus, sim
from .config import example_config, parse_config
from .errors import ConfigError, LimasError, NonFiniteState, UnknownParameter
from .graph import WeightedGraph, spectrum, laplacian

EXIT_SUFFICIENT = 0
EXIT_NOT_CONCLUDED = 1
EXIT_NECESSARY_VIOLATED = 2
EXIT_ASSUMPTION_VIOLATION = 3
EXIT_CONFIG = 64

_VERDICT_EXIT = {
    consensus.CONSENSUSABLE_SUFFICIENT: EXIT_SUFFICIENT,
    consensus.NOT_CONCLUDED: EXIT_NOT_CONCLUDED,
    consensus.NECESSARY_VIOLATED: EXIT_NECESSARY_VIOLATED,
    consensus.ASSUMPTION_VIOLATION: EXIT_ASSUMPTION_VIOLATION,
}

_TEST_RUNNERS = {
    "necessary": consensus.necessary_test,
    "lp": consensus.lp_sufficient_test,
    "analytic": consensus.analytic_sufficient_test,
    "design": consensus.design_gain,
}


def _effective_seed(config):
    env = os.environ.get("LIMAS_SEED")
    if env is not None:
        try:
            return int(env)
        except ValueError as exc:
            raise ConfigError(f"LIMAS_SEED must be an integer: {exc}") from exc
    return config.seed


def _run_tests(model, tests):
    reports = []
    for name in tests:
        if name == "scalar":
            if model.order != 1:
                reports.append(
                    consensus.TestReport(
                        consensus.SCALAR_TEST,
                        consensus.ASSUMPTION_VIOLATION,
                        None,
                        {"assumptions": ["scalar test requires first-order subsystems"]},
                    )
                )
            else:
                reports.append(consensus.scalar_model_test(model))
        else:
            reports.append(_TEST_RUNNERS[name](model))
    return reports


def _overall_exit(reports):
    verdicts = [r.verdict for r in reports]
    if consensus.CONSENSUSABLE_SUFFICIENT in verdicts:
        return EXIT_SUFFICIENT
    if consensus.NECESSARY_VIOLATED in verdicts:
        return EXIT_NECESSARY_VIOLATED
    if consensus.NOT_CONCLUDED in verdicts:
        return EXIT_NOT_CONCLUDED
    return EXIT_ASSUMPTION_VIOLATION


def cmd_analyze(args):
    config = parse_config(args.config)
    seed = _effective_seed(config)
    case = config.build(seed=seed)
    reports = _run_tests(case.model, config.tests)
    os.makedirs(config.output_dir, exist_ok=True)
    report_path = os.path.join(config.output_dir, "report.json")
    with open(report_path, "w") as handle:
        json.dump([r.to_json_dict() for r in reports], handle, indent=2, sort_keys=True)
        handle.write("\n")
    for report in reports:
        gain_note = "" if report.gain is None else f"  gain={np.array2string(report.gain, precision=6)}"
        print(f"{report.test_name}: {report.verdict}{gain_note}")
    print(f"report written to {report_path}")
    return _overall_exit(reports)


def _resolve_gain(args, config):
    if args.gain is not None:
        try:
            return np.array([float(v) for v in args.gain.split(",")])
        except ValueError as exc:
            raise ConfigError(f"bad --gain value: {exc}") from exc
    if args.gain_file is not None:
        path = args.gain_file
    elif "gain" in config.sim:
        return np.asarray(config.sim["gain"], dtype=float).reshape(-1)
    else:
        path = os.path.join(config.output_dir, "report.json")
    try:
        reports = json.load(open(path))
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read gain from {path}: {exc}") from exc
    for report in reversed(reports):
        if report.get("gain") is not None:
            return np.asarray(report["gain"], dtype=float)
    raise ConfigError(f"no gain found in {path}; run analyze first or pass --gain")


def _initial_state(config, case, seed):
    policy = config.sim.get("x0", "random")
    if policy != "random":
        return np.asarray(policy, dtype=float).reshape(-1)
    if config.builder == "supercap":
        return cases.supercap_x0(seed)
    if config.builder == "dcmg":
        return cases.dcmg_x0(seed)
    rng = np.random.default_rng(np.random.SeedSequence(seed).spawn(2)[1])
    return rng.standard_normal(case.model.n_agents * case.model.order)


def cmd_simulate(args):
    config = parse_config(args.config)
    seed = _effective_seed(config)
    case = config.build(seed=seed)
    gain = _resolve_gain(args, config)
    x0 = _initial_state(config, case, seed)
    t_end, dt = float(config.sim["t_end"]), float(config.sim["dt"])
    model = case.model
    try:
        if config.builder == "supercap":
            field = sim.supercap_field(case.params, case.g_p, case.g_c, gain)
            trace = sim.simulate_continuous(field, x0, t_end, dt, order=1)
        elif config.builder == "dcmg":
            field = sim.dcmg_field(case.params, case.g_p, case.g_c, gain)
            trace = sim.simulate_continuous(field, x0, t_end, dt, order=3)
        else:
            steps = max(1, int(round(t_end / dt)))
            trace = sim.simulate_discrete(model, gain, x0, steps)
    except NonFiniteState as exc:
        print(f"simulation diverged: {exc}", file=sys.stderr)
        return 1
    os.makedirs(config.output_dir, exist_ok=True)
    trace_path = os.path.join(config.output_dir, "trace.csv")
    sim.write_trace_csv(trace, trace_path, model.n_agents, model.order)
    print(f"final consensus_error = {trace.consensus_error[-1]:.6e}")
    print(f"consensus value = {np.array2string(trace.consensus_value, precision=6)}")
    print(f"trace written to {trace_path}")
    return 0


def _remove_edges(graph, count, rng):
    if count >= len(graph.edges):
        raise ConfigError(f"cannot remove {count} of {len(graph.edges)} edges")
    keep = rng.choice(len(graph.edges), size=len(graph.edges) - count, replace=False)
    return WeightedGraph(graph.n_nodes, tuple(graph.edges[int(i)] for i in sorted(keep)))


def _sweep_case(config, seed, param, value, index):
    if param == "xi":
        return config.build(seed=seed, xi=float(value))
    if param == "gc_topology":
        return config.build(seed=seed, gc_topology=str(value))
    if param == "seed":
        return config.build(seed=int(value))
    if param == "edge_removal_count":
        case = config.build(seed=seed)
        rng = np.random.default_rng(np.random.SeedSequence(seed ^ index).spawn(1)[0])
        g_c = _remove_edges(case.g_c, int(value), rng)
        model = consensus.LimasModel(
            case.model.a_mat, case.model.ap_mat, case.model.b_vec, case.model.g_p, g_c
        )
        return cases.CaseStudy(model, case.params, case.g_p, g_c, case.resistances)
    raise UnknownParameter(f"unknown sweep parameter {param!r}")


def cmd_sweep(args):
    config = parse_config(args.config)
    seed = _effective_seed(config)
    values = [v.strip() for v in args.values.split(",") if v.strip()]
    if not values:
        raise ConfigError("--values must contain at least one value")
    os.makedirs(config.output_dir, exist_ok=True)
    table_path = os.path.join(config.output_dir, "sweep.csv")
    rows = []
    for index, value in enumerate(values):
        case = _sweep_case(config, seed, args.param, value, index)
        report = consensus.lp_sufficient_test(case.model)
        spect_p = spectrum(laplacian(case.model.g_p))
        spect_c = spectrum(laplacian(case.model.g_c))
        rows.append(
            {
                "value": value,
                "verdict": report.verdict,
                "lp_feasible": report.details.get("lp_feasible"),
                "margin": report.details.get("lp_margin"),
                "delta_p": spect_p.delta_p,
                "gamma_c": spect_c.gamma_c,
            }
        )
    with open(table_path, "w", newline="") as handle:
        writer = csv.DictWriter(handle, fieldnames=list(rows[0]))
        writer.writeheader()
        writer.writerows(rows)
    for row in rows:
        print(
            f"{args.param}={row['value']}: {row['verdict']}"
            f" (feasible={row['lp_feasible']}, margin={row['margin']})"
        )
    print(f"sweep table written to {table_path}")
    return 0


def cmd_gen_example(args):
    print(json.dumps(example_config(args.name), indent=2, sort_keys=True))
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="limas",
        description="Consensusability analysis and simulation of linear interconnected multi-agent systems.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_analyze = sub.add_parser("analyze", help="run consensusability tests and write report.json")
    p_analyze.add_argument("config", help="path to a JSON run configuration")
    p_analyze.set_defaults(func=cmd_analyze)

    p_sim = sub.add_parser("simulate", help="simulate the closed loop and write trace.csv")
    p_sim.add_argument("config", help="path to a JSON run configuration")
    group = p_sim.add_mutually_exclusive_group()
    group.add_argument("--gain-file", help="report.json to take the gain from")
    group.add_argument("--gain", help="comma-separated explicit gain entries")
    p_sim.set_defaults(func=cmd_simulate)

    p_sweep = sub.add_parser("sweep", help="re-run the LP test over a parameter range")
    p_sweep.add_argument("config", help="path to a JSON run configuration")
    p_sweep.add_argument("--param", required=True,
                         choices=["xi", "gc_topology", "edge_removal_count", "seed"])
    p_sweep.add_argument("--values", required=True, help="comma-separated values")
    p_sweep.set_defaults(func=cmd_sweep)

    p_gen = sub.add_parser("gen-example", help="print a ready-to-run benchmark config")
    p_gen.add_argument("name", choices=["supercap", "dcmg"])
    p_gen.set_defaults(func=cmd_gen_example)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, UnknownParameter) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except LimasError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
