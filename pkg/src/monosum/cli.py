"""Command-line front end.

Experiments are single JSON config documents; any leaf can be overridden
from the command line by dotted path (``--set vsum.tol=1e-6``). Reports are
written as canonical JSON payloads (optionally CSV); identical configs and
seeds produce byte-identical payloads.

Exit codes: 0 success, 2 negative finding (failed diagnostic or declared
divergence -- valid scientific output), 1 operational error.
"""

import argparse
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from monosum.errors import ConfigurationError, MonosumError
from monosum.evolution import (
    ConstantForcing,
    EvolutionProblem,
    TableForcing,
    ZeroForcing,
    implicit_euler_solve,
    step_convergence_study,
)
from monosum.monotone import resolvent
from monosum.problems import (
    GridSpec,
    form_sum_problem,
    reaction_diffusion_problem,
)
from monosum.reports import to_plain, write_csv_report, write_json_report
from monosum.specio import parse_grid, parse_operator, parse_potential, parse_vector
from monosum.sums import (
    FilterPath,
    boundedness_diagnostic,
    check_acute_angle,
    check_resolvent_commutation,
    variational_sum_resolvent,
)

STATUS_OK = 0
STATUS_ERROR = 1
STATUS_FINDING = 2

COMMANDS = ("resolvent", "vsum", "evolve", "diagnose", "sweep")
DIAGNOSE_KINDS = ("commutation", "acute-angle", "boundedness")


class _Parser(argparse.ArgumentParser):
    """argparse exits bad invocations with status 2, which is reserved here
    for scientific findings; route usage errors through status 1 instead."""

    def error(self, message):
        raise ConfigurationError(message)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="monosum",
        description="resolvent calculus, operator sums, and evolution runs from JSON configs",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name, help=f"run a {name} experiment from --config")
        p.add_argument("--config", required=True, help="JSON experiment config")
        p.add_argument("--out", default=None, help="output directory (default $MONOSUM_OUT or ./monosum_out)")
        p.add_argument("--format", default=None, choices=("json", "csv"), help="report format")
        p.add_argument("--seed", type=int, default=None, help="random seed override")
        p.add_argument("--workers", type=int, default=None, help="parallel sweep workers")
        p.add_argument(
            "--set",
            action="append",
            default=[],
            metavar="PATH=VALUE",
            help="override a config leaf by dotted path (VALUE parsed as JSON)",
        )
    return parser


def apply_override(config: dict, item: str) -> None:
    if "=" not in item:
        raise ConfigurationError(f"--set needs PATH=VALUE, got '{item}'")
    path, raw = item.split("=", 1)
    keys = path.strip().split(".")
    try:
        value = json.loads(raw)
    except json.JSONDecodeError:
        value = raw
    node = config
    for k in keys[:-1]:
        node = node.setdefault(k, {})
        if not isinstance(node, dict):
            raise ConfigurationError(f"--set path '{path}' crosses a non-object")
    node[keys[-1]] = value


def load_config(args) -> dict:
    if not os.path.exists(args.config):
        raise ConfigurationError(f"config file not found: {args.config}")
    with open(args.config) as fh:
        try:
            config = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigurationError(f"config is not valid JSON: {exc}") from exc
    if not isinstance(config, dict):
        raise ConfigurationError("config must be a JSON object")
    config.setdefault("command", args.command)
    if config["command"] != args.command:
        raise ConfigurationError(
            f"config command '{config['command']}' does not match subcommand '{args.command}'"
        )
    for item in args.set:
        apply_override(config, item)
    if args.out is not None:
        config["out"] = args.out
    if args.format is not None:
        config["format"] = args.format
    if args.seed is not None:
        config["seed"] = args.seed
    if args.workers is not None:
        config["workers"] = args.workers
    config.setdefault("seed", 0)
    config.setdefault("format", "json")
    config.setdefault("workers", 1)
    config.setdefault("out", os.environ.get("MONOSUM_OUT", "monosum_out"))
    for key in ("tol",):
        if key in config and config[key] <= 0:
            raise ConfigurationError(f"'{key}' must be positive")
    return config


def positive_tol(doc: dict, default: float) -> float:
    tol = float(doc.get("tol", default))
    if tol <= 0:
        raise ConfigurationError("'tol' must be positive")
    return tol


def parse_path(doc) -> FilterPath:
    if doc is None:
        return FilterPath.diagonal()
    if isinstance(doc, dict) and "pairs" in doc:
        return FilterPath(tuple((float(a), float(b)) for a, b in doc["pairs"]),
                          label=doc.get("label", "explicit"))
    if isinstance(doc, dict):
        kind = doc.get("kind", "diagonal")
        depth = int(doc.get("depth", 22))
        if kind == "diagonal":
            return FilterPath.diagonal(depth)
        if kind == "two_speed":
            return FilterPath.two_speed(depth)
        if kind == "second_only":
            return FilterPath.second_only(depth)
    raise ConfigurationError(f"unknown path spec {doc!r}")


def parse_forcing(doc, grid: GridSpec | None):
    if doc is None or doc == "zero" or (isinstance(doc, dict) and "zero" in doc):
        return ZeroForcing()
    if isinstance(doc, str):
        from monosum.problems import forcing_preset

        if grid is None:
            raise ConfigurationError("named forcing presets need a grid")
        return forcing_preset(doc, grid)
    if isinstance(doc, dict):
        if "constant" in doc:
            return ConstantForcing(np.asarray(doc["constant"], dtype=float))
        if "table" in doc:
            t = doc["table"]
            return TableForcing(t["times"], t["values"])
    raise ConfigurationError(f"unknown forcing spec {doc!r}")


def parse_problem(doc: dict) -> EvolutionProblem:
    if not isinstance(doc, dict):
        raise ConfigurationError("'problem' must be an object")
    ptype = doc.get("type", "custom")
    if ptype == "reaction_diffusion":
        grid = parse_grid(doc["grid"])
        problem = reaction_diffusion_problem(
            grid,
            doc.get("reaction", "cubic"),
            doc.get("forcing", "zero"),
            float(doc.get("horizon", 1.0)),
            doc.get("strategy", "algebraic"),
        )
    elif ptype == "form_sum":
        grid = parse_grid(doc["grid"])
        problem = form_sum_problem(
            grid,
            parse_potential(doc.get("potential", {})),
            doc.get("forcing", "zero"),
            float(doc.get("horizon", 1.0)),
        )
    elif ptype == "custom":
        A = parse_operator(doc["a"])
        B = parse_operator(doc["b"])
        dim = int(doc.get("dim") or A.dimension or B.dimension)
        problem = EvolutionProblem(
            A,
            B,
            parse_forcing(doc.get("forcing"), None),
            float(doc.get("horizon", 1.0)),
            dim,
            strategy=doc.get("strategy", "algebraic"),
        )
    else:
        raise ConfigurationError(f"unknown problem type '{ptype}'")
    if "path" in doc:
        problem.path = parse_path(doc["path"])
    return problem


def _write(out_dir, stem, payload, fmt, csv_data=None):
    os.makedirs(out_dir, exist_ok=True)
    files = []
    json_path = os.path.join(out_dir, f"{stem}.json")
    write_json_report(json_path, payload)
    files.append(json_path)
    if fmt == "csv" and csv_data is not None:
        header, rows = csv_data
        csv_path = os.path.join(out_dir, f"{stem}.csv")
        write_csv_report(csv_path, header, rows)
        files.append(csv_path)
    return files


def run_resolvent(config):
    T = parse_operator(config["operator"])
    lam = float(config.get("lambda", 1.0))
    w = parse_vector(config["w"], seed=config["seed"])
    tol = positive_tol(config, 1e-11)
    u = resolvent(T, lam, w, tol)
    payload = to_plain({"kind": "resolvent", "lambda": lam, "tol": tol, "w": w, "u": u})
    files = _write(config["out"], "resolvent_report", payload, config["format"])
    return STATUS_OK, files, payload


def run_vsum(config):
    A = parse_operator(config["a"])
    B = parse_operator(config["b"])
    w = parse_vector(config["w"], seed=config["seed"])
    tol = positive_tol(config, 1e-8)
    path = parse_path(config.get("path"))
    _, report = variational_sum_resolvent(A, B, w, path=path, tol=tol)
    payload = report.to_payload()
    files = _write(config["out"], "vsum_report", payload, config["format"], report.csv_rows())
    return (STATUS_OK if report.converged else STATUS_FINDING), files, payload


def run_evolve(config):
    problem = parse_problem(config["problem"])
    steps = int(config.get("steps", 100))
    tol = positive_tol(config, 1e-8)
    traj = implicit_euler_solve(problem, steps, tol)
    payload = traj.to_payload()
    files = _write(config["out"], "evolve_report", payload, config["format"])
    header, rows = traj.csv_rows()
    traj_path = os.path.join(config["out"], "trajectory.csv")
    write_csv_report(traj_path, header, rows)
    files.append(traj_path)
    return STATUS_OK, files, payload


def run_diagnose(config):
    kind = config.get("kind")
    if kind not in DIAGNOSE_KINDS:
        raise ConfigurationError(f"diagnose kind must be one of {DIAGNOSE_KINDS}")
    A = parse_operator(config["a"])
    B = parse_operator(config["b"])
    seed = int(config["seed"])
    if kind == "commutation":
        report = check_resolvent_commutation(
            A,
            B,
            [float(x) for x in config.get("lambdas", [1.0, 0.1])],
            [float(x) for x in config.get("mus", [1.0, 0.1])],
            int(config.get("samples", 10)),
            positive_tol(config, 1e-9),
            seed=seed,
        )
    elif kind == "acute-angle":
        report = check_acute_angle(
            A,
            B,
            [float(x) for x in config.get("lambdas", [1.0, 0.1])],
            [float(x) for x in config.get("mus", [1.0, 0.1])],
            int(config.get("samples", 20)),
            seed=seed,
        )
    else:
        report = boundedness_diagnostic(
            A,
            B,
            parse_vector(config["w"], seed=seed),
            parse_path(config.get("path")),
        )
    payload = report.to_payload()
    files = _write(
        config["out"], f"diagnose_{kind.replace('-', '_')}_report", payload,
        config["format"], report.csv_rows(),
    )
    return (STATUS_OK if report.passed else STATUS_FINDING), files, payload


def run_sweep(config):
    axis = config.get("axis")
    values = config.get("values") or []
    if not values:
        raise ConfigurationError("sweep needs a nonempty 'values' axis")
    base = config.get("base") or {}
    workers = max(1, int(config["workers"]))
    out_dir = config["out"]
    fmt = config["format"]

    if axis == "steps":
        problem = parse_problem(base["problem"])
        tol = positive_tol(base, 1e-8)
        steps_list = [int(v) for v in values]
        reference = int(config.get("reference_steps", 16 * max(steps_list)))
        report = step_convergence_study(problem, steps_list, reference, tol)
        payload = report.to_payload()
        payload["axis"] = "steps"
        payload["values"] = steps_list
        files = _write(out_dir, "sweep_report", payload, fmt, report.csv_rows())
        for idx, (steps, record) in enumerate(zip(steps_list, report.records)):
            point = to_plain(
                {
                    "kind": "steps_point",
                    "steps": steps,
                    "tau": record.lam,
                    "final_norm": record.iterate_norm,
                    "error_vs_reference": record.successive_diff,
                }
            )
            pf = os.path.join(out_dir, f"sweep_point_{idx:03d}.json")
            write_json_report(pf, point)
            files.append(pf)
        header, rows = report.csv_rows()
        agg = os.path.join(out_dir, "sweep_aggregate.csv")
        write_csv_report(agg, header, rows)
        files.append(agg)
        return STATUS_OK, files, payload

    if axis == "strategy":
        steps = int(base.get("steps", 50))
        tol = positive_tol(base, 1e-8)

        def run_one(strategy):
            doc = json.loads(json.dumps(base["problem"]))
            doc["strategy"] = strategy
            problem = parse_problem(doc)
            return implicit_euler_solve(problem, steps, tol)

        with ThreadPoolExecutor(max_workers=workers) as pool:
            trajectories = list(pool.map(run_one, [str(v) for v in values]))
        ref = trajectories[0]
        rows = []
        for name, traj in zip(values, trajectories):
            gap = float(np.max(np.abs(traj.states - ref.states)))
            rows.append([str(name), gap])
        payload = to_plain(
            {
                "kind": "strategy_sweep",
                "values": [str(v) for v in values],
                "max_nodal_disagreement": max(r[1] for r in rows),
                "per_strategy_gap_to_first": rows,
                "steps": steps,
                "tolerance": tol,
            }
        )
        files = _write(out_dir, "sweep_report", payload, fmt, (["strategy", "gap"], rows))
        agg = os.path.join(out_dir, "sweep_aggregate.csv")
        write_csv_report(agg, ["strategy", "gap"], rows)
        files.append(agg)
        point_files = []
        for idx, traj in enumerate(trajectories):
            pf = os.path.join(out_dir, f"sweep_point_{idx:03d}.json")
            write_json_report(pf, traj.to_payload())
            point_files.append(pf)
        return STATUS_OK, files + point_files, payload

    if axis == "path":
        A = parse_operator(base["a"])
        B = parse_operator(base["b"])
        w = parse_vector(base["w"], seed=config["seed"])
        tol = positive_tol(base, 1e-8)

        def run_one(doc):
            return variational_sum_resolvent(A, B, w, path=parse_path(doc), tol=tol)

        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(run_one, values))
        limits = [u for u, _ in results]
        rows = []
        for doc, (u, rep) in zip(values, results):
            rows.append(
                [json.dumps(doc), float(np.linalg.norm(u)),
                 float(np.linalg.norm(u - limits[0])), rep.converged]
            )
        all_converged = all(rep.converged for _, rep in results)
        payload = to_plain(
            {
                "kind": "path_sweep",
                "max_limit_disagreement": max(r[2] for r in rows),
                "rows": rows,
                "tolerance": tol,
                "all_converged": all_converged,
            }
        )
        header = ["path", "limit_norm", "gap_to_first", "converged"]
        files = _write(out_dir, "sweep_report", payload, fmt, (header, rows))
        agg = os.path.join(out_dir, "sweep_aggregate.csv")
        write_csv_report(agg, header, rows)
        files.append(agg)
        point_files = []
        for idx, (_, rep) in enumerate(results):
            pf = os.path.join(out_dir, f"sweep_point_{idx:03d}.json")
            write_json_report(pf, rep.to_payload())
            point_files.append(pf)
        status = STATUS_OK if all_converged else STATUS_FINDING
        return status, files + point_files, payload

    raise ConfigurationError("sweep axis must be 'steps', 'strategy', or 'path'")


RUNNERS = {
    "resolvent": run_resolvent,
    "vsum": run_vsum,
    "evolve": run_evolve,
    "diagnose": run_diagnose,
    "sweep": run_sweep,
}


def run(config: dict):
    command = config.get("command")
    if command not in RUNNERS:
        raise ConfigurationError(f"unknown command '{command}'")
    return RUNNERS[command](config)


def main(argv=None) -> int:
    parser = build_parser()
    config = None
    try:
        args = parser.parse_args(argv)
        config = load_config(args)
        status, files, _ = run(config)
    except ConfigurationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        parser.print_usage(sys.stderr)
        return STATUS_ERROR
    except MonosumError as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        if config is not None:
            payload = {"kind": "error", "error_type": type(exc).__name__, "message": str(exc)}
            for f in _write(config["out"], "error_report", payload, config["format"]):
                print(f)
        return STATUS_ERROR
    for f in files:
        print(f)
    return status


if __name__ == "__main__":
    sys.exit(main())
