"""Experiment CLI: simulate | fluid | compare | sweep | oracle.

Every output file starts with a '#'-prefixed metadata block (version, seed,
generator, backend, config echo) followed by a CSV body, and is a pure
function of the configuration: the same invocation writes byte-identical
files.  Exit codes: 0 success, 1 tolerance violation in `compare`, 2 bad
configuration, 3 I/O failure.
"""

from __future__ import annotations

import argparse
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import __version__, backend, cm, fluid
from .criteria import CriterionKind
from .degrees import parse_model_spec, pmf_truncated, poisson_support_bound, sample_degree_vector
from .errors import ConfigError, LocalMatchError
from .offline import SimpleGraph, enumerate_offline
from .rng import GENERATOR_NAME, RandomSource

EXIT_OK = 0
EXIT_TOLERANCE = 1
EXIT_CONFIG = 2
EXIT_IO = 3

DEFAULT_GRID = tuple(np.round(np.linspace(0.0, 1.0, 11), 10))
POISSON_TAIL_EPS = 1e-12


def _metadata_lines(args_echo: dict) -> list[str]:
    lines = [
        f"# localmatch {__version__}",
        f"# generator: {GENERATOR_NAME}",
        f"# backend: {backend.default_name()}",
    ]
    for key in sorted(args_echo):
        lines.append(f"# {key}: {args_echo[key]}")
    return lines


def _write_csv(path, meta: dict, header: list[str], rows):
    def emit(fh):
        for line in _metadata_lines(meta):
            fh.write(line + "\n")
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(str(x) for x in row) + "\n")

    if path is None or path == "-":
        emit(sys.stdout)
    else:
        with open(path, "w") as fh:
            emit(fh)


def _simulate_one(payload):
    model_spec, criterion_name, n, seed_entropy, child_index, grid = payload
    model = parse_model_spec(model_spec)
    kind = CriterionKind.from_name(criterion_name)
    root = RandomSource(seed_entropy)
    child = root.spawn(child_index + 1)[child_index]
    dv = sample_degree_vector(model, n, child)
    traj = cm.run(dv, kind, child, grid=grid)
    return traj


def _run_replicates(model_spec, criterion_name, n, replicates, seed, grid, workers):
    payloads = [(model_spec, criterion_name, n, seed, i, grid) for i in range(replicates)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(_simulate_one, payloads))
    return [_simulate_one(p) for p in payloads]


def _summary_rows(trajs, seed, n, model_spec, criterion_name):
    rows = []
    for i, t in enumerate(trajs):
        rows.append([
            i, f"{t.coverage:.12g}", f"{t.blocked_frac:.12g}", t.selfloops,
            t.multiedges, seed, n, model_spec, criterion_name,
        ])
    return rows


SUMMARY_HEADER = ["replicate", "coverage", "blocked_frac", "selfloops",
                  "multiedges", "seed", "n", "model", "criterion"]


def cmd_simulate(args) -> int:
    grid = tuple(float(t) for t in args.grid.split(",")) if args.grid else DEFAULT_GRID
    trajs = _run_replicates(args.model, args.criterion, args.n, args.replicates,
                            args.seed, grid, args.workers)
    meta = {"command": "simulate", "model": args.model, "criterion": args.criterion,
            "n": args.n, "replicates": args.replicates, "seed": args.seed}
    _write_csv(args.out, meta, SUMMARY_HEADER,
               _summary_rows(trajs, args.seed, args.n, args.model, args.criterion))
    if args.trajectory_out:
        rows = []
        for i, t in enumerate(trajs):
            for tt, mu in zip(t.grid, t.measures):
                for deg, w in enumerate(mu.weights):
                    if w != 0.0:
                        rows.append([i, f"{tt:.10g}", deg, f"{w:.12g}"])
        _write_csv(args.trajectory_out, meta, ["replicate", "t", "degree", "weight"], rows)
    covs = np.array([t.coverage for t in trajs])
    print(f"coverage mean={covs.mean():.6f} std={covs.std(ddof=1) if len(covs) > 1 else 0.0:.6f} "
          f"({args.replicates} replicates, n={args.n})")
    return EXIT_OK


def _fluid_coverage(model_spec, criterion_name, mesh):
    """Returns (coverage, t_halt, solution_or_none, poisson_flag, warning)."""
    kind = CriterionKind.from_name(criterion_name)
    model = parse_model_spec(model_spec)
    warning = ""
    if model.kind == "poisson":
        if kind is CriterionKind.GREEDY:
            sol = fluid.solve_poisson_greedy(model.rho, mesh)
            return sol.coverage, sol.t_halt, None, True, warning
        warning = ("out-of-hypothesis: bounded-support theory applied to a "
                   "truncated poisson input")
        bound = poisson_support_bound(model.rho, POISSON_TAIL_EPS)
        initial = pmf_truncated(model, bound, POISSON_TAIL_EPS)
    else:
        bound = model.finite_support()
        initial = pmf_truncated(model, bound, POISSON_TAIL_EPS)
    system = fluid.FluidSystem(kind=kind, initial=initial.weights)
    sol = fluid.solve(system, mesh)
    return sol.coverage, sol.t_halt, sol, False, warning


def cmd_fluid(args) -> int:
    meta = {"command": "fluid", "criterion": args.criterion, "mesh": args.mesh}
    if args.poisson is not None:
        if args.criterion != "greedy":
            raise ConfigError("--poisson routes to the scalar reduction, which is greedy-only")
        sol = fluid.solve_poisson_greedy(args.poisson, args.mesh)
        meta["poisson"] = args.poisson
        _write_csv(args.out, meta, ["model", "criterion", "h", "coverage", "t_halt"],
                   [[f"poisson:rho={args.poisson:g}", "greedy", args.mesh,
                     f"{sol.coverage:.12g}", f"{sol.t_halt:.10g}" if sol.t_halt is not None else ""]])
        print(f"fluid coverage={sol.coverage:.6f} (poisson rho={args.poisson}, scalar reduction)")
        return EXIT_OK
    meta["model"] = args.model
    coverage, t_halt, sol, _, warning = _fluid_coverage(args.model, args.criterion, args.mesh)
    if warning:
        meta["warning"] = warning
        print(f"warning: {warning}", file=sys.stderr)
    _write_csv(args.out, meta, ["model", "criterion", "h", "coverage", "t_halt"],
               [[args.model, args.criterion, args.mesh, f"{coverage:.12g}",
                 f"{t_halt:.10g}" if t_halt is not None else ""]])
    if args.solution_out and sol is not None:
        rows = []
        stride = max(1, len(sol.grid) // 200)
        for i in range(0, len(sol.grid), stride):
            for deg, w in enumerate(sol.states[i]):
                if w != 0.0:
                    rows.append([f"{sol.grid[i]:.10g}", deg, f"{w:.12g}"])
        _write_csv(args.solution_out, meta, ["t", "degree", "weight"], rows)
    print(f"fluid coverage={coverage:.6f} ({args.model}, {args.criterion}, h={args.mesh})")
    return EXIT_OK


def cmd_compare(args) -> int:
    grid = (0.0, 1.0)
    trajs = _run_replicates(args.model, args.criterion, args.n, args.replicates,
                            args.seed, grid, args.workers)
    covs = np.array([t.coverage for t in trajs])
    sim_mean = float(covs.mean())
    sim_std = float(covs.std(ddof=1)) if len(covs) > 1 else 0.0
    fluid_cov, _, _, _, warning = _fluid_coverage(args.model, args.criterion, args.mesh)
    if warning:
        print(f"warning: {warning}", file=sys.stderr)
    gap = abs(sim_mean - fluid_cov)
    meta = {"command": "compare", "model": args.model, "criterion": args.criterion,
            "n": args.n, "replicates": args.replicates, "seed": args.seed,
            "mesh": args.mesh, "tol": args.tol}
    _write_csv(args.out, meta,
               ["model", "criterion", "n", "replicates",
                "coverage_sim_mean", "coverage_sim_std", "coverage_fluid", "abs_gap"],
               [[args.model, args.criterion, args.n, args.replicates,
                 f"{sim_mean:.12g}", f"{sim_std:.12g}", f"{fluid_cov:.12g}", f"{gap:.12g}"]])
    print(f"sim={sim_mean:.6f}±{sim_std:.6f} fluid={fluid_cov:.6f} gap={gap:.6f} tol={args.tol}")
    return EXIT_OK if gap <= args.tol else EXIT_TOLERANCE


def _parse_range(spec: str):
    """start:stop[:step] inclusive; integers unless a dot appears."""
    parts = spec.split(":")
    if len(parts) not in (2, 3):
        raise ConfigError(f"range {spec!r} must be start:stop[:step]")
    is_float = any("." in p for p in parts)
    step = (float(parts[2]) if is_float else int(parts[2])) if len(parts) == 3 else (1.0 if is_float else 1)
    start = float(parts[0]) if is_float else int(parts[0])
    stop = float(parts[1]) if is_float else int(parts[1])
    out = []
    v = start
    while v <= stop + (1e-9 if is_float else 0):
        out.append(round(v, 10) if is_float else v)
        v += step
    return out


def cmd_sweep(args) -> int:
    criteria = [c.strip() for c in args.criteria.split(",")]
    values = _parse_range(args.range)
    rows = []
    for value in values:
        if args.family == "regular":
            spec = f"regular:d={value}"
        elif args.family == "uniform":
            spec = f"uniform:a=1,b={value}"
        elif args.family == "poisson":
            spec = f"poisson:rho={value}"
        else:
            raise ConfigError(f"unknown sweep family {args.family!r}")
        for crit in criteria:
            coverage, _, _, _, warning = _fluid_coverage(spec, crit, args.mesh)
            if warning:
                print(f"warning: {spec} {crit}: {warning}", file=sys.stderr)
            rows.append([args.family, value, spec, crit, f"{coverage:.12g}"])
    meta = {"command": "sweep", "family": args.family, "range": args.range,
            "criteria": args.criteria, "mesh": args.mesh}
    _write_csv(args.out, meta, ["family", "value", "model", "criterion", "coverage"], rows)
    print(f"sweep {args.family} over {len(values)} points x {len(criteria)} criteria done")
    return EXIT_OK


def cmd_oracle(args) -> int:
    graph = SimpleGraph.from_edge_list_file(args.graph)
    kind = CriterionKind.from_name(args.criterion)
    dist = enumerate_offline(graph, kind)
    rows = [[f"{float(cov):.12g}", f"{float(p):.12g}", cov.numerator, cov.denominator]
            for cov, p in sorted(dist.items())]
    meta = {"command": "oracle", "graph": args.graph, "criterion": args.criterion}
    _write_csv(args.out, meta, ["coverage", "probability", "num", "den"], rows)
    return EXIT_OK


def _apply_config_file(argv: list[str]) -> list[str]:
    """Expand --config file entries (key=value per line) into long flags.

    Explicit command-line flags win because they come later in argv.
    """
    if "--config" not in argv:
        return argv
    i = argv.index("--config")
    try:
        path = argv[i + 1]
    except IndexError:
        raise ConfigError("--config needs a file path")
    expanded = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            key, _, value = line.partition("=")
            if not value:
                raise ConfigError(f"bad config line {line!r}")
            expanded.extend([f"--{key.strip()}", value.strip()])
    return argv[: i] + expanded + argv[i + 2 :]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="localmatch",
                                     description="matching algorithms on CM graphs: "
                                                 "simulation and fluid limits")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common_sim(p):
        p.add_argument("--model", required=True)
        p.add_argument("--criterion", required=True)
        p.add_argument("--n", type=int, required=True)
        p.add_argument("--replicates", type=int, default=1)
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--workers", type=int, default=1)
        p.add_argument("--out", default=None)
        p.add_argument("--config", help="key=value file supplying any of these flags")

    p = sub.add_parser("simulate", help="Monte Carlo runs of the joint construction")
    add_common_sim(p)
    p.add_argument("--grid", help="comma-separated sample times in [0,1]")
    p.add_argument("--trajectory-out", default=None)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("fluid", help="solve the limit ODE system")
    p.add_argument("--model")
    p.add_argument("--poisson", type=float, help="rho for the scalar greedy reduction")
    p.add_argument("--criterion", default="greedy")
    p.add_argument("--mesh", type=float, default=1e-4)
    p.add_argument("--out", default=None)
    p.add_argument("--solution-out", default=None)
    p.add_argument("--config")
    p.set_defaults(func=cmd_fluid)

    p = sub.add_parser("compare", help="simulated coverage against the fluid prediction")
    add_common_sim(p)
    p.add_argument("--mesh", type=float, default=1e-4)
    p.add_argument("--tol", type=float, default=0.01)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("sweep", help="fluid coverage over a parameter range")
    p.add_argument("--family", required=True, choices=["regular", "uniform", "poisson"])
    p.add_argument("--range", required=True, help="start:stop[:step]")
    p.add_argument("--criteria", default="greedy,uni-min")
    p.add_argument("--mesh", type=float, default=1e-4)
    p.add_argument("--out", default=None)
    p.add_argument("--config")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("oracle", help="exact coverage law on a small graph file")
    p.add_argument("--graph", required=True, help="edge list file, 'u v' per line")
    p.add_argument("--criterion", default="greedy")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_oracle)

    return parser


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        argv = _apply_config_file(argv)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code not in (0, None) else EXIT_OK
    try:
        return args.func(args)
    except (ConfigError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO
    except LocalMatchError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
