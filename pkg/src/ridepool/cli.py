"""Command-line entry point: ``ridepool <subcommand> [options]``.

Exit status is 0 on success, 2 when an emitted or checked solution has
constraint violations, and 1 on bad input.
"""
from __future__ import annotations

import argparse
import configparser
import dataclasses
import json
import logging
import os
import sys

import numpy as np

from .bench import run_bench
from .grouping import partition_stable_groups
from .ingest import ingest_trip_records
from .instance import ENV_PREFIX, Instance, InstanceConfig, generate_random_instance, load_config, random_vehicles
from .model import EconomicParams, validate_assignment
from .oracle import brute_force_optimal
from .pipeline import assignment_from_dict, run_pipeline
from .vtg import build_vtg

log = logging.getLogger("ridepool")

EXIT_OK, EXIT_INPUT, EXIT_VIOLATION = 0, 1, 2


class InputError(Exception):
    pass


def _flag(name: str) -> str:
    return "--" + name.replace("_", "-")


def _config_flags(parser: argparse.ArgumentParser):
    group = parser.add_argument_group("configuration (overrides --config and RIDEPOOL_* variables)")
    group.add_argument("--config", help="key = value file of configuration fields")
    for f in dataclasses.fields(EconomicParams):
        group.add_argument(_flag(f.name), dest=f.name, type=float, default=None)
    for f in dataclasses.fields(InstanceConfig):
        if f.name == "params":
            continue
        if isinstance(f.default, bool):
            group.add_argument(_flag(f.name), dest=f.name, default=None,
                               action=argparse.BooleanOptionalAction)
        elif f.name == "bbox":
            group.add_argument("--bbox", default=None, metavar="LON0,LAT0,LON1,LAT1")
        else:
            group.add_argument(_flag(f.name), dest=f.name, type=type(f.default), default=None)


_PARAM_NAMES = {f.name for f in dataclasses.fields(EconomicParams)}


def _config(args) -> InstanceConfig:
    names = _PARAM_NAMES | ({f.name for f in dataclasses.fields(InstanceConfig)} - {"params"})
    overrides = {n: getattr(args, n) for n in names if getattr(args, n, None) is not None}
    return load_config(args.config, overrides=overrides)


def _explicit_params(args) -> set:
    """Economic parameter names set by the config file, environment or flags."""
    keys = {n for n in _PARAM_NAMES if getattr(args, n, None) is not None}
    keys |= {k[len(ENV_PREFIX):].lower() for k in os.environ if k.startswith(ENV_PREFIX)}
    if args.config:
        parser = configparser.ConfigParser()
        with open(args.config) as fh:
            parser.read_string("[ridepool]\n" + fh.read())
        keys |= set(parser["ridepool"])
    return keys & _PARAM_NAMES


def _read_text(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    with open(path) as fh:
        return fh.read()


def _load_instance(path: str, config: InstanceConfig, explicit: set = frozenset()) -> Instance:
    """Instance JSON; explicitly configured economic parameters override the file's."""
    try:
        data = json.loads(_read_text(path))
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: not valid JSON ({exc})") from exc
    if not isinstance(data, dict):
        raise InputError(f"{path}: expected a JSON object")
    inst = Instance.from_dict(data)
    changes = {k: getattr(config.params, k) for k in explicit}
    inst.params = dataclasses.replace(inst.params, **changes) if "params" in data else config.params
    return inst


def _emit(payload, out: str | None):
    text = payload if isinstance(payload, str) else json.dumps(payload, sort_keys=True, indent=2)
    if out:
        with open(out, "w") as fh:
            fh.write(text + "\n")
    else:
        sys.stdout.write(text + "\n")


def cmd_ingest(args, config):
    res = ingest_trip_records(args.records, config)
    inst = Instance(res.requests, [], config.params)
    if args.vehicles:
        rng = np.random.default_rng(config.seed)
        inst.vehicles = random_vehicles(rng, args.vehicles, config)
    log.info("ingested %d of %d rows (%d outside bbox, %d outside window, %d skipped)",
             len(res), res.rows, res.outside_bbox, res.outside_window, res.skipped)
    _emit(inst.dumps(), args.out)
    return EXIT_OK


def cmd_gen(args, config):
    inst = generate_random_instance(config.seed, args.requests, args.vehicles, config)
    _emit(inst.dumps(), args.out)
    return EXIT_OK


def cmd_group(args, config):
    inst = _load_instance(args.instance, config, _explicit_params(args))
    groups = partition_stable_groups(inst.requests, inst.params, config.mode)
    _emit({"groups": [sorted(g) for g in groups.groups], "leftover": sorted(groups.leftover)}, args.out)
    return EXIT_OK


def _run(args, config, solver):
    inst = _load_instance(args.instance, config, _explicit_params(args))
    report = run_pipeline(inst, config.replace(solver=solver), timing=args.timing,
                          oracle=not args.no_oracle)
    _emit(report.dumps(), args.out)
    return EXIT_VIOLATION if report.violations else EXIT_OK


def cmd_oracle(args, config):
    inst = _load_instance(args.instance, config, _explicit_params(args))
    vtg = build_vtg(inst.requests, inst.vehicles, inst.params)
    res = brute_force_optimal(vtg, inst.vehicles, inst.params)
    _emit({"served": res.best_served, "weight": round(res.best_weight, 6),
           "optimal_assignments": res.optimal_assignments}, args.out)
    return EXIT_OK


def cmd_bench(args, config):
    p_sizes = tuple(args.requests) if args.requests else (100, 1000, 10000)
    b_sizes = tuple(args.vehicles) if args.vehicles else (10, 100, 1000)
    _emit(run_bench(config.seed, p_sizes, b_sizes, args.branch_instances), args.out)
    return EXIT_OK


def cmd_validate(args, config):
    inst = _load_instance(args.instance, config, _explicit_params(args))
    try:
        data = json.loads(_read_text(args.assignment))
    except json.JSONDecodeError as exc:
        raise InputError(f"{args.assignment}: not valid JSON ({exc})") from exc
    # a run report holds one assignment per solver
    entries = data["solvers"] if "solvers" in data else {"assignment": data}
    out, bad = {}, 0
    for name, entry in sorted(entries.items()):
        a = assignment_from_dict(entry, inst)
        found = validate_assignment(a, inst.request_map, inst.vehicle_map, inst.params,
                                    strict_arrival=config.strict_arrival)
        out[name] = [f"{v.constraint}: {v.detail}" for v in found]
        bad += len(found)
    _emit({"violations": out}, args.out)
    return EXIT_VIOLATION if bad else EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ridepool", description="Pooled-ride vehicle assignment.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, func, help_):
        p = sub.add_parser(name, help=help_)
        p.set_defaults(func=func)
        p.add_argument("--out", help="write JSON here instead of standard output")
        _config_flags(p)
        return p

    p = add("ingest", cmd_ingest, "trip-record CSV to instance JSON")
    p.add_argument("records")
    p.add_argument("--vehicles", type=int, default=0, help="also place this many random vehicles")

    p = add("gen", cmd_gen, "seeded random instance JSON")
    p.add_argument("--requests", type=int, required=True)
    p.add_argument("--vehicles", type=int, required=True)

    p = add("group", cmd_group, "partition requests into stable groups")
    p.add_argument("instance")

    for name, solver, help_ in (("solve-flow", "flow", "max-flow heuristic"),
                                ("solve-bnb", "bnb", "exact branch-and-bound"),
                                ("run", "both", "both solvers side by side")):
        p = add(name, lambda a, c, s=solver: _run(a, c, s), help_ + ", as a run report")
        p.add_argument("instance")
        p.add_argument("--timing", action="store_true", help="include wall-clock times")
        p.add_argument("--no-oracle", action="store_true", help="skip the oracle gap")

    p = add("oracle", cmd_oracle, "exhaustive optimum for a small instance")
    p.add_argument("instance")

    p = add("bench", cmd_bench, "scaling and branch-count benchmark")
    p.add_argument("--requests", type=int, nargs="+")
    p.add_argument("--vehicles", type=int, nargs="+")
    p.add_argument("--branch-instances", type=int, default=30)

    p = add("validate", cmd_validate, "check an assignment or run report against an instance")
    p.add_argument("instance")
    p.add_argument("assignment")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        config = _config(args)
        return args.func(args, config)
    except (InputError, OSError, ValueError, KeyError, TypeError) as exc:
        print(f"ridepool {args.command}: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
