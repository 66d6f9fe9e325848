"""Command-line front end: ``fedsched {generate,schedule,sweep,gantt}``."""
from __future__ import annotations

import argparse
import logging
import os
import sys
from dataclasses import replace
from pathlib import Path

from . import __version__
from .constellation import build_temporal_graph, walker_delta
from .errors import (
    FedSchedError,
    NoRouteError,
    OutOfHorizonError,
    ScenarioError,
    TooManyClientsError,
    WindowOverrunError,
)
from .experiment import reduction_report, rows_csv, run_sweep, summary_json
from .fl_task import Client, FLTask
from .formats import read_schedule, read_temporal_graph, write_schedule, write_temporal_graph, write_text
from .gantt import render_gantt
from .scenario import bundled_plan_path, load_plan, load_scenario
from .scheduler import Policy, schedule

log = logging.getLogger("fedsched")

EXIT_OK, EXIT_INPUT, EXIT_IO, EXIT_NO_ROUTE, EXIT_HORIZON, EXIT_GUARD = 0, 2, 3, 4, 5, 6
_CODE_NAMES = {EXIT_INPUT: "bad_input", EXIT_IO: "io", EXIT_NO_ROUTE: "no_route",
               EXIT_HORIZON: "horizon", EXIT_GUARD: "guard"}


class CliError(Exception):
    def __init__(self, code: int, message: str):
        self.code = code
        super().__init__(message)


def _fail(code, message):
    raise CliError(code, message)


def _load(loader, path, what):
    try:
        return loader(path)
    except ScenarioError as exc:
        _fail(EXIT_INPUT, f"{what} {path}: {exc}")
    except OSError as exc:
        _fail(EXIT_IO, f"cannot read {what} {path}: {exc.strerror or exc}")


def _write(path, writer):
    try:
        return writer()
    except OSError as exc:
        _fail(EXIT_IO, f"cannot write {path}: {exc.strerror or exc}")


def cmd_generate(args) -> int:
    scen = _load(load_scenario, args.scenario, "scenario")
    if scen.constellation is None or not scen.sites:
        _fail(EXIT_INPUT, f"scenario {args.scenario}: constellation and sites are required to generate a graph")
    cfg = scen.constellation if args.seed is None else scen.constellation.with_seed(args.seed)
    sched = scen.scheduling
    tg = build_temporal_graph(cfg, scen.sites, sched.window_length_s, sched.horizon_windows, lazy=False)
    nodes = [{"id": e.id, "kind": "satellite", "name": e.id} for e in walker_delta(cfg)]
    nodes += [{"id": s.id, "kind": "site", "name": s.name} for s in scen.sites]
    meta = {"seed": cfg.rng_seed, "config_hash": scen.config_hash}
    _write(args.out, lambda: write_temporal_graph(args.out, tg, nodes, meta))
    for i in range(len(tg)):
        snap = tg[i]
        print(f"window {i}: nodes={len(snap.vertices)} edges={len(snap.edges)}")
    return EXIT_OK


def _node_resolver(nodes):
    by_name = {}
    for n in nodes:
        by_name.setdefault(n["id"], n["id"])
        by_name.setdefault(n.get("name", n["id"]), n["id"])

    def resolve(name):
        try:
            return by_name[name]
        except KeyError:
            _fail(EXIT_INPUT, f"task: site {name!r} is not a node of the graph")
    return resolve


def cmd_schedule(args) -> int:
    scen = _load(load_scenario, args.scenario, "scenario")
    if scen.task is None:
        _fail(EXIT_INPUT, f"scenario {args.scenario}: task: required field missing")
    tg, nodes, graph_meta = _load(read_temporal_graph, args.graph, "graph")
    resolve = _node_resolver(nodes)
    tmpl = scen.task
    try:
        task = FLTask(resolve(tmpl.server_site),
                      [Client(c, resolve(c), float(tmpl.multipliers.get(c, 1.0))) for c in tmpl.client_sites],
                      tmpl.model)
    except ValueError as exc:
        _fail(EXIT_INPUT, f"scenario {args.scenario}: task: {exc}")
    channel = args.channel or scen.scheduling.channel
    try:
        result = schedule(args.policy, tg, task, channel, args.t0, scen.scheduling.options)
    except NoRouteError as exc:
        unreachable = ",".join(exc.clients) if exc.clients else str(exc.dst)
        _fail(EXIT_NO_ROUTE, f"unreachable clients: {unreachable}")
    except (OutOfHorizonError, WindowOverrunError) as exc:
        _fail(EXIT_HORIZON, str(exc))
    except TooManyClientsError as exc:
        _fail(EXIT_GUARD, f"TooManyClients: {exc}")

    meta = {"config_hash": scen.config_hash, "graph": Path(args.graph).name}
    if "seed" in graph_meta:
        meta["seed"] = graph_meta["seed"]
    _write(args.out, lambda: write_schedule(args.out, result, meta))
    totals = {p: sum(iv.duration_s for iv in result.phase(p)) for p in ("distribute", "train", "upload")}
    print(f"policy={result.policy} makespan_s={result.makespan_s:.6f} "
          f"distribute_total_s={totals['distribute']:.6f} train_total_s={totals['train']:.6f} "
          f"upload_total_s={totals['upload']:.6f}")
    return EXIT_OK


def _resolve_plan_path(arg) -> Path:
    path = Path(arg)
    if path.exists():
        return path
    bundled = bundled_plan_path(arg)
    return bundled if bundled.exists() else path


def cmd_sweep(args) -> int:
    plan_path = _resolve_plan_path(args.plan)
    plan = _load(load_plan, plan_path, "plan")
    if args.seed is not None:
        plan = replace(plan, seeds=(args.seed,))
    elif args.limit_seeds:
        plan = replace(plan, seeds=plan.seeds[: args.limit_seeds])
    result = run_sweep(plan, jobs=args.jobs)
    out = Path(args.out_dir)
    _write(out, lambda: out.mkdir(parents=True, exist_ok=True))
    _write(out / "sweep.csv", lambda: write_text(out / "sweep.csv", rows_csv(result)))
    _write(out / "summary.json", lambda: write_text(out / "summary.json", summary_json(result)))
    if result.failures:
        log.warning("%d cells failed; see summary.json", len(result.failures))
    if {Policy.ON_DEMAND.value, Policy.STATISTICAL_MULTIPLEXING.value} <= set(plan.policies):
        sys.stdout.write(reduction_report(result))
    return EXIT_OK


def cmd_gantt(args) -> int:
    sched = _load(read_schedule, args.schedule, "schedule")
    try:
        svg = render_gantt(sched)
    except ValueError as exc:
        _fail(EXIT_INPUT, f"schedule {args.schedule}: {exc}")
    _write(args.out, lambda: write_text(args.out, svg))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="fedsched", description=__doc__)
    p.add_argument("--version", action="version", version=f"fedsched {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="materialise the temporal graph of a scenario")
    g.add_argument("scenario")
    g.add_argument("out")
    g.add_argument("--seed", type=int, help="override the constellation rng_seed")
    g.set_defaults(func=cmd_generate)

    s = sub.add_parser("schedule", help="schedule one round on a generated graph")
    s.add_argument("graph")
    s.add_argument("scenario")
    s.add_argument("out", help="output prefix; writes <out>.csv and <out>.json")
    s.add_argument("--policy", default=Policy.ON_DEMAND.value, choices=[q.value for q in Policy])
    s.add_argument("--t0", type=float, default=0.0)
    s.add_argument("--channel", choices=["per_direction", "joint"])
    s.set_defaults(func=cmd_schedule)

    w = sub.add_parser("sweep", help="run an experiment plan (path, or bundled name fig5/fig6)")
    w.add_argument("plan")
    w.add_argument("out_dir")
    w.add_argument("--jobs", type=int, default=1)
    w.add_argument("--seed", type=int, help="run only this seed")
    w.add_argument("--limit-seeds", type=int, help="run only the first N seeds of the plan")
    w.set_defaults(func=cmd_sweep)

    t = sub.add_parser("gantt", help="render a schedule JSON file as SVG")
    t.add_argument("schedule")
    t.add_argument("out")
    t.set_defaults(func=cmd_gantt)
    return p


def _setup_logging():
    level = os.environ.get("FEDSCHED_LOG", "error").upper()
    logging.basicConfig(level=getattr(logging, level, logging.ERROR), format="%(levelname)s %(name)s: %(message)s")
    logging.captureWarnings(True)


def main(argv=None) -> int:
    _setup_logging()
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except CliError as exc:
        msg = " ".join(str(exc).split())
        print(f"error[{exc.code}:{_CODE_NAMES[exc.code]}] {msg}", file=sys.stderr)
        return exc.code
    except FedSchedError as exc:
        print(f"error[{EXIT_INPUT}:bad_input] {' '.join(str(exc).split())}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
