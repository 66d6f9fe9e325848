"""Seeded sweeps over client count or model, comparing scheduling policies."""
from __future__ import annotations

import csv
import io
import json
import math
import statistics
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

from . import __version__
from .constellation import build_temporal_graph
from .errors import FedSchedError, MissingPolicyError, TransmissionOverrunWarning
from .fl_task import lookup_model
from .scenario import ExperimentPlan
from .scheduler import Policy, schedule


@dataclass(frozen=True)
class SweepRow:
    sweep_value: object
    policy: str
    seed: int
    makespan_s: float


@dataclass(frozen=True)
class CellFailure:
    sweep_value: object
    policy: str
    seed: int
    error: str
    message: str


@dataclass(frozen=True)
class PolicySummary:
    mean_s: float
    std_s: float
    count: int


@dataclass
class SweepResult:
    sweep_kind: str
    sweep_values: tuple
    policies: tuple
    seeds: tuple
    rows: list[SweepRow]
    failures: list[CellFailure] = field(default_factory=list)
    plan_hash: str = ""

    @property
    def summary(self) -> dict:
        """``(sweep_value, policy) -> PolicySummary`` over the rows that completed."""
        out = {}
        for value in self.sweep_values:
            for policy in self.policies:
                xs = [r.makespan_s for r in self.rows if r.sweep_value == value and r.policy == policy]
                if not xs:
                    continue
                std = statistics.stdev(xs) if len(xs) > 1 else 0.0
                out[(value, policy)] = PolicySummary(math.fsum(xs) / len(xs), std, len(xs))
        return out

    @property
    def reductions(self) -> dict:
        """Relative reduction of mean makespan, on-demand against multiplexing."""
        summary = self.summary
        out = {}
        od, mx = Policy.ON_DEMAND.value, Policy.STATISTICAL_MULTIPLEXING.value
        for value in self.sweep_values:
            if (value, od) in summary and (value, mx) in summary:
                m = summary[(value, mx)].mean_s
                out[value] = (m - summary[(value, od)].mean_s) / m
        return out

    def makespans(self, value, policy) -> dict:
        return {r.seed: r.makespan_s for r in self.rows if r.sweep_value == value and r.policy == policy}


def _run_seed(plan: ExperimentPlan, seed: int):
    scen = plan.scenario
    sched = scen.scheduling
    tg = build_temporal_graph(scen.constellation.with_seed(seed), scen.sites,
                              sched.window_length_s, sched.horizon_windows)
    rows, failures = [], []
    for value in plan.sweep_values:
        if plan.sweep_kind == "client_count":
            task = scen.task.build(scen.site_node, num_clients=value)
        else:
            task = scen.task.build(scen.site_node, model=lookup_model(value))
        for policy in plan.policies:
            try:
                with warnings.catch_warnings():
                    warnings.simplefilter("ignore", TransmissionOverrunWarning)
                    result = schedule(policy, tg, task, plan.channel, 0.0, sched.options)
            except FedSchedError as exc:
                failures.append(CellFailure(value, policy, seed, type(exc).__name__, str(exc)))
                continue
            rows.append(SweepRow(value, policy, seed, result.makespan_s))
    return rows, failures


def _run_seed_star(args):
    return _run_seed(*args)


def run_sweep(plan: ExperimentPlan, jobs: int = 1) -> SweepResult:
    """Schedule every (sweep value, seed, policy) cell from ``t0 = 0``.

    Each seed re-samples link bandwidths over the same orbital geometry.
    Cells that fail (unreachable client, horizon overrun) are collected in
    ``failures`` and do not stop the sweep. Output order is canonical and
    independent of ``jobs``.
    """
    work = [(plan, s) for s in plan.seeds]
    if jobs > 1 and len(work) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            parts = list(pool.map(_run_seed_star, work))
    else:
        parts = [_run_seed(*w) for w in work]
    rows = [r for part, _ in parts for r in part]
    failures = [f for _, part in parts for f in part]

    vpos = {v: i for i, v in enumerate(plan.sweep_values)}
    ppos = {p: i for i, p in enumerate(plan.policies)}
    spos = {s: i for i, s in enumerate(plan.seeds)}
    key = lambda r: (vpos[r.sweep_value], ppos[r.policy], spos[r.seed])  # noqa: E731
    rows.sort(key=key)
    failures.sort(key=key)
    return SweepResult(plan.sweep_kind, plan.sweep_values, plan.policies, plan.seeds, rows, failures,
                       plan.plan_hash)


def reduction_report(result: SweepResult) -> str:
    """Plain-text table of mean makespans and the on-demand reduction per sweep value."""
    od, mx = Policy.ON_DEMAND.value, Policy.STATISTICAL_MULTIPLEXING.value
    missing = [p for p in (od, mx) if p not in result.policies]
    if missing:
        raise MissingPolicyError(f"reduction report needs both policies; missing {', '.join(missing)}")
    summary = result.summary
    header = (result.sweep_kind, "multiplexed_mean_s", "on_demand_mean_s", "abs_reduction_s",
              "rel_reduction_pct", "n")
    lines = [header]
    for value in result.sweep_values:
        a, b = summary.get((value, mx)), summary.get((value, od))
        if a is None or b is None:
            lines.append((str(value), "-", "-", "-", "-", "0"))
            continue
        diff = a.mean_s - b.mean_s
        lines.append((str(value), f"{a.mean_s:.3f}", f"{b.mean_s:.3f}", f"{diff:.3f}",
                      f"{100.0 * diff / a.mean_s:.2f}", str(min(a.count, b.count))))
    widths = [max(len(row[i]) for row in lines) for i in range(len(header))]
    return "\n".join("  ".join(cell.rjust(w) for cell, w in zip(row, widths)) for row in lines) + "\n"


def rows_csv(result: SweepResult) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(("sweep_kind", "sweep_value", "policy", "seed", "makespan_s", "plan_hash", "version"))
    for r in result.rows:
        w.writerow((result.sweep_kind, r.sweep_value, r.policy, r.seed, repr(r.makespan_s),
                    result.plan_hash, __version__))
    return buf.getvalue()


def summary_dict(result: SweepResult) -> dict:
    return {
        "format_version": "1.0",
        "generator": f"fedsched {__version__}",
        "plan_hash": result.plan_hash,
        "sweep_kind": result.sweep_kind,
        "sweep_values": list(result.sweep_values),
        "policies": list(result.policies),
        "seeds": list(result.seeds),
        "summary": [
            {"sweep_value": v, "policy": p, "mean_s": s.mean_s, "std_s": s.std_s, "count": s.count}
            for (v, p), s in result.summary.items()
        ],
        "reductions": [{"sweep_value": v, "reduction": r} for v, r in result.reductions.items()],
        "failures": [vars(f) for f in result.failures],
    }


def summary_json(result: SweepResult) -> str:
    return json.dumps(summary_dict(result), indent=1) + "\n"
