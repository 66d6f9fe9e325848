"""Feasibility checks for round schedules.

Violations are returned as data; nothing here raises on an infeasible
schedule.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import OutOfHorizonError
from .fl_task import FLTask, training_time
from .scheduler import PHASES, SERIAL_POLICIES, TIME_ATOL, RoundSchedule, ScheduleOptions, transfer_duration
from .temporal_graph import TemporalGraph

BITS_RTOL = 1e-6


@dataclass(frozen=True)
class Violation:
    kind: str        # duration | precedence | channel_conflict | makespan | missing_interval | path | payload
    constraint: str
    client_id: str | None = None
    phase: str | None = None
    detail: str = ""

    def __str__(self):
        who = f" client={self.client_id}" if self.client_id is not None else ""
        ph = f" phase={self.phase}" if self.phase else ""
        return f"{self.kind}[{self.constraint}]{who}{ph}: {self.detail}"


def _overlaps(intervals):
    """Pairs of intervals that overlap by more than the time tolerance."""
    ivs = sorted(intervals, key=lambda iv: (iv.start_s, iv.end_s, iv.client_id))
    out = []
    for i, a in enumerate(ivs):
        for b in ivs[i + 1:]:
            if b.start_s >= a.end_s - TIME_ATOL:
                break
            if min(a.end_s, b.end_s) - max(a.start_s, b.start_s) > TIME_ATOL:
                out.append((a, b))
    return out


def _check_path(tg, task, iv, round_start, out):
    if iv.path is None:
        out.append(Violation("path", "transmission_has_path", iv.client_id, iv.phase, "missing path"))
        return
    site = task.client(iv.client_id).site
    src, dst = (task.server, site) if iv.phase == "distribute" else (site, task.server)
    if iv.path.nodes[0] != src or iv.path.nodes[-1] != dst:
        out.append(Violation("path", "path_endpoints", iv.client_id, iv.phase,
                             f"path runs {iv.path.nodes[0]}->{iv.path.nodes[-1]}, expected {src}->{dst}"))
    # downloads are all routed when the round is planned; uploads when they start
    routed_at = round_start if iv.phase == "distribute" else iv.start_s
    try:
        window = tg.window_of(routed_at)
    except OutOfHorizonError:
        out.append(Violation("path", "within_horizon", iv.client_id, iv.phase,
                             f"routed at {routed_at} beyond the horizon"))
        return
    if iv.path.window_index != window:
        out.append(Violation("path", "path_window", iv.client_id, iv.phase,
                             f"path taken from window {iv.path.window_index}, expected window {window}"))
        return
    snap = tg[window]
    for (a, b), e in zip(zip(iv.path.nodes[:-1], iv.path.nodes[1:]), iv.path.edges):
        live = snap.edge_between(a, b)
        if live is None or live.bandwidth_mbps != e.bandwidth_mbps:
            out.append(Violation("path", "path_edges", iv.client_id, iv.phase,
                                 f"edge {a}-{b} absent or altered in window {window}"))
            break


def _check_fluid(task, iv, opts, out):
    bits = task.model.size_mbit
    segs = iv.segments
    if not segs:
        out.append(Violation("duration", f"{iv.phase}_bits_delivered", iv.client_id, iv.phase,
                             "fluid transfer has no rate segments"))
        return
    delivered = math.fsum(rate * (e - s) for s, e, rate in segs)
    if abs(delivered - bits) > BITS_RTOL * bits:
        out.append(Violation("duration", f"{iv.phase}_bits_delivered", iv.client_id, iv.phase,
                             f"delivered {delivered} Mb of {bits} Mb"))
    delay = iv.path.total_delay_ms / 1e3 if (opts.include_propagation_delay and iv.path) else 0.0
    gaps = [segs[k + 1][0] - segs[k][1] for k in range(len(segs) - 1)]
    if (abs(segs[0][0] - iv.start_s) > TIME_ATOL or abs(segs[-1][1] + delay - iv.end_s) > TIME_ATOL
            or any(abs(g) > TIME_ATOL for g in gaps)):
        out.append(Violation("duration", f"{iv.phase}_segments_contiguous", iv.client_id, iv.phase,
                             "rate segments do not tile the interval"))


def validate(schedule: RoundSchedule, task: FLTask, tg: TemporalGraph) -> list[Violation]:
    """All constraint violations in ``schedule``; empty when feasible."""
    out: list[Violation] = []
    opts = ScheduleOptions(path_metric=schedule.path_metric,
                           include_propagation_delay=schedule.include_propagation_delay)
    serial = schedule.policy in SERIAL_POLICIES
    size = task.model.size_mb
    t0 = schedule.round_start_s

    for cid in task.client_ids:
        if task.upload_size_mb(cid) != task.download_size_mb(cid):
            out.append(Violation("payload", "upload_equals_download", cid))

    known = set(task.client_ids)
    table = {}
    for iv in schedule.intervals:
        if iv.client_id not in known:
            out.append(Violation("missing_interval", "known_client", iv.client_id, iv.phase,
                                 "interval for a client outside the task"))
            continue
        key = (iv.client_id, iv.phase)
        if key in table:
            out.append(Violation("missing_interval", "one_interval_per_phase", iv.client_id, iv.phase,
                                 "duplicate interval"))
        table[key] = iv
    for cid in task.client_ids:
        for ph in PHASES:
            if (cid, ph) not in table:
                out.append(Violation("missing_interval", "one_interval_per_phase", cid, ph, "absent"))
    if any(v.kind == "missing_interval" for v in out):
        return out

    for cid in task.client_ids:
        dist, train, up = (table[(cid, ph)] for ph in PHASES)
        for iv in (dist, train, up):
            if not (iv.end_s >= iv.start_s >= t0 - TIME_ATOL):
                out.append(Violation("duration", "ordered_endpoints", cid, iv.phase,
                                     f"[{iv.start_s}, {iv.end_s}] with round start {t0}"))
        if train.path is not None:
            out.append(Violation("path", "train_has_no_path", cid, "train", "training carries a path"))
        for iv in (dist, up):
            _check_path(tg, task, iv, t0, out)

        want = training_time(task, cid)
        if abs(train.duration_s - want) > TIME_ATOL:
            out.append(Violation("duration", "train_duration", cid, "train",
                                 f"{train.duration_s} s, expected {want} s"))
        for iv in (dist, up):
            if iv.path is None:
                continue
            if serial:
                want = transfer_duration(size, iv.path, opts)
                if abs(iv.duration_s - want) > TIME_ATOL:
                    out.append(Violation("duration", f"{iv.phase}_duration", cid, iv.phase,
                                         f"{iv.duration_s} s, expected {want} s"))
            else:
                _check_fluid(task, iv, opts, out)

        if dist.end_s > train.start_s + TIME_ATOL:
            out.append(Violation("precedence", "train_after_distribute", cid, "train",
                                 f"training starts at {train.start_s} before the model arrives at {dist.end_s}"))
        if train.end_s > up.start_s + TIME_ATOL:
            out.append(Violation("precedence", "upload_after_train", cid, "upload",
                                 f"upload starts at {up.start_s} before training ends at {train.end_s}"))

    if serial:
        downs = [table[(c, "distribute")] for c in task.client_ids]
        ups = [table[(c, "upload")] for c in task.client_ids]
        for a, b in _overlaps(downs):
            out.append(Violation("channel_conflict", "distribute", b.client_id, "distribute",
                                 f"overlaps the download of {a.client_id}"))
        for a, b in _overlaps(ups):
            out.append(Violation("channel_conflict", "upload", b.client_id, "upload",
                                 f"overlaps the upload of {a.client_id}"))
        if schedule.channel == "joint":
            for a, b in _overlaps(downs + ups):
                if a.phase != b.phase:
                    out.append(Violation("channel_conflict", "joint", b.client_id, b.phase,
                                         f"{b.phase} overlaps the {a.phase} of {a.client_id}"))

    last = max(table[(c, "upload")].end_s for c in task.client_ids)
    if abs(schedule.makespan_s - (last - t0)) > TIME_ATOL:
        out.append(Violation("makespan", "makespan_is_last_upload", None, None,
                             f"reported {schedule.makespan_s}, intervals give {last - t0}"))
    return out
