"""Round scheduling: on-demand serial policy, statistical-multiplexing baseline and exact oracle.

Every policy returns a :class:`RoundSchedule` with three intervals per client
(distribute, train, upload). Transmissions are pinned to the snapshot in force
at their start time.
"""
from __future__ import annotations

import heapq
import itertools
import math
import warnings
from dataclasses import dataclass, field, replace
from enum import Enum

from .errors import (
    NoRouteError,
    OutOfHorizonError,
    TooManyClientsError,
    TransmissionOverrunWarning,
    WindowOverrunError,
)
from .fairness import path_links, progressive_fill
from .fl_task import FLTask, training_time, transmission_time
from .temporal_graph import RoutePath, TemporalGraph, find_path

TIME_ATOL = 1e-9
ORACLE_MAX_CLIENTS = 8
PHASES = ("distribute", "train", "upload")


class ChannelModel(str, Enum):
    PER_DIRECTION = "per_direction"
    JOINT = "joint"


class Policy(str, Enum):
    ON_DEMAND = "on_demand"
    STATISTICAL_MULTIPLEXING = "statistical_multiplexing"
    ORACLE_OPTIMAL = "oracle_optimal"


SERIAL_POLICIES = (Policy.ON_DEMAND.value, Policy.ORACLE_OPTIMAL.value)


@dataclass(frozen=True)
class PhaseInterval:
    client_id: str
    phase: str
    start_s: float
    end_s: float
    path: RoutePath | None = None
    mean_rate_mbps: float | None = None
    # (start, end, rate) pieces of a fluid transfer; empty for serial transfers
    segments: tuple = ()

    def __post_init__(self):
        if self.phase not in PHASES:
            raise ValueError(f"unknown phase {self.phase!r}")

    @property
    def duration_s(self) -> float:
        return self.end_s - self.start_s


@dataclass(frozen=True)
class RoundSchedule:
    policy: str
    intervals: tuple
    makespan_s: float
    round_start_s: float
    channel: str = ChannelModel.PER_DIRECTION.value
    path_metric: str = "widest"
    include_propagation_delay: bool = False
    metadata: dict = field(default_factory=dict, compare=False)

    def interval(self, client_id: str, phase: str) -> PhaseInterval:
        for iv in self.intervals:
            if iv.client_id == client_id and iv.phase == phase:
                return iv
        raise KeyError((client_id, phase))

    def phase(self, phase: str) -> list[PhaseInterval]:
        return [iv for iv in self.intervals if iv.phase == phase]

    @property
    def end_s(self) -> float:
        return self.round_start_s + self.makespan_s


@dataclass(frozen=True)
class ScheduleOptions:
    path_metric: str = "widest"
    include_propagation_delay: bool = False
    strict_windows: bool = False


def _options(options, **overrides) -> ScheduleOptions:
    opts = options or ScheduleOptions()
    if overrides:
        opts = replace(opts, **{k: v for k, v in overrides.items() if v is not None})
    return opts


def _channel(channel) -> ChannelModel:
    return channel if isinstance(channel, ChannelModel) else ChannelModel(channel)


def _delay_s(path: RoutePath, opts: ScheduleOptions) -> float:
    return path.total_delay_ms / 1e3 if opts.include_propagation_delay else 0.0


def transfer_duration(size_mb: float, path: RoutePath, opts: ScheduleOptions) -> float:
    return transmission_time(size_mb, path.bottleneck_mbps) + _delay_s(path, opts)


def _check_overrun(tg: TemporalGraph, path: RoutePath, start: float, end: float, opts):
    window_end = (path.window_index + 1) * tg.window_length_s
    if end > window_end + TIME_ATOL:
        msg = (f"transmission over {path.nodes[0]}->{path.nodes[-1]} runs to {end:.3f}s, "
               f"past the end of window {path.window_index} at {window_end:.3f}s")
        if opts.strict_windows:
            raise WindowOverrunError(msg)
        warnings.warn(msg, TransmissionOverrunWarning, stacklevel=3)


def _check_horizon(tg: TemporalGraph, end: float):
    if end > tg.horizon_s + TIME_ATOL:
        raise OutOfHorizonError(end, tg.horizon_s)


class _Router:
    """Memoised path lookups keyed by (src, dst, window)."""

    def __init__(self, tg: TemporalGraph, metric: str):
        self.tg = tg
        self.metric = metric
        self._cache = {}

    def route(self, src: str, dst: str, time_s: float) -> RoutePath:
        w = self.tg.window_of(time_s)
        key = (src, dst, w)
        if key not in self._cache:
            self._cache[key] = find_path(self.tg[w], src, dst, self.metric)
        return self._cache[key]

    def download_paths(self, task: FLTask, t0: float) -> dict[str, RoutePath]:
        paths, missing = {}, []
        for c in task.clients:
            try:
                paths[c.client_id] = self.route(task.server, c.site, t0)
            except NoRouteError:
                missing.append(c.client_id)
        if missing:
            raise NoRouteError(task.server, ", ".join(missing), self.tg.window_of(t0), clients=missing)
        return paths


def _train(task, cid, start):
    return PhaseInterval(cid, "train", start, start + training_time(task, cid))


def _serial_round(tg, task, t0, channel, opts, router, down_paths, down_order, upload_order=None,
                  check=True):
    """Lay out a serial schedule for the given download order and upload order.

    Downloads run back to back from ``t0``. ``upload_order=None`` means
    first-finish first-upload. Each upload starts at the later of its training
    end and the release of the upload resource.
    """
    size = task.model.size_mb
    intervals = []
    train_end = {}
    t = t0
    for cid in down_order:
        path = down_paths[cid]
        end = t + transfer_duration(size, path, opts)
        if check:
            _check_overrun(tg, path, t, end, opts)
        intervals.append(PhaseInterval(cid, "distribute", t, end, path))
        train = _train(task, cid, end)
        intervals.append(train)
        train_end[cid] = train.end_s
        t = end

    if upload_order is None:
        upload_order = sorted(train_end, key=lambda c: (train_end[c], c))
    free = t0 if channel is ChannelModel.PER_DIRECTION else t
    for cid in upload_order:
        start = max(train_end[cid], free)
        path = router.route(task.client(cid).site, task.server, start)
        end = start + transfer_duration(size, path, opts)
        if check:
            _check_overrun(tg, path, start, end, opts)
        intervals.append(PhaseInterval(cid, "upload", start, end, path))
        free = end
    return intervals, free - t0


def _finish(policy, intervals, t0, channel, opts, tg, **metadata) -> RoundSchedule:
    ends = [iv.end_s for iv in intervals if iv.phase == "upload"]
    makespan = max(ends) - t0
    _check_horizon(tg, max(iv.end_s for iv in intervals))
    order = {p: i for i, p in enumerate(PHASES)}
    intervals = sorted(intervals, key=lambda iv: (iv.client_id, order[iv.phase]))
    return RoundSchedule(
        policy=policy,
        intervals=tuple(intervals),
        makespan_s=makespan,
        round_start_s=t0,
        channel=channel.value,
        path_metric=opts.path_metric,
        include_propagation_delay=opts.include_propagation_delay,
        metadata=dict(metadata),
    )


def download_order(task: FLTask, down_paths, opts: ScheduleOptions) -> list[str]:
    """Clients sorted by ascending download time, ties by client id."""
    size = task.model.size_mb
    return sorted(task.client_ids, key=lambda c: (transfer_duration(size, down_paths[c], opts), c))


def schedule_on_demand(tg: TemporalGraph, task: FLTask, channel=ChannelModel.PER_DIRECTION,
                       t0: float = 0.0, options: ScheduleOptions | None = None, **kw) -> RoundSchedule:
    """Serial, exclusive, full-rate transfers.

    Downloads go out one at a time in ascending order of download time; each
    client trains as soon as its model arrives; uploads are served one at a
    time in order of training completion.
    """
    opts = _options(options, **kw)
    channel = _channel(channel)
    router = _Router(tg, opts.path_metric)
    down_paths = router.download_paths(task, t0)
    order = download_order(task, down_paths, opts)
    intervals, _ = _serial_round(tg, task, t0, channel, opts, router, down_paths, order)
    return _finish(Policy.ON_DEMAND.value, intervals, t0, channel, opts, tg, download_order=order)


def oracle_schedule(tg: TemporalGraph, task: FLTask, channel=ChannelModel.PER_DIRECTION,
                    t0: float = 0.0, options: ScheduleOptions | None = None, **kw) -> RoundSchedule:
    """Exact minimum-makespan serial schedule by enumerating every order pair.

    Download and upload orders are scanned in lexicographic order; the first
    pair reaching the minimum wins. Branches that cannot beat the incumbent
    are pruned, which never changes the answer.
    """
    opts = _options(options, **kw)
    channel = _channel(channel)
    ids = sorted(task.client_ids)
    if len(ids) > ORACLE_MAX_CLIENTS:
        raise TooManyClientsError(
            f"oracle_optimal enumerates (n!)^2 order pairs; {len(ids)} clients exceeds the limit of "
            f"{ORACLE_MAX_CLIENTS}")
    router = _Router(tg, opts.path_metric)
    down_paths = router.download_paths(task, t0)
    size = task.model.size_mb
    down_dur = {c: transfer_duration(size, down_paths[c], opts) for c in ids}
    train_dur = {c: training_time(task, c) for c in ids}
    up_dur_cache = {}

    def up_duration(cid, start):
        w = tg.window_of(start)
        key = (cid, w)
        if key not in up_dur_cache:
            path = router.route(task.client(cid).site, task.server, start)
            up_dur_cache[key] = transfer_duration(size, path, opts)
        return up_dur_cache[key]

    best = [math.inf, None]

    def search_uploads(down, ready, remaining, free, prefix):
        if not remaining:
            span = free - t0
            if span < best[0]:
                best[0], best[1] = span, (tuple(down), tuple(prefix))
            return
        if max(ready[c] for c in remaining) - t0 >= best[0] or free - t0 >= best[0]:
            return
        for cid in remaining:
            start = max(ready[cid], free)
            try:
                end = start + up_duration(cid, start)
            except OutOfHorizonError:
                continue
            if end - t0 >= best[0]:
                continue
            prefix.append(cid)
            search_uploads(down, ready, [c for c in remaining if c != cid], end, prefix)
            prefix.pop()

    for down in itertools.permutations(ids):
        t = t0
        ready = {}
        for cid in down:
            t = t + down_dur[cid]
            ready[cid] = t + train_dur[cid]
        free = t0 if channel is ChannelModel.PER_DIRECTION else t
        search_uploads(down, ready, list(ids), free, [])

    if best[1] is None:
        raise OutOfHorizonError(math.inf, tg.horizon_s)
    down, up = best[1]
    intervals, _ = _serial_round(tg, task, t0, channel, opts, router, down_paths, list(down), list(up))
    return _finish(Policy.ORACLE_OPTIMAL.value, intervals, t0, channel, opts, tg,
                   download_order=list(down), upload_order=list(up))


@dataclass
class _Flow:
    client_id: str
    phase: str
    path: RoutePath
    bits: float
    start: float
    remaining: float
    segments: list = field(default_factory=list)


def schedule_multiplexed(tg: TemporalGraph, task: FLTask, t0: float = 0.0,
                         options: ScheduleOptions | None = None, channel=None, **kw) -> RoundSchedule:
    """Concurrent fluid transfers sharing links max-min fairly.

    All downloads start at ``t0``; each upload starts when its client finishes
    training. Rates are recomputed by progressive filling at every flow
    arrival and departure. A directed link shared by flows pinned to different
    windows takes the smallest of their recorded capacities. ``channel`` is
    accepted for interface symmetry and only recorded.
    """
    opts = _options(options, **kw)
    channel = _channel(channel or ChannelModel.PER_DIRECTION)
    router = _Router(tg, opts.path_metric)
    down_paths = router.download_paths(task, t0)
    bits = task.model.size_mbit

    active: dict[tuple, _Flow] = {}
    arrivals = []  # (time, client_id)
    intervals = []
    capacity_log = []

    for cid in sorted(task.client_ids):
        active[(cid, "distribute")] = _Flow(cid, "distribute", down_paths[cid], bits, t0, bits)

    def complete(flow, t_done):
        end = t_done + _delay_s(flow.path, opts)
        _check_overrun(tg, flow.path, flow.start, end, opts)
        fluid = t_done - flow.start
        mean = flow.bits / fluid if fluid > 0 else flow.path.bottleneck_mbps
        intervals.append(PhaseInterval(flow.client_id, flow.phase, flow.start, end, flow.path,
                                       mean_rate_mbps=mean, segments=tuple(flow.segments)))
        if flow.phase == "distribute":
            train = _train(task, flow.client_id, end)
            intervals.append(train)
            heapq.heappush(arrivals, (train.end_s, flow.client_id))

    t = t0
    while active or arrivals:
        if active:
            flow_links, capacity = {}, {}
            for key, flow in active.items():
                links = path_links(flow.path)
                flow_links[key] = [link for link, _ in links]
                for link, cap in links:
                    capacity[link] = min(cap, capacity.get(link, math.inf))
            rates = progressive_fill(flow_links, capacity)
            capacity_log.append((t, flow_links, capacity, rates))
            finish = {k: t + f.remaining / rates[k] for k, f in active.items()}
            t_flow = min(finish.values())
        else:
            rates, finish, t_flow = {}, {}, math.inf
        t_arr = arrivals[0][0] if arrivals else math.inf
        t_next = min(t_flow, t_arr)

        done = []
        for key, flow in active.items():
            if t_next > t:
                flow.segments.append((t, t_next, rates[key]))
            # absorb float residue so simultaneous finishers complete together
            if finish[key] <= t_next + 1e-12 * max(1.0, abs(t_next)):
                done.append(key)
            else:
                flow.remaining -= rates[key] * (t_next - t)
        t = t_next
        for key in sorted(done):
            flow = active.pop(key)
            flow.remaining = 0.0
            complete(flow, t)
        while arrivals and arrivals[0][0] <= t:
            t_a, cid = heapq.heappop(arrivals)
            path = router.route(task.client(cid).site, task.server, t_a)
            active[(cid, "upload")] = _Flow(cid, "upload", path, bits, t_a, bits)

    return _finish(Policy.STATISTICAL_MULTIPLEXING.value, intervals, t0, channel, opts, tg,
                   rate_epochs=capacity_log)


def schedule(policy, tg: TemporalGraph, task: FLTask, channel=ChannelModel.PER_DIRECTION,
             t0: float = 0.0, options: ScheduleOptions | None = None) -> RoundSchedule:
    policy = Policy(policy)
    if policy is Policy.ON_DEMAND:
        return schedule_on_demand(tg, task, channel, t0, options)
    if policy is Policy.ORACLE_OPTIMAL:
        return oracle_schedule(tg, task, channel, t0, options)
    return schedule_multiplexed(tg, task, t0, options, channel=channel)
