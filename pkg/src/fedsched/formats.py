"""Interchange files: temporal graph JSON, schedule CSV + JSON."""
from __future__ import annotations

import csv
import io
import json
from pathlib import Path

from . import __version__
from .errors import ScenarioError
from .scenario import FORMAT_VERSION, check_format_version
from .scheduler import PHASES, PhaseInterval, RoundSchedule
from .temporal_graph import Edge, RoutePath, SnapshotGraph, TemporalGraph


def _dump(doc) -> str:
    return json.dumps(doc, indent=1, sort_keys=False, ensure_ascii=True) + "\n"


def write_text(path, text: str):
    Path(path).write_text(text, encoding="utf-8", newline="\n")


# -- temporal graph ---------------------------------------------------------

def temporal_graph_to_dict(tg: TemporalGraph, nodes, metadata=None) -> dict:
    """``nodes`` is an ordered list of ``{id, kind, name}`` mappings."""
    windows = []
    for i in range(len(tg)):
        snap = tg[i]
        windows.append({
            "window_index": snap.window_index,
            "edges": [{"u": e.u, "v": e.v, "mbps": e.bandwidth_mbps, "delay_ms": e.delay_ms}
                      for e in snap.edges],
        })
    return {
        "format_version": FORMAT_VERSION,
        "generator": f"fedsched {__version__}",
        "metadata": dict(metadata or {}),
        "window_length_s": tg.window_length_s,
        "num_windows": len(tg),
        "nodes": [dict(n) for n in nodes],
        "windows": windows,
    }


def temporal_graph_from_dict(doc: dict) -> tuple[TemporalGraph, list[dict], dict]:
    """Parse a graph document into (graph, node list, metadata)."""
    if not isinstance(doc, dict):
        raise ScenarioError("expected a JSON object", "graph")
    check_format_version(doc, "graph")
    try:
        wl = float(doc["window_length_s"])
        nodes = list(doc["nodes"])
        windows = doc["windows"]
        count = int(doc.get("num_windows", len(windows)))
    except (KeyError, TypeError, ValueError) as exc:
        raise ScenarioError(f"malformed header ({exc})", "graph") from None
    if count != len(windows):
        raise ScenarioError(f"header says {count} windows, file has {len(windows)}", "graph.num_windows")
    ids = frozenset(n["id"] for n in nodes)
    snaps = []
    for i, w in enumerate(windows):
        try:
            edges = tuple(Edge(e["u"], e["v"], float(e["mbps"]), float(e.get("delay_ms", 0.0)))
                          for e in w["edges"])
            snaps.append(SnapshotGraph(int(w.get("window_index", i)), i * wl, wl, ids, edges))
        except (KeyError, TypeError, ValueError) as exc:
            raise ScenarioError(f"malformed window ({exc})", f"graph.windows[{i}]") from None
    try:
        return TemporalGraph(snaps, wl), nodes, dict(doc.get("metadata") or {})
    except ValueError as exc:
        raise ScenarioError(str(exc), "graph.windows") from None


def write_temporal_graph(path, tg: TemporalGraph, nodes, metadata=None):
    write_text(path, _dump(temporal_graph_to_dict(tg, nodes, metadata)))


def read_temporal_graph(path) -> tuple[TemporalGraph, list[dict], dict]:
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"invalid JSON: {exc.msg}", "graph") from None
    return temporal_graph_from_dict(doc)


# -- schedules --------------------------------------------------------------

CSV_COLUMNS = ("policy", "client_id", "phase", "start_s", "end_s", "bottleneck_mbps",
               "mean_rate_mbps", "path_nodes")


def _path_to_dict(path: RoutePath) -> dict:
    return {
        "window_index": path.window_index,
        "nodes": list(path.nodes),
        "bottleneck_mbps": path.bottleneck_mbps,
        "total_delay_ms": path.total_delay_ms,
        "edges": [{"u": e.u, "v": e.v, "mbps": e.bandwidth_mbps, "delay_ms": e.delay_ms} for e in path.edges],
    }


def _path_from_dict(doc) -> RoutePath:
    edges = tuple(Edge(e["u"], e["v"], float(e["mbps"]), float(e["delay_ms"])) for e in doc["edges"])
    return RoutePath(int(doc["window_index"]), tuple(doc["nodes"]), edges,
                     float(doc["bottleneck_mbps"]), float(doc["total_delay_ms"]))


def _json_safe(meta: dict) -> dict:
    out = {}
    for k, v in meta.items():
        try:
            json.dumps(v)
        except TypeError:
            continue
        out[k] = v
    return out


def schedule_to_dict(schedule: RoundSchedule, metadata=None) -> dict:
    meta = _json_safe(schedule.metadata)
    meta.update(metadata or {})
    return {
        "format_version": FORMAT_VERSION,
        "generator": f"fedsched {__version__}",
        "policy": schedule.policy,
        "channel": schedule.channel,
        "path_metric": schedule.path_metric,
        "include_propagation_delay": schedule.include_propagation_delay,
        "round_start_s": schedule.round_start_s,
        "makespan_s": schedule.makespan_s,
        "metadata": meta,
        "intervals": [
            {
                "client_id": iv.client_id,
                "phase": iv.phase,
                "start_s": iv.start_s,
                "end_s": iv.end_s,
                "path": None if iv.path is None else _path_to_dict(iv.path),
                "mean_rate_mbps": iv.mean_rate_mbps,
                "segments": [list(s) for s in iv.segments],
            }
            for iv in schedule.intervals
        ],
    }


def schedule_from_dict(doc: dict) -> RoundSchedule:
    if not isinstance(doc, dict):
        raise ScenarioError("expected a JSON object", "schedule")
    check_format_version(doc, "schedule")
    try:
        ivs = doc["intervals"]
        if not isinstance(ivs, list) or not ivs:
            raise ScenarioError("schedule has no intervals", "schedule.intervals")
        intervals = tuple(
            PhaseInterval(
                client_id=str(iv["client_id"]),
                phase=iv["phase"],
                start_s=float(iv["start_s"]),
                end_s=float(iv["end_s"]),
                path=None if iv.get("path") is None else _path_from_dict(iv["path"]),
                mean_rate_mbps=iv.get("mean_rate_mbps"),
                segments=tuple(tuple(float(x) for x in s) for s in iv.get("segments", ())),
            )
            for iv in ivs
        )
        return RoundSchedule(
            policy=doc["policy"],
            intervals=intervals,
            makespan_s=float(doc["makespan_s"]),
            round_start_s=float(doc.get("round_start_s", 0.0)),
            channel=doc.get("channel", "per_direction"),
            path_metric=doc.get("path_metric", "widest"),
            include_propagation_delay=bool(doc.get("include_propagation_delay", False)),
            metadata=dict(doc.get("metadata", {})),
        )
    except ScenarioError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise ScenarioError(f"malformed schedule ({exc!r})", "schedule") from None


def read_schedule(path) -> RoundSchedule:
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"invalid JSON: {exc.msg}", "schedule") from None
    return schedule_from_dict(doc)


def _fmt(x) -> str:
    return "" if x is None else repr(float(x))


def schedule_csv(schedule: RoundSchedule) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    order = {p: i for i, p in enumerate(PHASES)}
    for iv in sorted(schedule.intervals, key=lambda iv: (iv.client_id, order[iv.phase])):
        writer.writerow([
            schedule.policy, iv.client_id, iv.phase, _fmt(iv.start_s), _fmt(iv.end_s),
            _fmt(iv.path.bottleneck_mbps if iv.path else None), _fmt(iv.mean_rate_mbps),
            " ".join(iv.path.nodes) if iv.path else "",
        ])
    return buf.getvalue()


def write_schedule(prefix, schedule: RoundSchedule, metadata=None) -> tuple[Path, Path]:
    """Write ``<prefix>.csv`` and ``<prefix>.json``; returns both paths."""
    prefix = Path(prefix)
    csv_path = prefix.with_name(prefix.name + ".csv")
    json_path = prefix.with_name(prefix.name + ".json")
    write_text(csv_path, schedule_csv(schedule))
    write_text(json_path, _dump(schedule_to_dict(schedule, metadata)))
    return csv_path, json_path
