"""Discrete temporal graph of network snapshots and single-snapshot routing.

A :class:`TemporalGraph` is an ordered sequence of :class:`SnapshotGraph`
objects, one per equal-length time window. Routing never crosses windows:
every path lives inside one snapshot.
"""
from __future__ import annotations

import heapq
import math
from collections import deque
from collections.abc import Sequence
from dataclasses import dataclass, field
from functools import cached_property

from .errors import EmptyPathError, NoRouteError, OutOfHorizonError


@dataclass(frozen=True)
class Edge:
    u: str
    v: str
    bandwidth_mbps: float
    delay_ms: float = 0.0

    def other(self, node: str) -> str:
        return self.v if node == self.u else self.u


@dataclass(frozen=True, eq=False)
class SnapshotGraph:
    window_index: int
    window_start_s: float
    window_length_s: float
    vertices: frozenset
    edges: tuple[Edge, ...]

    def __post_init__(self):
        object.__setattr__(self, "vertices", frozenset(self.vertices))
        object.__setattr__(self, "edges", tuple(self.edges))
        seen = set()
        for e in self.edges:
            if e.u == e.v:
                raise ValueError(f"self-loop on {e.u!r}")
            if e.u not in self.vertices or e.v not in self.vertices:
                raise ValueError(f"edge {e.u!r}-{e.v!r} references an unknown vertex")
            if not e.bandwidth_mbps > 0 or e.delay_ms < 0:
                raise ValueError(f"edge {e.u!r}-{e.v!r} has invalid attributes")
            key = (e.u, e.v) if e.u < e.v else (e.v, e.u)
            if key in seen:
                raise ValueError(f"duplicate edge {key}")
            seen.add(key)

    @property
    def window_end_s(self) -> float:
        return self.window_start_s + self.window_length_s

    @cached_property
    def adjacency(self) -> dict[str, list[tuple[str, Edge]]]:
        adj: dict[str, list[tuple[str, Edge]]] = {v: [] for v in self.vertices}
        for e in self.edges:
            adj[e.u].append((e.v, e))
            adj[e.v].append((e.u, e))
        for nbrs in adj.values():
            nbrs.sort(key=lambda item: item[0])
        return adj

    def edge_between(self, a: str, b: str) -> Edge | None:
        for nbr, e in self.adjacency.get(a, ()):
            if nbr == b:
                return e
        return None

    @cached_property
    def _widest_cache(self) -> dict:
        return {}

    def widest_values(self, src: str) -> dict[str, float]:
        """Best achievable bottleneck from ``src`` to every reachable vertex."""
        cache = self._widest_cache
        if src not in cache:
            cache[src] = _maximin_dijkstra(self.adjacency, src)
        return cache[src]

    def without_edge(self, a: str, b: str) -> SnapshotGraph:
        keep = tuple(e for e in self.edges if {e.u, e.v} != {a, b})
        return SnapshotGraph(self.window_index, self.window_start_s, self.window_length_s,
                             self.vertices, keep)


@dataclass(frozen=True)
class RoutePath:
    window_index: int
    nodes: tuple[str, ...]
    edges: tuple[Edge, ...]
    bottleneck_mbps: float
    total_delay_ms: float

    @property
    def hops(self) -> int:
        return len(self.edges)

    @property
    def directed_links(self) -> list[tuple[str, str]]:
        return list(zip(self.nodes[:-1], self.nodes[1:]))


def bottleneck(edges) -> float:
    """Minimum bandwidth over a path's edges."""
    edges = list(edges)
    if not edges:
        raise EmptyPathError("bottleneck of an empty path is undefined")
    return min(e.bandwidth_mbps for e in edges)


def make_path(snapshot: SnapshotGraph, nodes: Sequence[str]) -> RoutePath:
    nodes = tuple(nodes)
    if len(nodes) < 2:
        raise EmptyPathError("a path needs at least two nodes")
    if len(set(nodes)) != len(nodes):
        raise ValueError(f"path {nodes} repeats a node")
    edges = []
    for a, b in zip(nodes[:-1], nodes[1:]):
        e = snapshot.edge_between(a, b)
        if e is None:
            raise ValueError(f"no edge {a}-{b} in window {snapshot.window_index}")
        edges.append(e)
    return RoutePath(
        window_index=snapshot.window_index,
        nodes=nodes,
        edges=tuple(edges),
        bottleneck_mbps=bottleneck(edges),
        total_delay_ms=math.fsum(e.delay_ms for e in edges),
    )


def _maximin_dijkstra(adj, src):
    best = {src: math.inf}
    heap = [(-math.inf, src)]
    done = set()
    while heap:
        neg, node = heapq.heappop(heap)
        if node in done:
            continue
        done.add(node)
        width = -neg
        for nbr, e in adj[node]:
            if nbr in done:
                continue
            w = min(width, e.bandwidth_mbps)
            if w > best.get(nbr, -math.inf):
                best[nbr] = w
                heapq.heappush(heap, (-w, nbr))
    return best


def _lexmin_shortest(adj, src, dst, usable):
    """Fewest-hop path with the lexicographically smallest node sequence, over usable edges."""
    dist = {dst: 0}
    queue = deque([dst])
    while queue and src not in dist:
        node = queue.popleft()
        for nbr, e in adj[node]:
            if nbr not in dist and usable(e):
                dist[nbr] = dist[node] + 1
                queue.append(nbr)
    if src not in dist:
        return None
    path = [src]
    node = src
    while node != dst:
        want = dist[node] - 1
        # adjacency lists are sorted by neighbour id, so the first hit is the smallest
        for nbr, e in adj[node]:
            if dist.get(nbr) == want and usable(e):
                node = nbr
                break
        path.append(node)
    return path


def widest_path(snapshot: SnapshotGraph, src: str, dst: str) -> RoutePath:
    """Maximum-bottleneck simple path from ``src`` to ``dst``.

    Ties go to fewer hops, then to the lexicographically smallest node
    sequence, so the returned path is unique for a given snapshot.
    """
    if src == dst:
        raise ValueError("src and dst must differ")
    for n in (src, dst):
        if n not in snapshot.vertices:
            raise KeyError(f"{n!r} is not a vertex of window {snapshot.window_index}")
    width = snapshot.widest_values(src).get(dst)
    if width is None:
        raise NoRouteError(src, dst, snapshot.window_index)
    nodes = _lexmin_shortest(snapshot.adjacency, src, dst, lambda e: e.bandwidth_mbps >= width)
    return make_path(snapshot, nodes)


def min_delay_path(snapshot: SnapshotGraph, src: str, dst: str) -> RoutePath:
    """Propagation-delay shortest path; ties by hops, then node sequence."""
    if src == dst:
        raise ValueError("src and dst must differ")
    adj = snapshot.adjacency
    if src not in adj or dst not in adj:
        raise KeyError(f"{src!r} or {dst!r} is not a vertex of window {snapshot.window_index}")
    heap = [(0.0, 0, (src,))]
    settled = set()
    while heap:
        delay, hops, seq = heapq.heappop(heap)
        node = seq[-1]
        if node in settled:
            continue
        settled.add(node)
        if node == dst:
            return make_path(snapshot, seq)
        for nbr, e in adj[node]:
            if nbr not in settled:
                heapq.heappush(heap, (delay + e.delay_ms, hops + 1, seq + (nbr,)))
    raise NoRouteError(src, dst, snapshot.window_index)


PATH_METRICS = {"widest": widest_path, "min_delay": min_delay_path}


def find_path(snapshot: SnapshotGraph, src: str, dst: str, metric: str = "widest") -> RoutePath:
    try:
        fn = PATH_METRICS[metric]
    except KeyError:
        raise ValueError(f"unknown path metric {metric!r}") from None
    return fn(snapshot, src, dst)


@dataclass(frozen=True, eq=False)
class TemporalGraph:
    """Ordered, gap-free sequence of equal-length snapshots.

    ``snapshots`` may be any sequence, including a lazily materialised one;
    it is only ever indexed.
    """

    snapshots: Sequence[SnapshotGraph]
    window_length_s: float
    _checked: set = field(default_factory=set, init=False, repr=False)

    def __post_init__(self):
        if not self.window_length_s > 0:
            raise ValueError("window_length_s must be positive")
        if len(self.snapshots) < 1:
            raise ValueError("a temporal graph needs at least one snapshot")
        if isinstance(self.snapshots, (list, tuple)):
            for i in range(len(self.snapshots)):
                self[i]

    def __len__(self):
        return len(self.snapshots)

    def __getitem__(self, index: int) -> SnapshotGraph:
        snap = self.snapshots[index]
        if index not in self._checked:
            expected_start = index * self.window_length_s
            if (snap.window_index != index
                    or not math.isclose(snap.window_length_s, self.window_length_s)
                    or not math.isclose(snap.window_start_s, expected_start, abs_tol=1e-9)):
                raise ValueError(f"snapshot {index} is out of sequence or has a mismatched window")
            self._checked.add(index)
        return snap

    @property
    def horizon_s(self) -> float:
        return len(self.snapshots) * self.window_length_s

    def window_of(self, time_s: float) -> int:
        if not 0 <= time_s < self.horizon_s:
            raise OutOfHorizonError(time_s, self.horizon_s)
        return min(int(time_s // self.window_length_s), len(self.snapshots) - 1)


def snapshot_at(tg: TemporalGraph, time_s: float) -> SnapshotGraph:
    """Snapshot whose half-open window ``[start, start + length)`` contains ``time_s``."""
    return tg[tg.window_of(time_s)]


def static_temporal_graph(edges, num_windows: int = 1, window_length_s: float = 10.0,
                          vertices=None) -> TemporalGraph:
    """Temporal graph whose every window carries the same edges.

    ``edges`` holds ``(u, v, bandwidth_mbps)`` or ``(u, v, bandwidth_mbps, delay_ms)`` tuples.
    """
    parsed = [Edge(e[0], e[1], float(e[2]), float(e[3]) if len(e) > 3 else 0.0) for e in edges]
    verts = set(vertices or ())
    for e in parsed:
        verts.update((e.u, e.v))
    snaps = [SnapshotGraph(i, i * window_length_s, window_length_s, frozenset(verts), tuple(parsed))
             for i in range(num_windows)]
    return TemporalGraph(snaps, window_length_s)
