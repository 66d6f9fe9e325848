"""Max-min fair rate allocation by progressive filling.

Links are directed: a flow crossing edge ``u-v`` from ``u`` to ``v`` uses the
resource ``(u, v)``, whose capacity is the edge bandwidth. The two directions
of an edge are independent resources.
"""
from __future__ import annotations

import math
from collections.abc import Hashable, Iterable, Mapping

from .temporal_graph import RoutePath, SnapshotGraph

SATURATION_RTOL = 1e-12


def progressive_fill(
    flow_links: Mapping[Hashable, Iterable[Hashable]],
    capacity: Mapping[Hashable, float],
) -> dict:
    """Max-min fair rates for flows over capacitated links.

    All unfrozen flows rise together; whenever a link saturates every flow on
    it freezes at the current level. Results depend only on the mapping
    contents, not on iteration order.
    """
    links_of = {f: tuple(sorted(set(ls))) for f, ls in flow_links.items()}
    for f, ls in links_of.items():
        if not ls:
            raise ValueError(f"flow {f!r} traverses no links")
    flows_on: dict = {}
    for f in sorted(links_of):
        for link in links_of[f]:
            flows_on.setdefault(link, []).append(f)

    rate: dict = {}
    frozen_load = {link: 0.0 for link in flows_on}
    unfrozen_count = {link: len(fs) for link, fs in flows_on.items()}
    unfrozen = set(links_of)
    while unfrozen:
        candidates = {
            link: (capacity[link] - frozen_load[link]) / unfrozen_count[link]
            for link in sorted(flows_on)
            if unfrozen_count[link]
        }
        level = max(0.0, min(candidates.values()))
        saturated = [link for link, c in candidates.items() if c <= level * (1 + SATURATION_RTOL)]
        newly = sorted({f for link in saturated for f in flows_on[link] if f in unfrozen})
        for f in newly:
            rate[f] = level
            unfrozen.discard(f)
            for link in links_of[f]:
                frozen_load[link] += level
                unfrozen_count[link] -= 1
    return rate


def path_links(path: RoutePath) -> list[tuple[tuple[str, str], float]]:
    """Directed links of a path with the capacity recorded on the path's edges."""
    return [((a, b), e.bandwidth_mbps) for (a, b), e in zip(path.directed_links, path.edges)]


def max_min_rates(snapshot: SnapshotGraph, flows) -> dict:
    """Max-min fair rates (Mbps) for ``flows`` routed in ``snapshot``.

    ``flows`` is an iterable of ``(flow_id, RoutePath)`` pairs or of mappings
    with ``flow_id`` and ``path`` keys. Capacities come from the snapshot.
    """
    flow_links = {}
    capacity = {}
    for item in flows:
        if isinstance(item, Mapping):
            fid, path = item["flow_id"], item["path"]
        else:
            fid, path = item
        if fid in flow_links:
            raise ValueError(f"duplicate flow id {fid!r}")
        links = []
        for a, b in path.directed_links:
            e = snapshot.edge_between(a, b)
            if e is None:
                raise ValueError(f"flow {fid!r}: edge {a}-{b} not in window {snapshot.window_index}")
            capacity[(a, b)] = e.bandwidth_mbps
            links.append((a, b))
        flow_links[fid] = links
    if not flow_links:
        return {}
    return progressive_fill(flow_links, capacity)


def link_loads(flow_links: Mapping, rates: Mapping) -> dict:
    load: dict = {}
    for f, links in flow_links.items():
        for link in set(links):
            load[link] = load.get(link, 0.0) + rates[f]
    return load


def is_bottlenecked(flow_links: Mapping, capacity: Mapping, rates: Mapping, rtol=1e-9) -> bool:
    """Every flow crosses at least one saturated link on which it has a maximal rate."""
    load = link_loads(flow_links, rates)
    for f, links in flow_links.items():
        ok = False
        for link in set(links):
            cap = capacity[link]
            if math.isclose(load[link], cap, rel_tol=rtol, abs_tol=1e-9):
                others = [rates[g] for g, ls in flow_links.items() if link in ls]
                if rates[f] >= max(others) * (1 - rtol):
                    ok = True
                    break
        if not ok:
            return False
    return True
