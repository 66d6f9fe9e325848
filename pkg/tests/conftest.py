"""Shared instance generators for the test suite."""
from __future__ import annotations

import warnings
from collections.abc import Sequence

import numpy as np
import pytest

from fedsched import Client, FLTask, ModelSpec, TransmissionOverrunWarning, static_temporal_graph
from fedsched.temporal_graph import Edge, SnapshotGraph, TemporalGraph


@pytest.fixture(autouse=True)
def _quiet_overruns():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", TransmissionOverrunWarning)
        yield


def two_client_toy(size_mb=10.0, train_s=10.0, access_mbps=20.0):
    """Server S behind one 20 Mbps access link to hub H; clients hang off H on fat links."""
    tg = static_temporal_graph(
        [("S", "H", access_mbps), ("H", "A", 100.0), ("H", "B", 100.0)],
        num_windows=20, window_length_s=10.0,
    )
    task = FLTask("S", [Client("c1", "A"), Client("c2", "B")], ModelSpec("toy", size_mb, train_s))
    return tg, task


class RandomSnapshots(Sequence):
    """Per-window random bandwidths over a fixed connected topology.

    A spanning tree is present in every window; the extra edges come and go,
    so routes change between windows but no client ever becomes unreachable.
    """

    def __init__(self, seed, nodes, tree, extra, num_windows, window_length_s, bw_range):
        self.seed, self.nodes, self.tree, self.extra = seed, frozenset(nodes), tree, extra
        self.num_windows, self.window_length_s, self.bw_range = num_windows, window_length_s, bw_range
        self._cache = {}

    def __len__(self):
        return self.num_windows

    def __getitem__(self, i):
        if not 0 <= i < self.num_windows:
            raise IndexError(i)
        if i not in self._cache:
            rng = np.random.default_rng([self.seed, i])
            lo, hi = self.bw_range
            keep = [e for e in self.extra if rng.random() < 0.7]
            pairs = self.tree + keep
            bws = rng.uniform(lo, hi, size=len(pairs))
            delays = rng.uniform(1.0, 20.0, size=len(pairs))
            edges = tuple(Edge(u, v, float(b), float(d)) for (u, v), b, d in zip(pairs, bws, delays))
            self._cache[i] = SnapshotGraph(i, i * self.window_length_s, self.window_length_s, self.nodes, edges)
        return self._cache[i]


def fuzz_instance(seed, max_clients=8, homogeneous=False):
    """Random toy graph with 4 to 30 nodes, 1 to ``max_clients`` clients and random bandwidths."""
    rng = np.random.default_rng(seed)
    n_nodes = int(rng.integers(4, 31))
    nodes = [f"n{k:02d}" for k in range(n_nodes)]
    tree = [(nodes[k], nodes[int(rng.integers(0, k))]) for k in range(1, n_nodes)]
    tree = [(min(a, b), max(a, b)) for a, b in tree]
    have = set(tree)
    extra = []
    for _ in range(int(rng.integers(0, 2 * n_nodes))):
        a, b = sorted(rng.choice(n_nodes, size=2, replace=False))
        pair = (nodes[a], nodes[b])
        if pair not in have:
            have.add(pair)
            extra.append(pair)
    n_clients = int(rng.integers(1, min(max_clients, n_nodes - 1) + 1))
    picks = rng.choice(n_nodes, size=n_clients + 1, replace=False)
    server = nodes[picks[0]]
    size = float(rng.uniform(0.5, 20.0))
    train = float(rng.uniform(0.0, 40.0))
    clients = [
        Client(f"c{k}", nodes[p], 1.0 if homogeneous else float(rng.uniform(0.0, 2.0)))
        for k, p in enumerate(picks[1:])
    ]
    snaps = RandomSnapshots(seed, nodes, tree, extra, num_windows=400, window_length_s=5.0, bw_range=(5.0, 50.0))
    return TemporalGraph(snaps, 5.0), FLTask(server, clients, ModelSpec("fuzz", size, train))


def shared_bottleneck_instance(seed):
    """Every client path crosses the server's access link, which is strictly the narrowest link."""
    rng = np.random.default_rng(seed)
    access = float(rng.uniform(10.0, 30.0))
    n_clients = int(rng.integers(1, 9))
    n_relays = int(rng.integers(1, 5))
    edges = [("S", "H", access)]
    relays = [f"r{k}" for k in range(n_relays)]
    for r in relays:
        edges.append(("H", r, float(rng.uniform(access * 1.01, 100.0))))
    clients = []
    for k in range(n_clients):
        site = f"g{k}"
        edges.append((relays[int(rng.integers(0, n_relays))], site, float(rng.uniform(access * 1.01, 100.0))))
        clients.append(Client(f"c{k}", site, float(rng.uniform(0.2, 2.0))))
    model = ModelSpec("shared", float(rng.uniform(1.0, 40.0)), float(rng.uniform(1.0, 60.0)))
    tg = static_temporal_graph(edges, num_windows=1, window_length_s=1e6)
    return tg, FLTask("S", clients, model)


# one line per acceptance criterion, echoed at the end of the run
ACCEPTANCE_LINES: dict = {}


def record(number, passed, detail):
    line = f"criterion {number}: {'PASS' if passed else 'FAIL'} {detail}"
    ACCEPTANCE_LINES[number] = line
    print(line)
    return passed


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for n in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[n])
