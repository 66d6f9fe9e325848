import itertools
import random

import pytest

from fedsched import max_min_rates, static_temporal_graph, widest_path
from fedsched.fairness import is_bottlenecked, link_loads, progressive_fill
from fedsched.temporal_graph import make_path


def test_equal_split_on_shared_link():
    snap = static_temporal_graph([("S", "H", 20.0), ("H", "A", 100.0), ("H", "B", 100.0)])[0]
    rates = max_min_rates(snap, [("a", make_path(snap, ["S", "H", "A"])), ("b", make_path(snap, ["S", "H", "B"]))])
    assert rates == {"a": 10.0, "b": 10.0}


def test_disjoint_paths_get_own_bottleneck():
    snap = static_temporal_graph([("S", "A", 10.0), ("S", "B", 30.0)])[0]
    flows = [{"flow_id": 1, "path": widest_path(snap, "S", "A")}, {"flow_id": 2, "path": widest_path(snap, "S", "B")}]
    assert max_min_rates(snap, flows) == {1: 10.0, 2: 30.0}


def test_two_level_filling():
    # f1 and f2 share link A (30); f2 also crosses link B (10)
    snap = static_temporal_graph([("X", "Y", 30.0), ("Y", "Z", 10.0)])[0]
    rates = max_min_rates(snap, [("f1", make_path(snap, ["X", "Y"])), ("f2", make_path(snap, ["X", "Y", "Z"]))])
    assert rates["f2"] == pytest.approx(10.0)
    assert rates["f1"] == pytest.approx(20.0)


def test_direction_matters():
    # opposite directions of one undirected link are independent resources
    snap = static_temporal_graph([("S", "A", 10.0)])[0]
    rates = max_min_rates(snap, [("down", make_path(snap, ["S", "A"])), ("up", make_path(snap, ["A", "S"]))])
    assert rates == {"down": 10.0, "up": 10.0}


def random_instance(seed):
    rng = random.Random(seed)
    links = [f"l{i}" for i in range(rng.randint(1, 8))]
    capacity = {link: rng.uniform(1.0, 50.0) for link in links}
    flows = {f"f{k}": rng.sample(links, rng.randint(1, len(links))) for k in range(rng.randint(1, 10))}
    return flows, capacity


@pytest.mark.parametrize("seed", range(200))
def test_conservation_and_bottleneck_property(seed):
    flows, capacity = random_instance(seed)
    rates = progressive_fill(flows, capacity)
    for link, load in link_loads(flows, rates).items():
        assert load <= capacity[link] + 1e-9
    assert all(r > 0 for r in rates.values())
    assert is_bottlenecked(flows, capacity, rates)


@pytest.mark.parametrize("seed", range(20))
def test_flow_order_does_not_matter(seed):
    flows, capacity = random_instance(seed)
    base = progressive_fill(flows, capacity)
    items = list(flows.items())
    for perm in itertools.islice(itertools.permutations(items), 6):
        assert progressive_fill(dict(perm), capacity) == base
