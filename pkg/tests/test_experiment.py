import copy
import json
import math

import pytest

from fedsched import MissingPolicyError, ScenarioError
from fedsched.experiment import SweepResult, SweepRow, reduction_report, rows_csv, run_sweep, summary_json
from fedsched.scenario import bundled_plan_path, load_bundled_plan, parse_plan


def plan_doc(name="fig5.json", **overrides):
    doc = json.loads(bundled_plan_path(name).read_text())
    doc = copy.deepcopy(doc)
    doc.update(overrides)
    return doc


def small_plan(seeds=(1000, 1007), sweep=None, policies=None):
    doc = plan_doc(seeds=list(seeds))
    if sweep is not None:
        doc["sweep"] = sweep
    if policies is not None:
        doc["policies"] = policies
    return parse_plan(doc)


def test_bundled_plans_load():
    fig5, fig6 = load_bundled_plan("fig5"), load_bundled_plan("fig6")
    assert fig5.sweep_kind == "client_count" and fig5.sweep_values == (2, 4, 6, 8, 10, 12)
    assert fig6.sweep_kind == "model" and len(fig6.sweep_values) == 5
    assert len(fig5.seeds) == len(fig6.seeds) == 50
    assert fig5.scenario.constellation.min_mbps == 10.0 and fig5.scenario.constellation.max_mbps == 30.0


def test_single_cell_cardinality():
    plan = small_plan(seeds=(1000,), sweep={"client_count": [5]}, policies=["on_demand"])
    result = run_sweep(plan)
    assert len(result.rows) == 1 and not result.failures


def test_row_count_and_determinism():
    plan = small_plan(sweep={"client_count": [2, 4]})
    a, b = run_sweep(plan), run_sweep(plan)
    assert len(a.rows) == 2 * 2 * 2
    assert a.rows == b.rows
    assert rows_csv(a) == rows_csv(b)
    assert summary_json(a) == summary_json(b)


def test_parallel_matches_serial():
    plan = small_plan(seeds=(1000, 1007, 1014), sweep={"client_count": [3]})
    assert run_sweep(plan, jobs=3).rows == run_sweep(plan, jobs=1).rows


def test_seed_isolation():
    a = run_sweep(small_plan(seeds=(1000, 1007), sweep={"client_count": [4]}))
    b = run_sweep(small_plan(seeds=(1000, 2024), sweep={"client_count": [4]}))
    keep = lambda r: [x for x in r.rows if x.seed == 1000]  # noqa: E731
    assert keep(a) == keep(b)


def test_summary_means_match_rows():
    result = run_sweep(small_plan(seeds=(1000, 1007, 1014), sweep={"client_count": [3, 6]}))
    for (value, policy), s in result.summary.items():
        xs = [r.makespan_s for r in result.rows if r.sweep_value == value and r.policy == policy]
        assert math.isclose(s.mean_s, sum(xs) / len(xs), rel_tol=1e-9)
        assert s.count == 3
    for r in result.reductions.values():
        assert -1.0 < r < 1.0


def synthetic(mx, od):
    rows = [SweepRow(5, "statistical_multiplexing", 1, mx), SweepRow(5, "on_demand", 1, od)]
    return SweepResult("client_count", (5,), ("on_demand", "statistical_multiplexing"), (1,), rows)


def test_reduction_report_values():
    result = synthetic(26.0, 22.0)
    assert result.reductions[5] == pytest.approx(4.0 / 26.0)
    report = reduction_report(result)
    assert "15.38" in report and "26.000" in report and "22.000" in report
    assert "0.00" in reduction_report(synthetic(20.0, 20.0))
    assert "-10.00" in reduction_report(synthetic(20.0, 22.0))
    assert synthetic(20.0, 22.0).reductions[5] < 0


def test_reduction_report_needs_both_policies():
    result = SweepResult("client_count", (5,), ("on_demand",), (1,), [SweepRow(5, "on_demand", 1, 3.0)])
    with pytest.raises(MissingPolicyError):
        reduction_report(result)


def test_unreachable_cells_are_recorded_not_fatal():
    doc = plan_doc(seeds=[1000])
    # a horizon of one window cannot hold a 180 s training phase
    doc["scenario"]["scheduling"]["horizon_windows"] = 1
    doc["sweep"] = {"client_count": [2]}
    result = run_sweep(parse_plan(doc))
    assert not result.rows
    assert {f.error for f in result.failures} == {"OutOfHorizonError"}
    assert len(result.failures) == 2


@pytest.mark.parametrize("mutate,field", [
    (lambda d: d.update(sweep={"client_count": [99]}), "plan.sweep.client_count"),
    (lambda d: d.update(sweep={"speed": [1]}), "plan.sweep"),
    (lambda d: d.update(policies=["fastest"]), "plan.policies"),
    (lambda d: d.update(seeds=[]), "plan.seeds"),
    (lambda d: d.update(format_version="2.0"), "plan"),
    (lambda d: d["scenario"]["task"].update(model="VGG-16"), "task.model"),
    (lambda d: d["scenario"]["constellation"].update(num_satellites=1001), "constellation"),
])
def test_plan_errors_name_the_field(mutate, field):
    doc = plan_doc()
    mutate(doc)
    with pytest.raises(ScenarioError) as info:
        parse_plan(doc)
    assert field in str(info.value)
