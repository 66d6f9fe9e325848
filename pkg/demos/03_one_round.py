# One round, three policies, on the two-client toy and on the constellation.
#
# Run: python demos/03_one_round.py      (writes SVG charts to ./demo_output)

import warnings
from pathlib import Path

from fedsched import (
    Client,
    FLTask,
    ModelSpec,
    TransmissionOverrunWarning,
    build_temporal_graph,
    oracle_schedule,
    schedule_multiplexed,
    schedule_on_demand,
    static_temporal_graph,
    validate,
)
from fedsched.gantt import render_gantt
from fedsched.scenario import load_bundled_plan

# Transfers may outlive the window their route was chosen in. The scheduler
# warns each time; the charts below show it anyway, so silence the warning.
warnings.simplefilter("ignore", TransmissionOverrunWarning)

out = Path("demo_output")
out.mkdir(exist_ok=True)

# Two clients behind the server's 20 Mbps access link. A 10 MB model takes 4 s
# alone, or 8 s when both transfers share the link.
tg = static_temporal_graph([("S", "H", 20.0), ("H", "A", 100.0), ("H", "B", 100.0)], num_windows=10)
task = FLTask("S", [Client("c1", "A"), Client("c2", "B")], ModelSpec("toy", 10.0, 10.0))

for sched in (schedule_on_demand(tg, task), schedule_multiplexed(tg, task)):
    print(f"{sched.policy:25s} makespan {sched.makespan_s:5.1f} s  violations {len(validate(sched, task, tg))}")
    for iv in sched.intervals:
        print(f"    {iv.client_id} {iv.phase:10s} [{iv.start_s:5.1f}, {iv.end_s:5.1f}]")
    (out / f"toy_{sched.policy}.svg").write_text(render_gantt(sched))

# %%
# The same round over the 1000-satellite shell, five clients, MobileNetV2.
plan = load_bundled_plan("fig5")
scen = plan.scenario

tg = build_temporal_graph(scen.constellation.with_seed(1000), scen.sites, 10.0, scen.scheduling.horizon_windows)
task = scen.task.build(scen.site_node, num_clients=5)
od = schedule_on_demand(tg, task)
mx = schedule_multiplexed(tg, task)
orc = oracle_schedule(tg, task)
for s in (od, mx, orc):
    print(f"{s.policy:25s} makespan {s.makespan_s:7.2f} s")
print("on-demand order:", " -> ".join(od.metadata["download_order"]))
print("reduction vs multiplexing: %.1f%%" % (100 * (mx.makespan_s - od.makespan_s) / mx.makespan_s))
(out / "leo_on_demand.svg").write_text(render_gantt(od))
(out / "leo_multiplexed.svg").write_text(render_gantt(mx))
print("charts in", out.resolve())
