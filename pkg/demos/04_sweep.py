# A short client-count sweep, and why the gap stays modest.
#
# Run: python demos/04_sweep.py [num_seeds]

import sys
from dataclasses import replace

from fedsched.experiment import reduction_report, run_sweep
from fedsched.fl_task import lookup_model
from fedsched.scenario import load_bundled_plan

num_seeds = int(sys.argv[1]) if len(sys.argv) > 1 else 5
plan = load_bundled_plan("fig5")
plan = replace(plan, seeds=plan.seeds[:num_seeds])
result = run_sweep(plan)
print(reduction_report(result))

# %%
# When every client sits behind one shared bottleneck with download time D and
# training time T, multiplexing finishes at 2nD + T while on-demand finishes at
# (n + 1)D + T. The relative gap is (n - 1)D / (2nD + T), which is the most
# on-demand can gain when contention is total.
model = lookup_model("MobileNetV2")
for rate in (10.0, 20.0, 30.0):
    D = model.size_mb * 8 / rate
    row = "  ".join(f"n={n}:{100 * (n - 1) * D / (2 * n * D + model.training_time_s):4.1f}%" for n in plan.sweep_values)
    print(f"shared bottleneck {rate:4.1f} Mbps  {row}")
