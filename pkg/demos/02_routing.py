# Widest paths through a snapshot, and how they change between windows.
#
# Run: python demos/02_routing.py

from fedsched import ConstellationConfig, build_temporal_graph, make_site, snapshot_at, widest_path
from fedsched.temporal_graph import min_delay_path

sites = [make_site("Singapore", 1.35, 103.82, "server"), make_site("New York", 40.71, -74.01)]
tg = build_temporal_graph(ConstellationConfig(rng_seed=3), sites, window_length_s=10.0, num_windows=60)
src, dst = sites[0].id, sites[1].id

# The widest path maximises its narrowest link. It says nothing about hop count
# beyond the tie-break, so it can wander.
snap = snapshot_at(tg, 0.0)
wide = widest_path(snap, src, dst)
fast = min_delay_path(snap, src, dst)
print("widest   : %2d hops, bottleneck %.2f Mbps, delay %.1f ms" % (wide.hops, wide.bottleneck_mbps, wide.total_delay_ms))
print("min delay: %2d hops, bottleneck %.2f Mbps, delay %.1f ms" % (fast.hops, fast.bottleneck_mbps, fast.total_delay_ms))

# %%
# Bottleneck over time. Every window has fresh bandwidth draws and new geometry.
for t in range(0, 600, 60):
    p = widest_path(snapshot_at(tg, float(t)), src, dst)
    print(f"t={t:3d} s  window {p.window_index:2d}  {p.hops:2d} hops  bottleneck {p.bottleneck_mbps:5.2f} Mbps")

# %%
# 13.4 MB over the t=0 path, at 8 megabits per megabyte:
print("MobileNetV2 transfer: %.2f s" % (13.4 * 8 / wide.bottleneck_mbps))
