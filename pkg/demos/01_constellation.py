# A 1000-satellite Walker shell and what the ground can see.
#
# Run: python demos/01_constellation.py

import numpy as np

from fedsched import ConstellationConfig, build_snapshot, make_site, walker_delta
from fedsched.constellation import _elevations, orbital_period, positions_ecef

# The default shell: 25 planes of 40 satellites at 550 km, inclined 53 degrees.
cfg = ConstellationConfig()
elements = walker_delta(cfg)
print(len(elements), "satellites,", cfg.num_planes, "planes of", cfg.sats_per_plane)
print("orbital period %.1f min" % (orbital_period(cfg.altitude_km) / 60))

# Positions are Earth-fixed, so the whole shell drifts west under the ground.
pos = positions_ecef(elements, 0.0)
radius = np.linalg.norm(pos, axis=1)
print("radius spread: %.6f .. %.6f km" % (radius.min(), radius.max()))

# %%
# How many satellites clear the 25 degree mask over a few cities?
sites = [make_site("Singapore", 1.35, 103.82, "server"), make_site("London", 51.51, -0.13),
         make_site("Sao Paulo", -23.55, -46.63), make_site("Reykjavik", 64.15, -21.94)]
site_pos = np.array([s.position_km for s in sites])
for minute in (0, 5, 10):
    elev = _elevations(positions_ecef(elements, 60.0 * minute), site_pos)
    counts = (elev >= cfg.elevation_mask_deg).sum(axis=0)
    print(f"t={minute:2d} min  " + "  ".join(f"{s.name}:{c}" for s, c in zip(sites, counts)))

# %%
# One snapshot: grid-plus ISLs plus every visible ground link, each with its own bandwidth.
snap = build_snapshot(cfg.with_seed(7), elements, sites, window_index=0, window_length_s=10.0)
isl = [e for e in snap.edges if e.v.startswith("sat-")]
ground = [e for e in snap.edges if e.v.startswith("gs-")]
bw = np.array([e.bandwidth_mbps for e in snap.edges])
print(f"{len(isl)} ISLs, {len(ground)} ground links")
print("bandwidth Mbps: min %.2f  mean %.2f  max %.2f" % (bw.min(), bw.mean(), bw.max()))
print("ISL delay ms: mean %.2f" % np.mean([e.delay_ms for e in isl]))
