"""
Large-mu limit: back toward the hedgehog
========================================

As mu grows the potential pins u to the maximizing set of P, and the
PLUS minimizers approach U* in L^2.  The sweep warm-starts each solve
from the previous minimizer.
"""
import sys

import numpy as np

from ldgcore.mesh import build_mesh
from ldgcore.optimizer import sweep

n = int(sys.argv[1]) if len(sys.argv) > 1 else 64
items = sweep("mu", [1.0, 10.0, 100.0, 1000.0], build_mesh(n), branch="PLUS")

print(f"{'mu':>6} {'E/pi':>9} {'|u-U*|':>8} {'ring':>7} {'status':>10}")
for it in items:
    d = it.defects
    ring = f"{d.ring_radius:.3f}" if d.ring_radius else "-"
    print(f"{it.value:6g} {it.energy.total / np.pi:9.4f} {it.distance:8.4f} {ring:>7} {it.trace.status:>10}")

# %%
# The ring shrinks toward the origin as mu grows, and the distance falls.
dist = [it.distance for it in items]
print("distance ratio first/last:", round(dist[0] / dist[-1], 1))
