"""Four equal masses: from the square to the regular tetrahedron.

The square is a balanced configuration for every s >= 1. Its normal spectrum
predicts one bifurcation instant; the branch that leaves it there folds the
square along a diagonal and ends, at s = 1, in the regular tetrahedron.
"""

import numpy as np

from bcfg import (ContinuationSettings, bifurcation_candidates, branch_switch, cluster_spectrum,
                  normal_kernel_directions, preset_configuration, trace_branch)
from bcfg.potential import distances

m = np.ones(4)
qh = preset_configuration("square", None, m)
rep = cluster_spectrum(qh, m)
print("U =", rep.potential)
print("normal eigenvalues:", rep.mu, "multiplicities", rep.alpha)

(cand,) = bifurcation_candidates(rep)
print(f"bifurcation instant s* = {cand.s_star:.10f}")
print(f"closed form         = {4 * np.sqrt(2) / (2 * np.sqrt(2) + 1):.10f}")

settings = ContinuationSettings(s_min=1.0, s_max=10.0)
v = normal_kernel_directions(qh, m, cand)[0]
branch = trace_branch(branch_switch(qh, cand.s_star, v, settings, m), settings, m)

print(f"{len(branch.points)} points, stopped by {branch.termination}")
for p in branch.points[::10] + [branch.points[-1]]:
    print(f"  s={p.s:.6f}  height={np.ptp(p.q[:, 0]):.4f}  {p.classification}")

d = distances(branch.points[-1].q)
print("edges at s = 1:", np.round(d, 8))
print("relative spread:", np.ptp(d) / d.mean())
