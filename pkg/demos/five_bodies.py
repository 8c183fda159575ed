"""Square with a central mass: two bifurcation instants, two very different ends.

Both branches are traced down to s = 1. The one from the smaller instant
ends in a tetrahedron with the fifth body at its center; the other ends in a
square pyramid. The script prints the inertia along each branch, which is
where the two differ most.
"""

from collections import Counter

import numpy as np

from bcfg import (ContinuationSettings, bifurcation_candidates, branch_switch, certify_bifurcation,
                  cluster_spectrum, normal_kernel_directions, preset_configuration, trace_branch)
from bcfg.potential import distances

m = np.ones(5)
qh = preset_configuration("square_center", None, m)
cands = bifurcation_candidates(cluster_spectrum(qh, m))
cert = certify_bifurcation(qh, m, (1.001, 5.0))
print("instants:", [round(c.s_star, 6) for c in cands], " spectral flow:", cert.flow)

settings = ContinuationSettings()
for cand in cands:
    v = normal_kernel_directions(qh, m, cand)[0]
    branch = trace_branch(branch_switch(qh, cand.s_star, v, settings, m), settings, m)
    end = branch.points[-1]
    print(f"\ns* = {cand.s_star:.6f}: {len(branch.points)} points, ends at s = {end.s:.6f}")
    print("  classes:", dict(Counter(p.classification for p in branch.points)))
    print("  end inertia:", end.inertia.as_tuple())
    print("  end distances:", np.round(np.sort(distances(end.q)), 5))
