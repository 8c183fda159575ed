"""Four equal masses on a line, followed off the line through a rhombus.

The branch from the larger instant turns around twice. At the first turn the
bodies form a rhombus; the branch then comes back to the line with the two
middle bodies swapped. A profile of s against arclength is written as SVG.
"""

import sys
from pathlib import Path

import numpy as np

from bcfg import (BranchRecord, ContinuationSettings, bifurcation_candidates, branch_switch,
                  cluster_spectrum, emit_plot, normal_kernel_directions, preset_configuration,
                  trace_branch)
from bcfg.potential import distances

m = np.ones(4)
qh = preset_configuration("collinear", None, m)
cand = bifurcation_candidates(cluster_spectrum(qh, m))[-1]
print(f"larger instant s* = {cand.s_star:.6f}")

settings = ContinuationSettings()
v = normal_kernel_directions(qh, m, cand)[0]
branch = trace_branch(branch_switch(qh, cand.s_star, v, settings, m), settings, m)
print(f"{len(branch.points)} points, {branch.termination}")
print("events:", branch.events)

for tp in branch.turning_points:
    print(f"turning point at s = {tp.s:.6f}, distances {np.round(np.sort(distances(tp.q)), 5)}")

print("order along the line, start:", np.argsort(qh[:, 1]))
print("order along the line, end:  ", np.argsort(branch.points[-1].q[:, 1]))

out = Path(sys.argv[1]) if len(sys.argv) > 1 else Path("bcfg-out")
out.mkdir(exist_ok=True)
rec = BranchRecord.from_branch(branch, "collinear_equal", cand.s_star, "plus", settings, m)
(out / "collinear_rhombus_profile.svg").write_text(emit_plot(rec, "s_profile"))
print("wrote", out / "collinear_rhombus_profile.svg")
