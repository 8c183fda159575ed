"""Shared scenario builders for the test suite (cached across tests)."""

import numpy as np

from bcfg.continuation import (ContinuationSettings, branch_switch, normal_kernel_directions,
                               trace_branch)
from bcfg.planar import bifurcation_candidates, cluster_spectrum
from bcfg.presets import preset_configuration

SCENARIOS = {
    "square": ("square", [1, 1, 1, 1]),
    "triangle_center": ("triangle_center", [1, 1, 1, 1]),
    "square_center": ("square_center", [1, 1, 1, 1, 1]),
    "collinear_equal": ("collinear", [1, 1, 1, 1]),
    "collinear_m02": ("collinear", [0.2, 0.2, 1, 1]),
    "collinear_m05": ("collinear", [0.5, 0.5, 1, 1]),
    "collinear_m09": ("collinear", [0.9, 0.9, 1, 1]),
}

_configs = {}
_branches = {}


def planar_scenario(name):
    if name not in _configs:
        tag, m = SCENARIOS[name]
        m = np.array(m, dtype=float)
        _configs[name] = (preset_configuration(tag, None, m), m)
    return _configs[name]


def traced_branch(name, index, s_max=10.0):
    """Trace (and cache) the branch from candidate ``index`` of a scenario."""
    key = (name, index, s_max)
    if key not in _branches:
        qh, m = planar_scenario(name)
        cand = bifurcation_candidates(cluster_spectrum(qh, m))[index]
        st = ContinuationSettings(s_max=s_max)
        v = normal_kernel_directions(qh, m, cand)[0]
        seed = branch_switch(qh, cand.s_star, v, st, m)
        _branches[key] = (trace_branch(seed, st, m), qh, m, cand)
    return _branches[key]


def random_config(rng, n, d, spread=1.0):
    """Collision-free random configuration (rejection on minimum distance)."""
    while True:
        q = rng.standard_normal((n, d)) * spread
        diff = q[:, None] - q[None]
        r = np.sqrt((diff**2).sum(-1)) + np.eye(n) * 1e9
        if r.min() > 0.2 * spread:
            return q
