"""Equilateral triangle with a central mass m4: where does it degenerate?

The planar Hessian of this configuration has a single zero (the rotation)
except at one value of m4, where two more eigenvalues pass through zero.
"""

import numpy as np
from scipy.optimize import brentq

from bcfg import planar_inertia, preset_configuration
from bcfg.planar import planar_form


def config(m4):
    m = np.array([1.0, 1.0, 1.0, m4])
    return preset_configuration("triangle_center", None, m), m


for m4 in (0.70, 0.75, 0.77, 0.78, 0.85):
    print(f"m4 = {m4:.2f}: planar inertia {planar_inertia(*config(m4)).as_tuple()}")

root = brentq(lambda x: np.linalg.eigvalsh(planar_form(*config(x))[0])[1], 0.75, 0.8, xtol=1e-14)
print(f"\ndegenerate at m4 = {root:.12f}")
print(f"closed form      = {(2 + 3 * np.sqrt(3)) / (18 - 5 * np.sqrt(3)):.12f}")
print("inertia there:", planar_inertia(*config(root)).as_tuple())
