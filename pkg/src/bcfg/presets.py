"""Central configurations used as starting points of trivial branches."""

import numpy as np

from .continuation import ContinuationSettings, solve_fixed_s
from .errors import NoConvergence, ParseError, ValidationError
from .potential import (as_masses, as_positions, balanced_residual, center_of_mass,
                        normalize_to_sphere, pairwise)

PRESETS = {
    "square": "four bodies at the vertices of a square (d = 3)",
    "triangle": "three bodies at the vertices of an equilateral triangle (d = 3)",
    "triangle_center": "equilateral triangle of equal masses plus a body at its center (d = 3)",
    "square_center": "square of equal masses plus a body at its center (d = 3)",
    "collinear": "collinear central configuration for the given mass ordering (d = 2)",
    "explicit": "user-supplied coordinates, Newton-polished",
}

POLISH_TOL = 1e-11


def _regular_polygon(k, phase=0.0):
    t = phase + 2 * np.pi * np.arange(k) / k
    return np.column_stack([np.cos(t), np.sin(t)])


def _in_plane(points, d=3):
    points = np.atleast_2d(points)
    q = np.zeros((points.shape[0], d))
    q[:, d - points.shape[1]:] = points
    return q


def _require(m, n, tag, equal=None):
    if m.size != n:
        raise ValidationError(f"preset {tag!r} needs {n} masses, got {m.size}")
    if equal is not None and not np.allclose(m[equal], m[equal][0], rtol=0, atol=1e-14):
        raise ValidationError(f"preset {tag!r} needs equal masses at positions {list(equal)}")


def polish(q, m, tol=POLISH_TOL):
    """Center, normalize and Newton-polish a central configuration at ``s = 1``."""
    m = as_masses(m)
    q = as_positions(q)
    q = normalize_to_sphere(q - center_of_mass(q, m), m, 1.0)
    settings = ContinuationSettings(newton_tol=tol * 1e-1, max_newton_iters=100)
    if np.linalg.norm(balanced_residual(q, m, 1.0)) >= settings.newton_tol:
        q, _ = solve_fixed_s(q, 1.0, m, settings, all_rotations=True)
    res = np.linalg.norm(balanced_residual(q, m, 1.0))
    if res >= tol:
        raise NoConvergence(f"central configuration residual {res:.3e}")
    return q


def collinear_configuration(m, tol=POLISH_TOL):
    """Collinear central configuration on the axis orthogonal to the s-axis.

    Bodies keep the order of ``m`` along the line. Starting from equally spaced
    positions, damped Newton is run on the one-dimensional equations.
    """
    m = as_masses(m)
    n = m.size
    y = np.linspace(-1.0, 1.0, n)
    q1 = normalize_to_sphere(_in_plane(y[:, None] - m @ y / m.sum(), d=1), m, 1.0)
    settings = ContinuationSettings(newton_tol=tol * 1e-1, max_newton_iters=200)
    q1, _ = solve_fixed_s(q1, 1.0, m, settings, all_rotations=False)
    if np.any(np.diff(q1[:, 0]) <= 0):
        raise NoConvergence("collinear solve changed the mass ordering")
    return polish(_in_plane(q1, d=2), m, tol)


def preset_configuration(tag, params=None, m=None):
    """Normalized central configuration for a preset tag.

    ``params`` is only used by ``explicit`` (key ``coords``, an ``(n, d)``
    array).
    """
    params = params or {}
    m = as_masses(m)
    if tag == "square":
        _require(m, 4, tag)
        q = _in_plane(_regular_polygon(4))
    elif tag == "triangle":
        _require(m, 3, tag)
        q = _in_plane(_regular_polygon(3))
    elif tag == "triangle_center":
        _require(m, 4, tag, equal=[0, 1, 2])
        q = _in_plane(np.vstack([_regular_polygon(3), [0.0, 0.0]]))
    elif tag == "square_center":
        _require(m, 5, tag, equal=[0, 1, 2, 3])
        q = _in_plane(np.vstack([_regular_polygon(4), [0.0, 0.0]]))
    elif tag == "collinear":
        return collinear_configuration(m)
    elif tag == "explicit":
        if "coords" not in params:
            raise ValidationError("explicit preset needs coordinates")
        q = as_positions(params["coords"])
        if q.shape[0] != m.size:
            raise ValidationError(f"{q.shape[0]} bodies but {m.size} masses")
        pairwise(q)
    else:
        raise ParseError(f"unknown preset {tag!r}")
    return polish(q, m)
