"""Newtonian potential, its derivatives and the S-weighted geometry.

Configurations are stored as ``(n, d)`` arrays (row ``i`` is body ``i``);
flattening with ``q.ravel()`` gives the body-major coordinate vector used by
the Hessian and by the continuation code. The axis carrying the weight ``s``
is always axis 0, i.e. ``S = diag(s, 1, ..., 1)``.
"""

import numpy as np

from .errors import (CollisionError, DimensionMismatch, NotNormalized,
                     ValidationError, ZeroConfiguration)

COLLISION_RTOL = 1e-8


def as_masses(m):
    m = np.asarray(m, dtype=float).ravel()
    if m.size < 2:
        raise ValidationError("need at least two bodies")
    if not np.all(m > 0):
        raise ValidationError(f"masses must be positive, got {m.tolist()}")
    return m


def as_positions(q, d=None):
    """Return ``q`` as a float ``(n, d)`` array.

    A flat vector is accepted when ``d`` is given.
    """
    q = np.asarray(q, dtype=float)
    if q.ndim == 1:
        if d is None:
            raise DimensionMismatch("flat coordinates need an explicit dimension")
        if q.size % d:
            raise DimensionMismatch(f"{q.size} coordinates do not split into d={d}")
        q = q.reshape(-1, d)
    elif q.ndim != 2:
        raise DimensionMismatch(f"expected (n, d) positions, got shape {q.shape}")
    elif d is not None and q.shape[1] != d:
        raise DimensionMismatch(f"expected d={d}, got {q.shape[1]}")
    return q


def _check(q, m):
    q = as_positions(q)
    if q.shape[0] != m.size:
        raise DimensionMismatch(f"{q.shape[0]} bodies but {m.size} masses")
    return q


def pairwise(q):
    """Differences ``q_i - q_j`` and distances ``r_ij``, with a collision check.

    The diagonal of ``r`` is set to ``inf`` so that ``1 / r`` vanishes there.
    """
    q = as_positions(q)
    diff = q[:, None, :] - q[None, :, :]
    r = np.sqrt(np.einsum("ijk,ijk->ij", diff, diff))
    n = q.shape[0]
    off = ~np.eye(n, dtype=bool)
    rmin = r[off].min()
    diameter = r[off].max()
    if not rmin > COLLISION_RTOL * diameter:
        raise CollisionError(f"bodies collide: min distance {rmin:.3e}, diameter {diameter:.3e}")
    np.fill_diagonal(r, np.inf)
    return diff, r


def distances(q):
    """Condensed pairwise distances in ``(0,1), (0,2), ..., (n-2,n-1)`` order."""
    q = as_positions(q)
    i, j = np.triu_indices(q.shape[0], 1)
    return np.linalg.norm(q[i] - q[j], axis=1)


def total_potential(q, m):
    r"""Newtonian potential :math:`U(q) = \sum_{i<j} m_i m_j / r_{ij}`."""
    m = as_masses(m)
    q = _check(q, m)
    _, r = pairwise(q)
    return 0.5 * float(np.sum(np.outer(m, m) / r))


def potential_gradient(q, m):
    """Gradient of the potential, returned with the shape of ``q``.

    Block ``i`` is ``sum_j m_i m_j (q_j - q_i) / r_ij**3``.
    """
    m = as_masses(m)
    q = _check(q, m)
    diff, r = pairwise(q)
    w = np.outer(m, m) / r**3
    return -np.einsum("ij,ijk->ik", w, diff)


def potential_hessian(q, m):
    """Hessian of the potential as an ``(n d, n d)`` body-major matrix.

    Off-diagonal blocks are ``m_i m_j / r^3 (I - 3 u u^T)`` and each diagonal
    block is minus the sum of the off-diagonal blocks in its row.
    """
    m = as_masses(m)
    q = _check(q, m)
    n, d = q.shape
    diff, r = pairwise(q)
    u = diff / r[:, :, None]
    w = np.outer(m, m) / r**3
    blocks = w[:, :, None, None] * (np.eye(d) - 3.0 * (u[:, :, :, None] * u[:, :, None, :]))
    idx = np.arange(n)
    blocks[idx, idx] = 0.0
    blocks[idx, idx] = -blocks.sum(axis=1)
    return blocks.transpose(0, 2, 1, 3).reshape(n * d, n * d)


def s_diagonal(n, d, s):
    """Diagonal of the block matrix repeating ``diag(s, 1, ..., 1)`` per body."""
    w = np.ones((n, d))
    w[:, 0] = s
    return w


def s_inner(a, b, m, s):
    """Mass and S weighted inner product ``sum_i m_i <S a_i, b_i>``."""
    m = as_masses(m)
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise DimensionMismatch(f"shapes differ: {a.shape} vs {b.shape}")
    n = m.size
    if a.size % n:
        raise DimensionMismatch(f"{a.size} coordinates for {n} bodies")
    a = a.reshape(n, -1)
    b = b.reshape(n, -1)
    return float(np.sum(m[:, None] * s_diagonal(n, a.shape[1], s) * a * b))


def s_norm2(q, m, s):
    return s_inner(q, q, m, s)


def mass_inner(a, b, m):
    return s_inner(a, b, m, 1.0)


def center_of_mass(q, m):
    m = as_masses(m)
    q = _check(q, m)
    return m @ q / m.sum()


def normalize_to_sphere(q, m, s):
    """Scale ``q`` onto the sphere ``|q|_S^2 = 1``."""
    q = as_positions(q)
    norm2 = s_norm2(q, m, s)
    if not norm2 > 0:
        raise ZeroConfiguration("cannot normalize the zero configuration")
    return q / np.sqrt(norm2)


def balanced_residual(q, m, s, check_norm=True):
    """Residual ``M^{-1} grad U(q) + U(q) S q`` with the shape of ``q``.

    It vanishes exactly at balanced configurations lying on the S-sphere.
    """
    m = as_masses(m)
    q = _check(q, m)
    if check_norm:
        dev = abs(s_norm2(q, m, s) - 1.0)
        if dev > 1e-6:
            raise NotNormalized(f"|q|_S^2 deviates from 1 by {dev:.3e}")
    U = total_potential(q, m)
    return potential_gradient(q, m) / m[:, None] + U * s_diagonal(*q.shape, s) * q


def residual_norm(q, m, s):
    return float(np.linalg.norm(balanced_residual(q, m, s)))
