"""Spectral analysis of configurations lying in the plane orthogonal to the s-axis.

For ``d = 3`` the configuration lies in ``{0} x R^2``; for ``d = 2`` it is
collinear on ``{0} x R``. In both cases coordinate 0 of every body is zero and
the Hessian splits, after reordering coordinates axis by axis, into a normal
block ``B`` (axis 0) and an in-plane block ``D`` (remaining axes).
"""

from dataclasses import dataclass
from math import floor

import numpy as np
from scipy.linalg import null_space

from .errors import SpectrumInvariantViolation, ValidationError
from .potential import (as_masses, as_positions, balanced_residual, pairwise,
                        s_norm2, total_potential)

CLUSTER_RTOL = 1e-7
MINUS_U_RTOL = 1e-6
INERTIA_RTOL = 1e-9
PLANE_ATOL = 1e-12


@dataclass(frozen=True)
class InertiaTriple:
    minus: int
    zero: int
    plus: int

    @property
    def dim(self):
        return self.minus + self.zero + self.plus

    def __add__(self, other):
        return InertiaTriple(self.minus + other.minus, self.zero + other.zero,
                             self.plus + other.plus)

    def as_tuple(self):
        return (self.minus, self.zero, self.plus)


@dataclass(frozen=True)
class SpectrumReport:
    """Distinct nonzero eigenvalues of ``M^{-1} B`` at a planar configuration.

    ``mu`` is strictly decreasing and ``alpha`` holds the multiplicities.
    ``l`` is the 0-based position of the cluster equal to ``-U``.
    """
    mu: tuple
    alpha: tuple
    l: int
    potential: float
    n: int
    dimension: int

    @property
    def k(self):
        return len(self.mu)


@dataclass(frozen=True)
class BifurcationCandidate:
    s_star: float
    multiplicity: int
    eigenvalue: float


def check_planar(qh, m=None):
    """Validate that every body has a vanishing s-axis coordinate."""
    qh = as_positions(qh)
    if qh.shape[1] not in (2, 3):
        raise ValidationError(f"dimension must be 2 or 3, got {qh.shape[1]}")
    if np.max(np.abs(qh[:, 0])) >= PLANE_ATOL:
        raise ValidationError("configuration has nonzero s-axis coordinates")
    if m is not None:
        pairwise(qh)
    return qh


def b_matrix(qh, m):
    """Normal block ``b_ij = m_i m_j / r_ij^3`` with zero row sums."""
    m = as_masses(m)
    qh = check_planar(qh, m)
    _, r = pairwise(qh)
    B = np.outer(m, m) / r**3
    np.fill_diagonal(B, 0.0)
    B -= np.diag(B.sum(axis=1))
    return B


def d_matrix(qh, m):
    """In-plane block of the Hessian in axis-major order.

    For ``d = 3`` the coordinates are ``(y_1..y_n, z_1..z_n)`` and the block
    for a pair ``i != j`` is built from the angle between ``q_i - q_j`` and the
    y-axis; for ``d = 2`` it is the ``n x n`` block along the line.
    """
    m = as_masses(m)
    qh = check_planar(qh, m)
    n, d = qh.shape
    diff, r = pairwise(qh)
    w = np.outer(m, m) / r**3
    p = d - 1
    if p == 2:
        theta = np.arctan2(diff[:, :, 2], diff[:, :, 1])
        c, s = np.cos(theta), np.sin(theta)
        blocks = np.empty((n, n, 2, 2))
        blocks[:, :, 0, 0] = 1 - 3 * c**2
        blocks[:, :, 0, 1] = blocks[:, :, 1, 0] = -3 * s * c
        blocks[:, :, 1, 1] = 1 - 3 * s**2
    else:
        blocks = np.full((n, n, 1, 1), -2.0)
    blocks *= w[:, :, None, None]
    idx = np.arange(n)
    blocks[idx, idx] = 0.0
    blocks[idx, idx] = -blocks.sum(axis=1)
    # axis-major: row (a, i), column (b, j)
    return blocks.transpose(2, 0, 3, 1).reshape(p * n, p * n)


def axis_major_permutation(n, d):
    """Index array taking a body-major vector to ``(x_1..x_n, y_1..y_n, ...)``."""
    return np.arange(n * d).reshape(n, d).T.ravel()


def inertia_indices(A, tol=None):
    """Counts of eigenvalues below ``-tol``, within ``[-tol, tol]`` and above ``tol``.

    The default tolerance is ``1e-9`` times the largest absolute eigenvalue.
    """
    A = np.asarray(A, dtype=float)
    if A.size == 0:
        return InertiaTriple(0, 0, 0)
    ev = np.linalg.eigvalsh(0.5 * (A + A.T))
    if tol is None:
        tol = INERTIA_RTOL * max(np.max(np.abs(ev)), np.finfo(float).tiny)
    return InertiaTriple(int(np.sum(ev < -tol)), int(np.sum(np.abs(ev) <= tol)),
                         int(np.sum(ev > tol)))


def mass_orthonormal_complement(weights, constraints):
    """Basis ``Q`` of the weighted-orthogonal complement of ``constraints``.

    ``weights`` is the diagonal of the metric. The returned columns satisfy
    ``Q.T @ diag(w) @ Q = I`` and ``c @ diag(w) @ Q = 0`` for every row ``c``.
    """
    w = np.asarray(weights, dtype=float).ravel()
    root = np.sqrt(w)
    C = np.atleast_2d(np.asarray(constraints, dtype=float))
    if C.size == 0:
        Qe = np.eye(w.size)
    else:
        Qe = null_space(C * root)
    return Qe / root[:, None]


def normal_eigenvalues(qh, m):
    """The ``n - 1`` eigenvalues of ``M^{-1} B`` on the complement of ``(1,...,1)``.

    Returned in decreasing order.
    """
    m = as_masses(m)
    B = b_matrix(qh, m)
    Q = mass_orthonormal_complement(m, np.ones(m.size))
    ev = np.linalg.eigvalsh(Q.T @ B @ Q)
    return ev[::-1]


def _cluster(values, gap):
    clusters = [[values[0]]]
    for v in values[1:]:
        if abs(clusters[-1][-1] - v) < gap:
            clusters[-1].append(v)
        else:
            clusters.append([v])
    return clusters


def cluster_spectrum(qh, m):
    """Cluster the normal spectrum of a planar central configuration.

    Raises
    ------
    SpectrumInvariantViolation
        If no cluster equals ``-U`` or the structural multiplicities fail
        (``alpha_l >= 2`` in the plane, ``>= 1`` on a line).
    """
    m = as_masses(m)
    qh = check_planar(qh, m)
    n, d = qh.shape
    res = np.linalg.norm(balanced_residual(qh, m, 1.0))
    if res >= 1e-8:
        raise SpectrumInvariantViolation(f"not a central configuration (residual {res:.2e})")
    U = total_potential(qh, m)
    ev = normal_eigenvalues(qh, m)
    clusters = _cluster(ev, CLUSTER_RTOL * max(1.0, abs(U)))
    mu = tuple(float(np.mean(c)) for c in clusters)
    alpha = tuple(len(c) for c in clusters)
    l = int(np.argmin([abs(x + U) for x in mu]))
    if abs(mu[l] + U) >= MINUS_U_RTOL * U:
        raise SpectrumInvariantViolation(f"no eigenvalue equals -U (closest gap {abs(mu[l] + U):.3e})")
    need = 2 if d == 3 else 1
    if alpha[l] < need:
        raise SpectrumInvariantViolation(f"multiplicity of -U is {alpha[l]}, expected >= {need}")
    if (d == 3 and n >= 4 or d == 2 and n >= 3) and len(mu) <= l + 1:
        raise SpectrumInvariantViolation("no eigenvalue below -U")
    return SpectrumReport(mu=mu, alpha=alpha, l=l, potential=U, n=n, dimension=d)


def normal_inertia_at(report, s, tol=None):
    """Normal inertia indices at parameter ``s``, from the signs of ``mu_j + s U``."""
    shifted = np.asarray(report.mu) + s * report.potential
    if tol is None:
        tol = INERTIA_RTOL * max(1.0, float(np.max(np.abs(report.mu))))
    alpha = np.asarray(report.alpha)
    return InertiaTriple(int(alpha[shifted < -tol].sum()),
                         int(alpha[np.abs(shifted) <= tol].sum()),
                         int(alpha[shifted > tol].sum()))


def planar_form(qh, m):
    """In-plane Hessian form and the mass-orthonormal tangent basis it lives on.

    Returns ``(A, Q)`` where ``Q`` spans the in-plane directions that keep the
    center of mass fixed and are orthogonal to ``qh`` itself, and ``A`` is the
    form ``D + U M`` compressed to that basis (axis-major coordinates).
    """
    m = as_masses(m)
    qh = check_planar(qh, m)
    n, d = qh.shape
    p = d - 1
    U = total_potential(qh, m)
    D = d_matrix(qh, m)
    w = np.tile(m, p)
    constraints = [np.kron(np.eye(p)[a], np.ones(n)) for a in range(p)]
    constraints.append(qh[:, 1:].T.ravel())
    Q = mass_orthonormal_complement(w, constraints)
    A = Q.T @ (D + U * np.diag(w)) @ Q
    return 0.5 * (A + A.T), Q


def planar_inertia(qh, m, tol=None):
    A, _ = planar_form(qh, m)
    return inertia_indices(A, tol)


def bifurcation_candidates(report):
    """One candidate per distinct eigenvalue below ``-U``, by increasing ``s*``."""
    out = [BifurcationCandidate(s_star=-mu / report.potential, multiplicity=a, eigenvalue=mu)
           for mu, a in zip(report.mu[report.l + 1:], report.alpha[report.l + 1:])]
    return sorted(out, key=lambda c: c.s_star)


def bifurcation_lower_bound(report):
    """``floor((n - 1 - alpha) / beta)`` with ``alpha`` summed up to the ``-U`` cluster."""
    tail = report.alpha[report.l + 1:]
    if not tail:
        return 0
    alpha = sum(report.alpha[:report.l + 1])
    return floor((report.n - 1 - alpha) / max(tail))


def is_planar_solution(q, m, tol=1e-8):
    q = as_positions(q)
    return (np.max(np.abs(q[:, 0])) < PLANE_ATOL
            and abs(s_norm2(q, m, 1.0) - 1) < 1e-6
            and np.linalg.norm(balanced_residual(q, m, 1.0)) < tol)
