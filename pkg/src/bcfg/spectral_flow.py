"""Symmetry-reduced Hessians and their spectral flow along the trivial branch."""

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.linalg import null_space

from .errors import (KernelMismatch, NotAdmissible, NotASolution, NotNormalized,
                     SpectrumInvariantViolation, ZeroVector)
from .planar import (INERTIA_RTOL, bifurcation_candidates, check_planar,
                     cluster_spectrum, inertia_indices, mass_orthonormal_complement,
                     planar_form)
from .potential import (as_masses, as_positions, balanced_residual, potential_hessian,
                        s_diagonal, total_potential)

SOLUTION_TOL = 1e-8
S_ONE_TOL = 1e-8
ENDPOINT_GUARD = 1e-6
ENDPOINT_NUDGE = 1e-4


@dataclass
class HessianForm:
    """Quadratic form ``matrix`` written in the mass-orthonormal ``basis``.

    Columns of ``basis`` are body-major flat vectors spanning the tangent space.
    """
    matrix: np.ndarray
    basis: np.ndarray
    s: float


@dataclass
class SymmetryKernel:
    basis: np.ndarray  # shape (k, n*d), mass-orthonormal rows
    source: str

    @property
    def dim(self):
        return self.basis.shape[0]


@dataclass
class ReducedHessianPath:
    evaluator: Callable[[float], np.ndarray]
    interval: tuple


@dataclass
class BifurcationCertificate:
    flow: int
    candidates: list
    lower_bound: int
    interval: tuple
    kernel_dim: int
    nudges: list = field(default_factory=list)


def _weights(m, d):
    return np.repeat(m, d)


def tangent_basis(q, m, s):
    """Mass-orthonormal basis of ``{v : <v, q>_S = 0, sum_i m_i v_i = 0}``."""
    n, d = q.shape
    constraints = [np.tile(np.eye(d)[k], n) for k in range(d)]
    constraints.append((s_diagonal(n, d, s) * q).ravel())
    return mass_orthonormal_complement(_weights(m, d), constraints)


def full_hessian_form(q, m, s):
    """Hessian of the potential restricted to the S-sphere at a solution ``q``.

    The operator is ``M^{-1} D^2U + U S``; as a form in the mass metric this is
    ``D^2U + U M S`` on the tangent space.
    """
    m = as_masses(m)
    q = as_positions(q)
    try:
        res = np.linalg.norm(balanced_residual(q, m, s))
    except NotNormalized as exc:
        raise NotASolution(str(exc)) from exc
    if res >= SOLUTION_TOL:
        raise NotASolution(f"residual {res:.3e} is not small")
    n, d = q.shape
    U = total_potential(q, m)
    H = potential_hessian(q, m) + U * np.diag(_weights(m, d) * s_diagonal(n, d, s).ravel())
    Q = tangent_basis(q, m, s)
    A = Q.T @ H @ Q
    return HessianForm(matrix=0.5 * (A + A.T), basis=Q, s=float(s))


def _rotation(q, a, b):
    v = np.zeros_like(q)
    v[:, a] = -q[:, b]
    v[:, b] = q[:, a]
    return v


def rotation_generator(q, m):
    """Mass-normalized generator of rotations in the plane of axes 1 and 2."""
    m = as_masses(m)
    q = as_positions(q, 3)
    v = _rotation(q, 1, 2)
    norm = np.sqrt(np.sum(m[:, None] * v**2))
    if norm < 1e-12 * max(1.0, np.abs(q).max()):
        raise ZeroVector("configuration lies on the s-axis; rotation orbit is singular")
    return v / norm


def symmetry_generators(q, m, s, s_one_tol=S_ONE_TOL):
    """Mass-orthonormal rows spanning the infinitesimal symmetries at ``(q, s)``.

    Rotations that fix the s-axis are always symmetries for ``d = 3``; when
    ``s`` equals 1 every rotation is.
    """
    m = as_masses(m)
    q = as_positions(q)
    d = q.shape[1]
    planes = [(1, 2)] if d == 3 else []
    if abs(s - 1.0) <= s_one_tol:
        planes = [(a, b) for a in range(d) for b in range(a + 1, d)]
    if not planes:
        return np.zeros((0, q.size))
    root = np.repeat(np.sqrt(m), d)
    V = np.array([_rotation(q, a, b).ravel() * root for a, b in planes]).T
    U_, sv, _ = np.linalg.svd(V, full_matrices=False)
    rank = int(np.sum(sv > 1e-10 * max(1.0, sv.max())))
    return (U_[:, :rank] / root[:, None]).T


def symmetry_kernel(qh, m):
    """Kernel of the planar Hessian, lifted to full coordinates.

    For ``d = 3`` the first row is the rotation generator. On a line
    (``d = 2``) the kernel is empty because ``s > 1`` leaves no continuous
    symmetry.
    """
    m = as_masses(m)
    qh = check_planar(qh, m)
    n, d = qh.shape
    if d == 2:
        return SymmetryKernel(basis=np.zeros((0, n * d)), source="none")
    A, Q = planar_form(qh, m)
    ev, W = np.linalg.eigh(A)
    tol = INERTIA_RTOL * np.max(np.abs(ev))
    null = Q @ W[:, np.abs(ev) <= tol]
    if null.shape[1] < 1:
        raise SpectrumInvariantViolation("planar Hessian has no kernel")
    lifted = np.zeros((null.shape[1], n, 3))
    lifted[:, :, 1] = null[:n].T
    lifted[:, :, 2] = null[n:].T
    vecs = [rotation_generator(qh, m).ravel()] + [v.ravel() for v in lifted]
    root = np.repeat(np.sqrt(m), d)
    Qr, R = np.linalg.qr(np.array(vecs).T * root[:, None])
    keep = np.abs(np.diag(R)) > 1e-8
    basis = (Qr[:, keep] / root[:, None]).T
    if basis.shape[0] != null.shape[1]:
        raise SpectrumInvariantViolation("rotation generator is not in the planar kernel")
    source = "rotation-generator" if basis.shape[0] == 1 else "planar-hessian-kernel"
    return SymmetryKernel(basis=basis, source=source)


@dataclass
class ReducedForm:
    matrix: np.ndarray
    basis: np.ndarray
    kernel_coords: np.ndarray

    def block_form(self, form):
        """The form in the basis (kernel, complement): ``blockdiag(0_k, L)``."""
        P = null_space(self.kernel_coords.T) if self.kernel_coords.size else np.eye(form.matrix.shape[0])
        K = np.linalg.qr(self.kernel_coords)[0] if self.kernel_coords.size else np.zeros((form.matrix.shape[0], 0))
        T = np.hstack([K, P])
        return T.T @ form.matrix @ T


def reduced_hessian(form, kernel, m, rtol=1e-6):
    """Restrict ``form`` to the mass-orthogonal complement of ``kernel``."""
    m = as_masses(m)
    A = form.matrix
    Q = form.basis
    V = np.atleast_2d(kernel.basis if isinstance(kernel, SymmetryKernel) else kernel)
    if V.size == 0:
        return ReducedForm(matrix=A, basis=Q, kernel_coords=np.zeros((A.shape[0], 0)))
    w = np.repeat(m, V.shape[1] // m.size)
    C = Q.T @ (w[:, None] * V.T)
    scale = np.linalg.norm(A, 2)
    bad = np.linalg.norm(A @ C, axis=0) >= rtol * max(scale, 1e-300) * np.linalg.norm(C, axis=0)
    if np.any(bad):
        raise KernelMismatch(f"{int(bad.sum())} kernel vector(s) not annihilated by the form")
    P = null_space(C.T)
    L = P.T @ A @ P
    return ReducedForm(matrix=0.5 * (L + L.T), basis=Q @ P, kernel_coords=C)


def trivial_branch_path(qh, m, interval, kernel=None):
    m = as_masses(m)
    if kernel is None:
        kernel = symmetry_kernel(qh, m)

    def evaluate(s):
        return reduced_hessian(full_hessian_form(qh, m, s), kernel, m).matrix

    return ReducedHessianPath(evaluator=evaluate, interval=tuple(interval))


def spectral_flow(path):
    """Negative index at the left endpoint minus the negative index at the right."""
    a, b = path.interval
    left = inertia_indices(path.evaluator(a))
    right = inertia_indices(path.evaluator(b))
    if left.zero or right.zero:
        raise NotAdmissible(f"degenerate endpoint: nullity {left.zero} at {a}, {right.zero} at {b}")
    return left.minus - right.minus


def certify_bifurcation(qh, m, interval):
    """Spectral flow, interior candidates and the implied count of bifurcation instants."""
    m = as_masses(m)
    report = cluster_spectrum(qh, m)
    cands = bifurcation_candidates(report)
    a, b = map(float, interval)
    nudges = []
    for c in cands:
        if abs(a - c.s_star) < ENDPOINT_GUARD:
            nudges.append(("left", a, a - ENDPOINT_NUDGE))
            a -= ENDPOINT_NUDGE
        if abs(b - c.s_star) < ENDPOINT_GUARD:
            nudges.append(("right", b, b + ENDPOINT_NUDGE))
            b += ENDPOINT_NUDGE
    kernel = symmetry_kernel(qh, m)
    flow = spectral_flow(trivial_branch_path(qh, m, (a, b), kernel))
    inside = [c for c in cands if a < c.s_star < b]
    expected = sum(c.multiplicity for c in inside)
    if flow != expected:
        raise SpectrumInvariantViolation(f"spectral flow {flow} != crossing count {expected}")
    beta = max((c.multiplicity for c in inside), default=0)
    bound = flow // beta if beta else 0
    return BifurcationCertificate(flow=flow, candidates=inside, lower_bound=bound,
                                  interval=(a, b), kernel_dim=kernel.dim, nudges=nudges)


def point_inertia(q, m, s):
    """Inertia of the Hessian at a solution with the symmetry directions removed."""
    m = as_masses(m)
    q = as_positions(q)
    form = full_hessian_form(q, m, s)
    gens = symmetry_generators(q, m, s)
    w = np.repeat(m, q.shape[1])
    C = form.basis.T @ (w[:, None] * gens.T)
    A = form.matrix
    if C.size:
        P = null_space(C.T)
        A = P.T @ A @ P
    return inertia_indices(A)
