"""Pseudo-arclength continuation of balanced configurations.

Solutions ``(q, s)`` of ``F(q, s) = M^{-1} grad U(q) + U(q) S(s) q = 0`` are
traced with a tangent predictor and a damped Newton corrector on the system

    F(q, s) = 0,   |(q, s) - (q_i, s_i)|^2 - delta^2 = 0,   gauge rows = 0.

For ``d = 3`` rotations about the s-axis leave ``F`` equivariant, so one gauge
row ``<xi(q_i), q - q_i>_M = 0`` pins the phase. Because ``<M F(q), xi(q)>``
vanishes identically the bordered system has one redundant row; steps are
computed by least squares, which is exact for a consistent system.
"""

from dataclasses import dataclass, field, replace

import numpy as np

from .errors import (AmbiguousTangent, CollisionError, FellBackToTrivial,
                     NoConvergence, SingularSystem)
from .planar import InertiaTriple, b_matrix, mass_orthonormal_complement
from .potential import (as_masses, as_positions, balanced_residual, center_of_mass,
                        distances, potential_gradient, potential_hessian, s_diagonal,
                        s_norm2, total_potential)
from .spectral_flow import point_inertia, symmetry_generators

S_ONE_GUARD = 1e-9
LANDING_ONE_TOL = 1e-8
RCOND = 1e-13
TANGENT_RTOL = 1e-10
MAX_HALVINGS = 4
MIN_STEP_FRACTION = 0.0625
SPEEDUP_AFTER = 3
FAST_ITERS = 3
MIN_DAMPING = 2.0**-12
CORRECTION_TOL = 1e-8
TURNING_TOL = 1e-6
SINGULAR_TURNING_TOL = 1e-2


@dataclass
class ContinuationSettings:
    delta: float = 0.01
    newton_tol: float = 1e-11
    max_newton_iters: int = 50
    max_steps: int = 20000
    s_min: float = 1.0
    s_max: float = 10.0
    collision_tol: float = 1e-6
    epsilon_switch: float = 1e-3
    delta_s_switch: float = 1e-3
    loop_tol: float = 1e-6
    random_probe: bool = False
    seed: int = 0

    def __post_init__(self):
        for name in ("delta", "newton_tol", "max_newton_iters", "max_steps", "s_max",
                     "collision_tol", "epsilon_switch", "delta_s_switch", "loop_tol"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.s_min < 1:
            raise ValueError("s_min must be >= 1")
        if not self.s_min < self.s_max:
            raise ValueError("s_min must be below s_max")

    @property
    def s_floor(self):
        return max(self.s_min, 1.0 + S_ONE_GUARD)


@dataclass
class BranchPoint:
    q: np.ndarray
    s: float
    potential: float
    residual_norm: float
    inertia: InertiaTriple
    arclength: float = 0.0
    classification: str = ""
    tangent: np.ndarray = None

    @property
    def x(self):
        return pack(self.q, self.s)


@dataclass
class Branch:
    points: list
    events: list = field(default_factory=list)
    parent: tuple = None
    turning_points: list = field(default_factory=list)
    degenerate_points: list = field(default_factory=list)
    termination: str = ""
    label: str = ""

    def add_event(self, index, kind):
        self.events.append((index, kind))

    def indices(self, kind):
        return [i for i, k in self.events if k == kind]


@dataclass
class SwitchResult:
    anchor: BranchPoint
    first: BranchPoint
    epsilon: float
    delta_s: float
    attempts: int

    def __iter__(self):
        return iter((self.anchor, self.first))


def pack(q, s):
    return np.append(np.asarray(q, dtype=float).ravel(), float(s))


def unpack(x, d):
    return x[:-1].reshape(-1, d), float(x[-1])


def _as_state(x):
    if isinstance(x, BranchPoint):
        return x.q, x.s
    q, s = x
    return as_positions(q), float(s)


# -- the balanced configuration map and its derivatives ---------------------

def residual_jacobian(q, m, s):
    """``(dF/dq, dF/ds)`` of the balanced-configuration map."""
    m = as_masses(m)
    q = as_positions(q)
    n, d = q.shape
    w = s_diagonal(n, d, s).ravel()
    U = total_potential(q, m)
    g = potential_gradient(q, m).ravel()
    Jq = potential_hessian(q, m) / np.repeat(m, d)[:, None]
    Jq += U * np.diag(w) + np.outer(w * q.ravel(), g)
    axis0 = np.zeros((n, d))
    axis0[:, 0] = 1.0
    Js = U * (axis0 * q).ravel()
    return Jq, Js


def _gauge_rows(q_anchor, m, s, all_rotations=False):
    """Rows ``M xi`` for the symmetry generators ``xi`` at the anchor."""
    gens = symmetry_generators(q_anchor, m, 1.0 if all_rotations else s, s_one_tol=0.0)
    return gens * np.repeat(m, q_anchor.shape[1])[None, :]


def augmented_residual(x, anchor, delta, m):
    """``F`` stacked with the arclength equation and the gauge rows."""
    m = as_masses(m)
    q, s = _as_state(x)
    qa, sa = _as_state(anchor)
    F = balanced_residual(q, m, s, check_norm=False).ravel()
    arc = np.sum((q - qa) ** 2) + (s - sa) ** 2 - delta**2
    gauge = _gauge_rows(qa, m, sa) @ (q - qa).ravel()
    return np.concatenate([F, [arc], gauge])


def augmented_jacobian(x, anchor, m):
    m = as_masses(m)
    q, s = _as_state(x)
    qa, sa = _as_state(anchor)
    Jq, Js = residual_jacobian(q, m, s)
    top = np.hstack([Jq, Js[:, None]])
    arc = 2.0 * pack(q - qa, s - sa)
    G = _gauge_rows(qa, m, sa)
    gauge = np.hstack([G, np.zeros((G.shape[0], 1))])
    return np.vstack([top, arc[None, :], gauge])


# -- Newton --------------------------------------------------------------------

def _newton(fun, jac, x0, tol, max_iter, full_rank=True):
    """Damped least-squares Newton. Returns ``(x, iterations)``."""
    x = np.array(x0, dtype=float)
    g = fun(x)
    ng = np.linalg.norm(g)
    for it in range(max_iter):
        if ng < tol:
            return x, it
        J = jac(x)
        dx, _, rank, _ = np.linalg.lstsq(J, -g, rcond=RCOND)
        if full_rank and rank < J.shape[1]:
            raise SingularSystem(f"Jacobian rank {rank} < {J.shape[1]}")
        t = 1.0
        while True:
            try:
                g_new = fun(x + t * dx)
                ng_new = np.linalg.norm(g_new)
            except CollisionError:
                ng_new = np.inf
            if ng_new < ng:
                break
            t *= 0.5
            if t < MIN_DAMPING:
                raise NoConvergence(f"line search stalled at |G| = {ng:.3e}")
        x = x + t * dx
        g, ng = g_new, ng_new
    if ng < tol:
        return x, max_iter
    raise NoConvergence(f"no convergence in {max_iter} iterations (|G| = {ng:.3e})")


def _polish_constraints(q, m, s):
    """Re-center and re-normalize; return the corrected positions and the size of the fix."""
    com = center_of_mass(q, m)
    q2 = q - com
    q2 = q2 / np.sqrt(s_norm2(q2, m, s))
    return q2, max(np.linalg.norm(com), np.max(np.abs(q2 - q)))


def make_point(q, s, m, arclength=0.0, tangent=None):
    """Evaluate diagnostics at a converged solution."""
    m = as_masses(m)
    q = as_positions(q)
    inertia = point_inertia(q, m, s)
    point = BranchPoint(q=q, s=float(s), potential=total_potential(q, m),
                        residual_norm=float(np.linalg.norm(balanced_residual(q, m, s))),
                        inertia=inertia, arclength=float(arclength), tangent=tangent)
    point.classification = classify_inertia(inertia)
    return point


def _finish(q, s, m):
    q, fix = _polish_constraints(q, m, s)
    if fix > CORRECTION_TOL:
        raise NoConvergence(f"converged point is off the sphere by {fix:.3e}")
    return q


def damped_newton(x0, anchor, delta, settings, m):
    """Correct ``x0`` onto the solution curve at distance ``delta`` from ``anchor``.

    Returns ``(BranchPoint, iterations)``.
    """
    m = as_masses(m)
    q0, s0 = _as_state(x0)
    qa, sa = _as_state(anchor)
    d = q0.shape[1]
    anchor_state = (qa, sa)

    def fun(x):
        return augmented_residual(unpack(x, d), anchor_state, delta, m)

    def jac(x):
        return augmented_jacobian(unpack(x, d), anchor_state, m)

    x, its = _newton(fun, jac, pack(q0, s0), settings.newton_tol, settings.max_newton_iters)
    q, s = unpack(x, d)
    q = _finish(q, s, m)
    return make_point(q, s, m), its


def solve_fixed_s(q0, s, m, settings, all_rotations=None, anchor=None):
    """Newton solve of ``F(q, s) = 0`` at fixed ``s`` with the phase pinned at ``anchor``."""
    m = as_masses(m)
    q0 = as_positions(q0)
    qa = q0 if anchor is None else as_positions(anchor)
    d = q0.shape[1]
    if all_rotations is None:
        all_rotations = abs(s - 1.0) <= LANDING_ONE_TOL
    G = _gauge_rows(qa, m, s, all_rotations=all_rotations)

    def fun(y):
        qq = y.reshape(-1, d)
        return np.concatenate([balanced_residual(qq, m, s, check_norm=False).ravel(),
                               G @ (y - qa.ravel())])

    def jac(y):
        return np.vstack([residual_jacobian(y.reshape(-1, d), m, s)[0], G])

    y, its = _newton(fun, jac, q0.ravel(), settings.newton_tol, settings.max_newton_iters,
                     full_rank=False)
    return _finish(y.reshape(-1, d), s, m), its


# -- tangents and branch switching -------------------------------------------

def tangent_vector(point, previous_tangent, m):
    """Unit null vector of ``[dF/dq dF/ds; gauge]``, oriented along ``previous_tangent``."""
    m = as_masses(m)
    q, s = _as_state(point)
    Jq, Js = residual_jacobian(q, m, s)
    G = _gauge_rows(q, m, s)
    Jb = np.vstack([np.hstack([Jq, Js[:, None]]),
                    np.hstack([G, np.zeros((G.shape[0], 1))])])
    _, sv, Vt = np.linalg.svd(Jb)
    rank = int(np.sum(sv > TANGENT_RTOL * sv[0]))
    if Jb.shape[1] - rank > 1:
        raise AmbiguousTangent(f"null space of dimension {Jb.shape[1] - rank}")
    t = Vt[-1]
    if previous_tangent is None:
        sign = np.sign(t[-1])
    else:
        sign = np.sign(np.dot(t, previous_tangent))
    return t * (sign if sign != 0 else 1.0)


def off_branch_amplitude(q, m):
    """Mass-weighted size of the s-axis components (zero on the trivial branch)."""
    q = as_positions(q)
    return float(np.sqrt(np.sum(as_masses(m) * q[:, 0] ** 2)))


def normal_kernel_directions(qh, m, candidate):
    """Unit s-axis displacements spanning the kernel created at ``candidate``."""
    m = as_masses(m)
    qh = as_positions(qh)
    n, d = qh.shape
    B = b_matrix(qh, m)
    Q = mass_orthonormal_complement(m, np.ones(n))
    ev, W = np.linalg.eigh(Q.T @ B @ Q)
    order = np.argsort(np.abs(ev - candidate.eigenvalue))[:candidate.multiplicity]
    dirs = []
    for k in order:
        v = np.zeros((n, d))
        v[:, 0] = Q @ W[:, k]
        # deterministic sign: largest component positive
        j = np.argmax(np.abs(v[:, 0]))
        dirs.append(v * np.sign(v[j, 0]))
    return dirs


def branch_switch(qh, s_star, kernel_dir, settings, m):
    """Leave the trivial branch at ``s_star`` along ``kernel_dir``.

    Tries the sign combinations of the displacement and of the parameter
    offset, then a tenfold displacement, and finally an amplitude-constrained
    solve in which ``s`` is free and the kernel component is held at ``epsilon``.
    """
    m = as_masses(m)
    qh = as_positions(qh)
    v = as_positions(kernel_dir)
    v = v / np.sqrt(np.sum(m[:, None] * v**2))
    eps, ds = settings.epsilon_switch, settings.delta_s_switch
    anchor = make_point(qh, s_star, m)
    threshold = 10 * settings.newton_tol
    attempts = 0
    for scale in (1.0, 10.0):
        for se, sd in ((1, 1), (-1, 1), (1, -1), (-1, -1)):
            attempts += 1
            e, s = se * scale * eps, s_star + sd * ds
            if s < settings.s_floor:
                continue
            guess = qh + e * v
            try:
                q, _ = solve_fixed_s(guess, s, m, settings, anchor=qh)
            except (NoConvergence, SingularSystem, CollisionError):
                continue
            if off_branch_amplitude(q, m) > threshold:
                return SwitchResult(anchor, make_point(q, s, m), e, s - s_star, attempts)
    for scale in (1.0, 10.0):
        attempts += 1
        e = scale * eps
        try:
            q, s = _amplitude_solve(qh, s_star, v, e, m, settings)
        except (NoConvergence, SingularSystem, CollisionError):
            continue
        if off_branch_amplitude(q, m) > threshold:
            return SwitchResult(anchor, make_point(q, s, m), e, s - s_star, attempts)
    raise FellBackToTrivial(f"no off-branch solution found near s* = {s_star:.6g}")


def _amplitude_solve(qh, s_star, v, eps, m, settings):
    n, d = qh.shape
    w = np.repeat(m, d)
    vv = v.ravel() * w
    G = _gauge_rows(qh, m, s_star)
    target = vv @ qh.ravel() + eps

    def fun(x):
        q, s = unpack(x, d)
        return np.concatenate([balanced_residual(q, m, s, check_norm=False).ravel(),
                               [vv @ x[:-1] - target], G @ (x[:-1] - qh.ravel())])

    def jac(x):
        q, s = unpack(x, d)
        Jq, Js = residual_jacobian(q, m, s)
        return np.vstack([np.hstack([Jq, Js[:, None]]), np.append(vv, 0.0)[None, :],
                          np.hstack([G, np.zeros((G.shape[0], 1))])])

    x, _ = _newton(fun, jac, pack(qh + eps * v, s_star), settings.newton_tol,
                   settings.max_newton_iters)
    q, s = unpack(x, d)
    return _finish(q, s, m), s


# -- classification ------------------------------------------------------------

def classify_inertia(inertia):
    if inertia.zero > 0:
        return "degenerate"
    if inertia.minus == 0:
        return "local_minimum"
    return "saddle"


def classify_point(point, m):
    return classify_inertia(point_inertia(point.q, m, point.s))


def fingerprint(q, m):
    """Sorted ``(m_i m_j, r_ij)`` pairs: invariant under isometries and mass-preserving relabelings."""
    m = as_masses(m)
    i, j = np.triu_indices(m.size, 1)
    pairs = sorted(zip(np.round(m[i] * m[j], 12), distances(q)))
    return np.array([r for _, r in pairs])


# -- tracing --------------------------------------------------------------------

def detect_turning_points(branch):
    """Indices where the s-component of the tangent changes sign.

    Of the two points bracketing a sign change, the one whose ``s`` is more
    extreme is reported.
    """
    pts = branch.points
    if len(pts) < 3:
        return []
    ts = []
    for k, p in enumerate(pts):
        if p.tangent is not None:
            ts.append(p.tangent[-1])
        else:
            a, b = pts[max(k - 1, 0)], pts[min(k + 1, len(pts) - 1)]
            ts.append(b.s - a.s)
    out = []
    for k in range(len(pts) - 1):
        if ts[k] * ts[k + 1] < 0:
            pick_max = ts[k] > 0
            a, b = pts[k].s, pts[k + 1].s
            out.append(k if (a >= b) == pick_max else k + 1)
    return out


def _refine_turning_point(p0, p1, m, settings, iters=60):
    """Bisection on the arclength from ``p0`` for a zero s-component of the tangent.

    When the turning point is also a branch point the corrector jumps onto the
    crossing branch close to it.  The bisection then stops and the closest
    point on the traced branch is returned if its s-component of the tangent
    is below ``SINGULAR_TURNING_TOL``.
    """
    lo, hi = 0.0, float(np.linalg.norm(p1.x - p0.x))
    t0 = p0.tangent
    best = None
    singular = False
    for _ in range(iters):
        h = 0.5 * (lo + hi)
        guess = p0.x + h * t0
        try:
            pt, _ = damped_newton(unpack(guess, p0.q.shape[1]), p0, h, settings, m)
            tan = tangent_vector(pt, t0, m)
        except (NoConvergence, SingularSystem, AmbiguousTangent, CollisionError):
            singular = True
            break
        if tan @ t0 < 0.5:
            # landed on another branch
            singular = True
            break
        pt.tangent = tan
        pt.arclength = p0.arclength + h
        if best is None or abs(tan[-1]) < abs(best.tangent[-1]):
            best = pt
        if abs(tan[-1]) < 1e-13 or hi - lo < 1e-13:
            break
        if np.sign(tan[-1]) == np.sign(t0[-1]):
            lo = h
        else:
            hi = h
    if best is None:
        return None
    tol = SINGULAR_TURNING_TOL if singular else TURNING_TOL
    if abs(best.tangent[-1]) > tol:
        # typically the vertex of a pitchfork on the trivial set, where the
        # bordered system is singular and the bisection cannot proceed
        return None
    return best


def _refine_inertia_change(p0, p1, m, settings, iters=50):
    """Bisection on the arclength from ``p0`` for the point where the inertia changes.

    Returns the last corrected point on the far side of the change, which is
    degenerate to working precision, or ``None`` when a correction fails.
    """
    lo, hi = 0.0, float(np.linalg.norm(p1.x - p0.x))
    t0 = p0.tangent
    best = None
    for _ in range(iters):
        if hi - lo < 1e-13:
            break
        h = 0.5 * (lo + hi)
        try:
            pt, _ = damped_newton(unpack(p0.x + h * t0, p0.q.shape[1]), p0, h, settings, m)
        except (NoConvergence, SingularSystem, CollisionError):
            return best
        pt.arclength = p0.arclength + h
        if pt.inertia.zero > 0:
            return pt
        if pt.inertia == p0.inertia:
            lo = h
        else:
            hi, best = h, pt
    return best


def _land(prev, new, bound, m, settings):
    """Solve exactly at ``s = bound`` between two points that straddle it."""
    theta = (bound - prev.s) / (new.s - prev.s)
    guess = prev.q + theta * (new.q - prev.q)
    q, _ = solve_fixed_s(guess, bound, m, settings, anchor=prev.q)
    return q


def _append(branch, point):
    branch.points.append(point)
    return len(branch.points) - 1


def trace_branch(seed, settings, m, on_step=None):
    """Predictor-corrector loop from a ``(anchor, first_point)`` seed.

    Termination reasons are recorded in ``branch.termination`` and as events:
    ``s_bound``, ``collision_stop``, ``max_steps``, ``loop_closed`` (the branch
    returned to the trivial set or to an earlier point) and ``newton_failure``.
    """
    m = as_masses(m)
    anchor, first = seed
    d = first.q.shape[1]
    t_prev = first.x - anchor.x
    t_prev /= np.linalg.norm(t_prev)
    first = replace(first, arclength=0.0)
    first.tangent = tangent_vector(first, t_prev, m)
    branch = Branch(points=[first])
    branch.add_event(0, "start_bifurcation")
    delta = settings.delta
    min_delta = settings.delta * MIN_STEP_FRACTION
    fast = 0
    fps = [fingerprint(first.q, m)]
    s_floor, s_ceil = settings.s_floor, settings.s_max

    for _ in range(settings.max_steps):
        cur = branch.points[-1]
        accepted = None
        failure = ""
        for _attempt in range(MAX_HALVINGS + 1):
            guess = cur.x + delta * cur.tangent
            try:
                pt, its = damped_newton(unpack(guess, d), cur, delta, settings, m)
                pt.tangent = tangent_vector(pt, cur.tangent, m)
            except CollisionError:
                failure = "collision_stop"
            except (NoConvergence, SingularSystem, AmbiguousTangent):
                failure = "newton_failure"
            else:
                if np.min(distances(pt.q)) < settings.collision_tol:
                    failure = "collision_stop"
                else:
                    accepted = pt
                    break
            fast = 0
            if delta <= min_delta:
                break
            delta = max(0.5 * delta, min_delta)
        if accepted is None:
            branch.termination = failure
            branch.add_event(len(branch.points) - 1, failure)
            return branch
        pt = accepted
        pt.arclength = cur.arclength + float(np.linalg.norm(pt.x - cur.x))
        fast = fast + 1 if its <= FAST_ITERS else 0
        if fast >= SPEEDUP_AFTER and delta < settings.delta:
            delta = min(2 * delta, settings.delta)
            fast = 0

        bound = s_floor if pt.s < s_floor else s_ceil if pt.s > s_ceil else None
        if bound is not None:
            try:
                q = _land(cur, pt, bound, m, settings)
            except (NoConvergence, SingularSystem, CollisionError):
                branch.termination = "newton_failure"
                branch.add_event(len(branch.points) - 1, "newton_failure")
                return branch
            last = make_point(q, bound, m)
            last.arclength = cur.arclength + float(np.linalg.norm(last.x - cur.x))
            last.tangent = pt.tangent
            idx = _append(branch, last)
            branch.add_event(idx, "s_bound")
            branch.termination = "s_bound"
            return branch

        n_events, n_tps, n_dps = len(branch.events), len(branch.turning_points), len(branch.degenerate_points)
        if cur.tangent[-1] * pt.tangent[-1] < 0:
            tp = _refine_turning_point(cur, pt, m, settings)
            if tp is not None:
                branch.turning_points.append(tp)
            idx = len(branch.points) - 1 if (cur.s >= pt.s) == (cur.tangent[-1] > 0) else len(branch.points)
            branch.add_event(idx, "turning_point")
        elif pt.inertia != cur.inertia and cur.inertia.zero == 0 and pt.inertia.zero == 0:
            dp = _refine_inertia_change(cur, pt, m, settings)
            if dp is not None:
                branch.degenerate_points.append(dp)

        idx = _append(branch, pt)
        if on_step is not None:
            on_step(branch)

        xs_prev, xs_new = cur.q[:, 0], pt.q[:, 0]
        if np.dot(xs_prev, xs_new) < 0:
            # crossed back through the trivial (planar or collinear) set
            if off_branch_amplitude(cur.q, m) < off_branch_amplitude(pt.q, m):
                # drop the crossing point together with anything recorded for its step
                branch.points.pop()
                del branch.events[n_events:]
                del branch.turning_points[n_tps:]
                del branch.degenerate_points[n_dps:]
                idx -= 1
            branch.add_event(idx, "loop_closed")
            branch.termination = "loop_closed"
            return branch

        fp = fingerprint(pt.q, m)
        for j in range(len(fps) - 3):
            if np.linalg.norm(fp - fps[j]) + abs(pt.s - branch.points[j].s) < settings.loop_tol:
                branch.add_event(idx, "loop_closed")
                branch.termination = "loop_closed"
                return branch
        fps.append(fp)

    branch.termination = "max_steps"
    branch.add_event(len(branch.points) - 1, "max_steps")
    return branch
