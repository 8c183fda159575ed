"""Analysis and tracing pipelines driven by a scenario."""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .continuation import (branch_switch, fingerprint, normal_kernel_directions,
                           solve_fixed_s, trace_branch)
from .errors import (AmbiguousTangent, CollisionError, FellBackToTrivial, NoConvergence,
                     SingularSystem)
from .planar import (bifurcation_candidates, bifurcation_lower_bound, cluster_spectrum,
                     planar_inertia)
from .presets import preset_configuration
from .records import BranchRecord
from .spectral_flow import certify_bifurcation

FLOW_LEFT_OFFSET = 1e-3
DUPLICATE_TOL = 1e-6
PROBE_DIRECTIONS = 4


def initial_configuration(spec):
    params = {"coords": spec.coordinates()} if spec.preset == "explicit" else None
    return preset_configuration(spec.preset, params, np.array(spec.masses))


def _g(x):
    return f"{x:.6g}"


@dataclass
class AnalysisReport:
    scenario: str
    masses: list
    potential: float
    mu: list
    alpha: list
    l: int
    candidates: list
    multiplicities: list
    lower_bound: int
    flow: int
    flow_interval: tuple
    planar_inertia: tuple
    kernel_dim: int

    def as_dict(self):
        return {k: (list(v) if isinstance(v, tuple) else v) for k, v in self.__dict__.items()}

    def text(self):
        lines = [f"scenario {self.scenario}: n = {len(self.masses)}, U = {_g(self.potential)}",
                 "normal spectrum (mu: multiplicity): "
                 + ", ".join(f"{_g(u)}: {a}" for u, a in zip(self.mu, self.alpha)),
                 f"-U cluster index: {self.l}",
                 "candidates s*: " + (", ".join(f"{_g(s)} (x{a})" for s, a in
                                                 zip(self.candidates, self.multiplicities))
                                       or "none"),
                 f"lower bound on bifurcation instants: {self.lower_bound}",
                 f"spectral flow on [{_g(self.flow_interval[0])}, {_g(self.flow_interval[1])}]: "
                 f"{self.flow}",
                 "planar inertia (-, 0, +): {}".format(self.planar_inertia),
                 f"symmetry kernel dimension: {self.kernel_dim}"]
        return "\n".join(lines)


def run_analyze(spec):
    """Spectrum, bifurcation candidates, lower bound, spectral flow and planar inertia."""
    m = np.array(spec.masses, dtype=float)
    qh = initial_configuration(spec)
    report = cluster_spectrum(qh, m)
    cands = bifurcation_candidates(report)
    lo, hi = spec.s_interval
    interval = (max(lo, 1.0 + FLOW_LEFT_OFFSET), hi)
    cert = certify_bifurcation(qh, m, interval)
    return AnalysisReport(scenario=spec.name, masses=m.tolist(), potential=report.potential,
                          mu=list(report.mu), alpha=list(report.alpha), l=report.l,
                          candidates=[c.s_star for c in cands],
                          multiplicities=[c.multiplicity for c in cands],
                          lower_bound=bifurcation_lower_bound(report), flow=cert.flow,
                          flow_interval=cert.interval,
                          planar_inertia=planar_inertia(qh, m).as_tuple(),
                          kernel_dim=cert.kernel_dim)


@dataclass
class TraceEntry:
    candidate: float
    direction: str
    status: str  # "traced" or "switch_failed"
    message: str = ""
    path: str = ""
    n_points: int = 0
    termination: str = ""
    events: list = field(default_factory=list)
    end_s: float = float("nan")
    end_class: str = ""
    classes: dict = field(default_factory=dict)
    duplicate_of: str = ""
    probes: list = field(default_factory=list)
    record: BranchRecord = None
    branch: object = None


@dataclass
class TraceSummary:
    scenario: str
    candidates: list
    entries: list

    @property
    def branches(self):
        return [e for e in self.entries if e.status == "traced"]

    @property
    def distinct_branches(self):
        return [e for e in self.branches if not e.duplicate_of]

    def exit_code(self):
        """0 when every requested seed produced a branch or a reported switch failure."""
        if all(e.status in ("traced", "switch_failed") for e in self.entries):
            return 0
        return 2

    def text(self):
        if not self.candidates:
            return f"scenario {self.scenario}: no candidates, no branches"
        lines = [f"scenario {self.scenario}: candidates "
                 + ", ".join(_g(c) for c in self.candidates)]
        for e in self.entries:
            head = f"  s*={_g(e.candidate)} {e.direction}: "
            if e.status != "traced":
                lines.append(head + f"switch failed ({e.message})")
                continue
            cls = ", ".join(f"{k} {v}" for k, v in sorted(e.classes.items()))
            dup = f", mirror/duplicate of {e.duplicate_of}" if e.duplicate_of else ""
            lines.append(head + f"{e.n_points} points, {e.termination} at s={_g(e.end_s)} "
                         f"({e.end_class}); {cls}{dup}")
            for tp, s, found in e.probes:
                lines.append(f"    probe at turning point {tp} (s={_g(s)}): "
                             + ("new solution found" if found else "nothing new"))
        lines.append(f"distinct branches: {len(self.distinct_branches)}")
        return "\n".join(lines)


def probe_turning_points(branch, m, settings):
    """Seeded random-direction probe for extra solutions near each turning point.

    For each refined turning point, a few random unit displacements of size
    ``epsilon_switch`` are corrected at fixed ``s``. Returns
    ``(index, s, found)`` where ``found`` says whether some correction landed
    on a configuration not already on the branch.
    """
    rng = np.random.default_rng(settings.seed)
    known = [fingerprint(p.q, m) for p in branch.points]
    out = []
    for k, tp in enumerate(branch.turning_points):
        found = False
        for _ in range(PROBE_DIRECTIONS):
            v = rng.standard_normal(tp.q.shape)
            v /= np.linalg.norm(v)
            guess = tp.q + settings.epsilon_switch * 10 * v
            try:
                q, _ = solve_fixed_s(guess, tp.s, m, settings, anchor=tp.q)
            except (NoConvergence, SingularSystem, CollisionError):
                continue
            fp = fingerprint(q, m)
            if min(np.linalg.norm(fp - f) for f in known) > 1e-3:
                found = True
        out.append((k, tp.s, found))
    return out


def _trace_one(spec, qh, m, settings, cand, k, v, sign, label):
    entry = TraceEntry(candidate=cand.s_star, direction=label, status="traced")
    try:
        seed = branch_switch(qh, cand.s_star, sign * v, settings, m)
    except (FellBackToTrivial, NoConvergence, SingularSystem, CollisionError) as exc:
        entry.status = "switch_failed"
        entry.message = f"{type(exc).__name__}: {exc}"
        return entry
    try:
        branch = trace_branch(seed, settings, m)
    except AmbiguousTangent as exc:
        entry.status = "switch_failed"
        entry.message = f"{type(exc).__name__}: {exc}"
        return entry
    branch.label = label
    branch.parent = (f"{spec.name}-trivial", cand.s_star)
    record = BranchRecord.from_branch(branch, spec.name, cand.s_star, label, settings, m)
    entry.record = record
    entry.branch = branch
    entry.n_points = len(branch.points)
    entry.termination = branch.termination
    entry.events = list(branch.events)
    entry.end_s = branch.points[-1].s
    entry.end_class = branch.points[-1].classification
    for p in branch.points:
        entry.classes[p.classification] = entry.classes.get(p.classification, 0) + 1
    if settings.random_probe:
        entry.probes = probe_turning_points(branch, m, settings)
    return entry


def _direction_label(k, multiplicity, sign):
    side = "plus" if sign > 0 else "minus"
    return side if multiplicity == 1 else f"v{k}{side}"


def run_trace(spec, out_dir=None, workers=1, settings=None):
    """Switch onto and trace every bifurcating branch of the scenario.

    Each candidate inside ``s_interval`` is tried along every kernel direction
    with both signs. Failures are recorded per seed and the run continues.
    Branch records are written to ``out_dir`` when it is given.
    """
    m = np.array(spec.masses, dtype=float)
    settings = settings or spec.continuation_settings()
    qh = initial_configuration(spec)
    report = cluster_spectrum(qh, m)
    lo, hi = spec.s_interval
    cands = [c for c in bifurcation_candidates(report) if lo < c.s_star < hi]
    jobs = []
    for c in cands:
        for k, v in enumerate(normal_kernel_directions(qh, m, c)):
            for sign in (1.0, -1.0):
                jobs.append((c, k, v, sign, _direction_label(k, c.multiplicity, sign)))

    def run(job):
        c, k, v, sign, label = job
        return _trace_one(spec, qh, m, settings, c, k, v, sign, label)

    if workers > 1 and len(jobs) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            entries = list(pool.map(run, jobs))
    else:
        entries = [run(job) for job in jobs]

    seen = []
    for e in entries:
        if e.status != "traced":
            continue
        key = (e.candidate, fingerprint(e.branch.points[0].q, m),
               fingerprint(e.branch.points[-1].q, m))
        for (c, f0, f1), name in seen:
            if (c == key[0] and np.linalg.norm(f0 - key[1]) < DUPLICATE_TOL
                    and np.linalg.norm(f1 - key[2]) < DUPLICATE_TOL):
                e.duplicate_of = name
                break
        else:
            seen.append((key, e.record.filename))
        if out_dir is not None:
            e.path = str(e.record.write(out_dir))
    return TraceSummary(scenario=spec.name, candidates=[c.s_star for c in cands], entries=entries)
