"""Branch persistence as CSV with a ``#``-prefixed metadata header."""

import hashlib
import io
import json
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .continuation import BranchPoint
from .errors import EmptyBranch, ParseError
from .planar import InertiaTriple
from .potential import residual_norm, total_potential

FORMAT = "bcfg-branch v1"
BASE_COLUMNS = ("step", "s", "arclength", "U", "residual", "iminus", "izero", "iplus", "class")


def fmt(x):
    """Full-precision float text (17 significant digits)."""
    return "%.17g" % x


def settings_hash(settings):
    """SHA-256 of the settings serialized as canonical JSON."""
    data = asdict(settings) if not isinstance(settings, dict) else dict(settings)
    text = json.dumps(data, sort_keys=True, separators=(",", ":"),
                      default=lambda v: v.item() if hasattr(v, "item") else str(v))
    return hashlib.sha256(text.encode()).hexdigest()


def branch_filename(scenario, candidate, direction):
    return f"{scenario}_s{candidate:.6g}_{direction}.csv"


@dataclass
class BranchRecord:
    scenario: str
    candidate: float
    direction: str
    settings_hash: str
    masses: np.ndarray
    dimension: int
    s: np.ndarray
    arclength: np.ndarray
    potential: np.ndarray
    residual: np.ndarray
    inertia: np.ndarray  # (k, 3) integers
    classes: list
    q: np.ndarray  # (k, n, d)
    events: list = field(default_factory=list)
    termination: str = ""

    def __len__(self):
        return len(self.s)

    @property
    def n(self):
        return len(self.masses)

    @classmethod
    def from_branch(cls, branch, scenario, candidate, direction, settings, m):
        if not branch.points:
            raise EmptyBranch("branch has no points")
        pts = branch.points
        return cls(scenario=scenario, candidate=float(candidate), direction=direction,
                   settings_hash=settings_hash(settings),
                   masses=np.asarray(m, dtype=float), dimension=pts[0].q.shape[1],
                   s=np.array([p.s for p in pts]),
                   arclength=np.array([p.arclength for p in pts]),
                   potential=np.array([p.potential for p in pts]),
                   residual=np.array([p.residual_norm for p in pts]),
                   inertia=np.array([p.inertia.as_tuple() for p in pts], dtype=int),
                   classes=[p.classification for p in pts],
                   q=np.array([p.q for p in pts]),
                   events=list(branch.events), termination=branch.termination)

    @property
    def filename(self):
        return branch_filename(self.scenario, self.candidate, self.direction)

    def to_points(self):
        """Rebuild branch points; the residual is recomputed from the stored coordinates."""
        out = []
        for k in range(len(self)):
            q = self.q[k].copy()
            out.append(BranchPoint(q=q, s=float(self.s[k]),
                                   potential=total_potential(q, self.masses),
                                   residual_norm=residual_norm(q, self.masses, self.s[k]),
                                   inertia=InertiaTriple(*map(int, self.inertia[k])),
                                   arclength=float(self.arclength[k]),
                                   classification=self.classes[k]))
        return out

    def event_indices(self, kind):
        return [i for i, k in self.events if k == kind]

    def to_text(self):
        nd = self.n * self.dimension
        buf = io.StringIO()
        buf.write(f"# {FORMAT}\n")
        buf.write(f"# scenario: {self.scenario}\n")
        buf.write(f"# candidate: {fmt(self.candidate)}\n")
        buf.write(f"# direction: {self.direction}\n")
        buf.write(f"# settings_sha256: {self.settings_hash}\n")
        buf.write("# masses: " + ",".join(fmt(x) for x in self.masses) + "\n")
        buf.write(f"# dimension: {self.dimension}\n")
        buf.write(f"# termination: {self.termination}\n")
        buf.write("# events: " + ";".join(f"{i}:{k}" for i, k in self.events) + "\n")
        buf.write(",".join(BASE_COLUMNS + tuple(f"q{j}" for j in range(nd))) + "\n")
        for k in range(len(self)):
            row = [str(k), fmt(self.s[k]), fmt(self.arclength[k]), fmt(self.potential[k]),
                   fmt(self.residual[k])]
            row += [str(int(v)) for v in self.inertia[k]]
            row.append(self.classes[k])
            row += [fmt(v) for v in self.q[k].ravel()]
            buf.write(",".join(row) + "\n")
        return buf.getvalue()

    def write(self, directory):
        path = Path(directory) / self.filename
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", newline="") as fh:
            fh.write(self.to_text())
        return path

    @classmethod
    def from_text(cls, text):
        meta = {}
        rows = []
        header = None
        for no, line in enumerate(text.splitlines(), start=1):
            if not line.strip():
                continue
            if line.startswith("#"):
                body = line[1:].strip()
                if ":" in body:
                    key, value = body.split(":", 1)
                    meta[key.strip()] = value.strip()
                continue
            if header is None:
                header = line.split(",")
                if tuple(header[:len(BASE_COLUMNS)]) != BASE_COLUMNS:
                    raise ParseError(f"unexpected columns {header[:len(BASE_COLUMNS)]}", no)
                continue
            cells = line.split(",")
            if len(cells) != len(header):
                raise ParseError(f"expected {len(header)} cells, got {len(cells)}", no)
            rows.append(cells)
        for key in ("scenario", "candidate", "direction", "masses", "dimension"):
            if key not in meta:
                raise ParseError(f"missing metadata {key!r}")
        if header is None:
            raise ParseError("missing column header")
        if not rows:
            raise EmptyBranch("record has no rows")
        masses = np.array([float(x) for x in meta["masses"].split(",")])
        d = int(meta["dimension"])
        n = masses.size
        if len(header) != len(BASE_COLUMNS) + n * d:
            raise ParseError(f"{len(header) - len(BASE_COLUMNS)} coordinate columns for n={n}, d={d}")
        events = []
        if meta.get("events"):
            for item in meta["events"].split(";"):
                i, kind = item.split(":", 1)
                events.append((int(i), kind))
        col = {name: j for j, name in enumerate(header)}

        def floats(name):
            return np.array([float(r[col[name]]) for r in rows])

        return cls(scenario=meta["scenario"], candidate=float(meta["candidate"]),
                   direction=meta["direction"], settings_hash=meta.get("settings_sha256", ""),
                   masses=masses, dimension=d, s=floats("s"), arclength=floats("arclength"),
                   potential=floats("U"), residual=floats("residual"),
                   inertia=np.array([[int(r[col[c]]) for c in ("iminus", "izero", "iplus")]
                                     for r in rows], dtype=int),
                   classes=[r[col["class"]] for r in rows],
                   q=np.array([[float(x) for x in r[len(BASE_COLUMNS):]] for r in rows]).reshape(-1, n, d),
                   events=events, termination=meta.get("termination", ""))

    @classmethod
    def read(cls, path):
        with open(path) as fh:
            return cls.from_text(fh.read())
