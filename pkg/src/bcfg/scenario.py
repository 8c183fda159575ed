"""Scenario files: a small versioned key-value format.

Grammar (``#`` starts a comment, blank lines are ignored)::

    bcfg-scenario v1
    name = square_center
    masses = 1, 1, 1, 1, 1
    dimension = 3
    s_interval = 1, 10

    [initial]
    preset = square_center

    [settings]
    delta = 0.01

The first non-comment line must be the version header. Top-level keys are
``name``, ``masses``, ``dimension`` and ``s_interval``. The ``[initial]``
section takes ``preset`` and, for ``preset = explicit``, ``coords`` written
as rows separated by ``;`` (``coords = 0 1 0; 0 -1 0; ...``). The
``[settings]`` section accepts the fields of :class:`ContinuationSettings`
other than ``s_min`` and ``s_max``, which come from ``s_interval``.
"""

from dataclasses import dataclass, field, fields

import numpy as np

from .continuation import ContinuationSettings
from .errors import CollisionError, ParseError, ValidationError
from .potential import pairwise

HEADER = "bcfg-scenario v1"

PRESET_DEFAULTS = {
    "square": (4, 3),
    "triangle": (3, 3),
    "triangle_center": (4, 3),
    "square_center": (5, 3),
    "collinear": (4, 2),
}
PRESET_TAGS = tuple(PRESET_DEFAULTS) + ("explicit",)

TOP_KEYS = ("name", "masses", "dimension", "s_interval")
INITIAL_KEYS = ("preset", "coords")
SETTING_TYPES = {f.name: f.type for f in fields(ContinuationSettings)
                 if f.name not in ("s_min", "s_max")}
SECTIONS = {"": TOP_KEYS, "initial": INITIAL_KEYS, "settings": tuple(SETTING_TYPES)}


@dataclass
class ScenarioSpec:
    name: str
    masses: tuple
    dimension: int
    preset: str
    s_interval: tuple = (1.0, 10.0)
    coords: tuple = None
    settings: dict = field(default_factory=dict)

    @property
    def n(self):
        return len(self.masses)

    def continuation_settings(self, **extra):
        kw = dict(self.settings)
        kw.update(extra)
        return ContinuationSettings(s_min=self.s_interval[0], s_max=self.s_interval[1], **kw)

    def coordinates(self):
        return None if self.coords is None else np.array(self.coords, dtype=float)


def _floats(text, line, key):
    parts = [p for p in text.replace(",", " ").split() if p]
    try:
        return tuple(float(p) for p in parts)
    except ValueError:
        raise ParseError(f"{key}: expected numbers, got {text!r}", line) from None


def _setting_value(key, text, line):
    kind = SETTING_TYPES[key]
    try:
        if kind in (bool, "bool"):
            low = text.lower()
            if low not in ("true", "false", "1", "0", "yes", "no"):
                raise ValueError
            return low in ("true", "1", "yes")
        if kind in (int, "int"):
            return int(text)
        return float(text)
    except ValueError:
        raise ParseError(f"{key}: cannot parse {text!r}", line) from None


def _tokenize(text):
    """Yield ``(line_no, section, key, value)`` and check the header."""
    section = ""
    seen_header = False
    seen = set()
    for no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if not seen_header:
            if line != HEADER:
                raise ParseError(f"expected header {HEADER!r}, got {line!r}", no)
            seen_header = True
            continue
        if line.startswith("["):
            if not line.endswith("]"):
                raise ParseError(f"malformed section header {line!r}", no)
            section = line[1:-1].strip()
            if section not in SECTIONS or section == "":
                raise ParseError(f"unknown section [{section}]", no)
            continue
        if "=" not in line:
            raise ParseError(f"expected 'key = value', got {line!r}", no)
        key, value = (p.strip() for p in line.split("=", 1))
        if key not in SECTIONS[section]:
            where = f"section [{section}]" if section else "top level"
            raise ParseError(f"unknown key {key!r} at {where}", no)
        if (section, key) in seen:
            raise ParseError(f"duplicate key {key!r}", no)
        seen.add((section, key))
        yield no, section, key, value
    if not seen_header:
        raise ParseError(f"missing header {HEADER!r}", 1)


def load_scenario(text):
    """Parse and validate scenario text, filling in defaults.

    Raises
    ------
    ParseError
        Malformed text, unknown keys or an unknown preset; carries the line number.
    ValidationError
        Non-positive masses, a bad ``s_interval``, inconsistent sizes or
        colliding explicit coordinates.
    """
    raw = {}
    lines = {}
    for no, section, key, value in _tokenize(text):
        raw[section, key] = value
        lines[section, key] = no

    preset = raw.get(("initial", "preset"))
    if preset is None:
        raise ParseError("missing 'preset' in [initial]", max(lines.values(), default=1))
    if preset not in PRESET_TAGS:
        raise ParseError(f"unknown preset {preset!r}", lines["initial", "preset"])

    coords = None
    if ("initial", "coords") in raw:
        no = lines["initial", "coords"]
        rows = [_floats(r, no, "coords") for r in raw["initial", "coords"].split(";") if r.strip()]
        if not rows or len({len(r) for r in rows}) != 1:
            raise ParseError("coords rows must be non-empty and of equal length", no)
        coords = tuple(rows)
    if preset == "explicit" and coords is None:
        raise ParseError("preset 'explicit' needs coords", lines["initial", "preset"])
    if preset != "explicit" and coords is not None:
        raise ParseError("coords are only allowed with preset 'explicit'", lines["initial", "coords"])

    if ("", "masses") in raw:
        masses = _floats(raw["", "masses"], lines["", "masses"], "masses")
    elif preset == "explicit":
        masses = (1.0,) * len(coords)
    else:
        masses = (1.0,) * PRESET_DEFAULTS[preset][0]

    if preset == "explicit":
        default_dim = len(coords[0])
    else:
        default_dim = PRESET_DEFAULTS[preset][1]
    if ("", "dimension") in raw:
        try:
            dimension = int(raw["", "dimension"])
        except ValueError:
            raise ParseError(f"dimension: cannot parse {raw['', 'dimension']!r}",
                             lines["", "dimension"]) from None
    else:
        dimension = default_dim

    s_interval = (1.0, 10.0)
    if ("", "s_interval") in raw:
        s_interval = _floats(raw["", "s_interval"], lines["", "s_interval"], "s_interval")
        if len(s_interval) != 2:
            raise ParseError("s_interval needs two numbers", lines["", "s_interval"])

    settings = {key: _setting_value(key, value, lines[sec, key])
                for (sec, key), value in raw.items() if sec == "settings"}

    spec = ScenarioSpec(name=raw.get(("", "name"), preset), masses=masses,
                        dimension=dimension, preset=preset, s_interval=s_interval,
                        coords=coords, settings=settings)
    validate(spec)
    return spec


def validate(spec):
    """Check the invariants of a scenario; raise ``ValidationError``."""
    if not spec.name or any(c.isspace() or c in "/\\#" for c in spec.name):
        raise ValidationError(f"invalid scenario name {spec.name!r}")
    m = np.asarray(spec.masses, dtype=float)
    if m.size < 2:
        raise ValidationError("need at least two masses")
    if not np.all(np.isfinite(m)) or not np.all(m > 0):
        raise ValidationError(f"masses must be positive, got {list(spec.masses)}")
    if spec.dimension not in (2, 3):
        raise ValidationError(f"dimension must be 2 or 3, got {spec.dimension}")
    if spec.preset in PRESET_DEFAULTS:
        n, d = PRESET_DEFAULTS[spec.preset]
        if d != spec.dimension:
            raise ValidationError(f"preset {spec.preset!r} lives in dimension {d}")
        if spec.preset != "collinear" and m.size != n:
            raise ValidationError(f"preset {spec.preset!r} needs {n} masses, got {m.size}")
        if spec.preset == "collinear" and m.size < 2:
            raise ValidationError("collinear preset needs at least two masses")
    else:
        q = np.asarray(spec.coords, dtype=float)
        if q.shape != (m.size, spec.dimension):
            raise ValidationError(f"coords have shape {q.shape}, expected {(m.size, spec.dimension)}")
        try:
            pairwise(q)
        except CollisionError as exc:
            raise ValidationError(f"explicit coordinates collide: {exc}") from None
    lo, hi = spec.s_interval
    if not (np.isfinite(lo) and np.isfinite(hi)) or lo < 1 or not lo < hi:
        raise ValidationError(f"bad s_interval {spec.s_interval}: need 1 <= s_min < s_max")
    try:
        spec.continuation_settings()
    except (TypeError, ValueError) as exc:
        raise ValidationError(f"invalid settings: {exc}") from None
    return spec


def _num(x):
    return repr(float(x))


def serialize_scenario(spec):
    """Text form of ``spec``; ``load_scenario`` inverts it exactly."""
    out = [HEADER,
           f"name = {spec.name}",
           "masses = " + ", ".join(_num(x) for x in spec.masses),
           f"dimension = {spec.dimension}",
           "s_interval = " + ", ".join(_num(x) for x in spec.s_interval),
           "",
           "[initial]",
           f"preset = {spec.preset}"]
    if spec.coords is not None:
        out.append("coords = " + "; ".join(" ".join(_num(x) for x in row) for row in spec.coords))
    if spec.settings:
        out += ["", "[settings]"]
        for key in sorted(spec.settings):
            value = spec.settings[key]
            if isinstance(value, bool):
                text = "true" if value else "false"
            elif isinstance(value, int):
                text = str(value)
            else:
                text = _num(value)
            out.append(f"{key} = {text}")
    return "\n".join(out) + "\n"


def apply_overrides(spec, overrides):
    """Return a new spec with ``key=value`` overrides applied and re-validated.

    Keys may be qualified (``settings.delta``, ``initial.preset``) or bare; a
    bare key is looked up at top level, then in ``[settings]``, then in
    ``[initial]``. ``s_min`` and ``s_max`` edit ``s_interval``.
    """
    lines = serialize_scenario(spec).splitlines()
    table = {}
    section = ""
    for line in lines[1:]:
        if line.startswith("["):
            section = line[1:-1]
        elif "=" in line:
            key, value = (p.strip() for p in line.split("=", 1))
            table[section, key] = value
    for item in overrides:
        if "=" not in item:
            raise ParseError(f"override {item!r} is not key=value")
        key, value = (p.strip() for p in item.split("=", 1))
        if key in ("s_min", "s_max"):
            lo, hi = _floats(table["", "s_interval"], None, "s_interval")
            lo, hi = (float(value), hi) if key == "s_min" else (lo, float(value))
            table["", "s_interval"] = f"{_num(lo)}, {_num(hi)}"
            continue
        if "." in key:
            section, key = key.split(".", 1)
        else:
            section = next((sec for sec in ("", "settings", "initial") if key in SECTIONS[sec]), None)
            if section is None:
                raise ParseError(f"unknown override key {key!r}")
        if section not in SECTIONS or key not in SECTIONS[section]:
            raise ParseError(f"unknown override key {item.split('=', 1)[0]!r}")
        table[section, key] = value
    out = [HEADER]
    for sec in ("", "initial", "settings"):
        items = [(k, v) for (s, k), v in table.items() if s == sec]
        if sec and items:
            out.append(f"[{sec}]")
        out += [f"{k} = {v}" for k, v in items]
    return load_scenario("\n".join(out) + "\n")


BUILTIN_SCENARIOS = {
    "square": ("square", (1, 1, 1, 1)),
    "triangle": ("triangle", (1, 1, 1)),
    "triangle_center": ("triangle_center", (1, 1, 1, 1)),
    "square_center": ("square_center", (1, 1, 1, 1, 1)),
    "collinear_equal": ("collinear", (1, 1, 1, 1)),
    "collinear_m02": ("collinear", (0.2, 0.2, 1, 1)),
    "collinear_m05": ("collinear", (0.5, 0.5, 1, 1)),
    "collinear_m09": ("collinear", (0.9, 0.9, 1, 1)),
}


def builtin_scenario(name):
    """A ready-made scenario for one of the standard experiments."""
    if name not in BUILTIN_SCENARIOS:
        raise ParseError(f"unknown built-in scenario {name!r}")
    preset, masses = BUILTIN_SCENARIOS[name]
    return ScenarioSpec(name=name, masses=tuple(float(x) for x in masses),
                        dimension=PRESET_DEFAULTS[preset][1], preset=preset)
