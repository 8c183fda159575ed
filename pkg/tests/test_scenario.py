import numpy as np
import pytest
from hypothesis import given, strategies as st

from bcfg.errors import ParseError, ValidationError
from bcfg.scenario import (BUILTIN_SCENARIOS, ScenarioSpec, apply_overrides, builtin_scenario,
                           load_scenario, serialize_scenario)

MINIMAL = """bcfg-scenario v1
[initial]
preset = square
"""


def test_minimal_square():
    spec = load_scenario(MINIMAL)
    assert spec.masses == (1.0, 1.0, 1.0, 1.0)
    assert spec.dimension == 3 and spec.preset == "square" and spec.name == "square"
    assert spec.s_interval == (1.0, 10.0)
    assert spec.settings == {}


def test_full_text_with_comments():
    text = """# five bodies
bcfg-scenario v1
name = five   # trailing comment
masses = 1, 1, 1, 1, 2.5
s_interval = 1, 4

[initial]
preset = square_center

[settings]
delta = 0.005
max_steps = 300
random_probe = true
"""
    spec = load_scenario(text)
    assert spec.masses[-1] == 2.5 and spec.s_interval == (1.0, 4.0)
    assert spec.settings == {"delta": 0.005, "max_steps": 300, "random_probe": True}
    st = spec.continuation_settings()
    assert st.delta == 0.005 and st.s_max == 4.0 and st.max_steps == 300


def test_negative_mass():
    with pytest.raises(ValidationError):
        load_scenario(MINIMAL.replace("[initial]", "masses = 1, 1, -1, 1\n[initial]"))


def test_unknown_preset_has_line_number():
    with pytest.raises(ParseError) as info:
        load_scenario(MINIMAL.replace("square", "hexagon"))
    assert info.value.line == 3
    assert "line 3" in str(info.value)


@pytest.mark.parametrize("text,line", [
    ("hello\n", 1),
    ("bcfg-scenario v1\nmasses 1 1\n", 2),
    ("bcfg-scenario v1\n\n[initial]\ncolour = red\n", 4),
    ("bcfg-scenario v1\n[extra]\n", 2),
    ("bcfg-scenario v1\nname = a\nname = b\n", 3),
    ("bcfg-scenario v1\nmasses = 1, x\n[initial]\npreset = square\n", 2),
    ("bcfg-scenario v1\n[initial]\npreset = square\n[settings]\nmax_steps = 1.5\n", 5),
])
def test_parse_errors(text, line):
    with pytest.raises(ParseError) as info:
        load_scenario(text)
    assert info.value.line == line


@pytest.mark.parametrize("extra", ["s_interval = 0.5, 3", "s_interval = 3, 2",
                                   "dimension = 2", "masses = 1, 1, 1"])
def test_validation_errors(extra):
    with pytest.raises(ValidationError):
        load_scenario(MINIMAL.replace("[initial]", extra + "\n[initial]"))


def test_bad_settings_value():
    with pytest.raises(ValidationError):
        load_scenario(MINIMAL + "[settings]\ndelta = -0.1\n")


def test_explicit_coords():
    text = """bcfg-scenario v1
masses = 1, 1, 1
[initial]
preset = explicit
coords = 0 1 0; 0 -0.5 0.8660254037844386; 0 -0.5 -0.8660254037844386
"""
    spec = load_scenario(text)
    assert spec.dimension == 3 and np.asarray(spec.coords).shape == (3, 3)
    with pytest.raises(ValidationError):
        load_scenario(text.replace("0 -0.5 -0.8660254037844386", "0 1 0"))


def test_collinear_dimension_two():
    spec = load_scenario("bcfg-scenario v1\nmasses = 0.2, 0.2, 1, 1\n[initial]\npreset = collinear\n")
    assert spec.dimension == 2


settings_st = st.fixed_dictionaries({}, optional={
    "delta": st.floats(1e-4, 0.1),
    "newton_tol": st.floats(1e-13, 1e-9),
    "max_steps": st.integers(1, 10**5),
    "epsilon_switch": st.floats(1e-6, 1e-2),
    "random_probe": st.booleans(),
    "seed": st.integers(0, 2**31),
})


@st.composite
def specs(draw):
    preset = draw(st.sampled_from(["square", "triangle_center", "square_center", "collinear",
                                   "explicit"]))
    n = {"square": 4, "triangle_center": 4, "square_center": 5}.get(preset, draw(st.integers(2, 5)))
    d = 2 if preset == "collinear" else 3
    masses = draw(st.lists(st.floats(0.01, 100), min_size=n, max_size=n))
    if preset in ("triangle_center", "square_center"):
        masses[:n - 1] = [masses[0]] * (n - 1)
    coords = None
    if preset == "explicit":
        d = draw(st.sampled_from([2, 3]))
        rows = np.random.default_rng(draw(st.integers(0, 1000))).standard_normal((n, d))
        coords = tuple(tuple(float(x) for x in r) for r in rows)
    lo = draw(st.floats(1, 5))
    hi = lo + draw(st.floats(0.01, 20))
    name = draw(st.from_regex(r"[a-z][a-z0-9_]{0,10}", fullmatch=True))
    return ScenarioSpec(name=name, masses=tuple(masses), dimension=d, preset=preset,
                        s_interval=(lo, hi), coords=coords, settings=draw(settings_st))


@given(specs())
def test_round_trip(spec):
    assert load_scenario(serialize_scenario(spec)) == spec


@pytest.mark.parametrize("name", sorted(BUILTIN_SCENARIOS))
def test_builtin_round_trip(name):
    spec = builtin_scenario(name)
    assert load_scenario(serialize_scenario(spec)) == spec


def test_overrides():
    spec = builtin_scenario("square")
    out = apply_overrides(spec, ["delta=0.02", "s_max=3", "settings.seed=7", "name=sq2"])
    assert out.settings == {"delta": 0.02, "seed": 7}
    assert out.s_interval == (1.0, 3.0) and out.name == "sq2"
    assert spec.settings == {}
    with pytest.raises(ParseError):
        apply_overrides(spec, ["bogus=1"])
    with pytest.raises(ParseError):
        apply_overrides(spec, ["delta"])
    with pytest.raises(ValidationError):
        apply_overrides(spec, ["masses=1,1,-1,1"])
