import numpy as np
import pytest

from bcfg.errors import ParseError, ValidationError
from bcfg.planar import planar_inertia
from bcfg.potential import balanced_residual, center_of_mass, s_norm2
from bcfg.presets import collinear_configuration, preset_configuration

M_STAR = (2 + 3 * np.sqrt(3)) / (18 - 5 * np.sqrt(3))


@pytest.mark.parametrize("tag,m", [("square", [1] * 4), ("triangle", [1] * 3),
                                   ("triangle_center", [1, 1, 1, 1]),
                                   ("triangle_center", [1, 1, 1, 0.3]),
                                   ("square_center", [1] * 5), ("square_center", [1, 1, 1, 1, 2.5]),
                                   ("collinear", [1] * 4), ("collinear", [0.2, 0.2, 1, 1]),
                                   ("collinear", [1, 2, 3])])
def test_presets_are_normalized_central_configurations(tag, m):
    q = preset_configuration(tag, None, m)
    assert np.linalg.norm(balanced_residual(q, m, 1.0)) < 1e-11
    assert abs(s_norm2(q, m, 1.0) - 1) < 1e-12
    assert np.linalg.norm(center_of_mass(q, m)) < 1e-12
    assert np.abs(q[:, 0]).max() == 0


def test_square_fourfold_symmetric():
    q = preset_configuration("square", None, [1] * 4)
    R = np.array([[1, 0, 0], [0, 0, -1], [0, 1, 0]])
    rotated = q @ R.T
    np.testing.assert_allclose(rotated, q[[1, 2, 3, 0]], atol=1e-12)


def test_collinear_symmetric_about_origin():
    q = collinear_configuration([1, 1, 1, 1])
    y = q[:, 1]
    np.testing.assert_allclose(y, -y[::-1], atol=1e-12)
    assert np.all(np.diff(y) > 0)


def test_collinear_keeps_ordering():
    q = collinear_configuration([0.2, 0.2, 1, 1])
    assert np.all(np.diff(q[:, 1]) > 0)


def test_explicit_preset_polishes():
    m = [1, 1, 1]
    t = 2 * np.pi * np.arange(3) / 3
    coords = np.column_stack([np.zeros(3), np.cos(t), np.sin(t)]) * 1.3 + 1e-4
    q = preset_configuration("explicit", {"coords": coords}, m)
    assert np.linalg.norm(balanced_residual(q, m, 1.0)) < 1e-11


def test_triangle_center_critical_mass_degenerate():
    m = [1, 1, 1, M_STAR]
    assert planar_inertia(preset_configuration("triangle_center", None, m), m).zero >= 2


def test_preset_errors():
    with pytest.raises(ParseError):
        preset_configuration("pentagon", None, [1] * 5)
    with pytest.raises(ValidationError):
        preset_configuration("square", None, [1] * 3)
    with pytest.raises(ValidationError):
        preset_configuration("square_center", None, [1, 2, 1, 1, 1])
    with pytest.raises(ValidationError):
        preset_configuration("explicit", None, [1, 1])
