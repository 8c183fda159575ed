import re
import xml.etree.ElementTree as ET

import numpy as np
import pytest

from bcfg.continuation import Branch, ContinuationSettings, make_point
from bcfg.errors import EmptyBranch, ParseError, ValidationError
from bcfg.plotting import emit_plot
from bcfg.records import BASE_COLUMNS, BranchRecord, branch_filename, settings_hash
from helpers import planar_scenario, traced_branch

SVG = "{http://www.w3.org/2000/svg}"


def square_record():
    branch, _, m, cand = traced_branch("square", 0)
    return BranchRecord.from_branch(branch, "square", cand.s_star, "plus", ContinuationSettings(), m)


def collinear_record():
    branch, _, m, cand = traced_branch("collinear_equal", 1)
    return BranchRecord.from_branch(branch, "collinear_equal", cand.s_star, "plus",
                                    ContinuationSettings(), m)


def one_point_record():
    qh, m = planar_scenario("square_center")
    branch = Branch(points=[make_point(qh, 2.0, m)], events=[(0, "start_bifurcation")])
    return BranchRecord.from_branch(branch, "one", 2.0, "plus", ContinuationSettings(), m)


def test_columns_and_header():
    text = square_record().to_text()
    lines = text.splitlines()
    meta = [l for l in lines if l.startswith("#")]
    assert any(l.startswith("# scenario: square") for l in meta)
    assert any(l.startswith("# candidate: 1.4775922500") for l in meta)
    assert any(re.match(r"# settings_sha256: [0-9a-f]{64}$", l) for l in meta)
    header = lines[len(meta)]
    assert header == ",".join(BASE_COLUMNS + tuple(f"q{j}" for j in range(12)))


def test_round_trip_lossless():
    rec = square_record()
    back = BranchRecord.from_text(rec.to_text())
    assert len(back) == len(rec)
    np.testing.assert_array_equal(back.q, rec.q)
    np.testing.assert_array_equal(back.s, rec.s)
    np.testing.assert_array_equal(back.inertia, rec.inertia)
    assert back.classes == rec.classes and back.events == rec.events
    assert back.candidate == rec.candidate and back.settings_hash == rec.settings_hash
    assert back.to_text() == rec.to_text()


def test_reloaded_residuals_match():
    rec = collinear_record()
    for stored, p in zip(rec.residual, BranchRecord.from_text(rec.to_text()).to_points()):
        assert abs(p.residual_norm - stored) < 1e-12


def test_write_and_read(tmp_path):
    rec = square_record()
    path = rec.write(tmp_path)
    assert path.name == "square_s1.47759_plus.csv" == branch_filename("square", rec.candidate, "plus")
    assert BranchRecord.read(path).to_text() == rec.to_text()


def test_settings_hash_sensitive():
    a = settings_hash(ContinuationSettings())
    assert a == settings_hash(ContinuationSettings())
    assert a != settings_hash(ContinuationSettings(delta=0.02))


def test_malformed_records():
    text = square_record().to_text()
    with pytest.raises(ParseError):
        BranchRecord.from_text(text.replace("step,s,", "stage,s,"))
    lines = text.splitlines()
    lines[-1] = lines[-1] + ",1.0"
    with pytest.raises(ParseError):
        BranchRecord.from_text("\n".join(lines))
    header_only = "\n".join(l for l in lines if l.startswith("#") or l.startswith("step"))
    with pytest.raises(EmptyBranch):
        BranchRecord.from_text(header_only)


def test_empty_branch_rejected():
    with pytest.raises(EmptyBranch):
        BranchRecord.from_branch(Branch(points=[]), "x", 1.5, "plus", ContinuationSettings(), [1, 1])


def _parse(svg):
    root = ET.fromstring(svg)
    assert root.tag == SVG + "svg"
    return root


def _no_external_refs(svg):
    assert "href" not in svg and "url(" not in svg and "<script" not in svg


def test_one_point_trajectories():
    svg = emit_plot(one_point_record(), "trajectories")
    root = _parse(svg)
    _no_external_refs(svg)
    assert len(root.findall(f".//{SVG}circle[@class='start']")) == 5
    assert not root.findall(f".//{SVG}polyline")
    assert not root.findall(f".//{SVG}rect[@class='end']")


def test_square_trajectories():
    svg = emit_plot(square_record(), "trajectories")
    root = _parse(svg)
    _no_external_refs(svg)
    assert len(root.findall(f".//{SVG}polyline[@class='path']")) == 4
    ends = root.findall(f".//{SVG}rect[@class='end']")
    assert len(ends) == 4
    assert "s=1" in ends[0].find(f"{SVG}title").text
    assert "projection" in root.find(f"{SVG}title").text


def test_s_profile_marks_turning_points():
    rec = collinear_record()
    svg = emit_plot(rec, "s_profile")
    root = _parse(svg)
    _no_external_refs(svg)
    tps = root.findall(f".//{SVG}circle[@class='turning-point']")
    assert len(tps) == len(rec.event_indices("turning_point")) >= 2
    bands = root.findall(f".//{SVG}rect")
    assert any("local_minimum" in (b.get("class") or "") for b in bands)


def test_plot_errors():
    rec = square_record()
    with pytest.raises(ValidationError):
        emit_plot(rec, "histogram")
    with pytest.raises(EmptyBranch):
        emit_plot(None, "trajectories")
