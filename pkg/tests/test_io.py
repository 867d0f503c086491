import numpy as np
import pytest

from rgbmesh import BadIndex, make_mesh, meshes_equal, refine_rgb
from rgbmesh.experiments import square2
from rgbmesh.io import ParseError, dumps_dat, read_dat, render_svg, write_dat


def test_round_trip_in_memory():
    m = refine_rgb(square2(), {0})
    back = read_dat(write_dat(m))
    assert meshes_equal(back, m) and back.n_initial == m.n_initial


def test_round_trip_directory(tmp_path, mesh_a):
    m = make_mesh(mesh_a.coordinates, mesh_a.elements, boundaries={"dirichlet": [(0, 1), (1, 2)], "neumann": [(2, 3), (3, 0)]})
    m = refine_rgb(m, {1})
    write_dat(m, tmp_path)
    back = read_dat(tmp_path)
    assert meshes_equal(back, m)
    assert sorted(back.boundaries) == ["dirichlet", "neumann"]
    for k in m.boundaries:
        assert np.array_equal(back.boundaries[k], m.boundaries[k])
    text = (tmp_path / "coordinates.dat").read_text().splitlines()
    assert text[0] == "# n_initial = 4"


def test_text_is_one_based():
    b = dumps_dat(square2())
    assert b["elements"] == "1 3 4\n3 1 2\n"


def test_reads_one_based_arrays():
    bundle = {"coordinates": "0 0\n0 1\n1 0\n1 1\n", "elements": "1 3 2\n"}
    m = read_dat(bundle)
    assert m.elements.tolist() == [[0, 2, 1]]
    assert m.n_initial == 4


def test_out_of_range_index():
    with pytest.raises(BadIndex):
        read_dat({"coordinates": "0 0\n1 0\n1 1\n0 1\n", "elements": "1 9 2\n"})


@pytest.mark.parametrize("bundle", [
    {"coordinates": "0 0 0\n", "elements": ""},
    {"coordinates": "0 x\n", "elements": ""},
    {"coordinates": "0 0\n1 0\n0 1\n", "elements": "1 2 3.5\n"},
    {"coordinates": "0 0\n"},
])
def test_parse_errors(bundle):
    with pytest.raises(ParseError):
        read_dat(bundle)


def test_missing_directory(tmp_path):
    with pytest.raises(FileNotFoundError):
        read_dat(tmp_path / "nope")


def test_svg_plain(mesh_a):
    svg = render_svg(mesh_a)
    assert svg.startswith("<svg") and svg.count("<polygon") == 2
    assert "<line" not in svg and "<circle" not in svg


def test_svg_reference_ticks(mesh_a):
    svg = render_svg(mesh_a, ["ref"])
    assert svg.count("<line") == 2


def test_svg_middles_and_newest(mesh_b):
    svg = render_svg(mesh_b, ["middles", "newest"])
    filled = [ln for ln in svg.splitlines() if "<polygon" in ln and 'fill="none"' not in ln]
    assert [ln.split('"')[1] for ln in filled] == ["e4", "e8"]
    assert svg.count("<circle") == 5


def test_svg_is_deterministic(mesh_b):
    assert render_svg(mesh_b, ["ref"]) == render_svg(mesh_b, ["ref"])
    with pytest.raises(ValueError):
        render_svg(mesh_b, ["bogus"])
