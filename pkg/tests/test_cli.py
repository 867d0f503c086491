import json

import numpy as np
import pytest

from rgbmesh.cli import main
from rgbmesh.experiments import square2
from rgbmesh.io import read_dat, write_dat


@pytest.fixture
def sq(tmp_path):
    write_dat(square2(), tmp_path / "sq")
    return tmp_path


def test_refine_recover_roundtrip(sq, capsys):
    assert main(["refine", "--mesh", str(sq / "sq"), "--mark", "all", "--out", str(sq / "r1")]) == 0
    assert main(["refine", "--mesh", str(sq / "r1"), "--mark", "circle:0.5,0.5,0.3", "--out", str(sq / "r2")]) == 0
    assert read_dat(sq / "r2").n_nodes > 9
    capsys.readouterr()
    assert main(["recover", "--mesh", str(sq / "r2"), "--out", str(sq / "back"), "--max-steps", "10"]) == 0
    assert capsys.readouterr().out.strip() == "M = 2"
    assert (sq / "back" / "elements.dat").read_text() == (sq / "sq" / "elements.dat").read_text()


def test_coarsen_modes(sq):
    main(["refine", "--mesh", str(sq / "sq"), "--mark", "all", "--out", str(sq / "r1")])
    assert main(["coarsen", "--mesh", str(sq / "r1"), "--mark", "all", "--out", str(sq / "c")]) == 0
    assert read_dat(sq / "c").n_nodes == 4
    np.savetxt(sq / "pts.txt", [(0.9, 0.1)])
    assert main(["refine", "--mesh", str(sq / "sq"), "--mark", f"points:{sq / 'pts.txt'}", "--out", str(sq / "p")]) == 0
    assert main(["coarsen", "--mesh", str(sq / "p"), "--mark", f"points:{sq / 'pts.txt'}", "--out", str(sq / "q")]) == 0


def test_check_json(sq, capsys):
    main(["refine", "--mesh", str(sq / "sq"), "--mark", "all", "--out", str(sq / "r1")])
    capsys.readouterr()
    assert main(["check", "--mesh", str(sq / "r1"), "--weak-bdd", "--similarity"]) == 0
    report = json.loads(capsys.readouterr().out)
    assert report["conforming"] and report["weak_bdd"] and report["similarity_classes"] == {"0": 1, "1": 1}


def test_check_fails_on_hanging_node(tmp_path, capsys):
    d = tmp_path / "bad"
    d.mkdir()
    (d / "coordinates.dat").write_text("0 0\n1 0\n1 1\n0 1\n0.5 0.5\n")
    (d / "elements.dat").write_text("4 1 5\n3 4 5\n3 1 2\n")
    assert main(["check", "--mesh", str(d)]) == 1
    assert json.loads(capsys.readouterr().out)["hanging_nodes"] == [4]


def test_ratios(sq, capsys):
    assert main(["ratios", "--mesh", str(sq / "sq"), "--levels", "3"]) == 0
    out = capsys.readouterr().out.splitlines()
    assert out[0].startswith("phase,step") and any(ln.startswith("coarsen_mean") for ln in out)


def test_render(sq):
    svg = sq / "m.svg"
    assert main(["render", "--mesh", str(sq / "sq"), "--svg", str(svg), "--overlay", "ref,middles,newest"]) == 0
    assert svg.read_text().count("<polygon") == 2


def test_demo_and_bench(tmp_path, capsys):
    assert main(["demo-circle", "--nmin", "50", "--nmax", "400", "--steps", "2", "--out", str(tmp_path / "d")]) == 0
    assert len(list((tmp_path / "d").glob("*.svg"))) == 2
    capsys.readouterr()
    assert main(["bench", "--sizes", "300,600", "--repeat", "2"]) == 0
    assert len(capsys.readouterr().out.splitlines()) == 3


def test_errors_exit_2(tmp_path, capsys):
    assert main(["refine", "--mesh", str(tmp_path / "nope"), "--mark", "all", "--out", str(tmp_path / "x")]) == 2
    assert "error" in capsys.readouterr().err
    write_dat(square2(), tmp_path / "sq")
    assert main(["refine", "--mesh", str(tmp_path / "sq"), "--mark", "bogus", "--out", str(tmp_path / "x")]) == 2
    with pytest.raises(SystemExit):
        main(["refine"])
