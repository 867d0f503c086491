import math

import numpy as np
import pytest

from rgbmesh import make_mesh, refine_rgb, uniform_refine
from rgbmesh.experiments import grid, hexagon6, square2, square_isolated, strip4, strip4_not_weak_bdd
from rgbmesh.quality import (
    check_conforming, check_weak_bdd, element_provenance, min_angle, quality_report, similarity_classes,
)


def test_refined_mesh_is_conforming(mesh_c):
    ok, hanging = check_conforming(mesh_c)
    assert ok and hanging.size == 0


def test_hand_bisected_element_leaves_hanging_node(mesh_a):
    # split element (1, 3, 4) through the diagonal midpoint but leave its neighbour alone
    xy = np.vstack([mesh_a.coordinates, [(0.5, 0.5)]])
    m = make_mesh(xy, [(3, 0, 4), (2, 3, 4), (2, 0, 1)])
    ok, hanging = check_conforming(m)
    assert not ok and hanging.tolist() == [4]


def test_hanging_node_on_boundary_free_edge():
    # T-junction: the left triangle's edge (1,0)-(1,2) carries node (1,1) of the right side
    xy = [(0, 0), (1, 0), (1, 2), (2, 0), (1, 1), (2, 2)]
    m = make_mesh(xy, [(0, 1, 2), (1, 3, 4), (4, 3, 5), (4, 5, 2)])
    ok, hanging = check_conforming(m)
    assert not ok and hanging.tolist() == [4]


@pytest.mark.parametrize("factory, weak, isolated", [
    (lambda: make_mesh([(0, 0), (1, 0), (0, 1)], [(0, 1, 2)]), True, []),
    (square2, True, []),
    (strip4, True, []),
    (hexagon6, True, []),
    (square_isolated, True, [0]),
    (strip4_not_weak_bdd, False, [0, 1]),
])
def test_weak_bdd(factory, weak, isolated):
    ok, iso = check_weak_bdd(factory())
    assert ok is weak
    assert iso.tolist() == isolated


@pytest.mark.parametrize("xy, expected", [
    ([(0, 0), (1, 0), (0.5, math.sqrt(3) / 2)], math.pi / 3),
    ([(0, 0), (1, 0), (0, 1)], math.pi / 4),
])
def test_min_angle(xy, expected):
    assert min_angle(make_mesh(xy, [(0, 1, 2)])) == pytest.approx(expected)


def test_min_angle_preserved_by_red_refinement():
    assert min_angle(uniform_refine(square2(), 6)) == pytest.approx(math.pi / 4, abs=1e-12)


def test_similarity_classes():
    init = grid(2)
    assert set(similarity_classes(init, np.arange(init.n_elements)).values()) == {1}
    fine = uniform_refine(init, 1)
    classes = similarity_classes(fine, element_provenance(fine, init))
    assert len(classes) == init.n_elements and set(classes.values()) == {1}


def test_similarity_classes_of_obtuse_triangle():
    init = make_mesh([(0, 0), (3, 0), (1, 1)], [(0, 1, 2)])
    mesh = init
    rng = np.random.default_rng(0)
    for _ in range(5):
        mesh = refine_rgb(mesh, np.flatnonzero(rng.random(mesh.n_elements) < 0.3))
    counts = similarity_classes(mesh, element_provenance(mesh, init))
    assert 1 < counts[0] <= 4


def test_provenance(mesh_c, mesh_a):
    prov = element_provenance(mesh_c, mesh_a)
    cent = mesh_c.coordinates[mesh_c.elements].mean(axis=1)
    # element 0 of the square is the upper-left half (y > x)
    assert np.array_equal(prov == 0, cent[:, 1] > cent[:, 0])


def test_quality_report(mesh_c, mesh_a):
    d = quality_report(mesh_c, initial=mesh_a).to_dict()
    assert d["conforming"] and d["ok"]
    assert d["similarity_classes"] == {"0": 1, "1": 1}
    assert 0 < d["min_angle"] <= math.pi / 3
    assert "weak_bdd" not in d
    # a requested check that fails makes the report fail
    d = quality_report(mesh_c, weak_bdd=True).to_dict()
    assert d["weak_bdd"] is False and not d["ok"]
    assert quality_report(mesh_a, weak_bdd=True).ok
