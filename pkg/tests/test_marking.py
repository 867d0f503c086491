import numpy as np
import pytest

from rgbmesh import make_mesh, uniform_refine
from rgbmesh.experiments import grid, square2
from rgbmesh.marking import Circle, mark_circle, point_to_element


def test_circle_validation():
    with pytest.raises(ValueError):
        Circle((0, 0), 0.0)


def test_circle_inside_one_element():
    mesh = grid(2)
    # incircle centre of element 1, lower-right half of the lower-left square
    r_in = 0.5 * (2 - np.sqrt(2)) / 2
    c = Circle((0.5 - r_in, r_in), 0.5 * r_in)
    assert mark_circle(mesh, c).tolist() == [1]


def test_circle_far_away():
    assert mark_circle(square2(), Circle((10, 10), 0.1)).size == 0


def test_circle_crossing_diagonal():
    assert mark_circle(square2(), Circle((0.5, 0.5), 0.25)).tolist() == [0, 1]


def test_circle_enclosing_mesh_marks_nothing():
    assert mark_circle(square2(), Circle((0.5, 0.5), 5.0)).size == 0


def test_area_floor():
    mesh = uniform_refine(square2(), 2)
    c = Circle((0.5, 0.5), 0.3)
    assert mark_circle(mesh, c).size > 0
    assert mark_circle(mesh, c, min_area=1.0).size == 0


def test_marked_elements_lie_near_circle():
    mesh = uniform_refine(square2(), 4)
    c = Circle((0.4, 0.6), 0.27)
    marked = mark_circle(mesh, c)
    tri = mesh.coordinates[mesh.elements[marked]]
    lo, hi = tri.min(axis=1) - c.radius, tri.max(axis=1) + c.radius
    assert np.all((lo <= c.center) & (c.center <= hi))
    d = np.hypot(*(tri - c.center).transpose(2, 0, 1))
    assert np.all(d.min(axis=1) <= c.radius + 0.1) and np.all(d.max(axis=1) >= c.radius)


def test_point_to_element(mesh_c):
    cent = mesh_c.coordinates[mesh_c.elements[5]].mean(axis=0)
    assert point_to_element(mesh_c, [cent]).tolist() == [5]
    assert point_to_element(mesh_c, [(2.0, 2.0)]).size == 0
    assert point_to_element(square2(), [(0.5, 0.5)]).tolist() == [0, 1]


def test_point_to_element_ignores_order(mesh_c):
    perm = np.random.default_rng(0).permutation(mesh_c.n_elements)
    shuffled = make_mesh(mesh_c.coordinates, mesh_c.elements[perm])
    pts = [(0.3, 0.2), (0.75, 0.5), (0.1, 0.9)]
    a = point_to_element(mesh_c, pts)
    b = point_to_element(shuffled, pts)
    assert sorted(perm[b].tolist()) == a.tolist()
