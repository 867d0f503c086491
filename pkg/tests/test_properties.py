import numpy as np
from hypothesis import given, settings, strategies as st

from rgbmesh import (
    build_edge_topology, classify, closure_marks, coarsen_rgb, coarsen_to_initial, detect_red_middles,
    meshes_equal, refine_rgb,
)
from rgbmesh.coarsen import geometric_red_middles
from rgbmesh.experiments import INITIAL_MESHES
from rgbmesh.mesh import signed_areas
from rgbmesh.quality import check_conforming
from rgbmesh.refine import mark_code

mesh_names = st.sampled_from(sorted(INITIAL_MESHES))
ops = st.lists(st.tuples(st.booleans(), st.floats(0.0, 1.0), st.integers(0, 2**31 - 1)), min_size=1, max_size=8)


def _run(name, steps):
    mesh = INITIAL_MESHES[name]()
    history = [mesh]
    for refine, density, seed in steps:
        rng = np.random.default_rng(seed)
        if refine and mesh.n_elements < 3000:
            mesh = refine_rgb(mesh, np.flatnonzero(rng.random(mesh.n_elements) < density))
        else:
            mesh = coarsen_rgb(mesh, np.flatnonzero(rng.random(mesh.n_nodes) < density))
        history.append(mesh)
    return history


@settings(max_examples=40, deadline=None)
@given(mesh_names, ops)
def test_random_sequences_stay_conforming_and_recover(name, steps):
    history = _run(name, steps)
    for m in history:
        assert check_conforming(m)[0]
        assert signed_areas(m.coordinates, m.elements).min() > 0
        assert np.array_equal(m.coordinates[:m.n_initial], history[0].coordinates)
    back, _ = coarsen_to_initial(history[-1])
    assert meshes_equal(back, history[0])


@settings(max_examples=30, deadline=None)
@given(mesh_names, ops)
def test_middle_detection_matches_geometry(name, steps):
    m = _run(name, steps)[-1]
    assert np.array_equal(detect_red_middles(m), geometric_red_middles(m))


@settings(max_examples=30, deadline=None)
@given(mesh_names, ops, st.floats(0.0, 1.0), st.integers(0, 2**31 - 1))
def test_coarsen_safety(name, steps, density, seed):
    m = _run(name, steps)[-1]
    marked = np.flatnonzero(np.random.default_rng(seed).random(m.n_nodes) < density)
    c = classify(m, marked)
    assert set(c.admissible.tolist()) <= set(marked.tolist()) & set(c.newest_nodes.tolist())
    assert np.all(np.isin(c.adapted_valence[c.admissible], [2, 4]))
    out = coarsen_rgb(m, marked)
    assert out.n_nodes == m.n_nodes - c.admissible.size
    assert meshes_equal(coarsen_rgb(m, marked), out)


@settings(max_examples=30, deadline=None)
@given(mesh_names, ops, st.floats(0.0, 1.0), st.integers(0, 2**31 - 1))
def test_closure_reaches_valid_codes(name, steps, density, seed):
    m = _run(name, steps)[-1]
    topo = build_edge_topology(m)
    marks = np.flatnonzero(np.random.default_rng(seed).random(m.n_elements) < density)
    codes = set(mark_code(closure_marks(m, topo, marks)[topo.element2edges]))
    assert codes <= {"000", "100", "110", "101", "111"}
