"""Red-green-blue refinement with in-place child storage.

Children of a refined element take the father's row and the rows right
after it; later elements shift down.  New midpoints are appended to the
coordinates in ascending edge-id order.
"""
from __future__ import annotations

import enum

import numpy as np

from .mesh import DegenerateElement, Mesh, signed_areas
from .topology import EdgeTopology, build_edge_topology, edge_keys


class Pattern(enum.IntEnum):
    NONE = 0
    GREEN = 1
    BLUE_R = 2
    BLUE_L = 3
    RED = 4


CHILD_COUNT = {Pattern.NONE: 1, Pattern.GREEN: 2, Pattern.BLUE_R: 3, Pattern.BLUE_L: 3, Pattern.RED: 4}

# Child templates over the local symbols of a father (v1, v2, v3) and the
# midpoints m12, m23, m31 of its local edges 0, 1, 2.
TEMPLATES = {
    Pattern.NONE: [("v1", "v2", "v3")],
    Pattern.GREEN: [("v3", "v1", "m12"), ("v2", "v3", "m12")],
    Pattern.BLUE_R: [("v3", "v1", "m12"), ("m12", "v2", "m23"), ("v3", "m12", "m23")],
    Pattern.BLUE_L: [("m12", "v3", "m31"), ("v1", "m12", "m31"), ("v2", "v3", "m12")],
    Pattern.RED: [("v1", "m12", "m31"), ("m12", "v2", "m23"), ("m31", "m23", "v3"), ("m23", "m31", "m12")],
}


def mark_code(marked_local: np.ndarray) -> np.ndarray:
    """3-bit string per element, bit k set iff local edge k is marked (e.g. '110')."""
    m = np.asarray(marked_local, dtype=bool).reshape(-1, 3)
    return np.array(["".join("1" if b else "0" for b in row) for row in m])


def promote_code(code: str) -> str:
    """Closure rule for one element: a marked non-reference edge forces the reference edge."""
    if code[1] == "1" or code[2] == "1":
        return "1" + code[1:]
    return code


def closure_marks(mesh: Mesh, topo: EdgeTopology, marked_elements) -> np.ndarray:
    """Boolean per-edge bisection marks after the refinement closure.

    Every edge of a marked element is marked; then any element with a marked
    edge but an unmarked reference edge gets its reference edge marked, until
    nothing changes.
    """
    e2e = topo.element2edges
    marked = np.zeros(topo.n_edges, dtype=bool)
    idx = _as_index_array(marked_elements)
    if idx.size:
        marked[e2e[idx].ravel()] = True
    for _ in range(topo.n_edges + 1):
        m = marked[e2e]
        swap = ~m[:, 0] & (m[:, 1] | m[:, 2])
        if not swap.any():
            return marked
        marked[e2e[swap, 0]] = True
    raise AssertionError("refinement closure did not terminate")  # marks only grow


def _as_index_array(ids) -> np.ndarray:
    if ids is None:
        return np.empty(0, dtype=np.int64)
    if isinstance(ids, (set, frozenset)):
        ids = sorted(ids)
    a = np.asarray(ids)
    if a.dtype == bool:
        return np.flatnonzero(a)
    return a.astype(np.int64).ravel()


def element_patterns(marked_local: np.ndarray) -> np.ndarray:
    """Pattern per element from closed local edge marks."""
    m = np.asarray(marked_local, dtype=bool)
    pat = np.full(m.shape[0], Pattern.NONE, dtype=np.int64)
    ref = m[:, 0]
    pat[ref & ~m[:, 1] & ~m[:, 2]] = Pattern.GREEN
    pat[ref & m[:, 1] & ~m[:, 2]] = Pattern.BLUE_R
    pat[ref & ~m[:, 1] & m[:, 2]] = Pattern.BLUE_L
    pat[ref & m[:, 1] & m[:, 2]] = Pattern.RED
    return pat


def build_children(elements: np.ndarray, new_nodes: np.ndarray, patterns: np.ndarray) -> np.ndarray:
    """Assemble child rows; ``new_nodes[:, k]`` is the midpoint of local edge k (or -1)."""
    counts = np.array([CHILD_COUNT[Pattern(p)] for p in range(5)])[patterns]
    offsets = np.concatenate(([0], np.cumsum(counts)[:-1]))
    out = np.empty((int(counts.sum()), 3), dtype=np.int64)
    sym = {
        "v1": elements[:, 0], "v2": elements[:, 1], "v3": elements[:, 2],
        "m12": new_nodes[:, 0], "m23": new_nodes[:, 1], "m31": new_nodes[:, 2],
    }
    for pat, template in TEMPLATES.items():
        sel = patterns == pat
        if not sel.any():
            continue
        base = offsets[sel]
        for k, row in enumerate(template):
            out[base + k] = np.column_stack([sym[s][sel] for s in row])
    return out


def _split_boundary(edges: np.ndarray, edge_ids: np.ndarray, edge2new: np.ndarray) -> np.ndarray:
    mid = edge2new[edge_ids]
    split = mid >= 0
    counts = np.where(split, 2, 1)
    out = np.empty((int(counts.sum()), 2), dtype=np.int64)
    pos = np.concatenate(([0], np.cumsum(counts)[:-1]))
    out[pos[~split]] = edges[~split]
    s = pos[split]
    out[s, 0] = edges[split, 0]
    out[s, 1] = mid[split]
    out[s + 1, 0] = mid[split]
    out[s + 1, 1] = edges[split, 1]
    return out


def _boundary_edge_ids(mesh: Mesh, topo: EdgeTopology, edges: np.ndarray) -> np.ndarray:
    keys = edge_keys(topo.edge_nodes, mesh.n_nodes)
    return np.searchsorted(keys, edge_keys(edges, mesh.n_nodes))


def refine_rgb(mesh: Mesh, marked_elements) -> Mesh:
    """Refine the marked elements (plus closure) and return the new mesh."""
    topo = build_edge_topology(mesh)
    marked = closure_marks(mesh, topo, marked_elements)
    if not marked.any():
        return mesh
    n = mesh.n_nodes
    marked_ids = np.flatnonzero(marked)
    edge2new = np.full(topo.n_edges, -1, dtype=np.int64)
    edge2new[marked_ids] = n + np.arange(marked_ids.size)
    ends = mesh.coordinates[topo.edge_nodes[marked_ids]]
    coords = np.vstack([mesh.coordinates, 0.5 * (ends[:, 0] + ends[:, 1])])

    new_nodes = edge2new[topo.element2edges]
    patterns = element_patterns(new_nodes >= 0)
    elements = build_children(mesh.elements, new_nodes, patterns)
    if np.any(signed_areas(coords, elements) <= 0):
        raise DegenerateElement("refinement produced a non-positive child area")

    boundaries = {}
    for name, edges in mesh.boundaries.items():
        if len(edges):
            ids = _boundary_edge_ids(mesh, topo, edges)
            boundaries[name] = _split_boundary(edges, ids, edge2new)
        else:
            boundaries[name] = edges
    return Mesh(coords, elements, mesh.n_initial, boundaries)


def uniform_refine(mesh: Mesh, levels: int) -> Mesh:
    """Red-refine every element ``levels`` times."""
    if levels < 0:
        raise ValueError("levels must be non-negative")
    for _ in range(levels):
        mesh = refine_rgb(mesh, np.arange(mesh.n_elements))
    return mesh
