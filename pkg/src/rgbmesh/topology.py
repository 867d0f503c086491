"""Edge enumeration and element/edge incidence.

Local edge k of element (v1, v2, v3) is: k=0 -> (v1, v2) (the reference
edge), k=1 -> (v2, v3), k=2 -> (v3, v1).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .mesh import BadIndex, Mesh, NonManifoldEdge

LOCAL_EDGES = np.array([[0, 1], [1, 2], [2, 0]])


def edge_keys(pairs: np.ndarray, n_nodes: int) -> np.ndarray:
    """Integer key of unordered node pairs; sorting keys sorts pairs lexicographically."""
    pairs = np.asarray(pairs, dtype=np.int64)
    lo = np.minimum(pairs[:, 0], pairs[:, 1])
    hi = np.maximum(pairs[:, 0], pairs[:, 1])
    return lo * max(n_nodes, 1) + hi


@dataclass(frozen=True, eq=False)
class EdgeTopology:
    """Derived incidence data.

    edge_nodes : (E, 2) canonical node pairs (smaller index first), sorted
    element2edges : (M, 3) edge id of each local edge
    edge2elements : (E, 2) incident element ids, -1 where absent
    edge2local : (E, 2) local edge position inside the incident element, -1 where absent
    """

    edge_nodes: np.ndarray
    element2edges: np.ndarray
    edge2elements: np.ndarray
    edge2local: np.ndarray

    @property
    def n_edges(self) -> int:
        return self.edge_nodes.shape[0]

    @property
    def boundary_edges(self) -> np.ndarray:
        return np.flatnonzero(self.edge2elements[:, 1] < 0)


def edge_incidence(element2edges: np.ndarray, n_edges: int | None = None):
    """Invert an element->edge map.

    Returns ``(edge2elements, edge2local)``, each (E, 2) with -1 for a missing
    second incidence.  The first incidence is the one with the smaller element
    id.
    """
    element2edges = np.asarray(element2edges, dtype=np.int64).reshape(-1, 3)
    flat = element2edges.ravel()
    if n_edges is None:
        n_edges = int(flat.max()) + 1 if flat.size else 0
    counts = np.bincount(flat, minlength=n_edges)
    if np.any(counts > 2):
        bad = np.flatnonzero(counts > 2)
        raise NonManifoldEdge(f"edges {bad[:10].tolist()} belong to more than two elements")
    order = np.argsort(flat, kind="stable")
    starts = np.concatenate(([0], np.cumsum(counts)[:-1]))
    e2el = np.full((n_edges, 2), -1, dtype=np.int64)
    e2loc = np.full((n_edges, 2), -1, dtype=np.int64)
    has = counts > 0
    first = order[starts[has]]
    e2el[has, 0] = first // 3
    e2loc[has, 0] = first % 3
    two = counts == 2
    second = order[starts[two] + 1]
    e2el[two, 1] = second // 3
    e2loc[two, 1] = second % 3
    return e2el, e2loc


def build_edge_topology(mesh: Mesh) -> EdgeTopology:
    elements = mesh.elements
    pairs = elements[:, LOCAL_EDGES].reshape(-1, 2)
    keys = edge_keys(pairs, mesh.n_nodes)
    # One stable sort gives the edge numbering and the incidence order at once.
    order = np.argsort(keys, kind="stable")
    sk = keys[order]
    new_edge = np.ones(sk.size, dtype=bool)
    new_edge[1:] = sk[1:] != sk[:-1]
    sorted_ids = np.cumsum(new_edge) - 1
    n_edges = int(sorted_ids[-1]) + 1 if sk.size else 0
    element2edges = np.empty(keys.size, dtype=np.int64)
    element2edges[order] = sorted_ids
    element2edges = element2edges.reshape(-1, 3)
    edge_nodes = np.sort(pairs[order[new_edge]], axis=1)
    e2el, e2loc = edge_incidence(element2edges, n_edges)
    for a in (edge_nodes, element2edges, e2el, e2loc):
        a.setflags(write=False)
    return EdgeTopology(edge_nodes, element2edges, e2el, e2loc)


def neighbors(topo: EdgeTopology, element_id: int) -> tuple:
    """Element across each local edge of ``element_id`` (``None`` on the boundary)."""
    if not 0 <= element_id < topo.element2edges.shape[0]:
        raise BadIndex(f"element {element_id} out of range")
    out = []
    for edge in topo.element2edges[element_id]:
        a, b = topo.edge2elements[edge]
        other = b if a == element_id else a
        out.append(None if other < 0 else int(other))
    return tuple(out)


def neighbor_array(topo: EdgeTopology) -> np.ndarray:
    """(M, 3) array of neighbors across each local edge, -1 on the boundary."""
    e2el = topo.edge2elements[topo.element2edges]  # (M, 3, 2)
    own = np.arange(topo.element2edges.shape[0])[:, None]
    return np.where(e2el[:, :, 0] == own, e2el[:, :, 1], e2el[:, :, 0])
