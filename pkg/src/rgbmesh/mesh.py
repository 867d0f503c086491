"""Minimal triangular mesh: node coordinates plus element connectivity.

The reference edge of an element is implicit: it is the edge between the
first two stored vertices.  Elements are oriented counterclockwise.  All
indices are 0-based in memory.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

COORD_TOL = 1e-12


class MeshError(ValueError):
    """Base class for structural mesh errors."""


class BadIndex(MeshError):
    pass


class DegenerateElement(MeshError):
    pass


class DuplicateNode(MeshError):
    pass


class NonManifoldEdge(MeshError):
    pass


class NotRefinedMesh(MeshError):
    """Element storage is inconsistent with the RGB storage rules."""


class NoProgress(MeshError):
    """Repeated coarsening stalled before the initial mesh was reached."""


def _frozen(a, dtype):
    a = np.array(a, dtype=dtype, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class Mesh:
    """Immutable triangulation.

    Attributes
    ----------
    coordinates : (N, 2) float array
    elements : (M, 3) int array, counterclockwise, reference edge = columns 0-1
    n_initial : number of leading nodes that belong to the initial mesh
    boundaries : named (K, 2) int arrays of boundary edges
    """

    coordinates: np.ndarray
    elements: np.ndarray
    n_initial: int
    boundaries: Mapping[str, np.ndarray] = field(default_factory=dict)

    def __post_init__(self):
        coords = _frozen(self.coordinates, np.float64).reshape(-1, 2)
        elems = _frozen(self.elements, np.int64).reshape(-1, 3)
        bnds = {str(k): _frozen(v, np.int64).reshape(-1, 2) for k, v in self.boundaries.items()}
        object.__setattr__(self, "coordinates", coords)
        object.__setattr__(self, "elements", elems)
        object.__setattr__(self, "n_initial", int(self.n_initial))
        object.__setattr__(self, "boundaries", bnds)

    @property
    def n_nodes(self) -> int:
        return self.coordinates.shape[0]

    @property
    def n_elements(self) -> int:
        return self.elements.shape[0]

    def __repr__(self):
        return (f"Mesh(n_nodes={self.n_nodes}, n_elements={self.n_elements}, "
                f"n_initial={self.n_initial}, boundaries={sorted(self.boundaries)})")


def signed_areas(coordinates: np.ndarray, elements: np.ndarray) -> np.ndarray:
    p = coordinates[elements]
    d1 = p[:, 1] - p[:, 0]
    d2 = p[:, 2] - p[:, 0]
    return 0.5 * (d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0])


def signed_area(mesh: Mesh, element_id: int) -> float:
    """Half the cross product of the element's edge vectors (positive if CCW)."""
    if not 0 <= element_id < mesh.n_elements:
        raise BadIndex(f"element {element_id} out of range [0, {mesh.n_elements})")
    return float(signed_areas(mesh.coordinates, mesh.elements[element_id:element_id + 1])[0])


def _duplicate_nodes(coordinates: np.ndarray, tol: float) -> np.ndarray:
    if len(coordinates) < 2:
        return np.empty(0, dtype=np.int64)
    from scipy.spatial import cKDTree

    pairs = cKDTree(coordinates).query_pairs(tol, p=np.inf, output_type="ndarray")
    return np.unique(pairs.max(axis=1)) if len(pairs) else np.empty(0, dtype=np.int64)


def make_mesh(coordinates, elements, n_initial=None, boundaries=None) -> Mesh:
    """Validate arrays and build a :class:`Mesh`.

    ``n_initial`` defaults to the number of coordinates, i.e. the mesh is
    treated as an initial triangulation.
    """
    coords = np.asarray(coordinates, dtype=np.float64)
    elems = np.asarray(elements)
    if coords.ndim != 2 or coords.shape[1] != 2:
        raise MeshError(f"coordinates must have shape (N, 2), got {coords.shape}")
    if elems.size == 0:
        elems = elems.reshape(0, 3)
    if elems.ndim != 2 or elems.shape[1] != 3:
        raise MeshError(f"elements must have shape (M, 3), got {elems.shape}")
    if not np.issubdtype(elems.dtype, np.integer):
        if not np.all(np.mod(elems, 1) == 0):
            raise BadIndex("element indices must be integers")
    elems = elems.astype(np.int64)
    n = len(coords)
    if n_initial is None:
        n_initial = n
    if not 0 <= n_initial <= n:
        raise MeshError(f"n_initial={n_initial} outside [0, {n}]")
    if not np.all(np.isfinite(coords)):
        raise MeshError("coordinates must be finite")
    if elems.size and (elems.min() < 0 or elems.max() >= n):
        raise BadIndex(f"element node index outside [0, {n})")
    repeated = (elems[:, 0] == elems[:, 1]) | (elems[:, 1] == elems[:, 2]) | (elems[:, 0] == elems[:, 2])
    if np.any(repeated):
        raise BadIndex(f"elements {np.flatnonzero(repeated).tolist()} repeat a vertex")
    dup = _duplicate_nodes(coords, COORD_TOL)
    if dup.size:
        raise DuplicateNode(f"nodes {sorted(dup.tolist())} duplicate other coordinates")
    if elems.size:
        area = signed_areas(coords, elems)
        bad = np.flatnonzero(area <= 0)
        if bad.size:
            raise DegenerateElement(f"elements {bad[:10].tolist()} have non-positive area")

    bnds = {}
    for name, edges in (boundaries or {}).items():
        edges = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
        if edges.size and (edges.min() < 0 or edges.max() >= n):
            raise BadIndex(f"boundary {name!r} references a node outside [0, {n})")
        bnds[name] = edges
    mesh = Mesh(coords, elems, n_initial, bnds)
    if bnds:
        _check_boundaries(mesh)
    return mesh


def _check_boundaries(mesh: Mesh) -> None:
    from .topology import edge_keys, build_edge_topology

    topo = build_edge_topology(mesh)
    n_inc = (topo.edge2elements >= 0).sum(axis=1)
    keys = edge_keys(topo.edge_nodes, mesh.n_nodes)
    for name, edges in mesh.boundaries.items():
        if not len(edges):
            continue
        k = edge_keys(edges, mesh.n_nodes)
        pos = np.searchsorted(keys, k)
        pos = np.minimum(pos, len(keys) - 1)
        found = keys[pos] == k
        if not np.all(found) or np.any(n_inc[pos] != 1):
            raise MeshError(f"boundary {name!r} lists edges that are not mesh boundary edges")


def meshes_equal(a: Mesh, b: Mesh, tol: float = COORD_TOL) -> bool:
    """Ordered comparison: coordinates within ``tol`` and identical element rows."""
    if a.coordinates.shape != b.coordinates.shape or a.elements.shape != b.elements.shape:
        return False
    if not np.array_equal(a.elements, b.elements):
        return False
    return bool(np.all(np.abs(a.coordinates - b.coordinates) <= tol))
