"""Geometric checkers used to audit refinement and coarsening output.

These functions look only at coordinates and connectivity, never at the
storage conventions, so they can serve as oracles for the mesh operations.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import cKDTree

from .mesh import Mesh, signed_areas
from .topology import EdgeTopology, build_edge_topology

HANGING_TOL = 1e-10
ANGLE_TOL = 1e-9


def check_conforming(mesh: Mesh, tol: float = HANGING_TOL):
    """Return ``(conforming, hanging_nodes)``.

    A hanging node is a mesh node lying strictly inside some element edge.
    """
    topo = build_edge_topology(mesh)
    coords = mesh.coordinates
    none = np.empty(0, dtype=np.int64)
    if topo.n_edges == 0:
        return True, none
    p = coords[topo.edge_nodes[:, 0]]
    q = coords[topo.edge_nodes[:, 1]]
    d = q - p
    length = np.hypot(d[:, 0], d[:, 1])
    mid = 0.5 * (p + q)
    nodes = cKDTree(coords)
    # Candidate (node, edge) pairs per power-of-two length class, so the
    # search radius fits every edge in the class to within a factor of two.
    level = np.floor(np.log2(length)).astype(np.int64)
    found = []
    for lv in np.unique(level):
        idx = np.flatnonzero(level == lv)
        radius = 0.5 * length[idx].max() + tol
        pairs = cKDTree(mid[idx]).sparse_distance_matrix(nodes, radius, output_type="ndarray")
        e, v = idx[pairs["i"]], pairs["j"].astype(np.int64)
        keep = (v != topo.edge_nodes[e, 0]) & (v != topo.edge_nodes[e, 1])
        found.append((e[keep], v[keep]))
    edge_idx = np.concatenate([f[0] for f in found])
    node_idx = np.concatenate([f[1] for f in found])
    if edge_idx.size == 0:
        return True, none
    r = coords[node_idx] - p[edge_idx]
    dd = d[edge_idx]
    ll = length[edge_idx]
    dist = np.abs(dd[:, 0] * r[:, 1] - dd[:, 1] * r[:, 0]) / ll
    t = (dd[:, 0] * r[:, 0] + dd[:, 1] * r[:, 1]) / ll
    on = (dist <= tol) & (t > tol) & (t < ll - tol)
    hanging = np.unique(node_idx[on])
    return hanging.size == 0, hanging


def isolated_elements(topo: EdgeTopology) -> np.ndarray:
    """Elements whose reference edge is a non-reference edge of the neighbor across it."""
    ref = topo.element2edges[:, 0]
    el = topo.edge2elements[ref]
    loc = topo.edge2local[ref]
    own = np.arange(ref.size)
    other_loc = np.where(el[:, 0] == own, loc[:, 1], loc[:, 0])
    return np.flatnonzero(other_loc > 0)


def check_weak_bdd(mesh: Mesh, topo: EdgeTopology | None = None):
    """Return ``(weak_bdd, isolated)``: no two isolated elements may share an edge."""
    if topo is None:
        topo = build_edge_topology(mesh)
    iso = isolated_elements(topo)
    mask = np.zeros(mesh.n_elements, dtype=bool)
    mask[iso] = True
    e2el = topo.edge2elements
    interior = e2el[:, 1] >= 0
    clash = interior & mask[np.maximum(e2el[:, 0], 0)] & mask[np.maximum(e2el[:, 1], 0)]
    return not clash.any(), iso


def element_angles(mesh: Mesh) -> np.ndarray:
    """(M, 3) interior angles; column k is the angle at local vertex k."""
    p = mesh.coordinates[mesh.elements]
    out = np.empty((mesh.n_elements, 3))
    for k in range(3):
        a = p[:, (k + 1) % 3] - p[:, k]
        b = p[:, (k + 2) % 3] - p[:, k]
        cross = a[:, 0] * b[:, 1] - a[:, 1] * b[:, 0]
        dot = (a * b).sum(axis=1)
        out[:, k] = np.arctan2(np.abs(cross), dot)
    return out


def min_angle(mesh: Mesh) -> float:
    if mesh.n_elements == 0:
        raise ValueError("mesh has no elements")
    return float(element_angles(mesh).min())


def locate_points(coords: np.ndarray, elements: np.ndarray, points: np.ndarray, tol: float = 1e-12):
    """Boolean (P, M) containment matrix for closed triangles."""
    points = np.asarray(points, dtype=float).reshape(-1, 2)
    tri = coords[elements]
    inside = np.ones((len(points), len(elements)), dtype=bool)
    for k in range(3):
        a = tri[:, k]
        b = tri[:, (k + 1) % 3]
        e = b - a
        r = points[:, None, :] - a[None, :, :]
        cross = e[None, :, 0] * r[..., 1] - e[None, :, 1] * r[..., 0]
        inside &= cross >= -tol
    return inside


def element_provenance(mesh: Mesh, initial: Mesh, chunk: int = 2048) -> np.ndarray:
    """Index of the initial element containing each element's centroid."""
    cent = mesh.coordinates[mesh.elements].mean(axis=1)
    out = np.full(mesh.n_elements, -1, dtype=np.int64)
    for s in range(0, len(cent), chunk):
        hit = locate_points(initial.coordinates, initial.elements, cent[s:s + chunk])
        found = hit.any(axis=1)
        out[s:s + chunk] = np.where(found, hit.argmax(axis=1), -1)
    if np.any(out < 0):
        raise ValueError("some elements lie outside the initial mesh")
    return out


def _count_classes(triples: np.ndarray, tol: float) -> int:
    reps: list[np.ndarray] = []
    for t in np.unique(np.round(triples, 12), axis=0):
        if not any(np.all(np.abs(t - r) <= tol) for r in reps):
            reps.append(t)
    return len(reps)


def similarity_classes(mesh: Mesh, provenance, tol: float = ANGLE_TOL) -> dict[int, int]:
    """Distinct sorted angle triples per initial element, ``{initial id: count}``."""
    provenance = np.asarray(provenance, dtype=np.int64)
    triples = np.sort(element_angles(mesh), axis=1)
    return {int(t): _count_classes(triples[provenance == t], tol) for t in np.unique(provenance)}


@dataclass
class QualityReport:
    conforming: bool
    hanging_nodes: list[int]
    min_angle: float
    min_area: float
    weak_bdd: bool | None = None
    isolated_elements: list[int] | None = None
    similarity_classes_per_initial_element: dict[int, int] | None = field(default=None)

    @property
    def ok(self) -> bool:
        checks = [self.conforming, self.min_area > 0]
        if self.weak_bdd is not None:
            checks.append(self.weak_bdd)
        if self.similarity_classes_per_initial_element is not None:
            checks.append(max(self.similarity_classes_per_initial_element.values(), default=0) <= 4)
        return all(checks)

    def to_dict(self) -> dict:
        d = {
            "conforming": self.conforming,
            "hanging_nodes": self.hanging_nodes,
            "min_angle": self.min_angle,
            "min_area": self.min_area,
        }
        if self.weak_bdd is not None:
            d["weak_bdd"] = self.weak_bdd
            d["isolated_elements"] = self.isolated_elements
        if self.similarity_classes_per_initial_element is not None:
            d["similarity_classes"] = {str(k): v for k, v in self.similarity_classes_per_initial_element.items()}
        d["ok"] = self.ok
        return d


def quality_report(mesh: Mesh, weak_bdd: bool = False, initial: Mesh | None = None) -> QualityReport:
    conforming, hanging = check_conforming(mesh)
    report = QualityReport(
        conforming=conforming,
        hanging_nodes=hanging.tolist(),
        min_angle=min_angle(mesh),
        min_area=float(signed_areas(mesh.coordinates, mesh.elements).min()),
    )
    if weak_bdd:
        ok, iso = check_weak_bdd(mesh)
        report.weak_bdd = ok
        report.isolated_elements = iso.tolist()
    if initial is not None:
        report.similarity_classes_per_initial_element = similarity_classes(mesh, element_provenance(mesh, initial))
    return report
