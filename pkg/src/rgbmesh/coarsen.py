"""History-free coarsening of RGB-refined meshes.

Everything needed to undo a refinement is recovered from the element
storage itself: the newest vertex sits in the third column, the children of
a father occupy consecutive rows, and a red pattern is recognised by its
middle element (the child made of three midpoints, stored fourth).

Node removal follows the usual recipe.  A node is *admissible* when it is
newest, marked, and has adapted valence 2 or 4 (red middles do not count
towards the valence).  Everything else is blocked, and blocking is closed
over red middles so that the surviving patterns still follow the reference
edges.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .mesh import Mesh, NoProgress, NotRefinedMesh
from .topology import LOCAL_EDGES, EdgeTopology, edge_keys

CLOSURE_MODES = ("local", "chain")

# Output template per red-pattern code.  The code adds 1, 2, 4 for each of
# m23, m31, m12 that stays (is not admissible).  Codes 1-3 cannot occur once
# the closure has run: a kept m23 or m31 always forces m12 to stay.
RED_TEMPLATES = {
    0: [("v1", "v2", "v3")],
    4: [("v3", "v1", "m12"), ("v2", "v3", "m12")],
    5: [("v3", "v1", "m12"), ("m12", "v2", "m23"), ("v3", "m12", "m23")],
    6: [("m12", "v3", "m31"), ("v1", "m12", "m31"), ("v2", "v3", "m12")],
    7: [("v1", "m12", "m31"), ("m12", "v2", "m23"), ("m31", "m23", "v3"), ("m23", "m31", "m12")],
}
_RED_COUNTS = np.zeros(8, dtype=np.int64)
for _code, _rows in RED_TEMPLATES.items():
    _RED_COUNTS[_code] = len(_rows)


def _node_mask(nodes, n_nodes: int) -> np.ndarray:
    """Boolean mask from a set, sequence or boolean array of node ids."""
    mask = np.zeros(n_nodes, dtype=bool)
    if nodes is None:
        return mask
    if isinstance(nodes, (set, frozenset)):
        nodes = sorted(nodes)
    a = np.asarray(nodes)
    if a.dtype == bool:
        if a.shape != (n_nodes,):
            raise ValueError(f"boolean node mask must have length {n_nodes}")
        return a.copy()
    a = a.astype(np.int64).ravel()
    a = a[(a >= 0) & (a < n_nodes)]
    mask[a] = True
    return mask


def local_edge_keys(mesh: Mesh) -> np.ndarray:
    """(M, 3) edge keys per local edge; equal keys mean the same edge."""
    pairs = mesh.elements[:, LOCAL_EDGES].reshape(-1, 2)
    return edge_keys(pairs, mesh.n_nodes).reshape(-1, 3)


def red_middle_mask(element2edges: np.ndarray) -> np.ndarray:
    """Rows that close a red quadruple, by comparing edges of four consecutive rows.

    Any per-element edge labelling works, e.g. edge ids or :func:`local_edge_keys`.
    """
    e2e = np.asarray(element2edges)
    m = e2e.shape[0]
    mask = np.zeros(m, dtype=bool)
    if m < 4:
        return mask
    cur = e2e[3:]
    mask[3:] = (
        (e2e[:-3, 1] == cur[:, 1])
        & (e2e[1:-2, 2] == cur[:, 2])
        & (e2e[2:-1, 0] == cur[:, 0])
    )
    return mask


def detect_red_middles(mesh: Mesh, topo: EdgeTopology | None = None) -> np.ndarray:
    """Sorted ids of red middle elements.

    Raises NotRefinedMesh if two detected quadruples overlap.
    """
    e2e = local_edge_keys(mesh) if topo is None else topo.element2edges
    ids = np.flatnonzero(red_middle_mask(e2e))
    if ids.size > 1 and np.any(np.diff(ids) < 4):
        raise NotRefinedMesh("overlapping red patterns in element storage")
    return ids


def geometric_red_middles(mesh: Mesh, tol: float = 1e-9) -> np.ndarray:
    """Red middles found from geometry alone, ignoring storage order.

    Element (a, b, c) is a middle iff the mesh also contains (X, c, b),
    (c, Y, a) and (b, a, Z) with X = b + c - a, Y = c + a - b, Z = a + b - c,
    and a, b, c are all younger (higher id) than X, Y, Z.  The age test
    rejects look-alike groups in uniformly refined regions, where a corner
    child and its three neighbours have the same shape as a red pattern.
    Slow; meant as an independent check of :func:`detect_red_middles`.
    """
    from scipy.spatial import cKDTree

    coords = mesh.coordinates
    elems = mesh.elements
    if len(elems) == 0:
        return np.empty(0, dtype=np.int64)
    rows = {tuple(r) for r in elems.tolist()}
    tree = cKDTree(coords)
    p = coords[elems]
    a, b, c = p[:, 0], p[:, 1], p[:, 2]

    def lookup(points):
        d, idx = tree.query(points)
        return np.where(d <= tol, idx, -1)

    x, y, z = lookup(b + c - a), lookup(c + a - b), lookup(a + b - c)
    out = []
    for e, (ia, ib, ic) in enumerate(elems.tolist()):
        if min(x[e], y[e], z[e]) < 0 or min(ia, ib, ic) < max(x[e], y[e], z[e]):
            continue
        if ((x[e], ic, ib) in rows and (ic, y[e], ia) in rows and (ib, ia, z[e]) in rows):
            out.append(e)
    return np.array(out, dtype=np.int64)


def detect_newest_nodes(mesh: Mesh, red_middles=None):
    """Newest nodes and the systematic false positives of the third-column rule.

    Returns ``(newest, systematic)`` as sorted id arrays.  ``newest`` is the
    set of third-column nodes that are not initial nodes.  ``systematic``
    collects nodes whose every third-column appearance is as the apex of the
    third child of a red pattern, i.e. an old corner listed again.
    """
    elems = mesh.elements
    n = mesh.n_nodes
    third = elems[:, 2]
    in_third = np.bincount(third, minlength=n)
    newest = np.flatnonzero(in_third > 0)
    newest = newest[newest >= mesh.n_initial]
    if red_middles is None:
        red_middles = detect_red_middles(mesh)
    red_middles = np.asarray(red_middles, dtype=np.int64)
    as_apex = np.bincount(elems[red_middles - 1, 2], minlength=n) if red_middles.size else np.zeros(n, int)
    systematic = np.flatnonzero((as_apex > 0) & (as_apex == in_third))
    return newest, systematic


def adapted_valence(mesh: Mesh, red_middles) -> np.ndarray:
    """Per-node count of incident elements that are not red middles."""
    keep = np.ones(mesh.n_elements, dtype=bool)
    keep[np.asarray(red_middles, dtype=np.int64)] = False
    return np.bincount(mesh.elements[keep].ravel(), minlength=mesh.n_nodes)


def closure_block(mesh: Mesh, red_middles, blocked, mode: str = "local") -> np.ndarray:
    """Close a blocked node set over red middle elements.

    ``mode="local"``: whenever a node of a middle is blocked, block the
    middle's node opposite its reference edge.  ``mode="chain"``: block every
    node of such a middle, which propagates along whole chains of red
    patterns.  Returns the closed set as a sorted id array.
    """
    if mode not in CLOSURE_MODES:
        raise ValueError(f"unknown closure mode {mode!r}")
    mask = _node_mask(blocked, mesh.n_nodes)
    nodes = mesh.elements[np.asarray(red_middles, dtype=np.int64)]
    if nodes.size:
        _close(mask, nodes, mode)
    return np.flatnonzero(mask)


def _close(mask: np.ndarray, middle_nodes: np.ndarray, mode: str) -> None:
    # Each pass blocks at least one more node or stops, so at most n passes.
    for _ in range(mask.size + 1):
        hit = mask[middle_nodes].any(axis=1)
        targets = middle_nodes[hit].ravel() if mode == "chain" else middle_nodes[hit, 2]
        if mask[targets].all():
            return
        mask[targets] = True
    raise AssertionError("blocking closure did not terminate")


@dataclass(frozen=True, eq=False)
class CoarsenClassification:
    """Node and element classification computed before any element is merged.

    Id sets are sorted int arrays.  ``red_codes`` holds one code per entry of
    ``red_middles`` (0 none, 4 green, 5 blue_r, 6 blue_l, 7 keep) and
    ``green_pairs`` the first row of each green pair that merges.
    """

    newest_nodes: np.ndarray
    systematic_errors: np.ndarray
    red_middles: np.ndarray
    adapted_valence: np.ndarray
    candidates: np.ndarray
    admissible: np.ndarray
    blocked: np.ndarray
    hanging: np.ndarray
    red_codes: np.ndarray
    green_pairs: np.ndarray


def _green_groups(elems: np.ndarray, free_rows: np.ndarray, n_nodes: int):
    """Pair up rows sharing a third-column node; flag nodes that do not pair.

    Returns ``(first_rows, pair_nodes, bad)``: candidate pair starts, their
    node, and a node mask of failures (odd count, rows not consecutive, or
    not a bisection of one father).
    """
    z = elems[free_rows, 2]
    order = np.argsort(z, kind="stable")  # free_rows is ascending
    rows = free_rows[order]
    z = z[order]
    bad = np.zeros(n_nodes, dtype=bool)
    if rows.size == 0:
        return rows, z, bad
    counts = np.bincount(z, minlength=n_nodes)
    bad |= counts % 2 == 1
    starts = np.concatenate(([0], np.cumsum(counts)[:-1]))
    rank = np.arange(rows.size) - starts[z]
    first = np.flatnonzero((rank % 2 == 0) & ~bad[z])
    a, b = rows[first], rows[first + 1]
    ok = (b == a + 1) & (elems[a, 0] == elems[b, 1])
    bad[z[first[~ok]]] = True
    keep = ~bad[z[first]]
    return a[keep], z[first[keep]], bad


def classify(mesh: Mesh, marked_nodes, closure: str = "local", topo: EdgeTopology | None = None):
    """Run the node classification of a coarsening step without merging."""
    if closure not in CLOSURE_MODES:
        raise ValueError(f"unknown closure mode {closure!r}")
    elems = mesh.elements
    n, m = mesh.n_nodes, mesh.n_elements
    middles = detect_red_middles(mesh, topo)
    newest, systematic = detect_newest_nodes(mesh, middles)
    valence = adapted_valence(mesh, middles)

    is_newest = np.zeros(n, dtype=bool)
    is_newest[newest] = True
    marked = _node_mask(marked_nodes, n)
    cand = marked & is_newest & ((valence == 2) | (valence == 4))

    # Structural guard for the third-column rule: a node can only go if every
    # element around it belongs to a consecutive green pair or sits inside a
    # red quadruple with the node as one of the midpoints.
    in_quad = np.zeros(m, dtype=bool)
    for k in range(4):
        in_quad[middles - k] = True
    structural = cand.copy()
    if middles.size:
        structural[elems[middles - 3, 0]] = False
        structural[elems[middles - 2, 1]] = False
        structural[elems[middles - 1, 2]] = False
    free = np.flatnonzero(~in_quad)
    structural[elems[free, :2].ravel()] = False
    pair_rows, pair_nodes, bad = _green_groups(elems, free, n)
    structural &= ~bad

    blocked = ~structural
    if middles.size:
        _close(blocked, elems[middles], closure)
    adm = structural & ~blocked

    mid_nodes = elems[middles]
    codes = (~adm[mid_nodes[:, 0]]) * 1 + (~adm[mid_nodes[:, 1]]) * 2 + (~adm[mid_nodes[:, 2]]) * 4
    if np.any(~np.isin(codes, list(RED_TEMPLATES))):
        raise NotRefinedMesh("red pattern with an unreachable coarsening code")

    return CoarsenClassification(
        newest_nodes=newest,
        systematic_errors=systematic,
        red_middles=middles,
        adapted_valence=valence,
        candidates=np.flatnonzero(cand),
        admissible=np.flatnonzero(adm),
        blocked=np.flatnonzero(blocked),
        hanging=np.flatnonzero(blocked & is_newest),
        red_codes=codes.astype(np.int64),
        green_pairs=pair_rows[adm[pair_nodes]],
    )


def _merge_boundary(edges: np.ndarray, removed: np.ndarray) -> np.ndarray:
    if len(edges) == 0:
        return edges
    gone = removed[edges[:-1, 1]] & (edges[:-1, 1] == edges[1:, 0])
    out = edges.copy()
    k = np.flatnonzero(gone)
    out[k, 1] = edges[k + 1, 1]
    keep = np.ones(len(edges), dtype=bool)
    keep[k + 1] = False
    return out[keep]


def coarsen_rgb(mesh: Mesh, marked_nodes, closure: str = "local") -> Mesh:
    """Coarsen at the marked nodes and return the new mesh.

    Merged children are written back to their father's row so repeated
    coarsening sees the same storage layout that refinement produced.
    Removed nodes are dropped and the remaining ones keep their relative
    order.
    """
    cls = classify(mesh, marked_nodes, closure)
    if cls.admissible.size == 0:
        return mesh
    elems = mesh.elements
    m = mesh.n_elements

    counts = np.ones(m, dtype=np.int64)
    mids = cls.red_middles
    for k in range(3):
        counts[mids - k] = 0
    starts = mids - 3
    counts[starts] = _RED_COUNTS[cls.red_codes]
    counts[cls.green_pairs + 1] = 0
    offsets = np.concatenate(([0], np.cumsum(counts)[:-1]))

    out = np.empty((int(counts.sum()), 3), dtype=np.int64)
    plain = np.ones(m, dtype=bool)
    plain[mids - 3] = plain[mids - 2] = plain[mids - 1] = plain[mids] = False
    plain[cls.green_pairs] = plain[cls.green_pairs + 1] = False
    out[offsets[plain]] = elems[plain]

    g = cls.green_pairs
    out[offsets[g]] = np.column_stack([elems[g, 1], elems[g + 1, 0], elems[g, 0]])

    sym = {
        "v1": elems[starts, 0], "v2": elems[starts + 1, 1], "v3": elems[starts + 2, 2],
        "m23": elems[mids, 0], "m31": elems[mids, 1], "m12": elems[mids, 2],
    }
    for code, template in RED_TEMPLATES.items():
        sel = cls.red_codes == code
        if not sel.any():
            continue
        base = offsets[starts[sel]]
        for k, row in enumerate(template):
            out[base + k] = np.column_stack([sym[s][sel] for s in row])

    removed = np.zeros(mesh.n_nodes, dtype=bool)
    removed[cls.admissible] = True
    if removed[out].any():
        raise NotRefinedMesh("a removed node is still referenced after merging")
    new_id = np.cumsum(~removed) - 1
    boundaries = {}
    for name, edges in mesh.boundaries.items():
        merged = _merge_boundary(edges, removed)
        if len(merged) and removed[merged].any():
            raise NotRefinedMesh(f"boundary {name!r} is not stored as consecutive edge pieces")
        boundaries[name] = new_id[merged]
    return Mesh(mesh.coordinates[~removed], new_id[out], mesh.n_initial, boundaries)


def coarsen_marked_elements(mesh: Mesh, marked_elements, closure: str = "local") -> Mesh:
    """Mark every node of the marked elements and coarsen."""
    if isinstance(marked_elements, (set, frozenset)):
        marked_elements = sorted(marked_elements)
    ids = np.asarray(marked_elements if marked_elements is not None else [])
    if ids.dtype == bool:
        ids = np.flatnonzero(ids)
    ids = ids.astype(np.int64).ravel()
    return coarsen_rgb(mesh, np.unique(mesh.elements[ids]), closure)


def coarsen_to_initial(mesh: Mesh, max_steps: int | None = None, closure: str = "local"):
    """Coarsen with all nodes marked until nothing changes.

    Returns ``(mesh, steps)`` where ``steps`` counts the passes that removed
    nodes.  Raises NoProgress if the process stalls (or hits ``max_steps``)
    before only the initial nodes remain.
    """
    steps = 0
    while mesh.n_nodes > mesh.n_initial:
        if max_steps is not None and steps >= max_steps:
            raise NoProgress(f"{mesh.n_nodes - mesh.n_initial} non-initial nodes left after {steps} steps")
        coarser = coarsen_rgb(mesh, np.arange(mesh.n_nodes), closure)
        if coarser is mesh:
            raise NoProgress(f"stalled after {steps} steps with {mesh.n_nodes - mesh.n_initial} non-initial nodes")
        mesh = coarser
        steps += 1
    return mesh, steps
