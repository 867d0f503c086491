"""Sample meshes and the refine/coarsen experiments driven by the CLI."""
from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .coarsen import coarsen_rgb
from .marking import Circle, mark_circle
from .mesh import Mesh, NoProgress, make_mesh
from .refine import refine_rgb, uniform_refine

MIN_AREA = 1e-8
DEFAULT_CENTERS = ((0.759, 0.545), (1.069, 0.359), (1.379, 0.172))
DEFAULT_RADIUS = 0.3


def square2() -> Mesh:
    """Unit square split along the diagonal; both reference edges on the diagonal."""
    return make_mesh([(0, 0), (1, 0), (1, 1), (0, 1)], [(0, 2, 3), (2, 0, 1)])


def strip4() -> Mesh:
    """[0, 2] x [0, 1] in four triangles, reference edges on the two diagonals."""
    return make_mesh(
        [(0, 0), (1, 0), (2, 0), (0, 1), (1, 1), (2, 1)],
        [(0, 4, 3), (4, 0, 1), (1, 5, 4), (5, 1, 2)],
    )


def hexagon6() -> Mesh:
    """Six triangles around the origin, every reference edge shared with its partner."""
    return make_mesh(
        [(0, 0), (1, -1), (2, 0), (1, 1), (-1, 1), (-2, 0), (-1, -1)],
        [(2, 0, 1), (0, 2, 3), (3, 4, 0), (5, 0, 4), (0, 5, 6), (6, 1, 0)],
    )


def hexagon_loop() -> Mesh:
    """Refinement of :func:`hexagon6` with a closed chain of red patterns.

    Five of the six triangles are red-refined, the sixth becomes blue.  The
    centre node then has adapted valence 5 and sits on a loop of red middle
    elements.
    """
    return refine_rgb(hexagon6(), [0, 1, 2, 3, 5])


def square_isolated() -> Mesh:
    """Unit square where one element's reference edge is its neighbour's non-reference edge."""
    return make_mesh([(0, 0), (1, 0), (1, 1), (0, 1)], [(0, 2, 3), (0, 1, 2)])


def strip4_not_weak_bdd() -> Mesh:
    """Variant of :func:`strip4` with two edge-adjacent isolated elements."""
    return make_mesh(
        [(0, 0), (1, 0), (2, 0), (0, 1), (1, 1), (2, 1)],
        [(0, 4, 3), (1, 4, 0), (1, 5, 4), (5, 1, 2)],
    )


def grid(k: int, width: float = 1.0) -> Mesh:
    """k x k squares on [0, width]^2, each split along its diagonal (the shared reference edge)."""
    if k < 1:
        raise ValueError("k must be positive")
    t = np.linspace(0.0, width, k + 1)
    x, y = np.meshgrid(t, t)
    coords = np.column_stack([x.ravel(), y.ravel()])
    i, j = np.meshgrid(np.arange(k), np.arange(k), indexing="xy")
    sw = (j * (k + 1) + i).ravel()
    se, nw = sw + 1, sw + k + 1
    ne = nw + 1
    elems = np.empty((2 * k * k, 3), dtype=np.int64)
    elems[0::2] = np.column_stack([sw, ne, nw])
    elems[1::2] = np.column_stack([ne, sw, se])
    return make_mesh(coords, elems)


INITIAL_MESHES = {
    "square2": square2,
    "strip4": strip4,
    "hexagon6": hexagon6,
    "square_isolated": square_isolated,
    "grid3": lambda: grid(3),
}


@dataclass
class RatioRow:
    step: int
    n_elements: int
    n_nodes: int
    rho_elem: float | None
    rho_coord: float | None


@dataclass
class RatioTable:
    """Counts per step and the ratio to the previous step.

    For a coarsening table the ratio is inverted (previous over current) so
    that both kinds of table report values of at least one.
    """

    coarsening: bool = False
    rows: list[RatioRow] = field(default_factory=list)

    def _ratio(self, before: int, after: int) -> float:
        return before / after if self.coarsening else after / before

    def append(self, step: int, mesh: Mesh):
        prev = self.rows[-1] if self.rows else None
        self.rows.append(RatioRow(
            step, mesh.n_elements, mesh.n_nodes,
            None if prev is None else self._ratio(prev.n_elements, mesh.n_elements),
            None if prev is None else self._ratio(prev.n_nodes, mesh.n_nodes),
        ))

    @property
    def steps(self) -> int:
        return max(len(self.rows) - 1, 0)

    def geometric_means(self):
        """``(rho_elem, rho_coord)`` averaged geometrically over all steps; ``None`` if empty."""
        if self.steps == 0:
            return None
        first, last = self.rows[0], self.rows[-1]
        e = self._ratio(first.n_elements, last.n_elements) ** (1.0 / self.steps)
        c = self._ratio(first.n_nodes, last.n_nodes) ** (1.0 / self.steps)
        return e, c

    def to_csv(self, label: str) -> str:
        lines = []
        for r in self.rows:
            re_ = "" if r.rho_elem is None else f"{r.rho_elem:.4f}"
            rc = "" if r.rho_coord is None else f"{r.rho_coord:.4f}"
            lines.append(f"{label},{r.step},{r.n_elements},{r.n_nodes},{re_},{rc}")
        return "\n".join(lines)


@dataclass
class RatioResult:
    refine: RatioTable
    coarsen: RatioTable
    recovered: Mesh

    @property
    def M(self) -> int:
        return self.coarsen.steps

    def to_csv(self) -> str:
        out = ["phase,step,n_elements,n_nodes,rho_elem,rho_coord"]
        for label, table in (("refine", self.refine), ("coarsen", self.coarsen)):
            if table.rows:
                out.append(table.to_csv(label))
        for label, table in (("refine", self.refine), ("coarsen", self.coarsen)):
            gm = table.geometric_means()
            if gm:
                out.append(f"{label}_mean,{table.steps},,,{gm[0]:.4f},{gm[1]:.4f}")
        return "\n".join(out) + "\n"


def _marks(mesh: Mesh, circles, min_area: float):
    if circles == "all":
        return np.arange(mesh.n_elements)
    ids = [mark_circle(mesh, c, min_area) for c in circles]
    return np.unique(np.concatenate(ids)) if ids else np.empty(0, dtype=np.int64)


def run_ratio_experiment(initial: Mesh, circles=None, levels: int = 10, min_area: float = MIN_AREA) -> RatioResult:
    """Refine ``levels`` times along the circle(s), then coarsen everything back.

    ``circles`` is a Circle, a list of Circles, or ``"all"`` for uniform
    marking.  The default is a circle of radius 0.3 around the first default
    trajectory point.
    """
    if circles is None:
        circles = [Circle(DEFAULT_CENTERS[0], DEFAULT_RADIUS)]
    elif isinstance(circles, Circle):
        circles = [circles]
    refine = RatioTable()
    mesh = initial
    if levels > 0:
        refine.append(0, mesh)
        for i in range(1, levels + 1):
            mesh = refine_rgb(mesh, _marks(mesh, circles, min_area))
            refine.append(i, mesh)
    coarsen = RatioTable(coarsening=True)
    if mesh.n_nodes > mesh.n_initial:
        coarsen.append(0, mesh)
        j = 0
        while mesh.n_nodes > mesh.n_initial:
            coarser = coarsen_rgb(mesh, np.arange(mesh.n_nodes))
            if coarser is mesh:
                raise NoProgress(f"coarsening stalled after {j} steps")
            mesh = coarser
            j += 1
            coarsen.append(j, mesh)
    return RatioResult(refine, coarsen, mesh)


@dataclass
class Frame:
    """One time step: the mesh after the refinement phase and after the coarsening phase."""

    t: int
    center: tuple[float, float]
    refined: Mesh
    coarsened: Mesh


def trajectory_points(waypoints, steps: int) -> list[tuple[float, float]]:
    """``steps`` points spaced evenly along the polyline through ``waypoints``."""
    w = np.asarray(waypoints, dtype=float).reshape(-1, 2)
    if steps <= 0:
        return []
    if len(w) == 1 or steps == 1:
        return [tuple(w[0])] * steps
    seg = np.hypot(*np.diff(w, axis=0).T)
    s = np.concatenate(([0.0], np.cumsum(seg)))
    targets = np.linspace(0.0, s[-1], steps)
    return [(float(np.interp(t, s, w[:, 0])), float(np.interp(t, s, w[:, 1]))) for t in targets]


def run_moving_circle(initial: Mesh, trajectory=DEFAULT_CENTERS, n_min: int = 100, n_max: int = 10_000,
                      steps: int = 3, radius: float = DEFAULT_RADIUS, min_area: float = MIN_AREA) -> list[Frame]:
    """Refine along a moving circle, coarsening back below ``n_min`` nodes after each step.

    Refinement stops once the mesh has at least ``n_max`` nodes or no
    element is both hit by the circle and above the area floor.  Coarsening
    stops once fewer than ``n_min`` nodes remain or nothing more can be
    removed.  Returns one :class:`Frame` per time step; ``steps=0`` gives an
    empty list.
    """
    if not n_min < n_max:
        raise ValueError("n_min must be smaller than n_max")
    frames = []
    mesh = initial
    for t, center in enumerate(trajectory_points(trajectory, steps)):
        circle = Circle(center, radius)
        while mesh.n_nodes < n_max:
            marks = mark_circle(mesh, circle, min_area)
            if marks.size == 0:
                break
            mesh = refine_rgb(mesh, marks)
        refined = mesh
        while mesh.n_nodes >= n_min:
            coarser = coarsen_rgb(mesh, np.arange(mesh.n_nodes))
            if coarser is mesh:
                break
            mesh = coarser
        frames.append(Frame(t, center, refined, mesh))
    return frames


def scalability_mesh(target_nodes: int, seed: int = 0) -> Mesh:
    """Refined grid with roughly ``target_nodes`` nodes and a mix of patterns.

    One uniform level on a grid, then random partial refinements until the
    node count is within 2% of the target, so a coarsen-all pass has red,
    green and blue patterns to undo.
    """
    k = max(1, int((np.sqrt(target_nodes / 1.2) - 1) // 2))
    mesh = uniform_refine(grid(k), 1)
    rng = np.random.default_rng(seed)
    while mesh.n_nodes < 0.98 * target_nodes:
        count = max(1, int((target_nodes - mesh.n_nodes) / 3))
        mesh = refine_rgb(mesh, rng.choice(mesh.n_elements, size=min(count, mesh.n_elements), replace=False))
    return mesh


def run_scalability(sizes, repeats: int = 20, seed: int = 0):
    """Mean wall time of one coarsen-all pass, as rows ``(n_nodes, mean_seconds)``."""
    rows = []
    for size in sizes:
        mesh = scalability_mesh(int(size), seed)
        marks = np.arange(mesh.n_nodes)
        coarsen_rgb(mesh, marks)  # warm-up
        times = []
        for _ in range(repeats):
            t0 = time.perf_counter()
            coarsen_rgb(mesh, marks)
            times.append(time.perf_counter() - t0)
        rows.append((mesh.n_nodes, float(np.mean(times))))
    return rows
