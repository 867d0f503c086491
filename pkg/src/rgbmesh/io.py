"""Plain-text mesh files and SVG rendering.

A mesh directory holds ``coordinates.dat`` (two reals per line),
``elements.dat`` (three 1-based node indices per line) and optionally one
``boundary_<name>.dat`` per boundary part (two 1-based indices per line).
The number of initial nodes is stored as a ``# n_initial = K`` comment in
the coordinates file; without it every node counts as initial.
"""
from __future__ import annotations

import re
from pathlib import Path
from typing import Mapping

import numpy as np

from .mesh import Mesh, MeshError, make_mesh

_N_INITIAL = re.compile(r"#\s*n_initial\s*=\s*(\d+)\s*$")


class ParseError(MeshError):
    pass


def _parse_table(text: str, ncols: int, kind, label: str) -> np.ndarray:
    rows = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.replace(",", " ").split()
        if len(parts) != ncols:
            raise ParseError(f"{label}:{lineno}: expected {ncols} columns, got {len(parts)}")
        try:
            rows.append([kind(p) for p in parts])
        except ValueError as exc:
            raise ParseError(f"{label}:{lineno}: {exc}") from None
    return np.array(rows, dtype=float if kind is float else np.int64).reshape(-1, ncols)


def _n_initial(text: str):
    for raw in text.splitlines():
        m = _N_INITIAL.match(raw.strip())
        if m:
            return int(m.group(1))
    return None


def loads_dat(bundle: Mapping[str, str]) -> Mesh:
    """Build a mesh from in-memory file texts keyed by file stem."""
    try:
        ctext, etext = bundle["coordinates"], bundle["elements"]
    except KeyError as exc:
        raise ParseError(f"missing {exc.args[0]!r} table") from None
    coords = _parse_table(ctext, 2, float, "coordinates")
    elems = _parse_table(etext, 3, int, "elements") - 1
    boundaries = {
        key[len("boundary_"):]: _parse_table(text, 2, int, key) - 1
        for key, text in sorted(bundle.items())
        if key.startswith("boundary_")
    }
    return make_mesh(coords, elems, _n_initial(ctext), boundaries)


def dumps_dat(mesh: Mesh) -> dict[str, str]:
    """File texts for ``mesh``, keyed by file stem."""
    lines = [f"# n_initial = {mesh.n_initial}"]
    lines += [f"{x!r} {y!r}" for x, y in mesh.coordinates.tolist()]
    out = {
        "coordinates": "\n".join(lines) + "\n",
        "elements": "".join(f"{a} {b} {c}\n" for a, b, c in (mesh.elements + 1).tolist()),
    }
    for name, edges in mesh.boundaries.items():
        out[f"boundary_{name}"] = "".join(f"{a} {b}\n" for a, b in (edges + 1).tolist())
    return out


def read_dat(source) -> Mesh:
    """Read a mesh from a directory path or from a mapping of file texts."""
    if isinstance(source, Mapping):
        return loads_dat(source)
    d = Path(source)
    if not d.is_dir():
        raise FileNotFoundError(f"mesh directory {d} does not exist")
    return loads_dat({p.stem: p.read_text() for p in sorted(d.glob("*.dat"))})


def write_dat(mesh: Mesh, directory=None) -> dict[str, str]:
    """Return the file texts and, if ``directory`` is given, write them there."""
    bundle = dumps_dat(mesh)
    if directory is not None:
        d = Path(directory)
        d.mkdir(parents=True, exist_ok=True)
        for stale in d.glob("boundary_*.dat"):
            stale.unlink()
        for stem, text in bundle.items():
            (d / f"{stem}.dat").write_text(text)
    return bundle


OVERLAYS = ("ref", "middles", "newest")


def render_svg(mesh: Mesh, overlays=(), size: int = 600, margin: int = 10) -> str:
    """SVG drawing of the mesh.

    ``overlays`` may contain ``"ref"`` (a short tick inside each element,
    parallel to its reference edge), ``"middles"`` (fill red middle
    elements) and ``"newest"`` (dot on every newest node).
    """
    unknown = set(overlays) - set(OVERLAYS)
    if unknown:
        raise ValueError(f"unknown overlays {sorted(unknown)}; choose from {OVERLAYS}")
    xy = mesh.coordinates
    lo = xy.min(axis=0) if len(xy) else np.zeros(2)
    hi = xy.max(axis=0) if len(xy) else np.ones(2)
    scale = (size - 2 * margin) / max(float((hi - lo).max()), 1e-300)
    w, h = (hi - lo) * scale + 2 * margin

    def tr(p):
        p = np.asarray(p, dtype=float)
        return np.stack([(p[..., 0] - lo[0]) * scale + margin, (hi[1] - p[..., 1]) * scale + margin], axis=-1)

    fill = np.full(mesh.n_elements, "none", dtype=object)
    if "middles" in overlays or "newest" in overlays:
        from .coarsen import detect_newest_nodes, detect_red_middles

        middles = detect_red_middles(mesh)
    if "middles" in overlays:
        fill[middles] = "#f4a6a6"

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{w:.1f}" height="{h:.1f}" '
        f'viewBox="0 0 {w:.1f} {h:.1f}">',
        '<g stroke="black" stroke-width="1" stroke-linejoin="round">',
    ]
    pts = tr(xy[mesh.elements]) if mesh.n_elements else np.empty((0, 3, 2))
    for k, tri in enumerate(pts):
        coords = " ".join(f"{x:.3f},{y:.3f}" for x, y in tri)
        out.append(f'<polygon id="e{k + 1}" points="{coords}" fill="{fill[k]}"/>')
    out.append("</g>")
    if "ref" in overlays and mesh.n_elements:
        # Tick from 1/4 to 3/4 along the reference edge, pulled towards the centroid.
        out.append('<g stroke="#1f5fbf" stroke-width="1.5">')
        cen = pts.mean(axis=1)
        a = pts[:, 0] + 0.2 * (cen - pts[:, 0])
        b = pts[:, 1] + 0.2 * (cen - pts[:, 1])
        for p, q in zip(0.75 * a + 0.25 * b, 0.25 * a + 0.75 * b):
            out.append(f'<line x1="{p[0]:.3f}" y1="{p[1]:.3f}" x2="{q[0]:.3f}" y2="{q[1]:.3f}"/>')
        out.append("</g>")
    if "newest" in overlays:
        newest, _ = detect_newest_nodes(mesh, middles)
        out.append('<g fill="white" stroke="black" stroke-width="1">')
        for x, y in tr(xy[newest]):
            out.append(f'<circle cx="{x:.3f}" cy="{y:.3f}" r="3"/>')
        out.append("</g>")
    out.append("</svg>")
    return "\n".join(out) + "\n"
