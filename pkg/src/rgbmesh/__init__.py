"""2D red-green-blue adaptive mesh refinement and history-free coarsening."""
from .mesh import (
    BadIndex, DegenerateElement, DuplicateNode, Mesh, MeshError, NoProgress,
    NonManifoldEdge, NotRefinedMesh, make_mesh, meshes_equal, signed_area,
)
from .topology import EdgeTopology, build_edge_topology, neighbors
from .refine import Pattern, closure_marks, refine_rgb, uniform_refine
from .coarsen import (
    CoarsenClassification, adapted_valence, classify, closure_block,
    coarsen_marked_elements, coarsen_rgb, coarsen_to_initial,
    detect_newest_nodes, detect_red_middles,
)

__all__ = [
    "BadIndex", "DegenerateElement", "DuplicateNode", "Mesh", "MeshError", "NoProgress",
    "NonManifoldEdge", "NotRefinedMesh", "make_mesh", "meshes_equal", "signed_area",
    "EdgeTopology", "build_edge_topology", "neighbors",
    "Pattern", "closure_marks", "refine_rgb", "uniform_refine",
    "CoarsenClassification", "adapted_valence", "classify", "closure_block",
    "coarsen_marked_elements", "coarsen_rgb", "coarsen_to_initial",
    "detect_newest_nodes", "detect_red_middles",
]
