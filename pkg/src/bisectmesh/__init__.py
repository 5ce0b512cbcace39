"""Conforming simplicial mesh refinement by colored newest-vertex bisection."""

from .mesh import (
    ConformityReport,
    Simplex,
    Triangulation,
    Vertex,
    VertexAttr,
    build_triangulation,
    check_conformity,
    edge_key,
)
from .coloring import ColorMap, greedy_color, max_valency, verify_coloring
from .rules import (
    BisectionResult,
    TaggedSimplex,
    bisect_generalized,
    bisect_tagged,
    decompose_generation,
    edge_gensharp,
    init_generalized,
    init_tagged,
    init_vertex_attrs,
)
from .refine import MarkHistory, RefineLog, point_mark, refine, refine_set, uniform_refine

__all__ = [
    "ColorMap",
    "ConformityReport",
    "BisectionResult",
    "MarkHistory",
    "RefineLog",
    "Simplex",
    "TaggedSimplex",
    "Triangulation",
    "Vertex",
    "VertexAttr",
    "bisect_generalized",
    "bisect_tagged",
    "build_triangulation",
    "check_conformity",
    "decompose_generation",
    "edge_gensharp",
    "edge_key",
    "greedy_color",
    "init_generalized",
    "init_tagged",
    "init_vertex_attrs",
    "max_valency",
    "point_mark",
    "refine",
    "refine_set",
    "uniform_refine",
    "verify_coloring",
]

__version__ = "0.1.0"
