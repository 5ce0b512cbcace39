"""Exception hierarchy shared by all modules.

Every recoverable failure raises a subclass of :class:`MeshError`; the CLI
maps these to exit code 1 and the HTTP service to status 422.
"""


class MeshError(Exception):
    """Base class for all mesh/refinement errors."""


class DegenerateCell(MeshError):
    """Cell volume below the degeneracy tolerance."""


class IndexOutOfRange(MeshError):
    """Cell references a vertex index outside the vertex table."""


class DuplicateCell(MeshError):
    """The same vertex set appears twice in the cell list."""


class DuplicateVertexInCell(MeshError):
    """A cell lists the same vertex index more than once."""


class UnknownEdge(MeshError):
    """Edge key not present in the edge index."""


class UncoloredVertex(MeshError):
    """A vertex is missing a color where one is required."""


class InvalidColoring(MeshError):
    """Color map violates the distinct-colors-per-edge condition."""


class NonDistinctGenerations(MeshError):
    """Two vertices of one simplex carry the same generation."""


class EqualGenerations(NonDistinctGenerations):
    """Edge endpoints carry the same generation."""


class NotLive(MeshError):
    """Operation addressed a simplex that is no longer in the mesh."""


class NonTermination(MeshError):
    """Bisection budget exceeded; vertex attributes are likely corrupt."""


class PointOutside(MeshError):
    """Query point lies outside the meshed domain."""


class EmptyHistory(MeshError):
    """Mark history contains no marked simplices."""


class Degenerate(MeshError):
    """Simplex coordinates are affinely dependent."""


class SingularMatrix(MeshError):
    """Matrix is singular or too ill-conditioned for the check."""


class InvalidPermutation(MeshError):
    """Sequence is not a permutation of 1..n."""
