"""Exception types raised across the toolkit.

Every failure the library reports on purpose derives from :class:`SurfretError`,
so batch drivers can catch one base class and log the concrete type name.
"""


class SurfretError(Exception):
    """Base class for all toolkit errors."""


# -- file parsing -----------------------------------------------------------

class VtkError(SurfretError, ValueError):
    """Base class for surface-file parse failures."""


class MalformedHeader(VtkError):
    pass


class UnsupportedFormat(VtkError):
    pass


class CountMismatch(VtkError):
    pass


class NonFiniteValue(VtkError):
    pass


class IndexOutOfRange(VtkError):
    pass


class UnsupportedCellType(VtkError):
    pass


class MalformedData(VtkError):
    """Token or byte stream that cannot be decoded as the declared block."""


class InvalidMesh(SurfretError, ValueError):
    """Arrays that violate a SurfaceMesh invariant."""


# -- geometry and descriptors -----------------------------------------------

class MissingChannel(SurfretError):
    """A potential-dependent operation was given data without potentials."""


class EmptyMesh(SurfretError, ValueError):
    pass


class EmptySurface(SurfretError, ValueError):
    """No face with positive area to sample from."""


class EmptyGrid(SurfretError, ValueError):
    pass


class UnsupportedDimension(SurfretError, ValueError):
    pass


class OrderMismatch(SurfretError, ValueError):
    pass


class CoincidentPoints(SurfretError, ValueError):
    pass


class TooFewPoints(SurfretError, ValueError):
    pass


# -- retrieval, scoring, pipeline -------------------------------------------

class DimensionMismatch(SurfretError, ValueError):
    pass


class DuplicateId(SurfretError, ValueError):
    pass


class EmptyIndex(SurfretError, ValueError):
    pass


class EmptyMatrix(SurfretError, ValueError):
    pass


class MissingPrediction(SurfretError):
    def __init__(self, ids):
        self.ids = sorted(ids)
        super().__init__("missing predictions for: " + ", ".join(self.ids))


class MethodMismatch(SurfretError, ValueError):
    pass


class CacheFormatError(SurfretError, ValueError):
    pass


class ManifestError(SurfretError, ValueError):
    pass
