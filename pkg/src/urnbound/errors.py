"""Exception types raised across the package.

Every error derives from UrnboundError so callers can catch the whole
family at once.  Validation errors carry enough context in the message
to locate the offending entry.
"""


class UrnboundError(Exception):
    """Base class for all errors raised by this package."""


# -- replacement-matrix validation ------------------------------------------

class NegativeEntry(UrnboundError):
    """A replacement-matrix entry is negative."""


class RowSumNotOne(UrnboundError):
    """A replacement-matrix row does not sum to 1 within tolerance."""


class NotIrreducible(UrnboundError):
    """The directed graph of positive entries is not strongly connected."""


# -- spectral structure ------------------------------------------------------

class ComplexSpectrum(UrnboundError):
    """The matrix has a nonreal eigenvalue beyond tolerance."""


class NotAnEigenvalue(UrnboundError):
    """The requested value is not an eigenvalue of the matrix."""


class NotRepeated(UrnboundError):
    """The eigenvalue is simple, so no generalized vector exists."""


class NotDefective(UrnboundError):
    """The repeated eigenvalue has a full eigenspace; use plain
    eigenvectors instead of a chain."""


class BasisSingular(UrnboundError):
    """The right-vector basis is dependent beyond tolerance."""


# -- decompositions and bounds ----------------------------------------------

class LambdaOutOfRange(UrnboundError):
    """Eigenvalue argument outside the admissible interval."""


class IndexOrder(UrnboundError):
    """Index arguments violate the required ordering (e.g. j > n)."""


class NotEigenpair(UrnboundError):
    """The supplied (vector, eigenvalue) pair fails the residual check."""


class NotJordanPair(UrnboundError):
    """The supplied pair of vectors does not satisfy the chain relations."""


class DimensionMismatch(UrnboundError):
    """Vector length does not match the number of colors."""


# -- verification -------------------------------------------------------------

class TooLarge(UrnboundError):
    """Exact enumeration would exceed the path budget."""


class GridMismatch(UrnboundError):
    """Bound grid and probability grid are not aligned."""
