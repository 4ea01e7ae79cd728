"""Exception types raised by the library."""


class EntchainError(Exception):
    """Base class for all library errors."""


class UnsupportedDimension(EntchainError):
    """Local dimension is not one of the supported values (2 or 3)."""


class NotHermitian(EntchainError):
    """A matrix that must be Hermitian is not, beyond tolerance."""


class ShapeError(EntchainError):
    """Array arguments have inconsistent shapes or indices are out of range."""


class DegenerateTransfer(EntchainError):
    """The transfer matrix has a (near-)degenerate dominant eigenvalue.

    Signals a symmetry-broken / cat-like state whose thermodynamic-limit
    reduced density matrices are not defined by a single fixed-point pair.
    """


class GaugeSingular(EntchainError):
    """Canonicalization gauge transform is numerically singular."""


class NumericalBreakdown(EntchainError):
    """A dense linear-algebra kernel (SVD/eig) failed to converge."""


class PatternTooLarge(EntchainError):
    """Requested site pattern spans more sites than the configured cap."""


class TooLarge(EntchainError):
    """Requested dense problem exceeds the size cap."""
