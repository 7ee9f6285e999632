"""Exception types raised by tempomode."""


class TempomodeError(Exception):
    """Base class for all library errors."""


class GridError(TempomodeError, ValueError):
    """Invalid grid parameters."""


class GridMismatchError(TempomodeError, ValueError):
    """Two functions or kernels live on different grids."""


class BasisFitError(TempomodeError, ValueError):
    """A mode basis is not representable on the requested grid."""


class ClippedSupportError(TempomodeError, ValueError):
    """A joint amplitude has non-negligible weight at the grid boundary."""


class UnitarityError(TempomodeError, ValueError):
    """A kernel set violates block unitarity beyond tolerance."""


class TruncationError(TempomodeError, ValueError):
    """A Fock-space or photon-number truncation is too small."""


class EnsembleError(TempomodeError, ValueError):
    """An ensemble is unsuitable for the requested statistic."""


class StateError(TempomodeError, ValueError):
    """An input state is malformed or of an unsupported class."""
