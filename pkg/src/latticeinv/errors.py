"""Exception hierarchy shared by all latticeinv modules."""


class LatticeInvError(ValueError):
    """Base class for every error raised by latticeinv."""


class InvalidCoordinate(LatticeInvError):
    pass


class IncompatibleSpec(LatticeInvError):
    pass


class IncompatibleBasis(LatticeInvError):
    pass


class InvalidTerm(LatticeInvError):
    pass


class InvalidInput(LatticeInvError):
    pass


class TooLarge(LatticeInvError):
    pass


class NotHermitian(LatticeInvError):
    pass


class DimensionMismatch(LatticeInvError):
    pass


class InvalidGeometry(LatticeInvError):
    pass
