class ConmatError(ValueError):
    pass


class CycleError(ConmatError):
    pass


class UnknownElement(ConmatError):
    pass


class NotAnInterval(ConmatError):
    pass


class NotAdjacent(ConmatError):
    pass


class NotAField(ConmatError):
    pass


class DimensionMismatch(ConmatError):
    pass


class RingMismatch(ConmatError):
    pass


class NotAComplex(ConmatError):
    pass


class UnsupportedRing(ConmatError):
    pass


class InfeasibleDiagonal(ConmatError):
    pass


class InvalidAction(ConmatError):
    pass


class ShapeMismatch(ConmatError):
    pass


class InstanceError(ConmatError):
    pass
