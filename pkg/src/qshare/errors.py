"""Exception hierarchy shared by every qshare module."""


class QShareError(ValueError):
    """Base class for all input and numerical errors raised by qshare."""


class NotHermitian(QShareError):
    pass


class NoConvergence(QShareError):
    pass


class NotPSD(QShareError):
    pass


class WrongDimension(QShareError):
    pass


class LengthMismatch(QShareError):
    pass


class NotNormalized(QShareError):
    pass


class ZeroVector(QShareError):
    pass


class TooLarge(QShareError):
    pass


class NotUnitary(QShareError):
    pass


class BadPartyIndex(QShareError):
    pass


class SameParty(QShareError):
    pass


class BadDistribution(QShareError):
    pass


class MonogamyViolation(QShareError):
    """Sum of squared pairwise concurrences exceeds one.

    No physical pure state can trigger this, so it always points at a
    numerical or logic fault upstream.
    """


class OutOfRange(QShareError):
    pass


class DegenerateSlice(QShareError):
    pass


class Overflow(QShareError):
    """Exact factorial arithmetic requested beyond the supported party count."""
