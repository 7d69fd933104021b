"""Exception types raised across the package."""


class IWTMarkError(Exception):
    """Base class for all errors raised by iwtmark."""


# image_io

class PGMError(IWTMarkError):
    pass


class MalformedHeader(PGMError):
    pass


class UnsupportedMaxval(PGMError):
    pass


class TruncatedData(PGMError):
    pass


# lifting

class EmptySignal(IWTMarkError):
    pass


class LengthMismatch(IWTMarkError):
    pass


class TooManyLevels(IWTMarkError):
    pass


class InconsistentDimensions(IWTMarkError):
    pass


# histogram

class EmptyHistogram(IWTMarkError):
    pass


class CoefficientOverflow(IWTMarkError):
    pass


# codec

class ZeroPointOccupied(IWTMarkError):
    pass


class BitCountExhausted(IWTMarkError):
    pass


class InsufficientCapacity(IWTMarkError):
    """The pass plan cannot place every payload bit.

    ``capacity`` holds the number of bits that could have been placed.
    """

    def __init__(self, requested: int, capacity: int):
        self.requested = requested
        self.capacity = capacity
        super().__init__(
            f"payload of {requested} bits exceeds achievable capacity of {capacity} bits"
        )


class PixelRangeOverflow(IWTMarkError):
    def __init__(self, count: int, lo: int, hi: int):
        self.count = count
        self.lo = lo
        self.hi = hi
        super().__init__(
            f"{count} reconstructed pixels outside [0, 255] (min {lo}, max {hi})"
        )


class ChecksumMismatch(IWTMarkError):
    pass


class DimensionMismatch(IWTMarkError):
    pass


class KeyFormatError(IWTMarkError):
    pass
