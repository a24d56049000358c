"""Exception hierarchy shared by all zhuforge modules."""


class ZhuforgeError(Exception):
    """Base class for every error raised by this package."""


class WindowEmpty(ZhuforgeError):
    """A requested coefficient or result lies outside the known truncation window."""


class InvertNonUnit(ZhuforgeError):
    """Series inversion was asked of a series whose lowest coefficient is zero or unknown."""


class DomainMismatch(ZhuforgeError):
    """Two function elements from different coordinate domains were combined."""


class ZeroSpanGenerator(ZhuforgeError):
    """Span membership was asked against the zero function."""


class WindowInsufficient(ZhuforgeError):
    """A Laurent series does not cover every index contributing to an f-product."""


class WeightOverflow(ZhuforgeError):
    """A state exceeds the weight cutoff of a truncated ideal."""
