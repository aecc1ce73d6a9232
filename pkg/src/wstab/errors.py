"""Exception types raised across the toolkit."""

from __future__ import annotations


class WstabError(Exception):
    """Base class for every error raised by this package."""


class MetricError(WstabError, ValueError):
    """A matrix failed one of the metric axioms.

    ``indices`` holds the witnessing indices of the first violation found.
    """

    axiom = "metric"

    def __init__(self, *indices: int, value: float | None = None):
        self.indices = tuple(int(i) for i in indices)
        self.value = value
        detail = f" (value {value:.6g})" if value is not None else ""
        super().__init__(f"{type(self).__name__}{self.indices}{detail}")


class NonZeroDiagonal(MetricError):
    axiom = "d(i, i) = 0"


class Asymmetry(MetricError):
    axiom = "d(i, j) = d(j, i)"


class NegativeEntry(MetricError):
    axiom = "d(i, j) >= 0"


class ZeroOffDiagonal(MetricError):
    axiom = "d(i, j) > 0 for i != j"


class TriangleViolation(MetricError):
    axiom = "d(i, k) <= d(i, j) + d(j, k)"


class TooLarge(WstabError, ValueError):
    """An exhaustive computation would exceed its configured cap."""

    def __init__(self, what: str, size: int, cap: int):
        self.what, self.size, self.cap = what, size, cap
        super().__init__(f"{what}: size {size} exceeds cap {cap}")


class EmptySubset(WstabError, ValueError):
    pass


class IndexOutOfRange(WstabError, IndexError):
    pass


class MismatchedSpaces(WstabError, ValueError):
    pass


class InvalidMeasure(WstabError, ValueError):
    pass


class PreconditionFailed(WstabError, ValueError):
    """A documented precondition does not hold.

    ``reason`` is a short tag such as ``"HausdorffTooLarge"``, ``"NotClose"``
    or ``"NotCertified"``; ``measured`` is the offending value when there is one.
    """

    def __init__(self, reason: str, measured: float | None = None, bound: float | None = None):
        self.reason, self.measured, self.bound = reason, measured, bound
        msg = reason
        if measured is not None:
            msg += f": measured {measured:.6g}"
        if bound is not None:
            msg += f" > allowed {bound:.6g}"
        super().__init__(msg)


class NotIsometric(WstabError, ValueError):
    pass


class NotInvariant(WstabError, ValueError):
    def __init__(self, subset, element):
        self.subset, self.element = tuple(subset), tuple(element)
        super().__init__(f"subset {self.subset} is not invariant under {self.element}")


class CapExceeded(WstabError, ValueError):
    def __init__(self, instance, detail: str):
        self.instance = instance
        super().__init__(f"instance {instance!r}: {detail}")


class IncompatibleGroup(WstabError, ValueError):
    pass
