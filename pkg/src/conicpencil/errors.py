"""Exception types shared across the package."""


class PencilError(Exception):
    pass


class ZeroVectorError(PencilError, ValueError):
    pass


class NonSymmetricError(PencilError, ValueError):
    pass


class ProportionalFormsError(PencilError, ValueError):
    pass


class IdenticallyZero(PencilError):
    pass


class SmoothnessRequired(PencilError):
    pass


class FactorizationInconclusive(PencilError):
    pass


class NotFound(PencilError):
    pass


class HypothesisViolated(PencilError, ValueError):
    pass


class BudgetExceeded(PencilError):
    pass


class OddPrimeRequired(PencilError, ValueError):
    pass


class SingularFiber(PencilError, ValueError):
    pass


class SingularForm(PencilError, ValueError):
    pass


class NotOnSurface(PencilError, ValueError):
    pass


class BadPrimeSkipped(PencilError):
    pass


class NonPrimitiveDirection(PencilError, ValueError):
    pass


class StabilizationUncertain(PencilError):
    pass
