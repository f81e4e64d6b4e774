"""Exception types raised across the package."""


class PrivacyCalcError(ValueError):
    """Base class for invalid inputs to the privacy calculus."""


class NotNormalized(PrivacyCalcError):
    pass


class NegativeMass(PrivacyCalcError):
    pass


class ZeroPriorRow(PrivacyCalcError):
    pass


class ZeroColumn(PrivacyCalcError):
    pass


class UnknownLabel(PrivacyCalcError, KeyError):
    pass


class SupportMismatch(PrivacyCalcError):
    pass


class NotAbsolutelyContinuous(PrivacyCalcError):
    pass


class DegenerateMarginal(PrivacyCalcError):
    pass


class MomentInconsistent(PrivacyCalcError):
    pass


class NonNumericLabels(PrivacyCalcError):
    pass


class AlphaOutOfRange(PrivacyCalcError):
    pass


class BadBudget(PrivacyCalcError):
    pass


class NonPositiveReference(PrivacyCalcError):
    pass


class EmptySamples(PrivacyCalcError):
    pass


class ZeroDenominator(PrivacyCalcError):
    """Ratio objective with ``lambda == 0`` and an all-zero critic on the reference set."""


class BadPmf(PrivacyCalcError):
    pass


class DivergedLoss(RuntimeError):
    """Training produced a non-finite objective."""
