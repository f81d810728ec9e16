"""Exception hierarchy shared by all qbattery modules."""


class QBatteryError(Exception):
    """Base class for all library errors."""


class NumericRangeError(QBatteryError):
    """A computation left the representable floating-point range."""


class ConvergenceError(QBatteryError):
    """An iterative kernel hit its iteration cap before converging."""


class DegenerateSpectrumError(QBatteryError):
    """Spectrum normalization is undefined (E_max == E_min)."""


class DegenerateGroundStateError(QBatteryError):
    """Ground state is not unique within the requested tolerance."""


class NormalizationUnderflowError(QBatteryError):
    """Evolved-state norm underflowed; parameter/time combination is unphysical."""


class ConsistencyError(QBatteryError):
    """A quantity that must be real carried a non-negligible imaginary part."""


class OracleDomainError(QBatteryError):
    """Closed-form expression evaluated at a singular parameter set."""
