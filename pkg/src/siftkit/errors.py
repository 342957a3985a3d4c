"""Exception types shared across the package."""


class SiftKitError(Exception):
    """Base class for all package-specific errors."""


class InvalidSpecError(SiftKitError, ValueError):
    """A signal/noise specification violates its stated conditions."""


class GridMismatchError(SiftKitError, ValueError):
    """Two objects that must share a sample grid do not."""


class UndefinedSNRError(SiftKitError, ZeroDivisionError):
    """SNR requested against a zero-norm noise signal."""


class UndefinedErrorMetric(SiftKitError, ZeroDivisionError):
    """Relative error requested against a zero-norm reference."""


class InvalidProfileError(SiftKitError, ValueError):
    """A bandwidth profile is non-positive, non-finite or misaligned."""


class InvalidWindowError(SiftKitError, ValueError):
    """A spectral window is malformed or longer than the signal."""


class InvalidBandError(SiftKitError, ValueError):
    """A frequency band is empty, negative or beyond Nyquist."""


class InvalidCurveError(SiftKitError, ValueError):
    """A frequency curve is out of grid range or non-positive."""


class NoCurveError(SiftKitError, ValueError):
    """No admissible curve exists (for example, an all-zero grid)."""


class ConfigError(SiftKitError, ValueError):
    """A benchmark/CLI configuration is invalid."""
