"""Exception types shared across the package."""


class AnisolpError(Exception):
    """Base class for all package errors."""


class FieldShapeError(AnisolpError, ValueError):
    """Sample/coefficient array does not match the grid it claims to live on."""


class NonFiniteFieldError(AnisolpError, ValueError):
    """A field contains NaN or Inf where finite values are required."""


class ParameterRangeError(AnisolpError, ValueError):
    """A numeric parameter lies outside its admissible interval.

    The message always spells out the violated interval so that callers
    (and their logs) can see which hypothesis failed.
    """

    def __init__(self, name, value, interval, reason=""):
        self.name = name
        self.value = value
        self.interval = interval
        msg = f"{name}={value!r} outside admissible interval {interval}"
        if reason:
            msg += f" ({reason})"
        super().__init__(msg)


class MultiplierSingularityError(AnisolpError, ValueError):
    """A Fourier multiplier evaluated to NaN/Inf at a required wavevector."""

    def __init__(self, wavevector):
        self.wavevector = tuple(int(c) for c in wavevector)
        super().__init__(
            f"multiplier is not finite at wavevector k={self.wavevector}"
        )


class DivergenceError(AnisolpError, ValueError):
    """A velocity field violates the divergence-free gate."""


class MeanModeError(AnisolpError, ValueError):
    """Nonzero k=0 coefficient fed to a homogeneous norm with negative exponent."""


class GridMismatchError(AnisolpError, ValueError):
    """Two fields that must share a grid do not."""


class TimeOrderError(AnisolpError, ValueError):
    """Monitor snapshots arrived with non-increasing times."""


class ConfigError(AnisolpError, ValueError):
    """Run-configuration file failed to parse or validate."""

    def __init__(self, message, line_no=None):
        self.line_no = line_no
        if line_no is not None:
            message = f"line {line_no}: {message}"
        super().__init__(message)


class FieldFileError(AnisolpError, ValueError):
    """AFLD file is malformed (bad magic, header arithmetic, truncation)."""


class SolverAbort(AnisolpError, RuntimeError):
    """Time integration hit NaN/Inf; carries the last healthy snapshot."""

    def __init__(self, message, last_snapshot=None):
        self.last_snapshot = last_snapshot
        super().__init__(message)


class CFLWarning(UserWarning):
    """Advisory warning: the step violated the CFL heuristic dt*max|v|*k_max < 1."""
