"""Error and warning types shared across the package.

Every error carries the module it came from so the command line can report
provenance and pick an exit status.
"""


class QwaveError(Exception):
    module = "qwave"
    exit_code = 1


class ValidationError(QwaveError, ValueError):
    """Bad problem description. ``violations`` lists (field path, message) pairs."""

    module = "cli_runner"
    exit_code = 2

    def __init__(self, violations):
        if isinstance(violations, str):
            violations = [("", violations)]
        self.violations = list(violations)
        lines = [f"{path}: {msg}" if path else msg for path, msg in self.violations]
        super().__init__("; ".join(lines))


class ParseError(ValidationError):
    pass


class ParameterOutOfRange(QwaveError, ValueError):
    module = "function_spaces"
    exit_code = 2


class BOutOfRange(ParameterOutOfRange):
    pass


class QuadratureFailure(QwaveError, RuntimeError):
    module = "oscillatory_quadrature"
    exit_code = 3


class NonDecayingTrace(QwaveError, ValueError):
    module = "spectral_transforms"
    exit_code = 2


class InsufficientGrid(QwaveError, ValueError):
    module = "utm_linear_solver"
    exit_code = 2


class SupportViolation(QwaveError, ValueError):
    module = "function_spaces"
    exit_code = 2


class NoConvergence(QwaveError, RuntimeError):
    module = "nls_fixed_point"
    exit_code = 5

    def __init__(self, msg, log=None):
        super().__init__(msg)
        self.log = log


class FarWallLeak(QwaveError, RuntimeError):
    module = "reference_fd"
    exit_code = 4


class GridMismatch(QwaveError, ValueError):
    module = "reference_fd"
    exit_code = 2


class VerificationFailure(QwaveError, RuntimeError):
    module = "cli_runner"
    exit_code = 4


class TruncationWarning(UserWarning):
    pass


class SlowDecay(UserWarning):
    pass


class ResolutionWarning(UserWarning):
    pass


class CornerMismatchWarning(UserWarning):
    pass
