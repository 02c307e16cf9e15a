"""Exception hierarchy with stable machine-readable codes.

Every domain failure maps to one code from the documented enum so the
CLI (exit code 3) and the HTTP service (status 422) can surface it
without string matching.
"""

ERROR_CODES = (
    "degenerate_pass_rate",
    "flat_frontier",
    "ambiguous_equilibrium",
    "insufficient_class_samples",
    "unstable_normalization",
    "invalid_input",
)


class SchemaError(Exception):
    """A scenario document violates the published schema.

    Carries a JSON-pointer-style path to the offending field.
    """

    def __init__(self, pointer: str, message: str):
        self.pointer = pointer
        super().__init__(f"{pointer}: {message}")


class DomainError(Exception):
    """Base class for well-formed requests that fail on domain grounds."""

    code = "invalid_input"


class InvalidInputError(DomainError):
    code = "invalid_input"


class ConfigurationError(InvalidInputError):
    """A model or policy object is internally inconsistent (e.g. s outside 1..q)."""


class UnsupportedModelError(InvalidInputError):
    """Operation not implemented for this pass-model variant; message names it."""


class DegeneratePassRateError(DomainError):
    """Pass probability pinned at 0 or 1: the bar is mistuned for this quality."""

    code = "degenerate_pass_rate"


class FlatFrontierError(DomainError):
    """Slope of the pass probability is numerically zero: no finite bounty works."""

    code = "flat_frontier"


class AmbiguousEquilibriumError(DomainError):
    """Gap function changes sign more than once; carries candidate brackets."""

    code = "ambiguous_equilibrium"

    def __init__(self, message: str, brackets=()):
        self.brackets = tuple(brackets)
        super().__init__(message)


class InsufficientClassSamplesError(DomainError):
    """A Monte-Carlo class (pass or fail) or cohort class is empty."""

    code = "insufficient_class_samples"


class UnstableNormalizationError(DomainError):
    """Per-dollar normalization divides by a vanishing expected payout."""

    code = "unstable_normalization"


class UndefinedRateError(InvalidInputError):
    """Resource exchange rate is undefined because the cash shadow price is zero."""


class ConvergenceError(DomainError):
    """An iterative numerical scheme failed to converge within its budget."""

    code = "invalid_input"
