"""Exception hierarchy shared across the package."""


class NfkitError(Exception):
    """Base class for all package-specific errors."""


class FieldMismatchError(NfkitError):
    """Two values from different coefficient fields were combined."""


class ReducibleMinimalPolynomialError(NfkitError):
    """Inversion found a nontrivial factor of the minimal polynomial.

    The field descriptor is invalid: the declared minimal polynomial is
    reducible, so the quotient ring has zero divisors.
    """


class PrecisionError(NfkitError):
    """A numeric enclosure could not be tightened enough at the requested
    working precision.  Callers may retry with a higher precision."""


class PrecisionFloorReached(PrecisionError):
    """Adaptive refinement hit the configured precision cap while two
    enclosures still overlap.  Comparison outcome is indeterminate."""


class DimensionMismatchError(NfkitError):
    """Operands live on spaces of different dimension."""


class InvalidInputError(NfkitError):
    """Construction input violates a structural precondition."""


class NotInPartialNormalFormError(NfkitError):
    """A blockwise step was asked to start from a field that still carries
    a nonresonant term below the block window."""

    def __init__(self, exponent, message=None):
        self.exponent = exponent
        super().__init__(message or f"nonresonant term below block window at {exponent}")


class NotACommutingFamilyError(NfkitError):
    """The compatibility relations between members of a claimed commuting
    family fail at some degree."""

    def __init__(self, witness, message=None):
        self.witness = witness
        super().__init__(message or f"compatibility violated at {witness}")


class InvalidDecompositionError(NfkitError):
    """An additive decomposition of the linear-part eigenvalues is
    inconsistent (dependent directions or wrong reconstruction)."""


class NotNormalFormError(NfkitError):
    """An operation that requires a normal form received a field carrying
    a nonresonant term."""


class InconsistentSystemError(NfkitError):
    """A linear solve that should be uniquely solvable turned out singular
    or inconsistent; indicates invalid input data."""


class ProblemSpecError(NfkitError):
    """A problem file could not be parsed into a valid instance."""

    def __init__(self, message, location=None):
        self.location = location
        super().__init__(f"{location}: {message}" if location else message)
