"""Exception types shared across the package.

The CLI maps these onto exit codes: ``InputError`` -> 1,
``InvariantError`` -> 2, ``PrecisionError`` -> 3.
"""


class InputError(ValueError):
    """Malformed or out-of-range input supplied by the caller."""


class InvariantError(RuntimeError):
    """An internal consistency check failed; indicates a bug."""


class PrecisionError(ArithmeticError):
    """A truncated series ran out of known coefficients.

    ``required`` is a suggested truncation order that would have
    sufficed, when one can be estimated.
    """

    def __init__(self, message, required=None):
        super().__init__(message)
        self.required = required
