"""Exception types shared across the package.

The CLI maps these onto process exit codes: configuration problems exit
with 2, numerical instability with 3.
"""


class ConfigError(ValueError):
    """A configuration value is missing, unknown, or violates an invariant."""


class MaskClosureError(ValueError):
    """A mask is not closed under the transform stencils it is used with."""


class InstabilityError(RuntimeError):
    """The time integration produced non-finite field values.

    Attributes
    ----------
    step:
        Index of the time step at which the non-finite value was detected.
    """

    def __init__(self, step: int, message: str | None = None):
        self.step = step
        super().__init__(message or f"non-finite field values at step {step}")
