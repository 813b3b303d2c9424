"""Error types shared across the package."""


class InvalidArgument(ValueError):
    """A caller-supplied value violates a documented precondition."""


class NumericalFailure(RuntimeError):
    """A computation produced NaN/Inf or otherwise left the valid numeric domain.

    ``step_index`` identifies the integration step (or ensemble member) at
    which the failure was detected, when that is known.
    """

    def __init__(self, message: str, step_index: int | None = None):
        super().__init__(message)
        self.step_index = step_index
