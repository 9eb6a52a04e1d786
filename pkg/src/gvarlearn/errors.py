"""Exception types raised by gvarlearn."""


class GvarError(Exception):
    """Base class for all library errors."""


class SingularScatterError(GvarError):
    """A scatter submatrix used for scoring is not positive definite."""

    def __init__(self, node, blanket, message=None):
        self.node = node
        self.blanket = tuple(blanket)
        if message is None:
            message = (
                f"scatter matrix restricted to family of node {node} "
                f"(blanket {list(self.blanket)}) is not positive definite"
            )
        super().__init__(message)


class SingularDesignError(GvarError):
    """A least-squares or GLS design is rank deficient."""


class DegenerateResidualsError(GvarError):
    """Residual sample covariance is not positive definite."""


class SimulationError(GvarError):
    """Random model generation failed to produce a stable model."""
