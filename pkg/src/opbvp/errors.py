"""Exception and warning classes raised across the package."""


class BvpError(Exception):
    """Base class for all solver errors."""


class InvalidOperator(BvpError, ValueError):
    """Operator matrix with non-finite entries or wrong rank."""


class ExpressionSyntaxError(BvpError, SyntaxError):
    """Malformed expression; ``offset`` is the byte offset of the problem."""

    def __init__(self, message, offset, source=""):
        super().__init__(message)
        self.msg = message
        self.offset = offset
        self.source = source

    def __str__(self):
        return f"{self.msg} at offset {self.offset}"


class EvalError(BvpError, ArithmeticError):
    """Expression evaluated to a non-finite value."""


class NonFiniteState(BvpError, FloatingPointError):
    """Propagated state overflowed or became NaN."""


class IllConditioned(BvpError):
    """Evolution operator too ill-conditioned for a stable solve."""


class DimensionError(BvpError, ValueError):
    """Shapes of boundary data, trajectories or operators disagree."""


class NotSolvable(BvpError):
    """The linear problem violates its solvability condition."""


class BranchMismatch(BvpError):
    """Requested series branch contradicts the solvability classification."""


class BifurcationConditionFailed(BvpError):
    """The projector product P_N(B0*) P_N(Q*) does not vanish."""


class NotSolvableAtOrder(BvpError):
    """A coefficient problem of the perturbation hierarchy is not solvable."""

    def __init__(self, order, defect, tol):
        super().__init__(f"order {order}: solvability defect {defect:.3e} exceeds tol {tol:.3e}")
        self.order = order
        self.defect = defect
        self.tol = tol


class ConfigError(BvpError, ValueError):
    """Invalid problem configuration; ``path`` names the offending field."""

    def __init__(self, path, message):
        super().__init__(f"{path}: {message}")
        self.path = path


class DivergenceWarning(RuntimeWarning):
    """Empirical ratio test suggests the truncated series does not converge."""
