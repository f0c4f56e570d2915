"""Exception types shared across the library.

The CLI maps these to exit codes: GraphError -> 1 (invalid input),
AnalysisError -> 1 (precondition violated), NonConvergenceError -> 2
(numerical iteration did not reach tolerance).
"""


class GraphError(ValueError):
    """Malformed graph text or a violated graph invariant."""


class AnalysisError(RuntimeError):
    """An operation's precondition does not hold for the given input."""


class NonConvergenceError(AnalysisError):
    """An iterative solver exhausted its iteration budget.

    Carries the last residual so callers can report how close it got.
    """

    def __init__(self, message, residual=None, iterations=None):
        super().__init__(message)
        self.residual = residual
        self.iterations = iterations
