"""Exception hierarchy shared by all modules."""


class SFAError(Exception):
    """Base class; carries a short machine-readable ``kind``."""

    kind = "error"

    def to_dict(self):
        return {"error": self.kind, "message": str(self)}


class DomainError(SFAError, ValueError):
    kind = "domain"


class NoSolutionError(SFAError):
    kind = "no_solution"


class ConvergenceError(SFAError):
    kind = "convergence"


class BranchJumpError(SFAError):
    kind = "branch_jump"


class HomotopyError(ConvergenceError):
    """Ip-homotopy stalled; ``fraction`` is the last Ip fraction that converged."""

    kind = "homotopy"

    def __init__(self, message, fraction):
        super().__init__(f"{message} (last good ip fraction {fraction:.6g})")
        self.fraction = fraction


class DegenerateSaddleError(SFAError):
    kind = "degenerate_saddle"


class RangeError(SFAError, ValueError):
    kind = "range"


class NonlinearityError(SFAError):
    kind = "nonlinearity"
