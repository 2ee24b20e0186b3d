"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument lies outside the domain where a formula is defined."""


class SingularityError(DomainError):
    """A map was evaluated at one of its singular points (a pole or the origin)."""


class NumericalDegeneracyError(RuntimeError):
    """A Gram factorization lost positive-definiteness."""


class RejectionBudgetExceeded(RuntimeError):
    def __init__(self, step, proposals):
        super().__init__(f"rejection budget exhausted at step {step} after {proposals} proposals")
        self.step = step
        self.proposals = proposals


class CoincidentPointsError(ValueError):
    """Two points of a configuration coincide, so the Riesz energy is infinite."""


class MonteCarloAborted(RuntimeError):
    """A replicate failed; ``partial`` holds the energies computed before the failure."""

    def __init__(self, replicate, partial, cause):
        super().__init__(f"replicate {replicate} failed after {len(partial)} successes: {cause}")
        self.replicate = replicate
        self.partial = partial
        self.cause = cause
