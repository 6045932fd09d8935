"""Exception hierarchy shared by all realize modules.

Every error raised on a documented failure path derives from RealizeError so
callers (and the CLI) can distinguish usage mistakes from genuine bugs.
"""


class RealizeError(Exception):
    """Base class for all documented failures."""


class RankDeficientError(RealizeError):
    """A matrix that must have full (row or column) rank does not."""


class RankMismatchError(RealizeError):
    """A matrix does not have the rank the caller asserted."""


class ExprSyntaxError(RealizeError):
    """Malformed expression text.  Carries the byte offset of the problem."""

    def __init__(self, message, offset):
        super().__init__(f"{message} (at offset {offset})")
        self.offset = offset


class UnknownIdentifierError(RealizeError):
    """Expression references a variable outside x1..xn or t."""

    def __init__(self, name, offset):
        super().__init__(f"unknown identifier {name!r} (at offset {offset})")
        self.name = name
        self.offset = offset


class DomainError(RealizeError):
    """Expression evaluation left the real domain (log of a negative
    number, division by zero, non-finite result, ...)."""


class ConfigError(RealizeError):
    """System description file is malformed or inconsistent."""


class UnknownExampleError(RealizeError):
    """Requested built-in example does not exist."""


class DimensionError(RealizeError):
    """Incompatible dimensions (for instance more outputs than inputs)."""


class NotRealizableError(RealizeError):
    """Desired trajectory fails the exact-realizability conditions."""


class NoOutputDefinedError(RealizeError):
    """Operation needs an output map but the system has none."""


class UnsupportedStructureError(RealizeError):
    """Problem falls outside the structures the solver handles."""


class InconsistentInitialDataError(RealizeError):
    """Initial state contradicts the desired output at the start time."""


class PlanInfeasibleError(RealizeError):
    """Cascade elimination plan cannot be derived or executed."""


class NotMechanicalFormError(RealizeError):
    """System is not in the two-state mechanical form the computed-torque
    construction requires."""


class NotAffineError(RealizeError):
    """Constraint part of the drift is not affine in the state."""


class ProjectorNotConstantError(RealizeError):
    """Input projectors vary with the state."""


class NotControllableError(RealizeError):
    """Constraint rank condition for transfer synthesis fails."""


class SolveFailedError(RealizeError):
    """Numerical solve did not reach the required residual."""


class NonFiniteStateError(RealizeError):
    """Simulation produced NaN or Inf.  Carries the failure time."""

    def __init__(self, time):
        super().__init__(f"state became non-finite at t = {time:.6g}")
        self.time = time
