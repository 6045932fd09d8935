"""Exact realizability checks and open-loop control synthesis.

A desired state path can be followed exactly when two things hold: the
part of dx_d/dt - R(x_d) that the input channels cannot reach vanishes
along the path, and the path starts at the system's initial state.  When
they do, the enforcing input is recovered pointwise by projecting the
defect dx_d/dt - R(x_d) through a left inverse of B.
"""

import dataclasses
import logging

import numpy as np

from .errors import NoOutputDefinedError, NotRealizableError
from .linalg import generalized_inverse, projectors_from_input, pseudoinverse_tall
from .systems import SampledTrajectory

log = logging.getLogger(__name__)

DEFAULT_TOL_CONSTRAINT = 1e-8
DEFAULT_TOL_INITIAL = 1e-10

VERDICT_REALIZABLE = "Realizable"
VERDICT_CONSTRAINT = "ConstraintViolated"
VERDICT_INITIAL = "InitialMismatch"
VERDICT_BOTH = "Both"


@dataclasses.dataclass
class RealizabilityReport:
    verdict: str
    max_constraint_residual: float
    initial_error: float
    grid: np.ndarray
    per_time_residuals: np.ndarray
    tol_constraint: float
    tol_initial: float
    forced: bool = False

    @property
    def realizable(self):
        return self.verdict == VERDICT_REALIZABLE


class ControlSignal(SampledTrajectory):
    """Open-loop input samples with cubic Hermite interpolation between
    grid points.  Slopes are finite-difference estimates, so off-grid
    values carry the same 4th-order accuracy as the underlying grid."""

    def __init__(self, grid, samples, derivative_samples=None, report=None):
        super().__init__(grid, samples, derivative_samples)
        self.report = report

    @property
    def p(self):
        return self.samples.shape[1]


def constraint_residual(sys, xd, t):
    """Part of dx_d/dt - R(x_d) at time t that no input value can cancel."""
    x = xd.value(t)
    defect = xd.derivative(t) - sys.drift(t, x)
    _, Q = projectors_from_input(sys.input_matrix(t, x))
    return Q @ defect


def _classify(max_residual, initial_error, tol_c, tol_i):
    bad_constraint = max_residual > tol_c
    bad_initial = initial_error > tol_i
    if bad_constraint and bad_initial:
        return VERDICT_BOTH
    if bad_constraint:
        return VERDICT_CONSTRAINT
    if bad_initial:
        return VERDICT_INITIAL
    return VERDICT_REALIZABLE


def check_realizable(sys, xd, grid,
                     tol_constraint=DEFAULT_TOL_CONSTRAINT,
                     tol_initial=DEFAULT_TOL_INITIAL):
    """Evaluate the constraint defect on a grid and compare the start point.

    Certification is on the grid in sup-norm; between grid points nothing
    is claimed.
    """
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or grid.size < 2:
        raise ValueError("grid must contain at least two points")
    residuals = np.empty(grid.size)
    for i, t in enumerate(grid):
        residuals[i] = float(np.max(np.abs(constraint_residual(sys, xd, t))))
    initial_error = float(np.max(np.abs(xd.value(grid[0]) - sys.x0)))
    max_residual = float(np.max(residuals))
    verdict = _classify(max_residual, initial_error, tol_constraint, tol_initial)
    log.debug("realizability: verdict=%s max_residual=%.3e initial_error=%.3e",
              verdict, max_residual, initial_error)
    return RealizabilityReport(
        verdict=verdict,
        max_constraint_residual=max_residual,
        initial_error=initial_error,
        grid=grid.copy(),
        per_time_residuals=residuals,
        tol_constraint=float(tol_constraint),
        tol_initial=float(tol_initial),
    )


def _synthesize(sys, xd, grid, left_inverse,
                tol_constraint, tol_initial, force):
    # one pass computes both the control and the realizability evidence;
    # with the pseudoinverse route, defect - B u IS the constraint residual
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or grid.size < 2:
        raise ValueError("grid must contain at least two points")
    pinv_route = left_inverse is None
    samples = np.empty((grid.size, sys.p))
    residuals = np.empty(grid.size)
    for i, t in enumerate(grid):
        x = xd.value(t)
        R, B = sys.drift_and_input(t, x)
        defect = xd.derivative(t) - R
        if pinv_route:
            u = pseudoinverse_tall(B) @ defect
            untouched = defect - B @ u
        else:
            u = left_inverse(B) @ defect
            untouched = defect - B @ (pseudoinverse_tall(B) @ defect)
        samples[i] = u
        residuals[i] = float(np.max(np.abs(untouched)))
    initial_error = float(np.max(np.abs(xd.value(grid[0]) - sys.x0)))
    max_residual = float(np.max(residuals))
    verdict = _classify(max_residual, initial_error, tol_constraint, tol_initial)
    report = RealizabilityReport(
        verdict=verdict,
        max_constraint_residual=max_residual,
        initial_error=initial_error,
        grid=grid.copy(),
        per_time_residuals=residuals,
        tol_constraint=float(tol_constraint),
        tol_initial=float(tol_initial),
    )
    if not report.realizable:
        if not force:
            raise NotRealizableError(
                f"desired trajectory is not realizable ({report.verdict}): "
                f"max constraint residual {report.max_constraint_residual:.3e}, "
                f"initial error {report.initial_error:.3e}"
            )
        report.forced = True
        log.info("synthesizing control for non-realizable trajectory (%s)",
                 report.verdict)
    return ControlSignal(grid, samples, report=report)


def synthesize_control(sys, xd, grid,
                       tol_constraint=DEFAULT_TOL_CONSTRAINT,
                       tol_initial=DEFAULT_TOL_INITIAL,
                       force=False):
    """Input enforcing x_d, sampled as B+(x_d) (dx_d/dt - R(x_d)) on the grid.

    Refuses non-realizable trajectories unless force is set; the attached
    report records the verdict either way.
    """
    return _synthesize(sys, xd, grid, None,
                       tol_constraint, tol_initial, force)


def synthesize_control_generalized(sys, xd, kernel, grid,
                                   tol_constraint=DEFAULT_TOL_CONSTRAINT,
                                   tol_initial=DEFAULT_TOL_INITIAL,
                                   force=False):
    """Same control synthesized through (K B)^-1 K for a p-by-n kernel K.

    For realizable trajectories the result is independent of K; K only
    needs K B(x) nonsingular along the path.
    """
    kernel = np.asarray(kernel, dtype=float)
    if kernel.shape != (sys.p, sys.n):
        raise ValueError(f"kernel must be {sys.p}x{sys.n}, got {kernel.shape}")
    return _synthesize(sys, xd, grid,
                       lambda B: generalized_inverse(B, kernel),
                       tol_constraint, tol_initial, force)


def verify_output_realization(sys, xd, yd, grid, tol=1e-6):
    """Sup-norm mismatch between the desired output and the output along x_d.

    An exactly followed x_d reproduces y(t) = h(x_d(t)), so this residual
    is also the output tracking error of the synthesized control.
    """
    if sys.output is None:
        raise NoOutputDefinedError("system has no output map")
    worst = 0.0
    for t in np.asarray(grid, dtype=float):
        mismatch = yd.value(t) - sys.output_value(xd.value(t))
        worst = max(worst, float(np.max(np.abs(mismatch))))
    if worst > tol:
        log.info("output realization residual %.3e exceeds tol %.1e", worst, tol)
    return worst
