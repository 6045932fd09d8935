"""Closed-loop verification: integrate under a synthesized control and
measure how well the realized state follows the desired one."""

import dataclasses
import logging

import numpy as np
from scipy.integrate import simpson

from .errors import NonFiniteStateError, NotRealizableError
from .realizability import (
    DEFAULT_TOL_CONSTRAINT,
    DEFAULT_TOL_INITIAL,
    synthesize_control,
)
from .systems import SampledTrajectory

log = logging.getLogger(__name__)

# below this sup-norm a synthesized control counts as "no control at all"
DEFAULT_CLASS_A_TOL = 1e-6


@dataclasses.dataclass
class SimulationResult:
    grid: np.ndarray
    states: np.ndarray
    tracking_error_sup: float
    cost_J: float
    trajectory_class: str
    control: object = None


def _uniform_grid(grid):
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or grid.size < 2:
        raise ValueError("grid must contain at least two points")
    steps = np.diff(grid)
    h = (grid[-1] - grid[0]) / (grid.size - 1)
    if h <= 0 or np.max(np.abs(steps - h)) > 1e-8 * abs(h):
        raise ValueError("grid must be uniform and increasing")
    return grid, h


def integrate_rk4(field, x0, grid):
    """Classical fixed-step 4th-order Runge-Kutta on a uniform grid."""
    grid, h = _uniform_grid(grid)
    x = np.asarray(x0, dtype=float).copy()
    out = np.empty((grid.size, x.size))
    out[0] = x
    half = 0.5 * h
    for i in range(grid.size - 1):
        t = grid[i]
        k1 = np.asarray(field(t, x))
        k2 = np.asarray(field(t + half, x + half * k1))
        k3 = np.asarray(field(t + half, x + half * k2))
        k4 = np.asarray(field(t + h, x + h * k3))
        x = x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if not np.all(np.isfinite(x)):
            raise NonFiniteStateError(grid[i + 1])
        out[i + 1] = x
    return out


def simulate_closed(sys, control, x0, grid):
    """Integrate dx/dt = R(x) + B(x) u(t) under an interpolated control.

    When the control is sampled on exactly the simulation grid, the stage
    values it would be interpolated to (nodes and segment midpoints) are
    precomputed in closed form; otherwise every stage interpolates.
    """
    grid, h = _uniform_grid(grid)
    same_grid = (
        isinstance(control, SampledTrajectory)
        and control.grid.size == grid.size
        and np.array_equal(control.grid, grid)
    )
    if not same_grid:
        def field(t, x):
            return sys.drift(t, x) + sys.input_matrix(t, x) @ control.value(t)

        return integrate_rk4(field, x0, grid)

    u0 = control.samples
    # cubic Hermite evaluated at the segment midpoint
    u_mid = 0.5 * (u0[:-1] + u0[1:]) + (h / 8.0) * (
        control.derivative_samples[:-1] - control.derivative_samples[1:]
    )
    x = np.asarray(x0, dtype=float).copy()
    out = np.empty((grid.size, x.size))
    out[0] = x
    half = 0.5 * h
    for i in range(grid.size - 1):
        t = grid[i]
        R, B = sys.drift_and_input(t, x)
        k1 = R + B @ u0[i]
        R, B = sys.drift_and_input(t + half, x + half * k1)
        k2 = R + B @ u_mid[i]
        R, B = sys.drift_and_input(t + half, x + half * k2)
        k3 = R + B @ u_mid[i]
        R, B = sys.drift_and_input(t + h, x + h * k3)
        k4 = R + B @ u0[i + 1]
        x = x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if not np.all(np.isfinite(x)):
            raise NonFiniteStateError(grid[i + 1])
        out[i + 1] = x
    return out


def sup_tracking_error(states, xd, grid):
    """Largest entrywise gap between realized and desired states."""
    worst = 0.0
    for i, t in enumerate(grid):
        gap = np.max(np.abs(states[i] - xd.value(t)))
        worst = max(worst, float(gap))
    return worst


def tracking_cost(states, xd, grid):
    """Quadratic tracking cost: half the integrated squared state gap,
    evaluated by composite Simpson quadrature on the grid."""
    grid = np.asarray(grid, dtype=float)
    integrand = np.empty(grid.size)
    for i, t in enumerate(grid):
        gap = states[i] - xd.value(t)
        integrand[i] = 0.5 * float(gap @ gap)
    return float(simpson(integrand, x=grid))


def classify_trajectory(sys, xd, grid,
                        control_tol=DEFAULT_CLASS_A_TOL,
                        tol_constraint=DEFAULT_TOL_CONSTRAINT,
                        tol_initial=DEFAULT_TOL_INITIAL):
    """Taxonomy of desired trajectories.

    "A": realizable with (numerically) vanishing control - the drift alone
         already produces it.
    "B": realizable but needs a genuine control effort.
    "C": not realizable from this system and start point.
    """
    try:
        sig = synthesize_control(sys, xd, grid,
                                 tol_constraint=tol_constraint,
                                 tol_initial=tol_initial)
    except NotRealizableError:
        return "C"
    sup_u = float(np.max(np.abs(sig.samples)))
    return "A" if sup_u <= control_tol else "B"


def simulate_tracking(sys, xd, grid,
                      control_tol=DEFAULT_CLASS_A_TOL,
                      tol_constraint=DEFAULT_TOL_CONSTRAINT,
                      tol_initial=DEFAULT_TOL_INITIAL,
                      force=False):
    """Full round trip: synthesize the control, integrate, score, classify."""
    sig = synthesize_control(sys, xd, grid,
                             tol_constraint=tol_constraint,
                             tol_initial=tol_initial,
                             force=force)
    states = simulate_closed(sys, sig, sys.x0, grid)
    sup = sup_tracking_error(states, xd, grid)
    cost = tracking_cost(states, xd, grid)
    if sig.report.realizable:
        sup_u = float(np.max(np.abs(sig.samples)))
        cls = "A" if sup_u <= control_tol else "B"
    else:
        cls = "C"
    log.debug("simulate_tracking: class=%s sup_err=%.3e J=%.3e", cls, sup, cost)
    return SimulationResult(
        grid=np.asarray(grid, dtype=float),
        states=states,
        tracking_error_sup=sup,
        cost_J=cost,
        trajectory_class=cls,
        control=sig,
    )
