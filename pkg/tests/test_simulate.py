"""Closed-loop integration, tracking cost, and the A/B/C taxonomy."""

import math

import numpy as np
import pytest

from realize.errors import NonFiniteStateError
from realize.realizability import ControlSignal, synthesize_control
from realize.simulate import (
    SimulationResult,
    classify_trajectory,
    integrate_rk4,
    simulate_closed,
    simulate_tracking,
    sup_tracking_error,
    tracking_cost,
)
from realize.systems import (
    AnalyticTrajectory,
    SampledTrajectory,
    builtin_config,
    builtin_example,
    load_system,
    time_grid,
)

SIN_COS = AnalyticTrajectory.from_strings(["sin(t)", "cos(t)"])

HARMONIC_CFG = """
[system]
n = 2
p = 1

[dynamics]
R1 = x2
R2 = -x1

[input]
B1 = 0
B2 = 1

[initial]
x0 = 0, 1
"""


def pendulum():
    return builtin_example("mechanical-pendulum").system


def test_rk4_constant_field():
    out = integrate_rk4(lambda t, x: np.zeros(2), np.array([1.0, -2.0]),
                        time_grid(0.0, 1.0, 10))
    assert np.array_equal(out[0], out[-1])
    assert out.shape == (11, 2)


def test_rk4_exponential():
    grid = time_grid(0.0, 1.0, 1000)
    out = integrate_rk4(lambda t, x: x, np.array([1.0]), grid)
    assert abs(out[-1, 0] - math.e) <= 1e-10


def test_rk4_fourth_order_convergence():
    # dx/dt = cos(t) x has solution exp(sin t)
    field = lambda t, x: math.cos(t) * x
    exact = math.exp(math.sin(2.0))
    errors = []
    for steps in (250, 500):
        out = integrate_rk4(field, np.array([1.0]), time_grid(0.0, 2.0, steps))
        errors.append(abs(out[-1, 0] - exact))
    ratio = errors[0] / errors[1]
    assert 12.0 <= ratio <= 20.0


def test_rk4_blowup_reported():
    grid = time_grid(0.0, 2.0, 2000)
    with np.errstate(over="ignore", invalid="ignore"):
        with pytest.raises(NonFiniteStateError) as info:
            integrate_rk4(lambda t, x: x * x, np.array([1.0]), grid)
    assert 0.9 <= info.value.time <= 1.5


def test_rk4_rejects_bad_grid():
    with pytest.raises(ValueError):
        integrate_rk4(lambda t, x: x, np.array([1.0]), np.array([0.0]))
    with pytest.raises(ValueError):
        integrate_rk4(lambda t, x: x, np.array([1.0]),
                      np.array([0.0, 0.1, 0.5, 1.0]))


def test_simulate_closed_equilibrium():
    sys = load_system(builtin_config("mechanical-pendulum").replace(
        "x0 = 0, 1", "x0 = 0, 0"))
    grid = time_grid(0.0, 2.0, 200)
    zero = ControlSignal(grid, np.zeros((grid.size, 1)))
    states = simulate_closed(sys, zero, sys.x0, grid)
    assert np.max(np.abs(states)) <= 1e-14


def test_closed_loop_tracking_pendulum():
    sys = pendulum()
    grid = time_grid(0.0, 10.0, 10000)
    sig = synthesize_control(sys, SIN_COS, grid)
    states = simulate_closed(sys, sig, sys.x0, grid)
    err = sup_tracking_error(states, SIN_COS, grid)
    assert err <= 1e-7
    assert tracking_cost(states, SIN_COS, grid) <= 1e-12


def test_perturbed_start_drifts():
    sys = pendulum()
    grid = time_grid(0.0, 5.0, 2000)
    sig = synthesize_control(sys, SIN_COS, grid)
    states = simulate_closed(sys, sig, np.array([0.1, 1.0]), grid)
    assert sup_tracking_error(states, SIN_COS, grid) >= 1e-2


def test_tracking_convergence_order():
    sys = pendulum()
    errors = []
    for h in (8e-3, 4e-3, 2e-3):
        steps = round(2.0 / h)
        grid = time_grid(0.0, 2.0, steps)
        sig = synthesize_control(sys, SIN_COS, grid)
        states = simulate_closed(sys, sig, sys.x0, grid)
        errors.append(sup_tracking_error(states, SIN_COS, grid))
    order = math.log(errors[0] / errors[2]) / math.log(4.0)
    assert order >= 3.7, (errors, order)


def test_tracking_cost_frozen():
    grid = time_grid(0.0, 3.0, 300)
    xd_vals = np.array([SIN_COS.value(t) for t in grid])
    assert tracking_cost(xd_vals, SIN_COS, grid) == 0.0
    offset = xd_vals + np.array([0.2, -0.1])
    expect = 0.5 * (0.2**2 + 0.1**2) * 3.0
    assert abs(tracking_cost(offset, SIN_COS, grid) - expect) <= 1e-12


def test_cost_bounded_by_sup():
    sys = pendulum()
    grid = time_grid(0.0, 4.0, 1000)
    result = simulate_tracking(sys, SIN_COS, grid)
    bound = result.tracking_error_sup**2 * 4.0 / 2.0
    assert result.cost_J <= bound + 1e-15
    assert result.cost_J >= 0.0


def test_classify_harmonic_class_a():
    sys = load_system(HARMONIC_CFG)
    grid = time_grid(0.0, 6.0, 600)
    assert classify_trajectory(sys, SIN_COS, grid) == "A"


def test_classify_pendulum_class_b():
    grid = time_grid(0.0, 6.0, 600)
    assert classify_trajectory(pendulum(), SIN_COS, grid) == "B"


def test_classify_ramp_class_c():
    grid = time_grid(0.0, 2.0, 200)
    ramp = AnalyticTrajectory.from_strings(["t", "t"])
    assert classify_trajectory(pendulum(), ramp, grid) == "C"


def test_class_a_survives_tight_tolerance():
    # solution produced by the drift itself, integrated finely, stays class
    # A even when the zero-control threshold is squeezed to 1e-8
    sys = load_system(HARMONIC_CFG)
    h = 1e-4
    steps = 5000
    grid = time_grid(0.0, steps * h, steps)
    states = integrate_rk4(lambda t, x: sys.drift(t, x), sys.x0, grid)
    slopes = np.array([sys.drift(t, s) for t, s in zip(grid, states)])
    xd = SampledTrajectory(grid, states, slopes)
    assert classify_trajectory(sys, xd, grid, control_tol=1e-8) == "A"


def test_simulate_tracking_result_fields():
    sys = pendulum()
    grid = time_grid(0.0, 2.0, 400)
    result = simulate_tracking(sys, SIN_COS, grid)
    assert isinstance(result, SimulationResult)
    assert result.states.shape == (grid.size, 2)
    assert result.trajectory_class == "B"
    assert result.control.samples.shape == (grid.size, 1)
    assert result.tracking_error_sup <= 1e-7
