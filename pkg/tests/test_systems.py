"""System description, config round trip, builtins, trajectory types."""

import math

import numpy as np
import pytest

from realize.errors import ConfigError, DomainError, RankDeficientError, UnknownExampleError
from realize.systems import (
    AnalyticTrajectory,
    SampledTrajectory,
    builtin_example,
    builtin_names,
    dump_config,
    eval_dynamics,
    load_problem,
    load_system,
    time_grid,
)

PENDULUM_CFG = """
# swing-up test rig
[system]
n = 2
p = 1

[dynamics]
R1 = x2
R2 = -sin(x1)

[input]
B1 = 0
B2 = 1

[output]
C1 = 1, 0

[initial]
x0 = 0, 1

[trajectory]
x1 = sin(t)
x2 = cos(t)

[time]
t0 = 0
t1 = 10
steps = 1000
"""


def test_load_pendulum_config():
    prob = load_problem(PENDULUM_CFG)
    sys = prob.system
    assert sys.n == 2 and sys.p == 1 and sys.m == 1
    x = np.array([0.5, 2.0])
    R = sys.drift(0.0, x)
    assert np.allclose(R, [2.0, -math.sin(0.5)])
    B = sys.input_matrix(0.0, x)
    assert B.shape == (2, 1)
    assert np.allclose(B[:, 0], [0.0, 1.0])
    assert np.allclose(sys.output_matrix(), [[1.0, 0.0]])
    assert np.allclose(sys.x0, [0.0, 1.0])
    assert prob.time.t0 == 0.0 and prob.time.t1 == 10.0 and prob.time.steps == 1000
    assert prob.trajectory is not None
    assert np.allclose(prob.trajectory.value(0.0), [0.0, 1.0])


def test_time_grid():
    g = time_grid(0.0, 1.0, 4)
    assert np.allclose(g, [0.0, 0.25, 0.5, 0.75, 1.0])


def test_builtin_names_and_unknown():
    names = builtin_names()
    assert "mechanical-pendulum" in names
    assert "devasia4" in names
    assert "fitzhugh-nagumo" in names
    with pytest.raises(UnknownExampleError):
        builtin_example("no-such-system")


def test_devasia4_builtin_frozen_values():
    prob = builtin_example("devasia4")
    sys = prob.system
    assert sys.n == 4 and sys.p == 1 and sys.m == 1
    x = np.array([1.0, 2.0, 3.0, 4.0])
    R = sys.drift(0.0, x)
    assert np.allclose(R, [2.0 - 1.0, 1.0 - 6.0, 1.0 - 6.0, 9.0 - 4.0])
    B = sys.input_matrix(0.0, np.array([0.0, 0.0, 0.0, math.pi / 2]))
    assert np.allclose(B[:, 0], [0.0, 3.0, 0.0, 0.0])
    assert np.allclose(sys.output_matrix(), [[1.0, 0.0, -3.0, 0.0]])
    y = sys.output_value(np.array([2.0, 0.0, 0.5, 0.0]))
    assert np.allclose(y, [0.5])


def test_pendulum_builtin():
    prob = builtin_example("mechanical-pendulum")
    sys = prob.system
    R = sys.drift(0.0, np.array([0.0, 3.0]))
    assert np.allclose(R, [3.0, 0.0])
    assert np.allclose(sys.x0, [0.0, 1.0])


def test_fitzhugh_nagumo_builtin_frozen_values():
    prob = builtin_example("fitzhugh-nagumo")
    sys = prob.system
    assert sys.n == 2 and sys.p == 1
    x = np.array([1.0, 2.0])
    R = sys.drift(0.0, x)
    # x1 - x1^3/3 - x2 and 0.08*(x1 + 0.7 - 0.8*x2)
    assert np.allclose(R, [1.0 - 1.0 / 3.0 - 2.0, 0.08 * (1.0 + 0.7 - 1.6)])
    B = sys.input_matrix(0.0, x)
    assert np.allclose(B[:, 0], [1.0, 0.0])


def test_config_round_trip():
    prob = load_problem(PENDULUM_CFG)
    text = dump_config(prob)
    prob2 = load_problem(text)
    rng = np.random.default_rng(0)
    for _ in range(10):
        x = rng.standard_normal(2)
        t = float(rng.uniform(0, 10))
        assert np.array_equal(prob.system.drift(t, x), prob2.system.drift(t, x))
        assert np.array_equal(
            prob.system.input_matrix(t, x), prob2.system.input_matrix(t, x)
        )
    assert np.array_equal(prob.system.x0, prob2.system.x0)
    assert np.array_equal(prob.system.output_matrix(), prob2.system.output_matrix())
    assert prob2.time.steps == prob.time.steps


def test_builtin_round_trip():
    for name in builtin_names():
        prob = builtin_example(name)
        prob2 = load_problem(dump_config(prob))
        x = np.full(prob.system.n, 0.3)
        assert np.allclose(prob.system.drift(0.0, x), prob2.system.drift(0.0, x))


def test_str_round_trip_random_points():
    rng = np.random.default_rng(7)
    for name in builtin_names():
        sys = builtin_example(name).system
        sys2 = load_system(str(sys))
        for _ in range(100):
            x = rng.standard_normal(sys.n)
            R1, B1 = sys.drift(0.0, x), sys.input_matrix(0.0, x)
            R2, B2 = sys2.drift(0.0, x), sys2.input_matrix(0.0, x)
            assert np.array_equal(R1, R2)
            assert np.array_equal(B1, B2)


@pytest.mark.parametrize(
    "mutation",
    [
        ("[system]\nn = 2\np = 1\n", ""),  # missing sections entirely
        ("R2 = -sin(x1)", "R2 = -sin(x3)"),  # index out of range
        ("R2 = -sin(x1)", ""),  # missing dynamics row
        ("B2 = 1", "B2 = 1, t"),  # wrong arity for input row
        ("p = 1", "p = 3"),  # p > n
        ("x0 = 0, 1", "x0 = 0"),  # wrong x0 length
        ("x0 = 0, 1", "x0 = 0, fish"),  # unparseable number
        ("C1 = 1, 0", "C1 = 1"),  # wrong output row width
        ("R1 = x2", "R1 = x2 + t"),  # drift may not depend on time
        ("x1 = sin(t)", "x1 = sin(x2)"),  # trajectory must be a function of t
        ("steps = 1000", "steps = 0"),
        ("t1 = 10", "t1 = -1"),
    ],
)
def test_config_errors(mutation):
    old, new = mutation
    broken = PENDULUM_CFG.replace(old, new) if old else new
    with pytest.raises(ConfigError):
        load_problem(broken)


def test_output_exclusive_forms():
    broken = PENDULUM_CFG.replace("C1 = 1, 0", "C1 = 1, 0\nH1 = x1")
    with pytest.raises(ConfigError):
        load_problem(broken)


def test_nonlinear_output():
    cfg = PENDULUM_CFG.replace("C1 = 1, 0", "H1 = x1^2")
    sys = load_system(cfg)
    assert sys.output_matrix() is None
    assert np.allclose(sys.output_value(np.array([3.0, 0.0])), [9.0])


def test_rank_deficient_output_rejected():
    cfg = PENDULUM_CFG.replace("C1 = 1, 0", "C1 = 1, 0\nC2 = 2, 0")
    with pytest.raises(ConfigError):
        load_problem(cfg)


def test_eval_dynamics_rank_check():
    cfg = PENDULUM_CFG.replace("B1 = 0\nB2 = 1", "B1 = x1\nB2 = 0")
    sys = load_system(cfg)
    R, B = eval_dynamics(sys, 0.0, np.array([2.0, 0.0]))
    assert np.allclose(B[:, 0], [2.0, 0.0])
    with pytest.raises(RankDeficientError):
        eval_dynamics(sys, 0.0, np.array([0.0, 0.0]))


def test_analytic_trajectory():
    traj = AnalyticTrajectory.from_strings(["sin(t)", "cos(t)"], (0.0, 10.0))
    assert traj.dim == 2
    assert np.allclose(traj.value(0.5), [math.sin(0.5), math.cos(0.5)])
    assert np.allclose(traj.derivative(0.5), [math.cos(0.5), -math.sin(0.5)])
    vals, derivs = traj.sample(time_grid(0.0, 1.0, 10))
    assert vals.shape == (11, 2) and derivs.shape == (11, 2)


def test_analytic_trajectory_domain_error():
    traj = AnalyticTrajectory.from_strings(["log(t)"], (1.0, 2.0))
    with pytest.raises(DomainError):
        traj.value(-0.5)


def test_sampled_trajectory_fd_derivatives():
    grid = time_grid(0.0, 2.0, 200)
    samples = np.column_stack([np.sin(grid), np.cos(grid)])
    traj = SampledTrajectory(grid, samples)
    mid = len(grid) // 2
    t = grid[mid]
    d = traj.derivative(t)
    assert abs(d[0] - math.cos(t)) <= 1e-8
    assert abs(d[1] + math.sin(t)) <= 1e-8
    # boundary stencils are 2nd order
    d0 = traj.derivative(grid[0])
    assert abs(d0[0] - 1.0) <= 1e-3


def test_sampled_trajectory_hermite_interpolation():
    grid = time_grid(0.0, 2.0, 200)
    traj = SampledTrajectory(grid, np.column_stack([np.sin(grid)]))
    for t in (0.123, 0.5055, 1.7777):
        assert abs(traj.value(t)[0] - math.sin(t)) <= 1e-7


def test_sampled_trajectory_supplied_derivatives_win():
    grid = time_grid(0.0, 1.0, 10)
    samples = np.column_stack([np.exp(grid)])
    traj = SampledTrajectory(grid, samples, derivative_samples=samples.copy())
    assert np.allclose(traj.derivative(grid[3]), samples[3])


def test_sampled_trajectory_validation():
    grid = np.array([0.0, 1.0, 2.0])
    with pytest.raises(ValueError):
        SampledTrajectory(grid, np.zeros((3, 1)))  # fewer than 4 points
    bad = np.array([0.0, 0.5, 0.7, 3.0])
    with pytest.raises(ValueError):
        SampledTrajectory(bad, np.zeros((4, 1)))  # not uniform
    g = time_grid(0.0, 1.0, 5)
    with pytest.raises(ValueError):
        SampledTrajectory(g, np.zeros((4, 1)))  # shape mismatch
    traj = SampledTrajectory(g, np.zeros((6, 1)))
    with pytest.raises(ValueError):
        traj.value(2.0)  # outside domain
