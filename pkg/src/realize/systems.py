"""Control-affine systems, their config format, and trajectory containers.

The model everything else works on is dx/dt = R(x) + B(x) u with an
optional readout y = C x (or y = h(x) for nonlinear readouts).  Drift and
input-channel entries are expressions over the state alone; desired
trajectories and desired outputs are functions of time alone.  All objects
here are immutable after construction and safe to share across threads.
"""

import configparser
import dataclasses
import re

import numpy as np

from .errors import (
    ConfigError,
    DimensionError,
    ExprSyntaxError,
    NoOutputDefinedError,
    RankDeficientError,
    UnknownExampleError,
    UnknownIdentifierError,
)
from .expr import Expression, compile_vector, parse
from .linalg import numeric_rank


def time_grid(t0, t1, steps):
    """Uniform grid of steps+1 points covering [t0, t1]."""
    if not t0 < t1:
        raise ValueError(f"empty time window [{t0}, {t1}]")
    if steps < 1:
        raise ValueError("need at least one step")
    return np.linspace(float(t0), float(t1), int(steps) + 1)


class LinearOutput:
    """Readout y = C x.  Row rank is validated by the owning system."""

    def __init__(self, matrix):
        C = np.asarray(matrix, dtype=float)
        if C.ndim != 2 or C.shape[0] < 1:
            raise DimensionError("output matrix must be 2-D with at least one row")
        if not np.all(np.isfinite(C)):
            raise ValueError("output matrix entries must be finite")
        self.matrix = C.copy()
        self.m = C.shape[0]

    def value(self, x):
        return self.matrix @ np.asarray(x, dtype=float)


class NonlinearOutput:
    """Readout y = h(x) given by one expression per output component."""

    def __init__(self, expressions):
        exprs = tuple(expressions)
        if not exprs:
            raise DimensionError("output needs at least one component")
        for e in exprs:
            if e.uses_time:
                raise ValueError("output expressions may not depend on t")
        self.expressions = exprs
        self.m = len(exprs)
        self._fn = compile_vector(exprs, label="output map")

    def value(self, x):
        return np.array(self._fn(0.0, x), dtype=float)


class AffineSystem:
    """Immutable control-affine system with a designated initial state."""

    def __init__(self, drift, input_rows, x0, output=None, name=None):
        drift = tuple(drift)
        rows = tuple(tuple(row) for row in input_rows)
        n = len(drift)
        if n < 1:
            raise DimensionError("system needs at least one state")
        if len(rows) != n:
            raise DimensionError(f"input matrix has {len(rows)} rows, expected {n}")
        p = len(rows[0])
        if any(len(row) != p for row in rows):
            raise DimensionError("input matrix rows must all have the same width")
        if not 1 <= p <= n:
            raise DimensionError(f"input count p = {p} must lie in 1..{n}")
        for e in drift:
            if e.uses_time:
                raise ValueError("drift entries are functions of the state only")
        for row in rows:
            for e in row:
                if e.uses_time:
                    raise ValueError("input entries are functions of the state only")
        x0 = np.asarray(x0, dtype=float)
        if x0.shape != (n,):
            raise DimensionError(f"x0 must have {n} entries")
        if not np.all(np.isfinite(x0)):
            raise ValueError("x0 entries must be finite")
        if isinstance(output, LinearOutput):
            if output.matrix.shape[1] != n:
                raise DimensionError(
                    f"output matrix has {output.matrix.shape[1]} columns, expected {n}"
                )
            if numeric_rank(output.matrix) < output.m:
                raise RankDeficientError("output matrix must have full row rank")
        elif isinstance(output, NonlinearOutput):
            for e in output.expressions:
                if e.variable_indices and max(e.variable_indices) > n:
                    raise DimensionError("output expression references a missing state")
        elif output is not None:
            raise TypeError("output must be LinearOutput, NonlinearOutput, or None")
        self.n = n
        self.p = p
        self.drift_expressions = drift
        self.input_expressions = rows
        self.x0 = x0.copy()
        self.output = output
        self.name = name
        self._drift_fn = compile_vector(drift, label="drift")
        self._input_fn = compile_vector(
            [e for row in rows for e in row], label="input matrix"
        )
        self._field_fn = compile_vector(
            drift + tuple(e for row in rows for e in row), label="dynamics"
        )

    @property
    def m(self):
        return 0 if self.output is None else self.output.m

    def drift(self, t, x):
        return np.array(self._drift_fn(t, x), dtype=float)

    def input_matrix(self, t, x):
        return np.array(self._input_fn(t, x), dtype=float).reshape(self.n, self.p)

    def drift_and_input(self, t, x):
        """(R(x), B(x)) from one fused evaluation; cheaper in hot loops."""
        vals = self._field_fn(t, x)
        n = self.n
        return (
            np.array(vals[:n], dtype=float),
            np.array(vals[n:], dtype=float).reshape(n, self.p),
        )

    def field(self, t, x, u):
        """Closed-loop right-hand side R(x) + B(x) u."""
        R, B = self.drift_and_input(t, x)
        return R + B @ np.asarray(u, dtype=float)

    def output_value(self, x):
        if self.output is None:
            raise NoOutputDefinedError("system has no output map")
        return self.output.value(x)

    def output_matrix(self):
        """C for a linear readout, None otherwise."""
        if isinstance(self.output, LinearOutput):
            return self.output.matrix.copy()
        return None

    def __str__(self):
        return dump_config(Problem(system=self))

    def __repr__(self):
        tag = f" {self.name!r}" if self.name else ""
        return f"<AffineSystem{tag} n={self.n} p={self.p} m={self.m}>"


def eval_dynamics(sys, t, x):
    """Evaluate (R(x), B(x)); rejects input matrices that lose rank."""
    x = np.asarray(x, dtype=float)
    if x.shape != (sys.n,):
        raise DimensionError(f"state must have {sys.n} entries")
    R = sys.drift(t, x)
    B = sys.input_matrix(t, x)
    if numeric_rank(B, scale=1.0) < sys.p:
        raise RankDeficientError(f"input matrix loses rank at t = {t}")
    return R, B


# ---------------------------------------------------------------------------
# Trajectories

class AnalyticTrajectory:
    """Trajectory (or desired output) given by closed-form expressions of t."""

    def __init__(self, expressions, domain=None):
        exprs = tuple(expressions)
        if not exprs:
            raise DimensionError("trajectory needs at least one component")
        for e in exprs:
            if e.variable_indices:
                raise ValueError("trajectory expressions are functions of t only")
        if domain is not None:
            t0, t1 = float(domain[0]), float(domain[1])
            if not t0 < t1:
                raise ValueError(f"empty domain [{t0}, {t1}]")
            domain = (t0, t1)
        self.expressions = exprs
        self.domain = domain
        self._fn = compile_vector(exprs, label="trajectory")
        self._d1 = None
        self._d2 = None

    @classmethod
    def from_strings(cls, texts, domain=None):
        return cls([parse(text, 0) for text in texts], domain)

    @property
    def dim(self):
        return len(self.expressions)

    def _first(self):
        if self._d1 is None:
            exprs = tuple(e.differentiate("t") for e in self.expressions)
            self._d1 = (exprs, compile_vector(exprs, label="trajectory derivative"))
        return self._d1

    def _second(self):
        if self._d2 is None:
            exprs = tuple(e.differentiate("t") for e in self._first()[0])
            self._d2 = compile_vector(exprs, label="trajectory second derivative")
        return self._d2

    def value(self, t):
        return np.array(self._fn(t, ()), dtype=float)

    def derivative(self, t):
        return np.array(self._first()[1](t, ()), dtype=float)

    def second_derivative(self, t):
        return np.array(self._second()(t, ()), dtype=float)

    def derivative_trajectory(self):
        return AnalyticTrajectory(self._first()[0], self.domain)

    def sample(self, grid):
        """Values and first derivatives on a grid, as (G, dim) arrays."""
        vals = np.array([self._fn(t, ()) for t in grid], dtype=float)
        fn = self._first()[1]
        derivs = np.array([fn(t, ()) for t in grid], dtype=float)
        return vals, derivs


def _fd_derivatives(samples, h):
    # 4th-order centered stencil inside, 2nd-order at and next to the edges.
    G = samples.shape[0]
    d = np.empty_like(samples)
    d[0] = (-3.0 * samples[0] + 4.0 * samples[1] - samples[2]) / (2.0 * h)
    d[1] = (samples[2] - samples[0]) / (2.0 * h)
    d[-2] = (samples[-1] - samples[-3]) / (2.0 * h)
    d[-1] = (3.0 * samples[-1] - 4.0 * samples[-2] + samples[-3]) / (2.0 * h)
    if G >= 5:
        d[2:-2] = (
            samples[:-4] - 8.0 * samples[1:-3] + 8.0 * samples[3:-1] - samples[4:]
        ) / (12.0 * h)
    return d


class SampledTrajectory:
    """Trajectory stored as samples on a uniform grid.

    Values interpolate with cubic Hermite segments.  Slopes come from
    derivative_samples when the producer can supply exact ones; otherwise
    they are filled in by finite differences (4th-order centered inside,
    2nd-order one-sided at the edges).
    """

    def __init__(self, grid, samples, derivative_samples=None):
        grid = np.asarray(grid, dtype=float)
        samples = np.asarray(samples, dtype=float)
        if grid.ndim != 1 or grid.size < 4:
            raise ValueError("sampled trajectory needs at least 4 grid points")
        steps = np.diff(grid)
        if np.any(steps <= 0.0):
            raise ValueError("grid must be strictly increasing")
        h = (grid[-1] - grid[0]) / (grid.size - 1)
        if np.max(np.abs(steps - h)) > 1e-8 * h:
            raise ValueError("grid must be uniform")
        if samples.ndim != 2 or samples.shape[0] != grid.size:
            raise ValueError(
                f"samples must be (len(grid), dim), got {samples.shape}"
            )
        if not (np.all(np.isfinite(grid)) and np.all(np.isfinite(samples))):
            raise ValueError("grid and samples must be finite")
        if derivative_samples is None:
            derivative_samples = _fd_derivatives(samples, h)
        else:
            derivative_samples = np.asarray(derivative_samples, dtype=float)
            if derivative_samples.shape != samples.shape:
                raise ValueError("derivative_samples must match samples in shape")
            if not np.all(np.isfinite(derivative_samples)):
                raise ValueError("derivative_samples must be finite")
        self.grid = grid.copy()
        self.samples = samples.copy()
        self.derivative_samples = derivative_samples.copy()
        self._h = float(h)

    @property
    def dim(self):
        return self.samples.shape[1]

    @property
    def domain(self):
        return (float(self.grid[0]), float(self.grid[-1]))

    def _locate(self, t):
        t = float(t)
        t0, t1 = self.grid[0], self.grid[-1]
        slack = 1e-9 * (t1 - t0)
        if t < t0 - slack or t > t1 + slack:
            raise ValueError(f"t = {t} outside trajectory domain [{t0}, {t1}]")
        t = min(max(t, t0), t1)
        k = int(np.searchsorted(self.grid, t, side="right")) - 1
        k = min(max(k, 0), self.grid.size - 2)
        return k, (t - self.grid[k]) / self._h

    def value(self, t):
        k, s = self._locate(t)
        y0, y1 = self.samples[k], self.samples[k + 1]
        m0, m1 = self.derivative_samples[k], self.derivative_samples[k + 1]
        s2 = s * s
        s3 = s2 * s
        return (
            (2.0 * s3 - 3.0 * s2 + 1.0) * y0
            + (s3 - 2.0 * s2 + s) * self._h * m0
            + (-2.0 * s3 + 3.0 * s2) * y1
            + (s3 - s2) * self._h * m1
        )

    def derivative(self, t):
        k, s = self._locate(t)
        y0, y1 = self.samples[k], self.samples[k + 1]
        m0, m1 = self.derivative_samples[k], self.derivative_samples[k + 1]
        s2 = s * s
        return (
            (6.0 * s2 - 6.0 * s) * (y0 - y1) / self._h
            + (3.0 * s2 - 4.0 * s + 1.0) * m0
            + (3.0 * s2 - 2.0 * s) * m1
        )

    def sample(self, grid):
        vals = np.array([self.value(t) for t in grid], dtype=float)
        derivs = np.array([self.derivative(t) for t in grid], dtype=float)
        return vals, derivs


# ---------------------------------------------------------------------------
# Config format

@dataclasses.dataclass
class TimeWindow:
    t0: float
    t1: float
    steps: int

    def grid(self):
        return time_grid(self.t0, self.t1, self.steps)


@dataclasses.dataclass
class PlanStep:
    target: int   # state index, 1-based
    kind: str     # "algebraic" or "ode"
    source: str   # "row" (constraint row) or "output"
    index: int    # 1-based row index within the source


@dataclasses.dataclass
class Problem:
    """Everything a config file can describe: system plus optional extras."""

    system: AffineSystem
    trajectory: object = None
    output_desired: object = None
    time: TimeWindow = None
    plan: tuple = None
    free: dict = None


_KNOWN_SECTIONS = {
    "system", "dynamics", "input", "output", "initial",
    "trajectory", "output_desired", "time", "plan", "free",
}

_PLAN_RE = re.compile(
    r"^\s*x(\d+)\s*<-\s*(algebraic|ode)\s*\(\s*(y|row)?\s*_?\s*(\d+)\s*\)\s*$"
)


def _section(cp, name, required=False):
    if not cp.has_section(name):
        if required:
            raise ConfigError(f"missing [{name}] section")
        return None
    return dict(cp.items(name))


def _take(sec, section, key):
    if key not in sec:
        raise ConfigError(f"[{section}] is missing {key}")
    return sec.pop(key)


def _done(sec, section):
    if sec:
        raise ConfigError(
            f"[{section}] has unknown keys: {', '.join(sorted(sec))}"
        )


def _int(raw, where, minimum=None):
    try:
        value = int(raw.strip())
    except ValueError:
        raise ConfigError(f"{where}: expected an integer, got {raw!r}") from None
    if minimum is not None and value < minimum:
        raise ConfigError(f"{where}: must be at least {minimum}")
    return value


def _float(raw, where):
    try:
        value = float(raw.strip())
    except ValueError:
        raise ConfigError(f"{where}: expected a number, got {raw!r}") from None
    if not np.isfinite(value):
        raise ConfigError(f"{where}: must be finite")
    return value


def _floats(raw, count, where):
    parts = raw.split(",")
    if len(parts) != count:
        raise ConfigError(f"{where}: expected {count} comma-separated values")
    return [_float(part, where) for part in parts]


def _expr(raw, n, where, time_ok):
    try:
        e = parse(raw.strip(), n)
    except (ExprSyntaxError, UnknownIdentifierError) as exc:
        raise ConfigError(f"{where}: {exc}") from exc
    if not time_ok and e.uses_time:
        raise ConfigError(f"{where}: may not depend on t")
    return e


def load_problem(config_text, name=None):
    """Parse a config file (text, not a path) into a Problem."""
    cp = configparser.ConfigParser(
        interpolation=None,
        comment_prefixes=("#", ";"),
        inline_comment_prefixes=("#",),
        delimiters=("=",),
    )
    cp.optionxform = str
    try:
        cp.read_string(config_text)
    except configparser.Error as exc:
        raise ConfigError(f"cannot parse config: {exc}") from exc
    for section in cp.sections():
        if section not in _KNOWN_SECTIONS:
            raise ConfigError(f"unknown section [{section}]")

    sec = _section(cp, "system", required=True)
    n = _int(_take(sec, "system", "n"), "[system] n", minimum=1)
    p = _int(_take(sec, "system", "p"), "[system] p", minimum=1)
    _done(sec, "system")
    if p > n:
        raise ConfigError(f"[system] p = {p} must not exceed n = {n}")

    sec = _section(cp, "dynamics", required=True)
    drift = [_expr(_take(sec, "dynamics", f"R{k}"), n, f"[dynamics] R{k}", False)
             for k in range(1, n + 1)]
    _done(sec, "dynamics")

    sec = _section(cp, "input", required=True)
    rows = []
    for k in range(1, n + 1):
        raw = _take(sec, "input", f"B{k}")
        parts = raw.split(",")
        if len(parts) != p:
            raise ConfigError(f"[input] B{k}: expected {p} comma-separated entries")
        rows.append([_expr(part, n, f"[input] B{k}", False) for part in parts])
    _done(sec, "input")

    output = None
    sec = _section(cp, "output")
    if sec is not None:
        has_c = any(key.startswith("C") for key in sec)
        has_h = any(key.startswith("H") for key in sec)
        if has_c and has_h:
            raise ConfigError("[output] must use C rows or H expressions, not both")
        if not (has_c or has_h):
            raise ConfigError("[output] needs C1.. rows or H1.. expressions")
        m = len(sec)
        if has_c:
            matrix = [_floats(_take(sec, "output", f"C{j}"), n, f"[output] C{j}")
                      for j in range(1, m + 1)]
            output = LinearOutput(matrix)
        else:
            exprs = [_expr(_take(sec, "output", f"H{j}"), n, f"[output] H{j}", False)
                     for j in range(1, m + 1)]
            output = NonlinearOutput(exprs)
        _done(sec, "output")

    sec = _section(cp, "initial", required=True)
    x0 = _floats(_take(sec, "initial", "x0"), n, "[initial] x0")
    _done(sec, "initial")

    try:
        system = AffineSystem(drift, rows, x0, output=output, name=name)
    except (DimensionError, RankDeficientError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc

    window = None
    sec = _section(cp, "time")
    if sec is not None:
        t0 = _float(_take(sec, "time", "t0"), "[time] t0")
        t1 = _float(_take(sec, "time", "t1"), "[time] t1")
        steps = _int(_take(sec, "time", "steps"), "[time] steps", minimum=1)
        _done(sec, "time")
        if not t0 < t1:
            raise ConfigError(f"[time] needs t0 < t1, got [{t0}, {t1}]")
        window = TimeWindow(t0, t1, steps)
    domain = (window.t0, window.t1) if window is not None else None

    trajectory = None
    sec = _section(cp, "trajectory")
    if sec is not None:
        exprs = [_expr(_take(sec, "trajectory", f"x{k}"), 0, f"[trajectory] x{k}", True)
                 for k in range(1, n + 1)]
        _done(sec, "trajectory")
        trajectory = AnalyticTrajectory(exprs, domain)

    output_desired = None
    sec = _section(cp, "output_desired")
    if sec is not None:
        if output is None:
            raise ConfigError("[output_desired] requires an [output] section")
        exprs = [
            _expr(_take(sec, "output_desired", f"y{j}"), 0,
                  f"[output_desired] y{j}", True)
            for j in range(1, output.m + 1)
        ]
        _done(sec, "output_desired")
        output_desired = AnalyticTrajectory(exprs, domain)

    free = None
    sec = _section(cp, "free")
    if sec is not None:
        free = {}
        for key in sorted(sec):
            mt = re.fullmatch(r"x(\d+)", key)
            if mt is None or not 1 <= int(mt.group(1)) <= n:
                raise ConfigError(f"[free] has unknown key {key}")
            free[int(mt.group(1))] = _expr(sec[key], 0, f"[free] {key}", True)

    plan = None
    sec = _section(cp, "plan")
    if sec is not None:
        steps_out = []
        count = len(sec)
        for i in range(1, count + 1):
            raw = _take(sec, "plan", f"step{i}")
            mt = _PLAN_RE.match(raw)
            if mt is None:
                raise ConfigError(
                    f"[plan] step{i}: expected 'xK <- algebraic(rowI)', "
                    f"'xK <- algebraic(yJ)' or 'xK <- ode(rowI)', got {raw!r}"
                )
            target = int(mt.group(1))
            kind = mt.group(2)
            source = "output" if mt.group(3) == "y" else "row"
            index = int(mt.group(4))
            if not 1 <= target <= n:
                raise ConfigError(f"[plan] step{i}: no state x{target}")
            if kind == "ode" and source == "output":
                raise ConfigError(f"[plan] step{i}: ode steps integrate a constraint row")
            if source == "row" and not 1 <= index <= n:
                raise ConfigError(f"[plan] step{i}: no constraint row {index}")
            if source == "output" and not (output is not None and 1 <= index <= output.m):
                raise ConfigError(f"[plan] step{i}: no output row {index}")
            steps_out.append(PlanStep(target, kind, source, index))
        _done(sec, "plan")
        plan = tuple(steps_out)

    return Problem(
        system=system,
        trajectory=trajectory,
        output_desired=output_desired,
        time=window,
        plan=plan,
        free=free,
    )


def load_system(config_text):
    """Parse a config file and return just the validated system."""
    return load_problem(config_text).system


def _fmt(value):
    return format(float(value), ".17g")


def dump_config(problem):
    """Render a Problem (or bare AffineSystem) back to config text.

    Round trip is exact: expressions print back to equivalent trees and
    numbers carry 17 significant digits.
    """
    if isinstance(problem, AffineSystem):
        problem = Problem(system=problem)
    sys = problem.system
    lines = ["[system]", f"n = {sys.n}", f"p = {sys.p}", "", "[dynamics]"]
    for k, e in enumerate(sys.drift_expressions, start=1):
        lines.append(f"R{k} = {e}")
    lines.append("")
    lines.append("[input]")
    for k, row in enumerate(sys.input_expressions, start=1):
        lines.append(f"B{k} = " + ", ".join(str(e) for e in row))
    if sys.output is not None:
        lines.append("")
        lines.append("[output]")
        if isinstance(sys.output, LinearOutput):
            for j, row in enumerate(sys.output.matrix, start=1):
                lines.append(f"C{j} = " + ", ".join(_fmt(v) for v in row))
        else:
            for j, e in enumerate(sys.output.expressions, start=1):
                lines.append(f"H{j} = {e}")
    lines.append("")
    lines.append("[initial]")
    lines.append("x0 = " + ", ".join(_fmt(v) for v in sys.x0))
    if problem.trajectory is not None:
        if not isinstance(problem.trajectory, AnalyticTrajectory):
            raise ValueError("only closed-form trajectories can be dumped to config")
        lines.append("")
        lines.append("[trajectory]")
        for k, e in enumerate(problem.trajectory.expressions, start=1):
            lines.append(f"x{k} = {e}")
    if problem.output_desired is not None:
        if not isinstance(problem.output_desired, AnalyticTrajectory):
            raise ValueError("only closed-form outputs can be dumped to config")
        lines.append("")
        lines.append("[output_desired]")
        for j, e in enumerate(problem.output_desired.expressions, start=1):
            lines.append(f"y{j} = {e}")
    if problem.time is not None:
        lines.append("")
        lines.append("[time]")
        lines.append(f"t0 = {_fmt(problem.time.t0)}")
        lines.append(f"t1 = {_fmt(problem.time.t1)}")
        lines.append(f"steps = {problem.time.steps}")
    if problem.free:
        lines.append("")
        lines.append("[free]")
        for k in sorted(problem.free):
            lines.append(f"x{k} = {problem.free[k]}")
    if problem.plan:
        lines.append("")
        lines.append("[plan]")
        for i, step in enumerate(problem.plan, start=1):
            src = f"y{step.index}" if step.source == "output" else f"row{step.index}"
            lines.append(f"step{i} = x{step.target} <- {step.kind}({src})")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# Built-in example systems

_EXAMPLES = {
    "mechanical-pendulum": """\
# frictionless pendulum with torque actuation on the velocity equation
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

[output_desired]
y1 = sin(t)

[time]
t0 = 0
t1 = 10
steps = 10000
""",
    "devasia4": """\
# four-state single-input benchmark with internal dynamics on both sides
# of the actuated channel
[system]
n = 4
p = 1

[dynamics]
R1 = x2 - x1
R2 = x1^3 - 3*x2
R3 = x1 - 2*x3
R4 = x3^2 - x4

[input]
B1 = 0
B2 = 2 + sin(x4)^2
B3 = 0
B4 = 0

[output]
C1 = 1, 0, -3, 0

[initial]
x0 = 0, 1, 0, 0

[output_desired]
y1 = sin(t)

[time]
t0 = 0
t1 = 2
steps = 2000

# elimination order for the nonlinear cascade solver: x3 follows from the
# output row once x1 is known, x1 integrates constraint row 3 through that
# relation, then rows 1 and 4 hand over x2 and x4
[plan]
step1 = x3 <- algebraic(y1)
step2 = x1 <- ode(row3)
step3 = x2 <- algebraic(row1)
step4 = x4 <- ode(row4)
""",
    "fitzhugh-nagumo": """\
# spiking neuron model, stimulus current on the activator variable
[system]
n = 2
p = 1

[dynamics]
R1 = x1 - x1^3/3 - x2
R2 = 0.08*(x1 + 0.7 - 0.8*x2)

[input]
B1 = 1
B2 = 0

[output]
C1 = 1, 0

[initial]
x0 = 0, 0

[time]
t0 = 0
t1 = 100
steps = 10000
""",
}

_EXAMPLE_ORDER = ("mechanical-pendulum", "devasia4", "fitzhugh-nagumo")


def builtin_names():
    return list(_EXAMPLE_ORDER)


def builtin_config(name):
    """Config text for a built-in example, as `examples --show` prints it."""
    if name not in _EXAMPLES:
        raise UnknownExampleError(
            f"unknown example {name!r}; available: {', '.join(_EXAMPLE_ORDER)}"
        )
    return _EXAMPLES[name]


def builtin_example(name):
    """Load a built-in example as a Problem (system plus default extras)."""
    return load_problem(builtin_config(name), name=name)
