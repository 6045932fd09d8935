"""Turn a desired output history into a full desired state trajectory.

Three routes, matching how much structure the system offers: a reduced
linear DAE solve when the unactuated drift is affine and the output is
linear, a row-by-row nonlinear cascade driven by an elimination plan,
and the two-state computed-torque shortcut.
"""

import dataclasses
import logging

import numpy as np

from .errors import (
    ConfigError,
    DimensionError,
    DomainError,
    InconsistentInitialDataError,
    NoOutputDefinedError,
    NotMechanicalFormError,
    PlanInfeasibleError,
    UnsupportedStructureError,
)
from .linalg import (
    DEFAULT_RANK_TOL,
    numeric_rank,
    projectors_from_input,
    projectors_from_output,
    pseudoinverse_wide,
)
from .realizability import ControlSignal
from .simulate import integrate_rk4
from .systems import AnalyticTrajectory, PlanStep, SampledTrajectory

log = logging.getLogger(__name__)

CLASS_PURE_ODE = "PureODE"
CLASS_INDEX1 = "Index1"
CLASS_INDEX2 = "Index2"
CLASS_UNSUPPORTED = "Unsupported"

DEFAULT_TOL_INITIAL = 1e-8


class _Constant:
    """Prescribed channel holding a fixed value."""

    def __init__(self, value):
        self._value = float(value)

    def value(self, t):
        return np.array([self._value])

    def derivative(self, t):
        return np.array([0.0])

    def second_derivative(self, t):
        return np.array([0.0])


class _Stacked:
    """Concatenation of signal channels into one vector-valued signal."""

    def __init__(self, parts):
        self.parts = parts

    def value(self, t):
        return np.concatenate([np.atleast_1d(p.value(t)) for p in self.parts])

    def derivative(self, t):
        return np.concatenate(
            [np.atleast_1d(p.derivative(t)) for p in self.parts]
        )

    def second_derivative(self, t):
        vals = []
        for p in self.parts:
            fn = getattr(p, "second_derivative", None)
            if fn is None:
                return None
            vals.append(np.atleast_1d(fn(t)))
        return np.concatenate(vals)


def _projector_basis(proj, r):
    """Orthonormal basis of the range of an orthogonal projector."""
    if r == 0:
        return np.zeros((proj.shape[0], 0))
    U, _, _ = np.linalg.svd(proj)
    return U[:, :r]


@dataclasses.dataclass
class OutputRealizationProblem:
    sys: object
    yd: object
    A: np.ndarray
    b: np.ndarray
    classification: str
    free_parameter_count: int
    prescribed: tuple = ()
    _signal: object = dataclasses.field(default=None, repr=False)
    _C_aug: np.ndarray = dataclasses.field(default=None, repr=False)
    _Cplus: np.ndarray = dataclasses.field(default=None, repr=False)
    _Nhat: np.ndarray = dataclasses.field(default=None, repr=False)
    _Qhat: np.ndarray = dataclasses.field(default=None, repr=False)
    _E: np.ndarray = dataclasses.field(default=None, repr=False)
    _F: np.ndarray = dataclasses.field(default=None, repr=False)
    _U: np.ndarray = dataclasses.field(default=None, repr=False)
    _V: np.ndarray = dataclasses.field(default=None, repr=False)
    _sigma: np.ndarray = dataclasses.field(default=None, repr=False)
    _rank: int = dataclasses.field(default=0, repr=False)
    _gb: np.ndarray = dataclasses.field(default=None, repr=False)
    _gA: np.ndarray = dataclasses.field(default=None, repr=False)
    _gC: np.ndarray = dataclasses.field(default=None, repr=False)


@dataclasses.dataclass
class InitialConsistency:
    """Residuals the starting state must satisfy for a solution to pass
    through it: the output match itself, plus any conditions created by
    algebraic constraint rows (these involve the output rate)."""

    output_match_residual: float
    extra_conditions: list

    @property
    def max_residual(self):
        worst = self.output_match_residual
        for v in self.extra_conditions:
            worst = max(worst, abs(v))
        return worst


def _greedy_augmentation(C, n, x0, free):
    """Choose the freely assignable components and their time courses.

    User-prescribed channels come first; remaining freedom defaults to
    holding the component at its initial value.
    """
    rows = [C]
    channels = []
    prescribed = []

    def independent(row):
        stacked = np.vstack(rows + [row])
        return np.linalg.matrix_rank(stacked, tol=1e-10) > np.linalg.matrix_rank(
            np.vstack(rows), tol=1e-10
        )

    for k in sorted(free):
        if not isinstance(k, (int, np.integer)) or not 1 <= k <= n:
            raise ConfigError(f"[free] refers to unknown state x{k}")
        row = np.zeros((1, n))
        row[0, k - 1] = 1.0
        if not independent(row):
            raise ConfigError(
                f"[free] x{k} is already determined by the output rows"
            )
        rows.append(row)
        channels.append(AnalyticTrajectory([free[k]]))
        prescribed.append(k)

    budget = C.shape[0] + (len(rows) - 1)
    for k in range(1, n + 1):
        if len(rows) - 1 == budget - C.shape[0] and len(rows) - 1 == len(prescribed):
            pass
        if len(prescribed) == budget - C.shape[0]:
            break
        if k in prescribed:
            continue
    return rows, channels, prescribed


def reduce_dae(sys, yd, A, b, free=None, rank_tol=DEFAULT_RANK_TOL):
    """Reduce {constraint rows, y = C x} to explicit form and classify it.

    The output rows and any freely prescribed components pin down part of
    the state; what remains obeys a square linear pencil whose rank
    structure decides the solution strategy (see CLASS_* constants).
    """
    if sys.output is None:
        raise NoOutputDefinedError("system defines no output map")
    C = sys.output_matrix()
    if C is None:
        raise UnsupportedStructureError(
            "the reduced solver needs a linear output map; use solve_cascade"
        )
    n, p, m = sys.n, sys.p, sys.m
    if m > p:
        raise DimensionError(
            f"{m} output rows exceed {p} inputs; no realization family exists"
        )
    if yd.dim != m:
        raise DimensionError(
            f"desired output has {yd.dim} components, the map has {m}"
        )
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float)
    if A.shape != (n, n) or b.shape != (n,):
        raise DimensionError("affine part has the wrong shape")
    free = dict(free) if free else {}
    if len(free) > p - m:
        raise ConfigError(
            f"[free] prescribes {len(free)} components but only {p - m} are free"
        )

    x0 = np.asarray(sys.x0, dtype=float)
    rows = [C]
    channels = [yd]
    prescribed = []
    for k in sorted(free):
        if not 1 <= int(k) <= n:
            raise ConfigError(f"[free] refers to unknown state x{k}")
        row = np.zeros((1, n))
        row[0, int(k) - 1] = 1.0
        if np.linalg.matrix_rank(np.vstack(rows + [row]), tol=1e-10) <= \
                np.linalg.matrix_rank(np.vstack(rows), tol=1e-10):
            raise ConfigError(
                f"[free] x{k} is already determined by the output rows"
            )
        rows.append(row)
        channels.append(AnalyticTrajectory([free[k]]))
        prescribed.append(int(k))
    for k in range(1, n + 1):
        if len(prescribed) == p - m:
            break
        if k in prescribed:
            continue
        row = np.zeros((1, n))
        row[0, k - 1] = 1.0
        if np.linalg.matrix_rank(np.vstack(rows + [row]), tol=1e-10) <= \
                np.linalg.matrix_rank(np.vstack(rows), tol=1e-10):
            continue
        rows.append(row)
        channels.append(_Constant(x0[k - 1]))
        prescribed.append(k)

    C_aug = np.vstack(rows)
    signal = _Stacked(channels)
    _, Q = projectors_from_input(sys.input_matrix(0.0, x0))
    _, N = projectors_from_output(C_aug)
    k_dim = n - p
    Qhat = _projector_basis(Q, k_dim)
    Nhat = _projector_basis(N, k_dim)
    Cplus = pseudoinverse_wide(C_aug)

    E = Qhat.T @ Nhat
    F = Qhat.T @ A @ Nhat
    gb = Qhat.T @ b
    gA = Qhat.T @ A @ Cplus
    gC = Qhat.T @ Cplus

    r = numeric_rank(E, rank_tol, scale=1.0)
    if r == k_dim:
        classification = CLASS_PURE_ODE
        U = V = np.eye(k_dim)
        sigma = np.array([])
    else:
        U, s, Vt = np.linalg.svd(E)
        V = Vt.T
        sigma = s[:r]
        F_rot = U.T @ F @ V
        F22 = F_rot[r:, r:]
        l = k_dim - r
        fscale = max(1.0, float(np.linalg.norm(F_rot, 2))) if F_rot.size else 1.0
        if numeric_rank(F22, rank_tol, scale=fscale) < l:
            classification = CLASS_UNSUPPORTED
        else:
            G2 = (U.T @ gC)[r:, :]
            rate_free = np.max(np.abs(G2)) <= 1e-12 * max(
                1.0, float(np.linalg.norm(gC))
            )
            classification = CLASS_INDEX1 if rate_free else CLASS_INDEX2

    return OutputRealizationProblem(
        sys=sys, yd=yd, A=A, b=b,
        classification=classification,
        free_parameter_count=p - m,
        prescribed=tuple(prescribed),
        _signal=signal, _C_aug=C_aug, _Cplus=Cplus,
        _Nhat=Nhat, _Qhat=Qhat, _E=E, _F=F,
        _U=U if r < k_dim else np.eye(k_dim),
        _V=V if r < k_dim else np.eye(k_dim),
        _sigma=sigma, _rank=r if r < k_dim else k_dim,
        _gb=gb, _gA=gA, _gC=gC,
    )


def _forcing(problem, t):
    sig = problem._signal
    return problem._gb + problem._gA @ sig.value(t) - problem._gC @ sig.derivative(t)


def _forcing_rate(problem, t):
    sig = problem._signal
    second = sig.second_derivative(t)
    if second is None:
        return None
    return problem._gA @ sig.derivative(t) - problem._gC @ second


def check_initial_consistency(problem, x0, t0=None):
    """Residuals x0 must satisfy: output match plus algebraic-row checks."""
    x0 = np.asarray(x0, dtype=float)
    sys = problem.sys
    if t0 is None:
        domain = getattr(problem.yd, "domain", None)
        t0 = domain[0] if domain else 0.0
    C = sys.output_matrix()
    out_res = float(np.max(np.abs(problem.yd.value(t0) - C @ x0)))
    extra = []
    for k, channel in zip(problem.prescribed, problem._signal.parts[1:]):
        extra.append(float(np.atleast_1d(channel.value(t0))[0] - x0[k - 1]))
    r = problem._rank
    k_dim = problem._E.shape[0]
    if problem.classification in (CLASS_INDEX1, CLASS_INDEX2) and r < k_dim:
        w0 = problem._Nhat.T @ x0
        w_rot = problem._V.T @ w0
        F_rot = problem._U.T @ problem._F @ problem._V
        g_rot = problem._U.T @ _forcing(problem, t0)
        residual_rows = F_rot[r:, :] @ w_rot + g_rot[r:]
        extra.extend(float(v) for v in residual_rows)
    return InitialConsistency(output_match_residual=out_res,
                              extra_conditions=extra)


def solve_output_realization(problem, x0, grid,
                             tol_initial=DEFAULT_TOL_INITIAL):
    """Integrate the reduced system and assemble the state trajectory.

    Algebraic rows are evaluated in closed form at every node, so they
    hold exactly; only the genuinely differential part is stepped with
    RK4.  Derivative samples are exact when the prescribed signals can
    provide second derivatives.
    """
    if problem.classification == CLASS_UNSUPPORTED:
        raise UnsupportedStructureError(
            "constraint/output pencil has index above 2 (or is singular); "
            "this problem family is not covered"
        )
    grid = np.asarray(grid, dtype=float)
    x0 = np.asarray(x0, dtype=float)
    consistency = check_initial_consistency(problem, x0, t0=grid[0])
    if consistency.max_residual > tol_initial:
        raise InconsistentInitialDataError(
            f"x0 violates the initial conditions: output match "
            f"{consistency.output_match_residual:.3e}, extra "
            f"{[f'{v:.3e}' for v in consistency.extra_conditions]}"
        )
    sig = problem._signal
    Nhat, Cplus = problem._Nhat, problem._Cplus
    k_dim = problem._E.shape[0]
    r = problem._rank

    if problem.classification == CLASS_PURE_ODE:
        Einv = np.linalg.inv(problem._E) if k_dim else np.zeros((0, 0))
        EF = Einv @ problem._F

        def field(t, w):
            return EF @ w + Einv @ _forcing(problem, t)

        w_nodes = integrate_rk4(field, Nhat.T @ x0, grid)
        w_dot = np.array([field(t, w_nodes[i]) for i, t in enumerate(grid)])
    else:
        U, V, sigma = problem._U, problem._V, problem._sigma
        F_rot = U.T @ problem._F @ V
        F11 = F_rot[:r, :r]
        F12 = F_rot[:r, r:]
        F21 = F_rot[r:, :r]
        F22 = F_rot[r:, r:]
        F22inv = np.linalg.inv(F22)
        core = (F11 - F12 @ F22inv @ F21) / sigma[:, None] if r else np.zeros((0, 0))

        def g_rot(t):
            return problem._U.T @ _forcing(problem, t)

        def field(t, wd):
            g = g_rot(t)
            rhs = F11 @ wd + F12 @ (-F22inv @ (F21 @ wd + g[r:])) + g[:r]
            return rhs / sigma if r else rhs

        wd_nodes = integrate_rk4(field, (V.T @ (Nhat.T @ x0))[:r], grid)
        w_nodes = np.empty((grid.size, k_dim))
        w_dot = np.empty((grid.size, k_dim))
        exact_rate = True
        for i, t in enumerate(grid):
            g = g_rot(t)
            wa = -F22inv @ (F21 @ wd_nodes[i] + g[r:])
            w_nodes[i] = V @ np.concatenate([wd_nodes[i], wa])
            wd_dot = field(t, wd_nodes[i])
            grate = _forcing_rate(problem, t)
            if grate is None:
                exact_rate = False
                break
            grate = problem._U.T @ grate
            wa_dot = -F22inv @ (F21 @ wd_dot + grate[r:])
            w_dot[i] = V @ np.concatenate([wd_dot, wa_dot])
        if not exact_rate:
            w_dot = None
        _ = core

    samples = np.empty((grid.size, problem.sys.n))
    for i, t in enumerate(grid):
        samples[i] = Cplus @ sig.value(t) + Nhat @ w_nodes[i]
    if w_dot is None:
        derivs = None
    else:
        derivs = np.empty_like(samples)
        for i, t in enumerate(grid):
            derivs[i] = Cplus @ sig.derivative(t) + Nhat @ w_dot[i]
    log.info("output realization solved: %s, %d nodes",
             problem.classification, grid.size)
    return SampledTrajectory(grid, samples, derivs)


# ---------------------------------------------------------------------------
# nonlinear cascade


def _row_is_unactuated(sys, i, probes):
    for x in probes:
        row = sys.input_matrix(0.0, x)[i - 1]
        if np.max(np.abs(row)) > 1e-12:
            return False
    return True


def _output_deps(sys, j):
    C = sys.output_matrix()
    if C is not None:
        return {k + 1 for k in range(sys.n) if C[j - 1, k] != 0.0}
    return {k for k in sys.output.expressions[j - 1].variable_indices}


def _output_eval(sys, j, x):
    return float(np.atleast_1d(sys.output_value(x))[j - 1])


def _affine_solve(evaluate, rhs, label):
    """Solve evaluate(v) = rhs for v, requiring the map to be affine."""
    f0 = evaluate(0.0)
    f1 = evaluate(1.0)
    coef = f1 - f0
    f2 = evaluate(2.0)
    scale = max(1.0, abs(f0), abs(f1), abs(f2))
    if abs(f2 - (2.0 * f1 - f0)) > 1e-8 * scale:
        raise PlanInfeasibleError(f"{label} is not affine in the unknown")
    if abs(coef) <= 1e-12 * scale:
        raise PlanInfeasibleError(f"{label} does not determine the unknown")
    return (rhs - f0) / coef, coef


class _Cascade:
    """Executes an elimination plan step by step."""

    def __init__(self, sys, yd, x0, grid):
        self.sys = sys
        self.yd = yd
        self.x0 = np.asarray(x0, dtype=float)
        self.grid = np.asarray(grid, dtype=float)
        self.h = float(self.grid[1] - self.grid[0])
        self.resolved = {}
        self.pending = {}
        rng = np.random.default_rng(0)
        self.probes = [self.x0] + list(
            self.x0 + rng.uniform(-1.0, 1.0, (3, sys.n))
        )

    def state_at(self, t, overrides):
        x = np.empty(self.sys.n)
        for k in range(1, self.sys.n + 1):
            if k in overrides:
                x[k - 1] = overrides[k]
            elif k in self.resolved:
                x[k - 1] = self.resolved[k].value(t)[0]
            else:
                x[k - 1] = np.nan
        return x

    def _require_resolved(self, deps, step, allow=()):
        missing = sorted(d for d in deps
                         if d not in self.resolved and d not in allow)
        if missing:
            raise PlanInfeasibleError(
                f"step for x{step.target} references unresolved "
                f"x{', x'.join(str(d) for d in missing)}"
            )

    def _fd_rate(self, fn, t):
        """Centered derivative of a scalar time function, one-sided at the
        domain edges so interpolated components stay inside their grid."""
        d = self.h / 8.0
        t0, t1 = self.grid[0], self.grid[-1]
        if t - d < t0:
            return (-3.0 * fn(t) + 4.0 * fn(t + d) - fn(t + 2 * d)) / (2 * d)
        if t + d > t1:
            return (3.0 * fn(t) - 4.0 * fn(t - d) + fn(t - 2 * d)) / (2 * d)
        return (fn(t + d) - fn(t - d)) / (2 * d)

    def _materialize_scalar(self, k, values, derivs=None):
        data = np.asarray(values, dtype=float)[:, None]
        d = None if derivs is None else np.asarray(derivs, dtype=float)[:, None]
        self.resolved[k] = SampledTrajectory(self.grid, data, d)

    def algebraic_step(self, step):
        k = step.target
        if k in self.resolved or k in self.pending:
            raise PlanInfeasibleError(f"x{k} is resolved twice")
        if step.source == "output":
            deps = _output_deps(self.sys, step.index) - {k}
            unresolved = sorted(d for d in deps if d not in self.resolved)
            if len(unresolved) > 1:
                raise PlanInfeasibleError(
                    f"output row {step.index} needs several unresolved states"
                )
            if len(unresolved) == 1:
                # defer: the next ode step integrates through this relation
                self.pending[k] = (step, unresolved[0])
                return
            vals = np.empty(self.grid.size)
            for i, t in enumerate(self.grid):
                rhs = float(np.atleast_1d(self.yd.value(t))[step.index - 1])
                vals[i], _ = _affine_solve(
                    lambda v, t=t: _output_eval(
                        self.sys, step.index, self.state_at(t, {k: v})),
                    rhs, f"output row {step.index}")
            self._materialize_scalar(k, vals)
        else:
            i = step.index
            expr = self.sys.drift_expressions[i - 1]
            deps = set(expr.variable_indices) | {i}
            self._require_resolved(deps - {k}, step)
            if i not in self.resolved:
                raise PlanInfeasibleError(
                    f"row {i} solves x{k} only once x{i}' is known"
                )
            source = self.resolved[i]
            vals = np.empty(self.grid.size)
            for idx, t in enumerate(self.grid):
                rhs = source.derivative(t)[0]
                vals[idx], _ = _affine_solve(
                    lambda v, t=t: float(self.sys.drift(
                        t, self.state_at(t, {k: v}))[i - 1]),
                    rhs, f"row {i}")
            self._materialize_scalar(k, vals)

    def ode_step(self, step, unactuated):
        k = step.target
        i = step.index
        if k in self.resolved:
            raise PlanInfeasibleError(f"x{k} is resolved twice")
        if i not in unactuated:
            raise PlanInfeasibleError(
                f"row {i} is actuated; it constrains nothing"
            )
        expr = self.sys.drift_expressions[i - 1]
        deps = set(expr.variable_indices)
        if i == k:
            self._require_resolved(deps - {k}, step)

            def rhs(t, v):
                return float(self.sys.drift(t, self.state_at(t, {k: v}))[i - 1])
        elif i in self.pending:
            pend_step, base = self.pending.pop(i)
            if base != k:
                raise PlanInfeasibleError(
                    f"x{i} was deferred waiting for x{base}, not x{k}"
                )
            dep_pool = (_output_deps(self.sys, pend_step.index) - {i, k})
            self._require_resolved(dep_pool, step)
            self._require_resolved(deps - {i, k}, step)

            def relation(t, v):
                rhs_val = float(
                    np.atleast_1d(self.yd.value(t))[pend_step.index - 1])
                sol, _ = _affine_solve(
                    lambda w, t=t, v=v: _output_eval(
                        self.sys, pend_step.index,
                        self.state_at(t, {i: w, k: v})),
                    rhs_val, f"output row {pend_step.index}")
                return sol

            # x_i = alpha * x_k + beta(t) with constant alpha
            t_probe = self.grid[0]
            alpha = relation(t_probe, 1.0) - relation(t_probe, 0.0)
            for t_check in (self.grid[self.grid.size // 2], self.grid[-1]):
                a2 = relation(t_check, 1.0) - relation(t_check, 0.0)
                if abs(a2 - alpha) > 1e-9 * max(1.0, abs(alpha)):
                    raise PlanInfeasibleError(
                        f"output row {pend_step.index} couples x{i} and x{k} "
                        "with a time-varying coefficient"
                    )
            if abs(alpha) <= 1e-12:
                raise PlanInfeasibleError(
                    f"output row {pend_step.index} does not couple x{i} to x{k}"
                )

            def beta(t):
                return relation(t, 0.0)

            def rhs(t, v):
                x = self.state_at(t, {k: v})
                x[i - 1] = alpha * v + beta(t)
                drift_val = float(self.sys.drift(t, x)[i - 1])
                return (drift_val - self._fd_rate(beta, t)) / alpha

            self._integrate(k, rhs)
            vals = alpha * self.resolved[k].samples[:, 0] + np.array(
                [beta(t) for t in self.grid])
            dvals = alpha * self.resolved[k].derivative_samples[:, 0] + np.array(
                [self._fd_rate(beta, t) for t in self.grid])
            self._materialize_scalar(i, vals, dvals)
            return
        else:
            raise PlanInfeasibleError(
                f"row {i} does not drive x{k}: x{i} is neither the target "
                "nor a deferred relation through it"
            )
        self._integrate(k, rhs)

    def _integrate(self, k, rhs):
        h = self.h
        vals = np.empty(self.grid.size)
        rates = np.empty(self.grid.size)
        v = float(self.x0[k - 1])
        vals[0] = v
        for idx in range(self.grid.size - 1):
            t = self.grid[idx]
            k1 = rhs(t, v)
            k2 = rhs(t + h / 2, v + h / 2 * k1)
            k3 = rhs(t + h / 2, v + h / 2 * k2)
            k4 = rhs(t + h, v + h * k3)
            rates[idx] = k1
            v = v + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
            vals[idx + 1] = v
        rates[-1] = rhs(self.grid[-1], v)
        self._materialize_scalar(k, vals, rates)


def _auto_plan(sys, yd, unactuated):
    """Greedy elimination order: output rows and constraint rows are used
    as soon as they determine a single new state, either directly or as a
    deferred relation feeding the following integration step."""
    n = sys.n
    m = sys.m
    resolved = set()
    steps = []
    row_deps = [set(sys.drift_expressions[i - 1].variable_indices)
                for i in range(1, n + 1)]
    while len(resolved) < n:
        progress = False
        for j in range(1, m + 1):
            un = _output_deps(sys, j) - resolved
            if len(un) == 1:
                k = un.pop()
                steps.append(PlanStep(k, "algebraic", "output", j))
                resolved.add(k)
                progress = True
                break
        if progress:
            continue
        for i in sorted(unactuated):
            if i not in resolved:
                continue
            un = (row_deps[i - 1] | {i}) - resolved
            if len(un) == 1:
                k = un.pop()
                steps.append(PlanStep(k, "algebraic", "row", i))
                resolved.add(k)
                progress = True
                break
        if progress:
            continue
        for i in sorted(unactuated):
            if i in resolved:
                continue
            if row_deps[i - 1] - {i} <= resolved:
                steps.append(PlanStep(i, "ode", "row", i))
                resolved.add(i)
                progress = True
                break
        if progress:
            continue
        for j in range(1, m + 1):
            un = sorted(_output_deps(sys, j) - resolved)
            if len(un) != 2:
                continue
            for a in un:
                b = un[0] if un[1] == a else un[1]
                if a in unactuated and (row_deps[a - 1] - {a, b}) <= resolved:
                    steps.append(PlanStep(a, "algebraic", "output", j))
                    steps.append(PlanStep(b, "ode", "row", a))
                    resolved.update((a, b))
                    progress = True
                    break
            if progress:
                break
        if not progress:
            raise PlanInfeasibleError(
                "could not derive an elimination order; supply [plan]"
            )
    return tuple(steps)


def solve_cascade(sys, yd, plan, x0, grid):
    """Assemble a realization row by row following an elimination plan.

    Handles nonlinear drift as long as each step is affine in the one
    state it introduces.  With plan=None a greedy order is derived.
    """
    if sys.output is None:
        raise NoOutputDefinedError("system defines no output map")
    grid = np.asarray(grid, dtype=float)
    cascade = _Cascade(sys, yd, x0, grid)
    unactuated = {
        i for i in range(1, sys.n + 1)
        if _row_is_unactuated(sys, i, cascade.probes)
    }
    if plan is None:
        plan = _auto_plan(sys, yd, unactuated)
        log.info("auto plan: %s", " ; ".join(
            f"x{s.target} <- {s.kind}({s.source}{s.index})" for s in plan))
    for step in plan:
        if step.kind == "algebraic":
            if step.source == "row" and step.index not in unactuated:
                raise PlanInfeasibleError(
                    f"row {step.index} is actuated; it constrains nothing"
                )
            cascade.algebraic_step(step)
        else:
            cascade.ode_step(step, unactuated)
    if cascade.pending:
        names = ", ".join(f"x{k}" for k in sorted(cascade.pending))
        raise PlanInfeasibleError(f"deferred relations never resolved: {names}")
    missing = [k for k in range(1, sys.n + 1) if k not in cascade.resolved]
    if missing:
        names = ", ".join(f"x{k}" for k in missing)
        raise PlanInfeasibleError(f"plan leaves {names} unresolved")
    samples = np.column_stack(
        [cascade.resolved[k].samples[:, 0] for k in range(1, sys.n + 1)]
    )
    derivs = np.column_stack(
        [cascade.resolved[k].derivative_samples[:, 0]
         for k in range(1, sys.n + 1)]
    )
    return SampledTrajectory(grid, samples, derivs)


def computed_torque(sys, yd, grid):
    """Two-state shortcut: invert the acceleration row along the output.

    Requires the kinematic-chain shape (x1' = x2, only x2 actuated,
    y = x1); the control follows from the output's first two derivatives
    without integrating anything.
    """
    if sys.n != 2 or sys.p != 1:
        raise NotMechanicalFormError(
            f"needs a two-state single-input system, got n={sys.n} p={sys.p}"
        )
    C = sys.output_matrix()
    if C is None or not np.allclose(C, [[1.0, 0.0]], atol=1e-12):
        raise NotMechanicalFormError("output must read the first state")
    if yd.dim != 1:
        raise DimensionError("desired output must be scalar")
    rng = np.random.default_rng(3)
    probes = rng.uniform(-2.0, 2.0, (8, 2))
    probes = np.vstack([probes, 5.0 * probes])
    for x in probes:
        if abs(sys.drift(0.0, x)[0] - x[1]) > 1e-9 * max(1.0, abs(x[1])):
            raise NotMechanicalFormError(
                "first drift row must be the velocity integrator x2"
            )
        if abs(sys.input_matrix(0.0, x)[0, 0]) > 1e-12:
            raise NotMechanicalFormError("first row must be unactuated")
    second = getattr(yd, "second_derivative", None)
    if second is None:
        raise NotMechanicalFormError(
            "desired output must provide a second derivative"
        )
    grid = np.asarray(grid, dtype=float)
    u = np.empty((grid.size, 1))
    for i, t in enumerate(grid):
        y = float(np.atleast_1d(yd.value(t))[0])
        dy = float(np.atleast_1d(yd.derivative(t))[0])
        ddy = float(np.atleast_1d(second(t))[0])
        state = np.array([y, dy])
        b2 = float(sys.input_matrix(t, state)[1, 0])
        if abs(b2) <= 1e-12:
            raise DomainError(f"input coefficient vanishes at t={t}")
        u[i, 0] = (ddy - float(sys.drift(t, state)[1])) / b2
    return ControlSignal(grid, u)
