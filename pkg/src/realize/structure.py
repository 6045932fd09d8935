"""Structure checks that unlock closed-form machinery: constant input
projectors, affine unactuated drift, rank tests for steering the
unactuated directions, and polynomial point-to-point transfer synthesis.
"""

import dataclasses
import logging

import numpy as np

from .errors import (
    NoOutputDefinedError,
    NotAffineError,
    NotControllableError,
    ProjectorNotConstantError,
    SolveFailedError,
    UnsupportedStructureError,
)
from .linalg import (
    DEFAULT_RANK_TOL,
    matrix_exponential,
    numeric_rank,
    projectors_from_input,
)
from .systems import SampledTrajectory, time_grid

log = logging.getLogger(__name__)

DEFAULT_PROJECTOR_TOL = 1e-10
DEFAULT_AFFINE_TOL = 1e-8
DEFAULT_TRANSFER_TOL = 1e-6
# Gauss-Legendre nodes per grid interval; 5 is far past RK4 accuracy
QUADRATURE_NODES = 5


@dataclasses.dataclass
class ProjectorCheck:
    constant: bool
    max_deviation: float
    tol: float
    sample_count: int

    def __bool__(self):
        return self.constant


@dataclasses.dataclass
class AffinePart:
    """Unactuated drift model Q R(x) ~ A x + b.

    A carries only the unactuated rows (P A = 0); the actuated rows are
    zero by construction and never consulted.
    """

    A: np.ndarray
    b: np.ndarray
    fit_residual: float


@dataclasses.dataclass
class ControllabilityReport:
    matrix: np.ndarray
    rank: int
    required: int
    controllable: bool
    singular_values: np.ndarray
    projector_check: ProjectorCheck
    affine: AffinePart


@dataclasses.dataclass
class TransferProblem:
    x0: np.ndarray
    x1: np.ndarray
    t0: float
    t1: float
    basis_size: int
    coefficients: np.ndarray
    residual: float


class TransferTrajectory(SampledTrajectory):
    """Synthesized transfer path; keeps the solve record in .problem."""

    def __init__(self, grid, samples, derivative_samples, problem):
        super().__init__(grid, samples, derivative_samples)
        self.problem = problem


def _rng(rng):
    if rng is None:
        return np.random.default_rng(0)
    if isinstance(rng, (int, np.integer)):
        return np.random.default_rng(int(rng))
    return rng


def _ball_points(center, radius, count, rng):
    n = center.size
    pts = np.empty((count, n))
    for i in range(count):
        direction = rng.standard_normal(n)
        norm = np.linalg.norm(direction)
        while norm == 0.0:
            direction = rng.standard_normal(n)
            norm = np.linalg.norm(direction)
        r = radius * rng.uniform() ** (1.0 / n)
        pts[i] = center + (r / norm) * direction
    return pts


def check_constant_projectors(sys, sample_count=20, tol=DEFAULT_PROJECTOR_TOL,
                              rng=None):
    """Probe whether the input-direction projector depends on the state.

    Evaluates P(x) at the initial state, at sample_count points in the
    unit ball around it, and at the same count on a 10x ball so a slow
    drift cannot hide inside a small neighbourhood.  The reported figure
    is the largest entrywise spread across all probes.
    """
    rng = _rng(rng)
    x0 = np.asarray(sys.x0, dtype=float)
    points = [x0]
    points.extend(_ball_points(x0, 1.0, sample_count, rng))
    points.extend(_ball_points(x0, 10.0, sample_count, rng))
    stack = np.empty((len(points), sys.n, sys.n))
    for i, x in enumerate(points):
        P, _ = projectors_from_input(sys.input_matrix(0.0, x))
        stack[i] = P
    deviation = float(np.max(stack.max(axis=0) - stack.min(axis=0)))
    return ProjectorCheck(
        constant=deviation <= tol,
        max_deviation=deviation,
        tol=tol,
        sample_count=sample_count,
    )


def extract_affine_part(sys, tol=DEFAULT_AFFINE_TOL, rng=None):
    """Fit Q R(x) = A x + b and certify the fit, or raise NotAffineError.

    Assumes the projectors are constant (check first).  b is read off at
    the origin and the columns of A from unit coordinate steps; the model
    is then validated at random points on two scales, because quadratic
    terms grow past any fixed tolerance once the probe radius does.
    """
    rng = _rng(rng)
    n = sys.n
    x0 = np.asarray(sys.x0, dtype=float)
    _, Q = projectors_from_input(sys.input_matrix(0.0, x0))

    def unactuated(x):
        return Q @ sys.drift(0.0, x)

    b = unactuated(np.zeros(n))
    A = np.empty((n, n))
    for j in range(n):
        e = np.zeros(n)
        e[j] = 1.0
        A[:, j] = unactuated(e) - b

    probes = np.vstack([
        _ball_points(np.zeros(n), 1.0, 25, rng),
        _ball_points(np.zeros(n), 10.0, 25, rng),
    ])
    residual = 0.0
    for x in probes:
        gap = unactuated(x) - A @ x - b
        residual = max(residual, float(np.max(np.abs(gap))))
    if residual > tol:
        raise NotAffineError(
            f"unactuated drift is not affine: fit residual {residual:.3e} "
            f"exceeds {tol:.1e}"
        )
    return AffinePart(A=A, b=b, fit_residual=residual)


def _ctrb_blocks(A, P, Q):
    A = np.asarray(A, dtype=float)
    n = A.shape[0]
    QAP = Q @ (A @ P)
    QAQ = Q @ (A @ Q)
    blocks = [QAP]
    for _ in range(n - 1):
        blocks.append(QAQ @ blocks[-1])
    return blocks


def controllability_matrix(A, P, Q):
    """Reachability matrix of the unactuated directions, shape (n, n*n).

    Block k is (QAQ)^k QAP: how the actuated component feeds the
    unactuated one after k passes through the constrained flow.
    """
    return np.hstack(_ctrb_blocks(A, P, Q))


def output_controllability_matrix(A, P, Q, C):
    """Like controllability_matrix but observed through y = C x."""
    C = np.asarray(C, dtype=float)
    return np.hstack([C @ P] + [C @ blk for blk in _ctrb_blocks(A, P, Q)])


def _structural_parts(sys, sample_count, rng):
    check = check_constant_projectors(sys, sample_count=sample_count, rng=rng)
    if not check.constant:
        raise ProjectorNotConstantError(
            f"input projector varies by {check.max_deviation:.3e} across "
            f"probe points (tol {check.tol:.1e})"
        )
    part = extract_affine_part(sys, rng=rng)
    P, Q = projectors_from_input(
        sys.input_matrix(0.0, np.asarray(sys.x0, dtype=float))
    )
    return check, part, P, Q


def check_controllable(sys, rank_tol=DEFAULT_RANK_TOL, sample_count=20,
                       rng=None):
    """Rank test: can the actuated component steer every unactuated one?

    Requires the structural assumptions and raises
    ProjectorNotConstantError or NotAffineError when they fail.  A rank
    short of n - p means "not proven controllable" rather than a
    disproof, except for globally linear dynamics where the test is
    exact.
    """
    check, part, P, Q = _structural_parts(sys, sample_count, rng)
    K = controllability_matrix(part.A, P, Q)
    svals = np.linalg.svd(K, compute_uv=False)
    # anchor the cutoff at the drift magnitude: a K that is pure roundoff
    # (tiny multiples of A) must count as rank zero, not full-rank noise
    rank = numeric_rank(K, rank_tol, scale=np.linalg.norm(part.A, 2))
    required = sys.n - sys.p
    return ControllabilityReport(
        matrix=K,
        rank=rank,
        required=required,
        controllable=rank == required,
        singular_values=svals,
        projector_check=check,
        affine=part,
    )


def check_output_controllable(sys, rank_tol=DEFAULT_RANK_TOL, sample_count=20,
                              rng=None):
    """Rank test for steering the readout y = C x instead of the state."""
    if sys.output is None:
        raise NoOutputDefinedError("system defines no output map")
    C = sys.output_matrix()
    if C is None:
        raise UnsupportedStructureError(
            "output controllability needs a linear output map"
        )
    check, part, P, Q = _structural_parts(sys, sample_count, rng)
    KC = output_controllability_matrix(part.A, P, Q, C)
    svals = np.linalg.svd(KC, compute_uv=False)
    c_scale = np.linalg.norm(C, 2) * max(1.0, np.linalg.norm(part.A, 2))
    rank = numeric_rank(KC, rank_tol, scale=c_scale)
    required = sys.m
    return ControllabilityReport(
        matrix=KC,
        rank=rank,
        required=required,
        controllable=rank == required,
        singular_values=svals,
        projector_check=check,
        affine=part,
    )


def _uniform(grid):
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or grid.size < 2:
        raise ValueError("grid must contain at least two points")
    steps = np.diff(grid)
    h = (grid[-1] - grid[0]) / (grid.size - 1)
    if h <= 0 or np.max(np.abs(steps - h)) > 1e-8 * abs(h):
        raise ValueError("grid must be uniform and increasing")
    return grid, h


def _node_kernels(QAQ, h, nodes):
    """Per-interval Gauss-Legendre data for kernels exp(QAQ*(end - tau)).

    Returns (offsets from interval start, weighted kernel matrices).
    """
    xi, w = np.polynomial.legendre.leggauss(nodes)
    offsets = 0.5 * h * (xi + 1.0)
    kernels = [
        0.5 * h * w[q] * matrix_exponential(QAQ * (h - offsets[q]))
        for q in range(nodes)
    ]
    return offsets, kernels


def propagate_constraint(A, b, P, Q, Pxd, Qx0, grid, nodes=QUADRATURE_NODES):
    """March the unactuated component forward from its flow equation.

    Given the actuated component as a function of time, the unactuated
    one is pinned down by  (Qx)' = QAQ (Qx) + QAP Pxd(t) + Qb.  Each step
    applies the exact interval flow and a Gauss-Legendre quadrature of
    the forcing, so accuracy is limited by the forcing smoothness rather
    than by the step size rule of an explicit integrator.
    """
    grid, h = _uniform(grid)
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float)
    pxd = Pxd.value if hasattr(Pxd, "value") else Pxd
    QA = Q @ A
    Qb = Q @ b
    QAQ = QA @ Q
    QAP = QA @ P
    E_h = matrix_exponential(QAQ * h)
    offsets, kernels = _node_kernels(QAQ, h, nodes)
    s = Q @ np.asarray(Qx0, dtype=float)
    out = np.empty((grid.size, s.size))
    out[0] = s
    for i in range(grid.size - 1):
        t = grid[i]
        acc = np.zeros_like(s)
        for off, ker in zip(offsets, kernels):
            v = np.asarray(pxd(t + off), dtype=float)
            acc += ker @ (QAP @ v + Qb)
        s = E_h @ s + acc
        out[i + 1] = s
    return out


def _bubble_basis(count, t0, t1):
    """Polynomials vanishing at both endpoints, built from Legendre pairs
    of matching parity so conditioning stays flat as count grows."""
    Legendre = np.polynomial.legendre.Legendre
    basis = []
    for j in range(count):
        k = j + 2
        coef = np.zeros(k + 1)
        coef[k] = 1.0
        coef[k % 2] -= 1.0
        psi = Legendre(coef, domain=[t0, t1])
        basis.append((psi, psi.deriv()))
    return basis


def synthesize_transfer(sys, x1, t0, t1, basis_size=None, steps=1000,
                        tol=DEFAULT_TRANSFER_TOL, rng=None):
    """Plan a trajectory from the system's x0 to x1 over [t0, t1].

    The actuated component is a polynomial interpolating the endpoints
    exactly; its interior wiggle (basis_size coefficient vectors in
    total) is chosen by least squares so the unactuated flow lands on
    x1.  Returns (trajectory, terminal residual).  Raises
    NotControllableError when the rank test fails and SolveFailedError
    when the landing defect stays above tol (a larger basis_size is the
    usual fix).
    """
    x1 = np.asarray(x1, dtype=float)
    if x1.shape != (sys.n,):
        raise ValueError(f"x1 must have shape ({sys.n},), got {x1.shape}")
    if not t0 < t1:
        raise ValueError(f"empty time window [{t0}, {t1}]")
    if basis_size is None:
        basis_size = sys.n + 4
    if basis_size < 3:
        raise ValueError("basis_size must be at least 3")

    report = check_controllable(sys, rng=rng)
    if not report.controllable:
        raise NotControllableError(
            f"rank test reaches {report.rank} of required {report.required}; "
            "transfer cannot be certified"
        )
    part = report.affine
    P, Q = projectors_from_input(
        sys.input_matrix(0.0, np.asarray(sys.x0, dtype=float))
    )
    x0 = np.asarray(sys.x0, dtype=float)
    n = sys.n
    T = float(t1 - t0)
    QA = Q @ part.A
    Qb = Q @ part.b
    QAQ = QA @ Q
    QAP = QA @ P
    n_bubbles = basis_size - 2
    basis = _bubble_basis(n_bubbles, t0, t1)

    # terminal value of the unactuated flow in terms of the bubble
    # coefficients: composite Gauss-Legendre, walked backwards so the
    # remaining-flow factor is a running matrix product
    intervals = 64
    hq = T / intervals
    E_hq = matrix_exponential(QAQ * hq)
    offsets, kernels = _node_kernels(QAQ, hq, QUADRATURE_NODES)
    slope = (x1 - x0) / T

    def line(tau):
        return x0 + slope * (tau - t0)

    E_rem = np.eye(n)
    base = np.zeros(n)
    S = [np.zeros((n, n)) for _ in range(n_bubbles)]
    for i in range(intervals - 1, -1, -1):
        start = t0 + i * hq
        for off, ker in zip(offsets, kernels):
            tau = start + off
            full_kernel = E_rem @ ker
            base += full_kernel @ (QAP @ line(tau) + Qb)
            for j, (psi, _) in enumerate(basis):
                S[j] += psi(tau) * full_kernel
        E_rem = E_rem @ E_hq
    flow_T = E_rem

    rhs = Q @ x1 - flow_T @ (Q @ x0) - base
    G = np.hstack([S[j] @ QAP for j in range(n_bubbles)])
    c, *_ = np.linalg.lstsq(G, rhs, rcond=None)
    predicted = float(np.max(np.abs(G @ c - rhs)))
    if predicted > tol:
        raise SolveFailedError(
            f"terminal defect {predicted:.3e} exceeds {tol:.1e}; "
            "retry with a larger basis_size"
        )
    coeffs = c.reshape(n_bubbles, n)

    def p_component(tau):
        v = line(tau)
        for j, (psi, _) in enumerate(basis):
            v = v + psi(tau) * coeffs[j]
        return P @ v

    grid = time_grid(t0, t1, steps)
    q_part = propagate_constraint(part.A, part.b, P, Q, p_component,
                                  Q @ x0, grid)
    p_part = np.array([p_component(t) for t in grid])
    samples = p_part + q_part
    derivs = np.empty_like(samples)
    for i, t in enumerate(grid):
        v = slope.copy()
        for j, (_, dpsi) in enumerate(basis):
            v = v + dpsi(t) * coeffs[j]
        derivs[i] = P @ v + QA @ samples[i] + Qb

    residual = float(np.max(np.abs(samples[-1] - x1)))
    if residual > tol:
        raise SolveFailedError(
            f"realized landing misses by {residual:.3e} (tol {tol:.1e}); "
            "retry with a larger basis_size or more steps"
        )
    problem = TransferProblem(
        x0=x0, x1=x1, t0=float(t0), t1=float(t1),
        basis_size=basis_size, coefficients=coeffs, residual=residual,
    )
    log.info("transfer synthesized: basis_size=%d residual=%.3e",
             basis_size, residual)
    return TransferTrajectory(grid, samples, derivs, problem), residual
