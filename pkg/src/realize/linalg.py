"""Dense matrix kernel used by every other module.

Conventions: the input matrix of a system is tall (n x p, full column
rank p), the output matrix is wide (m x n, full row rank m).  From these
we build the complementary orthogonal projectors

    P = B B+        (onto the column space of B),   Q = I - P,
    M = C+ C        (onto the row space of C),      N = I - M.

All functions take and return plain float ndarrays and never mutate
their arguments.
"""

import numpy as np

from .errors import RankDeficientError, RankMismatchError

# Relative cutoff on singular values used everywhere a rank decision is made.
DEFAULT_RANK_TOL = 1e-10

def _as_matrix(M, name="matrix"):
    M = np.asarray(M, dtype=float)
    if M.ndim != 2:
        raise ValueError(f"{name} must be 2-dimensional, got shape {M.shape}")
    if not np.all(np.isfinite(M)):
        raise ValueError(f"{name} contains non-finite entries")
    return M


def numeric_rank(M, tol=DEFAULT_RANK_TOL, scale=None):
    """Number of singular values above tol relative to the largest one.

    `scale` optionally anchors the cutoff at tol * max(s_max, scale); pass
    the natural norm of the problem (1.0 for projectors) so a matrix that
    is numerically zero is not mistaken for full-rank noise.
    """
    M = _as_matrix(M)
    if M.size == 0:
        return 0
    s = np.linalg.svd(M, compute_uv=False)
    anchor = s[0] if scale is None else max(s[0], float(scale))
    if anchor == 0.0:
        return 0
    return int(np.count_nonzero(s > tol * anchor))


def pseudoinverse_tall(B, tol=DEFAULT_RANK_TOL):
    """Left pseudoinverse B+ = (B^T B)^-1 B^T of a full-column-rank matrix.

    Built from one singular value decomposition rather than the normal
    equations, so the result stays usable near the rank boundary (the
    normal equations square the condition number).

    Raises RankDeficientError when the numeric rank of B is below its
    column count, using the same cutoff as numeric_rank.
    """
    B = _as_matrix(B, "B")
    n, p = B.shape
    if n < p:
        raise ValueError(f"B must be tall, got shape {B.shape}")
    U, s, Vt = np.linalg.svd(B, full_matrices=False)
    if s[0] == 0.0 or s[-1] <= tol * s[0]:
        raise RankDeficientError(f"B has numeric rank < {p}")
    return (Vt.T / s) @ U.T


def pseudoinverse_wide(C, tol=DEFAULT_RANK_TOL):
    """Right pseudoinverse C+ = C^T (C C^T)^-1 of a full-row-rank matrix."""
    C = _as_matrix(C, "C")
    m, n = C.shape
    if m > n:
        raise ValueError(f"C must be wide, got shape {C.shape}")
    U, s, Vt = np.linalg.svd(C, full_matrices=False)
    if s[0] == 0.0 or s[-1] <= tol * s[0]:
        raise RankDeficientError(f"C has numeric rank < {m}")
    return (Vt.T / s) @ U.T


def projectors_from_input(B, tol=DEFAULT_RANK_TOL):
    """Complementary projectors (P, Q) with P = B B+ and Q = I - P."""
    B = _as_matrix(B, "B")
    P = B @ pseudoinverse_tall(B, tol)
    return P, np.eye(B.shape[0]) - P


def projectors_from_output(C, tol=DEFAULT_RANK_TOL):
    """Complementary projectors (M, N) with M = C+ C and N = I - M."""
    C = _as_matrix(C, "C")
    M = pseudoinverse_wide(C, tol) @ C
    return M, np.eye(C.shape[1]) - M


def generalized_inverse(B, K, tol=DEFAULT_RANK_TOL):
    """Left inverse (K B)^-1 K for any kernel K with rank(K B) = p.

    The pseudoinverse is the special case K = B^T (up to scaling).  Raises
    RankDeficientError when K B is singular.
    """
    B = _as_matrix(B, "B")
    K = _as_matrix(K, "K")
    p = B.shape[1]
    if K.shape != (p, B.shape[0]):
        raise ValueError(f"kernel must have shape {(p, B.shape[0])}, got {K.shape}")
    KB = K @ B
    if numeric_rank(KB, tol) < p:
        raise RankDeficientError("K B is singular; choose a different kernel")
    return np.linalg.solve(KB, K)


def independent_columns(M, r, tol=DEFAULT_RANK_TOL, scale=None):
    """Select r linearly independent columns of M by greedy pivoting.

    Pivots on the column with the largest remaining norm (lowest index on
    ties), then orthogonalizes the rest against it.  Returns the selected
    original columns as an (n, r) matrix, in pivot order.

    Raises RankMismatchError when the numeric rank of M is not r.
    """
    M = _as_matrix(M)
    if numeric_rank(M, tol, scale) != r:
        raise RankMismatchError(f"matrix has numeric rank != {r}")
    if r == 0:
        return np.zeros((M.shape[0], 0))
    work = M.copy()
    floor = np.max(np.linalg.norm(work, axis=0))
    if scale is not None:
        floor = max(floor, float(scale))
    chosen = []
    for _ in range(r):
        norms = np.linalg.norm(work, axis=0)
        j = int(np.argmax(norms))
        if norms[j] <= tol * floor:
            raise RankMismatchError("ran out of independent columns")
        chosen.append(j)
        q = work[:, j] / norms[j]
        work = work - np.outer(q, q @ work)
    return M[:, chosen]


def normal_form_transform(P, Q, tol=DEFAULT_RANK_TOL):
    """Invertible T = (Phat | Qhat) aligning the state with the P/Q split.

    Phat holds rank(P) independent columns of P and Qhat the complementary
    ones of Q, so that T^-1 P T = diag(I, 0) and T^-1 Q T = diag(0, I).
    Projectors have unit natural scale, so rank decisions here are anchored
    at 1.0 (a numerically zero Q for p = n is handled correctly).
    """
    P = _as_matrix(P, "P")
    Q = _as_matrix(Q, "Q")
    n = P.shape[0]
    p = numeric_rank(P, tol, scale=1.0)
    Phat = independent_columns(P, p, tol, scale=1.0)
    Qhat = independent_columns(Q, n - p, tol, scale=1.0)
    T = np.hstack([Phat, Qhat])
    if numeric_rank(T, tol) < n:
        raise RankDeficientError("projector columns do not combine to a basis")
    return T


def matrix_exponential(M):
    """exp(M) by scaling and squaring with a truncated power series.

    M is halved until its inf-norm is at most 0.5, the series is summed
    until a term falls below 1e-16 relative to the running sum, and the
    result is squared back up.
    """
    M = _as_matrix(M)
    n, m = M.shape
    if n != m:
        raise ValueError("matrix exponential needs a square matrix")
    norm = np.linalg.norm(M, np.inf)
    squarings = 0
    if norm > 0.5:
        squarings = int(np.ceil(np.log2(norm / 0.5)))
    A = M / (2.0 ** squarings)
    acc = np.eye(n)
    term = np.eye(n)
    for k in range(1, 60):
        term = term @ A / k
        acc = acc + term
        if np.linalg.norm(term, np.inf) <= 1e-16 * np.linalg.norm(acc, np.inf):
            break
    for _ in range(squarings):
        acc = acc @ acc
    return acc
