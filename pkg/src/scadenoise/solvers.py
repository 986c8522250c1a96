"""Sparse recovery of per-block impulse errors.

Two problems share the tail matrix ``H`` (``(m - n) x m``):

* unknown support: find the sparsest ``z`` with ``H z = x_tail``, solved by
  smoothed-l0 (:func:`sl0_solve`);
* known support: solve ``H[:, S] w = x_tail`` in the least-squares sense
  (:func:`least_squares_known_support`).
"""

from dataclasses import dataclass, field

import numpy as np

from .kernels import sl0_batch

#: relative feasibility tolerance, ||H z - x|| <= FEAS_TOL * (1 + ||x||)
FEAS_TOL = 1e-8
#: condition number above which a truncated system counts as rank deficient
MAX_COND = 1e10


class SolverError(RuntimeError):
    pass


class CapacityExceededError(SolverError):
    """More unknowns than tail observations on a known support."""


@dataclass(frozen=True)
class Sl0Params:
    sigma_min: float = 0.01
    sigma_decrease: float = 0.5
    mu: float = 2.0
    inner_iterations: int = 3
    # Rescale H to unit-norm columns before annealing. The sparsest solution
    # is unchanged, but corner pixels (short columns) stop losing to their
    # neighbours in the minimum-norm start.
    normalize_columns: bool = True
    # Least-squares refit on the surviving support, kept only if feasible.
    refine: bool = True

    def __post_init__(self):
        if not 0 < self.sigma_decrease < 1:
            raise ValueError("sigma_decrease must lie in (0, 1)")
        if not self.sigma_min > 0:
            raise ValueError("sigma_min must be positive")
        if not self.mu > 0:
            raise ValueError("mu must be positive")
        if self.inner_iterations < 1:
            raise ValueError("inner_iterations must be >= 1")


@dataclass
class ErrorEstimate:
    values: np.ndarray
    support: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.intp))


def _check_system(H, x):
    H = np.asarray(H, dtype=np.float64)
    x = np.asarray(x, dtype=np.float64)
    if H.ndim != 2 or H.shape[0] >= H.shape[1]:
        raise ValueError(f"H must be a wide 2-D matrix, got shape {H.shape}")
    if x.shape[-1] != H.shape[0]:
        raise ValueError(f"x_tail length {x.shape[-1]} does not match H with {H.shape[0]} rows")
    if not (np.all(np.isfinite(H)) and np.all(np.isfinite(x))):
        raise ValueError("non-finite values in H or x_tail")
    return H, x


_projectors = {}


def sl0_projector(H, normalize_columns=True):
    """Return ``(A, P, scale)`` with ``A = H / scale`` and ``P`` its right pseudo-inverse.

    Cached per matrix content, so every block of an image shares one.
    """
    H = np.ascontiguousarray(H, dtype=np.float64)
    key = (H.shape, hash(H.tobytes()), bool(normalize_columns))
    hit = _projectors.get(key)
    if hit is not None:
        return hit

    r = H.shape[0]
    if normalize_columns:
        scale = np.linalg.norm(H, axis=0)
        if np.any(scale == 0):
            raise SolverError("H has an all-zero column")
    else:
        scale = np.ones(H.shape[1])
    A = H / scale
    gram = A @ A.T
    if np.max(np.abs(gram - np.eye(r))) < 1e-10:
        P = A.T.copy()
    else:
        sv = np.linalg.svd(A, compute_uv=False)
        cond = np.inf if sv[-1] == 0 else sv[0] / sv[-1]
        if cond > MAX_COND:
            raise SolverError(f"H is rank deficient (condition number ~ {cond:.3g})")
        P = np.linalg.solve(gram, A).T
    for a in (A, P, scale):
        a.setflags(write=False)
    _projectors[key] = (A, P, scale)
    return A, P, scale


def _refine(H, x, z, floor):
    r = H.shape[0]
    S = np.flatnonzero(np.abs(z) > floor)
    if S.size == 0 or S.size > r:
        return z
    Hs = H[:, S]
    w, _, rank, _ = np.linalg.lstsq(Hs, x, rcond=None)
    if rank < S.size:
        return z
    cand = np.zeros_like(z)
    cand[S] = w
    if np.linalg.norm(H @ cand - x) <= FEAS_TOL * (1 + np.linalg.norm(x)):
        return cand
    return z


def sl0_solve_batch(H, X, params=None, backend=None):
    """Smoothed-l0 for every row of ``X``; returns a ``(B, m)`` array."""
    params = params or Sl0Params()
    H, X = _check_system(H, np.atleast_2d(X))
    A, P, scale = sl0_projector(H, params.normalize_columns)
    W = sl0_batch(
        A, P, X, params.sigma_min, params.sigma_decrease, params.mu, params.inner_iterations, backend=backend
    )
    Z = W / scale
    if params.refine:
        floor = 10 * params.sigma_min
        for b in range(Z.shape[0]):
            if np.any(Z[b]):
                Z[b] = _refine(H, X[b], Z[b], floor)
    return Z


def sl0_solve(H, x_tail, params=None, backend=None):
    """Sparsest ``z`` with ``H z = x_tail``, approximated by smoothed-l0.

    Starts from the minimum-norm solution and anneals the Gaussian width
    geometrically from twice its largest magnitude down to
    ``params.sigma_min``, projecting back onto the constraint after every
    gradient step.
    """
    x = np.asarray(x_tail, dtype=np.float64)
    if x.ndim != 1:
        raise ValueError("x_tail must be a vector; use sl0_solve_batch for stacks")
    return sl0_solve_batch(H, x[None, :], params, backend=backend)[0]


def least_squares_known_support(H, x_tail, support):
    """Solve ``H[:, support] w = x_tail`` through the pseudo-inverse.

    Raises
    ------
    CapacityExceededError
        ``len(support) > H.shape[0]``.
    SolverError
        The truncated matrix is numerically rank deficient.
    """
    H, x = _check_system(H, x_tail)
    S = np.unique(np.asarray(support, dtype=np.intp))
    r, m = H.shape
    if S.size and (S[0] < 0 or S[-1] >= m):
        raise ValueError(f"support indices must lie in [0, {m})")
    values = np.zeros(m)
    if S.size == 0:
        return ErrorEstimate(values, S)
    if S.size > r:
        raise CapacityExceededError(f"{S.size} unknown positions exceed {r} tail observations")
    Hs = H[:, S]
    sv = np.linalg.svd(Hs, compute_uv=False)
    cond = np.inf if sv[-1] == 0 else sv[0] / sv[-1]
    if cond > MAX_COND:
        raise SolverError(f"truncated system is rank deficient (condition number ~ {cond:.3g})")
    values[S] = np.linalg.pinv(Hs) @ x
    return ErrorEstimate(values, S)


def threshold_to_sparse(z, tau):
    """Keep entries with ``|z_i| > tau`` and zero the rest."""
    if tau < 0:
        raise ValueError("tau must be >= 0")
    z = np.asarray(z, dtype=np.float64)
    keep = np.abs(z) > tau
    return ErrorEstimate(np.where(keep, z, 0.0), np.flatnonzero(keep))
