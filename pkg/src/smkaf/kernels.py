"""Gaussian kernel evaluation and the small dense solves used by the
affine-projection updates."""

from dataclasses import dataclass

import numpy as np
from scipy.linalg.lapack import dposv as _posv
from scipy.spatial.distance import cdist, pdist, squareform

from .exceptions import DimensionError, EmptyInputError, SingularSystemError

#: ``"sigma"``: exp(-|x-y|^2 / (2 h^2)); ``"scale"``: exp(-|x-y|^2 / h^2),
#: i.e. exp(-a |x-y|^2) with a = 1/h^2.
CONVENTIONS = ("sigma", "scale")
DEFAULT_EPSILON = 1e-4


@dataclass(frozen=True)
class KernelSpec:
    """Gaussian kernel family with a positive bandwidth ``h``."""

    bandwidth: float = 1.0
    convention: str = "sigma"
    family: str = "gaussian"

    def __post_init__(self):
        if self.family != "gaussian":
            raise ValueError(f"unsupported kernel family {self.family!r}")
        if not self.bandwidth > 0:
            raise ValueError(f"bandwidth must be > 0, got {self.bandwidth}")
        if self.convention not in CONVENTIONS:
            raise ValueError(
                f"convention must be one of {CONVENTIONS}, got {self.convention!r}"
            )

    @property
    def scale(self):
        """Coefficient ``a`` in exp(-a |x-y|^2)."""
        h2 = self.bandwidth * self.bandwidth
        return 1.0 / (2.0 * h2) if self.convention == "sigma" else 1.0 / h2


def kernel_eval(x, y, spec=KernelSpec()):
    """Evaluate the Gaussian kernel between two sample vectors."""
    x = np.asarray(x, dtype=float).ravel()
    y = np.asarray(y, dtype=float).ravel()
    if x.shape != y.shape:
        raise DimensionError(f"length mismatch: {x.size} vs {y.size}")
    diff = x - y
    return float(np.exp(-spec.scale * np.dot(diff, diff)))


def cross_gram(X, Y, spec=KernelSpec()):
    """Kernel matrix ``K[i, j] = k(X[i], Y[j])`` for two stacks of vectors."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    Y = np.atleast_2d(np.asarray(Y, dtype=float))
    if X.shape[1] != Y.shape[1]:
        raise DimensionError(f"length mismatch: {X.shape[1]} vs {Y.shape[1]}")
    # cdist sums explicit squared differences (no |x|^2 + |y|^2 - 2xy
    # expansion), so k(x, x) is exactly 1 and K(X, Y) == K(Y, X).T bitwise.
    return np.exp(-spec.scale * cdist(X, Y, "sqeuclidean"))


def gram(centers, spec=KernelSpec()):
    """Symmetric Gram matrix over ``centers`` with a unit diagonal.

    Each unordered pair is evaluated once and mirrored, so the result is
    exactly symmetric.
    """
    C = np.asarray(centers, dtype=float)
    if C.size == 0:
        raise EmptyInputError("gram() needs at least one center")
    C = C.reshape(len(C), -1) if C.ndim > 1 else C[None, :]
    return np.exp(-spec.scale * squareform(pdist(C, "sqeuclidean")))


def regularized_solve(G, rhs, epsilon=DEFAULT_EPSILON):
    """Solve ``(G + epsilon I) v = rhs`` for a small symmetric ``G``.

    Cholesky (LAPACK ``posv``) first; a matrix that is not numerically
    positive definite (semidefinite Gram at ``epsilon = 0``) falls back to a
    pivoted LU solve, and :class:`SingularSystemError` is raised when that
    fails too.
    """
    G = np.asarray(G, dtype=float)
    if G.ndim != 2 or G.shape[0] != G.shape[1]:
        raise DimensionError(f"Gram matrix must be square, got {G.shape}")
    rhs = np.asarray(rhs, dtype=float)
    n = G.shape[0]
    if rhs.shape != (n,):
        raise DimensionError(f"rhs has shape {rhs.shape}, expected ({n},)")
    if epsilon < 0:
        raise ValueError(f"epsilon must be >= 0, got {epsilon}")
    if epsilon:
        A = G.copy()
        A.flat[:: n + 1] += epsilon
    else:
        A = G
    _, v, info = _posv(A, rhs, lower=1)
    if info == 0:
        return v
    try:
        with np.errstate(all="raise"):
            v = np.linalg.solve(A, rhs)
    except (np.linalg.LinAlgError, FloatingPointError) as exc:
        raise SingularSystemError(f"singular {n}x{n} system: {exc}") from exc
    if not np.all(np.isfinite(v)):
        raise SingularSystemError(f"singular {n}x{n} system")
    return v
