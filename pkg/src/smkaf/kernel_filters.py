"""Kernel adaptive filters over a growing dictionary.

Every filter predicts with the expansion ``f(x) = sum_k a_k k(c_k, x)``. The
NKLMS normalization ``1/(eps + k(x, x))`` is folded into the stored
coefficient when a center is appended, so prediction is a plain sum.
"""

from collections import deque
from math import sqrt

import numpy as np

from .base import OnlineFilter, UpdateOutcome, data_selective_step
from .exceptions import DimensionError
from .kernels import (
    CONVENTIONS,
    DEFAULT_EPSILON,
    KernelSpec,
    cross_gram,
    gram,
    regularized_solve,
)

DEFAULT_GAMMA = sqrt(5) * 0.04


class Dictionary:
    """Ordered centers with one real coefficient each.

    Storage grows geometrically; :attr:`centers` and :attr:`coefficients`
    are views of the live prefix.
    """

    def __init__(self, n_features, capacity=64):
        self.n_features = n_features
        self._centers = np.empty((capacity, n_features))
        self._coefs = np.empty(capacity)
        self._size = 0

    def __len__(self):
        return self._size

    @property
    def centers(self):
        return self._centers[: self._size]

    @property
    def coefficients(self):
        return self._coefs[: self._size]

    def append(self, center, coefficient):
        if self._size == len(self._coefs):
            cap = 2 * len(self._coefs)
            centers = np.empty((cap, self.n_features))
            centers[: self._size] = self.centers
            coefs = np.empty(cap)
            coefs[: self._size] = self.coefficients
            self._centers, self._coefs = centers, coefs
        self._centers[self._size] = center
        self._coefs[self._size] = coefficient
        self._size += 1

    def add_to_tail(self, deltas):
        """Add ``deltas[j]`` to the coefficient of the ``j+1``-th newest center."""
        n = len(deltas)
        if n:
            # tail is oldest-first in storage; deltas are newest-first
            self._coefs[self._size - n : self._size] += deltas[::-1]

    def tail(self, n):
        """The ``n`` most recent centers, newest first."""
        n = min(n, self._size)
        if n == 0:
            return self._centers[:0]
        return self._centers[self._size - n : self._size][::-1]

    def copy(self):
        out = Dictionary(self.n_features, capacity=max(len(self._coefs), 1))
        out._centers[: self._size] = self.centers
        out._coefs[: self._size] = self.coefficients
        out._size = self._size
        return out

    def to_records(self, spec=None):
        """Flat rows ``{index, coefficient, x_1..x_N[, kernel fields]}``."""
        rows = []
        for k in range(self._size):
            row = {"index": k, "coefficient": float(self._coefs[k])}
            for j, v in enumerate(self._centers[k], start=1):
                row[f"x_{j}"] = float(v)
            if spec is not None:
                row["family"] = spec.family
                row["bandwidth"] = spec.bandwidth
                row["convention"] = spec.convention
            rows.append(row)
        return rows


def kernel_predict(dictionary, x, spec=KernelSpec()):
    """Evaluate the kernel expansion stored in ``dictionary`` at ``x``."""
    if len(dictionary) == 0:
        return 0.0
    x = np.asarray(x, dtype=float).ravel()
    if x.size != dictionary.n_features:
        raise DimensionError(
            f"x has length {x.size}, dictionary centers have {dictionary.n_features}"
        )
    return _expansion(dictionary, x, spec.scale)


def _expansion(dictionary, x, scale):
    if dictionary._size == 0:
        return 0.0
    diff = dictionary.centers - x
    k = np.exp(-scale * np.einsum("ij,ij->i", diff, diff))
    return float(np.dot(k, dictionary.coefficients))


class _KernelFilter(OnlineFilter):

    def _check_params(self):
        if self.convention not in CONVENTIONS:
            raise ValueError(f"convention must be one of {CONVENTIONS}")
        if not self.bandwidth > 0:
            raise ValueError("bandwidth must be > 0")
        self.kernel_ = KernelSpec(bandwidth=float(self.bandwidth), convention=self.convention)

    def _init_state(self, n_features):
        self.dictionary_ = Dictionary(n_features)

    @property
    def dictionary_size(self):
        d = getattr(self, "dictionary_", None)
        return 0 if d is None else len(d)

    def _predict_batch(self, X):
        if len(self.dictionary_) == 0:
            return np.zeros(len(X))
        return cross_gram(X, self.dictionary_.centers, self.kernel_) @ self.dictionary_.coefficients

    def _outcome(self, y, e, step, updated):
        return UpdateOutcome(y, e, step, updated, len(self.dictionary_))


class KLMS(_KernelFilter):
    """Kernel LMS: every sample becomes a center with coefficient ``mu e``."""

    def __init__(self, step_size=0.05, bandwidth=1.0, convention="sigma"):
        self.step_size = step_size
        self.bandwidth = bandwidth
        self.convention = convention

    def _check_params(self):
        super()._check_params()
        if not self.step_size > 0:
            raise ValueError("step_size must be > 0")

    def _step(self, x, d):
        y = _expansion(self.dictionary_, x, self.kernel_.scale)
        e = d - y
        self.dictionary_.append(x, self.step_size * e)
        return self._outcome(y, e, self.step_size, True)


class SMNKLMS(_KernelFilter):
    """Set-membership normalized kernel LMS.

    A sample enters the dictionary only when ``|e| > gamma``; its coefficient
    is ``mu e / (eps + k(x, x))`` with ``mu = 1 - gamma/|e|``.
    """

    def __init__(self, gamma=DEFAULT_GAMMA, epsilon=DEFAULT_EPSILON, bandwidth=1.0,
                 convention="sigma"):
        self.gamma = gamma
        self.epsilon = epsilon
        self.bandwidth = bandwidth
        self.convention = convention

    def _check_params(self):
        super()._check_params()
        if self.gamma < 0:
            raise ValueError("gamma must be >= 0")
        if self.epsilon < 0:
            raise ValueError("epsilon must be >= 0")

    def _step(self, x, d):
        y = _expansion(self.dictionary_, x, self.kernel_.scale)
        e = d - y
        mu = data_selective_step(e, self.gamma)
        if mu == 0.0:
            return self._outcome(y, e, 0.0, False)
        # k(x, x) = 1 for the Gaussian kernel
        self.dictionary_.append(x, mu * e / (self.epsilon + 1.0))
        return self._outcome(y, e, mu, True)


class KAPA2(_KernelFilter):
    """Normalized kernel affine projection (KAPA-2).

    The new center and the ``K - 1`` previous centers receive the correction
    ``mu (G + eps I)^{-1} e`` where ``G`` is their Gram matrix and ``e`` their
    errors under the current expansion (current sample first).
    """

    def __init__(self, step_size=0.2, K=7, epsilon=DEFAULT_EPSILON, bandwidth=1.0,
                 convention="sigma"):
        self.step_size = step_size
        self.K = K
        self.epsilon = epsilon
        self.bandwidth = bandwidth
        self.convention = convention

    def _check_params(self):
        super()._check_params()
        if not self.step_size > 0:
            raise ValueError("step_size must be > 0")
        if int(self.K) < 1:
            raise ValueError("K must be >= 1")
        if self.epsilon < 0:
            raise ValueError("epsilon must be >= 0")

    def _init_state(self, n_features):
        super()._init_state(n_features)
        # (target, current fitted value) of the K - 1 newest centers, newest first
        self.window_targets_ = deque(maxlen=max(int(self.K) - 1, 0))
        self.window_fitted_ = deque(maxlen=max(int(self.K) - 1, 0))

    def _step(self, x, d):
        spec = self.kernel_
        y = _expansion(self.dictionary_, x, spec.scale)
        e = d - y
        prev = self.dictionary_.tail(int(self.K) - 1)
        window = np.vstack([x[None, :], prev])
        targets = np.array([d, *self.window_targets_])
        fitted = np.array([y, *self.window_fitted_])
        G = gram(window, spec)
        corr = self.step_size * regularized_solve(G, targets - fitted, self.epsilon)
        self.dictionary_.add_to_tail(corr[1:])
        self.dictionary_.append(x, corr[0])
        # only the window coefficients moved, so the window fits shift by G @ corr
        if self.window_targets_.maxlen:
            fitted += G @ corr
            self.window_fitted_.clear()
            self.window_fitted_.extend(fitted[: self.window_fitted_.maxlen])
            self.window_targets_.appendleft(d)
        return self._outcome(y, e, self.step_size, True)


class SMKAP(_KernelFilter):
    """Set-membership kernel affine projection.

    When ``|e| > gamma`` with ``eta = 1 - gamma/|e|``, solves
    ``(G + eps I) a = u`` over the current input and the ``K - 1`` most recent
    centers, appends ``x`` with coefficient ``eta e a[0]`` and adds
    ``eta e a[j]`` to the ``j``-th most recent center. With ``eps = 0`` this
    pins the a-posteriori error on the current sample to ``gamma sign(e)``
    while leaving the errors on the other window members unchanged.
    """

    def __init__(self, gamma=DEFAULT_GAMMA, K=7, epsilon=DEFAULT_EPSILON, bandwidth=1.0,
                 convention="sigma"):
        self.gamma = gamma
        self.K = K
        self.epsilon = epsilon
        self.bandwidth = bandwidth
        self.convention = convention

    def _check_params(self):
        super()._check_params()
        if self.gamma < 0:
            raise ValueError("gamma must be >= 0")
        if int(self.K) < 1:
            raise ValueError("K must be >= 1")
        if self.epsilon < 0:
            raise ValueError("epsilon must be >= 0")

    def _step(self, x, d):
        spec = self.kernel_
        y = _expansion(self.dictionary_, x, spec.scale)
        e = d - y
        eta = data_selective_step(e, self.gamma)
        if eta == 0.0:
            return self._outcome(y, e, 0.0, False)
        prev = self.dictionary_.tail(int(self.K) - 1)
        if len(prev):
            window = np.vstack([x[None, :], prev])
            u = np.zeros(len(window))
            u[0] = 1.0
            a = regularized_solve(gram(window, spec), u, self.epsilon)
        else:
            a = np.array([1.0 / (1.0 + self.epsilon)])
        scaled = (eta * e) * a
        self.dictionary_.add_to_tail(scaled[1:])
        self.dictionary_.append(x, scaled[0])
        return self._outcome(y, e, eta, True)
