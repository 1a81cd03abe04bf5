"""Linear baselines: LMS, NLMS, SM-NLMS, APA and SM-APA.

All filters start from ``w = 0``. The affine-projection variants keep the
last ``K`` inputs as rows of a window matrix (newest first).
"""

from collections import deque
from math import sqrt

import numpy as np

from .base import OnlineFilter, UpdateOutcome, data_selective_step
from .exceptions import DimensionError
from .kernels import DEFAULT_EPSILON, regularized_solve

DEFAULT_GAMMA = sqrt(5) * 0.04


def linear_predict(weights, x):
    w = np.asarray(weights, dtype=float)
    x = np.asarray(x, dtype=float).ravel()
    if w.shape != x.shape:
        raise DimensionError(f"length mismatch: {w.size} weights vs {x.size} inputs")
    return float(np.dot(w, x))


class _LinearFilter(OnlineFilter):

    def _init_state(self, n_features):
        self.coef_ = np.zeros(n_features)

    def _predict_batch(self, X):
        return X @ self.coef_

    def _prior(self, x, d):
        y = float(np.dot(self.coef_, x))
        return y, d - y


class LMS(_LinearFilter):
    """Least-mean-squares: ``w += mu e x``."""

    def __init__(self, step_size=0.01):
        self.step_size = step_size

    def _check_params(self):
        if not self.step_size > 0:
            raise ValueError("step_size must be > 0")

    def _step(self, x, d):
        y, e = self._prior(x, d)
        self.coef_ = self.coef_ + self.step_size * e * x
        return UpdateOutcome(y, e, self.step_size, True)


class NLMS(_LinearFilter):
    """Normalized LMS: ``w += mu e x / (eps + |x|^2)``."""

    def __init__(self, step_size=0.1, epsilon=DEFAULT_EPSILON):
        self.step_size = step_size
        self.epsilon = epsilon

    def _check_params(self):
        if not self.step_size > 0:
            raise ValueError("step_size must be > 0")
        if self.epsilon < 0:
            raise ValueError("epsilon must be >= 0")

    def _step(self, x, d):
        y, e = self._prior(x, d)
        norm = self.epsilon + np.dot(x, x)
        if norm > 0:
            self.coef_ = self.coef_ + (self.step_size * e / norm) * x
        return UpdateOutcome(y, e, self.step_size, True)


class SMNLMS(_LinearFilter):
    """Set-membership NLMS.

    Updates only when ``|e| > gamma`` with the data-selective step
    ``1 - gamma/|e|``; for ``epsilon = 0`` the a-posteriori error lands
    exactly on ``gamma * sign(e)``.
    """

    def __init__(self, gamma=DEFAULT_GAMMA, epsilon=DEFAULT_EPSILON):
        self.gamma = gamma
        self.epsilon = epsilon

    def _check_params(self):
        if self.gamma < 0:
            raise ValueError("gamma must be >= 0")
        if self.epsilon < 0:
            raise ValueError("epsilon must be >= 0")

    def _step(self, x, d):
        y, e = self._prior(x, d)
        mu = data_selective_step(e, self.gamma)
        norm = self.epsilon + np.dot(x, x)
        if mu == 0.0 or norm == 0:
            return UpdateOutcome(y, e, 0.0, False)
        self.coef_ = self.coef_ + (mu * e / norm) * x
        return UpdateOutcome(y, e, mu, True)


class APA(_LinearFilter):
    """Affine projection over the last ``K`` pairs.

    ``w += mu X^T (X X^T + eps I)^{-1} (d - X w)`` where the rows of ``X`` are
    the window inputs.
    """

    def __init__(self, step_size=0.05, K=7, epsilon=DEFAULT_EPSILON):
        self.step_size = step_size
        self.K = K
        self.epsilon = epsilon

    def _check_params(self):
        if not self.step_size > 0:
            raise ValueError("step_size must be > 0")
        if int(self.K) < 1:
            raise ValueError("K must be >= 1")
        if self.epsilon < 0:
            raise ValueError("epsilon must be >= 0")

    def _init_state(self, n_features):
        super()._init_state(n_features)
        self.history_ = deque(maxlen=int(self.K))

    def _step(self, x, d):
        y, e = self._prior(x, d)
        self.history_.appendleft((x, d))
        X = np.array([h[0] for h in self.history_])
        dv = np.array([h[1] for h in self.history_])
        ev = dv - X @ self.coef_
        g = regularized_solve(X @ X.T, ev, self.epsilon)
        self.coef_ = self.coef_ + self.step_size * (X.T @ g)
        return UpdateOutcome(y, e, self.step_size, True)


class SMAPA(_LinearFilter):
    """Set-membership affine projection with the single-bound correction.

    When ``|e| > gamma`` the update is
    ``w += eta e X^T (X X^T + eps I)^{-1} u`` with ``u = (1, 0, ..., 0)`` and
    ``eta = 1 - gamma/|e|``. ``X`` stacks the current input on top of the
    inputs of the ``K - 1`` most recent *updating* steps; gated steps leave
    the whole state, window included, untouched.
    """

    def __init__(self, gamma=DEFAULT_GAMMA, K=7, epsilon=DEFAULT_EPSILON):
        self.gamma = gamma
        self.K = K
        self.epsilon = epsilon

    def _check_params(self):
        if self.gamma < 0:
            raise ValueError("gamma must be >= 0")
        if int(self.K) < 1:
            raise ValueError("K must be >= 1")
        if self.epsilon < 0:
            raise ValueError("epsilon must be >= 0")

    def _init_state(self, n_features):
        super()._init_state(n_features)
        self.history_ = deque(maxlen=max(int(self.K) - 1, 0))

    def _step(self, x, d):
        y, e = self._prior(x, d)
        eta = data_selective_step(e, self.gamma)
        if eta == 0.0:
            return UpdateOutcome(y, e, 0.0, False)
        X = np.array([x, *self.history_])
        u = np.zeros(len(X))
        u[0] = 1.0
        a = regularized_solve(X @ X.T, u, self.epsilon)
        self.coef_ = self.coef_ + (eta * e) * (X.T @ a)
        if self.history_.maxlen:
            self.history_.appendleft(x)
        return UpdateOutcome(y, e, eta, True)
