"""Estimator base class shared by the linear and kernel online filters."""

from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.utils.validation import check_array, check_is_fitted, check_X_y

from .exceptions import DimensionError


@dataclass(frozen=True)
class UpdateOutcome:
    """Record of one online step.

    ``prior_error`` is ``d - f(x)`` evaluated before the update and
    ``step_used`` the step size actually applied (0 when a set-membership gate
    kept the filter unchanged).
    """

    prediction: float
    prior_error: float
    step_used: float
    updated: bool
    dictionary_size: int = 0

    @property
    def grew(self):
        return self.updated and self.dictionary_size > 0


def data_selective_step(error, gamma):
    """Step size ``1 - gamma/|e|`` when ``|e| > gamma``, else 0.

    An error of exactly zero never triggers an update, even for ``gamma = 0``.
    """
    mag = abs(error)
    if mag <= gamma or mag == 0.0:
        return 0.0
    return 1.0 - gamma / mag


class OnlineFilter(RegressorMixin, BaseEstimator):
    """Sequential adaptive filter with a scikit-learn facade.

    Subclasses implement ``_init_state(n_features)``, ``_step(x, d)`` and
    ``_predict_batch(X)``. ``fit`` restarts from the zero filter and makes one
    online pass over the rows of ``X``; ``partial_fit`` continues from the
    current state.
    """

    def fit(self, X, y):
        X, y = check_X_y(X, y, y_numeric=True)
        self._check_params()
        self._reset(X.shape[1])
        self._run(X, y)
        return self

    def partial_fit(self, X, y):
        X, y = check_X_y(X, y, y_numeric=True)
        if not hasattr(self, "n_features_in_"):
            self._check_params()
            self._reset(X.shape[1])
        else:
            self._check_width(X.shape[1])
        self._run(X, y)
        return self

    def step(self, x, d):
        """Run one online update on the pair ``(x, d)``."""
        x = np.asarray(x, dtype=float).ravel()
        if not hasattr(self, "n_features_in_"):
            self._check_params()
            self._reset(x.size)
        else:
            self._check_width(x.size)
        outcome = self._step(x, float(d))
        self.n_steps_ += 1
        self.n_updates_ += outcome.updated
        return outcome

    def predict(self, X):
        check_is_fitted(self, "n_features_in_")
        X = check_array(X)
        self._check_width(X.shape[1])
        return self._predict_batch(X)

    def _check_width(self, n):
        if n != self.n_features_in_:
            raise DimensionError(
                f"X has {n} features, but {type(self).__name__} "
                f"is expecting {self.n_features_in_} features as input"
            )

    def _reset(self, n_features):
        self.n_features_in_ = n_features
        self.n_steps_ = 0
        self.n_updates_ = 0
        self._init_state(n_features)

    def _run(self, X, y):
        for x, d in zip(X, y):
            self.step(x, d)

    def _check_params(self):
        pass

    def __sklearn_tags__(self):
        tags = super().__sklearn_tags__()
        # one online pass with small steps does not reach batch-regressor scores
        tags.regressor_tags.poor_score = True
        return tags
