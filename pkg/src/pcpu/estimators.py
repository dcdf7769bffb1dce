"""scikit-learn style wrappers around the functional interface.

The estimators are exact interpolators: ``fit(X, y)`` takes scattered sites
``X`` of shape (n, 2) and values ``y``; ``predict(X)`` evaluates the
interpolant.
"""

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.utils.validation import check_array, check_is_fitted, check_X_y

from .baselines import global_constrained_fit, shepard_eval
from .geometry import Domain
from .local_solver import CHECK_GRID, NONNEG_TOL
from .pu import Mode, PUConfig, default_kernel, evaluate, fit

__all__ = ["PCPUInterpolator", "ShepardInterpolator", "GlobalConstrainedInterpolator"]


def _check_xy(X, y):
    X, y = check_X_y(X, y, dtype=float, y_numeric=True)
    if X.shape[1] != 2:
        raise ValueError(f"expected 2 features (x, y), got {X.shape[1]}")
    return X, y


def _check_x(est, X):
    check_is_fitted(est)
    X = check_array(X, dtype=float)
    if X.shape[1] != 2:
        raise ValueError(f"expected 2 features (x, y), got {X.shape[1]}")
    return X


class PCPUInterpolator(RegressorMixin, BaseEstimator):
    """Partition-of-unity RBF interpolant, optionally positivity constrained.

    Parameters
    ----------
    kernel : {"wendland", "imq"}
    epsilon : float, optional
        Shape parameter; 0.1 for Wendland and 1 for IMQ when omitted.
    mode : {"pcpu", "pu"}
        ``"pcpu"`` adds constraint bases where a local fit would go negative;
        ``"pu"`` is the plain, unconstrained method.
    domain : tuple (xmin, xmax, ymin, ymax), optional
        Defaults to the unit square.
    n_patches : int, optional
        Perfect square overriding the automatic patch count.
    check_grid : int
        Side of the per-patch nonnegativity check grid.
    tol : float
        Negativity tolerance at check points.

    Attributes
    ----------
    model_ : PUModel
    n_added_ : ndarray of int
        Constraint bases added on each patch.
    """

    def __init__(self, kernel="wendland", epsilon=None, mode="pcpu", domain=None, n_patches=None,
                 check_grid=CHECK_GRID, tol=NONNEG_TOL):
        self.kernel = kernel
        self.epsilon = epsilon
        self.mode = mode
        self.domain = domain
        self.n_patches = n_patches
        self.check_grid = check_grid
        self.tol = tol

    def _config(self):
        return PUConfig(
            default_kernel(self.kernel, self.epsilon),
            Mode(self.mode),
            Domain.coerce(self.domain),
            d_override=self.n_patches,
            check_grid=self.check_grid,
            tol=self.tol,
        )

    def fit(self, X, y, eval_points=None):
        """Fit to sites ``X`` and values ``y``.

        ``eval_points``, if given, are added to the nonnegativity check set
        of the patches containing them.
        """
        X, y = _check_xy(X, y)
        self.model_ = fit(X, y, self._config(), eval_points=eval_points)
        self.n_added_ = self.model_.n_added
        self.n_features_in_ = 2
        return self

    def predict(self, X):
        X = _check_x(self, X)
        return evaluate(self.model_, X)


class GlobalConstrainedInterpolator(RegressorMixin, BaseEstimator):
    """Positivity-constrained CSRBF fit on the whole domain (one patch)."""

    def __init__(self, kernel="wendland", epsilon=None, domain=None, candidates=None):
        self.kernel = kernel
        self.epsilon = epsilon
        self.domain = domain
        self.candidates = candidates

    def fit(self, X, y, eval_points=None):
        X, y = _check_xy(X, y)
        self.model_ = global_constrained_fit(
            X, y, default_kernel(self.kernel, self.epsilon), self.domain, eval_points, self.candidates
        )
        self.n_added_ = self.model_.n_added
        self.n_features_in_ = 2
        return self

    def predict(self, X):
        X = _check_x(self, X)
        return evaluate(self.model_, X)


class ShepardInterpolator(RegressorMixin, BaseEstimator):
    """Inverse distance weighting with exponent ``power``."""

    def __init__(self, power=2.0):
        self.power = power

    def fit(self, X, y):
        X, y = _check_xy(X, y)
        if not self.power > 0:
            raise ValueError("power must be positive")
        self.points_ = X
        self.values_ = np.asarray(y, dtype=float)
        self.n_features_in_ = 2
        return self

    def predict(self, X):
        X = _check_x(self, X)
        return shepard_eval(self.points_, self.values_, X, self.power)
