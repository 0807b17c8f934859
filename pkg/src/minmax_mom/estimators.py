"""scikit-learn compatible wrappers around the descent-ascent solver."""

from __future__ import annotations

import numpy as np
from scipy.special import expit
from sklearn.base import BaseEstimator, ClassifierMixin, RegressorMixin
from sklearn.utils.multiclass import check_classification_targets
from sklearn.utils.validation import check_is_fitted, validate_data

from .dataset import Dataset
from .exceptions import DomainError
from .losses import LossFamily, LossSpec, parse_loss
from .solver import SolverConfig, erm_fit, mom_fit


class _MOMBase(BaseEstimator):
    _classification = False

    def __init__(self, loss="huber", delta=1.0, tau=0.5, k=1, block_strategy="resample",
                 eps=1e-4, max_iter=10_000, step_rule="median_block", step_size=None,
                 step_denominator="block", median_criterion="incremental",
                 fit_intercept=True, random_state=0):
        self.loss = loss
        self.delta = delta
        self.tau = tau
        self.k = k
        self.block_strategy = block_strategy
        self.eps = eps
        self.max_iter = max_iter
        self.step_rule = step_rule
        self.step_size = step_size
        self.step_denominator = step_denominator
        self.median_criterion = median_criterion
        self.fit_intercept = fit_intercept
        self.random_state = random_state

    def _loss_spec(self) -> LossSpec:
        key = str(self.loss).strip().lower()
        spec = parse_loss(key, delta=self.delta if key == "huber" else None,
                          tau=self.tau if key == "quantile" else None)
        if spec.is_classification != self._classification:
            kind = "classification" if self._classification else "regression"
            raise DomainError(f"loss {self.loss!r} cannot be used for {kind}")
        return spec

    def _config(self) -> SolverConfig:
        seed = 0 if self.random_state is None else int(self.random_state)
        return SolverConfig(
            k=self.k, block_strategy=self.block_strategy, eps=self.eps, max_iter=self.max_iter,
            step_rule=self.step_rule, step_size=self.step_size,
            step_denominator=self.step_denominator, median_criterion=self.median_criterion,
            seed=seed, curvature=1.0 if str(self.loss).lower() == "huber" else 0.25,
        )

    def _design(self, x):
        if self.fit_intercept:
            return np.hstack([x, np.ones((x.shape[0], 1))])
        return x

    def _solve(self, x, y):
        loss = self._loss_spec()
        if int(self.k) > x.shape[0]:
            raise DomainError(f"k={self.k} exceeds n_samples = {x.shape[0]}")
        data = Dataset(self._design(x), y)
        cfg = self._config()
        result = erm_fit(data, loss, cfg) if cfg.k == 1 else mom_fit(data, loss, cfg)
        coef = result.t_hat
        if self.fit_intercept:
            return coef[:-1].copy(), float(coef[-1]), result
        return coef.copy(), 0.0, result

    def _linear(self, X):
        check_is_fitted(self, "coef_")
        x = validate_data(self, X, dtype=float, reset=False)
        return x @ self.coef_.T + self.intercept_


class MOMRegressor(RegressorMixin, _MOMBase):
    """Minmax MOM linear regression with a Lipschitz loss.

    Parameters
    ----------
    loss : {"huber", "quantile", "l1"}
        Loss family; ``"l1"`` is the quantile loss at ``tau = 0.5``.
    delta, tau : float
        Huber threshold and quantile level.
    k : int
        Number of blocks; ``k = 1`` fits the empirical risk minimiser.
    random_state : int
        Seed of the initial points and block draws.

    Attributes
    ----------
    coef_ : ndarray of shape (n_features,)
    intercept_ : float
    n_iter_ : int
    converged_ : bool
    fit_result_ : FitResult
    """

    def fit(self, X, y):
        x, y = validate_data(self, X, y, dtype=float, y_numeric=True)
        self.coef_, self.intercept_, self.fit_result_ = self._solve(x, y)
        self.n_iter_ = self.fit_result_.iterations
        self.converged_ = self.fit_result_.converged
        return self

    def predict(self, X):
        return self._linear(X)


class MOMClassifier(ClassifierMixin, _MOMBase):
    """Minmax MOM linear classifier (logistic or hinge loss).

    With two classes ``classes_[1]`` is coded as ``+1`` and a single linear
    rule is fitted; with more classes one rule per class is fitted against
    the rest and ``coef_`` has one row per class. Parameters are as for
    :class:`MOMRegressor`.
    """

    _classification = True

    def __init__(self, loss="logistic", delta=1.0, tau=0.5, k=1, block_strategy="resample",
                 eps=1e-4, max_iter=10_000, step_rule="median_block", step_size=None,
                 step_denominator="block", median_criterion="incremental",
                 fit_intercept=True, random_state=0):
        super().__init__(loss=loss, delta=delta, tau=tau, k=k, block_strategy=block_strategy,
                         eps=eps, max_iter=max_iter, step_rule=step_rule, step_size=step_size,
                         step_denominator=step_denominator, median_criterion=median_criterion,
                         fit_intercept=fit_intercept, random_state=random_state)

    def fit(self, X, y):
        x, y = validate_data(self, X, y, dtype=float)
        check_classification_targets(y)
        self.classes_ = np.unique(y)
        if self.classes_.size < 2:
            raise ValueError("MOMClassifier needs at least two classes; got 1 class")
        targets = self.classes_[1:] if self.classes_.size == 2 else self.classes_
        fits = [self._solve(x, np.where(y == c, 1.0, -1.0)) for c in targets]
        if len(fits) == 1:
            self.coef_, self.intercept_, self.fit_result_ = fits[0]
        else:
            self.coef_ = np.vstack([f[0] for f in fits])
            self.intercept_ = np.array([f[1] for f in fits])
            self.fit_result_ = [f[2] for f in fits]
        results = self.fit_result_ if isinstance(self.fit_result_, list) else [self.fit_result_]
        self.n_iter_ = max(r.iterations for r in results)
        self.converged_ = all(r.converged for r in results)
        return self

    def decision_function(self, X):
        return self._linear(X)

    def predict(self, X):
        scores = self.decision_function(X)
        if scores.ndim == 1:
            return self.classes_[(scores >= 0).astype(int)]
        return self.classes_[np.argmax(scores, axis=1)]

    def predict_proba(self, X):
        if self._loss_spec().family is not LossFamily.LOGISTIC:
            raise AttributeError("predict_proba is only available for the logistic loss")
        p = expit(self.decision_function(X))
        if p.ndim == 1:
            return np.column_stack([1.0 - p, p])
        return p / p.sum(axis=1, keepdims=True)
