"""L2-regularised logistic regression, full-batch gradient descent with a
backtracking (Armijo) line search on standardised features."""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from ..errors import ConfigError, DataError


@dataclass(frozen=True)
class LogisticConfig:
    l2_lambda: float = 1e-4
    max_iters: int = 1000
    tol: float = 1e-6  # on the gradient infinity-norm
    step_rule: str = "backtracking"
    initial_step: float = 1.0
    armijo: float = 1e-4
    shrink: float = 0.5

    def __post_init__(self):
        if self.l2_lambda < 0:
            raise ConfigError("l2_lambda must be >= 0")
        if self.max_iters < 1:
            raise ConfigError("max_iters must be positive")
        if self.step_rule != "backtracking":
            raise ConfigError(f"unknown step rule {self.step_rule!r}")
        if not 0 < self.shrink < 1:
            raise ConfigError("shrink must be in (0, 1)")


@dataclass(eq=False)
class LinearModel:
    weights: np.ndarray
    bias: float
    mean: np.ndarray
    scale: np.ndarray
    n_iter: int = 0
    converged: bool = False
    loss_history: list[float] = field(default_factory=list, repr=False)

    @property
    def n_features(self) -> int:
        return len(self.weights)

    n_classes = 2

    def standardize(self, X: np.ndarray) -> np.ndarray:
        return (np.asarray(X, dtype=float) - self.mean) / self.scale

    def decision_function(self, X: np.ndarray) -> np.ndarray:
        return self.standardize(X) @ self.weights + self.bias

    def predict_proba(self, X: np.ndarray) -> np.ndarray:
        p = _sigmoid(self.decision_function(X))
        return np.column_stack([1.0 - p, p])


def _sigmoid(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z, dtype=float)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def _loss_grad_std(w: np.ndarray, b: float, Z: np.ndarray, y: np.ndarray, lam: float):
    z = Z @ w + b
    loss = np.mean(np.logaddexp(0.0, z) - y * z) + 0.5 * lam * np.dot(w, w)
    r = _sigmoid(z) - y
    gw = Z.T @ r / len(y) + lam * w
    gb = np.mean(r)
    return float(loss), np.append(gw, gb)


def _loss_std(w, b, Z, y, lam) -> float:
    z = Z @ w + b
    return float(np.mean(np.logaddexp(0.0, z) - y * z) + 0.5 * lam * np.dot(w, w))


def logistic_loss_grad(model: LinearModel, X: np.ndarray, y: np.ndarray, l2_lambda: float):
    """Mean cross-entropy + (lambda/2)||w||^2 and its gradient.

    The gradient is w.r.t. ``(weights..., bias)`` of the model as stored, i.e.
    on the model's standardised inputs.  The bias is not penalised.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    if not (np.all(np.isfinite(X)) and np.all(np.isfinite(y))):
        raise DataError("non-finite input to logistic loss")
    return _loss_grad_std(model.weights, model.bias, model.standardize(X), y, l2_lambda)


def _standardization(X: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    mean = X.mean(axis=0)
    scale = X.std(axis=0)
    scale[scale <= 1e-12] = 1.0
    return mean, scale


def train_logistic(X: np.ndarray, y: np.ndarray, config: LogisticConfig = LogisticConfig()) -> LinearModel:
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    if X.ndim != 2 or len(X) != len(y):
        raise ValueError("X must be 2-D with one row per label")
    if not (np.all(np.isfinite(X)) and np.isin(y, (0.0, 1.0)).all()):
        raise DataError("logistic regression needs finite X and y in {0, 1}")
    mean, scale = _standardization(X)
    p = X.shape[1]
    prior = y.mean() if len(y) else 0.5
    if prior in (0.0, 1.0):
        warnings.warn("single-class training labels; returning a constant model", stacklevel=2)
        eps = 1e-12
        q = min(max(prior, eps), 1 - eps)
        return LinearModel(np.zeros(p), float(np.log(q / (1 - q))), mean, scale, converged=True)

    Z = (X - mean) / scale
    lam = config.l2_lambda
    # the log-odds bias is optimal for w = 0; this start keeps a heavy penalty from stalling b
    w, b = np.zeros(p), float(np.log(prior / (1 - prior)))
    loss, g = _loss_grad_std(w, b, Z, y, lam)
    history = [loss]
    step = config.initial_step
    converged = False
    it = 0
    while it < config.max_iters:
        if np.max(np.abs(g)) < config.tol:
            converged = True
            break
        gg = float(np.dot(g, g))
        while True:
            w_new, b_new = w - step * g[:-1], b - step * g[-1]
            new_loss = _loss_std(w_new, b_new, Z, y, lam)
            if new_loss <= loss - config.armijo * step * gg:
                break
            step *= config.shrink
            if step < 1e-14:
                break
        if new_loss > loss:
            # no acceptable step; the current iterate stays
            break
        w, b = w_new, b_new
        loss, g = _loss_grad_std(w, b, Z, y, lam)
        history.append(loss)
        step = min(step * 2.0, 1e6)
        it += 1
    else:
        converged = np.max(np.abs(g)) < config.tol
    return LinearModel(w, float(b), mean, scale, n_iter=it, converged=bool(converged), loss_history=history)
