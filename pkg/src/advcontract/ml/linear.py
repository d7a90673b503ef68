"""Logistic regression and a linear SVM with Platt-scaled outputs."""

from __future__ import annotations

import numpy as np

from advcontract.ml.base import Classifier, as_xy, require_two_classes, sigmoid


def logistic_loss_and_grad(params: np.ndarray, X: np.ndarray, y: np.ndarray, l2: float) -> tuple[float, np.ndarray]:
    """Mean log-loss + l2/2·|w|², params = [w..., b]. Returns (loss, d loss / d params)."""
    w, b = params[:-1], params[-1]
    z = X @ w + b
    # log(1 + e^z) - y z, computed stably
    loss = float(np.mean(np.logaddexp(0.0, z) - y * z) + 0.5 * l2 * w @ w)
    r = (sigmoid(z) - y) / len(y)
    grad = np.empty_like(params)
    grad[:-1] = X.T @ r + l2 * w
    grad[-1] = r.sum()
    return loss, grad


class LogisticRegression(Classifier):
    kind = "LR"

    def __init__(self, l2: float = 1e-3, lr: float = 0.5, epochs: int = 2000, tol: float = 1e-9):
        self.l2, self.lr, self.epochs, self.tol = l2, lr, epochs, tol
        self.coef = np.zeros(0)
        self.intercept = 0.0

    def fit(self, X, y) -> "LogisticRegression":
        X, y = as_xy(X, y)
        require_two_classes(y)
        params = np.zeros(X.shape[1] + 1)
        prev = np.inf
        for _ in range(self.epochs):
            loss, g = logistic_loss_and_grad(params, X, y, self.l2)
            params -= self.lr * g
            if prev - loss < self.tol and np.abs(g).max() < 1e-6:
                break
            prev = loss
        self.coef, self.intercept = params[:-1].copy(), float(params[-1])
        return self

    def decision_function(self, X) -> np.ndarray:
        X, _ = as_xy(X)
        return X @ self.coef + self.intercept

    def predict_proba(self, X) -> np.ndarray:
        return sigmoid(self.decision_function(X))

    def get_state(self):
        return {"l2": self.l2, "lr": self.lr, "epochs": self.epochs}, {
            "coef": self.coef,
            "intercept": np.array([self.intercept]),
        }

    @classmethod
    def from_state(cls, config, arrays):
        m = cls(config["l2"], config["lr"], config["epochs"])
        m.coef, m.intercept = arrays["coef"].astype(np.float64), float(arrays["intercept"][0])
        return m


def platt_fit(scores: np.ndarray, y: np.ndarray, iters: int = 500) -> tuple[float, float]:
    """Fit p = sigmoid(a·s + c) on held scores by Newton steps on the log-loss."""
    # Platt's smoothed targets avoid infinite slopes on separable scores
    n_pos, n_neg = int(y.sum()), int(len(y) - y.sum())
    t = np.where(y == 1, (n_pos + 1) / (n_pos + 2), 1 / (n_neg + 2))
    a, c = 1.0, 0.0
    for _ in range(iters):
        p = sigmoid(a * scores + c)
        g = np.array([np.sum((p - t) * scores), np.sum(p - t)])
        w = p * (1 - p) + 1e-12
        H = np.array([[np.sum(w * scores * scores), np.sum(w * scores)], [np.sum(w * scores), np.sum(w)]])
        H += 1e-9 * np.eye(2)
        step = np.linalg.solve(H, g)
        a, c = a - step[0], c - step[1]
        if np.abs(step).max() < 1e-10:
            break
    return float(a), float(c)


class LinearSVM(Classifier):
    """Hinge loss + L2, full-batch sub-gradient descent with a 1/t step schedule."""

    kind = "SVM"

    def __init__(self, lam: float = 1e-2, epochs: int = 1000):
        self.lam, self.epochs = lam, epochs
        self.coef = np.zeros(0)
        self.intercept = 0.0
        self.platt = (1.0, 0.0)

    def fit(self, X, y) -> "LinearSVM":
        X, y = as_xy(X, y)
        require_two_classes(y)
        s = 2.0 * y - 1.0
        w = np.zeros(X.shape[1])
        b = 0.0
        best = (np.inf, w.copy(), b)
        for t in range(1, self.epochs + 1):
            margin = s * (X @ w + b)
            active = margin < 1
            obj = 0.5 * self.lam * w @ w + np.mean(np.maximum(0.0, 1 - margin))
            if obj < best[0]:
                best = (obj, w.copy(), b)
            gw = self.lam * w - (s[active] @ X[active]) / len(y)
            gb = -s[active].sum() / len(y)
            eta = 1.0 / (self.lam * t + 1.0)
            w, b = w - eta * gw, b - eta * gb
        _, self.coef, self.intercept = best
        self.platt = platt_fit(self.decision_function(X), y)
        return self

    def decision_function(self, X) -> np.ndarray:
        X, _ = as_xy(X)
        return X @ self.coef + self.intercept

    def predict_proba(self, X) -> np.ndarray:
        a, c = self.platt
        return sigmoid(a * self.decision_function(X) + c)

    def get_state(self):
        return {"lam": self.lam, "epochs": self.epochs}, {
            "coef": self.coef,
            "intercept": np.array([self.intercept]),
            "platt": np.array(self.platt),
        }

    @classmethod
    def from_state(cls, config, arrays):
        m = cls(config["lam"], config["epochs"])
        m.coef, m.intercept = arrays["coef"].astype(np.float64), float(arrays["intercept"][0])
        m.platt = (float(arrays["platt"][0]), float(arrays["platt"][1]))
        return m
