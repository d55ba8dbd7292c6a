"""Analytic test functions with their boxes, used to train surrogate models."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ValidationError

F4_C = np.array([
    -0.6089, -17.164, -34.054, -5.914, -24.721,
    -14.986, -24.100, -10.708, -26.662, -22.179,
])


def _f1(X):
    x1, x2 = X[:, 0], X[:, 1]
    return (
        3.0 * (1.0 - x1) ** 2 * np.exp(-x1**2 - (x2 + 1.0) ** 2)
        - 10.0 * (x1 / 5.0 - x1**3 - x2**5) * np.exp(-x1**2 - x2**2)
        - (1.0 / 3.0) * np.exp(-((x1 + 1.0) ** 2) - x2**2)
        + 2.0 * x1
    )


def _f2(X):
    return np.sin(np.pi * X[:, 0] / 12.0) * np.cos(np.pi * X[:, 1] / 16.0)


def _f3(X):
    x = X
    return (
        x[:, 0] ** 2 + x[:, 1] ** 2 + x[:, 0] * x[:, 1]
        - 14.0 * x[:, 0] - 16.0 * x[:, 1]
        + (x[:, 2] - 10.0) ** 2 - 4.0 * (x[:, 3] - 5.0) ** 2 + (x[:, 4] - 3.0) ** 2
        + 2.0 * (x[:, 5] - 1.0) ** 2 + 5.0 * x[:, 6] ** 2 + 7.0 * (x[:, 7] - 11.0) ** 2
        + 2.0 * (x[:, 8] - 10.0) ** 2 + 2.0 * (x[:, 9] - 7.0) ** 2 + 45.0
    )


def _f4(X):
    m = X.max(axis=1, keepdims=True)
    lse = m[:, 0] + np.log(np.exp(X - m).sum(axis=1))
    return (np.exp(X) * (F4_C[None, :] + X - lse[:, None])).sum(axis=1)


@dataclass(frozen=True)
class AnalyticFunction:
    name: str
    dim: int
    lower: tuple
    upper: tuple
    _fn: object

    def __call__(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if X.shape[1] != self.dim:
            raise ValidationError(
                f"{self.name} takes {self.dim} variables, got {X.shape[1]}"
            )
        return self._fn(X)


FUNCTIONS = {
    "f1": AnalyticFunction("f1", 2, (-2.0,) * 2, (2.0,) * 2, _f1),
    "f2": AnalyticFunction("f2", 2, (-20.0,) * 2, (20.0,) * 2, _f2),
    "f3": AnalyticFunction("f3", 10, (-10.0,) * 10, (10.0,) * 10, _f3),
    "f4": AnalyticFunction("f4", 10, (-10.0,) * 10, (10.0,) * 10, _f4),
}


def get_function(name: str) -> AnalyticFunction:
    try:
        return FUNCTIONS[name]
    except KeyError:
        raise ValidationError(
            f"unknown analytic function {name!r}; choose from {sorted(FUNCTIONS)}"
        ) from None
