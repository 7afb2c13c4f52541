"""Gauss-Hermite and Gauss-Legendre rules by Newton iteration on the three-term recurrences."""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import QuadratureError

_TOL = 1e-14
_MAX_ITER = 100


@dataclass(frozen=True)
class QuadratureRule:
    kind: str
    order: int
    nodes: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        self.nodes.setflags(write=False)
        self.weights.setflags(write=False)

    def mapped(self, lo: float, hi: float) -> tuple[np.ndarray, np.ndarray]:
        """Legendre nodes/weights affinely mapped from [-1, 1] onto [lo, hi]."""
        if self.kind != "legendre":
            raise QuadratureError("only Legendre rules map onto finite intervals")
        half = 0.5 * (hi - lo)
        return lo + half * (self.nodes + 1.0), half * self.weights

    def gaussian(self, mean: float, std: float) -> tuple[np.ndarray, np.ndarray]:
        """Hermite nodes/weights for E[f(X)], X ~ N(mean, std^2). Weights sum to 1."""
        if self.kind != "hermite":
            raise QuadratureError("only Hermite rules integrate against a Gaussian")
        return mean + np.sqrt(2.0) * std * self.nodes, self.weights / np.sqrt(np.pi)


def _check_order(n, hi):
    if not isinstance(n, (int, np.integer)) or not 1 <= n <= hi:
        raise QuadratureError(f"order must be an integer in [1, {hi}], got {n!r}")


def _hermite_eval(n, z):
    # orthonormal recurrence; returns (h_n(z), h_{n-1}(z))
    p1 = np.pi ** -0.25
    p2 = 0.0
    for j in range(1, n + 1):
        p3 = p2
        p2 = p1
        p1 = z * np.sqrt(2.0 / j) * p2 - np.sqrt((j - 1) / j) * p3
    return p1, p2


@lru_cache(maxsize=64)
def _hermite(n):
    # eigenvalues of the symmetric Jacobi matrix seed Newton; the recurrence polishes
    off = np.sqrt(np.arange(1, n) / 2.0)
    z = np.linalg.eigvalsh(np.diag(off, 1) + np.diag(off, -1))
    for _ in range(_MAX_ITER):
        p, pm1 = _hermite_eval(n, z)
        step = p / (np.sqrt(2.0 * n) * pm1)
        z = z - step
        if np.all(np.abs(step) <= _TOL * np.maximum(1.0, np.abs(z))):
            break
    else:
        raise QuadratureError(f"Hermite order {n} did not converge")
    _, pm1 = _hermite_eval(n, z)
    w = 1.0 / (n * pm1 ** 2)
    # enforce exact symmetry
    z = 0.5 * (z - z[::-1])
    w = 0.5 * (w + w[::-1])
    return z, w


@lru_cache(maxsize=64)
def _legendre(n):
    i = np.arange(1, n + 1)
    z = np.cos(np.pi * (i - 0.25) / (n + 0.5))
    for _ in range(_MAX_ITER):
        p1 = np.ones_like(z)
        p2 = np.zeros_like(z)
        for j in range(1, n + 1):
            p3 = p2
            p2 = p1
            p1 = ((2 * j - 1) * z * p2 - (j - 1) * p3) / j
        dp = n * (z * p1 - p2) / (z * z - 1.0)
        step = p1 / dp
        z = z - step
        if np.all(np.abs(step) <= _TOL):
            break
    else:
        raise QuadratureError(f"Legendre order {n} did not converge")
    # one more evaluation at the converged nodes for the weights
    p1 = np.ones_like(z)
    p2 = np.zeros_like(z)
    for j in range(1, n + 1):
        p3 = p2
        p2 = p1
        p1 = ((2 * j - 1) * z * p2 - (j - 1) * p3) / j
    dp = n * (z * p1 - p2) / (z * z - 1.0)
    w = 2.0 / ((1.0 - z * z) * dp * dp)
    order = np.argsort(z)
    return z[order], w[order]


def gauss_hermite(n: int) -> QuadratureRule:
    """Physicists' Gauss-Hermite rule, weight ``exp(-t^2)`` on the real line."""
    _check_order(n, 200)
    if n == 1:
        return QuadratureRule("hermite", 1, np.zeros(1), np.array([np.sqrt(np.pi)]))
    nodes, weights = _hermite(int(n))
    return QuadratureRule("hermite", int(n), nodes.copy(), weights.copy())


def gauss_legendre(n: int) -> QuadratureRule:
    """Gauss-Legendre rule on [-1, 1]."""
    _check_order(n, 500)
    if n == 1:
        return QuadratureRule("legendre", 1, np.zeros(1), np.array([2.0]))
    nodes, weights = _legendre(int(n))
    return QuadratureRule("legendre", int(n), nodes.copy(), weights.copy())
