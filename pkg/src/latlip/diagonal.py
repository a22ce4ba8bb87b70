"""Diagonal value and diagonal projection error of an operator at a point.

For ``x != 0`` the diagonal value ``lambda(x) = <T(x), x> / |x|^2`` is the
scalar minimizing ``|T(x) - a x| / |x|`` over ``a``; the minimum itself is the
diagonal error. Both vanish at the origin by convention.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NumericalError
from .operator import OperatorHandle

# radicand clamp: below -RADICAND_TOL * max(1, |T(x)|^2/|x|^2) is a real failure
RADICAND_TOL = 1e-12


@dataclass(frozen=True)
class EigenSample:
    point: np.ndarray
    lam: float
    error: float


def _diag_terms(T: OperatorHandle, X: np.ndarray):
    X = np.asarray(X, dtype=float)
    TX = T.evaluate(X)
    sq = np.sum(X * X, axis=-1)
    zero = sq == 0.0
    safe = np.where(zero, 1.0, sq)
    lam = np.where(zero, 0.0, np.sum(TX * X, axis=-1) / safe)
    ratio = np.where(zero, 0.0, np.sum(TX * TX, axis=-1) / safe)
    return lam, ratio, zero


def diagonal_values(T: OperatorHandle, X) -> np.ndarray:
    """Vectorized diagonal value over the last axis of ``X``."""
    return _diag_terms(T, X)[0]


def diagonal_errors(T: OperatorHandle, X) -> np.ndarray:
    """Vectorized diagonal error, ``sqrt(|T(x)|^2/|x|^2 - lambda(x)^2)``."""
    lam, ratio, zero = _diag_terms(T, X)
    radicand = ratio - lam * lam
    floor = -RADICAND_TOL * np.maximum(1.0, ratio)
    if np.any(radicand < floor):
        worst = float(np.min(radicand))
        raise NumericalError(f"negative radicand {worst:.3e} in diagonal error")
    return np.where(zero, 0.0, np.sqrt(np.maximum(radicand, 0.0)))


def diagonal_value(T: OperatorHandle, x) -> float:
    return float(diagonal_values(T, np.asarray(x, dtype=float)[None, :])[0])


def diagonal_error(T: OperatorHandle, x) -> float:
    return float(diagonal_errors(T, np.asarray(x, dtype=float)[None, :])[0])


def projection_error_at(T: OperatorHandle, x, alpha: float) -> float:
    """Normalized residual ``|T(x) - alpha x| / |x|`` for a given scalar ``alpha``."""
    x = np.asarray(x, dtype=float)
    nx = np.linalg.norm(x)
    if nx == 0.0:
        raise ValueError("projection error is undefined at the zero vector")
    return float(np.linalg.norm(T.evaluate(x) - alpha * x) / nx)


def eigen_samples(T: OperatorHandle, X) -> list[EigenSample]:
    X = np.atleast_2d(np.asarray(X, dtype=float))
    lam = diagonal_values(T, X)
    err = diagonal_errors(T, X)
    return [EigenSample(X[i].copy(), float(lam[i]), float(err[i])) for i in range(len(X))]
