"""Evaluable operators R^n -> R^n and the catalog of test maps.

Every catalog map is written against the last axis of its input, so the same
callable handles a single point of shape ``(n,)`` and a batch ``(m, n)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import ConfigError


@dataclass(frozen=True)
class EigenRay:
    """A known eigen-direction with its eigenvalue as a function of ``t``
    (the point being ``t * direction``). ``eigenvalue`` may be ``None`` when
    it is not known in closed form."""

    direction: np.ndarray
    eigenvalue: Optional[Callable[[np.ndarray], np.ndarray]] = None


@dataclass(frozen=True)
class OperatorHandle:
    dimension: int
    func: Callable[[np.ndarray], np.ndarray]
    domain_box: np.ndarray = field(default=None)  # shape (n, 2): rows are [a_i, b_i]
    known_eigenrays: tuple = ()
    key: str = ""
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.dimension < 1:
            raise ValueError("dimension must be positive")
        box = self.domain_box
        if box is None:
            box = np.tile([-5.0, 5.0], (self.dimension, 1))
        box = np.array(box, dtype=float).reshape(self.dimension, 2)
        if np.any(box[:, 0] > box[:, 1]):
            raise ValueError("domain box has lower bound above upper bound")
        box.setflags(write=False)
        object.__setattr__(self, "domain_box", box)

    def evaluate(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if x.shape[-1] != self.dimension:
            raise ValueError(
                f"expected points of dimension {self.dimension}, got shape {x.shape}"
            )
        out = np.asarray(self.func(x), dtype=float)
        if out.shape != x.shape:
            raise ValueError(f"operator returned shape {out.shape} for input {x.shape}")
        return out

    __call__ = evaluate


def _stack(*coords):
    return np.stack(np.broadcast_arrays(*coords), axis=-1)


def _S(p):
    x, y = p[..., 0], p[..., 1]
    return _stack(x * x + y * y, 2.0 * x * y)


def catalog_S() -> OperatorHandle:
    """S(x, y) = (x^2 + y^2, 2xy), a diagonal map in the basis {(1,1), (1,-1)}."""
    rays = (
        EigenRay(np.array([1.0, 0.0]), lambda t: np.asarray(t, dtype=float)),
        EigenRay(np.array([1.0, 1.0]), lambda t: 2.0 * np.asarray(t, dtype=float)),
        EigenRay(np.array([1.0, -1.0]), lambda t: 2.0 * np.asarray(t, dtype=float)),
    )
    return OperatorHandle(2, _S, [[-1.0, 1.0], [-1.0, 1.0]], rays, "S", {})


def _G(p):
    x, y = p[..., 0], p[..., 1]
    g = np.abs(y) / (1.0 + np.abs(y))
    return _stack(x - y + g, g)


def _G_ray_eigenvalue(t):
    t = np.asarray(t, dtype=float)
    return np.sign(t) / (1.0 + np.abs(t))


def catalog_G() -> OperatorHandle:
    """G(x, y) = (x - y + |y|/(1+|y|), |y|/(1+|y|)), diagonal in {(1,0), (1,1)}."""
    rays = (
        EigenRay(np.array([1.0, 0.0]), lambda t: np.ones_like(np.asarray(t, dtype=float))),
        EigenRay(np.array([1.0, 1.0]), _G_ray_eigenvalue),
    )
    return OperatorHandle(2, _G, None, rays, "G", {})


def catalog_R(r: float) -> OperatorHandle:
    """R_r(x, y) = (8x + r sin(5xy), 4x^2 + 4xy + y^2 - 2x - sqrt(|x+y|)/5).

    The square-root term is not Lipschitz across the line x + y = 0; any
    Lipschitz constant estimated on samples of this map is only empirical.
    """
    r = float(r)

    def _R(p):
        x, y = p[..., 0], p[..., 1]
        first = 8.0 * x + r * np.sin(5.0 * x * y)
        second = 4.0 * x * x + 4.0 * x * y + y * y - 2.0 * x - 0.2 * np.sqrt(np.abs(x + y))
        return _stack(first, second)

    return OperatorHandle(2, _R, None, (), "R", {"r": r})


def _f5(p):
    x, y = p[..., 0], p[..., 1]
    first = x + y + 0.2 * np.sin(10.0 * x) + x * y / 100.0
    second = x - y - 0.1 * np.cos(x + 5.0 * y)
    return _stack(first, second)


def catalog_f_section5() -> OperatorHandle:
    """The linear map (x+y, x-y) plus a small smooth perturbation."""
    return OperatorHandle(2, _f5, None, (), "f5", {})


def linear_operator(matrix: Sequence[Sequence[float]], box=None) -> OperatorHandle:
    """Wrap a square matrix as an operator (x -> A x)."""
    a = np.array(matrix, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError("matrix must be square")
    a.setflags(write=False)
    return OperatorHandle(a.shape[0], lambda p: p @ a.T, box, (), "linear", {"matrix": a.tolist()})


def identity_operator(n: int = 2, box=None) -> OperatorHandle:
    return OperatorHandle(n, lambda p: np.array(p, dtype=float), box, (), "identity", {})


_REGISTRY: dict[str, tuple[Callable[..., OperatorHandle], tuple[str, ...]]] = {
    "S": (catalog_S, ()),
    "G": (catalog_G, ()),
    "R": (catalog_R, ("r",)),
    "f5": (catalog_f_section5, ()),
}


def register(key: str, factory: Callable[..., OperatorHandle], params: Sequence[str] = ()) -> None:
    """Register an operator factory under ``key`` so configs can name it."""
    if key in _REGISTRY:
        raise ValueError(f"operator key {key!r} already registered")
    _REGISTRY[key] = (factory, tuple(params))


def available() -> list[str]:
    return sorted(_REGISTRY)


def make_operator(key: str, params: Optional[dict] = None) -> OperatorHandle:
    """Build a registered operator from its key and a parameter map.

    :raises ConfigError: unknown key, unknown or missing parameter.
    """
    params = dict(params or {})
    try:
        factory, names = _REGISTRY[key]
    except KeyError:
        raise ConfigError(f"unknown operator {key!r}; choose one of {available()}") from None
    extra = set(params) - set(names)
    if extra:
        raise ConfigError(f"operator {key!r} does not take parameters {sorted(extra)}")
    missing = [p for p in names if p not in params]
    if missing:
        raise ConfigError(f"operator {key!r} requires parameters {missing}")
    try:
        return factory(**{k: float(params[k]) for k in names})
    except ValueError as exc:
        raise ConfigError(f"bad parameter for operator {key!r}: {exc}") from None
