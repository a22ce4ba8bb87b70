"""Error measurement for fitted models and eigenvector clouds."""

from __future__ import annotations

from dataclasses import asdict, dataclass
from typing import Callable, Optional, Sequence, Union

import numpy as np

from . import serialize
from .eigensearch import EigenCloud, write_csv
from .extension import ExtensionModel
from .operator import OperatorHandle

VIOLATION_SLACK = 1e-9

Approximant = Union[ExtensionModel, Callable[[np.ndarray], np.ndarray]]


@dataclass
class ErrorReport:
    """Monte Carlo error summary.

    ``l2_normalized`` is ``(int_P |f_hat - f|^2 / vol P)^(1/2)``, the root mean
    square error over the box. ``l2_per_volume`` divides the L2 norm by the
    full volume instead, ``(int_P |f_hat - f|^2)^(1/2) / vol P``; the two
    differ by a factor ``sqrt(vol P)``.
    """

    l2_normalized: float
    max_pointwise: list
    bound_violations: int
    mc_points: int
    rng_seed: int
    std_error: float = 0.0
    box_volume: float = 0.0
    l2_per_volume: float = 0.0

    def to_dict(self) -> dict:
        return asdict(self)

    def save_json(self, path) -> None:
        serialize.dump(self.to_dict(), path)

    def rows(self) -> list:
        rows = [
            ("l2_normalized", self.l2_normalized),
            ("std_error", self.std_error),
            ("l2_per_volume", self.l2_per_volume),
            ("bound_violations", self.bound_violations),
            ("mc_points", self.mc_points),
            ("rng_seed", self.rng_seed),
            ("box_volume", self.box_volume),
        ]
        rows += [(f"max_pointwise_{i + 1}", v) for i, v in enumerate(self.max_pointwise)]
        return rows


def _box(box) -> np.ndarray:
    box = np.array(box, dtype=float)
    return box.reshape(-1, 2)


def _violations(diff_coords: np.ndarray, bound: np.ndarray) -> np.ndarray:
    """Mask of points where some coordinate exceeds its bound."""
    return np.any(diff_coords > bound + VIOLATION_SLACK, axis=-1)


def mc_l2_error(
    T: OperatorHandle,
    approx: Approximant,
    box,
    mc_points: int,
    rng_seed: int,
) -> ErrorReport:
    """Monte Carlo estimate of the L2 distance between ``approx`` and ``T`` on a box.

    The integral ``int_P |f_hat - T|^2`` is estimated as
    ``vol(P) * mean |f_hat(x_i) - T(x_i)|^2`` over uniform points ``x_i``; see
    ``ErrorReport`` for the two normalizations reported.

    ``approx`` is either an ``ExtensionModel`` (its midpoint approximation is
    used, and its pointwise bounds are audited on the same points) or any
    vectorized callable of ambient points.
    """
    if mc_points < 1:
        raise ValueError("mc_points must be at least 1")
    box = _box(box)
    vol = float(np.prod(box[:, 1] - box[:, 0]))
    rng = np.random.default_rng(np.random.SeedSequence(rng_seed, spawn_key=(2,)))
    X = box[:, 0] + rng.random((mc_points, len(box))) * (box[:, 1] - box[:, 0])
    TX = T.evaluate(X)
    violations = 0
    if isinstance(approx, ExtensionModel):
        frame = approx.frame
        _, _, mid, bound = approx.extensions(frame.to_coords(X))
        F = frame.from_coords(mid)
        coord_diff = np.abs(mid - frame.to_coords(TX))
        violations = int(np.sum(_violations(coord_diff, bound)))
    else:
        F = np.asarray(approx(X), dtype=float)
        coord_diff = np.abs(F - TX)
    sq = np.sum((F - TX) ** 2, axis=-1)
    mean = float(np.mean(sq))
    rms = float(np.sqrt(mean))
    # delta method on sqrt(mean)
    if mc_points > 1 and mean > 0:
        se = float(np.std(sq, ddof=1) / np.sqrt(mc_points)) / (2.0 * rms)
    else:
        se = 0.0
    return ErrorReport(
        l2_normalized=rms,
        l2_per_volume=float(np.sqrt(vol * mean) / vol) if vol > 0 else 0.0,
        max_pointwise=coord_diff.max(axis=0).tolist(),
        bound_violations=violations,
        mc_points=int(mc_points),
        rng_seed=int(rng_seed),
        std_error=float(se),
        box_volume=vol,
    )


def grid(box, points_per_axis: int) -> np.ndarray:
    """Deterministic tensor grid with ``points_per_axis`` nodes per axis (endpoints included)."""
    box = _box(box)
    axes = [np.linspace(a, b, points_per_axis) for a, b in box]
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([m.reshape(-1) for m in mesh], axis=-1)


def bound_audit(T: OperatorHandle, model: ExtensionModel, box, grid_points: int) -> int:
    """Number of grid points where ``|f_hat - T|(w) > bound(w)`` for some ``w``."""
    X = grid(box, grid_points)
    return audit_points(T, model, X)


def audit_points(T: OperatorHandle, model: ExtensionModel, X) -> int:
    X = np.atleast_2d(np.asarray(X, dtype=float))
    C = model.frame.to_coords(X)
    _, _, mid, bound = model.extensions(C)
    diff = np.abs(mid - model.frame.to_coords(T.evaluate(X)))
    return int(np.sum(_violations(diff, bound)))


def ray_angles(points, directions: Sequence) -> np.ndarray:
    """Angle from each point to the nearest line spanned by one of ``directions``.

    Zero vectors get angle 0.
    """
    P = np.atleast_2d(np.asarray(points, dtype=float))
    D = np.array(directions, dtype=float)
    D = D / np.linalg.norm(D, axis=1)[:, None]
    norms = np.linalg.norm(P, axis=1)
    U = P / np.where(norms == 0, 1.0, norms)[:, None]
    dots = U @ D.T  # (m, k)
    # atan2 of the perpendicular and parallel parts; arccos is ill-conditioned near 0
    perp = np.linalg.norm(U[:, None, :] - dots[:, :, None] * D[None, :, :], axis=-1)
    ang = np.arctan2(perp, np.abs(dots)).min(axis=1)
    return np.where(norms == 0, 0.0, ang)


def cloud_quality(cloud: EigenCloud, reference: Optional[Sequence] = None) -> dict:
    """Summary statistics of a cloud's diagonal errors and, given reference
    eigen-directions, of the angles between samples and the nearest direction."""
    err = np.asarray(cloud.errors, dtype=float)
    q = np.quantile(err, [0.1, 0.25, 0.5, 0.75, 0.9])
    stats = {
        "count": int(len(err)),
        "mean_epsilon": float(err.mean()),
        "median_epsilon": float(q[2]),
        "quantiles_epsilon": {k: float(v) for k, v in zip(("q10", "q25", "q50", "q75", "q90"), q)},
        "max_epsilon": float(err.max()),
    }
    if reference:
        ang = ray_angles(cloud.points, [getattr(r, "direction", r) for r in reference])
        stats["angle"] = {
            "mean": float(ang.mean()),
            "median": float(np.median(ang)),
            "max": float(ang.max()),
        }
    return stats


def write_metric_csv(path, rows) -> None:
    write_csv(path, ["metric", "value"], rows)
