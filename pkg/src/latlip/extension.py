"""Weakened lattice Lipschitz extensions (McShane and Whitney) with error bounds.

All computations run in lattice coordinates of a ``BasisFrame``. The distance
used for coordinate ``w`` between ``x`` and ``z`` is

    d_w(x, z) = (1 - alpha) |x - z|(w) + alpha ||x - z||,

with ``||.||`` the Euclidean norm of the lattice coordinates. ``alpha = 0`` is
the plain lattice Lipschitz condition; ``alpha = 1`` treats every coordinate
function as an ordinary Lipschitz function.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import serialize
from .basisframe import BasisFrame
from .errors import UnboundedConstantError, UncertifiedModelError
from .operator import OperatorHandle

CERT_SLACK = 1e-9
# queries per vectorized block; memory is about BLOCK * |S| * n floats
BLOCK = 1024


def blended_distance(X: np.ndarray, Z: np.ndarray, alpha: float) -> np.ndarray:
    """``d_w(x, z)`` for every query in ``X`` (q, n) and sample in ``Z`` (m, n).

    :returns: array of shape (q, m, n)
    """
    diff = np.abs(X[:, None, :] - Z[None, :, :])
    norm = np.sqrt(np.sum(diff * diff, axis=-1, keepdims=True))
    return (1.0 - alpha) * diff + alpha * norm


def _pair_ratios(Z, TZ, alpha, rows):
    """Ratio |T x - T y|(w) / d_w(x, y) for x in Z[rows] against all of Z."""
    num = np.abs(TZ[rows, None, :] - TZ[None, :, :])
    den = blended_distance(Z[rows], Z, alpha)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = num / den
    # zero over zero: the pair imposes nothing
    ratio[(den == 0.0) & (num == 0.0)] = 0.0
    return ratio


def estimate_K(Z, TZ, alpha: float) -> np.ndarray:
    """Smallest per-coordinate constants satisfying the blended inequality on the samples.

    Exact maximum over all ordered pairs of distinct samples.

    :raises UnboundedConstantError: some coordinate needs an infinite constant
        (only possible with ``alpha = 0``: two samples share a coordinate but
        their images differ there)
    """
    Z = np.asarray(Z, dtype=float)
    TZ = np.asarray(TZ, dtype=float)
    m, n = Z.shape
    if m < 2:
        raise ValueError("need at least two samples to estimate K")
    if not 0.0 <= alpha <= 1.0:
        raise ValueError("alpha must be in [0, 1]")
    K = np.zeros(n)
    for start in range(0, m, BLOCK):
        rows = np.arange(start, min(start + BLOCK, m))
        ratio = _pair_ratios(Z, TZ, alpha, rows)
        K = np.maximum(K, ratio.max(axis=(0, 1)))
    bad = np.flatnonzero(~np.isfinite(K))
    if bad.size:
        w = int(bad[0])
        raise UnboundedConstantError(
            w, f"K({w + 1}) is unbounded: samples coincide in coordinate {w + 1} with different values"
        )
    return K


def _dedupe(Z, TZ):
    _, first, inverse = np.unique(Z, axis=0, return_index=True, return_inverse=True)
    inverse = inverse.reshape(-1)
    if len(first) == len(Z):
        return Z, TZ
    if np.any(TZ != TZ[first][inverse]):
        raise ValueError("duplicate sample coordinates carry different values")
    keep = np.sort(first)
    return Z[keep], TZ[keep]


@dataclass(frozen=True)
class ExtensionModel:
    frame: BasisFrame
    z: np.ndarray  # (m, n) sample points, lattice coordinates
    tz: np.ndarray  # (m, n) operator values, lattice coordinates
    K: np.ndarray  # (n,)
    alpha: float
    norm: str = "euclidean"

    def __post_init__(self):
        z = np.array(self.z, dtype=float)
        tz = np.array(self.tz, dtype=float)
        K = np.array(self.K, dtype=float).reshape(-1)
        n = self.frame.dimension
        if z.ndim != 2 or z.shape[1] != n or z.shape != tz.shape or len(z) == 0:
            raise ValueError("samples must be nonempty (m, n) arrays matching the frame")
        if K.shape != (n,) or np.any(K < 0) or not np.all(np.isfinite(K)):
            raise ValueError("K must hold n finite nonnegative constants")
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError("alpha must be in [0, 1]")
        if self.norm != "euclidean":
            raise ValueError("only the euclidean norm is supported")
        z, tz = _dedupe(z, tz)
        for a in (z, tz, K):
            a.setflags(write=False)
        object.__setattr__(self, "z", z)
        object.__setattr__(self, "tz", tz)
        object.__setattr__(self, "K", K)
        object.__setattr__(self, "alpha", float(self.alpha))

    @property
    def dimension(self) -> int:
        return self.frame.dimension

    def certification_gap(self) -> np.ndarray:
        """Largest excess ``|Tx - Ty|(w) - K(w) d_w(x, y)`` over sample pairs, per coordinate.

        Nonpositive (up to ``CERT_SLACK``) when the constants are certified.
        """
        m, n = self.z.shape
        gap = np.full(n, -np.inf)
        for start in range(0, m, BLOCK):
            rows = np.arange(start, min(start + BLOCK, m))
            num = np.abs(self.tz[rows, None, :] - self.tz[None, :, :])
            den = blended_distance(self.z[rows], self.z, self.alpha)
            gap = np.maximum(gap, (num - self.K * den).max(axis=(0, 1)))
        return gap

    def is_certified(self) -> bool:
        return bool(np.all(self.certification_gap() <= CERT_SLACK))

    def _reduce(self, X, sign):
        X = np.atleast_2d(np.asarray(X, dtype=float))
        out = np.empty_like(X)
        for start in range(0, len(X), BLOCK):
            sl = slice(start, start + BLOCK)
            d = blended_distance(X[sl], self.z, self.alpha)
            terms = self.tz[None, :, :] + sign * self.K * d
            out[sl] = terms.max(axis=1) if sign < 0 else terms.min(axis=1)
        return out

    def mcshane(self, x) -> np.ndarray:
        """Lower extension: ``max_z T(z)(w) - K(w) d_w(x, z)``."""
        return _shape_like(self._reduce(x, -1.0), x)

    def whitney(self, x) -> np.ndarray:
        """Upper extension: ``min_z T(z)(w) + K(w) d_w(x, z)``."""
        return _shape_like(self._reduce(x, +1.0), x)

    def interpolate(self, x) -> np.ndarray:
        return 0.5 * (self.mcshane(x) + self.whitney(x))

    def extensions(self, x):
        """(mcshane, whitney, midpoint, bound) in one pass over the samples."""
        X = np.atleast_2d(np.asarray(x, dtype=float))
        lo = np.empty_like(X)
        hi = np.empty_like(X)
        bound = np.empty_like(X)
        for start in range(0, len(X), BLOCK):
            sl = slice(start, start + BLOCK)
            d = blended_distance(X[sl], self.z, self.alpha)
            kd = self.K * d
            lo[sl] = (self.tz - kd).max(axis=1)
            hi[sl] = (self.tz + kd).min(axis=1)
            bound[sl] = 2.0 * self.K * d.min(axis=1)
        mid = 0.5 * (lo + hi)
        return tuple(_shape_like(a, x) for a in (lo, hi, mid, bound))

    def error_bound(self, x) -> np.ndarray:
        """Coordinate-wise bound ``2 K(w) min_z d_w(x, z)``.

        Valid for both extensions (and so for their midpoint) whenever the
        operator satisfies the blended inequality with these constants
        everywhere, not only on the samples.
        """
        X = np.atleast_2d(np.asarray(x, dtype=float))
        out = np.empty_like(X)
        for start in range(0, len(X), BLOCK):
            sl = slice(start, start + BLOCK)
            out[sl] = 2.0 * self.K * blended_distance(X[sl], self.z, self.alpha).min(axis=1)
        return _shape_like(out, x)

    def evaluate_ambient(self, p) -> np.ndarray:
        """Midpoint approximation at ambient point(s), returned in ambient coordinates."""
        return self.frame.from_coords(self.interpolate(self.frame.to_coords(p)))

    def to_dict(self) -> dict:
        return {
            "frame": self.frame.to_dict(),
            "samples": self.z.tolist(),
            "values": self.tz.tolist(),
            "K": self.K.tolist(),
            "alpha": self.alpha,
            "norm": self.norm,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ExtensionModel":
        return cls(
            BasisFrame.from_dict(d["frame"]),
            np.array(d["samples"], dtype=float),
            np.array(d["values"], dtype=float),
            np.array(d["K"], dtype=float),
            float(d["alpha"]),
            d.get("norm", "euclidean"),
        )

    def save(self, path) -> None:
        serialize.dump(self.to_dict(), path)

    @classmethod
    def load(cls, path) -> "ExtensionModel":
        return cls.from_dict(serialize.load(path))


def _shape_like(out, x):
    return out[0] if np.ndim(x) == 1 else out


def build_model(
    T: OperatorHandle,
    frame: BasisFrame,
    points,
    alpha: float,
    K=None,
    check: bool = True,
) -> ExtensionModel:
    """Evaluate ``T`` on ambient sample points and assemble an extension model.

    :param points: (m, n) ambient sample points (e.g. an eigenvector cloud)
    :param K: per-coordinate constants; estimated from the samples when omitted
    :param check: reject given constants that fail the inequality on the samples
    :raises UncertifiedModelError: given ``K`` is too small for the samples
    """
    P = np.atleast_2d(np.asarray(getattr(points, "points", points), dtype=float))
    Z = frame.to_coords(P)
    TZ = frame.to_coords(T.evaluate(P))
    Z, TZ = _dedupe(Z, TZ)
    if K is None:
        K = estimate_K(Z, TZ, alpha)
    model = ExtensionModel(frame, Z, TZ, np.asarray(K, dtype=float), alpha)
    if check:
        gap = model.certification_gap()
        if np.any(gap > CERT_SLACK):
            w = int(np.argmax(gap))
            raise UncertifiedModelError(
                f"K({w + 1}) = {model.K[w]:g} violates the inequality on the samples by {gap[w]:.3e}"
            )
    return model
