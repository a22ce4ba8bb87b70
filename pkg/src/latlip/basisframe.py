"""Bases inducing the lattice order, coordinate transforms, lattice primitives.

A frame stores its basis vectors as the columns of ``matrix``; ambient points
map to lattice coordinates through the inverse of that matrix.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import DegenerateCloudError

SOURCES = ("direct", "pca", "octant", "user", "identity")


def _sign_normalize(vectors: np.ndarray) -> np.ndarray:
    """Flip each column so that its largest-magnitude entry is positive."""
    idx = np.argmax(np.abs(vectors), axis=0)
    signs = np.sign(vectors[idx, np.arange(vectors.shape[1])])
    signs[signs == 0] = 1.0
    return vectors * signs


@dataclass(frozen=True)
class BasisFrame:
    matrix: np.ndarray  # (n, n), column j is the j-th basis vector
    source: str = "user"
    inverse: np.ndarray = None

    def __post_init__(self):
        B = np.array(self.matrix, dtype=float)
        if B.ndim != 2 or B.shape[0] != B.shape[1]:
            raise ValueError(f"basis matrix must be square, got shape {B.shape}")
        if self.source not in SOURCES:
            raise ValueError(f"unknown frame source {self.source!r}")
        scale = np.prod(np.linalg.norm(B, axis=0))
        if scale == 0.0 or abs(np.linalg.det(B)) <= 1e-10 * scale:
            raise ValueError("basis vectors are linearly dependent")
        inv = np.linalg.inv(B)
        B.setflags(write=False)
        inv.setflags(write=False)
        object.__setattr__(self, "matrix", B)
        object.__setattr__(self, "inverse", inv)

    @property
    def dimension(self) -> int:
        return self.matrix.shape[0]

    @property
    def vectors(self) -> list[np.ndarray]:
        return [self.matrix[:, j].copy() for j in range(self.dimension)]

    def to_coords(self, p) -> np.ndarray:
        """Ambient point(s) -> lattice coordinates (last axis)."""
        return np.asarray(p, dtype=float) @ self.inverse.T

    def from_coords(self, c) -> np.ndarray:
        return np.asarray(c, dtype=float) @ self.matrix.T

    def to_dict(self) -> dict:
        return {"vectors": self.matrix.T.tolist(), "source": self.source}

    @classmethod
    def from_dict(cls, d: dict) -> "BasisFrame":
        return cls(np.array(d["vectors"], dtype=float).T, d.get("source", "user"))

    def to_json(self) -> str:
        from .serialize import dumps

        return dumps(self.to_dict())

    @classmethod
    def from_json(cls, text: str) -> "BasisFrame":
        return cls.from_dict(json.loads(text))


def identity_frame(n: int) -> BasisFrame:
    return BasisFrame(np.eye(n), "identity")


def user_basis(vectors) -> BasisFrame:
    """Frame from a list of basis vectors given in ambient coordinates."""
    return BasisFrame(np.array(vectors, dtype=float).T, "user")


def _as_points(cloud) -> np.ndarray:
    pts = getattr(cloud, "points", cloud)
    return np.atleast_2d(np.asarray(pts, dtype=float))


def pca_basis(cloud, center: str = "mean") -> BasisFrame:
    """Principal axes of a point cloud, ordered by decreasing variance.

    :param cloud: an ``EigenCloud`` or an ``(m, n)`` array of points
    :param center: ``"mean"`` for standard PCA, ``"origin"`` for second moments about 0
    :raises DegenerateCloudError: if the cloud does not span the space
    """
    X = _as_points(cloud)
    m, n = X.shape
    if m < n:
        raise DegenerateCloudError(f"need at least {n} points, got {m}")
    if center == "mean":
        Xc = X - X.mean(axis=0)
    elif center == "origin":
        Xc = X
    else:
        raise ValueError("center must be 'mean' or 'origin'")
    cov = Xc.T @ Xc / max(m - 1, 1)
    w, V = np.linalg.eigh(cov)
    order = np.argsort(w, kind="stable")[::-1]
    w, V = w[order], V[:, order]
    if w[0] <= 0.0 or w[-1] < 1e-12 * w[0]:
        raise DegenerateCloudError("covariance of the cloud is rank deficient")
    return BasisFrame(_sign_normalize(V), "pca")


def explained_variance(frame: BasisFrame, cloud) -> np.ndarray:
    """Variance of the cloud along each frame axis (sample variance)."""
    C = frame.to_coords(_as_points(cloud))
    return C.var(axis=0, ddof=1)


def octant_basis(frame: BasisFrame, sigmas) -> BasisFrame:
    """Frame of the orthant diagonals ``B sigma_j / sqrt(n)``.

    :param sigmas: ``n`` sign vectors with entries in {-1, 1}, one per new basis vector
    """
    S = np.array(sigmas, dtype=float)
    n = frame.dimension
    if S.shape != (n, n):
        raise ValueError(f"need {n} sign vectors of length {n}")
    if not np.all(np.abs(S) == 1.0):
        raise ValueError("sign vectors must have entries in {-1, 1}")
    if abs(np.linalg.det(S)) < 0.5:
        # det of a +-1 matrix is an integer multiple of 2^(n-1); anything below 1 is zero
        raise ValueError("sign vectors are linearly dependent")
    return BasisFrame(frame.matrix @ (S.T / np.sqrt(n)), "octant")


def _line_distance(U: np.ndarray) -> np.ndarray:
    """Angles between lines through the unit vectors in rows of ``U``."""
    c = np.clip(np.abs(U @ U.T), 0.0, 1.0)
    return np.arccos(c)


def direct_basis(cloud, tol_angle: float, min_fraction: float = 0.05) -> Optional[BasisFrame]:
    """Basis from a cloud concentrated around ``n`` lines through the origin.

    Directions are clustered single-link by the angle between the lines they
    span (``p`` and ``-p`` are the same line). Clusters holding less than
    ``min_fraction`` of the nonzero points are treated as noise. Returns
    ``None`` unless exactly ``n`` clusters remain with independent axes.
    """
    X = _as_points(cloud)
    n = X.shape[1]
    norms = np.linalg.norm(X, axis=1)
    X = X[norms > 0]
    m = len(X)
    if m == 0:
        return None
    U = X / np.linalg.norm(X, axis=1)[:, None]
    close = _line_distance(U) <= tol_angle

    # connected components of the "close" graph = single-link clusters
    labels = -np.ones(m, dtype=int)
    k = 0
    for i in range(m):
        if labels[i] >= 0:
            continue
        stack = [i]
        labels[i] = k
        while stack:
            j = stack.pop()
            for nb in np.flatnonzero(close[j] & (labels < 0)):
                labels[nb] = k
                stack.append(nb)
        k += 1

    sizes = np.bincount(labels, minlength=k)
    big = [c for c in range(k) if sizes[c] >= min_fraction * m]
    if len(big) != n:
        return None
    axes = []
    for c in sorted(big, key=lambda c: (-sizes[c], np.flatnonzero(labels == c)[0])):
        members = U[labels == c]
        # dominant eigenvector of sum u u^T is the sign-free mean direction
        w, V = np.linalg.eigh(members.T @ members)
        axes.append(V[:, -1])
    B = _sign_normalize(np.column_stack(axes))
    if abs(np.linalg.det(B)) < 1e-8:
        return None
    return BasisFrame(B, "direct")


def lattice_abs(x) -> np.ndarray:
    return np.abs(np.asarray(x, dtype=float))


def _check_pair(x, y):
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape:
        raise ValueError(f"dimension mismatch: {x.shape} vs {y.shape}")
    return x, y


def lattice_sup(x, y) -> np.ndarray:
    x, y = _check_pair(x, y)
    return np.maximum(x, y)


def lattice_inf(x, y) -> np.ndarray:
    x, y = _check_pair(x, y)
    return np.minimum(x, y)
