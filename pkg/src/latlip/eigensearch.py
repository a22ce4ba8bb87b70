"""Monte Carlo search for approximate eigenvectors.

Uniform seeding on a box, selection of the points with smallest diagonal
error, then repeated Gaussian refinement around each survivor with a spread
proportional to the survivor's own error. A survivor's current point is
always among its candidates, so its error can only go down.

Randomness is split into independent substreams: one for the uniform seed and
one per (step, survivor), so the refinement of different survivors can be
done in any order (or in parallel) and still give identical results.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from .diagonal import EigenSample, diagonal_errors, diagonal_values
from .errors import ConfigError
from .operator import OperatorHandle

VARIANCE_MODES = ("code", "density")
DISTRIBUTIONS = ("uniform",)


@dataclass(frozen=True)
class SearchConfig:
    N: int = 250
    N0: int = 50
    N1: int = 10
    tau: float = 5.0
    steps: int = 5
    box: Optional[tuple] = None  # ((a1, b1), ..., (an, bn)); None -> operator's domain box
    rng_seed: int = 0
    variance_mode: str = "code"
    distribution: str = "uniform"

    def __post_init__(self):
        if not (0 < self.N0 <= self.N):
            raise ConfigError(f"need 0 < N0 <= N, got N={self.N}, N0={self.N0}")
        if self.N1 < 1:
            raise ConfigError("N1 must be at least 1")
        if self.steps < 0:
            raise ConfigError("steps must be non-negative")
        if not self.tau > 0:
            raise ConfigError("tau must be positive")
        if not (0 <= self.rng_seed < 2**64):
            raise ConfigError("rng_seed must fit in an unsigned 64-bit integer")
        if self.variance_mode not in VARIANCE_MODES:
            raise ConfigError(f"variance_mode must be one of {VARIANCE_MODES}")
        if self.distribution not in DISTRIBUTIONS:
            # prior-informed sampling is not implemented
            raise ConfigError(f"distribution must be one of {DISTRIBUTIONS}")
        if self.box is not None:
            box = tuple(tuple(float(v) for v in row) for row in self.box)
            if any(len(row) != 2 or row[0] > row[1] for row in box):
                raise ConfigError("box rows must be (lower, upper) with lower <= upper")
            object.__setattr__(self, "box", box)

    def resolve_box(self, T: OperatorHandle) -> np.ndarray:
        if self.box is None:
            return np.array(T.domain_box, dtype=float)
        box = np.array(self.box, dtype=float)
        if box.shape != (T.dimension, 2):
            raise ConfigError(f"box has shape {box.shape}, operator needs ({T.dimension}, 2)")
        return box


@dataclass
class EigenCloud:
    points: np.ndarray  # (m, n)
    lambdas: np.ndarray  # (m,)
    errors: np.ndarray  # (m,)
    config: SearchConfig
    box: np.ndarray
    # errors of every survivor after each refinement step; row 0 is the selection
    trace: list = field(default_factory=list)

    def __len__(self):
        return len(self.points)

    @property
    def history(self) -> list[float]:
        """Mean error after selection (index 0) and after each refinement step."""
        return [float(np.mean(e)) for e in self.trace]

    @property
    def samples(self) -> list[EigenSample]:
        return [
            EigenSample(self.points[i].copy(), float(self.lambdas[i]), float(self.errors[i]))
            for i in range(len(self))
        ]

    def to_csv(self, path) -> None:
        n = self.points.shape[1]
        header = [f"x{i + 1}" for i in range(n)] + ["lambda", "epsilon"]
        rows = np.column_stack([self.points, self.lambdas, self.errors])
        write_csv(path, header, rows)

    def history_to_csv(self, path) -> None:
        write_csv(path, ["step", "mean_epsilon"], list(enumerate(self.history)))

    def trace_to_csv(self, path) -> None:
        """Per-survivor error after each step (one row per step)."""
        if not self.trace:
            write_csv(path, ["step"], [])
            return
        m = len(self.trace[0])
        header = ["step"] + [f"s{i + 1}" for i in range(m)]
        write_csv(path, header, [[s, *row] for s, row in enumerate(self.trace)])


def _fmt(v) -> str:
    if isinstance(v, str):
        return v
    if isinstance(v, (bool, int, np.integer)):
        return str(int(v))
    return format(float(v), ".17g")


def write_csv(path, header, rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) for v in row])


def read_cloud_csv(path) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Read a cloud CSV back into (points, lambdas, errors)."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        data = np.array([[float(v) for v in row] for row in reader if row], dtype=float)
    n = sum(1 for h in header if h.startswith("x"))
    if header[n:] != ["lambda", "epsilon"] or n == 0:
        raise ValueError(f"{path}: unexpected cloud header {header}")
    data = data.reshape(-1, n + 2)
    return data[:, :n], data[:, n], data[:, n + 1]


def _substream(seed: int, *key: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=key))


def _score(T, X):
    return diagonal_values(T, X), diagonal_errors(T, X)


def seed_uniform(T: OperatorHandle, cfg: SearchConfig) -> EigenCloud:
    """Sample ``cfg.N`` points uniformly on the box, sorted by increasing error."""
    box = cfg.resolve_box(T)
    rng = _substream(cfg.rng_seed, 0)
    u = rng.random((cfg.N, T.dimension))
    X = box[:, 0] + u * (box[:, 1] - box[:, 0])
    lam, err = _score(T, X)
    order = np.argsort(err, kind="stable")
    return EigenCloud(X[order], lam[order], err[order], cfg, box, [])


def select_best(cloud: EigenCloud, N0: int) -> EigenCloud:
    """Keep the ``N0`` samples with the smallest error (stable on ties)."""
    if N0 > len(cloud):
        raise ValueError(f"cannot select {N0} from a cloud of {len(cloud)}")
    if N0 < 1:
        raise ValueError("N0 must be positive")
    order = np.argsort(cloud.errors, kind="stable")[:N0]
    errors = cloud.errors[order]
    return EigenCloud(
        cloud.points[order], cloud.lambdas[order], errors, cloud.config, cloud.box, [errors.copy()]
    )


def proposal_scale(errors: np.ndarray, tau: float, mode: str) -> np.ndarray:
    """Per-axis standard deviation of the Gaussian proposals."""
    if mode == "code":
        return tau * errors
    # density exp(-|a - x|^2 / (tau eps)) has per-axis variance tau eps / 2
    return np.sqrt(tau * errors / 2.0)


def refine_step(T: OperatorHandle, cloud: EigenCloud, cfg: SearchConfig, step: int = 0) -> EigenCloud:
    """One Gaussian refinement pass over every survivor.

    Proposals are clamped to the box before being scored. Each survivor moves
    to its best candidate; on ties it stays where it is.
    """
    if len(cloud) == 0:
        raise ValueError("cannot refine an empty cloud")
    m, n = cloud.points.shape
    box = cloud.box
    sd = proposal_scale(cloud.errors, cfg.tau, cfg.variance_mode)

    cand = np.empty((m, cfg.N1 + 1, n))
    cand[:, 0] = cloud.points
    for i in range(m):
        rng = _substream(cfg.rng_seed, 1, step, i)
        cand[i, 1:] = rng.normal(cloud.points[i], sd[i], size=(cfg.N1, n))
    cand[:, 1:] = np.clip(cand[:, 1:], box[:, 0], box[:, 1])

    flat = cand.reshape(-1, n)
    lam, err = _score(T, flat)
    lam = lam.reshape(m, cfg.N1 + 1)
    err = err.reshape(m, cfg.N1 + 1)
    # incumbent is at index 0 and argmin returns the first minimum
    best = np.argmin(err, axis=1)
    rows = np.arange(m)
    # the incumbent's stored score is kept bit-for-bit
    keep = best == 0
    new_err = np.where(keep, cloud.errors, err[rows, best])
    new_lam = np.where(keep, cloud.lambdas, lam[rows, best])
    new_pts = cand[rows, best]
    return EigenCloud(
        new_pts, new_lam, new_err, cfg, box, [*cloud.trace, new_err.copy()]
    )


def run_search(T: OperatorHandle, cfg: SearchConfig, keep_seed: bool = False):
    """Seed, select, then refine ``cfg.steps`` times.

    :returns: the final cloud, or ``(final, seeded)`` when ``keep_seed`` is set
    """
    seeded = seed_uniform(T, cfg)
    cloud = select_best(seeded, cfg.N0)
    for step in range(cfg.steps):
        cloud = refine_step(T, cloud, cfg, step)
    if keep_seed:
        return cloud, seeded
    return cloud


def with_seed(cfg: SearchConfig, seed: int) -> SearchConfig:
    return replace(cfg, rng_seed=seed)
