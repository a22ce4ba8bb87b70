"""End-to-end assembly: eigenvector search -> basis -> extension model -> error."""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .basisframe import BasisFrame, direct_basis, octant_basis, pca_basis, user_basis
from .config import RunConfig
from .eigensearch import EigenCloud, run_search
from .extension import ExtensionModel, build_model
from .metrics import ErrorReport, bound_audit, mc_l2_error
from .operator import OperatorHandle, make_operator

log = logging.getLogger(__name__)


def operator_for(cfg: RunConfig) -> OperatorHandle:
    return make_operator(cfg.operator, cfg.operator_params)


def choose_frame(cfg: RunConfig, points: np.ndarray) -> BasisFrame:
    """Basis for the lattice order according to ``cfg.basis_mode``.

    ``direct`` falls back to PCA when the cloud is not concentrated on ``n`` lines.
    """
    if cfg.basis_mode == "user":
        return user_basis(cfg.vectors)
    if cfg.basis_mode == "direct":
        frame = direct_basis(points, cfg.tol_angle)
        if frame is not None:
            return frame
        log.info("direct basis not applicable, falling back to PCA")
    frame = pca_basis(points, center=cfg.center)
    if cfg.basis_mode == "octant":
        return octant_basis(frame, cfg.sigmas)
    return frame


@dataclass
class PipelineResult:
    cloud: EigenCloud
    seeded: EigenCloud
    frame: BasisFrame
    model: ExtensionModel
    report: ErrorReport
    audit_violations: int


def fit(cfg: RunConfig, T: OperatorHandle, points) -> ExtensionModel:
    frame = choose_frame(cfg, np.asarray(points, dtype=float))
    return build_model(T, frame, points, cfg.alpha)


def run_pipeline(cfg: RunConfig) -> PipelineResult:
    T = operator_for(cfg)
    scfg = cfg.search_config()
    cloud, seeded = run_search(T, scfg, keep_seed=True)
    model = fit(cfg, T, cloud.points)
    box = scfg.resolve_box(T)
    approx = T.evaluate if cfg.oracle else model
    report = mc_l2_error(T, approx, box, cfg.mc_points, cfg.seed)
    audit = 0 if cfg.oracle else bound_audit(T, model, box, cfg.audit_grid)
    return PipelineResult(cloud, seeded, model.frame, model, report, audit)
