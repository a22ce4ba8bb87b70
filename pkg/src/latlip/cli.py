"""Command-line front end.

    latlip eigensearch --config run.ini --out runs/a
    latlip fit         --config run.ini --out runs/a [--cloud runs/a/cloud.csv]
    latlip evaluate    --out runs/a [--model runs/a/model.json] [--points pts.csv | --grid 51]
    latlip benchmark   --config run.ini --out runs/b

Exit codes: 0 success, 1 I/O failure, 2 configuration or input error,
3 numerical failure (degenerate cloud, unbounded or uncertified constants).
"""

from __future__ import annotations

import argparse
import csv
import logging
import sys
from pathlib import Path

import numpy as np

from . import serialize
from .config import RunConfig, format_config, load_config
from .eigensearch import read_cloud_csv, run_search, write_csv
from .errors import ConfigError, NumericalError
from .extension import ExtensionModel
from .metrics import cloud_quality, grid, write_metric_csv
from .operator import make_operator
from .pipeline import fit, operator_for, run_pipeline

log = logging.getLogger("latlip")

EXIT_IO = 1
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3


def _config(args) -> RunConfig:
    cfg = load_config(args.config) if args.config else RunConfig()
    return cfg.with_seed(args.seed)


def _write_config(cfg: RunConfig, out: Path) -> None:
    with open(out / "config.ini", "w", newline="\n") as fh:
        fh.write(format_config(cfg))


def _cloud_summary(cfg, T, cloud) -> dict:
    return {
        "operator": cfg.operator,
        "operator_params": cfg.operator_params,
        "seed": cfg.seed,
        "history": cloud.history,
        "quality": cloud_quality(cloud, T.known_eigenrays or None),
    }


def cmd_eigensearch(args) -> int:
    cfg = _config(args)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    T = operator_for(cfg)
    cloud, seeded = run_search(T, cfg.search_config(), keep_seed=True)
    seeded.to_csv(out / "seed.csv")
    cloud.to_csv(out / "cloud.csv")
    cloud.history_to_csv(out / "history.csv")
    cloud.trace_to_csv(out / "trace.csv")
    serialize.dump(_cloud_summary(cfg, T, cloud), out / "summary.json")
    _write_config(cfg, out)
    log.info("cloud of %d points, mean epsilon %.3g", len(cloud), cloud.history[-1])
    return 0


def cmd_fit(args) -> int:
    cfg = _config(args)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    cloud_path = Path(args.cloud) if args.cloud else out / "cloud.csv"
    points, _, _ = read_cloud_csv(cloud_path)
    T = operator_for(cfg)
    model = fit(cfg, T, points)
    model.save(out / "model.json")
    serialize.dump(model.frame.to_dict(), out / "frame.json")
    _write_config(cfg, out)
    log.info("K = %s (alpha = %g, %d samples)", model.K, model.alpha, len(model.z))
    return 0


def _read_points(path) -> np.ndarray:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        cols = [i for i, h in enumerate(header) if h.startswith("x")]
        if not cols:
            raise ConfigError(f"{path}: no x1..xn columns")
        return np.array([[float(row[i]) for i in cols] for row in reader if row], dtype=float)


def evaluation_rows(model: ExtensionModel, X: np.ndarray) -> np.ndarray:
    """Rows ``x (ambient), f_hat (ambient), bound (lattice coordinates)``."""
    C = model.frame.to_coords(X)
    _, _, mid, bound = model.extensions(C)
    return np.column_stack([X, model.frame.from_coords(mid), bound])


def cmd_evaluate(args) -> int:
    cfg = _config(args)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    model = ExtensionModel.load(Path(args.model) if args.model else out / "model.json")
    n = model.dimension
    if args.points:
        X = _read_points(args.points)
        if X.shape[1] != n:
            raise ConfigError(f"points have dimension {X.shape[1]}, model has {n}")
    else:
        box = cfg.box if cfg.box is not None else make_operator(cfg.operator, cfg.operator_params).domain_box
        X = grid(box, args.grid or cfg.grid)
    rows = evaluation_rows(model, X)
    header = (
        [f"x{i + 1}" for i in range(n)]
        + [f"fhat{i + 1}" for i in range(n)]
        + [f"bound{i + 1}" for i in range(n)]
    )
    write_csv(out / args.output, header, rows)
    return 0


def cmd_benchmark(args) -> int:
    cfg = _config(args)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    res = run_pipeline(cfg)
    res.cloud.to_csv(out / "cloud.csv")
    res.cloud.history_to_csv(out / "history.csv")
    res.model.save(out / "model.json")
    report = res.report.to_dict()
    report["K"] = res.model.K.tolist()
    report["alpha"] = res.model.alpha
    report["frame"] = res.frame.to_dict()
    report["audit_grid"] = cfg.audit_grid
    report["audit_violations"] = res.audit_violations
    report["audit_violation_fraction"] = res.audit_violations / cfg.audit_grid ** res.model.dimension
    report["oracle"] = cfg.oracle
    serialize.dump(report, out / "report.json")
    rows = res.report.rows()
    rows += [(f"K{i + 1}", k) for i, k in enumerate(res.model.K)]
    rows += [("audit_violations", res.audit_violations)]
    write_metric_csv(out / "report.csv", rows)
    _write_config(cfg, out)
    log.info("normalized L2 error %.4g", res.report.l2_normalized)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="latlip",
        description="Approximate almost diagonal Lipschitz maps by lattice Lipschitz extensions",
    )
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", type=Path, help="INI run configuration (defaults otherwise)")
        p.add_argument("--seed", type=int, help="override the configured RNG seed")
        p.add_argument("--out", type=Path, required=True, help="output directory")

    p = sub.add_parser("eigensearch", help="Monte Carlo search for approximate eigenvectors")
    common(p)
    p.set_defaults(func=cmd_eigensearch)

    p = sub.add_parser("fit", help="choose a basis and fit the extension model")
    common(p)
    p.add_argument("--cloud", type=Path, help="cloud CSV (default OUT/cloud.csv)")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("evaluate", help="evaluate a fitted model on points or a grid")
    common(p)
    p.add_argument("--model", type=Path, help="model JSON (default OUT/model.json)")
    p.add_argument("--points", type=Path, help="CSV with x1..xn columns")
    p.add_argument("--grid", type=int, help="grid nodes per axis (overrides config)")
    p.add_argument("--output", default="grid.csv", help="output file name inside OUT")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("benchmark", help="full pipeline plus error report")
    common(p)
    p.set_defaults(func=cmd_benchmark)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    if args.seed is not None and not 0 <= args.seed < 2**64:
        print("error: --seed must be an unsigned 64-bit integer", file=sys.stderr)
        return EXIT_CONFIG
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ValueError as exc:
        # invalid inputs that are not config syntax: dependent basis vectors, bad CSV
        print(f"invalid input: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
