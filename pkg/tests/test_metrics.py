import json

import numpy as np
import pytest

from latlip.basisframe import identity_frame, user_basis
from latlip.eigensearch import EigenCloud, SearchConfig, run_search, select_best, seed_uniform
from latlip.extension import ExtensionModel, build_model
from latlip.metrics import (
    audit_points,
    bound_audit,
    cloud_quality,
    grid,
    mc_l2_error,
    ray_angles,
    write_metric_csv,
)
from latlip.operator import identity_operator

BOX5 = [[-5, 5], [-5, 5]]


def G_model(G, n=1001):
    # lattice coordinates of the box reach |a| = 10 along (1, 0)
    t = np.linspace(-10, 10, n)
    P = np.vstack([np.outer(t, [1, 0]), np.outer(t, [1, 1])])
    return build_model(G, user_basis([[1, 0], [1, 1]]), P, 0.0, K=[1.0, 1.0])


def test_oracle_is_zero(f5):
    rep = mc_l2_error(f5, f5.evaluate, BOX5, 1000, 0)
    assert rep.l2_normalized == 0.0
    assert rep.l2_per_volume == 0.0
    assert rep.std_error == 0.0
    assert rep.max_pointwise == [0.0, 0.0]


def test_exact_model_small_error(G):
    model = G_model(G)
    rep = mc_l2_error(G, model, BOX5, 5000, 1)
    h = 20 / 1000
    # midpoint error is at most 2K times half the sample spacing
    assert rep.bound_violations == 0
    assert max(rep.max_pointwise) <= 2 * 1.0 * h / 2 + 1e-12
    assert rep.l2_normalized < 0.05
    assert rep.box_volume == 100.0
    assert rep.l2_per_volume == pytest.approx(rep.l2_normalized / 10.0, rel=1e-12)


def test_normalizations_match_definition(G):
    approx = lambda X: np.zeros_like(X)
    rep = mc_l2_error(G, approx, BOX5, 4000, 3)
    rng = np.random.default_rng(np.random.SeedSequence(3, spawn_key=(2,)))
    X = -5 + 10 * rng.random((4000, 2))
    sq = np.sum(G(X) ** 2, axis=1)
    assert rep.l2_normalized == pytest.approx(np.sqrt(sq.mean()), rel=1e-12)
    assert rep.l2_per_volume == pytest.approx(np.sqrt(100 * sq.mean()) / 100, rel=1e-12)


def test_deterministic(G):
    model = G_model(G, 201)
    a = mc_l2_error(G, model, BOX5, 2000, 9)
    b = mc_l2_error(G, model, BOX5, 2000, 9)
    assert a.to_dict() == b.to_dict()
    assert mc_l2_error(G, model, BOX5, 2000, 10).l2_normalized != a.l2_normalized


def test_doubling_consistency(f5):
    approx = lambda X: 0.9 * f5(X)
    ok = 0
    trials = 40
    for seed in range(trials):
        a = mc_l2_error(f5, approx, BOX5, 2000, seed)
        b = mc_l2_error(f5, approx, BOX5, 4000, seed + 1000)
        se = np.hypot(a.std_error, b.std_error)
        ok += abs(a.l2_normalized - b.l2_normalized) < 3 * se
    assert ok / trials >= 0.95


def test_mc_points_checked(f5):
    with pytest.raises(ValueError):
        mc_l2_error(f5, f5.evaluate, BOX5, 0, 0)


def test_bound_audit_exact_model(G):
    assert bound_audit(G, G_model(G, 201), BOX5, 41) == 0


def test_bound_audit_toy():
    T = identity_operator(1, box=[[0.0, 1.0]])
    model = ExtensionModel(identity_frame(1), [[0.0], [1.0]], [[0.0], [1.0]], [1.0], 0.0)
    assert bound_audit(T, model, T.domain_box, 101) == 0


def test_audit_counts_violations(S):
    frame = user_basis([[1, 1], [1, -1]])
    t = np.linspace(-1, 1, 201)
    P = np.vstack([np.outer(t, [1, 1]), np.outer(t, [1, -1])])
    model = build_model(S, frame, P, 0.0, K=[0.5, 0.5], check=False)
    assert audit_points(S, model, grid(S.domain_box, 21)) > 0


def test_grid():
    g = grid([[0, 1], [-1, 1]], 3)
    assert g.shape == (9, 2)
    np.testing.assert_array_equal(g[0], [0, -1])
    np.testing.assert_array_equal(g[-1], [1, 1])


def test_ray_angles():
    P = np.array([[2.0, 0.0], [-1.0, -1.0], [0.0, 0.0], [0.0, 1.0]])
    ang = ray_angles(P, [[1, 0], [1, 1]])
    np.testing.assert_allclose(ang, [0, 0, 0, np.pi / 4], atol=1e-15)


def test_cloud_quality_on_rays(S):
    pts = np.array([[0.5, 0.0], [0.2, 0.2], [-0.3, 0.3]])
    cloud = EigenCloud(pts, np.zeros(3), np.zeros(3), SearchConfig(N=3, N0=3), S.domain_box)
    q = cloud_quality(cloud, S.known_eigenrays)
    assert q["angle"]["max"] == pytest.approx(0.0, abs=1e-15)
    assert "angle" not in cloud_quality(cloud)
    assert q["count"] == 3


def test_cloud_quality_R0(R0):
    cfg = SearchConfig(N=500, N0=100, steps=10)
    sel = select_best(seed_uniform(R0, cfg), cfg.N0)
    final = run_search(R0, cfg)
    assert cloud_quality(final)["median_epsilon"] < cloud_quality(sel)["median_epsilon"]


def test_report_export(tmp_path, G):
    rep = mc_l2_error(G, G_model(G, 101), BOX5, 500, 0)
    rep.save_json(tmp_path / "r.json")
    data = json.loads((tmp_path / "r.json").read_text())
    assert data["mc_points"] == 500 and data["rng_seed"] == 0
    write_metric_csv(tmp_path / "r.csv", rep.rows())
    lines = (tmp_path / "r.csv").read_text().splitlines()
    assert lines[0] == "metric,value"
    assert any(line.startswith("l2_normalized,") for line in lines)
