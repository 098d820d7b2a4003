import math

import numpy as np
import pytest

from deployopt.errors import InvalidD0, InvalidParams, MetricGeometryMismatch, ValidationError
from deployopt.metrics import (
    DistanceMatrix,
    apply_hotspot,
    augment_with_phantom,
    build_matrix,
    hotspot_transform,
    matrix_from_csv,
)
from deployopt.scenario import scenario_from_dict


def dm(values, d_max=100.0):
    return DistanceMatrix(np.asarray(values, dtype=float), d_max=d_max, metric_tag="test")


def simple_scenario(**overrides):
    doc = {
        "bounds": {"xmin": 0, "ymin": 0, "xmax": 10, "ymax": 10},
        "obstacles": [],
        "targets": [[3, 4]],
        "candidates": [[0, 0], [5, 5], [9, 9]],
        "K": 1,
    }
    doc.update(overrides)
    return scenario_from_dict(doc)


def test_hotspot_transform_examples():
    assert hotspot_transform(0.0, 1.0, 2.0) == 0.0
    assert hotspot_transform(math.e - 1.0, 5.0, 3.0) == pytest.approx(1.0)
    assert hotspot_transform(5.001, 5.0, 3.0) == 3.0  # beyond the threshold: the cap


def test_hotspot_transform_invalid_params():
    with pytest.raises(InvalidParams):
        hotspot_transform(1.0, 0.0, 2.0)
    with pytest.raises(InvalidParams):
        hotspot_transform(1.0, 10.0, 0.5)  # cap below log(1+ell) breaks monotonicity
    with pytest.raises(InvalidParams):
        hotspot_transform(-1.0, 1.0, 2.0)


def test_hotspot_transform_monotone_and_concave():
    ell, cap = 7.0, math.log1p(50.0)
    ds = np.linspace(0.0, 12.0, 400)
    vals = [hotspot_transform(float(d), ell, cap) for d in ds]
    assert all(b >= a - 1e-12 for a, b in zip(vals, vals[1:]))
    inside = [v for d, v in zip(ds, vals) if d <= ell]
    second = np.diff(inside, 2)
    assert (second <= 1e-9).all()


def test_apply_hotspot_zero_and_saturated():
    z = apply_hotspot(dm(np.zeros((2, 3))), 1.0, 2.0)
    assert np.array_equal(z.values, np.zeros((2, 3)))
    sat = apply_hotspot(dm([[5.0, 9.0], [7.0, 6.0]]), 1.0, 2.0)
    assert np.array_equal(sat.values, np.full((2, 2), 2.0))
    assert sat.d_max == 2.0


def test_apply_hotspot_elementwise_monotone():
    rng = np.random.default_rng(8)
    for _ in range(20):
        a = rng.uniform(0, 20, size=(4, 5))
        b = a + rng.uniform(0, 5, size=(4, 5))
        ha = apply_hotspot(dm(a), 6.0, math.log1p(30.0))
        hb = apply_hotspot(dm(b), 6.0, math.log1p(30.0))
        assert (ha.values <= hb.values + 1e-12).all()


def test_apply_hotspot_preserves_shape_and_ids():
    m = DistanceMatrix(np.ones((2, 3)), d_max=10.0, metric_tag="t", site_ids=(4, 7), target_ids=(1, 2, 3))
    h = apply_hotspot(m, 5.0, 3.0)
    assert h.values.shape == (2, 3)
    assert h.site_ids == (4, 7)
    assert h.target_ids == (1, 2, 3)


def test_augment_default_d0_is_matrix_max():
    aug = augment_with_phantom(dm([[1.0, 12.0], [3.0, 2.0]]))
    assert aug.d0 == 12.0
    assert aug.phantom_index == 2
    assert np.array_equal(aug.row(2), np.full(2, 12.0))


def test_augment_rejects_small_d0():
    with pytest.raises(InvalidD0):
        augment_with_phantom(dm([[1.0, 12.0]]), d0=5.0)


def test_augment_does_not_alter_base():
    base = dm([[1.0, 2.0]])
    aug = augment_with_phantom(base, d0=99.0)
    assert np.array_equal(aug.base.values, [[1.0, 2.0]])
    assert aug.row(0)[1] == 2.0


def test_matrix_validation():
    with pytest.raises(ValidationError):
        DistanceMatrix(np.array([[-1.0]]), d_max=10.0, metric_tag="t")
    with pytest.raises(ValidationError):
        DistanceMatrix(np.array([[20.0]]), d_max=10.0, metric_tag="t")
    with pytest.raises(ValidationError):
        DistanceMatrix(np.array([[np.inf]]), d_max=np.inf, metric_tag="t")


def test_matrix_csv_round_trip():
    m = dm([[1.5, 2.25], [0.1, 7.0 / 3.0]])
    back = matrix_from_csv(m.to_csv(), d_max=m.d_max, metric_tag=m.metric_tag)
    assert np.array_equal(back.values, m.values)  # repr round-trips exactly
    with pytest.raises(ValidationError):
        matrix_from_csv("bad,header\n0,0,1\n", d_max=1.0, metric_tag="t")


def test_euclidean_metric():
    m = build_matrix(simple_scenario(), "euclidean", use_cache=False)
    assert m.values[0, 0] == pytest.approx(5.0)
    assert m.metric_tag == "euclidean"


def test_visgraph_empty_workspace_equals_euclidean():
    s = simple_scenario(targets=[[3, 4], [7, 1], [2, 9]])
    e = build_matrix(s, "euclidean", use_cache=False)
    v = build_matrix(s, "visgraph", use_cache=False)
    assert np.allclose(e.values, v.values, atol=1e-12)


def test_metric_geometry_mismatch():
    with pytest.raises(MetricGeometryMismatch):
        build_matrix(simple_scenario(), "rrtstar", use_cache=False)
    terrain = scenario_from_dict(
        {
            "terrain": {"origin": [0, 0], "cell_size": 1.0, "heights": [[0.0] * 6 for _ in range(6)]},
            "targets": [[1, 1]],
            "candidates": [[0, 0], [2, 2], [4, 4]],
            "K": 1,
            "rrt": {"samples": 50, "step": 1.0, "radius_const": 5.0, "seed": 0},
        }
    )
    with pytest.raises(MetricGeometryMismatch):
        build_matrix(terrain, "visgraph", use_cache=False)


def test_unknown_metric():
    with pytest.raises(InvalidParams):
        build_matrix(simple_scenario(), "geodesic", use_cache=False)


def test_cache_round_trip_and_hit(tmp_path):
    s = simple_scenario(targets=[[3, 4], [6, 6]])
    m1 = build_matrix(s, "visgraph", cache_dir=tmp_path)
    files = sorted(p.name for p in tmp_path.iterdir())
    assert len(files) == 2 and files[0].endswith(".csv") and files[1].endswith(".meta.json")

    # Poison the cached CSV; a cache hit must surface the poisoned value.
    csv_path = tmp_path / files[0]
    text = csv_path.read_text().replace(f"{float(m1.values[0, 0])!r}", "123.0")
    csv_path.write_text(text)
    m2 = build_matrix(s, "visgraph", cache_dir=tmp_path)
    assert m2.values[0, 0] == 123.0

    # Bypassing the cache recomputes the true value.
    m3 = build_matrix(s, "visgraph", cache_dir=tmp_path, use_cache=False)
    assert m3.values[0, 0] == m1.values[0, 0]


def test_cache_invalidates_on_seed_change(tmp_path):
    doc = {
        "terrain": {"origin": [0, 0], "cell_size": 1.0, "heights": [[0.0] * 12 for _ in range(12)]},
        "targets": [[1, 1], [9, 9]],
        "candidates": [[0, 0], [5, 5], [10, 10]],
        "K": 1,
        "rrt": {"samples": 120, "step": 1.0, "radius_const": 8.0, "seed": 1},
    }
    s = scenario_from_dict(doc)
    m1 = build_matrix(s, "rrtstar", cache_dir=tmp_path)
    m1_again = build_matrix(s, "rrtstar", cache_dir=tmp_path)
    assert np.array_equal(m1.values, m1_again.values)
    m2 = build_matrix(s, "rrtstar", cache_dir=tmp_path, seed=99)
    m2_fresh = build_matrix(s, "rrtstar", use_cache=False, seed=99)
    assert np.array_equal(m2.values, m2_fresh.values)


def test_rrtstar_unweighted_ignores_traversability():
    h = [[0.0] * 13 for _ in range(13)]
    for r in range(13):
        h[r][6] = 30.0  # steep wall column
    doc = {
        "terrain": {"origin": [0, 0], "cell_size": 1.0, "heights": h},
        "targets": [[11, 6]],
        "candidates": [[1, 6], [1, 1], [1, 11]],
        "K": 1,
        "terrain_params": {"s_crit": 0.5, "f_crit": 0.5, "zeta_crit": 1.0, "tau_max": 0.5},
        "rrt": {"samples": 500, "step": 1.5, "radius_const": 10.0, "seed": 3},
    }
    s = scenario_from_dict(doc)
    aware = build_matrix(s, "rrtstar", use_cache=False)
    oblivious = build_matrix(s, "rrtstar-unweighted", use_cache=False)
    assert aware.values[0, 0] == pytest.approx(aware.d_max)  # wall seals the route
    assert oblivious.values[0, 0] < 0.5 * oblivious.d_max  # straight over the wall
    assert oblivious.metric_tag.startswith("rrtstar_unweighted")