import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rparallel.distfield import DomainError, GridSpec, build_distance_field
from rparallel.geometry import GeometryError, Plane, Sphere, Window, measure_totals
from rparallel.measures import (
    MEASURE_COLUMNS,
    PAIRS,
    MeasurePair,
    RadiusGrid,
    classify_simplices,
    measure_table,
    mu,
    mu_curve,
    mu_curves,
    n_curves,
    normalization,
    nu,
    nu_curves,
    vertex_distances,
)
from rparallel.oracle import TangentBallScene, analytic_mu
from rparallel.synth import blob, box, disk, icosphere

PLANE3 = Plane([0.0, 0.0, 1.0], 0.0)
PLANE2 = Plane([0.0, 1.0], 0.0)


@pytest.fixture(scope="module")
def tangent3():
    X = icosphere(100.0, 4).translate([0.0, 0.0, 100.0])
    spec = GridSpec.covering([-102, -102, -2], [102, 102, 202], 2.0)
    return X, build_distance_field(PLANE3, spec)


@pytest.fixture(scope="module")
def tangent2():
    X = disk(100.0, 256).translate([0.0, 100.0])
    spec = GridSpec.covering([-102, -2], [102, 202], 2.0)
    return X, build_distance_field(PLANE2, spec)


def test_pair_parsing():
    assert MeasurePair.parse("01") == MeasurePair(0, 1)
    assert MeasurePair.parse((1, 1)) == MeasurePair(1, 1)
    assert [p.label for p in PAIRS] == ["00", "01", "10", "11"]
    for bad in ("02", "1", "abc"):
        with pytest.raises(ValueError):
            MeasurePair.parse(bad)
    with pytest.raises(ValueError):
        MeasurePair(2, 0)


def test_radius_grid():
    g = RadiusGrid.uniform(400, 100)
    assert len(g) == 100 and g.radii[0] == 4.0 and g.r_max == 400.0
    for bad in ([1.0, 1.0], [2.0, 1.0], [-1.0], []):
        with pytest.raises(ValueError):
            RadiusGrid(bad)


def test_classify_contained(tangent3):
    X, f = tangent3
    part = classify_simplices(X, f, 0.0, values=np.zeros(len(X.vertices)))
    assert len(part.inside) == len(X.interior) and len(part.crossing) == 0


def test_classify_below_min(tangent3):
    X, f = tangent3
    part = classify_simplices(X, f, 0.0, values=vertex_distances(X, f) + 1.0)
    assert len(part.outside) == len(X.interior)


def test_classify_matches_vertex_rule(tangent3):
    X, f = tangent3
    part = classify_simplices(X, f, 100.0)
    v = vertex_distances(X, f)[X.interior]
    assert len(part.crossing) > 0
    assert set(part.inside) == set(np.nonzero(v.max(axis=1) <= 100.0)[0])
    assert set(part.outside) == set(np.nonzero(v.min(axis=1) > 100.0)[0])
    assert set(part.crossing) == set(np.nonzero((v.min(axis=1) <= 100.0) & (v.max(axis=1) > 100.0))[0])


@pytest.mark.parametrize(
    "pair,expected",
    [("00", 654498.5), ("01", 23561.9), ("10", 31415.9), ("11", 544.14)],
)
def test_tangent_sphere_r50(tangent3, pair, expected, backend):
    X, f = tangent3
    assert analytic_mu(TangentBallScene(3, 100.0), 50.0, pair) == pytest.approx(expected, abs=0.05)
    assert mu(X, f, 50.0, pair, backend=backend) == pytest.approx(expected, rel=0.02)


def test_tangent_sphere_plateau(tangent3):
    X, f = tangent3
    vol, area = measure_totals(X)
    c = mu_curves(X, f, [250.0])
    assert c[MeasurePair(0, 0)].values[0] == pytest.approx(vol, rel=1e-9)
    assert c[MeasurePair(1, 0)].values[0] == pytest.approx(area, rel=1e-9)
    assert c[MeasurePair(0, 1)].values[0] == 0.0
    assert c[MeasurePair(1, 1)].values[0] == 0.0
    assert vol == pytest.approx(4 * math.pi * 100**3 / 3, rel=0.01)


def test_disjoint_at_r0_is_zero():
    X = icosphere(10.0, 2).translate([0.0, 0.0, 30.0])
    f = build_distance_field(PLANE3, GridSpec.covering([-12, -12, 18], [12, 12, 42], 1.0))
    for p in PAIRS:
        assert mu(X, f, 0.0, p) == 0.0


@pytest.mark.parametrize("pair,expected", [("00", 6141.8), ("01", 173.2), ("10", 209.4), ("11", 2.0)])
def test_tangent_disk_r50(tangent2, pair, expected, backend):
    X, f = tangent2
    assert analytic_mu(TangentBallScene(2, 100.0), 50.0, pair) == pytest.approx(expected, abs=0.05)
    assert mu(X, f, 50.0, pair, backend=backend) == pytest.approx(expected, rel=0.01)


def test_plane_normalization_slab():
    W = Window([-250, -250, 0], [250, 250, 500])
    f = build_distance_field(PLANE3, GridSpec.aligned(W, 10.0))
    assert normalization(f, W, 200.0, 0) == pytest.approx(5.0e7, rel=1e-12)
    assert normalization(f, W, 200.0, 1) == pytest.approx(2.5e5, rel=1e-12)
    assert normalization(f, W, 0.0, 0) == 0.0


def test_sphere_normalization():
    W = Window([-200] * 3, [200] * 3)
    f = build_distance_field(Sphere([0, 0, 0], 100.0), GridSpec.aligned(W, 4.0))
    assert normalization(f, W, 50.0, 0) == pytest.approx(4 * math.pi * 150**3 / 3, rel=0.01)
    assert normalization(f, W, 50.0, 1) == pytest.approx(4 * math.pi * 150**2, rel=0.01)


def test_normalization_off_lattice_window():
    W = Window([-250, -250, 0], [250, 250, 500])
    f = build_distance_field(PLANE3, GridSpec.covering([-263, -261, -7], [259, 262, 511], 9.0))
    assert normalization(f, W, 200.0, 0) == pytest.approx(5.0e7, rel=1e-9)


def test_window_outside_grid():
    f = build_distance_field(PLANE3, GridSpec.covering([0, 0, 0], [10, 10, 10], 1.0))
    with pytest.raises(GeometryError):
        normalization(f, Window([0, 0, 0], [20, 20, 20]), 1.0, 0)


def test_nu_uniform_density_limit():
    W = Window([-250, -250, 0], [250, 250, 500])
    f = build_distance_field(PLANE3, GridSpec.aligned(W, 10.0))
    r = 120.0
    X = box([-250, -250, 0], [250, 250, r])
    assert nu(X, f, r, "00", W) == pytest.approx(1.0, rel=1e-12)


def test_nu_sentinel_at_zero_normalization():
    W = Window([-250, -250, 0], [250, 250, 500])
    f = build_distance_field(PLANE3, GridSpec.aligned(W, 10.0))
    X = icosphere(100.0, 2).translate([0, 0, 100.0])
    assert math.isnan(nu(X, f, 0.0, "00", W))


def test_nu_slab_normalization_relation():
    W = Window([-250, -250, 0], [250, 250, 500])
    f = build_distance_field(PLANE3, GridSpec.aligned(W, 5.0))
    X = icosphere(100.0, 3).translate([0, 0, 200.0])
    r = np.array([120.0, 200.0, 300.0])
    mus = mu_curves(X, f, r)
    nus = nu_curves(X, f, W, r)
    np.testing.assert_allclose(nus[MeasurePair(0, 0)].values, mus[MeasurePair(0, 0)].values / (2.5e5 * r), rtol=1e-12)
    np.testing.assert_allclose(nus[MeasurePair(1, 1)].values, mus[MeasurePair(1, 1)].values / 2.5e5, rtol=1e-12)


def test_curve_batching_identity(tangent3, backend):
    X, f = tangent3
    radii = RadiusGrid.uniform(400, 25)
    curves = mu_curves(X, f, radii, backend=backend)
    for p, c in curves.items():
        for j in (0, 7, 24):
            assert mu(X, f, float(radii.radii[j]), p, backend=backend) == c.values[j]
    one = mu_curve(X, f, [50.0], "00", backend=backend)
    assert len(one) == 1 and one.values[0] == mu(X, f, 50.0, "00", backend=backend)


def test_backend_parity(tangent3):
    X, f = tangent3
    r = RadiusGrid.uniform(400, 40)
    a = mu_curves(X, f, r, backend="numpy")
    b = mu_curves(X, f, r, backend="numba")
    for p in PAIRS:
        np.testing.assert_allclose(a[p].values, b[p].values, rtol=1e-10, atol=1e-8)


def test_monotone_and_plateau(tangent3):
    X, f = tangent3
    r = np.linspace(0, 400, 100)
    c = mu_curves(X, f, r)
    for p in (MeasurePair(0, 0), MeasurePair(1, 0)):
        assert np.all(np.diff(c[p].values) >= -1e-9)
    vol = measure_totals(X)[0]
    np.testing.assert_allclose(c[MeasurePair(0, 0)].values[r > 200], vol, rtol=1e-9)


def test_eps0_needs_interior():
    X = icosphere(10.0, 1, interior=False).translate([0, 0, 20.0])
    f = build_distance_field(PLANE3, GridSpec.covering([-12, -12, 8], [12, 12, 32], 1.0))
    with pytest.raises(GeometryError):
        mu(X, f, 5.0, "00")
    assert mu(X, f, 50.0, "10") > 0


def test_vertex_outside_grid():
    X = icosphere(10.0, 1).translate([0, 0, 20.0])
    f = build_distance_field(PLANE3, GridSpec.covering([-5, -5, 8], [5, 5, 32], 1.0))
    with pytest.raises(DomainError):
        mu(X, f, 5.0, "00")


def test_negative_radius():
    X = icosphere(10.0, 1)
    f = build_distance_field(PLANE3, GridSpec.covering([-12] * 3, [12] * 3, 1.0))
    with pytest.raises(ValueError):
        mu(X, f, -1.0, "00")


def test_exact_vertex_mode_converges(tangent3):
    X, f = tangent3
    exact = vertex_distances(X, f, reference=PLANE3)
    np.testing.assert_allclose(exact, vertex_distances(X, f), atol=1e-9)


def test_translation_equivariance():
    X = blob(np.random.default_rng(3), 40.0, 2)
    S = Sphere([0.0, 0.0, -90.0], 30.0)
    spec = GridSpec.covering([-70, -70, -130], [70, 70, 70], 2.5)
    r = np.linspace(5, 150, 12)
    base = mu_curves(X, build_distance_field(S, spec), r)
    v = np.array([1234.5, -987.25, 31.0])
    moved = mu_curves(X.translate(v), build_distance_field(S.translate(v), spec.translate(v)), r)
    for p in PAIRS:
        np.testing.assert_allclose(moved[p].values, base[p].values, rtol=1e-9, atol=1e-9 * np.abs(base[p].values).max())


@pytest.mark.parametrize("s", [0.5, 3.0])
def test_scaling_law(s):
    X = blob(np.random.default_rng(4), 40.0, 2)
    S = Sphere([0.0, 0.0, -90.0], 30.0)
    spec = GridSpec.covering([-70, -70, -130], [70, 70, 70], 2.5)
    r = np.linspace(5, 150, 12)
    base = mu_curves(X, build_distance_field(S, spec), r)
    spec_s = GridSpec(spec.origin * s, spec.spacing * s, spec.counts)
    scaled = mu_curves(X.scale(s), build_distance_field(S.scale(s), spec_s), r * s)
    for p in PAIRS:
        k = 3 - p.eps - p.eps_prime
        np.testing.assert_allclose(scaled[p].values, base[p].values * s**k, rtol=1e-9, atol=1e-9 * s**k * np.abs(base[p].values).max())


@settings(max_examples=8, deadline=None)
@given(st.integers(0, 2**31 - 1))
def test_monotone_on_random_blobs(seed):
    rng = np.random.default_rng(seed)
    X = blob(rng, 30.0, 2)
    S = Sphere(rng.uniform(-60, 60, 3), 10.0)
    spec = GridSpec.covering(np.minimum(X.bounds()[0], S.center - 10) - 1, np.maximum(X.bounds()[1], S.center + 10) + 1, 3.0)
    f = build_distance_field(S, spec)
    r = np.linspace(0, 250, 40)
    c = mu_curves(X, f, r, ["00", "10"])
    vol, area = measure_totals(X)
    for p, total in ((MeasurePair(0, 0), vol), (MeasurePair(1, 0), area)):
        v = c[p].values
        assert np.all(np.diff(v) >= -1e-9)
        assert np.all(v >= 0) and v[-1] == pytest.approx(total, rel=1e-9)


def test_measure_table_columns(tangent3):
    X, f = tangent3
    W = Window([-100, -100, 0], [100, 100, 200])
    t = measure_table(X, f, [50.0, 100.0], W, pairs=["00", "11"])
    assert tuple(t) == MEASURE_COLUMNS
    assert np.all(np.isnan(t["mu01"])) and np.all(np.isnan(t["nu10"]))
    assert t["N1"][0] == pytest.approx(200.0**2, rel=1e-12)
    no_w = measure_table(X, f, [50.0], None)
    assert np.isnan(no_w["N0"][0]) and not np.isnan(no_w["mu10"][0])


def test_n_curves_both_dims():
    W = Window([-50, 0], [50, 100])
    f = build_distance_field(PLANE2, GridSpec.aligned(W, 5.0))
    n = n_curves(f, W, [10.0, 40.0])
    np.testing.assert_allclose(n[0].values, [1000.0, 4000.0], rtol=1e-12)
    np.testing.assert_allclose(n[1].values, [100.0, 100.0], rtol=1e-12)


def test_refinement_preserves_total_measure():
    X = blob(np.random.default_rng(9), 50.0, 2)
    S = Sphere([0.0, 0.0, -120.0], 40.0)
    v = S.distance(X.vertices)
    from rparallel.geometry import simplex_measures
    from rparallel.measures import refine_simplices

    P, T, vv = refine_simplices(X.vertices, X.interior, v, S.distance, 0.01, 1.0)
    assert len(T) > len(X.interior)
    assert simplex_measures(P, T).sum() == pytest.approx(simplex_measures(X.vertices, X.interior).sum(), rel=1e-12)
    np.testing.assert_array_equal(vv, S.distance(P))
    P, T, _ = refine_simplices(X.vertices, X.boundary, v, S.distance, 0.01, 1.0)
    assert simplex_measures(P, T).sum() == pytest.approx(simplex_measures(X.vertices, X.boundary).sum(), rel=1e-12)


def test_affine_field_is_not_refined():
    from rparallel.measures import refine_simplices

    X = icosphere(50.0, 2).translate([0, 0, 60.0])
    v = PLANE3.distance(X.vertices)
    _, T, _ = refine_simplices(X.vertices, X.interior, v, PLANE3.distance, 1e-9, 0.1)
    assert np.array_equal(T, X.interior)


def test_refinement_tracks_curved_reference():
    # observed ball of radius 100 at distance 250 from a solid ball of radius 100:
    # mu00 is the lens volume of radii 100 and 100 + r at center distance 250
    def lens(R1, R2, d):
        return math.pi * (R1 + R2 - d) ** 2 * (d * d + 2 * d * (R1 + R2) - 3 * (R1 - R2) ** 2) / (12 * d)

    S = Sphere([0.0, 0.0, 0.0], 100.0)
    X = icosphere(100.0, 4).translate([250.0, 0.0, 0.0])
    lo, hi = X.bounds()
    f = build_distance_field(S, GridSpec.covering(lo - 4, hi + 4, 4.0))
    r = np.array([100.0, 150.0, 200.0])
    got = mu_curves(X, f, r, ["00"])[MeasurePair(0, 0)].values
    coarse = mu_curves(X, f, r, ["00"], refine=False)[MeasurePair(0, 0)].values
    want = np.array([lens(100, 100 + x, 250) for x in r])
    assert np.max(np.abs(got / want - 1)) < 0.01
    # without refinement the long cone tetrahedra badly underestimate
    assert np.max(np.abs(coarse / want - 1)) > 0.03
