import numpy as np
import pytest

from rparallel.distfield import (
    DistanceField,
    DomainError,
    GridSpec,
    build_distance_field,
    default_spacing,
    dump_field,
    interpolate,
    lipschitz_violation,
    load_field,
    reference_distance,
)
from rparallel.geometry import GeometryError, Plane, SimplicialComplex, Sphere, Window
from rparallel.synth import disk, icosphere

from oracles import brute_distance, winding_number

PLANE = Plane([0.0, 0.0, 1.0], 0.0)


def test_plane_node_value():
    spec = GridSpec([0, 0, 0], [12.5] * 3, (2, 2, 4))
    f = build_distance_field(PLANE, spec)
    assert f.grid[0, 0, 3] == 37.5


def test_solid_sphere_values():
    S = Sphere([0, 0, 0], 100.0)
    spec = GridSpec([0, 0, 0], [50.0] * 3, (6, 2, 2))
    f = build_distance_field(S, spec)
    assert f.grid[5, 0, 0] == 150.0
    assert f.grid[1, 0, 0] == 0.0


def test_surface_mode_sphere():
    S = Sphere([0, 0, 0], 100.0)
    spec = GridSpec([0, 0, 0], [50.0] * 3, (2, 2, 2))
    assert build_distance_field(S, spec, solid=False).grid[1, 0, 0] == 50.0


def test_random_soup_distance_matches_brute_force(backend, rng):
    V = rng.normal(size=(600, 3)) * 40
    soup = SimplicialComplex(V, np.arange(600).reshape(200, 3))
    P = rng.normal(size=(20, 3)) * 60
    d = reference_distance(soup, P, solid=False, backend=backend)
    np.testing.assert_allclose(d, brute_distance(P, V[soup.boundary]), rtol=0, atol=1e-9)


def test_mesh_solid_clamp_matches_winding(backend, rng):
    S = icosphere(30.0, 2).translate([3.0, -2.0, 1.0])
    spec = GridSpec.covering([-40] * 3, [40] * 3, 5.0)
    f = build_distance_field(S, spec, backend=backend)
    nodes = spec.nodes()
    inside = winding_number(nodes, S.vertices, S.boundary) > 0.5
    assert np.all(f.values[inside] == 0)
    outside_d = brute_distance(nodes[~inside][::37], S.boundary_coords())
    np.testing.assert_allclose(f.values[~inside][::37], outside_d, atol=1e-9)


def test_mesh_field_backend_parity():
    S = icosphere(30.0, 2)
    spec = GridSpec.covering([-40] * 3, [40] * 3, 4.0)
    a = build_distance_field(S, spec, backend="numpy").values
    b = build_distance_field(S, spec, backend="numba").values
    np.testing.assert_allclose(a, b, rtol=0, atol=1e-10)


def test_2d_polygon_reference(backend):
    D = disk(20.0, 64)
    spec = GridSpec.covering([-30, -30], [30, 30], 2.0)
    f = build_distance_field(D, spec, backend=backend)
    nodes = spec.nodes()
    far = np.linalg.norm(nodes, axis=1) > 22
    np.testing.assert_allclose(f.values[far], brute_distance(nodes[far], D.boundary_coords()), atol=1e-9)
    assert np.all(f.values[np.linalg.norm(nodes, axis=1) < 19] == 0)


def test_union_of_references_is_min():
    a, b = Sphere([0, 0, 0], 5.0), Sphere([20, 0, 0], 3.0)
    pts = np.array([[10.0, 0, 0], [-10.0, 0, 0], [30.0, 0, 0]])
    assert reference_distance([a, b], pts).tolist() == [5.0, 5.0, 7.0]


def test_dimension_mismatch_and_empty():
    spec = GridSpec([0, 0], [1, 1], (3, 3))
    with pytest.raises(GeometryError):
        build_distance_field(PLANE, spec)
    with pytest.raises((GeometryError, ValueError)):
        build_distance_field([], GridSpec([0, 0, 0], [1] * 3, (2, 2, 2)))


def test_negative_values_rejected():
    with pytest.raises(GeometryError):
        DistanceField(GridSpec([0, 0], [1, 1], (2, 1)), [0.0, -1.0])


@pytest.fixture
def sphere_field():
    spec = GridSpec.covering([-60] * 3, [60] * 3, 4.0)
    return build_distance_field(Sphere([1.0, 2.0, -3.0], 25.0), spec)


def test_interpolate_on_node_is_identity(sphere_field, backend):
    nodes = sphere_field.spec.nodes()[::101]
    np.testing.assert_array_equal(interpolate(sphere_field, nodes, backend=backend), sphere_field.values[::101])


def test_interpolate_edge_midpoint_is_mean(sphere_field):
    g = sphere_field.grid
    spec = sphere_field.spec
    p = spec.origin + spec.spacing * np.array([7.5, 3, 11])
    assert interpolate(sphere_field, p) == pytest.approx(0.5 * (g[7, 3, 11] + g[8, 3, 11]), rel=1e-14)


def test_interpolate_single_point_returns_float(sphere_field):
    assert isinstance(interpolate(sphere_field, [0.0, 0.0, 0.0]), float)


def test_plane_affine_reproduction(backend, rng):
    spec = GridSpec.covering([-50, -50, -10], [50, 50, 90], 7.0)
    f = build_distance_field(PLANE, spec)
    p = rng.uniform([-50, -50, 0], [50, 50, 90], size=(100, 3))
    np.testing.assert_allclose(interpolate(f, p, backend=backend), p[:, 2], rtol=0, atol=1e-9)


def test_interpolate_refuses_to_extrapolate(sphere_field):
    with pytest.raises(DomainError):
        interpolate(sphere_field, [[0, 0, 0], [0, 0, 200.0]])


def _in_cell_excess(field, rng, n=5000):
    spec = field.spec
    base = spec.origin + spec.spacing * rng.integers(0, np.array(spec.counts) - 1, size=(n, 3))
    p = base + rng.uniform(0, 1, size=(n, 3)) * spec.spacing
    q = base + rng.uniform(0, 1, size=(n, 3)) * spec.spacing
    gap = np.abs(interpolate(field, p) - interpolate(field, q))
    return float((gap - np.linalg.norm(p - q, axis=1)).max())


def test_in_cell_lipschitz_affine_field(rng):
    f = build_distance_field(PLANE, GridSpec.covering([-20, -20, 0], [20, 20, 40], 3.0))
    assert _in_cell_excess(f, rng) <= 1e-9


def test_in_cell_lipschitz_curved_field_within_grid_error(rng):
    # secant slopes of a curved field combine to gradients slightly above 1; the excess is O(h^2 / R)
    S = Sphere([1.0, 2.0, -3.0], 25.0)
    ex = []
    for h in (4.0, 1.0):
        f = build_distance_field(S, GridSpec.covering([-60] * 3, [60] * 3, h))
        ex.append(_in_cell_excess(f, rng))
        assert ex[-1] <= h * h / S.radius
    assert ex[1] <= ex[0] / 8


def test_node_lipschitz(sphere_field):
    assert lipschitz_violation(sphere_field) <= 1e-9 * sphere_field.spec.spacing.min()


def test_refinement_convergence(rng):
    S = Sphere([0.3, -0.2, 0.1], 20.0)
    d = rng.normal(size=(400, 3))
    d /= np.linalg.norm(d, axis=1, keepdims=True)
    pts = S.center + d * rng.uniform(28, 45, size=(400, 1))
    exact = S.distance(pts)
    errs = []
    for h in (4.0, 2.0, 1.0):
        f = build_distance_field(S, GridSpec.covering([-50] * 3, [50] * 3, h))
        errs.append(np.abs(interpolate(f, pts) - exact).max())
    assert errs[0] / errs[1] >= 1.8 and errs[1] / errs[2] >= 1.8


def test_build_is_deterministic():
    S = icosphere(20.0, 2)
    spec = GridSpec.covering([-30] * 3, [30] * 3, 3.0)
    a = build_distance_field(S, spec).values
    b = build_distance_field(S, spec).values
    assert a.tobytes() == b.tobytes()


def test_dump_roundtrip(tmp_path, sphere_field):
    p = tmp_path / "f.bin"
    dump_field(sphere_field, p)
    g = load_field(p)
    assert g.spec == sphere_field.spec
    assert g.values.tobytes() == sphere_field.values.tobytes()
    assert p.read_bytes().startswith(b"rparallel-field dim=3 ")


def test_aligned_grid_hits_window_faces():
    W = Window([0.3, -1.0, 2.0], [10.0, 7.0, 5.5])
    spec = GridSpec.aligned(W, 0.7, lower=[-2, -3, 0], upper=[12, 7, 9])
    assert np.all(spec.spacing <= 0.7 + 1e-12)
    assert spec.covers([-2, -3, 0], [12, 7, 9])
    sl = spec.window_slice(W)
    assert sl is not None
    for a in range(3):
        ax = spec.axis(a)
        assert ax[sl[a].start] == pytest.approx(W.lower[a], abs=1e-9)
        assert ax[sl[a].stop - 1] == pytest.approx(W.upper[a], abs=1e-9)


def test_cropped_grid_stays_on_lattice():
    W = Window([0.0] * 3, [100.0] * 3)
    full = GridSpec.aligned(W, 3.0)
    crop = GridSpec.aligned(W, 3.0, [40.0] * 3, [55.0] * 3, crop=True)
    assert np.all(crop.origin <= 40.0) and np.all(crop.upper >= 55.0)
    k = (crop.origin - full.origin) / full.spacing
    np.testing.assert_allclose(k, np.rint(k), atol=1e-9)
    assert crop.size < full.size


def test_default_spacing():
    assert default_spacing(100.0) == 2.0
    with pytest.raises(GeometryError):
        default_spacing(0.0)
