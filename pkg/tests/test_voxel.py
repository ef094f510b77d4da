import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from surfret import errors
from surfret.mesh import SurfaceMesh
from surfret.sampling import sample_points
from surfret.synthetic import blob, icosphere, random_rotation
from surfret.voxel import (VoxelGrid, _cells_inside, grid_volume, rotate_grid_axis90,
                           voxelize_solid, voxelize_surface)


def occupied_world_cells(grid):
    """Set of global lattice indices of occupied cells."""
    base = np.round(grid.origin / grid.spacing).astype(int)
    return {tuple(c) for c in np.argwhere(grid.occupancy) + base}


def test_triangle_inside_one_cell():
    m = SurfaceMesh([[3.2, 5.1, 7.3], [3.8, 5.2, 7.4], [3.4, 5.9, 7.6]], [[0, 1, 2]])
    g = voxelize_surface(m)
    assert g.count == 1
    assert occupied_world_cells(g) == {(3, 5, 7)}


def test_unit_square_plate():
    m = SurfaceMesh([[0, 0, 0.5], [1, 0, 0.5], [1, 1, 0.5], [0, 1, 0.5]], [[0, 1, 2], [0, 2, 3]])
    g = voxelize_surface(m)
    # closed cells [i, i+1] touching [0, 1] in x and y; the plane z = 0.5 sits in k = 0
    expect = {(i, j, 0) for i in (-1, 0, 1) for j in (-1, 0, 1)}
    assert occupied_world_cells(g) == expect


def test_padding_and_bounds():
    m = icosphere(2, 5.0)
    g = voxelize_surface(m)
    lo, hi = g.origin, g.origin + np.array(g.dims) * g.spacing
    assert np.all(lo <= m.vertices.min(axis=0) - 2) and np.all(hi >= m.vertices.max(axis=0) + 2)


def test_sphere_shell_matches_point_sampled_oracle():
    m = icosphere(5, 20.0)
    g = voxelize_surface(m)
    pts = sample_points(m, 400_000).positions
    touched = {tuple(c) for c in np.floor(pts).astype(int)}
    assert touched <= occupied_world_cells(g)          # conservative
    assert abs(g.count - len(touched)) <= 0.10 * len(touched)
    # a surface of area A crosses about 1.5 A / s^2 unit cells on average
    assert abs(g.count - 1.5 * 4 * np.pi * 20 ** 2) <= 0.10 * g.count


def test_every_vertex_in_an_occupied_cell():
    m = blob(np.random.default_rng(0), radius=10, subdivisions=3)
    g = voxelize_surface(m, spacing=0.7)
    idx = np.floor((m.vertices - g.origin) / g.spacing).astype(int)
    assert g.occupancy[tuple(idx.T)].all()


@settings(max_examples=20, deadline=None)
@given(st.tuples(*[st.integers(-6, 6)] * 3), st.sampled_from([0.5, 1.0, 2.0]))
def test_translation_snapping(shift, spacing):
    m = blob(np.random.default_rng(1), radius=8, subdivisions=3)
    g0 = voxelize_surface(m, spacing)
    g1 = voxelize_surface(m.transformed(translation=np.array(shift) * spacing), spacing)
    assert np.array_equal(g0.occupancy, g1.occupancy)
    np.testing.assert_allclose(g1.origin - g0.origin, np.array(shift) * spacing, atol=1e-9)


def test_empty_mesh():
    with pytest.raises(errors.EmptyMesh):
        voxelize_surface(SurfaceMesh(np.zeros((3, 3)), np.empty((0, 3))))


def test_grid_volume_examples():
    one = np.zeros((3, 3, 3), bool)
    one[1, 1, 1] = True
    assert grid_volume(VoxelGrid([0, 0, 0], 1.0, one)) == 1.0
    ten = np.zeros((4, 4, 4), bool)
    ten.flat[:10] = True
    assert grid_volume(VoxelGrid([0, 0, 0], 2.0, ten)) == 80.0
    assert grid_volume(VoxelGrid([0, 0, 0], 1.0, np.zeros((2, 2, 2), bool))) == 0.0


def _random_grid(rng, shape=(5, 7, 9)):
    return VoxelGrid(rng.normal(size=3), 1.0, rng.random(shape) < 0.3)


def test_rotation_identity_and_group_law():
    rng = np.random.default_rng(2)
    g = _random_grid(rng)
    for axis in "xyz":
        assert rotate_grid_axis90(g, axis, 0) == g
        h = g
        for _ in range(4):
            h = rotate_grid_axis90(h, axis, 1)
            assert h.count == g.count
        assert np.array_equal(h.occupancy, g.occupancy)
        np.testing.assert_allclose(h.origin, g.origin, atol=1e-12)


def test_single_voxel_z_turn():
    occ = np.zeros((4, 6, 5), bool)
    occ[1, 2, 3] = True
    g = rotate_grid_axis90(VoxelGrid([0, 0, 0], 1.0, occ), "z", 1)
    assert g.dims == (6, 4, 5)
    assert np.argwhere(g.occupancy).tolist() == [[6 - 1 - 2, 1, 3]]


@pytest.mark.parametrize("axis,rot", [("x", [[1, 0, 0], [0, 0, -1], [0, 1, 0]]),
                                      ("y", [[0, 0, 1], [0, 1, 0], [-1, 0, 0]]),
                                      ("z", [[0, -1, 0], [1, 0, 0], [0, 0, 1]])])
def test_quarter_turn_is_counter_clockwise_about_box_center(axis, rot):
    rng = np.random.default_rng(3)
    g = _random_grid(rng)
    h = rotate_grid_axis90(g, axis, 1)
    center = g.origin + np.array(g.dims) * g.spacing / 2
    moved = (g.centers() - center) @ np.array(rot, float).T + center
    order = np.lexsort(moved.T[::-1])
    np.testing.assert_allclose(moved[order], h.centers(), atol=1e-9)


def test_inside_test_matches_analytic_sphere():
    r = 12.3
    m = icosphere(5, r)
    g = voxelize_surface(m)
    idx = np.argwhere(np.ones(g.dims, bool))
    c = g.origin + (idx + 0.5) * g.spacing
    d = np.linalg.norm(c, axis=1)
    inside = _cells_inside(m, g, idx)
    sure = np.abs(d - r) > 0.05                 # skip centers within the facet sag
    assert np.array_equal(inside[sure], d[sure] < r)


def test_solid_volume_of_sphere():
    g = voxelize_solid(icosphere(5, 20.0))
    assert grid_volume(g) == pytest.approx(4 / 3 * np.pi * 20 ** 3, rel=0.01)


def test_solid_of_open_surface_is_its_shell():
    m = SurfaceMesh([[0, 0, 0], [5, 0, 0], [0, 5, 0]], [[0, 1, 2]])
    assert voxelize_solid(m) == voxelize_surface(m)


def test_solid_is_rigid_translation_snapped():
    m = blob(np.random.default_rng(4), radius=9, subdivisions=3)
    a = voxelize_solid(m)
    b = voxelize_solid(m.transformed(translation=[2, -3, 5]))
    assert np.array_equal(a.occupancy, b.occupancy)
