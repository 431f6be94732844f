"""Element grids, tilings, sunflower lattices and subarray layouts."""

import json

import numpy as np
import pytest

from stpa import (
    ArrayGeometry,
    DominoTiling,
    ElementGrid,
    SubarrayLayout,
    beams_overlap,
    geometry_from_tiling,
    layout_from_geometry,
    load_geometry,
    make_uniform_grid,
    min_inter_subarray_tile_distance,
    random_perfect_tiling,
    save_geometry,
    sunflower_centers,
    sunflower_count_for_radius,
)


def test_grid_positions_are_row_major_lattice():
    grid = ElementGrid(3, 2, spacing=0.5)
    pos = grid.positions()
    assert pos.shape == (6, 2)
    assert np.array_equal(pos[0], [0.0, 0.0])
    assert np.array_equal(pos[grid.flat_index(2, 1)], [1.0, 0.5])
    # flat order walks columns first, then rows
    for i in range(3):
        for j in range(2):
            assert np.allclose(pos[grid.flat_index(i, j)], [0.5 * i, 0.5 * j])


def test_grid_validation():
    with pytest.raises(ValueError):
        ElementGrid(0, 4)
    with pytest.raises(ValueError):
        ElementGrid(4, 4, spacing=0.0)


def test_tiling_validation_rejects_bad_covers():
    grid = ElementGrid(2, 2)
    DominoTiling(grid, [(0, 1), (2, 3)])  # valid brick
    with pytest.raises(ValueError):
        DominoTiling(grid, [(0, 1), (1, 2)])  # element 1 covered twice
    with pytest.raises(ValueError):
        DominoTiling(grid, [(0, 1)])  # leaves a gap
    with pytest.raises(ValueError):
        DominoTiling(grid, [(0, 3), (1, 2)])  # diagonal pairs
    with pytest.raises(ValueError):
        DominoTiling(ElementGrid(3, 3), [(i, i + 1) for i in range(0, 8, 2)])


def test_phase_centers_are_tile_midpoints():
    grid = ElementGrid(2, 2)
    tiling = DominoTiling(grid, [(0, 2), (1, 3)])  # two vertical dominoes
    centers = tiling.phase_centers()
    assert np.allclose(centers, [[0.0, 0.25], [0.5, 0.25]])


def test_uniform_grid_geometry_has_singleton_tiles():
    geom = make_uniform_grid(4, 3)
    assert geom.n_elements == 12
    assert geom.n_tiles == 12
    assert all(len(t) == 1 for t in geom.tiles)
    assert np.allclose(geom.phase_centers, geom.elements)


def test_geometry_from_tiling_partition_check():
    tiling = random_perfect_tiling(ElementGrid(4, 4), seed=1)
    geom = geometry_from_tiling(tiling)
    assert geom.n_tiles == 8
    covered = sorted(i for t in geom.tiles for i in t)
    assert covered == list(range(16))
    with pytest.raises(ValueError):
        ArrayGeometry(geom.elements, geom.tiles[:-1])


def test_sunflower_radii_and_angles_follow_the_spiral_law():
    pts = sunflower_centers(pitch=2.0, count=50)
    m = np.arange(1, 51)
    assert np.allclose(np.hypot(pts[:, 0], pts[:, 1]), 2.0 * np.sqrt(m / np.pi))
    angles = np.arctan2(pts[:, 1], pts[:, 0])
    expected = np.angle(np.exp(1j * 2.0 * np.pi * m * 1.618))
    assert np.allclose(angles, expected)


def test_sunflower_count_inverts_the_radius_law():
    rng = np.random.default_rng(7)
    for _ in range(50):
        pitch = rng.uniform(0.5, 4.0)
        radius = rng.uniform(0.1, 20.0)
        count = sunflower_count_for_radius(pitch, radius)
        if count > 0:
            pts = sunflower_centers(pitch, count + 1)
            radii = np.hypot(pts[:, 0], pts[:, 1])
            assert radii[count - 1] <= radius + 1e-12
        assert pitch * np.sqrt((count + 1) / np.pi) > radius - 1e-12


def test_sunflower_center_shift_and_validation():
    base = sunflower_centers(1.5, 10)
    moved = sunflower_centers(1.5, 10, center=np.array([3.0, -2.0]))
    assert np.allclose(moved - base, [3.0, -2.0])
    with pytest.raises(ValueError):
        sunflower_centers(1.5, 0)
    with pytest.raises(ValueError):
        sunflower_centers(0.0, 5)


def test_beams_overlap_is_strict_inside_the_radius():
    assert beams_overlap((0.0, 0.0), (0.05, 0.0), 0.06)
    assert not beams_overlap((0.0, 0.0), (0.06, 0.0), 0.06)  # boundary: no
    assert not beams_overlap((0.3, 0.4), (-0.3, -0.4), 0.06)


def _two_subarray_layout():
    tile_offsets = [np.array([[0.0, 0.0], [0.5, 0.0]]), np.array([[0.0, 0.0]])]
    element_offsets = [
        np.array([[-0.25, 0.0], [0.25, 0.0], [0.25, 0.0], [0.75, 0.0]]),
        np.array([[-0.25, 0.0], [0.25, 0.0]]),
    ]
    centers = np.array([[0.0, 0.0], [3.0, 1.0]])
    return SubarrayLayout(centers, tile_offsets, element_offsets)


def test_layout_positions_and_rigid_shift():
    layout = _two_subarray_layout()
    assert layout.n_subarrays == 2
    assert layout.n_tiles == 3
    assert layout.n_elements == 6
    tiles = layout.tile_positions()
    assert np.allclose(tiles, [[0.0, 0.0], [0.5, 0.0], [3.0, 1.0]])
    moved = layout.shifted(np.array([[0.1, -0.2], [0.0, 0.3]]))
    assert np.allclose(moved.tile_positions(),
                       [[0.1, -0.2], [0.6, -0.2], [3.0, 1.3]])
    # offsets are rigid: they never change under a shift
    assert np.allclose(moved.tile_offsets[0], layout.tile_offsets[0])
    with pytest.raises(ValueError):
        layout.shifted(np.zeros((3, 2)))


def test_layout_to_geometry_round_trip():
    layout = _two_subarray_layout()
    geom = layout.to_geometry()
    assert geom.subarray_of_tile.tolist() == [0, 0, 1]
    assert np.allclose(geom.elements, layout.element_positions())
    back = layout_from_geometry(geom, layout.centers)
    for s in range(2):
        assert np.allclose(back.tile_offsets[s], layout.tile_offsets[s])
        assert np.allclose(back.element_offsets[s], layout.element_offsets[s])
    with pytest.raises(ValueError):
        layout_from_geometry(make_uniform_grid(2, 2), np.zeros((1, 2)))


def test_min_inter_subarray_distance_matches_brute_force():
    rng = np.random.default_rng(3)
    for _ in range(20):
        n_tiles = rng.integers(4, 10)
        centers = rng.uniform(-5, 5, size=(n_tiles, 2))
        labels = rng.integers(0, 3, size=n_tiles)
        if len(np.unique(labels)) < 2:
            continue
        elements = np.repeat(centers, 2, axis=0)
        elements[0::2, 0] -= 0.25
        elements[1::2, 0] += 0.25
        tiles = [(2 * t, 2 * t + 1) for t in range(n_tiles)]
        geom = ArrayGeometry(elements, tiles, subarray_of_tile=labels)
        best = min(np.hypot(*(centers[a] - centers[b]))
                   for a in range(n_tiles) for b in range(n_tiles)
                   if labels[a] != labels[b])
        assert np.isclose(min_inter_subarray_tile_distance(geom), best)


def test_save_load_round_trip(tmp_path):
    layout = _two_subarray_layout()
    geom = layout.to_geometry()
    path = tmp_path / "geom.json"
    save_geometry(geom, str(path), metadata={"note": 1})
    loaded = load_geometry(str(path))
    assert np.allclose(loaded.elements, geom.elements)
    assert loaded.tiles == geom.tiles
    assert loaded.design_frequency_hz == geom.design_frequency_hz
    assert np.array_equal(loaded.subarray_of_tile, geom.subarray_of_tile)
    with open(path) as fh:
        assert json.load(fh)["_meta"] == {"note": 1}
    # untiled geometries survive without subarray labels
    plain = make_uniform_grid(3, 2)
    save_geometry(plain, str(path))
    assert load_geometry(str(path)).subarray_of_tile is None
