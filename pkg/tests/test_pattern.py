"""Array factors, expanded beam patterns and sidelobe metrics."""

import numpy as np
import pytest

from stpa import (
    ArrayGeometry,
    ElementGrid,
    PatternGrid,
    array_factor,
    direction_grid,
    expanded_beam_pattern,
    extract_metrics,
    frequency_sweep_sll,
    main_beam_radius,
    make_uniform_grid,
    random_perfect_tiling,
    geometry_from_tiling,
    ring_average,
    scanned_pattern,
)


def test_two_element_pair_has_cosine_pattern():
    geom = ArrayGeometry(np.array([[0.0, 0.0], [0.5, 0.0]]), [(0,), (1,)])
    u = np.linspace(-1.0, 1.0, 41)
    af = array_factor(geom, np.ones(2), u, np.zeros_like(u))
    assert np.allclose(np.abs(af) ** 2, np.cos(np.pi * u / 2.0) ** 2, atol=1e-12)
    # the same two elements fed through one shared shifter: same pattern
    tiled = ArrayGeometry(geom.elements, [(0, 1)])
    af_tiled = array_factor(tiled, np.ones(1), u, np.zeros_like(u))
    assert np.allclose(np.abs(af_tiled), np.abs(af), atol=1e-12)


def test_ebp_is_normalized_and_centrally_symmetric():
    geom = geometry_from_tiling(random_perfect_tiling(ElementGrid(6, 6), seed=4))
    ebp = expanded_beam_pattern(geom, expansion=1.5)
    assert np.isclose(ebp.evaluate(0.0, 0.0)[0], 1.0, atol=1e-12)
    assert np.all(ebp.values <= 1.0 + 1e-9)
    rng = np.random.default_rng(0)
    for _ in range(50):
        u, v = rng.uniform(-1, 1, size=2)
        assert np.isclose(ebp.evaluate(u, v)[0], ebp.evaluate(-u, -v)[0],
                          atol=1e-12)


def test_pattern_magnitude_is_translation_invariant():
    geom = make_uniform_grid(5, 4)
    moved = ArrayGeometry(geom.elements + np.array([2.3, -1.7]), geom.tiles)
    rng = np.random.default_rng(1)
    u, v = rng.uniform(-1, 1, size=(2, 30))
    a = np.abs(array_factor(geom, np.ones(20), u, v))
    b = np.abs(array_factor(moved, np.ones(20), u, v))
    assert np.allclose(a, b, atol=1e-12)


def test_direction_grid_covers_the_hemisphere_sweep():
    u, v = direction_grid(1.0)
    assert len(u) == 32401
    assert np.all(u ** 2 + v ** 2 <= 1.0 + 1e-9)
    assert np.any((u == 0.0) & (v == 0.0))
    u[:] = 0.0  # returned arrays are private copies
    u2, _ = direction_grid(1.0)
    assert np.any(u2 != 0.0)


def test_uniform_square_array_first_sidelobe_level():
    # 12x12 half-wavelength grid: first sidelobe of the separable
    # sin(12x)/sin(x) pattern, approx -13.1 dB for this element count
    metrics = extract_metrics(expanded_beam_pattern(make_uniform_grid(12, 12),
                                                    expansion=1.0))
    assert abs(metrics.max_sll_db - (-13.1)) < 0.3
    # analytic first null of the 6-wavelength aperture sits at u = 1/6
    assert abs(metrics.beamwidth_radius - 1.0 / 6.0) < 0.02


def test_scanned_pattern_peaks_at_the_scan_direction():
    geom = make_uniform_grid(8, 8)
    pat = scanned_pattern(geom, scan=(0.3, -0.2))
    assert np.isclose(pat.evaluate(0.3, -0.2)[0], 1.0, atol=1e-12)
    assert pat.values.max() <= 1.0 + 1e-9
    with pytest.raises(ValueError):
        scanned_pattern(geom, scan=(0.9, 0.9))


def test_main_beam_radius_on_a_synthetic_radial_pattern():
    # ring averages of a radially symmetric pattern equal its radial cut,
    # so the first minimum of cos^2(pi r / 0.2) must land at r = 0.1
    def evaluate(u, v):
        r = np.hypot(np.asarray(u), np.asarray(v))
        return np.cos(np.pi * r / 0.2) ** 2

    radius = main_beam_radius(evaluate, step=0.002)
    assert abs(radius - 0.1) <= 0.004
    with pytest.raises(ValueError):
        main_beam_radius(lambda u, v: np.ones_like(np.asarray(u)))


def test_extract_metrics_with_explicit_exclusion_disc():
    u = np.array([0.0, 0.05, 0.3, 0.6])
    v = np.zeros(4)
    values = np.array([1.0, 0.9, 0.01, 0.2])
    pattern = PatternGrid(u, v, values)
    metrics = extract_metrics(pattern, exclusion_radius=0.1)
    assert np.isclose(metrics.max_sll_db, 10 * np.log10(0.2))
    assert metrics.beamwidth_radius == 0.1
    with pytest.raises(ValueError):
        extract_metrics(pattern, exclusion_radius=2.0)
    with pytest.raises(ValueError):
        extract_metrics(PatternGrid(u, v, values, evaluate=None))


def test_ring_average_of_a_constant_is_that_constant():
    assert np.isclose(ring_average(lambda u, v: np.full_like(u, 0.37),
                                   (0.1, -0.2), 0.3), 0.37)


def test_frequency_sweep_agrees_with_a_direct_evaluation():
    geom = geometry_from_tiling(random_perfect_tiling(ElementGrid(6, 6), seed=7))
    sweep = frequency_sweep_sll(geom, [1.0, 1.5], expansion=2.0)
    direct = extract_metrics(expanded_beam_pattern(geom, expansion=2.0))
    assert sweep[0][0] == 1.0
    assert np.isclose(sweep[0][1], direct.max_sll_db, atol=1e-9)
    assert len(sweep) == 2
    with pytest.raises(ValueError):
        frequency_sweep_sll(geom, [0.5])
    with pytest.raises(ValueError):
        expanded_beam_pattern(geom, expansion=-1.0)
    with pytest.raises(ValueError):
        expanded_beam_pattern(geom, freq_ratio=0.9)
