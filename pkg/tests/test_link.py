"""Beam composition, spectral efficiency and the sweep bookkeeping."""

import numpy as np
import pytest

from stpa import (
    BlockageScenario,
    BlockageTimeline,
    ElementGrid,
    JcasWeights,
    LinkScenario,
    SweepResult,
    average_spectral_efficiency,
    blockage_sweep,
    comm_weight,
    deviation_interval,
    geometry_from_tiling,
    make_uniform_grid,
    multibeam,
    noise_power_for_snr,
    random_perfect_tiling,
    scan_sweep_se,
    scanned_beam_radius,
    sensing_weight,
    spectral_efficiency,
    steering_vector,
    tile_collapse,
)
from stpa.pattern import expanded_beam_pattern, extract_metrics


@pytest.fixture(scope="module")
def tiled_geom():
    return geometry_from_tiling(random_perfect_tiling(ElementGrid(4, 4), seed=2))


def test_tile_collapse_is_tile_constant_and_unit_norm(tiled_geom):
    rng = np.random.default_rng(0)
    for _ in range(10):
        w = rng.standard_normal(16) + 1j * rng.standard_normal(16)
        out = tile_collapse(tiled_geom, w)
        assert np.isclose(np.linalg.norm(out), 1.0)
        for members in tiled_geom.tiles:
            vals = out[list(members)]
            assert np.allclose(vals, vals[0])
    plain = make_uniform_grid(4, 4)
    w = rng.standard_normal(16) + 1j * rng.standard_normal(16)
    assert np.allclose(tile_collapse(plain, w), w / np.linalg.norm(w))
    # a weight that is odd within every tile averages to nothing
    odd = np.zeros(16, dtype=complex)
    for a, b in tiled_geom.tiles:
        odd[a], odd[b] = 1.0, -1.0
    with pytest.raises(ValueError):
        tile_collapse(tiled_geom, odd)


def test_comm_weight_beats_random_tile_constant_weights(tiled_geom):
    rng = np.random.default_rng(1)
    h = rng.standard_normal(16) + 1j * rng.standard_normal(16)
    best = np.abs(h @ comm_weight(h, tiled_geom))
    for _ in range(300):
        tile_vals = rng.standard_normal(8) + 1j * rng.standard_normal(8)
        w = np.empty(16, dtype=complex)
        for t, members in enumerate(tiled_geom.tiles):
            w[list(members)] = tile_vals[t]
        w /= np.linalg.norm(w)
        assert np.abs(h @ w) <= best + 1e-9


def test_comm_weight_untiled_is_the_matched_filter():
    geom = make_uniform_grid(3, 2)
    rng = np.random.default_rng(2)
    h = rng.standard_normal(6) + 1j * rng.standard_normal(6)
    assert np.allclose(comm_weight(h, geom), np.conj(h) / np.linalg.norm(h))
    with pytest.raises(ValueError):
        comm_weight(np.zeros(6, dtype=complex), geom)


def test_sensing_weight_gain_toward_the_scan_angle(tiled_geom):
    plain = make_uniform_grid(4, 4)
    w = sensing_weight(plain, 64.0, 31.0)
    assert np.isclose(np.linalg.norm(w), 1.0)
    gain = np.abs(steering_vector(plain, 64.0, 31.0) @ w)
    assert np.isclose(gain, 4.0)  # sqrt(N) with per-element phasing
    w_tiled = sensing_weight(tiled_geom, 64.0, 31.0)
    gain_tiled = np.abs(steering_vector(tiled_geom, 64.0, 31.0) @ w_tiled)
    assert gain_tiled <= 4.0 + 1e-9  # tiling can only lose matched gain
    for members in tiled_geom.tiles:
        vals = w_tiled[list(members)]
        assert np.allclose(vals, vals[0])


def test_multibeam_limits_and_power_split():
    rng = np.random.default_rng(3)
    wc = rng.standard_normal(8) + 1j * rng.standard_normal(8)
    ws = rng.standard_normal(8) + 1j * rng.standard_normal(8)
    assert np.allclose(multibeam(wc, ws, 1.0).combined, wc)
    assert np.allclose(multibeam(wc, ws, 0.0).combined, ws)
    half = multibeam(wc, ws, 0.5).combined
    assert np.allclose(half, np.sqrt(0.5) * (wc + ws))
    with pytest.raises(ValueError):
        JcasWeights(wc, ws, 1.2)


def test_spectral_efficiency_closed_form():
    h = np.ones(16, dtype=complex)
    w = np.ones(16, dtype=complex) / 4.0
    assert np.isclose(spectral_efficiency(h, w, 2.0), np.log2(1.0 + 16.0 / 2.0))
    # the JcasWeights path uses the composite: half power on a dark beam
    dark = multibeam(w, np.zeros(16, dtype=complex), 0.5)
    assert np.isclose(spectral_efficiency(h, dark, 2.0), np.log2(1.0 + 4.0))
    with pytest.raises(ValueError):
        spectral_efficiency(h, w, 0.0)


def test_noise_power_hits_the_requested_snr():
    los = np.full(4, 2.0, dtype=complex)  # power 16
    assert np.isclose(noise_power_for_snr(los, 10.0), 1.6)
    assert np.isclose(16.0 / noise_power_for_snr(los, 17.0), 10.0 ** 1.7)


def test_scanned_beam_radius_is_expansion_scaled(tiled_geom):
    metrics = extract_metrics(expanded_beam_pattern(tiled_geom, expansion=1.5))
    assert np.isclose(scanned_beam_radius(tiled_geom, 1.5),
                      1.5 * metrics.beamwidth_radius)


def test_average_se_rises_with_snr_and_is_reproducible(tiled_geom):
    scenario = LinkScenario(n_realizations=12)
    means, stds = average_spectral_efficiency(
        tiled_geom, scenario, (70.0, -130.0), [0.0, 10.0, 20.0], seed=4)
    assert means.shape == stds.shape == (3,)
    assert np.all(np.diff(means) > 0)
    assert np.all(stds >= 0)
    again, _ = average_spectral_efficiency(
        tiled_geom, scenario, (70.0, -130.0), [0.0, 10.0, 20.0], seed=4)
    assert np.array_equal(means, again)


def test_scan_sweep_shapes_and_validation(tiled_geom):
    scenario = LinkScenario(n_realizations=6)
    offsets = np.arange(-10.0, 10.1, 5.0)
    sweep = scan_sweep_se(tiled_geom, scenario, "azimuth", offsets, seed=5)
    assert np.allclose(sweep.angle_deg, scenario.ue_phi_deg + offsets)
    assert sweep.ue_angle_deg == scenario.ue_phi_deg
    assert sweep.se_mean.shape == (5,)
    elev = scan_sweep_se(tiled_geom, scenario, "elevation", offsets, seed=5)
    assert elev.ue_angle_deg == scenario.ue_theta_deg
    with pytest.raises(ValueError):
        scan_sweep_se(tiled_geom, scenario, "diagonal", offsets)
    with pytest.raises(ValueError):
        scan_sweep_se(tiled_geom, scenario, "elevation", [30.0])  # theta > 90


def test_deviation_interval_on_synthetic_sweeps():
    angles = np.arange(0.0, 81.0, 5.0)
    se = np.full(len(angles), 4.0)
    flat = SweepResult(angles, se.copy(), np.zeros_like(se), ue_angle_deg=40.0)
    assert deviation_interval(flat) == (40.0, 40.0)
    dipped = se.copy()
    dipped[(angles >= 35.0) & (angles <= 45.0)] = 3.0
    sweep = SweepResult(angles, dipped, np.zeros_like(se), ue_angle_deg=40.0)
    assert deviation_interval(sweep) == (35.0, 45.0)
    # an explicit reference overrides the outer-median baseline
    assert deviation_interval(sweep, reference=3.0) == (40.0, 40.0)


def test_blockage_timeline_interval_bookkeeping():
    theta = np.arange(50.0, 90.5, 0.5)
    overlap = (theta >= 65.0) & (theta <= 75.0)
    tl = BlockageTimeline(theta, np.ones_like(theta), overlap, 0.1)
    assert tl.interval_deg == (65.0, 75.0)
    assert np.isclose(tl.interval_width_deg, 10.0)
    empty = BlockageTimeline(theta, np.ones_like(theta),
                             np.zeros_like(theta, dtype=bool), 0.1)
    assert empty.interval_width_deg == 0.0


def test_blockage_sweep_smoke(tiled_geom):
    scn = BlockageScenario()
    theta = np.array([55.0, 65.0, 70.0, 75.0, 85.0])
    tl = blockage_sweep(tiled_geom, scn, theta, beam_radius_uv=0.08,
                        n_realizations=5, seed=6)
    assert tl.theta_deg.shape == tl.se_mean.shape == tl.overlap.shape
    assert np.all(tl.se_mean > 0)
    assert tl.overlap.dtype == bool
    assert tl.overlap[2]  # the body sitting on the UE direction overlaps
    assert not tl.overlap[0]
    again = blockage_sweep(tiled_geom, scn, theta, beam_radius_uv=0.08,
                           n_realizations=5, seed=6)
    assert np.array_equal(tl.se_mean, again.se_mean)
