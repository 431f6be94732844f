"""OFDM radar synthesis, range-velocity transforms and angle imaging."""

import numpy as np
import pytest

from stpa import (
    OfdmParams,
    ScanSchedule,
    SensingImage,
    SensingTarget,
    angle_image,
    detect_strongest,
    make_uniform_grid,
    range_axis_m,
    range_doppler_map,
    resolve_two_targets,
    synthesize_rx,
    velocity_axis_mps,
)

SMALL = OfdmParams(bandwidth_hz=40e6, n_subcarriers=256,
                   symbol_duration_s=6.4e-6)


def test_numerology_derived_scales():
    p = OfdmParams()
    assert np.isclose(p.subcarrier_spacing_hz, 1.0 / 51.2e-6)
    assert np.isclose(p.range_resolution_m, 3.747405725, rtol=1e-9)
    assert np.isclose(p.max_range_m, 7674.6869248, rtol=1e-9)
    assert np.isclose(p.max_velocity_mps, 52.27965576171875, rtol=1e-9)
    assert np.isclose(p.velocity_resolution_mps(34), 3.075273868336397,
                      rtol=1e-9)
    with pytest.raises(ValueError):
        OfdmParams(symbol_duration_s=50e-6)  # inconsistent with N/B


def test_schedule_counting_and_validation():
    s = ScanSchedule(symbols_per_dwell=4, elevation_deg=(60.0, 70.0),
                     azimuth_deg=(-10.0, 0.0, 10.0))
    assert s.n_dwells == 6
    assert np.isclose(s.packet_duration_s(SMALL), 2 * 4 * 6.4e-6)
    with pytest.raises(ValueError):
        ScanSchedule(symbols_per_dwell=0)
    with pytest.raises(ValueError):
        ScanSchedule(elevation_deg=())


def test_axes_and_velocity_folding():
    geom = make_uniform_grid(3, 3)
    schedule = ScanSchedule(symbols_per_dwell=8, elevation_deg=(70.0,),
                            azimuth_deg=(0.0,))
    cube = synthesize_rx(geom, [], schedule, SMALL, noise_offset_db=None)
    r = range_axis_m(cube)
    assert np.allclose(np.diff(r), SMALL.range_resolution_m)
    v = velocity_axis_mps(cube)
    vres = SMALL.velocity_resolution_mps(8)
    assert np.allclose(v[:4], np.arange(4) * vres)  # 0..3 forward
    assert np.allclose(v[4:], (np.arange(4, 8) - 8) * vres)  # wrapped


def _one_dwell_cube(targets, noise_offset_db=None, seed=0, n_symbols=16):
    geom = make_uniform_grid(4, 4)
    schedule = ScanSchedule(symbols_per_dwell=n_symbols,
                            elevation_deg=(70.0,), azimuth_deg=(0.0,))
    return synthesize_rx(geom, targets, schedule, SMALL,
                         noise_offset_db=noise_offset_db, seed=seed)


def test_cube_is_linear_in_the_targets():
    t1 = SensingTarget(80.0, 11.0, 70.0, 0.0)
    t2 = SensingTarget(140.0, -23.0, 70.0, 5.0)
    both = _one_dwell_cube([t1, t2]).block(0, 0)
    split = _one_dwell_cube([t1]).block(0, 0) + _one_dwell_cube([t2]).block(0, 0)
    assert np.allclose(both, split, atol=1e-18)


def test_range_doppler_transform_preserves_power():
    cube = _one_dwell_cube([SensingTarget(95.0, 7.0, 70.0, 0.0)],
                           noise_offset_db=-10.0)
    block = cube.block(0, 0)
    rd = range_doppler_map(cube, 0, 0)
    assert np.isclose(rd.sum(), np.sum(np.abs(block) ** 2), rtol=1e-9)


def test_on_bin_target_concentrates_in_one_cell():
    vres = SMALL.velocity_resolution_mps(16)
    target = SensingTarget(range_m=24 * SMALL.range_resolution_m,
                           speed_mps=3 * vres, theta_deg=70.0, phi_deg=0.0)
    cube = _one_dwell_cube([target])
    rd = range_doppler_map(cube, 0, 0)
    assert rd[24, 3] / rd.sum() > 0.999
    r, v, r_bin, v_bin = detect_strongest(cube, 0, 0)
    assert (r_bin, v_bin) == (24, 3)
    assert np.isclose(r, target.range_m)
    assert np.isclose(v, target.speed_mps)


def test_off_bin_target_lands_within_one_bin():
    target = SensingTarget(100.0, 10.0, 70.0, 0.0)
    cube = _one_dwell_cube([target])
    r, v, _, _ = detect_strongest(cube, 0, 0)
    assert abs(r - 100.0) <= SMALL.range_resolution_m
    assert abs(v - 10.0) <= SMALL.velocity_resolution_mps(16)


def test_noise_streams_are_reproducible_and_order_free():
    target = SensingTarget(100.0, 10.0, 70.0, 0.0)
    geom = make_uniform_grid(4, 4)
    schedule = ScanSchedule(symbols_per_dwell=8, elevation_deg=(60.0, 70.0),
                            azimuth_deg=(0.0, 10.0))
    cube = synthesize_rx(geom, [target], schedule, SMALL,
                         noise_offset_db=-10.0, seed=9)
    out_of_order = cube.block(1, 1).copy()
    assert np.array_equal(cube.block(1, 1), out_of_order)
    twin = synthesize_rx(geom, [target], schedule, SMALL,
                         noise_offset_db=-10.0, seed=9)
    assert np.array_equal(twin.block(1, 1), out_of_order)
    assert not np.array_equal(twin.block(0, 0), out_of_order)
    assert twin.noise_std > 0


def test_materialized_cube_equals_streamed_blocks():
    geom = make_uniform_grid(3, 3)
    schedule = ScanSchedule(symbols_per_dwell=4, elevation_deg=(60.0, 70.0),
                            azimuth_deg=(-10.0, 10.0))
    cube = synthesize_rx(geom, [SensingTarget(50.0, 5.0, 65.0, 0.0)],
                         schedule, SMALL, noise_offset_db=-10.0, seed=3)
    full = cube.materialize()
    assert full.shape == (256, 2, 8)
    assert np.array_equal(full[:, 1, 4:], cube.block(1, 1))
    with pytest.raises(ValueError):
        cube.materialize(size_limit_bytes=16)


def test_target_span_validation():
    geom = make_uniform_grid(3, 3)
    with pytest.raises(ValueError):
        synthesize_rx(geom, [SensingTarget(1e6, 0.0, 70.0, 0.0)], params=SMALL)
    with pytest.raises(ValueError):
        synthesize_rx(geom, [SensingTarget(50.0, 1e4, 70.0, 0.0)], params=SMALL)


def test_angle_image_peaks_on_the_scheduled_target_cell():
    geom = make_uniform_grid(8, 8)
    schedule = ScanSchedule(symbols_per_dwell=16,
                            elevation_deg=(60.0, 70.0, 80.0),
                            azimuth_deg=tuple(np.arange(-30.0, 31.0, 10.0)))
    target = SensingTarget(96.0, 8.0, 70.0, 10.0)
    cube = synthesize_rx(geom, [target], schedule, SMALL,
                         noise_offset_db=None, seed=0)
    _, _, r_bin, v_bin = detect_strongest(cube, 4, 1)
    image = angle_image(cube, r_bin, v_bin)
    assert image.power.shape == (3, 7)
    assert np.isclose(image.power.max(), 1.0)
    ie, ia = np.unravel_index(image.power.argmax(), image.power.shape)
    assert image.theta_deg[ie] == 70.0
    assert image.phi_deg[ia] == 10.0


def test_resolve_two_targets_on_synthetic_cuts():
    phi = np.arange(-30.0, 31.0, 5.0)
    two_peaks = np.full(len(phi), 0.05)
    two_peaks[4] = 1.0   # -10 deg
    two_peaks[9] = 0.6   # 15 deg
    image = SensingImage(np.array([70.0]), phi, two_peaks[None, :])
    resolved, peaks = resolve_two_targets(image, 70.0)
    assert resolved
    assert peaks[0][0] == -10.0
    assert peaks[1][0] == 15.0
    shallow = np.full(len(phi), 0.55)
    shallow[4], shallow[9] = 1.0, 0.6
    assert not resolve_two_targets(
        SensingImage(np.array([70.0]), phi, shallow[None, :]), 70.0)[0]
    lone = np.full(len(phi), 0.05)
    lone[6] = 1.0
    assert not resolve_two_targets(
        SensingImage(np.array([70.0]), phi, lone[None, :]), 70.0)[0]
