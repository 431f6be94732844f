"""Multibeam weights, spectral efficiency, scan sweeps and blockage timing.

Weights always respect the tiling: the two elements of a tile share one
phase shifter, so every weight vector built here is constant within each
tile.  The composite transmit weight splits power between a communication
beam (matched to the channel) and a sensing beam (steered to the scan
angle); spectral efficiency follows from the scalar effective channel of
the single-antenna user.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .channel import (
    BlockageScenario,
    channel_normalization,
    compose_blockage_channel,
    direction_cosines,
    los_component,
    sample_nlos_channel,
)
from .geometry import ArrayGeometry, beams_overlap
from .pattern import expanded_beam_pattern, extract_metrics

TWO_PI = 2.0 * np.pi


def tile_collapse(geometry: ArrayGeometry, weight: np.ndarray) -> np.ndarray:
    """Average a per-element weight within each tile and renormalize.

    This is the projection onto the feasible set of a tiled front end:
    one phase shifter per tile means both elements must carry the same
    value.  Untiled geometries pass through unchanged up to norm.
    """
    out = np.empty(geometry.n_elements, dtype=complex)
    for members in geometry.tiles:
        idx = list(members)
        out[idx] = weight[idx].mean()
    norm = np.linalg.norm(out)
    if norm == 0:
        raise ValueError("weight collapsed to zero; channel orthogonal to tiling")
    return out / norm


def comm_weight(h, geometry: ArrayGeometry) -> np.ndarray:
    """Matched communication weight: conjugate channel, tile-collapsed.

    For a single-antenna user the channel is a vector and its dominant
    right singular vector is the normalized conjugate; the tiling
    constraint is then enforced by per-tile averaging.
    """
    h = np.asarray(getattr(h, "h", h), dtype=complex)
    if not np.any(h):
        raise ValueError("zero channel has no matched weight")
    return tile_collapse(geometry, np.conj(h))


def sensing_weight(geometry: ArrayGeometry, theta_deg: float,
                   phi_deg: float, freq_ratio: float = 1.0) -> np.ndarray:
    """Conjugate steering toward a scan angle, phased at tile centers."""
    u, v = direction_cosines(theta_deg, phi_deg)
    centers = geometry.phase_centers
    phases = np.exp(-1j * TWO_PI * freq_ratio
                    * (u * centers[:, 0] + v * centers[:, 1]))
    w = np.empty(geometry.n_elements, dtype=complex)
    for t, members in enumerate(geometry.tiles):
        w[list(members)] = phases[t]
    return w / np.linalg.norm(w)


@dataclass
class JcasWeights:
    """Communication and sensing beams plus their power-split composite."""

    comm: np.ndarray
    sense: np.ndarray
    power_split: float
    combined: np.ndarray = field(init=False)

    def __post_init__(self):
        if not 0.0 <= self.power_split <= 1.0:
            raise ValueError("power split must lie in [0, 1]")
        self.combined = (np.sqrt(self.power_split) * self.comm
                         + np.sqrt(1.0 - self.power_split) * self.sense)


def multibeam(w_comm: np.ndarray, w_sense: np.ndarray,
              power_split: float = 0.5) -> JcasWeights:
    """Compose the joint weight from unit-norm comm and sensing beams."""
    return JcasWeights(np.asarray(w_comm, dtype=complex),
                       np.asarray(w_sense, dtype=complex), power_split)


def spectral_efficiency(h, w, noise_power: float) -> float:
    """Achievable rate log2(1 + |h.w|^2 / noise) of the scalar link."""
    if noise_power <= 0:
        raise ValueError("noise power must be positive")
    h = np.asarray(getattr(h, "h", h), dtype=complex)
    w = np.asarray(getattr(w, "combined", w), dtype=complex)
    gain = np.abs(h @ w) ** 2
    return float(np.log2(1.0 + gain / noise_power))


def scanned_beam_radius(geometry: ArrayGeometry, expansion: float = 1.5,
                        step_deg: float = 1.0) -> float:
    """Beam radius in (u, v): the scan-compensated radius times expansion."""
    metrics = extract_metrics(expanded_beam_pattern(geometry, expansion=expansion,
                                                    step_deg=step_deg))
    return expansion * metrics.beamwidth_radius


@dataclass(frozen=True)
class LinkScenario:
    """Downlink geometry and channel statistics shared by the sweeps."""

    ue_theta_deg: float = 70.0
    ue_phi_deg: float = 50.0
    ue_range_m: float = 50.0
    carrier_hz: float = 28e9
    power_split: float = 0.5
    n_realizations: int = 200
    nlos_offset_db: float = -10.0
    n_clusters: int = 8
    n_rays: int = 10

    @property
    def wavelength_m(self) -> float:
        return 299_792_458.0 / self.carrier_hz


def _normalized_los(geometry: ArrayGeometry, scenario: LinkScenario) -> np.ndarray:
    los = los_component(geometry, scenario.ue_range_m, scenario.ue_theta_deg,
                        scenario.ue_phi_deg, scenario.wavelength_m)
    return channel_normalization(los, scenario.nlos_offset_db) * los


def _sample_channels(geometry: ArrayGeometry, scenario: LinkScenario,
                     seed: int) -> tuple[np.ndarray, np.ndarray]:
    """LOS vector plus a (n_realizations, N) stack of scatter components."""
    los = _normalized_los(geometry, scenario)
    los_power = float(np.vdot(los, los).real)
    streams = np.random.SeedSequence(seed).spawn(scenario.n_realizations)
    nlos = np.empty((scenario.n_realizations, geometry.n_elements), dtype=complex)
    for r, child in enumerate(streams):
        nlos[r], _ = sample_nlos_channel(
            geometry, los_power, scenario.n_clusters, scenario.n_rays,
            scenario.nlos_offset_db, rng=np.random.default_rng(child))
    return los, nlos


def noise_power_for_snr(los: np.ndarray, snr_db: float) -> float:
    """Noise variance putting the total LOS power at the requested SNR."""
    return float(np.vdot(los, los).real / 10.0 ** (snr_db / 10.0))


def average_spectral_efficiency(geometry: ArrayGeometry, scenario: LinkScenario,
                                sensing_angle: tuple[float, float],
                                snr_db_values, seed: int = 0,
                                ) -> tuple[np.ndarray, np.ndarray]:
    """Mean and std of SE over channel realizations, per SNR value.

    The sensing beam stays fixed while the communication beam matches
    each realization, as in the no-overlap operating point.
    """
    los, nlos = _sample_channels(geometry, scenario, seed)
    w_s = sensing_weight(geometry, *sensing_angle)
    gains = np.empty(scenario.n_realizations)
    for r in range(scenario.n_realizations):
        h = los + nlos[r]
        w = multibeam(comm_weight(h, geometry), w_s, scenario.power_split)
        gains[r] = np.abs(h @ w.combined) ** 2
    snr_db_values = np.atleast_1d(np.asarray(snr_db_values, dtype=float))
    means = np.empty(len(snr_db_values))
    stds = np.empty(len(snr_db_values))
    for i, snr_db in enumerate(snr_db_values):
        sigma2 = noise_power_for_snr(los, snr_db)
        se = np.log2(1.0 + gains / sigma2)
        means[i] = se.mean()
        stds[i] = se.std()
    return means, stds


@dataclass
class SweepResult:
    """SE versus scan angle for one geometry."""

    angle_deg: np.ndarray
    se_mean: np.ndarray
    se_std: np.ndarray
    ue_angle_deg: float


def scan_sweep_se(geometry: ArrayGeometry, scenario: LinkScenario,
                  axis: str, offsets_deg, snr_db: float = 10.0,
                  seed: int = 0) -> SweepResult:
    """Sweep the sensing beam through the UE angle and record the SE.

    ``axis`` is "azimuth" (elevation fixed at the UE's) or "elevation"
    (azimuth fixed).  The same channel realizations are reused at every
    scan angle so the sweep varies only through the sensing beam.
    """
    if axis not in ("azimuth", "elevation"):
        raise ValueError("axis must be 'azimuth' or 'elevation'")
    offsets = np.asarray(offsets_deg, dtype=float)
    if axis == "azimuth":
        angles = [(scenario.ue_theta_deg, scenario.ue_phi_deg + off)
                  for off in offsets]
        ue_angle = scenario.ue_phi_deg
    else:
        angles = [(scenario.ue_theta_deg + off, scenario.ue_phi_deg)
                  for off in offsets]
        ue_angle = scenario.ue_theta_deg
        if any(not 0.0 <= t <= 90.0 for t, _ in angles):
            raise ValueError("elevation sweep leaves the visible range")
    los, nlos = _sample_channels(geometry, scenario, seed)
    sigma2 = noise_power_for_snr(los, snr_db)
    channels = los[None, :] + nlos
    comm = np.empty_like(channels)
    for r in range(scenario.n_realizations):
        comm[r] = comm_weight(channels[r], geometry)
    se_mean = np.empty(len(angles))
    se_std = np.empty(len(angles))
    rho = scenario.power_split
    for i, (theta, phi) in enumerate(angles):
        w_s = sensing_weight(geometry, theta, phi)
        w = np.sqrt(rho) * comm + np.sqrt(1.0 - rho) * w_s[None, :]
        gains = np.abs(np.einsum("rn,rn->r", channels, w)) ** 2
        se = np.log2(1.0 + gains / sigma2)
        se_mean[i] = se.mean()
        se_std[i] = se.std()
    base = ue_angle + offsets
    return SweepResult(base, se_mean, se_std, ue_angle)


def deviation_interval(sweep: SweepResult, reference: float | None = None,
                       threshold: float = 0.05) -> tuple[float, float]:
    """Contiguous angle interval around the UE where SE strays from baseline.

    ``reference`` defaults to the median SE of the outer third of the
    sweep samples on each side, a robust stand-in for the no-overlap
    level.  Returns the (low, high) angles of the contiguous run of
    |SE - reference| / reference > threshold containing the sample
    nearest the UE angle; a zero-width interval means no deviation.
    """
    if reference is None:
        k = max(1, len(sweep.angle_deg) // 6)
        outer = np.r_[sweep.se_mean[:k], sweep.se_mean[-k:]]
        reference = float(np.median(outer))
    dev = np.abs(sweep.se_mean - reference) / reference > threshold
    center = int(np.argmin(np.abs(sweep.angle_deg - sweep.ue_angle_deg)))
    if not dev[center]:
        return sweep.ue_angle_deg, sweep.ue_angle_deg
    lo = center
    while lo > 0 and dev[lo - 1]:
        lo -= 1
    hi = center
    while hi < len(dev) - 1 and dev[hi + 1]:
        hi += 1
    return float(sweep.angle_deg[lo]), float(sweep.angle_deg[hi])


@dataclass
class BlockageTimeline:
    """SE along the blockage track plus the measured overlap interval."""

    theta_deg: np.ndarray
    se_mean: np.ndarray
    overlap: np.ndarray
    beam_radius_uv: float

    @property
    def interval_deg(self) -> tuple[float, float]:
        """Bounds of the contiguous overlap run (empty: zero-width)."""
        idx = np.flatnonzero(self.overlap)
        if len(idx) == 0:
            mid = float(self.theta_deg[len(self.theta_deg) // 2])
            return mid, mid
        return float(self.theta_deg[idx[0]]), float(self.theta_deg[idx[-1]])

    @property
    def interval_width_deg(self) -> float:
        lo, hi = self.interval_deg
        return hi - lo


def blockage_sweep(geometry: ArrayGeometry, scenario: BlockageScenario,
                   theta_grid_deg, beam_radius_uv: float, snr_db: float = 10.0,
                   power_split: float = 0.5, n_realizations: int = 200,
                   nlos_offset_db: float = -10.0, seed: int = 0,
                   ) -> BlockageTimeline:
    """Track a body across the LOS and record the SE at each position.

    The sensing beam follows the body; beams overlap when the body and
    UE directions are closer than the measured beam radius in (u, v),
    and the LOS term vanishes inside that interval.  The communication
    weight is matched to the unblocked channel of each realization and
    held fixed along the track (the link has no fresh CSI while the body
    moves), which is what produces the deep in-blockage notch.
    """
    theta_grid = np.asarray(theta_grid_deg, dtype=float)
    los = los_component(geometry, scenario.ue_range_m, scenario.ue_theta_deg,
                        scenario.ue_phi_deg, scenario.wavelength_m)
    scale = channel_normalization(los, nlos_offset_db)
    los = scale * los
    los_power = float(np.vdot(los, los).real)
    sigma2 = noise_power_for_snr(los, snr_db)
    ue_uv = direction_cosines(scenario.ue_theta_deg, scenario.ue_phi_deg)

    streams = np.random.SeedSequence(seed).spawn(n_realizations)
    rngs = [np.random.default_rng(child) for child in streams]
    nlos = np.empty((n_realizations, geometry.n_elements), dtype=complex)
    comm = np.empty_like(nlos)
    for r, rng in enumerate(rngs):
        nlos[r], _ = sample_nlos_channel(geometry, los_power, rng=rng,
                                         power_offset_db=nlos_offset_db)
        comm[r] = comm_weight(los + nlos[r], geometry)

    se_mean = np.empty(len(theta_grid))
    overlap = np.empty(len(theta_grid), dtype=bool)
    rho = power_split
    for i, theta_t in enumerate(theta_grid):
        body_uv = direction_cosines(theta_t, scenario.ue_phi_deg)
        overlap[i] = beams_overlap(body_uv, ue_uv, beam_radius_uv)
        w_s = sensing_weight(geometry, theta_t, scenario.ue_phi_deg)
        se = np.empty(n_realizations)
        for r, rng in enumerate(rngs):
            real = compose_blockage_channel(geometry, scenario, theta_t,
                                            nlos[r], bool(overlap[i]), rng)
            h = scale * (real.los + real.target) + real.nlos
            w = np.sqrt(rho) * comm[r] + np.sqrt(1.0 - rho) * w_s
            se[r] = np.log2(1.0 + np.abs(h @ w) ** 2 / sigma2)
        se_mean[i] = se.mean()
    return BlockageTimeline(theta_grid, se_mean, overlap, beam_radius_uv)
