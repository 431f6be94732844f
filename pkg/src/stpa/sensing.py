"""OFDM scanning-radar simulation: synthesis, range-velocity and angle images.

The array sweeps its sensing beam over a schedule of (elevation, azimuth)
dwells while transmitting OFDM symbols; a single auxiliary antenna
captures the target echoes.  Per-subcarrier phase ramps carry the target
delays and per-symbol ramps the Doppler, so an inverse DFT across
subcarriers and a DFT across the symbols of one dwell yield the
range-velocity map, and the per-dwell power at a detected cell yields the
angle image.  Received blocks are synthesized dwell by dwell, so the full
schedule never has to be held in memory at once.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.signal import find_peaks

from .channel import SPEED_OF_LIGHT, steering_vector
from .geometry import ArrayGeometry
from .link import sensing_weight

TWO_PI = 2.0 * np.pi


@dataclass(frozen=True)
class OfdmParams:
    """OFDM numerology with its derived radar scales."""

    carrier_hz: float = 28e9
    bandwidth_hz: float = 40e6
    n_subcarriers: int = 2048
    symbol_duration_s: float = 51.2e-6

    def __post_init__(self):
        expected = self.n_subcarriers / self.bandwidth_hz
        if abs(self.symbol_duration_s - expected) > 1e-9 * expected:
            raise ValueError("symbol duration must equal n_subcarriers/bandwidth")

    @property
    def wavelength_m(self) -> float:
        return SPEED_OF_LIGHT / self.carrier_hz

    @property
    def subcarrier_spacing_hz(self) -> float:
        return 1.0 / self.symbol_duration_s

    @property
    def range_resolution_m(self) -> float:
        return SPEED_OF_LIGHT / (2.0 * self.bandwidth_hz)

    @property
    def max_range_m(self) -> float:
        return SPEED_OF_LIGHT * self.symbol_duration_s / 2.0

    @property
    def max_velocity_mps(self) -> float:
        return SPEED_OF_LIGHT / (4.0 * self.carrier_hz * self.symbol_duration_s)

    def velocity_resolution_mps(self, symbols_per_dwell: int) -> float:
        return SPEED_OF_LIGHT / (2.0 * self.carrier_hz * symbols_per_dwell
                                 * self.symbol_duration_s)


@dataclass(frozen=True)
class ScanSchedule:
    """Beam-pointing schedule: elevation sweeps inside each azimuth packet.

    Symbol k of packet n_a dwells on elevation index k // symbols_per_dwell,
    so one packet lasts n_elevation * symbols_per_dwell symbol durations.
    """

    symbols_per_dwell: int = 34
    elevation_deg: tuple = tuple(range(0, 91, 5))
    azimuth_deg: tuple = tuple(range(-180, 181, 5))

    def __post_init__(self):
        if self.symbols_per_dwell < 1:
            raise ValueError("need at least one symbol per dwell")
        if not self.elevation_deg or not self.azimuth_deg:
            raise ValueError("schedule must cover at least one angle")

    @property
    def n_elevation(self) -> int:
        return len(self.elevation_deg)

    @property
    def n_azimuth(self) -> int:
        return len(self.azimuth_deg)

    @property
    def n_dwells(self) -> int:
        return self.n_elevation * self.n_azimuth

    def packet_duration_s(self, params: OfdmParams) -> float:
        return self.n_elevation * self.symbols_per_dwell * params.symbol_duration_s


@dataclass(frozen=True)
class SensingTarget:
    """Point scatterer with a two-way free-space gain law."""

    range_m: float
    speed_mps: float
    theta_deg: float
    phi_deg: float

    def gain(self, wavelength_m: float) -> float:
        return wavelength_m ** 2 / ((4.0 * np.pi) ** 1.5 * self.range_m ** 2)

    @property
    def delay_s(self) -> float:
        return 2.0 * self.range_m / SPEED_OF_LIGHT

    def doppler_hz(self, carrier_hz: float) -> float:
        return 2.0 * self.speed_mps * carrier_hz / SPEED_OF_LIGHT


class SensingCube:
    """Received symbols of a whole scan, generated one dwell at a time.

    ``block(i_azimuth, i_elevation)`` returns the (n_subcarriers,
    symbols_per_dwell) slab of that dwell.  Noise is drawn from one
    seeded stream per dwell, so blocks are reproducible regardless of
    access order, and a materialized cube equals its streamed blocks.
    """

    def __init__(self, params: OfdmParams, schedule: ScanSchedule,
                 amplitudes: np.ndarray, targets: list[SensingTarget],
                 noise_std: float, seed: int = 0):
        self.params = params
        self.schedule = schedule
        self.amplitudes = amplitudes
        self.targets = list(targets)
        self.noise_std = float(noise_std)
        self.seed = seed
        self._streams = np.random.SeedSequence(seed).spawn(schedule.n_dwells)

    def block(self, azimuth_index: int, elevation_index: int) -> np.ndarray:
        p, s = self.params, self.schedule
        n = np.arange(p.n_subcarriers)
        d = np.arange(s.symbols_per_dwell)
        symbol_start = elevation_index * s.symbols_per_dwell
        t = (symbol_start + d) * p.symbol_duration_s \
            + azimuth_index * s.packet_duration_s(p)
        out = np.zeros((p.n_subcarriers, s.symbols_per_dwell), dtype=complex)
        for l, target in enumerate(self.targets):
            amp = self.amplitudes[azimuth_index, elevation_index, l]
            range_ramp = np.exp(-1j * TWO_PI * n * target.delay_s
                                * p.subcarrier_spacing_hz)
            doppler_ramp = np.exp(1j * TWO_PI * target.doppler_hz(p.carrier_hz) * t)
            out += amp * np.outer(range_ramp, doppler_ramp)
        if self.noise_std > 0:
            rng = np.random.default_rng(
                self._streams[azimuth_index * s.n_elevation + elevation_index])
            noise = rng.standard_normal(out.shape) + 1j * rng.standard_normal(out.shape)
            out += noise * (self.noise_std / np.sqrt(2.0))
        return out

    def materialize(self, size_limit_bytes: int = 800_000_000) -> np.ndarray:
        """Full (n_subcarriers, n_azimuth, n_elevation*symbols) array."""
        p, s = self.params, self.schedule
        total = p.n_subcarriers * s.n_azimuth * s.n_elevation \
            * s.symbols_per_dwell * 16
        if total > size_limit_bytes:
            raise ValueError("cube too large to materialize; use block access")
        out = np.empty((p.n_subcarriers, s.n_azimuth,
                        s.n_elevation * s.symbols_per_dwell), dtype=complex)
        for ia in range(s.n_azimuth):
            for ie in range(s.n_elevation):
                k = ie * s.symbols_per_dwell
                out[:, ia, k:k + s.symbols_per_dwell] = self.block(ia, ie)
        return out


def synthesize_rx(geometry: ArrayGeometry, targets: list[SensingTarget],
                  schedule: ScanSchedule | None = None,
                  params: OfdmParams | None = None,
                  comm_weight_vec: np.ndarray | None = None,
                  power_split: float = 0.5,
                  noise_offset_db: float | None = -10.0,
                  seed: int = 0) -> SensingCube:
    """Simulate the received schedule for a set of point targets.

    Each dwell steers the sensing beam at its scheduled angle; when a
    communication weight is supplied the transmit weight is the
    power-split composite, otherwise the sensing beam alone.  Noise is
    additive complex Gaussian with variance ``noise_offset_db`` relative
    to the strongest per-symbol target power across the schedule
    (``None`` disables noise).
    """
    schedule = schedule or ScanSchedule()
    params = params or OfdmParams()
    for target in targets:
        if not 0.0 < target.range_m < params.max_range_m:
            raise ValueError("target range outside the unambiguous span")
        if abs(target.speed_mps) >= params.max_velocity_mps:
            raise ValueError("target speed outside the unambiguous span")
    steer = np.array([steering_vector(geometry, t.theta_deg, t.phi_deg)
                      for t in targets])
    gains = np.array([t.gain(params.wavelength_m) for t in targets])
    amps = np.zeros((schedule.n_azimuth, schedule.n_elevation,
                     len(targets)), dtype=complex)
    for ia, phi in enumerate(schedule.azimuth_deg if targets else ()):
        for ie, theta in enumerate(schedule.elevation_deg):
            w = sensing_weight(geometry, theta, phi)
            if comm_weight_vec is not None:
                w = (np.sqrt(power_split) * np.asarray(comm_weight_vec)
                     + np.sqrt(1.0 - power_split) * w)
            amps[ia, ie] = gains * (steer @ w)
    if noise_offset_db is None or not targets:
        noise_std = 0.0
    else:
        strongest = np.abs(amps).max()
        noise_std = strongest * 10.0 ** (noise_offset_db / 20.0)
    return SensingCube(params, schedule, amps, targets, noise_std, seed)


def range_doppler_map(cube: SensingCube, azimuth_index: int,
                      elevation_index: int) -> np.ndarray:
    """Power over (range bin, velocity bin) for one dwell.

    Inverse DFT across subcarriers extracts range, DFT across the dwell
    symbols extracts velocity; both are unitary so total power is
    preserved.  Range bin b maps to b * range_resolution; velocity bins
    fold around the unambiguous span (see :func:`velocity_axis_mps`).
    """
    block = cube.block(azimuth_index, elevation_index)
    profile = np.fft.ifft(block, axis=0, norm="ortho")
    image = np.fft.fft(profile, axis=1, norm="ortho")
    return np.abs(image) ** 2


def range_axis_m(cube: SensingCube) -> np.ndarray:
    return np.arange(cube.params.n_subcarriers) * cube.params.range_resolution_m


def velocity_axis_mps(cube: SensingCube) -> np.ndarray:
    """Physical velocity of each Doppler bin, folded to the +-max span."""
    n = cube.schedule.symbols_per_dwell
    bins = np.arange(n)
    bins = np.where(bins < (n + 1) // 2, bins, bins - n)
    return bins * cube.params.velocity_resolution_mps(n)


def detect_strongest(cube: SensingCube, azimuth_index: int,
                     elevation_index: int) -> tuple[float, float, int, int]:
    """(range_m, velocity_mps, range_bin, velocity_bin) of the peak cell."""
    power = range_doppler_map(cube, azimuth_index, elevation_index)
    r_bin, v_bin = np.unravel_index(int(power.argmax()), power.shape)
    return (float(range_axis_m(cube)[r_bin]),
            float(velocity_axis_mps(cube)[v_bin]), int(r_bin), int(v_bin))


@dataclass
class SensingImage:
    """Normalized per-angle power of one range-velocity cell."""

    theta_deg: np.ndarray
    phi_deg: np.ndarray
    power: np.ndarray  # (n_elevation, n_azimuth), peak 1


def angle_image(cube: SensingCube, range_bin: int, velocity_bin: int) -> SensingImage:
    """Scan-grid image of the detected cell, normalized to its peak.

    Only one DFT coefficient per dwell is needed, so each block is
    projected onto the matching range/velocity basis vectors instead of
    running the full transform pair.
    """
    p, s = cube.params, cube.schedule
    n = np.arange(p.n_subcarriers)
    d = np.arange(s.symbols_per_dwell)
    range_basis = np.exp(1j * TWO_PI * n * range_bin / p.n_subcarriers)
    doppler_basis = np.exp(-1j * TWO_PI * d * velocity_bin / s.symbols_per_dwell)
    scale = np.sqrt(p.n_subcarriers * s.symbols_per_dwell)
    power = np.empty((s.n_elevation, s.n_azimuth))
    for ia in range(s.n_azimuth):
        for ie in range(s.n_elevation):
            coeff = range_basis @ cube.block(ia, ie) @ doppler_basis / scale
            power[ie, ia] = np.abs(coeff) ** 2
    peak = power.max()
    if peak > 0:
        power = power / peak
    return SensingImage(np.asarray(s.elevation_deg, dtype=float),
                        np.asarray(s.azimuth_deg, dtype=float), power)


def resolve_two_targets(image: SensingImage, elevation_deg: float,
                        dip_db: float = 3.0) -> tuple[bool, list[tuple[float, float]]]:
    """Are two azimuth peaks separated by a deep enough valley?

    Takes the azimuth cut at the scheduled elevation nearest
    ``elevation_deg``, finds its local maxima, and reports True when the
    two strongest peaks enclose a valley at least ``dip_db`` below the
    lower peak.  Returns the peak list as (azimuth_deg, power) sorted by
    power, strongest first.
    """
    row_index = int(np.argmin(np.abs(image.theta_deg - elevation_deg)))
    cut = image.power[row_index]
    idx, _ = find_peaks(cut)
    peaks = sorted(((float(image.phi_deg[i]), float(cut[i])) for i in idx),
                   key=lambda p: -p[1])
    if len(peaks) < 2:
        return False, peaks
    (phi_a, p_a), (phi_b, p_b) = peaks[0], peaks[1]
    lo = int(np.argmin(np.abs(image.phi_deg - min(phi_a, phi_b))))
    hi = int(np.argmin(np.abs(image.phi_deg - max(phi_a, phi_b))))
    valley = cut[lo:hi + 1].min()
    lower = min(p_a, p_b)
    resolved = valley <= lower * 10.0 ** (-dip_db / 10.0)
    return bool(resolved), peaks
