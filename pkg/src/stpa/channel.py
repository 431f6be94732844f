"""Geometric mmWave channel pieces: steering, LOS, clustered scatter, blockage.

The downlink has a single-antenna user, so every channel component is a
length-N complex vector over the transmit elements.  Components compose
additively; a blocking body removes the LOS term and contributes a
reflected/diffracted path with its own range geometry.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .geometry import ArrayGeometry

SPEED_OF_LIGHT = 299_792_458.0
TWO_PI = 2.0 * np.pi


def direction_cosines(theta_deg: float, phi_deg: float) -> tuple[float, float]:
    """(u, v) for elevation theta (90 deg = boresight) and azimuth phi."""
    theta = np.radians(theta_deg)
    phi = np.radians(phi_deg)
    return float(np.cos(theta) * np.cos(phi)), float(np.cos(theta) * np.sin(phi))


def steering_vector(geometry: ArrayGeometry, theta_deg: float, phi_deg: float,
                    freq_ratio: float = 1.0) -> np.ndarray:
    """Per-element propagation phases toward one direction, modulus 1.

    Tiling never enters here: tiles constrain the weights an array may
    apply, not how a wavefront arrives at the elements.
    """
    u, v = direction_cosines(theta_deg, phi_deg)
    phase = TWO_PI * freq_ratio * (u * geometry.elements[:, 0]
                                   + v * geometry.elements[:, 1])
    return np.exp(1j * phase)


@dataclass
class PathParams:
    """One propagation path of the multipath channel.

    Angles are the departure direction at the array; the single-antenna
    receiver makes the arrival side scalar.  Delay and Doppler ride along
    for the sensing model; the narrowband link evaluation works at t = 0
    with the delay folded into the complex gain.
    """

    gain: complex
    delay_s: float = 0.0
    doppler_hz: float = 0.0
    theta_deg: float = 90.0
    phi_deg: float = 0.0


@dataclass
class ChannelRealization:
    """Composite channel with its separately retained components."""

    los: np.ndarray
    nlos: np.ndarray
    target: np.ndarray
    paths: list[PathParams] = field(default_factory=list)

    @property
    def h(self) -> np.ndarray:
        return self.los + self.nlos + self.target

    @property
    def n_elements(self) -> int:
        return len(self.los)


def los_component(geometry: ArrayGeometry, range_m: float, theta_deg: float,
                  phi_deg: float, wavelength_m: float) -> np.ndarray:
    """Line-of-sight vector: steering scaled by free-space gain and delay phase."""
    if range_m <= 0:
        raise ValueError("range must be positive")
    gain = (wavelength_m / (4.0 * np.pi * range_m)
            * np.exp(-1j * TWO_PI * range_m / wavelength_m))
    return gain * steering_vector(geometry, theta_deg, phi_deg)


def sample_nlos_channel(geometry: ArrayGeometry, los_power: float,
                        n_clusters: int = 8, n_rays: int = 10,
                        power_offset_db: float = -10.0,
                        ray_spread_deg: float = 5.0,
                        rng: np.random.Generator | None = None,
                        seed: int | None = None,
                        ) -> tuple[np.ndarray, list[PathParams]]:
    """Clustered scatter component with a fixed power offset from the LOS.

    Cluster centers are uniform over the visible hemisphere (elevation
    [0, 90] deg, azimuth [-180, 180) deg); each cluster carries equal
    power split over rays spread uniformly within +-ray_spread_deg of the
    center, with i.i.d. complex Gaussian ray gains.  The expected total
    power is ``los_power`` scaled by ``power_offset_db``.
    """
    if n_clusters < 1 or n_rays < 1:
        raise ValueError("need at least one cluster and one ray")
    if rng is None:
        rng = np.random.default_rng(seed)
    n_paths = n_clusters * n_rays
    ray_power = 10.0 ** (power_offset_db / 10.0) * los_power / (
        n_paths * geometry.n_elements)
    h = np.zeros(geometry.n_elements, dtype=complex)
    paths = []
    for _ in range(n_clusters):
        theta_c = rng.uniform(0.0, 90.0)
        phi_c = rng.uniform(-180.0, 180.0)
        for _ in range(n_rays):
            theta = float(np.clip(theta_c + rng.uniform(-ray_spread_deg,
                                                        ray_spread_deg), 0.0, 90.0))
            phi = phi_c + rng.uniform(-ray_spread_deg, ray_spread_deg)
            phi = float((phi + 180.0) % 360.0 - 180.0)
            gain = complex((rng.standard_normal() + 1j * rng.standard_normal())
                           * np.sqrt(ray_power / 2.0))
            h += gain * steering_vector(geometry, theta, phi)
            paths.append(PathParams(gain, theta_deg=theta, phi_deg=phi))
    return h, paths


def channel_normalization(los: np.ndarray, power_offset_db: float = -10.0) -> float:
    """Scale making the expected composite power equal the element count.

    With the scatter power a fixed offset below the LOS power, the
    expected squared norm of LOS + scatter is ||los||^2 (1 + offset), so
    one deterministic scale normalizes the ensemble.
    """
    n = len(los)
    total = np.vdot(los, los).real * (1.0 + 10.0 ** (power_offset_db / 10.0))
    if total <= 0:
        raise ValueError("LOS component must be nonzero")
    return float(np.sqrt(n / total))


def body_reflection_coeff(delta_deg: float, permittivity: complex = 0.1 - 2.33j,
                          deviation_db: float = 0.45,
                          rng: np.random.Generator | None = None) -> complex:
    """Reflection coefficient of a blocking body at grazing angle delta.

    The deterministic part is the Fresnel-style expression in the body
    permittivity; measurement spread is modeled as a zero-mean complex
    Gaussian whose standard deviation is the linear-amplitude equivalent
    of ``deviation_db`` (10^(dB/20) - 1).  Pass ``rng=None`` for the
    deterministic value.
    """
    if not 0.0 < delta_deg <= 90.0:
        raise ValueError("grazing angle must be in (0, 90] degrees")
    delta = np.radians(delta_deg)
    root = np.sqrt(permittivity - np.cos(delta) ** 2)
    num = permittivity * np.sin(delta) - root
    den = permittivity * np.sin(delta) + root
    value = num / den
    if rng is not None and deviation_db > 0.0:
        sigma = 10.0 ** (deviation_db / 20.0) - 1.0
        value = value + (rng.standard_normal()
                         + 1j * rng.standard_normal()) * sigma / np.sqrt(2.0)
    return complex(value)


def target_component(geometry: ArrayGeometry, theta_deg: float, phi_deg: float,
                     range_to_target_m: float, range_target_to_ue_m: float,
                     reflection: complex, wavelength_m: float) -> np.ndarray:
    """Body-scattered path: steering scaled by the two-hop range and reflection."""
    if range_to_target_m <= 0 or range_target_to_ue_m <= 0:
        raise ValueError("ranges must be positive")
    total = range_to_target_m + range_target_to_ue_m
    gain = (reflection * wavelength_m / (4.0 * np.pi * total)
            * np.exp(-1j * TWO_PI * total / wavelength_m))
    return gain * steering_vector(geometry, theta_deg, phi_deg)


@dataclass(frozen=True)
class BlockageScenario:
    """A body crossing the BS-UE line-of-sight on a perpendicular track.

    The body moves along the straight line that crosses the LOS path at
    distance ``crossing_range_m`` from the array, perpendicular to it, so
    its position is parameterized by the elevation ``theta_t`` under
    which the array sees it (azimuth equals the UE azimuth).
    """

    ue_range_m: float = 70.0
    ue_theta_deg: float = 70.0
    ue_phi_deg: float = 50.0
    crossing_range_m: float = 35.0
    permittivity: complex = 0.1 - 2.33j
    deviation_db: float = 0.45
    blocking_reflection: complex = 0.1
    carrier_hz: float = 28e9

    def __post_init__(self):
        if not 0 < self.crossing_range_m < self.ue_range_m:
            raise ValueError("crossing range must sit between array and UE")

    @property
    def wavelength_m(self) -> float:
        return SPEED_OF_LIGHT / self.carrier_hz

    def body_ranges(self, theta_t_deg: float) -> tuple[float, float]:
        """(array-to-body, body-to-UE) ranges for a body elevation angle.

        The body sits on the perpendicular track at transverse offset
        w = r_m tan(theta_t - theta_UE); both hop lengths follow from the
        right triangles against the LOS line.
        """
        offset = self.crossing_range_m * np.tan(
            np.radians(theta_t_deg - self.ue_theta_deg))
        to_body = float(np.hypot(self.crossing_range_m, offset))
        to_ue = float(np.hypot(self.ue_range_m - self.crossing_range_m, offset))
        return to_body, to_ue


def compose_blockage_channel(geometry: ArrayGeometry, scenario: BlockageScenario,
                             theta_t_deg: float, nlos: np.ndarray,
                             overlap: bool,
                             rng: np.random.Generator | None = None,
                             ) -> ChannelRealization:
    """Composite channel for one body position on the blockage track.

    Outside beam overlap the body adds a reflected path on top of LOS and
    scatter; during overlap it shadows the UE, so the LOS term vanishes
    and the body path carries the fixed through-blockage attenuation.
    The grazing angle on the body equals its elevation angle.
    """
    lam = scenario.wavelength_m
    to_body, to_ue = scenario.body_ranges(theta_t_deg)
    if overlap:
        reflection = scenario.blocking_reflection
        los = np.zeros(geometry.n_elements, dtype=complex)
    else:
        reflection = body_reflection_coeff(theta_t_deg, scenario.permittivity,
                                           scenario.deviation_db, rng)
        los = los_component(geometry, scenario.ue_range_m, scenario.ue_theta_deg,
                            scenario.ue_phi_deg, lam)
    target = target_component(geometry, theta_t_deg, scenario.ue_phi_deg,
                              to_body, to_ue, reflection, lam)
    path = PathParams(complex(reflection), delay_s=(to_body + to_ue) / SPEED_OF_LIGHT,
                      theta_deg=theta_t_deg, phi_deg=scenario.ue_phi_deg)
    return ChannelRealization(los=los, nlos=np.asarray(nlos, dtype=complex),
                              target=target, paths=[path])
