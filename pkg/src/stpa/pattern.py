"""Radiation patterns in direction-cosine space and their sidelobe metrics.

Directions use u = cos(theta)*cos(phi), v = cos(theta)*sin(phi) with theta
the elevation above the array plane, so boresight (theta = 90 deg) maps to
(u, v) = (0, 0) and the visible region is the closed unit disc.  Positions
are in wavelengths at the design frequency, hence the wavenumber is 2*pi
times the evaluated-to-design frequency ratio.

The expanded beam pattern (EBP) compresses every scan direction into one
pattern: evaluating the unweighted aperture at an inflated wavenumber
expansion * k covers the worst-case separation between observation and scan
direction cosines, with expansion = 1 + cos(theta_min) for a minimum scan
elevation theta_min.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable

import numpy as np

from .geometry import ArrayGeometry

TWO_PI = 2.0 * np.pi


@lru_cache(maxsize=8)
def _direction_samples(step_deg: float) -> tuple[np.ndarray, np.ndarray]:
    """Deduplicated (u, v) samples of the theta/phi sweep at a given step."""
    theta = np.deg2rad(np.arange(0.0, 90.0 + 0.5 * step_deg, step_deg))
    phi = np.deg2rad(np.arange(-180.0, 180.0, step_deg))
    ct = np.cos(theta)
    u = np.outer(ct, np.cos(phi)).ravel()
    v = np.outer(ct, np.sin(phi)).ravel()
    pairs = np.unique(np.round(np.column_stack([u, v]), 12), axis=0)
    return pairs[:, 0].copy(), pairs[:, 1].copy()


def direction_grid(step_deg: float = 1.0) -> tuple[np.ndarray, np.ndarray]:
    """(u, v) arrays for the elevation/azimuth sweep, duplicates removed."""
    u, v = _direction_samples(float(step_deg))
    return u.copy(), v.copy()


def _field(positions: np.ndarray, weights: np.ndarray, u: np.ndarray,
           v: np.ndarray, wavenumber: float) -> np.ndarray:
    """Weighted far-field sum (1/N) * sum_n w_n exp(j*k*(u*x_n + v*y_n))."""
    u = np.atleast_1d(np.asarray(u, dtype=float))
    v = np.atleast_1d(np.asarray(v, dtype=float))
    n = len(positions)
    out = np.empty(len(u), dtype=complex)
    chunk = max(1, 4_000_000 // max(n, 1))
    for lo in range(0, len(u), chunk):
        hi = min(lo + chunk, len(u))
        phase = u[lo:hi, None] * positions[None, :, 0] \
            + v[lo:hi, None] * positions[None, :, 1]
        out[lo:hi] = np.exp(1j * wavenumber * phase) @ weights
    return out / n


def expand_tile_weights(geometry: ArrayGeometry,
                        tile_weights: np.ndarray) -> np.ndarray:
    """Per-element weights from per-tile weights (one shifter per tile)."""
    tile_weights = np.asarray(tile_weights)
    if len(tile_weights) != geometry.n_tiles:
        raise ValueError("need exactly one weight per tile")
    return tile_weights[geometry.tile_of_element]


def array_factor(geometry: ArrayGeometry, tile_weights: np.ndarray,
                 u, v, freq_ratio: float = 1.0) -> np.ndarray:
    """Complex array factor with tile-constant excitation."""
    w = expand_tile_weights(geometry, tile_weights)
    return _field(geometry.elements, w, u, v, TWO_PI * freq_ratio)


@dataclass
class PatternGrid:
    """Scattered power samples of one pattern over direction-cosine space.

    ``values`` are peak-normalized power (1 at the steering point).  The
    optional ``evaluate`` closure recomputes normalized power at arbitrary
    (u, v) and is used for fine radial searches; it is dropped on export.
    """

    u: np.ndarray
    v: np.ndarray
    values: np.ndarray
    expansion: float = 1.0
    freq_ratio: float = 1.0
    steering: tuple[float, float] = (0.0, 0.0)
    evaluate: Callable | None = field(default=None, repr=False, compare=False)


@dataclass(frozen=True)
class PatternMetrics:
    """Summary numbers extracted from one pattern."""

    max_sll_db: float
    beamwidth_radius: float
    expansion: float
    freq_ratio: float
    exclusion_radius: float


def expanded_beam_pattern(geometry: ArrayGeometry, expansion: float = 1.5,
                          freq_ratio: float = 1.0,
                          step_deg: float = 1.0) -> PatternGrid:
    """EBP of an aperture: unweighted element sum at wavenumber expansion*k."""
    if expansion <= 0:
        raise ValueError("expansion must be positive")
    if freq_ratio < 1.0:
        raise ValueError("frequency ratio below the design frequency")
    positions = geometry.elements
    n = geometry.n_elements
    wavenumber = TWO_PI * freq_ratio * expansion
    ones = np.ones(n)

    def evaluate(u, v):
        return np.abs(_field(positions, ones, u, v, wavenumber)) ** 2

    u, v = _direction_samples(float(step_deg))
    return PatternGrid(u, v, evaluate(u, v), expansion=expansion, freq_ratio=freq_ratio,
                       steering=(0.0, 0.0), evaluate=evaluate)


def scanned_pattern(geometry: ArrayGeometry, scan: tuple[float, float],
                    freq_ratio: float = 1.0,
                    step_deg: float = 1.0) -> PatternGrid:
    """True scanned pattern with conventional per-tile phasing.

    Phase shifts are computed at the tile phase centers, so tiling residuals
    (elements sharing a shifter) are part of the result.  Values are
    normalized to the power at the scan direction.
    """
    us, vs = float(scan[0]), float(scan[1])
    if us * us + vs * vs > 1.0 + 1e-12:
        raise ValueError("scan direction outside the visible region")
    wavenumber = TWO_PI * freq_ratio
    centers = geometry.phase_centers
    tile_w = np.exp(-1j * wavenumber * (us * centers[:, 0] + vs * centers[:, 1]))
    w = expand_tile_weights(geometry, tile_w)
    positions = geometry.elements
    peak = np.abs(_field(positions, w, us, vs, wavenumber)[0]) ** 2

    def evaluate(u, v):
        return np.abs(_field(positions, w, u, v, wavenumber)) ** 2 / peak

    u, v = _direction_samples(float(step_deg))
    return PatternGrid(u, v, evaluate(u, v), expansion=1.0, freq_ratio=freq_ratio,
                       steering=(us, vs), evaluate=evaluate)


def ring_average(evaluate: Callable, center: tuple[float, float],
                 radius: float, n_azimuth: int = 64) -> float:
    """Mean normalized power on a circle around the pattern peak."""
    az = np.linspace(0.0, TWO_PI, n_azimuth, endpoint=False)
    u = center[0] + radius * np.cos(az)
    v = center[1] + radius * np.sin(az)
    return float(np.mean(evaluate(u, v)))


def main_beam_radius(evaluate: Callable, center: tuple[float, float] = (0.0, 0.0),
                     step: float = 0.002, r_max: float = 1.0,
                     n_azimuth: int = 64) -> float:
    """Radius of the main beam: first minimum of the ring-averaged power.

    Marches outward from the peak and returns the radius where the
    ring-averaged power first turns upward after having fallen below half
    power.  If no such minimum exists within ``r_max``, falls back to twice
    the half-power radius.
    """
    radii = np.arange(step, r_max + step, step)
    previous = 1.0
    half_power_radius = None
    below_half = False
    for r in radii:
        value = ring_average(evaluate, center, r, n_azimuth)
        if half_power_radius is None and value < 0.5:
            half_power_radius = r
            below_half = True
        if below_half and value > previous:
            return float(r - step)
        previous = value
    if half_power_radius is not None:
        return float(min(2.0 * half_power_radius, r_max))
    raise ValueError("pattern never drops below half power inside r_max")


def extract_metrics(pattern: PatternGrid,
                    exclusion_radius: float | None = None) -> PatternMetrics:
    """Max sidelobe level and beamwidth of a peak-normalized pattern.

    The sidelobe search runs over the pattern's own samples outside the
    exclusion disc around the steering point.  When no exclusion radius is
    given, the main-beam radius (first radial null) is measured and used.
    """
    center = pattern.steering
    if exclusion_radius is None:
        if pattern.evaluate is None:
            raise ValueError("need an evaluator to measure the beamwidth")
        exclusion_radius = main_beam_radius(pattern.evaluate, center)
    beamwidth = exclusion_radius
    dist = np.hypot(pattern.u - center[0], pattern.v - center[1])
    outside = dist > exclusion_radius
    if not outside.any():
        raise ValueError("exclusion disc covers the entire pattern grid")
    max_sll = float(pattern.values[outside].max())
    return PatternMetrics(max_sll_db=10.0 * np.log10(max_sll),
                          beamwidth_radius=float(beamwidth),
                          expansion=pattern.expansion, freq_ratio=pattern.freq_ratio,
                          exclusion_radius=float(exclusion_radius))


def frequency_sweep_sll(geometry: ArrayGeometry, ratios, expansion: float = 2.0,
                        step_deg: float = 1.0) -> list[tuple[float, float]]:
    """Max EBP sidelobe level at each frequency ratio (>= 1) in ``ratios``."""
    out = []
    for ratio in ratios:
        if ratio < 1.0:
            raise ValueError("frequency ratios must be >= 1")
        ebp = expanded_beam_pattern(geometry, expansion=expansion, freq_ratio=ratio,
                                    step_deg=step_deg)
        metrics = extract_metrics(ebp)
        out.append((float(ratio), metrics.max_sll_db))
    return out
