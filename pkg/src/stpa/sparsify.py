"""Sunflower thinning and minimax placement of rigid subarrays.

Thinning lays a sunflower (Vogel spiral) lattice over the tiled aperture
and keeps the dominoes that fall close to a lattice point, grouping the
survivors into rigid subarrays around the nearest point.  Placement then
nudges whole subarrays, a small fraction of a wavelength per iteration, to
depress the worst sidelobe of the expanded beam pattern while keeping
tiles of different subarrays a minimum distance apart.  Each step is a
small convex program: expanding the element phasors to first order in the
shifts makes the field affine, so the worst-sidelobe objective becomes an
epigraph minimax over second-order cones.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np
import cvxpy as cp

from .geometry import (
    GOLDEN_RATIO,
    DominoTiling,
    SubarrayLayout,
    sunflower_centers,
    sunflower_count_for_radius,
)
from .pattern import _field

TWO_PI = 2.0 * np.pi


@dataclass(frozen=True)
class ThinningParams:
    """Sunflower selection: which tiles survive and who they belong to."""

    capture_radius: float = 1.15
    pitch: float = 3.5
    angle_ratio: float = GOLDEN_RATIO
    rule: str = "phase_center"
    grouping: str = "cluster"

    def __post_init__(self):
        if self.capture_radius <= 0:
            raise ValueError("capture_radius must be positive")
        if self.pitch <= 0:
            raise ValueError("pitch must be positive")
        if self.rule not in ("phase_center", "footprint"):
            raise ValueError("rule must be 'phase_center' or 'footprint'")
        if self.grouping not in ("cluster", "tile"):
            raise ValueError("grouping must be 'cluster' or 'tile'")


def select_tiles_by_sunflower(tiling: DominoTiling,
                              params: ThinningParams | None = None,
                              design_frequency_hz: float = 28e9,
                              ) -> SubarrayLayout:
    """Keep the tiles near a sunflower lattice, grouped into rigid subarrays.

    The lattice is centered on the aperture centroid and extends one
    capture radius past the circle circumscribing the element grid.  A
    tile survives when its phase center (or, with rule="footprint", both
    of its elements) lies within ``capture_radius`` of some lattice point.
    Survivors join the subarray of the nearest lattice point -- exact ties
    go to the lower point index -- and points that capture nothing are
    dropped.

    With grouping="tile" every surviving domino becomes its own
    single-tile subarray instead, so the placement stage can move each
    one independently.  Selection is identical; only the rigid-motion
    granularity changes.
    """
    if params is None:
        params = ThinningParams()
    pos = tiling.grid.positions()
    centroid = pos.mean(axis=0)
    reach = float(np.hypot(*(pos.max(axis=0) - centroid))) + params.capture_radius
    count = sunflower_count_for_radius(params.pitch, reach)
    if count < 1:
        raise ValueError("sunflower pitch too coarse for this aperture")
    lattice = sunflower_centers(params.pitch, count, params.angle_ratio, centroid)

    centers = tiling.phase_centers()
    if params.rule == "phase_center":
        dist = np.hypot(centers[:, None, 0] - lattice[None, :, 0],
                        centers[:, None, 1] - lattice[None, :, 1])
    else:
        elem = pos[tiling.tiles]  # (T, 2, 2)
        dist = np.hypot(elem[:, :, None, 0] - lattice[None, None, :, 0],
                        elem[:, :, None, 1] - lattice[None, None, :, 1]).max(axis=1)
    kept = np.flatnonzero(dist.min(axis=1) <= params.capture_radius)
    if len(kept) == 0:
        raise ValueError("capture radius keeps no tiles; enlarge it")
    owner = dist[kept].argmin(axis=1)

    sub_centers, tile_offsets, element_offsets = [], [], []
    if params.grouping == "tile":
        for t in kept:
            sub_centers.append(centers[t])
            tile_offsets.append(np.zeros((1, 2)))
            element_offsets.append(pos[tiling.tiles[t]] - centers[t])
    else:
        for s in np.unique(owner):
            members = kept[owner == s]
            sub_centers.append(lattice[s])
            tile_offsets.append(centers[members] - lattice[s])
            element_offsets.append(pos[tiling.tiles[members].ravel()] - lattice[s])
    return SubarrayLayout(np.array(sub_centers), tile_offsets, element_offsets,
                          design_frequency_hz)


@dataclass(frozen=True)
class PositionOptConfig:
    """Knobs for the iterative minimax placement loop."""

    expansion: float = 1.5
    beam_exclusion_radius: float = 0.043
    max_step: float = 1.0 / 25.0
    min_tile_distance: float = 1.0
    max_iterations: int = 50
    angle_step: float = 1.0
    theta_range: tuple[float, float] = (0.0, 90.0)
    phi_range: tuple[float, float] = (-180.0, 180.0)
    tolerance_db: float = 0.02
    active_margin_db: float = 6.0
    max_active_samples: int = 8000
    solver: str = "CLARABEL"
    guard_expansion: float | None = None
    guard_margin_db: float = 2.0

    def __post_init__(self):
        if self.max_step < 0:
            raise ValueError("max_step must not be negative")
        if self.beam_exclusion_radius <= 0:
            raise ValueError("beam_exclusion_radius must be positive")
        if self.angle_step <= 0:
            raise ValueError("angle_step must be positive")
        if self.min_tile_distance <= 0:
            raise ValueError("min_tile_distance must be positive")
        if self.guard_expansion is not None and self.guard_expansion <= self.expansion:
            raise ValueError("guard_expansion must exceed expansion")


@dataclass
class OptTrace:
    """Per-iteration record of the placement loop.

    ``gamma_db`` is the linearized worst-sidelobe objective returned by
    each subproblem; ``exact_sll_db`` is the worst sidelobe of the exact
    pattern after applying that iteration's shifts; ``shifts`` keeps the
    applied (dx, dy) per subarray.
    """

    gamma_db: list[float] = field(default_factory=list)
    exact_sll_db: list[float] = field(default_factory=list)
    shifts: list[np.ndarray] = field(default_factory=list)
    min_distance: list[float] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.gamma_db)


def linearized_field(layout: SubarrayLayout, shifts: np.ndarray,
                     expansion: float, u_tilde, v_tilde):
    """First-order model of the expanded field under per-subarray shifts.

    Every element of subarray s shares that subarray's (dx, dy); the
    element phasors are expanded to first order around the current
    positions, so the result is exact at zero shift and equals 1 at the
    origin regardless of the shifts.
    """
    shifts = np.asarray(shifts, dtype=float)
    if shifts.shape != (layout.n_subarrays, 2):
        raise ValueError("shifts must be (S, 2)")
    u = np.asarray(u_tilde, dtype=float)
    v = np.asarray(v_tilde, dtype=float)
    k_eff = TWO_PI * expansion
    total = 0.0 + 0.0j
    for s in range(layout.n_subarrays):
        pos = layout.centers[s] + layout.element_offsets[s]
        phase = np.multiply.outer(u, pos[:, 0]) + np.multiply.outer(v, pos[:, 1])
        base = np.exp(1j * k_eff * phase).sum(axis=-1)
        total = total + base * (1.0 + 1j * k_eff * (u * shifts[s, 0] + v * shifts[s, 1]))
    return total / layout.n_elements


def _partial_sums(layout: SubarrayLayout, uv: np.ndarray, k_eff: float) -> np.ndarray:
    """(M, S) per-subarray element-phasor sums over the sample set, /N."""
    out = np.empty((len(uv), layout.n_subarrays), dtype=complex)
    for s in range(layout.n_subarrays):
        pos = layout.centers[s] + layout.element_offsets[s]
        phase = np.multiply.outer(uv[:, 0], pos[:, 0]) + np.multiply.outer(uv[:, 1], pos[:, 1])
        out[:, s] = np.exp(1j * k_eff * phase).sum(axis=1)
    return out / layout.n_elements


def _cross_tile_pairs(layout: SubarrayLayout):
    """Tile positions, owning-subarray labels and the cross-pair mask."""
    tiles = layout.tile_positions()
    labels = np.concatenate([np.full(len(t), s, dtype=int)
                             for s, t in enumerate(layout.tile_offsets)])
    return tiles, labels


def min_cross_tile_distance(layout: SubarrayLayout) -> float:
    """Smallest tile phase-center distance across different subarrays."""
    tiles, labels = _cross_tile_pairs(layout)
    dist = np.hypot(tiles[:, None, 0] - tiles[None, :, 0],
                    tiles[:, None, 1] - tiles[None, :, 1])
    cross = labels[:, None] != labels[None, :]
    if not cross.any():
        raise ValueError("need at least two subarrays")
    return float(dist[cross].min())


def _distance_rows(layout: SubarrayLayout, config: PositionOptConfig):
    """Linearized separation constraints for endangered cross-subarray pairs.

    Pairs already far enough apart that one bounded step cannot bring
    them below the limit are skipped.  Pairs currently below the limit
    get a relaxed right-hand side that ratchets toward it by one step
    bound per iteration, which keeps every subproblem feasible.
    """
    tiles, labels = _cross_tile_pairs(layout)
    diff = tiles[:, None, :] - tiles[None, :, :]
    dist = np.hypot(diff[..., 0], diff[..., 1])
    reach = 2.0 * np.sqrt(2.0) * config.max_step
    risky = ((labels[:, None] < labels[None, :]) &
             (dist < config.min_tile_distance + reach + 1e-9))
    a, b = np.nonzero(risky)
    if len(a) == 0:
        return a, b, np.empty((0, 2)), np.empty(0), np.empty(0)
    d = dist[a, b]
    unit = diff[a, b] / d[:, None]
    # Pairs below the limit ratchet toward it proportionally: a fixed
    # increment can be jointly infeasible inside a dense clump, where
    # bounded shifts only buy distance in proportion to the separation.
    need = np.minimum(config.min_tile_distance, d * (1.0 + config.max_step / 2.0))
    return labels[a], labels[b], unit, d, need


def solve_position_subproblem(layout: SubarrayLayout, config: PositionOptConfig,
                              sidelobe_set,
                              margins_db=None) -> tuple[np.ndarray, float]:
    """One linearized minimax step: best bounded shifts at the current point.

    Minimizes the epigraph bound gamma on the linearized field modulus
    over the sidelobe samples, subject to per-axis shift bounds and the
    linearized cross-subarray separation rows.  The origin constraint
    (real part of the field equal to 1) holds identically in this model,
    since the first-order correction vanishes at (0, 0).  ``margins_db``
    optionally loosens individual samples: sample i must stay below
    gamma ** 10^(margins_db[i]/20) instead of gamma itself.  Returns the
    (S, 2) shifts and the achieved gamma (linear amplitude).
    """
    uv = np.asarray(sidelobe_set, dtype=float).reshape(-1, 2)
    if len(uv) == 0:
        raise ValueError("sidelobe sample set is empty")
    k_eff = TWO_PI * config.expansion
    base = _partial_sums(layout, uv, k_eff)
    coef_x = 1j * k_eff * uv[:, :1] * base
    coef_y = 1j * k_eff * uv[:, 1:] * base

    shift = cp.Variable((layout.n_subarrays, 2))
    gamma = cp.Variable(nonneg=True)
    fields = base.sum(axis=1) + coef_x @ shift[:, 0] + coef_y @ shift[:, 1]
    if margins_db is None:
        cap = gamma
    else:
        allow = 10.0 ** (np.asarray(margins_db, dtype=float).ravel() / 20.0)
        if len(allow) != len(uv):
            raise ValueError("margins_db must align with sidelobe_set")
        cap = cp.multiply(allow, cp.promote(gamma, allow.shape))
    constraints = [cp.abs(fields) <= cap,
                   cp.abs(shift) <= config.max_step]
    sub_a, sub_b, unit, d, need = _distance_rows(layout, config)
    if len(sub_a):
        gain = cp.sum(cp.multiply(unit, shift[sub_a] - shift[sub_b]), axis=1)
        constraints.append(d + gain >= need)
    problem = cp.Problem(cp.Minimize(gamma), constraints)
    problem.solve(solver=config.solver)
    if problem.status not in (cp.OPTIMAL, cp.OPTIMAL_INACCURATE) and len(sub_a):
        # Degenerate clump geometries can make the hard separation rows
        # mutually unsatisfiable for one step; retry with penalized slack
        # so the loop keeps prying the offenders apart.
        slack = cp.Variable(len(sub_a), nonneg=True)
        constraints[-1] = d + gain + slack >= need
        problem = cp.Problem(cp.Minimize(gamma + 10.0 * cp.sum(slack)),
                             constraints)
        problem.solve(solver=config.solver)
    if problem.status not in (cp.OPTIMAL, cp.OPTIMAL_INACCURATE):
        raise RuntimeError(f"placement subproblem failed: status {problem.status}")
    return np.asarray(shift.value, dtype=float), float(gamma.value)


def _sidelobe_samples(config: PositionOptConfig) -> np.ndarray:
    """Deduplicated (u, v) sweep samples outside the protected beam disc."""
    t0, t1 = config.theta_range
    p0, p1 = config.phi_range
    theta = np.radians(np.arange(t0, t1 + 1e-9, config.angle_step))
    phi = np.radians(np.arange(p0, p1 - 1e-9, config.angle_step))
    cos_t = np.cos(theta)
    u = np.multiply.outer(cos_t, np.cos(phi)).ravel()
    v = np.multiply.outer(cos_t, np.sin(phi)).ravel()
    uv = np.unique(np.round(np.column_stack([u, v]), 12), axis=0)
    keep = uv[:, 0] ** 2 + uv[:, 1] ** 2 >= config.beam_exclusion_radius ** 2
    return uv[keep]


def _guard_samples(config: PositionOptConfig) -> np.ndarray:
    """Polar samples on the guard annulus, in design-expansion units.

    The linearized field depends only on expansion*(u, v), so spatial
    frequencies beyond the design band are reached by sample radii larger
    than one.  A fixed radial step keeps the half-wavelength-lattice
    coherence peaks (width about 1/(2*pi*subarray radius)) from slipping
    between samples.
    """
    ratio = config.guard_expansion / config.expansion
    step = 0.03 / config.expansion
    radii = np.arange(1.0 + step, ratio + step / 2, step)
    azimuth = np.radians(np.arange(-180.0, 180.0, 0.75))
    r, az = np.meshgrid(radii, azimuth, indexing="ij")
    return np.column_stack([(r * np.cos(az)).ravel(), (r * np.sin(az)).ravel()])


def _sample_plan(config: PositionOptConfig):
    """Constraint samples plus per-sample margins; margins None without guard."""
    uv = _sidelobe_samples(config)
    if config.guard_expansion is None:
        return uv, None, len(uv)
    guard = _guard_samples(config)
    margins = np.concatenate([np.zeros(len(uv)),
                              np.full(len(guard), config.guard_margin_db)])
    return np.vstack([uv, guard]), margins, len(uv)


def _exact_power(layout: SubarrayLayout, uv: np.ndarray, k_eff: float) -> np.ndarray:
    weights = np.ones(layout.n_elements)
    f = _field(layout.element_positions(), weights, uv[:, 0], uv[:, 1], k_eff)
    return np.abs(f) ** 2


def _active_subset(power: np.ndarray,
                   config: PositionOptConfig) -> np.ndarray:
    """Indices within the margin of the current worst sidelobe, capped."""
    floor = power.max() * 10.0 ** (-config.active_margin_db / 10.0)
    idx = np.flatnonzero(power >= floor)
    if len(idx) > config.max_active_samples:
        order = np.argsort(power[idx])[::-1]
        idx = idx[order[:config.max_active_samples]]
    return idx


def optimize_subarray_positions(layout: SubarrayLayout,
                                config: PositionOptConfig | None = None,
                                ) -> tuple[SubarrayLayout, OptTrace]:
    """Iteratively nudge subarrays to depress the worst expanded sidelobe.

    Each pass evaluates the exact pattern on the angle sweep, collects the
    samples near the current worst sidelobe, solves the linearized
    subproblem and applies the shifts.  The loop stops once the objective
    improvement falls below ``tolerance_db`` -- but never while some
    cross-subarray tile pair is still closer than ``min_tile_distance`` --
    or at ``max_iterations``.  The exact final geometry is then verified
    against the separation limit and repaired with a tightened re-solve
    if the linearization let it slip.
    """
    if config is None:
        config = PositionOptConfig()
    if layout.n_subarrays < 2:
        raise ValueError("placement needs at least two subarrays")
    uv, margins, n_design = _sample_plan(config)
    k_eff = TWO_PI * config.expansion
    deweight = 1.0 if margins is None else 10.0 ** (-margins / 10.0)
    trace = OptTrace()
    power = _exact_power(layout, uv, k_eff)
    previous_obj_db = np.inf
    best_obj_db = np.inf
    best_layout = layout
    for _ in range(config.max_iterations):
        active = _active_subset(power * deweight, config)
        shifts, gamma = solve_position_subproblem(
            layout, config, uv[active],
            None if margins is None else margins[active])
        layout = layout.shifted(shifts)
        power = _exact_power(layout, uv, k_eff)
        gamma_db = 20.0 * np.log10(max(gamma, 1e-300))
        trace.gamma_db.append(gamma_db)
        trace.exact_sll_db.append(float(10.0 * np.log10(power[:n_design].max())))
        trace.shifts.append(shifts)
        current_distance = min_cross_tile_distance(layout)
        trace.min_distance.append(current_distance)
        separated = current_distance >= config.min_tile_distance - 1e-6
        # Without a guard band the linear model tracks the pattern closely
        # and the solver bound is the cheapest stopping signal; with one,
        # high-frequency samples make that bound optimistic, so stall
        # detection must watch the exact margin-weighted worst sample.
        if margins is None:
            objective_db = gamma_db
        else:
            objective_db = float(10.0 * np.log10((power * deweight).max()))
        if separated and objective_db < best_obj_db:
            best_obj_db = objective_db
            best_layout = layout
        if separated and previous_obj_db - objective_db < config.tolerance_db:
            break
        previous_obj_db = objective_db
    if np.isfinite(best_obj_db):
        layout = best_layout
    layout = _repair_separation(layout, config, uv, margins)
    return layout, trace


def _repair_separation(layout: SubarrayLayout, config: PositionOptConfig,
                       uv: np.ndarray, margins=None) -> SubarrayLayout:
    """Re-solve with a tightened margin until the exact separation holds."""
    k_eff = TWO_PI * config.expansion
    deweight = 1.0 if margins is None else 10.0 ** (-margins / 10.0)
    for _ in range(5):
        gap = config.min_tile_distance - min_cross_tile_distance(layout)
        if gap <= 1e-6:
            return layout
        tightened = replace(config,
                            min_tile_distance=config.min_tile_distance + gap + 1e-6)
        power = _exact_power(layout, uv, k_eff)
        active = _active_subset(power * deweight, config)
        shifts, _ = solve_position_subproblem(
            layout, tightened, uv[active],
            None if margins is None else margins[active])
        layout = layout.shifted(shifts)
    raise RuntimeError("could not restore the minimum tile separation")
