"""Sparse tiled planar arrays for joint communication and sensing.

Design chain: maximum-entropy domino tiling of a half-wavelength grid,
sunflower-lattice thinning into widely spaced two-element subarrays, and
convex position refinement of the subarray centers against the expanded
beam pattern.  Evaluation chain: LOS/NLOS channels with body blockage,
multibeam spectral efficiency, and OFDM range-velocity-angle sensing.
"""

from .geometry import (
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
    save_geometry,
    sunflower_centers,
    sunflower_count_for_radius,
)
from .tiling import (
    AnnealConfig,
    EntropyScore,
    maximize_entropy_tiling,
    random_perfect_tiling,
    tiling_entropy,
)
from .pattern import (
    PatternGrid,
    PatternMetrics,
    array_factor,
    direction_grid,
    expanded_beam_pattern,
    extract_metrics,
    frequency_sweep_sll,
    main_beam_radius,
    ring_average,
    scanned_pattern,
)
from .sparsify import (
    OptTrace,
    PositionOptConfig,
    ThinningParams,
    linearized_field,
    min_cross_tile_distance,
    optimize_subarray_positions,
    select_tiles_by_sunflower,
    solve_position_subproblem,
)
from .channel import (
    BlockageScenario,
    ChannelRealization,
    PathParams,
    body_reflection_coeff,
    channel_normalization,
    compose_blockage_channel,
    direction_cosines,
    los_component,
    sample_nlos_channel,
    steering_vector,
    target_component,
)
from .link import (
    BlockageTimeline,
    JcasWeights,
    LinkScenario,
    SweepResult,
    average_spectral_efficiency,
    blockage_sweep,
    comm_weight,
    deviation_interval,
    multibeam,
    noise_power_for_snr,
    scan_sweep_se,
    scanned_beam_radius,
    sensing_weight,
    spectral_efficiency,
    tile_collapse,
)
from .sensing import (
    OfdmParams,
    ScanSchedule,
    SensingCube,
    SensingImage,
    SensingTarget,
    angle_image,
    detect_strongest,
    range_axis_m,
    range_doppler_map,
    resolve_two_targets,
    synthesize_rx,
    velocity_axis_mps,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
