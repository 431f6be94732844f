"""Command-line workbench: config-driven runs of the design/simulation stages.

One JSON config document drives everything; ``--set dotted.key=value``
overrides individual entries.  Randomness derives from a single master
seed through named per-stage streams, so adding a stage never shifts the
draws of another.  Every artifact embeds the effective-config hash, the
seeds, and the package version.
"""

from __future__ import annotations

import argparse
import copy
import hashlib
import json
import sys
import zlib
from pathlib import Path

import numpy as np

from . import __version__
from .channel import BlockageScenario
from .geometry import (
    ArrayGeometry,
    DominoTiling,
    ElementGrid,
    geometry_from_tiling,
    layout_from_geometry,
    load_geometry,
    save_geometry,
)
from .link import (
    LinkScenario,
    average_spectral_efficiency,
    blockage_sweep,
    comm_weight,
    deviation_interval,
    scan_sweep_se,
    scanned_beam_radius,
    _normalized_los,
)
from .pattern import expanded_beam_pattern, extract_metrics
from .sensing import (
    OfdmParams,
    ScanSchedule,
    SensingTarget,
    angle_image,
    detect_strongest,
    range_axis_m,
    range_doppler_map,
    resolve_two_targets,
    synthesize_rx,
    velocity_axis_mps,
)
from .sparsify import (
    PositionOptConfig,
    ThinningParams,
    optimize_subarray_positions,
    select_tiles_by_sunflower,
)
from .tiling import AnnealConfig, maximize_entropy_tiling

DEFAULT_CONFIG = {
    "master_seed": 0,
    "design_frequency_hz": 28e9,
    "grid": {"nx": 30, "ny": 30, "spacing": 0.5},
    "anneal": {"iterations": 200_000, "initial_temperature": 0.5,
               "cooling": 0.99996},
    "thinning": {"capture_radius": 1.15, "pitch": 3.5, "angle_ratio": 1.618,
                 "rule": "phase_center", "grouping": "tile"},
    "placement": {"expansion": 1.5, "beam_exclusion_radius": 0.043,
                  "max_step": 0.04, "min_tile_distance": 1.0,
                  "max_iterations": 50, "angle_step": 1.0,
                  "tolerance_db": 0.02},
    "pattern": {"expansion": 1.5, "freq_ratio": 1.0, "step_deg": 1.0},
    "comm": {
        "ue_theta_deg": 70.0, "ue_phi_deg": 50.0, "ue_range_m": 50.0,
        "snr_db_values": [0.0, 5.0, 10.0, 15.0, 20.0],
        "n_realizations": 200, "power_split": 0.5, "snr_db": 10.0,
        "scan_axis": "azimuth", "scan_offset_max_deg": 40.0,
        "scan_offset_step_deg": 2.5,
        "blockage": {"ue_range_m": 70.0, "crossing_range_m": 35.0,
                     "theta_start_deg": 50.0, "theta_stop_deg": 90.0,
                     "theta_step_deg": 0.5, "n_realizations": 200},
    },
    "sensing": {
        "targets": [
            {"range_m": 70.0, "speed_mps": 20.0, "theta_deg": 70.0, "phi_deg": 0.0},
            {"range_m": 70.0, "speed_mps": 20.0, "theta_deg": 70.0, "phi_deg": 20.0},
        ],
        "azimuth_min_deg": -180, "azimuth_max_deg": 180, "angle_step_deg": 5,
        "noise_offset_db": -10.0, "power_split": 0.5,
        "resolve_elevation_deg": 70.0,
    },
}


def merge_config(base: dict, override: dict) -> dict:
    out = copy.deepcopy(base)
    for key, value in override.items():
        if isinstance(value, dict) and isinstance(out.get(key), dict):
            out[key] = merge_config(out[key], value)
        else:
            out[key] = value
    return out


def apply_set(config: dict, assignment: str) -> None:
    """Apply one ``dotted.path=json_value`` override in place."""
    if "=" not in assignment:
        raise SystemExit(f"--set needs key=value, got {assignment!r}")
    path, raw = assignment.split("=", 1)
    try:
        value = json.loads(raw)
    except json.JSONDecodeError:
        value = raw
    keys = path.split(".")
    node = config
    for key in keys[:-1]:
        node = node.setdefault(key, {})
    node[keys[-1]] = value


def config_hash(config: dict) -> str:
    canonical = json.dumps(config, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode()).hexdigest()[:16]


def stage_seed(master: int, stage: str) -> int:
    """Named substream: stable per stage name, independent of stage order."""
    child = np.random.SeedSequence([int(master), zlib.crc32(stage.encode())])
    return int(child.generate_state(1, dtype=np.uint64)[0])


def _meta(config: dict, stage: str) -> dict:
    return {"stage": stage, "config_hash": config_hash(config),
            "master_seed": config["master_seed"],
            "stage_seed": stage_seed(config["master_seed"], stage),
            "version": __version__}


def write_json(path: Path, payload: dict) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as fh:
        json.dump(payload, fh, sort_keys=True, indent=1)
        fh.write("\n")


def write_csv(path: Path, header: str, rows) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as fh:
        fh.write(header + "\n")
        for row in rows:
            fh.write(",".join("%.10g" % x for x in row) + "\n")


def stage_tile(config: dict, out_dir: Path) -> Path:
    grid_cfg = config["grid"]
    grid = ElementGrid(grid_cfg["nx"], grid_cfg["ny"], grid_cfg["spacing"])
    anneal = AnnealConfig(**config["anneal"])
    seed = stage_seed(config["master_seed"], "tile")
    tiling, score = maximize_entropy_tiling(grid, anneal, seed=seed)
    geometry = geometry_from_tiling(tiling, config["design_frequency_hz"])
    path = out_dir / "tiled_geometry.json"
    meta = _meta(config, "tile")
    meta["grid"] = grid_cfg
    meta["entropy_nats"] = score.total
    save_geometry(geometry, str(path), meta)
    print(f"tile: {tiling.n_tiles} dominoes, entropy {score.total:.4f} -> {path}")
    return path


def _load_with_meta(path: Path) -> tuple[ArrayGeometry, dict]:
    geometry = load_geometry(str(path))
    with open(path) as fh:
        meta = json.load(fh).get("_meta", {})
    return geometry, meta


def stage_sparsify(config: dict, tiled_path: Path, out_dir: Path) -> Path:
    geometry, meta = _load_with_meta(tiled_path)
    grid_cfg = meta.get("grid", config["grid"])
    grid = ElementGrid(grid_cfg["nx"], grid_cfg["ny"], grid_cfg["spacing"])
    tiling = DominoTiling(grid, np.array([list(t) for t in geometry.tiles]))
    params = ThinningParams(**config["thinning"])
    layout = select_tiles_by_sunflower(tiling, params,
                                       config["design_frequency_hz"])
    path = out_dir / "thinned_geometry.json"
    meta_out = _meta(config, "sparsify")
    meta_out["grid"] = grid_cfg
    meta_out["subarray_centers"] = layout.centers.tolist()
    save_geometry(layout.to_geometry(), str(path), meta_out)
    print(f"sparsify: kept {layout.n_tiles} tiles in {layout.n_subarrays} "
          f"subarrays -> {path}")
    return path


def stage_optimize(config: dict, thinned_path: Path, out_dir: Path) -> Path:
    geometry, meta = _load_with_meta(thinned_path)
    centers = np.array(meta["subarray_centers"])
    layout = layout_from_geometry(geometry, centers)
    opt_config = PositionOptConfig(**config["placement"])
    final, trace = optimize_subarray_positions(layout, opt_config)
    path = out_dir / "optimized_geometry.json"
    meta_out = _meta(config, "optimize")
    meta_out["subarray_centers"] = final.centers.tolist()
    meta_out["final_sll_db"] = trace.exact_sll_db[-1]
    save_geometry(final.to_geometry(), str(path), meta_out)
    trace_path = out_dir / "optimize_trace.csv"
    write_csv(trace_path, "iteration,gamma_db,exact_sll_db",
              [(i + 1, g, e) for i, (g, e) in
               enumerate(zip(trace.gamma_db, trace.exact_sll_db))])
    print(f"optimize: {len(trace)} iterations, final SLL "
          f"{trace.exact_sll_db[-1]:.2f} dB -> {path}")
    return path


def stage_pattern(config: dict, geometry_path: Path, out_dir: Path) -> Path:
    geometry, _ = _load_with_meta(geometry_path)
    pat_cfg = config["pattern"]
    pattern = expanded_beam_pattern(geometry, pat_cfg["expansion"],
                                    pat_cfg["freq_ratio"], pat_cfg["step_deg"])
    metrics = extract_metrics(pattern)
    grid_path = out_dir / "pattern_grid.csv"
    power_db = 10.0 * np.log10(np.maximum(pattern.values, 1e-300))
    write_csv(grid_path, "u_tilde,v_tilde,power_db",
              zip(pattern.u, pattern.v, power_db))
    metrics_path = out_dir / "pattern_metrics.json"
    payload = {"max_sll_db": metrics.max_sll_db,
               "beamwidth_radius": metrics.beamwidth_radius,
               "expansion": metrics.expansion,
               "freq_ratio": metrics.freq_ratio,
               "_meta": _meta(config, "pattern")}
    write_json(metrics_path, payload)
    print(f"pattern: max SLL {metrics.max_sll_db:.2f} dB, beam radius "
          f"{metrics.beamwidth_radius:.4f} -> {metrics_path}")
    return metrics_path


def stage_simulate_comm(config: dict, geometry_path: Path, out_dir: Path,
                        reference_path: Path | None = None) -> Path:
    geometry, _ = _load_with_meta(geometry_path)
    comm_cfg = config["comm"]
    scenario = LinkScenario(ue_theta_deg=comm_cfg["ue_theta_deg"],
                            ue_phi_deg=comm_cfg["ue_phi_deg"],
                            ue_range_m=comm_cfg["ue_range_m"],
                            carrier_hz=config["design_frequency_hz"],
                            power_split=comm_cfg["power_split"],
                            n_realizations=comm_cfg["n_realizations"])
    seed = stage_seed(config["master_seed"], "simulate-comm")

    far_angle = (comm_cfg["ue_theta_deg"], comm_cfg["ue_phi_deg"] - 180.0)
    means, stds = average_spectral_efficiency(geometry, scenario, far_angle,
                                              comm_cfg["snr_db_values"], seed)
    write_csv(out_dir / "se_vs_snr.csv", "snr_db,se_mean,se_std",
              zip(comm_cfg["snr_db_values"], means, stds))

    offsets = np.arange(-comm_cfg["scan_offset_max_deg"],
                        comm_cfg["scan_offset_max_deg"] + 1e-9,
                        comm_cfg["scan_offset_step_deg"])
    sweep = scan_sweep_se(geometry, scenario, comm_cfg["scan_axis"], offsets,
                          comm_cfg["snr_db"], seed)
    write_csv(out_dir / "scan_sweep.csv", "angle_deg,se_mean,se_std",
              zip(sweep.angle_deg, sweep.se_mean, sweep.se_std))
    dev_lo, dev_hi = deviation_interval(sweep)

    blk = comm_cfg["blockage"]
    scenario_b = BlockageScenario(ue_range_m=blk["ue_range_m"],
                                  ue_theta_deg=comm_cfg["ue_theta_deg"],
                                  ue_phi_deg=comm_cfg["ue_phi_deg"],
                                  crossing_range_m=blk["crossing_range_m"],
                                  carrier_hz=config["design_frequency_hz"])
    theta_grid = np.arange(blk["theta_start_deg"], blk["theta_stop_deg"] + 1e-9,
                           blk["theta_step_deg"])
    radius = scanned_beam_radius(geometry, config["pattern"]["expansion"])
    timeline = blockage_sweep(geometry, scenario_b, theta_grid, radius,
                              comm_cfg["snr_db"], comm_cfg["power_split"],
                              blk["n_realizations"], seed=seed)
    write_csv(out_dir / "blockage_sweep.csv", "theta_deg,se_mean,overlap",
              zip(timeline.theta_deg, timeline.se_mean,
                  timeline.overlap.astype(float)))

    summary = {"beam_radius_uv": radius,
               "scan_deviation_interval_deg": [dev_lo, dev_hi],
               "blockage_interval_deg": list(timeline.interval_deg),
               "blockage_interval_width_deg": timeline.interval_width_deg,
               "_meta": _meta(config, "simulate-comm")}
    if reference_path is not None:
        ref_geom, _ = _load_with_meta(reference_path)
        ref_radius = scanned_beam_radius(ref_geom, config["pattern"]["expansion"])
        ref_timeline = blockage_sweep(ref_geom, scenario_b, theta_grid,
                                      ref_radius, comm_cfg["snr_db"],
                                      comm_cfg["power_split"],
                                      blk["n_realizations"], seed=seed)
        summary["reference_interval_width_deg"] = ref_timeline.interval_width_deg
        summary["ratio_vs_reference"] = (timeline.interval_width_deg
                                         / ref_timeline.interval_width_deg)
    path = out_dir / "comm_summary.json"
    write_json(path, summary)
    print(f"simulate-comm: SE({comm_cfg['snr_db_values']} dB) = "
          f"{np.round(means, 3).tolist()} -> {path}")
    return path


def stage_simulate_sensing(config: dict, geometry_path: Path,
                           out_dir: Path) -> Path:
    geometry, _ = _load_with_meta(geometry_path)
    sens_cfg = config["sensing"]
    comm_cfg = config["comm"]
    step = float(sens_cfg["angle_step_deg"])
    schedule = ScanSchedule(
        azimuth_deg=tuple(np.arange(sens_cfg["azimuth_min_deg"],
                                    sens_cfg["azimuth_max_deg"] + step / 2,
                                    step)),
        elevation_deg=tuple(np.arange(0.0, 90.0 + step / 2, step)))
    params = OfdmParams(carrier_hz=config["design_frequency_hz"])
    targets = [SensingTarget(**t) for t in sens_cfg["targets"]]
    scenario = LinkScenario(ue_theta_deg=comm_cfg["ue_theta_deg"],
                            ue_phi_deg=comm_cfg["ue_phi_deg"],
                            ue_range_m=comm_cfg["ue_range_m"],
                            carrier_hz=config["design_frequency_hz"])
    w_c = comm_weight(_normalized_los(geometry, scenario), geometry)
    seed = stage_seed(config["master_seed"], "simulate-sensing")
    cube = synthesize_rx(geometry, targets, schedule, params, w_c,
                         sens_cfg["power_split"], sens_cfg["noise_offset_db"],
                         seed)

    first = targets[0]
    ia = int(np.argmin(np.abs(np.asarray(schedule.azimuth_deg) - first.phi_deg)))
    ie = int(np.argmin(np.abs(np.asarray(schedule.elevation_deg)
                              - first.theta_deg)))
    rd = range_doppler_map(cube, ia, ie)
    r_axis = range_axis_m(cube)
    v_axis = velocity_axis_mps(cube)
    keep = min(len(r_axis), int(np.ceil(2.0 * max(t.range_m for t in targets)
                                        / cube.params.range_resolution_m)) + 8)
    write_csv(out_dir / "range_velocity.csv", "range_m,velocity_mps,power",
              ((r_axis[i], v_axis[j], rd[i, j])
               for i in range(keep) for j in range(rd.shape[1])))

    r_est, v_est, r_bin, v_bin = detect_strongest(cube, ia, ie)
    image = angle_image(cube, r_bin, v_bin)
    write_csv(out_dir / "angle_image.csv", "theta_deg,phi_deg,power_norm",
              ((image.theta_deg[e], image.phi_deg[a], image.power[e, a])
               for e in range(len(image.theta_deg))
               for a in range(len(image.phi_deg))))

    resolved, peaks = resolve_two_targets(image,
                                          sens_cfg["resolve_elevation_deg"])
    detections = []
    for phi_peak, _power in peaks[:len(targets)]:
        ia_p = int(np.argmin(np.abs(np.asarray(schedule.azimuth_deg) - phi_peak)))
        r_p, v_p, _, _ = detect_strongest(cube, ia_p, ie)
        detections.append({"range_m": r_p, "velocity_mps": v_p,
                           "theta_deg": float(schedule.elevation_deg[ie]),
                           "phi_deg": phi_peak})
    payload = {"targets": detections, "resolved": bool(resolved),
               "strongest_cell": {"range_m": r_est, "velocity_mps": v_est},
               "_meta": _meta(config, "simulate-sensing")}
    path = out_dir / "sensing_detection.json"
    write_json(path, payload)
    print(f"simulate-sensing: resolved={resolved}, "
          f"detections={len(detections)} -> {path}")
    return path


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="stpa",
        description="Sparse tiled planar array design and JCAS simulation")
    parser.add_argument("--config", type=Path, help="JSON config file")
    parser.add_argument("--set", action="append", default=[], metavar="K=V",
                        help="override a config entry (dotted.path=json)")
    parser.add_argument("--out-dir", type=Path, default=Path("."),
                        help="artifact directory")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("tile", help="maximum-entropy domino tiling")
    for name, needs_input in [("sparsify", True), ("optimize", True),
                              ("pattern", True), ("simulate-comm", True),
                              ("simulate-sensing", True)]:
        p = sub.add_parser(name)
        p.add_argument("--input", type=Path, required=needs_input,
                       help="input geometry JSON")
        if name == "simulate-comm":
            p.add_argument("--reference", type=Path,
                           help="reference geometry for the blockage ratio")
    sub.add_parser("run", help="full pipeline")
    return parser


def load_config(args) -> dict:
    config = copy.deepcopy(DEFAULT_CONFIG)
    if args.config:
        with open(args.config) as fh:
            config = merge_config(config, json.load(fh))
    for assignment in args.set:
        apply_set(config, assignment)
    return config


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    config = load_config(args)
    out_dir = args.out_dir
    out_dir.mkdir(parents=True, exist_ok=True)
    try:
        if args.command == "tile":
            stage_tile(config, out_dir)
        elif args.command == "sparsify":
            stage_sparsify(config, args.input, out_dir)
        elif args.command == "optimize":
            stage_optimize(config, args.input, out_dir)
        elif args.command == "pattern":
            stage_pattern(config, args.input, out_dir)
        elif args.command == "simulate-comm":
            stage_simulate_comm(config, args.input, out_dir, args.reference)
        elif args.command == "simulate-sensing":
            stage_simulate_sensing(config, args.input, out_dir)
        elif args.command == "run":
            tiled = stage_tile(config, out_dir)
            thinned = stage_sparsify(config, tiled, out_dir)
            optimized = stage_optimize(config, thinned, out_dir)
            stage_pattern(config, optimized, out_dir)
            stage_simulate_comm(config, optimized, out_dir)
            stage_simulate_sensing(config, optimized, out_dir)
    except (ValueError, RuntimeError, OSError, KeyError) as err:
        print(f"stpa {args.command}: {err}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
