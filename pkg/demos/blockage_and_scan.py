"""Downlink behaviour of a sparse aperture while its sensing beam moves.

Three experiments on the same geometry:

* spectral efficiency vs SNR with the sensing beam parked far away from
  the user -- the baseline cost of splitting power between two beams;
* an azimuth scan of the sensing beam through the user direction -- the
  arc over which the link is disturbed tracks the width of the main
  beam plus whatever the sidelobe floor adds;
* a body crossing the line of sight while the sensing beam tracks it --
  the SE collapses for exactly the angles where the two beams overlap,
  and the narrower the beam, the shorter that stretch of the crossing.

Pass --geometry for a saved design; the default quick-builds a thinned
16x16 aperture (the scan-arc contrast against the compact grid is
sharpest for the full 30x30 refined design).  --csv dumps the blockage
timeline for plotting.
"""

import argparse
import csv

import numpy as np

from stpa import (
    BlockageScenario,
    LinkScenario,
    average_spectral_efficiency,
    blockage_sweep,
    deviation_interval,
    load_geometry,
    make_uniform_grid,
    scan_sweep_se,
    scanned_beam_radius,
)
from frequency_robustness import quick_design


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--geometry", help="design JSON (default: quick build)")
    ap.add_argument("--realizations", type=int, default=50,
                    help="channel draws per operating point")
    ap.add_argument("--csv", help="write the blockage timeline here")
    ap.add_argument("--plot", metavar="PNG",
                    help="save the blockage timeline as a figure")
    args = ap.parse_args()

    sparse = load_geometry(args.geometry) if args.geometry else quick_design()
    compact = make_uniform_grid(12, 12)
    pairs = [("sparse", sparse), ("compact", compact)]
    print("sparse: %d elements / compact: %d elements"
          % (sparse.n_elements, compact.n_elements))
    scenario = LinkScenario(n_realizations=args.realizations)

    snrs = [0.0, 5.0, 10.0, 15.0, 20.0]
    away = (scenario.ue_theta_deg, scenario.ue_phi_deg - 180.0)
    print("\nmean SE (bit/s/Hz) with the sensing beam far from the user:")
    print("  SNR dB: " + "".join("%8.0f" % s for s in snrs))
    for name, geom in pairs:
        se, _ = average_spectral_efficiency(geom, scenario, away, snrs, seed=11)
        print("  %-7s" % name + "".join("%8.2f" % x for x in se))

    offsets = np.arange(-40.0, 40.0 + 1e-9, 2.5)
    print("\nazimuth scan of the sensing beam through the user:")
    for name, geom in pairs:
        sweep = scan_sweep_se(geom, scenario, "azimuth", offsets,
                              snr_db=10.0, seed=7)
        lo, hi = deviation_interval(sweep)
        print("  %-7s SE deviates >5%% for azimuth %.1f..%.1f deg "
              "(half-width %.1f deg)" % (name, lo, hi, (hi - lo) / 2.0))

    blockage = BlockageScenario()
    theta = np.arange(50.0, 90.0 + 1e-9, 0.5)
    print("\nbody crossing the LOS at %.0f m while the beam tracks it:"
          % blockage.crossing_range_m)
    timelines = {}
    for name, geom in pairs:
        tl = blockage_sweep(geom, blockage, theta,
                            scanned_beam_radius(geom, expansion=1.5),
                            snr_db=10.0, n_realizations=args.realizations,
                            seed=0)
        timelines[name] = tl
        lo, hi = tl.interval_deg
        inside = float(np.median(tl.se_mean[tl.overlap]))
        outside = float(np.median(tl.se_mean[~tl.overlap]))
        print("  %-7s beams overlap for body elevation %.1f..%.1f deg "
              "(%.1f deg): median SE %.2f inside vs %.2f outside"
              % (name, lo, hi, tl.interval_width_deg, inside, outside))

    if args.csv:
        with open(args.csv, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["theta_deg"] + [f"se_{n}" for n, _ in pairs]
                            + [f"overlap_{n}" for n, _ in pairs])
            for i, t in enumerate(theta):
                writer.writerow([t]
                                + [timelines[n].se_mean[i] for n, _ in pairs]
                                + [int(timelines[n].overlap[i]) for n, _ in pairs])
        print("timeline written to %s" % args.csv)

    if args.plot:
        import matplotlib
        matplotlib.use("Agg")
        import matplotlib.pyplot as plt

        fig, ax = plt.subplots(figsize=(6, 4))
        for name, _ in pairs:
            ax.plot(theta, timelines[name].se_mean, label=name)
        ax.set_xlabel("body elevation (deg)")
        ax.set_ylabel("mean SE (bit/s/Hz)")
        ax.legend()
        fig.tight_layout()
        fig.savefig(args.plot, dpi=150)
        print("figure written to %s" % args.plot)


if __name__ == "__main__":
    main()
