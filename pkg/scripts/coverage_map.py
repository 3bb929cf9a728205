"""Coverage map over a regular grid, one best-beam RSRP field per element count.

Writes the map CSV and prints how much each array improves on the
single-element baseline (median over grid points).

    python scripts/coverage_map.py --resolution 20 --freq 28 --out coverage_grid.csv
"""
import argparse

import numpy as np

from nrmobility.config import ScenarioConfig, load_config
from nrmobility.engine import coverage_map, write_coverage_csv
from nrmobility.scenario import deployment_region


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--config")
    ap.add_argument("--freq", type=float, default=28.0, help="carrier frequency in GHz")
    ap.add_argument("--resolution", type=float, default=25.0, help="grid spacing in metres")
    ap.add_argument("--out", default="coverage_grid.csv")
    args = ap.parse_args()
    cfg = load_config(args.config) if args.config else ScenarioConfig().validate()

    bounds = deployment_region(cfg).bounds
    cmap = coverage_map(cfg, None, frequency=args.freq, bounds=bounds, resolution=args.resolution)
    write_coverage_csv(cmap, args.out)
    nbf = cmap.columns["rsrp_nbf_dbm"]
    for name, col in cmap.columns.items():
        if name != "rsrp_nbf_dbm":
            print(f"{name}: median {np.median(col):7.2f} dBm, gain over NBF {np.median(col - nbf):5.2f} dB")
    print(f"{len(cmap)} grid points -> {args.out}")


if __name__ == "__main__":
    main()
