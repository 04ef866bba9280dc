"""Perturbation term magnitude over 1-200 Hz for each single grid-forming node."""

import argparse
from pathlib import Path

import numpy as np

from gfmplace.analysis import admittances, load_system
from gfmplace.assembly import delta_lambda_sweep, write_dlambda_csv
from gfmplace.config import fixture_path


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", type=Path, default=Path("out/dlambda"))
    ap.add_argument("--points", type=int, default=200)
    args = ap.parse_args()
    args.out.mkdir(parents=True, exist_ok=True)

    s = load_system(fixture_path("two_area.yaml"), fixture_path("converters.yaml"))
    y_pll, y_gf = admittances(s)
    freqs = np.logspace(0, np.log10(200), args.points)
    for node in s.nodes:
        _, vals = delta_lambda_sweep(s.q_red, s.capacities, node, y_pll, y_gf, s.f, freqs)
        write_dlambda_csv(args.out / f"dlambda_gfm{node}.csv", freqs, vals)
        mag = np.abs(vals)
        print(f"GFM at node {node}: max |dlambda| {mag.max():.4f} at {freqs[mag.argmax()]:.1f} Hz, "
              f"median {np.median(mag):.4f}")


if __name__ == "__main__":
    main()
