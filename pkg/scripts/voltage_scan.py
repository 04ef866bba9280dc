"""Dominant PLL-band damping of the two-area cases against the grid voltage setpoint."""

import argparse
from dataclasses import replace

import numpy as np

from gfmplace.analysis import PLL_BAND, build_case, load_system
from gfmplace.assembly import eigen_report
from gfmplace.config import fixture_path

CASES = {"case1": (), "case2": (1, 2), "case3": (3, 4)}


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--vmin", type=float, default=0.95)
    ap.add_argument("--vmax", type=float, default=1.05)
    ap.add_argument("--points", type=int, default=11)
    args = ap.parse_args()

    base = load_system(fixture_path("two_area.yaml"), fixture_path("converters.yaml"))
    print("U_pu   " + "  ".join(f"{c:>8s}" for c in CASES))
    for v in np.linspace(args.vmin, args.vmax, args.points):
        s = replace(base, conv=replace(base.conv, grid_voltage=float(v)))
        z = [eigen_report(build_case(s, g, n), band=PLL_BAND).dominant_damping for n, g in CASES.items()]
        print(f"{v:.3f}  " + "  ".join(f"{x:+8.4f}" for x in z))


if __name__ == "__main__":
    main()
