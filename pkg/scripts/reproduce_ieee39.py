"""39-bus system: gSCR, enumeration and greedy placement, case damping."""

import argparse

import numpy as np

from gfmplace.analysis import PLL_BAND, build_case, load_system
from gfmplace.assembly import eigen_report
from gfmplace.config import fixture_path
from gfmplace.netmodel import gscr, participation_factors
from gfmplace.placement import format_solution, place


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--q", type=int, default=2)
    args = ap.parse_args()

    s = load_system(fixture_path("ieee39.yaml"), fixture_path("converters_ieee39.yaml"))
    print(f"gSCR = {gscr(s.l):.4f}")
    print("participation factors:", np.round(participation_factors(s.l), 4))
    sols = {m: place(s.l, args.q, m) for m in ("enumeration", "greedy-exact", "greedy-participation")}
    for sol in sols.values():
        print(format_solution(sol), "\n")
    for case in s.conv.cases:
        rep = eigen_report(build_case(s, case.gfm_nodes, case.name), band=PLL_BAND)
        print(f"{case.name}: GFM at {list(case.gfm_nodes) or '-'}, damping {rep.dominant_damping:+.4f}")


if __name__ == "__main__":
    main()
