"""Two-area system: reduction, placement tables, case damping and time traces."""

import argparse
from pathlib import Path

import numpy as np

from gfmplace.analysis import PLL_BAND, build_case, load_system, measure_decay, run_case_simulation
from gfmplace.assembly import eigen_report, write_eigen_csv
from gfmplace.config import fixture_path
from gfmplace.linsim import write_trace_csv
from gfmplace.netmodel import gscr
from gfmplace.placement import format_solution, place

CASES = {"case1": (), "case2": (1, 2), "case3": (3, 4)}


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", type=Path, default=Path("out/two_area"))
    ap.add_argument("--no-sim", action="store_true", help="skip time-domain runs")
    args = ap.parse_args()
    args.out.mkdir(parents=True, exist_ok=True)

    s = load_system(fixture_path("two_area.yaml"), fixture_path("converters.yaml"))
    np.set_printoptions(precision=4, suppress=True)
    print("Q_red =\n", s.q_red.q)
    print(f"gSCR = {gscr(s.l):.4f}\n")
    for method in ("enumeration", "greedy-exact", "greedy-participation"):
        print(format_solution(place(s.l, 2, method)), "\n")

    for name, gfm in CASES.items():
        model = build_case(s, gfm, name)
        rep = eigen_report(model, band=PLL_BAND)
        write_eigen_csv(args.out / f"eig_{name}.csv", rep)
        lam = rep.dominant
        line = f"{name}: GFM at {list(gfm) or '-'}, dominant {lam.real:+.3f}{lam.imag:+.3f}j " \
               f"({abs(lam.imag) / 2 / np.pi:.2f} Hz), damping {rep.dominant_damping:+.4f}"
        if not args.no_sim:
            tr = run_case_simulation(model)
            write_trace_csv(args.out / f"sim_{name}.csv", tr)
            ch, _, _, z = measure_decay(tr)
            line += f", measured {z:+.4f} on {ch}"
        print(line)


if __name__ == "__main__":
    main()
