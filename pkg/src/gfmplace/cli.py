"""Command-line entry point: ``gfmplace <command> [options]``.

Exit codes: 0 success, 2 usage, 3 input validation, 4 numerical failure.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .analysis import PLL_BAND, admittances, build_case, load_system, measure_decay, run_case_simulation
from .assembly import (
    BranchUndefined,
    IllPosedInterconnection,
    decoupled_dominant_poles,
    delta_lambda_sweep,
    eigen_report,
    write_dlambda_csv,
    write_eigen_csv,
)
from .config import ConfigError, file_digest, load_cases
from .converters import InfeasibleOperatingPoint
from .linsim import write_trace_csv
from .netmodel import NetworkError, gscr, write_matrix_csv
from .placement import METHODS, EnumerationTooLarge, format_solution, place, write_trace_csv as write_place_csv
from .statespace import PoleEvaluationError, write_bode_csv

OUT_ENV = "GFMPLACE_OUT"
EXIT_USAGE, EXIT_INPUT, EXIT_NUMERIC = 2, 3, 4

log = logging.getLogger("gfmplace")


class UsageError(Exception):
    pass


def _header(args, command: str) -> list[str]:
    lines = [f"gfmplace {__version__} {command}"]
    for key in ("network", "converters", "cases"):
        p = getattr(args, key, None)
        if p:
            lines.append(f"sha256 {key} {Path(p).name} {file_digest(p)}")
    return lines


def _out_dir(args) -> Path:
    out = Path(args.out or os.environ.get(OUT_ENV) or "out")
    out.mkdir(parents=True, exist_ok=True)
    return out


def _band(text: str | None, default=(1.0, 200.0)) -> tuple[float, float]:
    if text is None:
        return default
    try:
        lo, hi = (float(v) for v in text.split(","))
    except ValueError:
        raise UsageError("--band expects 'f_min,f_max' in Hz") from None
    if not (0 < lo < hi):
        raise UsageError("--band needs 0 < f_min < f_max")
    return lo, hi


def _nodes(text: str | None, system) -> tuple:
    if not text:
        return ()
    lookup = {str(n): n for n in system.nodes}
    out = []
    for tok in text.split(","):
        tok = tok.strip()
        if tok not in lookup:
            raise UsageError(f"node {tok!r} is not a converter node")
        out.append(lookup[tok])
    return tuple(out)


def cmd_reduce(args) -> int:
    system = load_system(args.network)
    out = _out_dir(args)
    hdr = _header(args, "reduce")
    write_matrix_csv(out / "qred.csv", system.q_red.q, system.nodes, hdr)
    write_matrix_csv(out / "laplacian.csv", system.l.l, system.l.node_order, hdr)
    print(f"gSCR {gscr(system.l):.4f}")
    return 0


def cmd_place(args) -> int:
    system = load_system(args.network)
    if args.q is None:
        raise UsageError("--q is required")
    if not 1 <= args.q < len(system.l):
        raise UsageError(f"--q must satisfy 1 <= q < {len(system.l)}")
    sol = place(system.l, args.q, args.method, args.cap)
    out = _out_dir(args)
    hdr = _header(args, f"place q={args.q} method={args.method}")
    write_place_csv(out / f"placement_{args.method}.csv", sol, hdr)
    text = format_solution(sol)
    (out / f"placement_{args.method}.txt").write_text("\n".join(f"# {h}" for h in hdr) + "\n" + text + "\n")
    print(text)
    return 0


def _cases_for(args, system):
    if args.gfm is not None or args.all_pll:
        from .config import CaseSpec

        nodes = _nodes(args.gfm, system)
        return (CaseSpec("custom" if nodes else "all-pll", nodes),)
    cases = load_cases(args.cases) if getattr(args, "cases", None) else system.conv.cases
    if not cases:
        raise UsageError("no cases: give --gfm, --all-pll or a case list")
    return cases


def cmd_eig(args) -> int:
    system = load_system(args.network, args.converters)
    lo, hi = _band(args.band)
    band = (2 * np.pi * lo, 2 * np.pi * hi)
    out = _out_dir(args)
    for case in _cases_for(args, system):
        model = build_case(system, case.gfm_nodes, case.name)
        rep = eigen_report(model, band=band)
        hdr = _header(args, f"eig case={case.name} gfm={list(case.gfm_nodes)}")
        write_eigen_csv(out / f"eig_{case.name}.csv", rep, hdr)
        dom = "none" if rep.dominant is None else f"{rep.dominant:.4f} ({abs(rep.dominant.imag) / 2 / np.pi:.2f} Hz)"
        z = "nan" if rep.dominant_damping is None else f"{rep.dominant_damping:.4f}"
        print(f"{case.name}: states {model.nstates}, dominant {dom}, damping {z}")
        if args.decoupled:
            if case.gfm_nodes:
                raise UsageError("--decoupled applies to all-PLL cases only")
            y_pll, _ = admittances(system)
            lams = np.linalg.eigvals(np.diag(1 / system.l.s_diag) @ system.q_red.q).real
            res = decoupled_dominant_poles(y_pll, system.f, np.sort(lams), band=band)
            with open(out / f"roots_{case.name}.csv", "w", encoding="utf-8") as fh:
                for h in hdr:
                    fh.write(f"# {h}\n")
                fh.write("lambda,re,im,damping,freq_hz\n")
                for r in res:
                    for s in r["roots"]:
                        zeta = -s.real / abs(s) if s != 0 else 1.0
                        fh.write(f"{r['lambda']!r},{s.real!r},{s.imag!r},{zeta!r},{abs(s.imag) / 2 / np.pi!r}\n")
                    d = r["dominant"]
                    print(f"  lambda {r['lambda']:.4f}: dominant "
                          + ("none" if d is None else f"{d:.4f}, damping {r['damping']:.4f}"))
    return 0


def cmd_bode_dlambda(args) -> int:
    system = load_system(args.network, args.converters)
    lo, hi = _band(args.band)
    if args.points < 1:
        raise UsageError("--points must be >= 1")
    nodes = _nodes(args.gfm, system)
    if len(nodes) != 1:
        raise UsageError("--gfm must name exactly one node")
    freqs = np.array([lo]) if args.points == 1 else np.logspace(np.log10(lo), np.log10(hi), args.points)
    y_pll, y_gf = admittances(system)
    if y_gf is None:
        raise UsageError("converter file has no gfm section")
    lam, vals = delta_lambda_sweep(system.q_red, system.capacities, nodes[0], y_pll, y_gf, system.f, freqs)
    out = _out_dir(args)
    write_dlambda_csv(out / f"dlambda_{nodes[0]}.csv", freqs, vals,
                      _header(args, f"bode-dlambda gfm={nodes[0]} lambda1'={lam!r}"))
    print(f"lambda1' {lam:.4f}; |dlambda| min {np.abs(vals).min():.4g} max {np.abs(vals).max():.4g}")
    return 0


def cmd_bode(args) -> int:
    system = load_system(args.network, args.converters)
    lo, hi = _band(args.band)
    freqs = np.logspace(np.log10(lo), np.log10(hi), max(args.points, 1))
    y_pll, y_gf = admittances(system)
    out = _out_dir(args)
    for name, y in (("pll", y_pll), ("gfm", y_gf)):
        if y is not None:
            write_bode_csv(out / f"bode_{name}.csv", y, freqs, _header(args, f"bode {name}"))
    print(f"wrote admittance responses to {out}")
    return 0


def cmd_simulate(args) -> int:
    system = load_system(args.network, args.converters)
    sim = system.conv.simulation
    out = _out_dir(args)
    for case in _cases_for(args, system):
        model = build_case(system, case.gfm_nodes, case.name)
        rep = eigen_report(model, band=PLL_BAND)
        trace = run_case_simulation(model, sim.t_end, sim.magnitude, sim.t_start, sim.duration)
        hdr = _header(args, f"simulate case={case.name} gfm={list(case.gfm_nodes)}")
        write_trace_csv(out / f"trace_{case.name}.csv", trace, hdr)
        try:
            ch, sigma, wd, zeta = measure_decay(trace)
            meas = f"measured damping {zeta:.4f} (node {ch}, {wd / 2 / np.pi:.2f} Hz)"
        except ValueError as exc:
            meas = f"decay not measurable ({exc})"
        flag = " [unstable]" if trace.unstable else ""
        print(f"{case.name}: eigen damping {rep.dominant_damping:.4f}, {meas}{flag}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="gfmplace", description="Grid-forming converter placement and small-signal analysis.")
    p.add_argument("--version", action="version", version=f"gfmplace {__version__}")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, converters=True):
        sp.add_argument("--network", required=True, help="network YAML file")
        if converters:
            sp.add_argument("--converters", required=True, help="converter parameter YAML file")
        sp.add_argument("--out", help=f"output directory (default ${OUT_ENV} or ./out)")

    sp = sub.add_parser("reduce", help="Kron-reduce the network and print gSCR")
    common(sp, converters=False)
    sp.set_defaults(func=cmd_reduce)

    sp = sub.add_parser("place", help="choose grid-forming locations")
    common(sp, converters=False)
    sp.add_argument("--q", type=int, help="number of grid-forming converters")
    sp.add_argument("--method", choices=METHODS, default="greedy-participation")
    sp.add_argument("--cap", type=int, default=10**6, help="enumeration subset cap")
    sp.set_defaults(func=cmd_place)

    sp = sub.add_parser("eig", help="closed-loop eigenvalues and damping")
    common(sp)
    sp.add_argument("--gfm", help="comma-separated grid-forming nodes (overrides the case list)")
    sp.add_argument("--all-pll", action="store_true", help="single all-PLL case")
    sp.add_argument("--cases", help="case manifest YAML (default: cases in the converter file)")
    sp.add_argument("--band", help="dominant-pair search band 'f_min,f_max' in Hz (default 1,200)")
    sp.add_argument("--decoupled", action="store_true", help="also list per-eigenvalue determinant roots")
    sp.set_defaults(func=cmd_eig)

    sp = sub.add_parser("bode-dlambda", help="sweep of the grid-forming perturbation term")
    common(sp)
    sp.add_argument("--gfm", required=True, help="the single grid-forming node")
    sp.add_argument("--band", help="'f_min,f_max' in Hz (default 1,200)")
    sp.add_argument("--points", type=int, default=200)
    sp.set_defaults(func=cmd_bode_dlambda)

    sp = sub.add_parser("bode", help="converter admittance frequency responses")
    common(sp)
    sp.add_argument("--band", help="'f_min,f_max' in Hz (default 1,200)")
    sp.add_argument("--points", type=int, default=200)
    sp.set_defaults(func=cmd_bode)

    sp = sub.add_parser("simulate", help="linear time-domain response to a power-reference pulse")
    common(sp)
    sp.add_argument("--gfm", help="comma-separated grid-forming nodes (overrides the case list)")
    sp.add_argument("--all-pll", action="store_true")
    sp.add_argument("--cases", help="case manifest YAML (default: cases in the converter file)")
    sp.set_defaults(func=cmd_simulate)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s: %(message)s")
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ConfigError, NetworkError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (EnumerationTooLarge, InfeasibleOperatingPoint, IllPosedInterconnection, BranchUndefined,
            PoleEvaluationError, np.linalg.LinAlgError, FloatingPointError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (ValueError, TypeError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
