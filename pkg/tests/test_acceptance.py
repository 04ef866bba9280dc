"""Acceptance criteria, one check per criterion.

Each ``check_*`` returns (passed, detail). The tests assert on them and a
terminal-summary hook prints one line per criterion; running this file
directly prints the same lines without pytest.
"""

import sys
import time
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from conftest import random_laplacian  # noqa: E402
from gfmplace.analysis import (  # noqa: E402
    PLL_BAND,
    System,
    admittances,
    build_case,
    load_system,
    measure_decay,
    run_case_simulation,
)
from gfmplace.assembly import decoupled_dominant_poles, delta_lambda_sweep, eigen_report  # noqa: E402
from gfmplace.config import fixture_path  # noqa: E402
from gfmplace.converters import (  # noqa: E402
    deembed_grid_inductor,
    gfm_admittance,
    gfm_inner_admittance,
    linearize_numerically,
    pll_admittance,
    solve_operating_point,
    voltage_loop_admittance,
)
from gfmplace.netmodel import (  # noqa: E402
    delete_nodes,
    gscr,
    lambda_min,
    participation_factors,
    reduce_network,
    weighted_laplacian,
)
from gfmplace.placement import greedy_place, solve_enumeration, step2_exact, step2_participation  # noqa: E402
from gfmplace.statespace import complex_form, evaluate  # noqa: E402

RESULTS = {}

QRED_PRINTED = np.array([
    [8.068, -3.8641, -0.2043, -0.2724],
    [-3.8641, 12.2718, -0.4087, -0.5449],
    [-0.2043, -0.4087, 4.0442, -1.2744],
    [-0.2724, -0.5449, -1.2744, 4.9675],
])
TABLE_I = {(1, 2): 3.1504, (1, 3): 4.9270, (1, 4): 4.0239, (2, 3): 4.9437, (2, 4): 4.0338, (3, 4): 5.7711}
TABLE_II = {1: 3.1046, 2: 3.1292, 3: 4.7091, 4: 3.9570}
TABLE_III = {1: 0.0284, 2: 0.0193, 3: 0.6231, 4: 0.3292}
TABLE_IV = {1: 4.9270, 2: 4.9437, 4: 5.7711}
TABLE_V = {1: 0.1283, 2: 0.0614, 4: 0.8103}
CASES = {"case1": (), "case2": (1, 2), "case3": (3, 4)}
# single grid-forming node for the perturbation sweep: the first greedy pick
DLAMBDA_NODE = 3


def _two_area():
    return load_system(fixture_path("two_area.yaml"), fixture_path("converters.yaml"))


def _ieee39():
    return load_system(fixture_path("ieee39.yaml"), fixture_path("converters_ieee39.yaml"))


def _maxdev(table, values):
    return max(abs(values[k] - v) for k, v in table.items())


def check_1():
    t0 = time.perf_counter()
    s = load_system(fixture_path("two_area.yaml"))
    g = gscr(s.l)
    dt = time.perf_counter() - t0
    dev = float(np.abs(s.q_red.q - QRED_PRINTED).max())
    ok = dev <= 0.005 and abs(g - 3.00) <= 0.01 and dt < 1.0
    return ok, f"max |Q_red - printed| = {dev:.2e} (<= 5e-3), gSCR = {g:.4f} (3.00 +/- 0.01), {dt:.3f} s"


def check_2():
    s = _two_area()
    table = dict(solve_enumeration(s.l, 2).table)
    dev = _maxdev(TABLE_I, table)
    return dev <= 5e-4, f"max deviation from pair table {dev:.1e} (<= 5e-4)"


def check_3():
    s = _two_area()
    _, sc1 = step2_exact(s.l)
    _, sc2 = step2_exact(delete_nodes(s.l, [3]))
    dev = max(_maxdev(TABLE_II, sc1), _maxdev(TABLE_IV, sc2))
    sol = greedy_place(s.l, 2, "exact")
    ok = dev <= 5e-4 and sol.chosen == (3, 4)
    return ok, f"max score deviation {dev:.1e} (<= 5e-4), greedy-exact picks {sol.chosen}"


def check_4():
    s = _two_area()
    _, f1 = step2_participation(s.l)
    _, f2 = step2_participation(delete_nodes(s.l, [3]))
    dev = max(_maxdev(TABLE_III, f1), _maxdev(TABLE_V, f2))
    gp = greedy_place(s.l, 2, "participation")
    ge = greedy_place(s.l, 2, "exact")
    en = solve_enumeration(s.l, 2)
    ok = dev <= 5e-4 and gp.chosen == (3, 4) and set(gp.chosen) == set(ge.chosen) == set(en.chosen)
    return ok, (f"max factor deviation {dev:.1e} (<= 5e-4), greedy-participation {gp.chosen}, "
                f"greedy-exact {ge.chosen}, enumeration {en.chosen}")


def _fd_rel_err(l):
    p = participation_factors(l)
    h = 1e-6
    fd = np.empty(len(l))
    for i in range(len(l)):
        d = np.zeros_like(l.l)
        d[i, i] = h
        fd[i] = (np.linalg.eigvalsh(l.l + d)[0] - np.linalg.eigvalsh(l.l - d)[0]) / (2 * h)
    # relative to the largest factor: entries that are exactly zero only carry roundoff
    return np.abs(fd - p).max() / np.abs(p).max()


def check_5():
    errs = [_fd_rel_err(_two_area().l)]
    seed = 0
    while len(errs) < 51:
        l = random_laplacian(seed)
        seed += 1
        w = np.linalg.eigvalsh(l.l)
        if w[1] - w[0] > 1e-8 * w[0]:
            errs.append(_fd_rel_err(l))
    worst = max(errs)
    return worst < 1e-3, f"worst relative error {worst:.2e} over two-area + 50 random networks (< 1e-3)"


def check_6():
    margins = []
    for seed in range(100):
        l = random_laplacian(seed + 1000)
        base = lambda_min(l)
        for n in l.node_order:
            margins.append(lambda_min(delete_nodes(l, [n])) - base)
    m = min(margins)
    return m >= -1e-12, f"min increase of lambda_min under deletion {m:.3e} over {len(margins)} deletions (>= -1e-12)"


def check_7():
    t0 = time.perf_counter()
    s = _two_area()
    y_pll, _ = admittances(s)
    eig = np.linalg.eigvals(build_case(s, ()).a)
    osc = eig[np.abs(eig.imag) > 2 * np.pi]
    res = decoupled_dominant_poles(y_pll, s.f, np.linalg.eigvalsh(s.q_red.q))
    union = np.concatenate([r["oscillatory"] for r in res])
    dt = time.perf_counter() - t0
    dist = max(np.min(np.abs(union - x)) for x in osc) if len(union) else np.inf
    ok = len(union) == len(osc) and dist < 1e-4 and dt < 10
    return ok, f"{len(osc)} full-model vs {len(union)} decoupled modes, max distance {dist:.1e} (< 1e-4), {dt:.2f} s"


def _dlambda(s: System, node):
    y_pll, y_gf = admittances(s)
    freqs = np.logspace(0, np.log10(200), 200)
    _, vals = delta_lambda_sweep(s.q_red, s.capacities, node, y_pll, y_gf, s.f, freqs)
    return np.abs(vals)


def check_8():
    s = _two_area()
    mags = {n: _dlambda(s, n) for n in s.nodes}
    m = mags[DLAMBDA_NODE]
    ok = 1e-3 <= m.max() <= 0.05
    others = ", ".join(f"node {n}: {v.max():.3f}" for n, v in mags.items() if n != DLAMBDA_NODE)
    return ok, (f"GFM at node {DLAMBDA_NODE}: max |dlambda| {m.max():.3f}, median {np.median(m):.3f} "
                f"(need max in [0.001, 0.05]); other nodes {others}")


def _case_damping(s, v_grid=None):
    if v_grid is not None:
        from dataclasses import replace
        s = replace(s, conv=replace(s.conv, grid_voltage=v_grid))
    return {name: eigen_report(build_case(s, g, name), band=PLL_BAND).dominant_damping for name, g in CASES.items()}


def check_9():
    s = _two_area()
    z = _case_damping(s)
    ok = abs(z["case1"]) < 0.02 and abs(z["case2"] - 0.05) <= 0.03 and abs(z["case3"] - 0.4) <= 0.1
    scan = {v: _case_damping(s, v)["case1"] for v in (0.95, 1.0, 1.05)}
    scan_txt = ", ".join(f"U={v:.2f}: {zz:+.3f}" for v, zz in scan.items())
    return ok, (f"U=1.00 pu: case1 {z['case1']:+.4f} (|z|<0.02), case2 {z['case2']:+.4f} (0.05+/-0.03), "
                f"case3 {z['case3']:+.4f} (0.4+/-0.1); case1 over grid-voltage range {scan_txt}")


def check_10():
    s = _ieee39()
    g = gscr(s.l)
    en = solve_enumeration(s.l, 2)
    gp = greedy_place(s.l, 2, "participation")
    # set membership is the hard part; the values are soft and reported only
    ok_en = set(en.chosen) == {1, 4}
    ok_gp = set(gp.chosen) == {8, 9}
    soft = (abs(g - 3.31) <= 0.331, abs(en.lambda_min_achieved - 14.43) <= 1.443,
            abs(gp.lambda_min_achieved - 12.03) <= 1.203)
    tag = ["ok" if x else "off" for x in soft]
    return ok_en and ok_gp, (
        f"enumeration {set(en.chosen)} ({'ok' if ok_en else 'FAIL'}, need {{1, 4}}); "
        f"greedy-participation {set(gp.chosen)} ({'ok' if ok_gp else 'FAIL'}, need {{8, 9}}); "
        f"soft: gSCR {g:.3f} vs 3.31 {tag[0]}, enumeration {en.lambda_min_achieved:.2f} vs 14.43 {tag[1]}, "
        f"greedy {gp.lambda_min_achieved:.2f} vs 12.03 {tag[2]}")


def check_11():
    s = _two_area()
    parts = []
    ok = True
    for name, g in CASES.items():
        model = build_case(s, g, name)
        z_eig = eigen_report(model, band=PLL_BAND).dominant_damping
        _, _, _, z_meas = measure_decay(run_case_simulation(model))
        rel = abs(z_meas - z_eig) / abs(z_eig)
        ok &= rel <= 0.10
        parts.append(f"{name} eig {z_eig:+.4f} measured {z_meas:+.4f} ({100 * rel:.1f}%)")
    return ok, "; ".join(parts) + " (<= 10%)"


def check_12():
    s = _two_area()
    c = s.conv
    rng = np.random.default_rng(12)
    freqs = rng.uniform(0.5, 500, 30)
    worst = {}
    for kind, params in (("Y_PLL", c.pll), ("Y_GF", c.gfm)):
        op = solve_operating_point(params, c.grid_voltage)
        exact = pll_admittance(params, op) if kind == "Y_PLL" else gfm_admittance(params, op)
        fd = linearize_numerically(params, op)
        worst[kind] = max(np.linalg.norm(evaluate(exact, 2j * np.pi * f) - evaluate(fd, 2j * np.pi * f))
                          / np.linalg.norm(evaluate(exact, 2j * np.pi * f)) for f in freqs)
    op = solve_operating_point(c.gfm, c.grid_voltage)
    inner = gfm_inner_admittance(c.gfm, op)
    eq = max(abs(deembed_grid_inductor(inner, c.gfm, 2j * np.pi * f) - voltage_loop_admittance(c.gfm, 2j * np.pi * f))
             / abs(voltage_loop_admittance(c.gfm, 2j * np.pi * f)) for f in freqs)
    full = gfm_admittance(c.gfm, op)
    literal = max(abs(-complex_form(evaluate(full, 2j * np.pi * f)) - voltage_loop_admittance(c.gfm, 2j * np.pi * f))
                  / abs(voltage_loop_admittance(c.gfm, 2j * np.pi * f)) for f in freqs)
    ok = worst["Y_PLL"] < 1e-6 and worst["Y_GF"] < 1e-6 and eq < 1e-8
    return ok, (f"finite-difference match Y_PLL {worst['Y_PLL']:.1e}, Y_GF {worst['Y_GF']:.1e} (< 1e-6); "
                f"voltage-loop realization vs scalar formula {eq:.1e} (< 1e-8); "
                f"[info] terminal-side Y_GF vs scalar formula differs by {literal:.2f} (grid inductor, synchronization)")


CHECKS = {n: globals()[f"check_{n}"] for n in range(1, 13)}


def _run(n):
    ok, detail = CHECKS[n]()
    RESULTS[n] = (ok, detail)
    print(f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
    return ok, detail


@pytest.mark.parametrize("n", list(CHECKS))
def test_criterion(n):
    ok, detail = _run(n)
    assert ok, detail


if __name__ == "__main__":
    for n in CHECKS:
        _run(n)
