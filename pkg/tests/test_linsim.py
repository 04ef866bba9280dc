import numpy as np
import pytest
from scipy.integrate import solve_ivp

from gfmplace.analysis import PLL_BAND, build_case, measure_decay, resolved_dt, run_case_simulation
from gfmplace.assembly import ClosedLoopModel, eigen_report
from gfmplace.linsim import DisturbanceEvent, decay_estimate, default_event, simulate


def _toy(sigma=-2.0, w=30.0):
    a = np.array([[sigma, -w], [w, sigma]])
    return ClosedLoopModel(a, np.array([[1.0], [0.0]]), np.array([[1.0, 0.0]]), ("x", "y"), ("n1",), ("pll",))


@pytest.fixture(scope="module")
def case1(two_area):
    return build_case(two_area, (), "case1")


def test_event_validation():
    with pytest.raises(ValueError):
        DisturbanceEvent(("n1",), duration=0.0)
    with pytest.raises(ValueError):
        DisturbanceEvent(("n1",), t_start=-1.0)
    with pytest.raises(ValueError):
        DisturbanceEvent(("n1",), magnitude=np.inf)


def test_zero_event_gives_zero_trace(case1):
    ev = DisturbanceEvent(default_event(case1).targets, magnitude=0.0)
    tr = simulate(case1, ev, 0.3, resolved_dt(case1))
    assert not np.any(tr.y)


def test_superposition(case1):
    dt = resolved_dt(case1)
    ev = default_event(case1)
    t1 = simulate(case1, ev, 0.4, dt)
    t2 = simulate(case1, DisturbanceEvent(ev.targets, 2 * ev.magnitude), 0.4, dt)
    np.testing.assert_allclose(t2.y, 2 * t1.y, rtol=1e-9, atol=1e-12)


def test_time_invariance():
    m = _toy()
    dt = 1e-3
    a = simulate(m, DisturbanceEvent(("n1",), 1.0, 0.1, 0.05), 1.0, dt)
    b = simulate(m, DisturbanceEvent(("n1",), 1.0, 0.2, 0.05), 1.0, dt)
    np.testing.assert_allclose(b.y[200:, 0], a.y[100:-100, 0], atol=1e-12)


def test_matches_ode_integration():
    m = _toy()
    ev = DisturbanceEvent(("n1",), 1.0, 0.1, 0.0505)  # pulse edge between samples
    tr = simulate(m, ev, 0.6, 1e-3)

    def rhs(t, x):
        return m.a @ x + m.e[:, 0] * (ev.t_start <= t < ev.t_end)

    sol = solve_ivp(rhs, (0, 0.6), [0.0, 0.0], t_eval=tr.t, rtol=1e-11, atol=1e-13, max_step=1e-4)
    np.testing.assert_allclose(tr.y[:, 0], sol.y[0], atol=1e-8)


def test_resolution_precondition(case1):
    with pytest.raises(ValueError, match="resolve"):
        simulate(case1, default_event(case1), 0.5, 1e-3)


def test_unstable_flag(case1):
    tr = simulate(case1, default_event(case1), 0.3, resolved_dt(case1))
    assert tr.unstable


def test_decay_estimate_on_pure_mode():
    t = np.linspace(0, 3, 30001)
    y = np.exp(-2.0 * t) * np.cos(30 * t)
    sigma, wd, zeta = decay_estimate(t, y, 0.5)
    assert sigma == pytest.approx(2.0, rel=1e-3)
    assert wd == pytest.approx(30.0, rel=1e-3)
    assert zeta == pytest.approx(2 / np.hypot(2, 30), rel=1e-3)


def test_decay_estimate_needs_oscillation():
    t = np.linspace(0, 1, 100)
    with pytest.raises(ValueError):
        decay_estimate(t, np.exp(-t), 0.0)


@pytest.mark.parametrize("gfm_nodes", [(), (1, 2), (3, 4)])
def test_trace_decay_matches_dominant_real_part(two_area, gfm_nodes):
    model = build_case(two_area, gfm_nodes)
    rep = eigen_report(model, band=PLL_BAND)
    _, sigma, _, _ = measure_decay(run_case_simulation(model))
    assert sigma == pytest.approx(-rep.dominant.real, rel=0.10)


def test_case3_decays_faster_than_case1(two_area):
    d1 = measure_decay(run_case_simulation(build_case(two_area, ())))[3]
    d3 = measure_decay(run_case_simulation(build_case(two_area, (3, 4))))[3]
    assert d3 > d1
