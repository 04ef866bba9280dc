"""Convenience layer tying the input files to the analysis modules."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .assembly import (
    OSC_THRESHOLD,
    ClosedLoopModel,
    assemble_closed_loop,
    eigen_report,
    uniform_assignment,
)
from .config import ConverterConfig, load_converters, load_network
from .converters import gfm_admittance, line_dynamics, pll_admittance, solve_operating_point
from .linsim import SimTrace, decay_estimate, default_event, simulate
from .netmodel import GroundedLaplacian, NetworkSpec, WeightedLaplacian, reduce_network, weighted_laplacian
from .statespace import TransferMatrix

# dominant-pair search band: the PLL range of interest, 1-200 Hz
PLL_BAND = (OSC_THRESHOLD, 2 * np.pi * 200.0)
# post-event window used for log-decrement measurements
DECAY_WINDOW = (1.0, 3.0)


@dataclass(frozen=True)
class System:
    spec: NetworkSpec
    q_red: GroundedLaplacian
    l: WeightedLaplacian
    f: TransferMatrix
    conv: ConverterConfig | None = None

    @property
    def nodes(self) -> tuple:
        return self.q_red.node_order

    @property
    def capacities(self) -> dict:
        return dict(zip(self.l.node_order, self.l.s_diag))


def load_system(network_path, converters_path=None) -> System:
    spec = load_network(network_path)
    q_red = reduce_network(spec)
    l = weighted_laplacian(q_red, spec.capacities)
    f = line_dynamics(spec.tau, spec.omega0)
    conv = load_converters(converters_path) if converters_path is not None else None
    return System(spec, q_red, l, f, conv)


def build_case(system: System, gfm_nodes=(), name: str = "") -> ClosedLoopModel:
    if system.conv is None:
        raise ValueError("converter parameters are required")
    c = system.conv
    asg = uniform_assignment(system.nodes, c.pll, c.gfm, gfm_nodes, c.grid_voltage)
    return assemble_closed_loop(system.q_red, system.capacities, asg, system.f, name=name)


def admittances(system: System):
    """(Y_PLL, Y_GF) at the configured grid voltage; Y_GF is None without GFM parameters."""
    c = system.conv
    w0 = system.spec.omega0
    y_pll = pll_admittance(c.pll, solve_operating_point(c.pll, c.grid_voltage, omega0=w0), w0)
    y_gf = None
    if c.gfm is not None:
        y_gf = gfm_admittance(c.gfm, solve_operating_point(c.gfm, c.grid_voltage, omega0=w0), w0)
    return y_pll, y_gf


def case_damping(model: ClosedLoopModel, band=PLL_BAND):
    return eigen_report(model, band=band)


def resolved_dt(model: ClosedLoopModel) -> float:
    return 0.1 / float(np.abs(np.linalg.eigvals(model.a)).max())


def run_case_simulation(model: ClosedLoopModel, t_end=3.0, magnitude=0.3, t_start=0.2, duration=0.02,
                        dt=None) -> SimTrace:
    ev = default_event(model, magnitude, t_start, duration)
    return simulate(model, ev, t_end, dt or resolved_dt(model), label=model.name)


def measure_decay(trace: SimTrace, window=DECAY_WINDOW):
    """Log-decrement estimate on the channel with the most energy in ``window``.

    Returns (channel, sigma, omega_d, zeta).
    """
    sel = (trace.t >= window[0]) & (trace.t <= window[1])
    rms = np.sqrt(np.mean(trace.y[sel] ** 2, axis=0))
    ch = int(np.argmax(rms))
    sigma, wd, zeta = decay_estimate(trace.t, trace.y[:, ch], *window)
    return trace.channels[ch], sigma, wd, zeta
