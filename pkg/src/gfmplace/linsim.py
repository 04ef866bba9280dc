"""Exact piecewise-constant-input simulation of a closed-loop model."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import expm
from scipy.signal import find_peaks

from .assembly import ClosedLoopModel

log = logging.getLogger(__name__)

POWER_STEP = "power-reference step"
CURRENT_INJECTION = "grid-current injection"


@dataclass(frozen=True)
class DisturbanceEvent:
    """Rectangular pulse of ``magnitude`` on the inputs of ``targets``.

    Only the power-reference input is modelled; each converter's ``e`` column
    in the closed-loop model is that input.
    """

    targets: tuple
    magnitude: float = 0.3
    t_start: float = 0.2
    duration: float = 0.02
    kind: str = POWER_STEP

    def __post_init__(self):
        object.__setattr__(self, "targets", tuple(self.targets))
        if self.t_start < 0:
            raise ValueError("t_start must be >= 0")
        if not self.duration > 0:
            raise ValueError("duration must be > 0")
        if not np.isfinite(self.magnitude):
            raise ValueError("magnitude must be finite")
        if self.kind != POWER_STEP:
            raise NotImplementedError(f"disturbance kind {self.kind!r} is not modelled")

    @property
    def t_end(self) -> float:
        return self.t_start + self.duration


@dataclass(frozen=True)
class SimTrace:
    t: np.ndarray
    y: np.ndarray  # (len(t), channels)
    channels: tuple
    label: str = ""
    unstable: bool = False
    meta: dict = field(default_factory=dict)


def default_event(model: ClosedLoopModel, magnitude=0.3, t_start=0.2, duration=0.02) -> DisturbanceEvent:
    """Pulse on every PLL converter's power reference."""
    targets = tuple(n for n, k in zip(model.nodes, model.kinds) if k == "pll")
    return DisturbanceEvent(targets, magnitude, t_start, duration)


def _zoh(a: np.ndarray, e: np.ndarray, h: float):
    n = a.shape[0]
    m = np.zeros((n + 1, n + 1))
    m[:n, :n] = a * h
    m[:n, n] = e * h
    ex = expm(m)
    return ex[:n, :n], ex[:n, n]


def simulate(model: ClosedLoopModel, event: DisturbanceEvent, t_end: float, dt: float,
             check_resolution: bool = True, label: str = "") -> SimTrace:
    """Propagate from rest with the exact discretization of each constant-input interval."""
    if not (dt > 0 and t_end > event.t_end):
        raise ValueError("need dt > 0 and t_end after the disturbance window")
    eig = np.linalg.eigvals(model.a)
    fastest = float(np.abs(eig).max()) if len(eig) else 0.0
    if check_resolution and fastest > 0 and dt > 0.1 / fastest:
        raise ValueError(f"dt={dt} does not resolve the fastest mode (need dt <= {0.1 / fastest:.3e})")
    unstable = bool(len(eig) and eig.real.max() > 1e-9)
    if unstable:
        log.warning("simulating an unstable model")

    missing = set(event.targets) - set(model.nodes)
    if missing:
        raise ValueError(f"event targets {sorted(missing, key=str)} are not converter nodes")
    cols = [model.nodes.index(n) for n in event.targets]
    e = model.e[:, cols].sum(axis=1) * event.magnitude

    nsteps = int(round(t_end / dt))
    t = np.arange(nsteps + 1) * dt
    phi, gam = _zoh(model.a, e, dt)
    x = np.zeros(model.nstates)
    xs = np.zeros((nsteps + 1, model.nstates))
    edges = (event.t_start, event.t_end)
    for k in range(nsteps):
        t0, t1 = t[k], t[k + 1]
        cuts = [c for c in edges if t0 < c < t1]
        if cuts:
            pts = [t0, *cuts, t1]
            for a_, b_ in zip(pts[:-1], pts[1:]):
                p, g = _zoh(model.a, e, b_ - a_)
                on = event.t_start <= 0.5 * (a_ + b_) < event.t_end
                x = p @ x + (g if on else 0.0)
        else:
            on = event.t_start <= 0.5 * (t0 + t1) < event.t_end
            x = phi @ x + (gam if on else 0.0)
        xs[k + 1] = x
    y = xs @ model.p_out.T
    if not np.all(np.isfinite(y)):
        raise FloatingPointError("simulation produced non-finite samples")
    return SimTrace(t, y, tuple(model.nodes), label or model.name, unstable,
                    {"dt": dt, "t_end": t_end, "event": event})


def decay_estimate(t: np.ndarray, y: np.ndarray, t_from: float, t_to: float | None = None,
                   min_peaks: int = 3):
    """Log-decrement fit of a single channel: (sigma, omega_d, zeta).

    ``sigma`` is the exponential decay rate (positive for decaying signals),
    taken from a least-squares line through log|peak| of the successive
    extrema; ``omega_d`` comes from the mean spacing of same-sign peaks.
    """
    t = np.asarray(t)
    y = np.asarray(y, float)
    sel = (t >= t_from) & (t <= (t[-1] if t_to is None else t_to))
    ts, ys = t[sel], y[sel] - np.mean(y[sel][-max(1, sel.sum() // 10):]) * 0
    hi, _ = find_peaks(ys)
    lo, _ = find_peaks(-ys)
    ext = np.sort(np.concatenate([hi, lo]))
    if len(hi) < 2 or len(ext) < min_peaks:
        raise ValueError("not enough oscillation peaks in the window")
    amp = np.abs(ys[ext])
    ok = amp > 0
    slope = np.polyfit(ts[ext][ok], np.log(amp[ok]), 1)[0]
    sigma = -float(slope)
    omega_d = 2 * np.pi / float(np.mean(np.diff(ts[hi])))
    zeta = sigma / np.hypot(sigma, omega_d)
    return sigma, omega_d, float(zeta)


def write_trace_csv(path, trace: SimTrace, header_lines=()) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for line in header_lines:
            fh.write(f"# {line}\n")
        fh.write(",".join(["t"] + [f"dP_{c}" for c in trace.channels]) + "\n")
        for tk, row in zip(trace.t, trace.y):
            fh.write(",".join([repr(float(tk))] + [repr(float(v)) for v in row]) + "\n")
