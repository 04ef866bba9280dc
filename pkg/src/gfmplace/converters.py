"""Small-signal admittance models of PLL-based and grid-forming (VSM) converters.

Conventions
-----------
All quantities are per unit on the converter base. Laplace variables and
frame frequencies are in rad/s, so an inductance ``L`` (per unit reactance at
``omega0``) contributes ``(L / omega0) (s + j omega)`` in a frame rotating at
``omega``. Complex space vectors are stored as real (d, q) pairs and the
operator ``j`` acts as the rotation ``JM``.

Each converter is written once as a nonlinear vector field ``f(x, u)`` with
output ``y`` (grid current in the global frame) and once as its hand-derived
Jacobian. The latter is what the analysis uses; the former backs the
operating-point solver and the finite-difference check.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import optimize

from .statespace import TransferMatrix, complex_form, evaluate

OMEGA0 = 100 * np.pi
JM = np.array([[0.0, -1.0], [1.0, 0.0]])

PLL_STATES = ("i_d", "i_q", "v_d", "v_q", "ig_d", "ig_q", "xcc_d", "xcc_q",
              "xp", "xq", "vf_d", "vf_q", "xpll", "delta")
GFM_STATES = ("i_d", "i_q", "v_d", "v_q", "ig_d", "ig_q", "xcc_d", "xcc_q",
              "xvc_d", "xvc_q", "vf_d", "vf_q", "delta", "omega")


class InfeasibleOperatingPoint(ValueError):
    pass


def _rot(angle: float) -> np.ndarray:
    c, s = np.cos(angle), np.sin(angle)
    return np.array([[c, -s], [s, c]])


def _pi(pair) -> tuple[float, float]:
    kp, ki = (float(v) for v in pair)
    if kp < 0 or ki < 0:
        raise ValueError("PI gains must be >= 0")
    return kp, ki


@dataclass(frozen=True)
class PllParams:
    lf: float = 0.05
    cf: float = 0.05
    lg: float = 0.06
    pi_cc: tuple = (0.3, 10.0)
    pi_pc: tuple = (0.5, 40.0)
    pi_qc: tuple = (0.5, 40.0)
    pi_pll: tuple = (104.0, 5390.0)
    t_vf: float = 0.02
    k_vf: float = 1.0
    p_ref: float = 1.0
    q_ref: float = 0.0

    def __post_init__(self):
        if min(self.lf, self.cf, self.lg) <= 0:
            raise ValueError("LCL values must be > 0")
        if self.t_vf <= 0:
            raise ValueError("t_vf must be > 0")
        for name in ("pi_cc", "pi_pc", "pi_qc", "pi_pll"):
            object.__setattr__(self, name, _pi(getattr(self, name)))

    kind = "pll"


@dataclass(frozen=True)
class GfmParams:
    lf: float = 0.05
    cf: float = 0.05
    lg: float = 0.06
    pi_cc: tuple = (0.3, 10.0)
    pi_vc: tuple = (4.0, 30.0)
    t_vf: float = 0.02
    k_vf: float = 1.0
    j: float = 2.0
    d: float = 50.0
    k_f: float = 0.1
    p0: float = 1.0
    v_ref: tuple = (1.0, 0.0)

    def __post_init__(self):
        if min(self.lf, self.cf, self.lg) <= 0:
            raise ValueError("LCL values must be > 0")
        if self.t_vf <= 0:
            raise ValueError("t_vf must be > 0")
        if self.j < 0:
            raise ValueError("virtual inertia J must be >= 0")
        if self.d <= 0:
            raise ValueError("swing equation degenerate: damping D must be > 0")
        for name in ("pi_cc", "pi_vc"):
            object.__setattr__(self, name, _pi(getattr(self, name)))
        object.__setattr__(self, "v_ref", tuple(float(v) for v in self.v_ref))
        # G_CC has unit DC gain, so k_f = 1 makes the voltage-loop admittance singular
        if abs(self.k_f - 1.0) < 1e-9:
            raise ValueError("k_f times the DC gain of the current loop must differ from 1")

    kind = "gfm"

    @property
    def states(self) -> tuple:
        return GFM_STATES if self.j > 0 else GFM_STATES[:-1]


@dataclass(frozen=True)
class OperatingPoint:
    """Steady state of one converter; (d, q) quantities are in the converter frame."""

    kind: str
    x: np.ndarray
    v_grid: complex
    delta0: float
    v_d0: float
    v_q0: float
    i_gd0: float
    i_gq0: float
    residual: float = 0.0

    @property
    def i_grid_global(self) -> complex:
        return complex(self.i_gd0, self.i_gq0) * np.exp(1j * self.delta0)

    @property
    def p_e(self) -> float:
        return self.v_d0 * self.i_gd0 + self.v_q0 * self.i_gq0

    @property
    def q_e(self) -> float:
        return self.v_q0 * self.i_gd0 - self.v_d0 * self.i_gq0


@dataclass(frozen=True)
class LinearConverter:
    """Linearized converter: dx = a x + b u' + e dP, i'_g = c x, dP_E = p_row x.

    ``u'`` is the terminal voltage and ``i'_g`` the injected current, both in
    the global frame. ``e`` is the input column of the active-power reference.
    """

    kind: str
    a: np.ndarray
    b: np.ndarray
    c: np.ndarray
    e: np.ndarray
    p_row: np.ndarray
    state_labels: tuple = field(default=())

    def admittance(self) -> TransferMatrix:
        """Y(s) with -dI'_g = Y dU'."""
        return TransferMatrix(self.a, self.b, -self.c, np.zeros((2, 2)), self.state_labels, self.kind)


# --------------------------------------------------------------------------- nonlinear models

def pll_dynamics(x, u, params: PllParams, omega0: float = OMEGA0, p_ref=None):
    """Vector field and global-frame grid current of a PLL-based converter."""
    kcc, kicc = params.pi_cc
    kpc, kipc = params.pi_pc
    kqc, kiqc = params.pi_qc
    kpll, kipll = params.pi_pll
    p_ref = params.p_ref if p_ref is None else p_ref
    i, v, ig, xcc = x[0:2], x[2:4], x[4:6], x[6:8]
    xp, xq, vf, xpll, delta = x[8], x[9], x[10:12], x[12], x[13]

    w = omega0 + kpll * v[1] + xpll
    p = v[0] * ig[0] + v[1] * ig[1]
    q = v[1] * ig[0] - v[0] * ig[1]
    iref = np.array([kpc * (p_ref - p) + xp, kqc * (q - params.q_ref) + xq])
    err = iref - i
    u_star = kcc * err + xcc + (w / omega0) * params.lf * (JM @ i) + vf
    ul = _rot(-delta) @ np.asarray(u, dtype=float)

    dx = np.concatenate([
        (omega0 / params.lf) * (u_star - v) - w * (JM @ i),
        (omega0 / params.cf) * (i - ig) - w * (JM @ v),
        (omega0 / params.lg) * (v - ul) - w * (JM @ ig),
        kicc * err,
        [kipc * (p_ref - p), kiqc * (q - params.q_ref)],
        (params.k_vf * v - vf) / params.t_vf,
        [kipll * v[1], w - omega0],
    ])
    return dx, _rot(delta) @ ig


def gfm_dynamics(x, u, params: GfmParams, omega0: float = OMEGA0, p0=None):
    """Vector field and global-frame grid current of a VSM converter.

    The swing equation is written in per-unit frequency,
    ``J d(w/w0)/dt = P0 - P_E - D (w/w0 - 1)``; with ``J = 0`` the frequency
    is algebraic (droop) and the state vector has no ``omega`` entry.
    """
    kcc, kicc = params.pi_cc
    kvc, kivc = params.pi_vc
    p0 = params.p0 if p0 is None else p0
    i, v, ig, xcc, xvc, vf = x[0:2], x[2:4], x[4:6], x[6:8], x[8:10], x[10:12]
    delta = x[12]
    p = v[0] * ig[0] + v[1] * ig[1]
    if params.j > 0:
        w = x[13]
    else:
        w = omega0 * (1.0 + (p0 - p) / params.d)

    ev = np.asarray(params.v_ref) - v
    iref = kvc * ev + xvc + (w / omega0) * params.cf * (JM @ v) + params.k_f * ig
    err = iref - i
    u_star = kcc * err + xcc + (w / omega0) * params.lf * (JM @ i) + vf
    ul = _rot(-delta) @ np.asarray(u, dtype=float)

    parts = [
        (omega0 / params.lf) * (u_star - v) - w * (JM @ i),
        (omega0 / params.cf) * (i - ig) - w * (JM @ v),
        (omega0 / params.lg) * (v - ul) - w * (JM @ ig),
        kicc * err,
        kivc * ev,
        (params.k_vf * v - vf) / params.t_vf,
        [w - omega0],
    ]
    if params.j > 0:
        parts.append([(omega0 / params.j) * (p0 - p - params.d * (w / omega0 - 1.0))])
    return np.concatenate(parts), _rot(delta) @ ig


def dynamics(params, x, u, omega0: float = OMEGA0, p_set=None):
    if isinstance(params, PllParams):
        return pll_dynamics(x, u, params, omega0, p_set)
    return gfm_dynamics(x, u, params, omega0, p_set)


# --------------------------------------------------------------------------- operating points

def _pll_guess(params: PllParams, v_grid: complex) -> np.ndarray:
    umag = abs(v_grid)
    lg, p, q = params.lg, params.p_ref, params.q_ref
    c = 2 * lg * q + umag ** 2
    disc = c * c - 4 * lg * lg * (p * p + q * q)
    if disc < 0 or umag <= 0:
        raise InfeasibleOperatingPoint("infeasible operating point: power transfer exceeds the grid limit")
    vd = np.sqrt(0.5 * (c + np.sqrt(disc)))
    v = np.array([vd, 0.0])
    ig = np.array([p / vd, -q / vd])
    ul = v - lg * (JM @ ig)
    delta = np.angle(v_grid) - np.arctan2(ul[1], ul[0])
    i = ig + params.cf * (JM @ v)
    vf = params.k_vf * v
    xcc = v - vf
    return np.concatenate([i, v, ig, xcc, i, vf, [0.0, delta]])


def _gfm_guess(params: GfmParams, v_grid: complex, omega0: float) -> np.ndarray:
    umag = abs(v_grid)
    vref = np.asarray(params.v_ref)
    vmag = np.hypot(*vref)
    phi = np.arctan2(vref[1], vref[0])
    lg = params.lg
    # solve in a frame aligned with v_ref, then rotate back
    igd = params.p0 / vmag
    rad = umag ** 2 - (lg * igd) ** 2
    if rad < 0 or vmag <= 0:
        raise InfeasibleOperatingPoint("infeasible operating point: power transfer exceeds the grid limit")
    igq = (np.sqrt(rad) - vmag) / lg
    rot = _rot(phi)
    ig = rot @ np.array([igd, igq])
    v = vref.copy()
    ul = v - lg * (JM @ ig)
    delta = np.angle(v_grid) - np.arctan2(ul[1], ul[0])
    i = ig + params.cf * (JM @ v)
    xvc = i - params.cf * (JM @ v) - params.k_f * ig
    vf = params.k_vf * v
    xcc = v - vf
    x = [i, v, ig, xcc, xvc, vf, [delta]]
    if params.j > 0:
        x.append([omega0])
    return np.concatenate(x)


def solve_operating_point(params, v_grid: complex = 1.0, kind: str | None = None,
                          omega0: float = OMEGA0, tol: float = 1e-9, max_iter: int = 50) -> OperatingPoint:
    """Steady state of the nonlinear converter equations at grid voltage ``v_grid``.

    An analytic guess is refined by Newton's method on the full vector field
    with the analytic Jacobian.
    """
    if kind is not None and kind != params.kind:
        raise ValueError(f"parameters are for a {params.kind} converter, not {kind}")
    u = np.array([np.real(v_grid), np.imag(v_grid)], dtype=float)
    if isinstance(params, PllParams):
        x = _pll_guess(params, complex(v_grid))
    else:
        x = _gfm_guess(params, complex(v_grid), omega0)

    for _ in range(max_iter):
        fx, _ = dynamics(params, x, u, omega0)
        res = float(np.abs(fx).max())
        if res < tol * 1e-3:
            break
        jac = _jacobian(params, x, u, omega0)[0]
        try:
            step = np.linalg.solve(jac, fx)
        except np.linalg.LinAlgError:
            break
        x = x - step
    fx, _ = dynamics(params, x, u, omega0)
    res = float(np.abs(fx).max())
    if not np.isfinite(res) or res >= tol:
        # fall back to a trust-region solve before giving up
        sol = optimize.root(lambda z: dynamics(params, z, u, omega0)[0], x,
                            jac=lambda z: _jacobian(params, z, u, omega0)[0], method="hybr", tol=1e-14)
        x = sol.x
        res = float(np.abs(dynamics(params, x, u, omega0)[0]).max())
        if not np.isfinite(res) or res >= tol:
            raise InfeasibleOperatingPoint(f"infeasible operating point (residual {res:.3e})")

    x = x.copy()
    x.setflags(write=False)
    delta = float(x[13] if params.kind == "pll" else x[12])
    return OperatingPoint(params.kind, x, complex(v_grid), delta, float(x[2]), float(x[3]),
                          float(x[4]), float(x[5]), res)


# --------------------------------------------------------------------------- analytic linearization

def _sel(n: int, idx) -> np.ndarray:
    idx = np.atleast_1d(idx)
    m = np.zeros((len(idx), n))
    m[np.arange(len(idx)), idx] = 1.0
    return m


def _pll_jacobian(params: PllParams, x, u, omega0):
    n = 14
    kcc, kicc = params.pi_cc
    kpc, kipc = params.pi_pc
    kqc, kiqc = params.pi_qc
    kpll, kipll = params.pi_pll
    i, v, ig, xpll, delta = x[0:2], x[2:4], x[4:6], x[12], x[13]
    E_i, E_v, E_ig = _sel(n, [0, 1]), _sel(n, [2, 3]), _sel(n, [4, 5])
    E_xcc, E_vf = _sel(n, [6, 7]), _sel(n, [10, 11])
    e = np.eye(n)

    w = omega0 + kpll * v[1] + xpll
    dw = kpll * e[3] + e[12]
    dp = np.zeros(n)
    dp[2:4], dp[4:6] = ig, v
    dq = np.zeros(n)
    dq[[2, 3, 4, 5]] = [-ig[1], ig[0], v[1], -v[0]]
    diref = np.vstack([-kpc * dp + e[8], kqc * dq + e[9]])
    ul = _rot(-delta) @ u
    y = _rot(delta) @ ig

    a = np.zeros((n, n))
    a[0:2] = (omega0 / params.lf) * (kcc * (diref - E_i) + E_xcc + E_vf - E_v)
    a[2:4] = (omega0 / params.cf) * (E_i - E_ig) - w * (JM @ E_v) - np.outer(JM @ v, dw)
    a[4:6] = (omega0 / params.lg) * (E_v + np.outer(JM @ ul, e[13])) - w * (JM @ E_ig) - np.outer(JM @ ig, dw)
    a[6:8] = kicc * (diref - E_i)
    a[8] = -kipc * dp
    a[9] = kiqc * dq
    a[10:12] = (params.k_vf * E_v - E_vf) / params.t_vf
    a[12, 3] = kipll
    a[13] = dw

    b = np.zeros((n, 2))
    b[4:6] = -(omega0 / params.lg) * _rot(-delta)

    c = np.zeros((2, n))
    c[:, 4:6] = _rot(delta)
    c[:, 13] = JM @ y

    ev = np.zeros(n)
    ev[0] = (omega0 / params.lf) * kcc * kpc
    ev[6] = kicc * kpc
    ev[8] = kipc
    return a, b, c, ev, dp


def _gfm_jacobian(params: GfmParams, x, u, omega0):
    n = 14 if params.j > 0 else 13
    kcc, kicc = params.pi_cc
    kvc, kivc = params.pi_vc
    i, v, ig, delta = x[0:2], x[2:4], x[4:6], x[12]
    E_i, E_v, E_ig = _sel(n, [0, 1]), _sel(n, [2, 3]), _sel(n, [4, 5])
    E_xcc, E_xvc, E_vf = _sel(n, [6, 7]), _sel(n, [8, 9]), _sel(n, [10, 11])
    e = np.eye(n)

    p = v @ ig
    dp = np.zeros(n)
    dp[2:4], dp[4:6] = ig, v
    if params.j > 0:
        w = x[13]
        dw = e[13]
        dw_dp0 = 0.0
    else:
        w = omega0 * (1.0 + (params.p0 - p) / params.d)
        dw = -(omega0 / params.d) * dp
        dw_dp0 = omega0 / params.d

    jv = JM @ v
    diref = -kvc * E_v + E_xvc + (w / omega0) * params.cf * (JM @ E_v) \
        + (params.cf / omega0) * np.outer(jv, dw) + params.k_f * E_ig
    ul = _rot(-delta) @ u
    y = _rot(delta) @ ig

    a = np.zeros((n, n))
    a[0:2] = (omega0 / params.lf) * (kcc * (diref - E_i) + E_xcc + E_vf - E_v)
    a[2:4] = (omega0 / params.cf) * (E_i - E_ig) - w * (JM @ E_v) - np.outer(jv, dw)
    a[4:6] = (omega0 / params.lg) * (E_v + np.outer(JM @ ul, e[12])) - w * (JM @ E_ig) - np.outer(JM @ ig, dw)
    a[6:8] = kicc * (diref - E_i)
    a[8:10] = -kivc * E_v
    a[10:12] = (params.k_vf * E_v - E_vf) / params.t_vf
    a[12] = dw
    if params.j > 0:
        a[13] = (omega0 / params.j) * (-dp - (params.d / omega0) * e[13])

    b = np.zeros((n, 2))
    b[4:6] = -(omega0 / params.lg) * _rot(-delta)

    c = np.zeros((2, n))
    c[:, 4:6] = _rot(delta)
    c[:, 12] = JM @ y

    ev = np.zeros(n)
    if params.j > 0:
        ev[13] = omega0 / params.j
    else:
        # P0 moves the algebraic frequency, which enters through every w-dependent term
        diref_p0 = (params.cf / omega0) * jv * dw_dp0
        ev[0:2] = (omega0 / params.lf) * kcc * diref_p0
        ev[2:4] = -jv * dw_dp0
        ev[4:6] = -(JM @ ig) * dw_dp0
        ev[6:8] = kicc * diref_p0
        ev[12] = dw_dp0
    return a, b, c, ev, dp


def _jacobian(params, x, u, omega0):
    if isinstance(params, PllParams):
        return _pll_jacobian(params, np.asarray(x, float), np.asarray(u, float), omega0)
    return _gfm_jacobian(params, np.asarray(x, float), np.asarray(u, float), omega0)


def linearize(params, op: OperatingPoint, omega0: float = OMEGA0) -> LinearConverter:
    u = np.array([op.v_grid.real, op.v_grid.imag])
    a, b, c, ev, dp = _jacobian(params, op.x, u, omega0)
    labels = PLL_STATES if params.kind == "pll" else params.states
    return LinearConverter(params.kind, a, b, c, ev, dp, labels)


def pll_admittance(params: PllParams, op: OperatingPoint, omega0: float = OMEGA0) -> TransferMatrix:
    """Y_PLL(s) in the global frame, -dI'_g = Y_PLL dU'."""
    if op.kind != "pll":
        raise ValueError("operating point is not for a PLL converter")
    return linearize(params, op, omega0).admittance()


def gfm_admittance(params: GfmParams, op: OperatingPoint, omega0: float = OMEGA0) -> TransferMatrix:
    """Y_GF(s) in the global frame from the exact linearization (grid inductor and frame coupling included)."""
    if op.kind != "gfm":
        raise ValueError("operating point is not for a grid-forming converter")
    return linearize(params, op, omega0).admittance()


def linearize_numerically(params, op: OperatingPoint, omega0: float = OMEGA0, h: float = 1e-6) -> TransferMatrix:
    """Central-difference Jacobian of the nonlinear model, returned as an admittance."""
    u0 = np.array([op.v_grid.real, op.v_grid.imag])
    x0 = np.asarray(op.x, float)
    n = len(x0)
    a = np.zeros((n, n))
    c = np.zeros((2, n))
    b = np.zeros((n, 2))
    for k in range(n):
        step = h * max(1.0, abs(x0[k]))
        dx = np.zeros(n)
        dx[k] = step
        fp, yp = dynamics(params, x0 + dx, u0, omega0)
        fm, ym = dynamics(params, x0 - dx, u0, omega0)
        a[:, k] = (fp - fm) / (2 * step)
        c[:, k] = (yp - ym) / (2 * step)
    for k in range(2):
        du = np.zeros(2)
        du[k] = h
        fp, _ = dynamics(params, x0, u0 + du, omega0)
        fm, _ = dynamics(params, x0, u0 - du, omega0)
        b[:, k] = (fp - fm) / (2 * h)
    return TransferMatrix(a, b, -c, np.zeros((2, 2)))


# --------------------------------------------------------------------------- line block and closed forms

def line_dynamics(tau: float, omega0: float = OMEGA0) -> TransferMatrix:
    """F(s) = [[s+tau, w0], [-w0, s+tau]] / ((s+tau)^2/w0 + w0) as a 2-state realization."""
    if tau < 0 or omega0 <= 0:
        raise ValueError("need tau >= 0 and omega0 > 0")
    a = -(tau * np.eye(2) + omega0 * JM)
    return TransferMatrix(a, omega0 * np.eye(2), np.eye(2), np.zeros((2, 2)), ("line_d", "line_q"), "F")


def line_transfer(s: complex, tau: float, omega0: float = OMEGA0) -> np.ndarray:
    """Direct evaluation of F(s) from its closed form."""
    a = s + tau
    return np.array([[a, omega0], [-omega0, a]], dtype=complex) / (a * a / omega0 + omega0)


def voltage_loop_admittance(params: GfmParams, s: complex, omega0: float = OMEGA0) -> complex:
    """Scalar Y(s) of the voltage-controlled VSM seen from its capacitor.

    Complex transfer function combining G_CC, G_VF and PI_VC; the imaginary
    unit in the cross-coupling term is the frame operator ``j``.
    """
    kcc, kicc = params.pi_cc
    kvc, kivc = params.pi_vc
    pi_cc = kcc + kicc / s
    pi_vc = kvc + kivc / s
    f_vf = params.k_vf / (params.t_vf * s + 1.0)
    den = s * params.lf / omega0 + pi_cc
    g_cc = pi_cc / den
    g_vf = (1.0 - f_vf) / den
    num = g_vf + g_cc * pi_vc + s * params.cf / omega0 + 1j * params.cf * (1.0 - g_cc)
    return num / (params.k_f * g_cc - 1.0)


def gfm_admittance_closed_form(params: GfmParams, op: OperatingPoint, s: complex,
                               omega0: float = OMEGA0) -> np.ndarray:
    """Block-triangular approximation of Y_GF(s) with an exactly zero upper-right entry.

    Uses the scalar voltage-loop admittance on the diagonal and the swing-equation
    coupling (Y^2 V_d0^2 - I'_gd0^2) / (J s^2 + D s) below it, evaluated as written
    (no grid inductor, no per-unit frequency scaling of J and D).
    """
    if params.j == 0 and params.d == 0:
        raise ValueError("swing equation degenerate")
    y = voltage_loop_admittance(params, s, omega0)
    igd0 = op.i_grid_global.real
    low = (y * y * op.v_d0 ** 2 - igd0 ** 2) / (params.j * s * s + params.d * s)
    return -np.array([[y, 0.0], [low, y]], dtype=complex)


def gfm_inner_admittance(params: GfmParams, op: OperatingPoint, omega0: float = OMEGA0) -> TransferMatrix:
    """Converter-frame admittance with the synchronization frozen (delta and omega held).

    Maps the grid voltage in the converter frame to -I_g; de-embedding the grid
    inductor recovers the scalar voltage-loop admittance.
    """
    lin = linearize(params, op, omega0)
    keep = list(range(12))
    a = lin.a[np.ix_(keep, keep)]
    b = np.zeros((12, 2))
    b[4:6] = -(omega0 / params.lg) * np.eye(2)
    c = np.zeros((2, 12))
    c[:, 4:6] = np.eye(2)
    return TransferMatrix(a, b, -c, np.zeros((2, 2)), params.states[:12], "gfm-inner")


def deembed_grid_inductor(inner: TransferMatrix, params: GfmParams, s: complex, omega0: float = OMEGA0) -> complex:
    """Capacitor-side admittance from the terminal-side frozen-frame admittance."""
    w = -complex_form(evaluate(inner, s))
    zg = params.lg / omega0 * (s + 1j * omega0)
    return w / (1.0 + w * zg)


def admittance_discrepancy(params: GfmParams, op: OperatingPoint, freqs_hz, omega0: float = OMEGA0) -> np.ndarray:
    """Relative deviation of the closed-form Y_GF from the exact realization, per frequency."""
    exact = gfm_admittance(params, op, omega0)
    out = []
    for f in np.atleast_1d(freqs_hz):
        s = 2j * np.pi * f
        ye = evaluate(exact, s)
        yc = gfm_admittance_closed_form(params, op, s, omega0)
        out.append(np.linalg.norm(ye - yc, 2) / np.linalg.norm(ye, 2))
    return np.array(out)
