"""Closed-loop multi-converter model, eigen analysis and the decoupled dominant-pole tools.

The network is purely inductive with a common R/L ratio, so it is described
by ``I' = (Q_red kron F(s)) U'``. Every converter terminal sits behind its own
grid-side inductor, which makes the network currents functions of converter
states. The terminal voltages are therefore eliminated algebraically
(``U' = (Q_red^-1 kron F^-1(s)) I'``) and no separate line states appear.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

import numpy as np
from scipy.linalg import block_diag

from .converters import (
    JM,
    OMEGA0,
    GfmParams,
    LinearConverter,
    PllParams,
    linearize,
    solve_operating_point,
)
from .netmodel import GroundedLaplacian, NetworkError, WeightedLaplacian
from .statespace import TransferMatrix, evaluate

# modes slower than 1 Hz are treated as non-oscillatory drift
OSC_THRESHOLD = 2 * np.pi
WELL_POSED_COND = 1e10


class IllPosedInterconnection(ValueError):
    pass


class BranchUndefined(ValueError):
    pass


@dataclass(frozen=True)
class ConverterAssignment:
    """Converter parameters per node; all operating points use ``v_grid``."""

    units: Mapping
    v_grid: complex = 1.0

    def __post_init__(self):
        units = dict(self.units)
        if not units:
            raise ValueError("empty converter assignment")
        for node, p in units.items():
            if not isinstance(p, (PllParams, GfmParams)):
                raise TypeError(f"node {node}: unsupported converter parameters {type(p).__name__}")
        object.__setattr__(self, "units", units)

    @property
    def nodes(self) -> tuple:
        return tuple(self.units)

    def kind(self, node) -> str:
        return self.units[node].kind

    def gfm_nodes(self) -> list:
        return [n for n, p in self.units.items() if p.kind == "gfm"]

    def pll_nodes(self) -> list:
        return [n for n, p in self.units.items() if p.kind == "pll"]

    def linear_models(self, omega0: float = OMEGA0) -> dict:
        cache = {}
        out = {}
        for node, p in self.units.items():
            if p not in cache:
                cache[p] = linearize(p, solve_operating_point(p, self.v_grid, omega0=omega0), omega0)
            out[node] = cache[p]
        return out

    def with_kinds(self, pll: PllParams, gfm: GfmParams, gfm_nodes) -> "ConverterAssignment":
        gfm_nodes = set(gfm_nodes)
        return ConverterAssignment({n: (gfm if n in gfm_nodes else pll) for n in self.units}, self.v_grid)


def uniform_assignment(nodes, pll: PllParams, gfm: GfmParams | None = None, gfm_nodes=(), v_grid=1.0):
    gfm_nodes = set(gfm_nodes)
    if gfm_nodes and gfm is None:
        raise ValueError("grid-forming nodes given without grid-forming parameters")
    unknown = gfm_nodes - set(nodes)
    if unknown:
        raise ValueError(f"grid-forming nodes {sorted(unknown, key=str)} are not converter nodes")
    return ConverterAssignment({n: (gfm if n in gfm_nodes else pll) for n in nodes}, v_grid)


@dataclass(frozen=True)
class ClosedLoopModel:
    """dx/dt = a x + e d,  dP_E = p_out x.

    ``e`` has one column per converter (its power reference), ``p_out`` one
    row per converter (its active-power output).
    """

    a: np.ndarray
    e: np.ndarray
    p_out: np.ndarray
    state_labels: tuple
    nodes: tuple
    kinds: tuple
    name: str = ""

    def __post_init__(self):
        if not np.all(np.isfinite(self.a)):
            raise ValueError("closed-loop matrix has non-finite entries")

    @property
    def nstates(self) -> int:
        return self.a.shape[0]


@dataclass(frozen=True)
class EigenReport:
    eigenvalues: np.ndarray
    damping: np.ndarray
    dominant: complex | None
    dominant_damping: float | None
    labels: tuple = field(default=())

    @property
    def freq_hz(self) -> np.ndarray:
        return np.abs(self.eigenvalues.imag) / (2 * np.pi)


def line_params(f: TransferMatrix) -> tuple[float, float]:
    """(tau, omega0) of a realization produced by ``line_dynamics``."""
    a = f.a
    if a.shape != (2, 2):
        raise ValueError("line block must be the realization returned by line_dynamics")
    tau, w0 = -a[0, 0], a[0, 1]
    expect_a = -(tau * np.eye(2) + w0 * JM)
    if (a.shape != (2, 2) or not np.allclose(a, expect_a, rtol=1e-12, atol=1e-12)
            or not np.allclose(f.b, w0 * np.eye(2)) or not np.allclose(f.c, np.eye(2))
            or np.any(f.d)):
        raise ValueError("line block must be the realization returned by line_dynamics")
    return float(tau), float(w0)


def _qred_and_s(l_or_qred, capacities, nodes):
    if isinstance(l_or_qred, WeightedLaplacian):
        order = l_or_qred.node_order
        s = l_or_qred.s_diag
        r = np.sqrt(s)
        q = r[:, None] * l_or_qred.l * r[None, :]
    else:
        if isinstance(l_or_qred, GroundedLaplacian):
            order, q = l_or_qred.node_order, l_or_qred.q
        else:
            q = np.atleast_2d(np.asarray(l_or_qred, float))
            order = tuple(nodes) if len(nodes) == q.shape[0] else tuple(range(q.shape[0]))
        if capacities is None:
            s = np.ones(len(order))
        elif isinstance(capacities, Mapping):
            s = np.array([capacities[n] for n in order], float)
        else:
            s = np.asarray(capacities, float).ravel()
    if set(order) != set(nodes) or len(order) != len(nodes):
        raise NetworkError("converter assignment does not cover exactly the network's converter nodes")
    return np.asarray(q, float), np.asarray(s, float), tuple(order)


def assemble_closed_loop(l_or_qred, capacities, assignment: ConverterAssignment, f: TransferMatrix,
                         name: str = "") -> ClosedLoopModel:
    """Interconnect converters and network into one state matrix.

    With ``I_g = Cx x`` (system base), ``F^-1(s) = (s + tau + w0 j) / w0`` gives
    ``U = K (d/dt I_g + M I_g)``; substituting the converter dynamics yields the
    algebraic loop ``(I - K Cx B) U = K (Cx A + M Cx) x``.
    """
    if not assignment.units:
        raise ValueError("no converters")
    tau, w0 = line_params(f)
    q, s, order = _qred_and_s(l_or_qred, capacities, assignment.nodes)
    lins: dict = assignment.linear_models(w0)
    blocks: list[LinearConverter] = [lins[n] for n in order]

    a = block_diag(*[b.a for b in blocks])
    b = block_diag(*[m.b for m in blocks])
    cx = block_diag(*[si * m.c for si, m in zip(s, blocks)])
    e = block_diag(*[m.e[:, None] for m in blocks])
    p_out = block_diag(*[m.p_row[None, :] for m in blocks])

    k = np.kron(np.linalg.inv(q), np.eye(2)) / w0
    mm = np.kron(np.eye(len(order)), tau * np.eye(2) + w0 * JM)
    loop = np.eye(2 * len(order)) - k @ cx @ b
    cond = np.linalg.cond(loop)
    if not np.isfinite(cond) or cond > WELL_POSED_COND:
        raise IllPosedInterconnection("ill-posed interconnection")
    g = np.linalg.solve(loop, k @ (cx @ a + mm @ cx))
    h = np.linalg.solve(loop, k @ cx @ e)
    a_cl = a + b @ g
    e_cl = e + b @ h

    labels = tuple(f"{n}:{lab}" for n, m in zip(order, blocks) for lab in m.state_labels)
    kinds = tuple(m.kind for m in blocks)
    return ClosedLoopModel(a_cl, e_cl, p_out, labels, order, kinds, name)


def _sort_eigs(w: np.ndarray) -> np.ndarray:
    return w[np.lexsort((w.imag, w.real))]


def damping_ratio(lam) -> np.ndarray:
    lam = np.asarray(lam, complex)
    mag = np.abs(lam)
    with np.errstate(invalid="ignore", divide="ignore"):
        return np.where(mag > 0, -lam.real / np.where(mag > 0, mag, 1.0), 1.0)


def dominant_mode(eigs, band=(OSC_THRESHOLD, np.inf)):
    """Least-damped eigenvalue with band[0] < Im < band[1] (upper half plane)."""
    eigs = np.asarray(eigs, complex)
    sel = eigs[(eigs.imag > band[0]) & (eigs.imag < band[1])]
    if len(sel) == 0:
        return None, None
    z = damping_ratio(sel)
    k = int(np.lexsort((sel.imag, z))[0])
    return complex(sel[k]), float(z[k])


def eigen_report(model, band=(OSC_THRESHOLD, np.inf)) -> EigenReport:
    """Spectrum sorted by real then imaginary part, with the dominant oscillatory pair.

    ``band`` limits the dominant-pair search in rad/s.
    """
    a = model.a if isinstance(model, ClosedLoopModel) else np.asarray(model, float)
    w, v = np.linalg.eig(a)
    order = np.lexsort((w.imag, w.real))
    w, v = w[order], v[:, order]
    labels = ()
    if isinstance(model, ClosedLoopModel):
        labels = tuple(model.state_labels[int(np.argmax(np.abs(v[:, k])))] for k in range(len(w)))
    dom, zeta = dominant_mode(w, band)
    return EigenReport(w, damping_ratio(w), dom, zeta, labels)


def write_eigen_csv(path, report: EigenReport, header_lines=()) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for line in header_lines:
            fh.write(f"# {line}\n")
        fh.write("re,im,damping,freq_hz,label\n")
        labels = report.labels or ("",) * len(report.eigenvalues)
        for lam, z, f, lab in zip(report.eigenvalues, report.damping, report.freq_hz, labels):
            fh.write(f"{lam.real!r},{lam.imag!r},{float(z)!r},{float(f)!r},{lab}\n")


# --------------------------------------------------------------------------- determinant roots

def _cleared_det(y: TransferMatrix, f: TransferMatrix, lam: float):
    """det(Y + lam F) multiplied by the pole polynomials of Y and F.

    The product is entire, so deflated Newton behaves as on a polynomial.
    """
    poles = np.concatenate([y.poles(), f.poles()])
    # scaling keeps the pole product in floating-point range; zeros are unchanged
    scale = max(1.0, float(np.abs(poles).max(initial=0.0)))

    def p(s):
        with np.errstate(over="ignore", invalid="ignore"):
            return np.linalg.det(evaluate(y, s) + lam * evaluate(f, s)) * np.prod((s - poles) / scale)
    return p


def _newton(p, s0, known, max_iter=100, tol=1e-13):
    s = complex(s0)
    for _ in range(max_iter):
        try:
            pv = p(s)
            h = 1e-6 * max(1.0, abs(s))
            dp = (p(s + h) - p(s - h)) / (2 * h)
        except ValueError:
            s += 1e-6 * (1 + abs(s)) * (1 + 1j)
            continue
        if pv == 0:
            return s
        if not (np.isfinite(pv) and np.isfinite(dp)):
            return None
        ratio = dp / pv - sum(1.0 / (s - r) for r in known)
        if ratio == 0 or not np.isfinite(ratio):
            return None
        ds = 1.0 / ratio
        s -= ds
        if not np.isfinite(s):
            return None
        if abs(ds) < tol * max(1.0, abs(s)):
            return s
    return None


def determinant_roots(y: TransferMatrix, f: TransferMatrix, lam: float, seeds=(), grid=(4, 6),
                      omega0: float | None = None, dedupe: float = 1e-4) -> np.ndarray:
    """Zeros of det(Y(s) + lam F(s)) by deflated Newton iteration.

    Seeds are the given points plus a grid over Re in [-2 w0, 0], Im in [0, 2 w0].
    Each new root deflates the function (together with its conjugate), so later
    starts are pushed towards roots not yet found.
    """
    if omega0 is None:
        omega0 = line_params(f)[1]
    p = _cleared_det(y, f, lam)
    # upper bound on the number of zeros of the cleared determinant
    n_max = 2 * (y.nstates + f.nstates)
    starts = [complex(z) for z in np.ravel(seeds)]
    sig = np.linspace(-2 * omega0, 0, grid[0])
    om = np.linspace(0, 2 * omega0, grid[1])
    starts += [complex(a, b) for a in sig for b in om]
    found: list[complex] = []
    for z in starts:
        known = found + [r.conjugate() for r in found if r.imag != 0]
        if len(known) >= n_max:
            break
        # nudge off the real axis so complex roots are reachable
        r = _newton(p, z + 1e-7j * (1 + abs(z)), known)
        if r is None:
            continue
        r = _newton(p, r, [], max_iter=20, tol=1e-15) or r
        if abs(r.imag) < dedupe:
            r = complex(r.real, 0.0)
        elif r.imag < 0:
            r = r.conjugate()
        if all(abs(r - k) > dedupe for k in found):
            found.append(r)
    roots = found + [r.conjugate() for r in found if r.imag != 0]
    return _sort_eigs(np.array(roots, complex))


def decoupled_dominant_poles(y_pll: TransferMatrix, f: TransferMatrix, lambdas, seeds=None,
                             band=(OSC_THRESHOLD, np.inf)) -> list:
    """Per-eigenvalue root sets of det(Y_PLL + lam_i F) = 0.

    ``seeds``, if given, holds one array of starting points per lambda.
    Returns one entry per ``lambdas[i]``: a dict with the oscillatory roots in
    ``band``, the least-damped of them and a convergence flag.
    """
    out = []
    for i, lam in enumerate(lambdas):
        sd = () if seeds is None else np.ravel(seeds[i])
        try:
            roots = determinant_roots(y_pll, f, float(lam), seeds=sd)
            osc = roots[(np.abs(roots.imag) > band[0]) & (np.abs(roots.imag) < band[1])]
            dom, z = dominant_mode(roots, band)
            out.append({"lambda": float(lam), "roots": roots, "oscillatory": osc,
                        "dominant": dom, "damping": z, "converged": True})
        except (ValueError, np.linalg.LinAlgError) as exc:
            out.append({"lambda": float(lam), "roots": np.zeros(0, complex), "oscillatory": np.zeros(0, complex),
                        "dominant": None, "damping": None, "converged": False, "error": str(exc)})
    return out


# --------------------------------------------------------------------------- gamma and delta-lambda

def _eig_branches(m: np.ndarray):
    w, v = np.linalg.eig(m)
    scale = max(1.0, float(np.abs(w).max()))
    if abs(w[0] - w[1]) < 1e-9 * scale or np.linalg.cond(v) > 1e8:
        raise BranchUndefined("branch undefined: defective matrix")
    a = np.linalg.inv(v).T  # columns: left eigenvectors with a_k^T v_k = 1
    return w, a, v


def gamma_branch(y_pll: TransferMatrix, f: TransferMatrix, s: complex, target=None, previous=None):
    """One eigenvalue branch gamma of Y_PLL(s) F(s)^-1 with its left/right eigenvectors.

    The branch is chosen by overlap with ``previous`` (a right eigenvector from a
    nearby frequency) when given, otherwise by proximity of gamma to ``target``,
    otherwise the branch of smallest |gamma|. The pair satisfies a^T b = 1.
    """
    fs = evaluate(f, s)
    m = evaluate(y_pll, s) @ np.linalg.inv(fs)
    w, a, v = _eig_branches(m)
    if previous is not None:
        prev = np.asarray(previous, complex)
        ov = [abs(np.vdot(prev, v[:, k])) / (np.linalg.norm(prev) * np.linalg.norm(v[:, k])) for k in range(2)]
        k = int(np.argmax(ov))
    elif target is not None:
        k = int(np.argmin(np.abs(w - target)))
    else:
        k = int(np.argmin(np.abs(w)))
    return complex(w[k]), a[:, k], v[:, k]


def gamma_sweep(y_pll: TransferMatrix, f: TransferMatrix, s_values, seed_index: int = 0, target=None):
    """Track one branch of gamma over ``s_values`` by eigenvector continuity from ``seed_index``."""
    s_values = list(s_values)
    n = len(s_values)
    gam = np.zeros(n, complex)
    avs = [None] * n
    bvs = [None] * n
    g, a, b = gamma_branch(y_pll, f, s_values[seed_index], target=target)
    gam[seed_index], avs[seed_index], bvs[seed_index] = g, a, b
    for rng in (range(seed_index + 1, n), range(seed_index - 1, -1, -1)):
        prev = bvs[seed_index]
        for k in rng:
            g, a, b = gamma_branch(y_pll, f, s_values[k], previous=prev)
            gam[k], avs[k], bvs[k] = g, a, b
            prev = b
    return gam, avs, bvs


def weighted_eigvecs(q_n: np.ndarray, s_b) -> tuple[float, np.ndarray, np.ndarray]:
    """Smallest eigenvalue of S_B^-1 Q_n with left/right eigenvectors x, y (x^T y = 1)."""
    s_b = np.asarray(s_b, float).ravel()
    r = np.sqrt(s_b)
    l = q_n / r[:, None] / r[None, :]
    w, u = np.linalg.eigh(0.5 * (l + l.T))
    u1 = u[:, 0]
    return float(w[0]), r * u1, u1 / r


def delta_lambda(q_n, q_n1, q_1n, s_b, x, y, y_gf: TransferMatrix, f: TransferMatrix, s: complex,
                 branch=None, lam=None, s_gf: float = 1.0, y_pll: TransferMatrix | None = None) -> complex:
    """First-order shift of the weakest-subsystem eigenvalue caused by one grid-forming node.

    ``branch`` is the (a, b) eigenvector pair of Y_PLL F^-1 at ``s``; if omitted
    it is computed from ``y_pll`` on the branch nearest to ``-lam``.
    """
    x = np.asarray(x, float).ravel()
    y = np.asarray(y, float).ravel()
    s_b = np.asarray(s_b, float).ravel()
    if abs(x @ y - 1.0) > 1e-8:
        raise ValueError("eigenvectors must satisfy x^T y = 1")
    net = float(x @ (np.asarray(q_n1).ravel() / s_b) * (np.asarray(q_1n).ravel() @ y))
    if branch is None:
        if y_pll is None:
            raise ValueError("need either the eigenvector branch or Y_PLL")
        _, av, bv = gamma_branch(y_pll, f, s, target=None if lam is None else -lam)
    else:
        av, bv = branch
    ygf = s_gf * evaluate(y_gf, s)
    if np.linalg.cond(ygf) > 1e12:
        raise np.linalg.LinAlgError("Y_GF singular at s")
    conv = complex(np.asarray(av) @ evaluate(f, s) @ np.linalg.solve(ygf, np.asarray(bv)))
    return -net * conv


def delta_lambda_sweep(q_red: GroundedLaplacian, capacities, gfm_node, y_pll, y_gf, f, freqs_hz):
    """|Delta lambda(j 2 pi f)| over a frequency grid for one grid-forming node."""
    from .netmodel import partition

    q_n, q_n1, q_1n, _, rest = partition(q_red, gfm_node)
    if isinstance(capacities, Mapping):
        s_b = np.array([capacities[n] for n in rest], float)
        s_gf = float(capacities[gfm_node])
    else:
        s_all = np.asarray(capacities, float)
        k = q_red.index([gfm_node])[0]
        s_b = np.delete(s_all, k)
        s_gf = float(s_all[k])
    lam, x, y = weighted_eigvecs(q_n, s_b)
    freqs = np.atleast_1d(np.asarray(freqs_hz, float))
    s_vals = 2j * np.pi * freqs
    _, avs, bvs = gamma_sweep(y_pll, f, s_vals, seed_index=0, target=-lam)
    vals = np.array([delta_lambda(q_n, q_n1, q_1n, s_b, x, y, y_gf, f, sv, branch=(a, b), s_gf=s_gf)
                     for sv, a, b in zip(s_vals, avs, bvs)])
    return lam, vals


def write_dlambda_csv(path, freqs_hz, values, header_lines=()) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for line in header_lines:
            fh.write(f"# {line}\n")
        fh.write("freq_hz,magnitude,phase_deg\n")
        for fr, v in zip(np.atleast_1d(freqs_hz), values):
            fh.write(f"{float(fr)!r},{float(abs(v))!r},{float(np.degrees(np.angle(v)))!r}\n")


def characteristic_residual(q_red, capacities, assignment: ConverterAssignment, f: TransferMatrix,
                            s: complex) -> complex:
    """det(S Y(s) + Q_red kron F(s)) for a configuration with exactly one grid-forming node."""
    if len(assignment.gfm_nodes()) != 1:
        raise ValueError("characteristic residual needs exactly one grid-forming converter; "
                         "use the decoupled path for all-PLL systems")
    q, sv, order = _qred_and_s(q_red, capacities, assignment.nodes)
    lins = assignment.linear_models(line_params(f)[1])
    ys = [si * evaluate(lins[n].admittance(), s) for si, n in zip(sv, order)]
    mat = block_diag(*ys) + np.kron(q, evaluate(f, s))
    return complex(np.linalg.det(mat))
