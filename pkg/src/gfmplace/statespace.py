"""Real state-space realizations of small MIMO transfer matrices."""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy.linalg import block_diag

POLE_TOL = 1e-10


class PoleEvaluationError(ValueError):
    """Transfer matrix evaluated (numerically) at one of its poles."""


@dataclass(frozen=True)
class TransferMatrix:
    """G(s) = C (sI - A)^-1 B + D.

    Inputs and outputs are (d, q) pairs for the admittance models, but any
    shape is accepted so the same type serves for SISO building blocks.
    """

    a: np.ndarray
    b: np.ndarray
    c: np.ndarray
    d: np.ndarray
    state_labels: tuple = field(default=())
    name: str = ""

    def __post_init__(self):
        d = np.atleast_2d(np.asarray(self.d, dtype=float))
        n = np.asarray(self.a).shape[0] if np.asarray(self.a).size else 0
        a = np.asarray(self.a, dtype=float).reshape(n, n)
        b = np.asarray(self.b, dtype=float).reshape(n, d.shape[1])
        c = np.asarray(self.c, dtype=float).reshape(d.shape[0], n)
        for arr in (a, b, c, d):
            if not np.all(np.isfinite(arr)):
                raise ValueError("realization has non-finite entries")
            arr.setflags(write=False)
        labels = tuple(self.state_labels) or tuple(f"x{k}" for k in range(n))
        if len(labels) != n:
            raise ValueError("state label count does not match the state dimension")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "d", d)
        object.__setattr__(self, "state_labels", labels)

    @property
    def nstates(self) -> int:
        return self.a.shape[0]

    @property
    def shape(self) -> tuple[int, int]:
        return self.d.shape

    @cached_property
    def _poles(self) -> np.ndarray:
        p = np.linalg.eigvals(self.a) if self.nstates else np.zeros(0, complex)
        p.setflags(write=False)
        return p

    def poles(self) -> np.ndarray:
        return self._poles

    def __call__(self, s: complex) -> np.ndarray:
        return evaluate(self, s)

    def __neg__(self):
        return TransferMatrix(self.a, self.b, -self.c, -self.d, self.state_labels, self.name)

    def __mul__(self, k: float):
        return TransferMatrix(self.a, self.b, k * self.c, k * self.d, self.state_labels, self.name)

    __rmul__ = __mul__

    def relabel(self, prefix: str) -> "TransferMatrix":
        return TransferMatrix(
            self.a, self.b, self.c, self.d, tuple(f"{prefix}{s}" for s in self.state_labels), self.name
        )


def gain(k) -> TransferMatrix:
    k = np.atleast_2d(np.asarray(k, dtype=float))
    return TransferMatrix(np.zeros((0, 0)), np.zeros((0, k.shape[1])), np.zeros((k.shape[0], 0)), k)


def evaluate(tm: TransferMatrix, s: complex) -> np.ndarray:
    """C (sI - A)^-1 B + D at complex frequency ``s``."""
    s = complex(s)
    if tm.nstates == 0:
        return tm.d.astype(complex)
    m = s * np.eye(tm.nstates) - tm.a
    poles = tm.poles()
    scale = max(1.0, abs(s), float(np.abs(poles).max()))
    if np.min(np.abs(poles - s)) <= POLE_TOL * scale:
        raise PoleEvaluationError(f"evaluation at pole s={s}")
    return tm.c @ np.linalg.solve(m, tm.b.astype(complex)) + tm.d


def frequency_response(tm: TransferMatrix, freqs_hz) -> np.ndarray:
    """Stack of G(j 2 pi f), shape (len(freqs), ny, nu)."""
    return np.array([evaluate(tm, 2j * np.pi * f) for f in np.atleast_1d(freqs_hz)])


def series(g1: TransferMatrix, g2: TransferMatrix) -> TransferMatrix:
    """g2 after g1: y = g2 (g1 u)."""
    n1, n2 = g1.nstates, g2.nstates
    a = np.block([[g1.a, np.zeros((n1, n2))], [g2.b @ g1.c, g2.a]])
    b = np.vstack([g1.b, g2.b @ g1.d])
    c = np.hstack([g2.d @ g1.c, g2.c])
    d = g2.d @ g1.d
    return TransferMatrix(a, b, c, d, g1.state_labels + g2.state_labels)


def parallel(g1: TransferMatrix, g2: TransferMatrix) -> TransferMatrix:
    """y = g1 u + g2 u."""
    a = block_diag(g1.a, g2.a)
    b = np.vstack([g1.b, g2.b])
    c = np.hstack([g1.c, g2.c])
    return TransferMatrix(a, b, c, g1.d + g2.d, g1.state_labels + g2.state_labels)


def feedback(g: TransferMatrix, h: TransferMatrix, sign: float = -1.0) -> TransferMatrix:
    """Closed loop y = g e, e = u + sign * h y."""
    nu = g.d.shape[1]
    e = np.eye(nu) - sign * h.d @ g.d
    if np.linalg.cond(e) > 1e10:
        raise ValueError("ill-posed feedback interconnection")
    ei = np.linalg.inv(e)
    # e = ei (u + sign h_c xh), with y = g_c xg + g_d e
    a11 = g.a + sign * g.b @ ei @ h.d @ g.c
    a12 = sign * g.b @ ei @ h.c
    gd_ei = g.d @ ei
    a21 = h.b @ (g.c + sign * gd_ei @ h.d @ g.c)
    a22 = h.a + sign * h.b @ gd_ei @ h.c
    a = np.block([[a11, a12], [a21, a22]])
    b = np.vstack([g.b @ ei, h.b @ gd_ei])
    c = np.hstack([g.c + sign * gd_ei @ h.d @ g.c, sign * gd_ei @ h.c])
    return TransferMatrix(a, b, c, gd_ei, g.state_labels + h.state_labels)


def append(*gs: TransferMatrix) -> TransferMatrix:
    """Block-diagonal stacking of independent systems."""
    a = block_diag(*[g.a for g in gs])
    b = block_diag(*[g.b for g in gs])
    c = block_diag(*[g.c for g in gs])
    d = block_diag(*[g.d for g in gs])
    labels = sum((g.state_labels for g in gs), ())
    return TransferMatrix(a, b, c, d, labels)


def complex_form(m: np.ndarray) -> complex:
    """Complex transfer value represented by a 2x2 matrix [[Gd, -Gq], [Gq, Gd]]."""
    return complex(m[0, 0] + 1j * m[1, 0])


def minimality_margin(tm: TransferMatrix) -> float:
    """Smallest PBH rank margin over the poles; near zero flags a non-minimal realization."""
    n = tm.nstates
    if n == 0:
        return np.inf
    margins = []
    for lam in tm.poles():
        ctrb = np.hstack([lam * np.eye(n) - tm.a, tm.b])
        obsv = np.vstack([lam * np.eye(n) - tm.a, tm.c])
        scale = max(1.0, abs(lam))
        margins.append(np.linalg.svd(ctrb, compute_uv=False)[-1] / scale)
        margins.append(np.linalg.svd(obsv, compute_uv=False)[-1] / scale)
    return float(min(margins))


def write_bode_csv(path, tm: TransferMatrix, freqs_hz, header_lines=()) -> None:
    """Frequency (Hz) and the four entries of a 2x2 response as re/im pairs."""
    resp = frequency_response(tm, freqs_hz)
    cols = ["freq_hz"]
    for i in range(2):
        for j in range(2):
            cols += [f"g{i + 1}{j + 1}_re", f"g{i + 1}{j + 1}_im"]
    with open(path, "w", encoding="utf-8") as fh:
        for line in header_lines:
            fh.write(f"# {line}\n")
        fh.write(",".join(cols) + "\n")
        for f, g in zip(np.atleast_1d(freqs_hz), resp):
            vals = [f]
            for i in range(2):
                for j in range(2):
                    vals += [g[i, j].real, g[i, j].imag]
            fh.write(",".join(repr(float(v)) for v in vals) + "\n")
