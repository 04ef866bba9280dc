"""Grounded and Kron-reduced network Laplacians, grid strength and participation factors.

Node ids are kept on every matrix so that deletions and reductions always report
the original bus numbers.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Hashable, Iterable, Mapping, Sequence

import numpy as np

NodeId = Hashable

CONVERTER = "converter"
INTERIOR = "interior"
INFINITE = "infinite"
BUS_KINDS = (CONVERTER, INTERIOR, INFINITE)

SYMMETRY_TOL = 1e-9
# relative gap (lam2 - lam1) / lam1 below which lam1 is treated as repeated
DEGENERACY_TOL = 1e-8


class NetworkError(ValueError):
    """Invalid network description or reduction."""


class DegenerateEigenvalueError(NetworkError):
    pass


@dataclass(frozen=True)
class Bus:
    id: NodeId
    kind: str


@dataclass(frozen=True)
class Line:
    i: NodeId
    j: NodeId
    b: float


@dataclass(frozen=True)
class NetworkSpec:
    """Per-unit description of a grid with one infinite bus.

    ``capacities`` maps converter node ids to capacity ratios S_i.
    """

    buses: tuple[Bus, ...]
    lines: tuple[Line, ...]
    tau: float = 0.0
    omega0: float = 100 * np.pi
    capacities: Mapping[NodeId, float] = field(default_factory=dict)
    name: str = ""

    def __post_init__(self):
        object.__setattr__(self, "buses", tuple(self.buses))
        object.__setattr__(self, "lines", tuple(self.lines))
        object.__setattr__(self, "capacities", dict(self.capacities))
        validate_network(self)

    def nodes_of_kind(self, kind: str) -> list[NodeId]:
        return [b.id for b in self.buses if b.kind == kind]

    @property
    def converter_nodes(self) -> list[NodeId]:
        return self.nodes_of_kind(CONVERTER)

    @property
    def interior_nodes(self) -> list[NodeId]:
        return self.nodes_of_kind(INTERIOR)

    @property
    def infinite_bus(self) -> NodeId:
        return self.nodes_of_kind(INFINITE)[0]

    def capacity_vector(self, nodes: Sequence[NodeId] | None = None) -> np.ndarray:
        nodes = self.converter_nodes if nodes is None else nodes
        return np.array([self.capacities.get(n, 1.0) for n in nodes], dtype=float)


def validate_network(spec: NetworkSpec) -> None:
    ids = [b.id for b in spec.buses]
    if len(set(ids)) != len(ids):
        raise NetworkError("duplicate bus id")
    for b in spec.buses:
        if b.kind not in BUS_KINDS:
            raise NetworkError(f"bus {b.id!r}: unknown kind {b.kind!r}")
    kinds = [b.kind for b in spec.buses]
    if kinds.count(INFINITE) != 1:
        raise NetworkError("network needs exactly one infinite bus")
    if kinds.count(CONVERTER) < 1:
        raise NetworkError("network needs at least one converter node")
    if not (spec.tau >= 0 and np.isfinite(spec.tau)):
        raise NetworkError("tau must be >= 0")
    if not spec.omega0 > 0:
        raise NetworkError("omega0 must be > 0")

    known = set(ids)
    seen = set()
    for ln in spec.lines:
        if ln.i not in known or ln.j not in known:
            raise NetworkError(f"line ({ln.i!r}, {ln.j!r}) references an unknown bus")
        if ln.i == ln.j:
            raise NetworkError(f"line ({ln.i!r}, {ln.j!r}) is a self loop")
        if not (ln.b > 0 and np.isfinite(ln.b)):
            raise NetworkError(f"line ({ln.i!r}, {ln.j!r}): susceptance must be > 0")
        key = frozenset((ln.i, ln.j))
        if key in seen:
            raise NetworkError(f"duplicate line ({ln.i!r}, {ln.j!r})")
        seen.add(key)

    for node, s in spec.capacities.items():
        if node not in known:
            raise NetworkError(f"capacity given for unknown bus {node!r}")
        if not (s > 0 and np.isfinite(s)):
            raise NetworkError(f"capacity of bus {node!r} must be > 0")

    # every bus must reach the infinite bus
    adj: dict = {n: [] for n in ids}
    for ln in spec.lines:
        adj[ln.i].append(ln.j)
        adj[ln.j].append(ln.i)
    root = spec.infinite_bus
    reached = {root}
    queue = deque([root])
    while queue:
        for nb in adj[queue.popleft()]:
            if nb not in reached:
                reached.add(nb)
                queue.append(nb)
    missing = [n for n in ids if n not in reached]
    if missing:
        raise NetworkError(f"no path to infinite bus from {missing}")


@dataclass(frozen=True)
class GroundedLaplacian:
    q: np.ndarray
    node_order: tuple

    def __post_init__(self):
        q = np.array(self.q, dtype=float)
        q.setflags(write=False)
        object.__setattr__(self, "q", q)
        object.__setattr__(self, "node_order", tuple(self.node_order))
        if q.shape != (len(self.node_order),) * 2:
            raise NetworkError("matrix shape does not match node labels")

    def index(self, nodes: Iterable[NodeId]) -> list[int]:
        pos = {n: k for k, n in enumerate(self.node_order)}
        try:
            return [pos[n] for n in nodes]
        except KeyError as exc:
            raise NetworkError(f"unknown node {exc.args[0]!r}") from None


@dataclass(frozen=True)
class WeightedLaplacian:
    """Symmetric S^-1/2 Q_red S^-1/2 over converter nodes."""

    l: np.ndarray
    node_order: tuple
    s_diag: np.ndarray

    def __post_init__(self):
        l = np.array(self.l, dtype=float)
        l.setflags(write=False)
        s = np.array(self.s_diag, dtype=float)
        s.setflags(write=False)
        object.__setattr__(self, "l", l)
        object.__setattr__(self, "s_diag", s)
        object.__setattr__(self, "node_order", tuple(self.node_order))
        if l.shape != (len(self.node_order),) * 2 or s.shape != (len(self.node_order),):
            raise NetworkError("matrix shape does not match node labels")

    def __len__(self):
        return len(self.node_order)

    def eigh(self):
        return np.linalg.eigh(self.l)


def build_grounded_laplacian(spec: NetworkSpec) -> GroundedLaplacian:
    """Q_ij = -B_ij, Q_ii = sum_j B_ij with the infinite bus folded into the diagonal."""
    ground = spec.infinite_bus
    nodes = [b.id for b in spec.buses if b.id != ground]
    pos = {n: k for k, n in enumerate(nodes)}
    q = np.zeros((len(nodes), len(nodes)))
    for ln in spec.lines:
        for a in (ln.i, ln.j):
            if a != ground:
                q[pos[a], pos[a]] += ln.b
        if ln.i != ground and ln.j != ground:
            q[pos[ln.i], pos[ln.j]] -= ln.b
            q[pos[ln.j], pos[ln.i]] -= ln.b
    return GroundedLaplacian(q, nodes)


def kron_reduce(q: GroundedLaplacian, interior: Iterable[NodeId]) -> GroundedLaplacian:
    """Eliminate zero-injection nodes: Q_red = Q1 - Q2 Q4^-1 Q3."""
    interior = list(dict.fromkeys(interior))
    if not interior:
        return q
    drop = q.index(interior)
    keep = [k for k in range(len(q.node_order)) if k not in set(drop)]
    if not keep:
        raise NetworkError("cannot eliminate every node")
    m = q.q
    q4 = m[np.ix_(drop, drop)]
    cond = np.linalg.cond(q4)
    if not np.isfinite(cond) or cond > 1e12:
        raise NetworkError("interior block singular")
    q2 = m[np.ix_(keep, drop)]
    red = m[np.ix_(keep, keep)] - q2 @ np.linalg.solve(q4, m[np.ix_(drop, keep)])
    red = 0.5 * (red + red.T)
    return GroundedLaplacian(red, [q.node_order[k] for k in keep])


def reduce_network(spec: NetworkSpec) -> GroundedLaplacian:
    """Grounded Laplacian of ``spec`` with every interior node eliminated."""
    return kron_reduce(build_grounded_laplacian(spec), spec.interior_nodes)


def weighted_laplacian(q_red: GroundedLaplacian, capacities) -> WeightedLaplacian:
    """S^-1/2 Q_red S^-1/2; ``capacities`` is a mapping by node id or a sequence in node order."""
    if isinstance(capacities, Mapping):
        missing = [n for n in q_red.node_order if n not in capacities]
        if missing:
            raise NetworkError(f"missing capacity for nodes {missing}")
        s = np.array([capacities[n] for n in q_red.node_order], dtype=float)
    else:
        s = np.asarray(capacities, dtype=float).ravel()
        if s.shape != (len(q_red.node_order),):
            raise NetworkError("capacity vector length does not match node count")
    if not np.all(np.isfinite(s)) or np.any(s <= 0):
        raise NetworkError("capacities must be > 0")
    w = 1.0 / np.sqrt(s)
    l = w[:, None] * q_red.q * w[None, :]
    return WeightedLaplacian(0.5 * (l + l.T), q_red.node_order, s)


def _check_symmetric(l: np.ndarray) -> None:
    scale = max(1.0, float(np.abs(l).max(initial=0.0)))
    if np.abs(l - l.T).max(initial=0.0) > SYMMETRY_TOL * scale:
        raise NetworkError("matrix is not symmetric")


def gscr(l: WeightedLaplacian) -> float:
    """Generalized short-circuit ratio: smallest eigenvalue of the weighted Laplacian."""
    _check_symmetric(l.l)
    return float(np.linalg.eigvalsh(l.l)[0])


def lambda_min(l: WeightedLaplacian) -> float:
    return float(np.linalg.eigvalsh(l.l)[0])


def participation_factors(l: WeightedLaplacian) -> np.ndarray:
    """Sensitivities d(lam1)/d(L_ii) = v_1i * u_1i of the smallest eigenvalue.

    For the symmetric matrix the left and right eigenvectors coincide, so the
    factors are u_1i**2: nonnegative and summing to one.
    """
    _check_symmetric(l.l)
    w, u = np.linalg.eigh(l.l)
    if len(w) > 1 and (w[1] - w[0]) <= DEGENERACY_TOL * abs(w[0]):
        raise DegenerateEigenvalueError("degenerate smallest eigenvalue")
    u1 = u[:, 0]
    return u1 * u1


def delete_nodes(l: WeightedLaplacian, victims: Iterable[NodeId]) -> WeightedLaplacian:
    """Principal submatrix with the rows/columns of ``victims`` removed."""
    victims = set(victims)
    unknown = victims - set(l.node_order)
    if unknown:
        raise NetworkError(f"unknown nodes {sorted(unknown, key=str)}")
    keep = [k for k, n in enumerate(l.node_order) if n not in victims]
    if not keep:
        raise NetworkError("cannot delete all nodes")
    return WeightedLaplacian(
        l.l[np.ix_(keep, keep)],
        [l.node_order[k] for k in keep],
        l.s_diag[keep],
    )


def partition(q_red: GroundedLaplacian, node: NodeId):
    """Split Q_red around one node: (Q_n, Q_{n,1}, Q_{1,n}, Q_{n+1}, remaining node order)."""
    (k,) = q_red.index([node])
    rest = [i for i in range(len(q_red.node_order)) if i != k]
    m = q_red.q
    return (
        m[np.ix_(rest, rest)],
        m[rest, k][:, None],
        m[k, rest][None, :],
        float(m[k, k]),
        [q_red.node_order[i] for i in rest],
    )


def write_matrix_csv(path, matrix: np.ndarray, labels: Sequence, header_lines: Sequence[str] = ()) -> None:
    """CSV with a node-label header row, preceded by optional ``#`` comment lines."""
    with open(path, "w", encoding="utf-8") as fh:
        for line in header_lines:
            fh.write(f"# {line}\n")
        fh.write(",".join(["node"] + [str(n) for n in labels]) + "\n")
        for n, row in zip(labels, np.asarray(matrix)):
            fh.write(",".join([str(n)] + [repr(float(v)) for v in row]) + "\n")


def read_matrix_csv(path) -> tuple[np.ndarray, list[str]]:
    rows = []
    labels = None
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if line.startswith("#") or not line.strip():
                continue
            parts = line.strip().split(",")
            if labels is None:
                labels = parts[1:]
            else:
                rows.append([float(v) for v in parts[1:]])
    return np.array(rows), labels or []
