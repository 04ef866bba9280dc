"""Grid-forming placement: exhaustive search and greedy node deletion."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from itertools import combinations
from math import comb

import numpy as np

from .netmodel import (
    DegenerateEigenvalueError,
    WeightedLaplacian,
    delete_nodes,
    lambda_min,
    participation_factors,
)

log = logging.getLogger(__name__)

ENUMERATION_CAP = 10**6
METHODS = ("enumeration", "greedy-exact", "greedy-participation")


class EnumerationTooLarge(ValueError):
    pass


@dataclass(frozen=True)
class TraceStep:
    """One greedy iteration: scores per remaining node, the pick and the new lambda_min."""

    candidates: tuple
    scores: tuple
    selected: object
    lambda_after: float
    kind: str  # "exact" or "participation"
    fallback: bool = False


@dataclass(frozen=True)
class PlacementSolution:
    chosen: tuple
    lambda_min_achieved: float
    method: str
    trace: tuple = field(default=())
    table: tuple = field(default=())  # enumeration only: (subset, lambda_min) rows


def _node_key(n):
    # ints sort numerically, everything else by string
    return (0, n, "") if isinstance(n, (int, np.integer)) else (1, 0, str(n))


def _check_q(l: WeightedLaplacian, q: int):
    if not isinstance(q, (int, np.integer)) or q < 1 or q >= len(l):
        raise ValueError(f"q must satisfy 1 <= q < {len(l)}, got {q}")


def solve_enumeration(l: WeightedLaplacian, q: int, cap: int = ENUMERATION_CAP) -> PlacementSolution:
    """Best q-subset to delete, over all subsets; ties go to the lexicographically smallest set."""
    _check_q(l, q)
    total = comb(len(l), q)
    if total > cap:
        raise EnumerationTooLarge(f"enumeration too large, use greedy ({total} subsets > cap {cap})")
    nodes = sorted(l.node_order, key=_node_key)
    rows = []
    best, best_val = None, -np.inf
    for subset in combinations(nodes, q):
        val = lambda_min(delete_nodes(l, subset))
        rows.append((subset, val))
        # combinations() yields sets in lexicographic order, so strict > keeps the smallest tie
        if val > best_val:
            best, best_val = subset, val
    return PlacementSolution(tuple(best), float(best_val), "enumeration", (), tuple(rows))


def step2_exact(l_i: WeightedLaplacian):
    """Node whose deletion leaves the largest lambda_min, with the full score table."""
    if len(l_i) < 2:
        raise ValueError("need at least two nodes")
    nodes = sorted(l_i.node_order, key=_node_key)
    scores = {n: lambda_min(delete_nodes(l_i, [n])) for n in nodes}
    # smallest id wins ties
    top = max(scores.values())
    best = next(n for n in nodes if scores[n] == top)
    return best, scores


def step2_participation(l_i: WeightedLaplacian):
    """Node with the largest participation factor in lambda_min, with the factor table."""
    factors = participation_factors(l_i)
    table = dict(zip(l_i.node_order, (float(v) for v in factors)))
    nodes = sorted(l_i.node_order, key=_node_key)
    top = max(table.values())
    best = next(n for n in nodes if table[n] == top)
    return best, table


def greedy_place(l: WeightedLaplacian, q: int, inner: str = "exact") -> PlacementSolution:
    """Delete q nodes one at a time using the exact or participation-factor inner step."""
    _check_q(l, q)
    if inner not in ("exact", "participation"):
        raise ValueError(f"unknown inner step {inner!r}")
    cur = l
    chosen = []
    trace = []
    for _ in range(q):
        fallback = False
        kind = inner
        if inner == "participation":
            try:
                node, table = step2_participation(cur)
            except DegenerateEigenvalueError:
                log.warning("repeated smallest eigenvalue; using the exact step for this iteration")
                node, table = step2_exact(cur)
                kind, fallback = "exact", True
        else:
            node, table = step2_exact(cur)
        cur = delete_nodes(cur, [node])
        chosen.append(node)
        trace.append(TraceStep(tuple(table), tuple(table.values()), node, lambda_min(cur), kind, fallback))
    return PlacementSolution(tuple(chosen), lambda_min(cur), f"greedy-{inner}", tuple(trace))


def place(l: WeightedLaplacian, q: int, method: str, cap: int = ENUMERATION_CAP) -> PlacementSolution:
    if method == "enumeration":
        return solve_enumeration(l, q, cap)
    if method == "greedy-exact":
        return greedy_place(l, q, "exact")
    if method == "greedy-participation":
        return greedy_place(l, q, "participation")
    raise ValueError(f"unknown method {method!r}; expected one of {METHODS}")


def format_solution(sol: PlacementSolution, digits: int = 4) -> str:
    lines = [f"method: {sol.method}",
             f"chosen: {', '.join(str(n) for n in sol.chosen)}",
             f"lambda_min: {sol.lambda_min_achieved:.{digits}f}"]
    if sol.table:
        lines.append("subset  lambda_min")
        for subset, val in sol.table:
            lines.append(f"{{{','.join(str(n) for n in subset)}}}  {val:.{digits}f}")
    for k, st in enumerate(sol.trace, 1):
        what = "lambda_min after deletion" if st.kind == "exact" else "participation factor"
        lines.append(f"iteration {k} ({what}{', fallback' if st.fallback else ''}):")
        for n, v in zip(st.candidates, st.scores):
            lines.append(f"  node {n}: {v:.{digits}f}")
        lines.append(f"  selected {st.selected}, lambda_min now {st.lambda_after:.{digits}f}")
    return "\n".join(lines)


def write_trace_csv(path, sol: PlacementSolution, header_lines=()) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for line in header_lines:
            fh.write(f"# {line}\n")
        if sol.table:
            fh.write("subset,lambda_min,chosen\n")
            for subset, val in sol.table:
                fh.write(f"{' '.join(str(n) for n in subset)},{val!r},{int(tuple(subset) == sol.chosen)}\n")
        else:
            fh.write("iteration,kind,node,score,selected,lambda_after\n")
            for k, st in enumerate(sol.trace, 1):
                for n, v in zip(st.candidates, st.scores):
                    fh.write(f"{k},{st.kind},{n},{v!r},{int(n == st.selected)},{st.lambda_after!r}\n")
