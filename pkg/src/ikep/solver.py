"""Exact solution of the binary programs and decoding back to exchanges.

``solve`` runs best-first branch and bound with bounds from the
self-contained simplex relaxation; ``solve_exhaustive`` is the
enumeration oracle used by the test suite; ``decode`` turns a solved
model back into disjoint cycles and chains with per-country counts.
"""

from __future__ import annotations

import heapq
import itertools
import time
from dataclasses import dataclass

import numpy as np

from .errors import DecodeError, ModelError
from .graph import CompatibilityGraph, NodeKind
from .enumeration import Cycle, make_cycle
from .model import IpModel, VarKind
from .simplex import solve_lp

_INT_TOL = 1e-6


@dataclass
class Assignment:
    values: list[int]            # indexed like model.variables
    objective: float
    optimal: bool = True
    timed_out: bool = False
    nodes_explored: int = 0
    root_bound: float | None = None


@dataclass(frozen=True)
class ExchangePlan:
    cycles: tuple[Cycle, ...]
    chains: tuple[tuple[int, ...], ...]   # each begins with the altruist node
    per_country: dict[int, int]
    total_transplants: int


def _arrays(model: IpModel):
    n = len(model.variables)
    m = len(model.constraints)
    A = np.zeros((m, n))
    b = np.zeros(m)
    rels = []
    for r, cons in enumerate(model.constraints):
        for idx, coeff in cons.terms:
            A[r, idx] = coeff
        b[r] = cons.rhs
        rels.append(cons.relation)
    c = np.zeros(n)
    for idx, coeff in model.objective:
        c[idx] += coeff
    return A, rels, b, c


def _feasible(A, rels, b, x) -> bool:
    lhs = A @ x
    for i, rel in enumerate(rels):
        if rel == "<=" and lhs[i] > b[i] + 1e-7:
            return False
        if rel == ">=" and lhs[i] < b[i] - 1e-7:
            return False
        if rel == "=" and abs(lhs[i] - b[i]) > 1e-7:
            return False
    return True


def solve(model: IpModel, time_limit: float | None = None) -> Assignment:
    """Provably optimal assignment via best-first branch and bound.

    Branches on the fractional variable closest to one half (lowest index
    on ties); node order and hence the returned assignment are
    deterministic.  On timeout the incumbent is returned with
    ``optimal=False`` and ``timed_out=True``.
    """
    n = len(model.variables)
    if n == 0:
        return Assignment([], 0.0, root_bound=0.0)
    A, rels, b, c = _arrays(model)
    integral_obj = all(float(v).is_integer() for v in c)
    deadline = time.monotonic() + time_limit if time_limit is not None else None

    incumbent = None
    incumbent_val = -np.inf
    zeros = np.zeros(n)
    if _feasible(A, rels, b, zeros):
        incumbent = [0] * n
        incumbent_val = 0.0

    root = solve_lp(A, rels, b, c, np.zeros(n), np.ones(n))
    if root.status != "optimal":
        return Assignment([0] * n, 0.0, optimal=False)
    root_bound = root.objective
    counter = itertools.count()
    heap = [(-root.objective, next(counter), {}, root)]
    explored = 0
    timed_out = False

    while heap:
        if deadline is not None and time.monotonic() > deadline:
            timed_out = True
            break
        neg_bound, _, fixed, res = heapq.heappop(heap)
        bound = -neg_bound
        if integral_obj:
            bound = np.floor(bound + _INT_TOL)
        if bound <= incumbent_val + 1e-9:
            continue
        explored += 1
        x = res.x
        frac = np.abs(x - np.round(x))
        if frac.max() <= _INT_TOL:
            xi = [int(round(v)) for v in x]
            val = float(c @ xi)
            if val > incumbent_val + 1e-9:
                incumbent, incumbent_val = xi, val
            continue
        # branch on the fractional variable closest to 0.5
        cand = np.nonzero(frac > _INT_TOL)[0]
        j = int(cand[np.argmin(np.abs(x[cand] - 0.5))])
        for v in (0, 1):
            child_fixed = dict(fixed)
            child_fixed[j] = v
            lower = np.zeros(n)
            upper = np.ones(n)
            for i, fv in child_fixed.items():
                lower[i] = upper[i] = fv
            child = solve_lp(A, rels, b, c, lower, upper)
            if child.status != "optimal":
                continue
            cb = np.floor(child.objective + _INT_TOL) if integral_obj else child.objective
            if cb <= incumbent_val + 1e-9:
                continue
            heapq.heappush(heap, (-child.objective, next(counter), child_fixed, child))

    if incumbent is None:
        incumbent, incumbent_val = [0] * n, 0.0
    return Assignment(incumbent, float(incumbent_val), optimal=not timed_out,
                      timed_out=timed_out, nodes_explored=explored,
                      root_bound=root_bound)


def solve_exhaustive(model: IpModel, max_vars: int = 25) -> Assignment:
    """Enumerate every assignment; ties go to the lexicographically
    smallest value vector (variable 0 most significant)."""
    n = len(model.variables)
    if n > max_vars:
        raise ModelError(f"exhaustive solve limited to {max_vars} variables, model has {n}")
    if n == 0:
        return Assignment([], 0.0)
    A, rels, b, c = _arrays(model)
    le = np.array([r == "<=" for r in rels])
    ge = np.array([r == ">=" for r in rels])
    eq = np.array([r == "=" for r in rels])
    best_val = -np.inf
    best = None
    chunk = 1 << 16
    # bit 0 of the counter is the LAST variable, so counting order is
    # lexicographic order of the value vectors
    shifts = np.arange(n - 1, -1, -1)
    for start in range(0, 1 << n, chunk):
        stop = min(start + chunk, 1 << n)
        codes = np.arange(start, stop, dtype=np.int64)
        X = ((codes[:, None] >> shifts[None, :]) & 1).astype(float)
        lhs = X @ A.T
        ok = np.ones(len(codes), dtype=bool)
        if le.any():
            ok &= (lhs[:, le] <= b[le] + 1e-9).all(axis=1)
        if ge.any():
            ok &= (lhs[:, ge] >= b[ge] - 1e-9).all(axis=1)
        if eq.any():
            ok &= (np.abs(lhs[:, eq] - b[eq]) <= 1e-9).all(axis=1)
        if not ok.any():
            continue
        vals = X[ok] @ c
        i = int(np.argmax(vals))
        if vals[i] > best_val + 1e-12:
            best_val = float(vals[i])
            best = [int(v) for v in X[ok][i]]
    if best is None:
        return Assignment([0] * n, 0.0, optimal=False)
    return Assignment(best, best_val)


def decode(model: IpModel, assignment: Assignment, g: CompatibilityGraph) -> ExchangePlan:
    """Invert a solved model into disjoint cycles and chains.

    Selected cycle variables map directly; selected arc variables are
    stitched into cycles by following successors (selected multi-node
    segments supply the national arcs the bounded/unbounded model leaves
    out).  Cycles through artificial patients are re-expressed as chains.
    Transplants are attributed to the recipient's country.
    """
    values = assignment.values
    cycles: list[Cycle] = []
    successor: dict[int, int] = {}

    def add_succ(i: int, j: int) -> None:
        if i in successor and successor[i] != j:
            raise DecodeError(f"node {i} gives twice ({successor[i]} and {j})")
        successor[i] = j

    for idx, var in enumerate(model.variables):
        if not values[idx]:
            continue
        if var.kind is VarKind.CYCLE:
            cycles.append(var.payload[0])
        elif var.kind in (VarKind.EDGE, VarKind.NAT_EDGE, VarKind.INT_EDGE):
            add_succ(*var.payload)
        elif var.kind is VarKind.SEGMENT:
            seg = var.payload[0]
            for a in range(len(seg.nodes) - 1):
                add_succ(seg.nodes[a], seg.nodes[a + 1])

    seen: set[int] = set()
    for start in sorted(successor):
        if start in seen:
            continue
        path = [start]
        seen.add(start)
        v = successor[start]
        while v != start:
            if v in seen or v not in successor:
                raise DecodeError(f"selected arcs do not close into a cycle at node {v}")
            path.append(v)
            seen.add(v)
            v = successor[v]
        cycles.append(make_cycle(g, tuple(path)))

    used: set[int] = set()
    for c in cycles:
        overlap = used & set(c.nodes)
        if overlap:
            raise DecodeError(f"exchanges overlap at nodes {sorted(overlap)}")
        used |= set(c.nodes)

    artificial = {n.id for n in g.nodes if n.kind is NodeKind.ARTIFICIAL}
    pure: list[Cycle] = []
    chains: list[tuple[int, ...]] = []
    for c in cycles:
        hit = [i for i, v in enumerate(c.nodes) if v in artificial]
        if not hit:
            pure.append(c)
            continue
        n = len(c.nodes)
        for pos_idx, s in enumerate(hit):
            end = hit[(pos_idx + 1) % len(hit)]
            run = [c.nodes[(s + j) % n] for j in range(((end - s) % n) or n)]
            chains.append(tuple(run))

    per_country: dict[int, int] = {}
    for c in pure:
        for v in c.nodes:
            per_country[g.country_of(v)] = per_country.get(g.country_of(v), 0) + 1
    for ch in chains:
        for v in ch[1:]:
            per_country[g.country_of(v)] = per_country.get(g.country_of(v), 0) + 1
    total = sum(per_country.values())
    return ExchangePlan(tuple(pure), tuple(chains), per_country, total)
