"""Self-contained bounded-variable simplex for the LP relaxations.

Dense two-phase tableau simplex with explicit lower/upper bounds on every
variable (structural variables live in [0, 1] unless fixed by the
branch-and-bound search; slacks are [0, inf) for inequalities and [0, 0]
for equalities).  Phase 1 drives artificial variables out of rows whose
slack cannot absorb the right-hand side.  Pivoting uses Dantzig's rule
with a Bland fallback after a stall, which is enough to keep the
desk-scale relaxations from cycling.

Feasibility tolerance is 1e-9; it applies to the relaxation only.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

TOL = 1e-9
_STALL_LIMIT = 60
_MAX_ITERS = 200_000


class SimplexError(Exception):
    pass


@dataclass
class LpResult:
    status: str                 # "optimal" or "infeasible"
    objective: float
    x: np.ndarray | None        # structural variable values


def solve_lp(A: np.ndarray, relations: list[str], b: np.ndarray, c: np.ndarray,
             lower: np.ndarray, upper: np.ndarray) -> LpResult:
    """Maximize c@x subject to A x (<=,=,>=) b and lower <= x <= upper."""
    m, n = A.shape if A.size else (len(b), len(c))
    A = A.reshape(m, n).astype(float)
    b = np.asarray(b, dtype=float).copy()
    c = np.asarray(c, dtype=float)
    lower = np.asarray(lower, dtype=float)
    upper = np.asarray(upper, dtype=float)
    if np.any(lower > upper + TOL):
        return LpResult("infeasible", -np.inf, None)

    # normalize >= rows to <=
    for i, rel in enumerate(relations):
        if rel == ">=":
            A[i] *= -1
            b[i] *= -1
    is_eq = np.array([rel == "=" for rel in relations])

    # shift structural variables to their lower bounds
    b = b - A @ lower
    span = upper - lower

    # columns: structural | slack | artificial
    slack_cols = m
    total = n + slack_cols
    T = np.zeros((m, total))
    T[:, :n] = A
    lo = np.concatenate([np.zeros(n), np.zeros(m)])
    hi = np.concatenate([span, np.where(is_eq, 0.0, np.inf)])

    art_cols: list[int] = []
    basis = np.zeros(m, dtype=int)
    need_art = []
    for i in range(m):
        T[i, n + i] = 1.0
        if (is_eq[i] and abs(b[i]) > TOL) or (not is_eq[i] and b[i] < -TOL):
            need_art.append(i)
        else:
            basis[i] = n + i
    if need_art:
        extra = np.zeros((m, len(need_art)))
        for pos, i in enumerate(need_art):
            extra[i, pos] = 1.0 if b[i] >= 0 else -1.0
            basis[i] = total + pos
            art_cols.append(total + pos)
        T = np.hstack([T, extra])
        lo = np.concatenate([lo, np.zeros(len(need_art))])
        hi = np.concatenate([hi, np.full(len(need_art), np.inf)])
    ncols = T.shape[1]

    # current values: nonbasic at lower bound (0 after shifting)
    at_upper = np.zeros(ncols, dtype=bool)
    xval = np.zeros(ncols)
    is_basic = np.zeros(ncols, dtype=bool)
    is_basic[basis] = True
    for i in range(m):
        xval[basis[i]] = abs(b[i]) if basis[i] >= total else b[i]

    # reduce tableau so basis columns are identity (artificial sign rows)
    for i in range(m):
        if basis[i] >= total and T[i, basis[i]] < 0:
            T[i] *= -1
            b[i] *= -1

    def run_phase(cost: np.ndarray) -> None:
        nonlocal T
        stall = 0
        last_obj = None
        for _ in range(_MAX_ITERS):
            cb = cost[basis]
            d = cost - cb @ T
            d[basis] = 0.0
            blocked = lo == hi  # fixed columns never move
            cand_up = (~is_basic) & (~at_upper) & (~blocked) & (d > TOL)
            cand_dn = (~is_basic) & at_upper & (~blocked) & (d < -TOL)
            if not cand_up.any() and not cand_dn.any():
                return
            use_bland = stall >= _STALL_LIMIT
            gains = np.where(cand_up, d, 0.0) + np.where(cand_dn, -d, 0.0)
            if use_bland:
                j = int(np.nonzero(gains > 0)[0][0])
            else:
                j = int(np.argmax(gains))
            sigma = 1.0 if cand_up[j] else -1.0
            col = sigma * T[:, j]
            bx = xval[basis]
            lo_b = lo[basis]
            hi_b = hi[basis]
            # largest step keeping basics and the entering variable in bounds
            with np.errstate(divide="ignore", invalid="ignore"):
                lim_dec = np.where(col > TOL, (bx - lo_b) / col, np.inf)
                lim_inc = np.where(col < -TOL, (hi_b - bx) / (-col), np.inf)
            lim = np.minimum(lim_dec, lim_inc)
            t_bound = hi[j] - lo[j]
            leave_row = int(np.argmin(lim)) if m else -1
            row_min = lim[leave_row] if m else np.inf
            if row_min >= t_bound - TOL and t_bound < np.inf:
                t_max = t_bound
                leave_row = -1
                leave_to_upper = False
            else:
                t_max = max(float(row_min), 0.0)
                leave_to_upper = bool(lim_inc[leave_row] < lim_dec[leave_row])
            if t_max == np.inf:
                raise SimplexError("unbounded relaxation")
            # apply step
            if t_max > 0:
                xval[basis] = bx - t_max * col
            if leave_row == -1:
                # bound flip: entering moves across its whole range
                at_upper[j] = sigma > 0
                xval[j] = hi[j] if sigma > 0 else lo[j]
            else:
                lv = basis[leave_row]
                xval[lv] = hi[lv] if leave_to_upper else lo[lv]
                at_upper[lv] = leave_to_upper
                is_basic[lv] = False
                xval[j] = (hi[j] if at_upper[j] else lo[j]) + sigma * t_max
                at_upper[j] = False
                basis[leave_row] = j
                is_basic[j] = True
                piv = T[leave_row, j]
                if abs(piv) < 1e-12:
                    raise SimplexError("numerically singular pivot")
                T[leave_row] /= piv
                colvals = T[:, j].copy()
                colvals[leave_row] = 0.0
                T -= np.outer(colvals, T[leave_row])
            obj = float(cost @ xval)
            if last_obj is not None and obj <= last_obj + TOL:
                stall += 1
            else:
                stall = 0
            last_obj = obj
        raise SimplexError("iteration limit exceeded")

    if art_cols:
        phase1 = np.zeros(ncols)
        phase1[art_cols] = -1.0
        run_phase(phase1)
        if float(xval[art_cols].sum()) > 1e-7:
            return LpResult("infeasible", -np.inf, None)
        hi[art_cols] = 0.0
        xval[art_cols] = np.minimum(xval[art_cols], 0.0)

    phase2 = np.zeros(ncols)
    phase2[:n] = c
    run_phase(phase2)

    x = xval[:n] + lower
    return LpResult("optimal", float(c @ x), x)
