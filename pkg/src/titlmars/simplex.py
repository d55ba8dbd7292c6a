"""Bounded-variable primal simplex on a dense tableau.

Solves   min c.x   s.t.  A x (<=|>=|=) b,   lo <= x <= hi
with a two-phase method: artificial variables absorb the initial residual,
phase one drives their sum to zero, phase two optimizes the true objective.
Nonbasic variables rest at a finite bound; entering steps may terminate in a
bound flip instead of a basis change.  Dantzig pricing switches to Bland's
rule after a run of degenerate pivots, which guarantees termination.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ValidationError

AT_LO, AT_HI, BASIC = 0, 1, 2

FEAS_TOL = 1e-7
COST_TOL = 1e-9
PIVOT_TOL = 1e-10
DEGEN_TOL = 1e-11


@dataclass
class LpResult:
    status: str  # optimal | infeasible | unbounded | iterlimit
    x: np.ndarray | None
    obj: float
    iterations: int


def solve_lp(c, A, senses, b, lo, hi, *, max_iter=None) -> LpResult:
    """Solve a bounded LP; A may be an (m, n) array or an empty list."""
    c = np.asarray(c, dtype=float)
    n = c.size
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    if lo.size != n or hi.size != n:
        raise ValidationError("bound arrays must match the variable count")
    if np.any(~np.isfinite(lo) & ~np.isfinite(hi)):
        raise ValidationError("every variable needs at least one finite bound")
    if np.any(lo > hi + 1e-12):
        return LpResult("infeasible", None, np.inf, 0)

    A = np.asarray(A, dtype=float).reshape(-1, n) if len(A) else np.empty((0, n))
    b = np.asarray(b, dtype=float)
    m = A.shape[0]
    if b.size != m or len(senses) != m:
        raise ValidationError("constraint arrays must agree in length")

    if m == 0:
        x = np.where(c >= 0, lo, hi)
        bad = ~np.isfinite(x) & (np.abs(c) > 0)
        if bad.any():
            return LpResult("unbounded", None, -np.inf, 0)
        x = np.where(np.isfinite(x), x, 0.0)
        return LpResult("optimal", x, float(c @ x), 0)

    # normalize '>=' to '<=' and attach one slack per inequality row
    A = A.copy()
    b = b.copy()
    is_eq = np.zeros(m, dtype=bool)
    for i, s in enumerate(senses):
        if s in ("<=", "<"):
            pass
        elif s in (">=", ">"):
            A[i] *= -1.0
            b[i] = -b[i]
        elif s in ("=", "=="):
            is_eq[i] = True
        else:
            raise ValidationError(f"unknown row sense {s!r}")
    ineq_rows = np.where(~is_eq)[0]
    n_slack = ineq_rows.size
    ntot = n + n_slack
    S = np.zeros((m, n_slack))
    S[ineq_rows, np.arange(n_slack)] = 1.0
    Afull = np.hstack([A, S])
    lo_full = np.concatenate([lo, np.zeros(n_slack)])
    hi_full = np.concatenate([hi, np.full(n_slack, np.inf)])

    # nonbasic start at a finite bound
    start = np.where(np.isfinite(lo_full), lo_full, np.where(np.isfinite(hi_full), hi_full, 0.0))
    status = np.where(start == lo_full, AT_LO, AT_HI).astype(np.int8)
    values = start.copy()

    r = b - Afull @ start
    basis = np.empty(m, dtype=np.int64)
    art_cols = []
    art_sign = []
    xb = np.empty(m)
    slack_of_row = {int(row): n + k for k, row in enumerate(ineq_rows)}
    for i in range(m):
        j = slack_of_row.get(i)
        if j is not None and r[i] >= 0.0:
            basis[i] = j
            status[j] = BASIC
            xb[i] = r[i]
        else:
            art_cols.append(i)
            art_sign.append(1.0 if r[i] >= 0 else -1.0)
            basis[i] = ntot + len(art_cols) - 1
            xb[i] = abs(r[i])
    n_art = len(art_cols)
    if n_art:
        Aart = np.zeros((m, n_art))
        Aart[art_cols, np.arange(n_art)] = np.asarray(art_sign)
        Afull = np.hstack([Afull, Aart])
        lo_full = np.concatenate([lo_full, np.zeros(n_art)])
        hi_full = np.concatenate([hi_full, np.full(n_art, np.inf)])
        status = np.concatenate([status, np.full(n_art, BASIC, dtype=np.int8)])
        values = np.concatenate([values, np.zeros(n_art)])
    nall = Afull.shape[1]

    # initial basis matrix is diag(+-1): scale rows so Tab = B^-1 Afull
    Tab = Afull.copy()
    d_row = np.ones(m)
    for k, i in enumerate(art_cols):
        if art_sign[k] < 0:
            d_row[i] = -1.0
    Tab *= d_row[:, None]

    cost1 = np.zeros(nall)
    if n_art:
        cost1[ntot:] = 1.0
    cost2 = np.zeros(nall)
    cost2[:n] = c

    if max_iter is None:
        max_iter = 200 + 50 * (m + nall)
    state = _SimplexState(Tab, xb, basis, status, lo_full, hi_full, nall)

    st = _iterate(state, cost1, max_iter, phase_one=True)
    if st == "iterlimit":
        return LpResult("iterlimit", None, np.nan, state.iters)
    phase1_obj = float(cost1[state.basis] @ state.xb)
    if phase1_obj > FEAS_TOL * (1.0 + abs(b).max()):
        return LpResult("infeasible", None, np.inf, state.iters)
    if n_art:
        _pivot_out_artificials(state, ntot)
        state.hi[ntot:] = 0.0  # pin any leftovers

    st = _iterate(state, cost2, max_iter, phase_one=False)
    x = _extract(state, n)
    if st == "iterlimit":
        return LpResult("iterlimit", x, float(c @ x), state.iters)
    if st == "unbounded":
        return LpResult("unbounded", None, -np.inf, state.iters)
    return LpResult("optimal", x, float(c @ x), state.iters)


class _SimplexState:
    def __init__(self, Tab, xb, basis, status, lo, hi, nall):
        self.Tab = Tab
        self.xb = xb
        self.basis = basis
        self.status = status
        self.lo = lo
        self.hi = hi
        self.nall = nall
        self.iters = 0


def _extract(state, n):
    vals = np.where(state.status == AT_HI, state.hi, state.lo)
    vals = np.where(np.isfinite(vals), vals, 0.0)
    vals[state.basis] = state.xb
    return vals[:n]


def _pivot_out_artificials(state, ntot):
    """Degenerate pivots to remove basic artificials; redundant rows keep one."""
    for i in range(state.basis.size):
        if state.basis[i] < ntot:
            continue
        row = state.Tab[i]
        cand = np.where(
            (np.abs(row[:ntot]) > 1e-8) & (state.status[:ntot] != BASIC)
        )[0]
        if cand.size == 0:
            continue
        j = int(cand[0])
        a = (+1.0) * state.Tab[:, j]
        _pivot(state, j, i, 0.0, +1.0, a, leaving_status=AT_LO)


def _iterate(state, cost, max_iter, phase_one):
    bland_after = 10 * state.nall
    degen_streak = 0
    dtol = COST_TOL * (1.0 + np.abs(cost).max())
    while True:
        if state.iters >= max_iter:
            return "iterlimit"
        cB = cost[state.basis]
        d = cost - state.Tab.T @ cB
        rng_ok = state.hi - state.lo > 1e-30
        nonbasic = state.status != BASIC
        can_inc = (state.status == AT_LO) & nonbasic & rng_ok & (d < -dtol)
        can_dec = (state.status == AT_HI) & nonbasic & rng_ok & (d > dtol)
        elig = can_inc | can_dec
        if not elig.any():
            return "optimal"
        idx = np.where(elig)[0]
        if degen_streak > bland_after:
            j = int(idx[0])  # Bland: lowest eligible index
        else:
            j = int(idx[np.argmax(np.abs(d[idx]))])
        delta_dir = +1.0 if can_inc[j] else -1.0
        a = delta_dir * state.Tab[:, j]

        # ratio test against both bounds of the basic variables
        lo_b = state.lo[state.basis]
        hi_b = state.hi[state.basis]
        with np.errstate(divide="ignore", invalid="ignore"):
            lim_lo = np.where(a > PIVOT_TOL, (state.xb - lo_b) / a, np.inf)
            lim_hi = np.where(a < -PIVOT_TOL, (state.xb - hi_b) / a, np.inf)
        lim = np.minimum(lim_lo, lim_hi)
        lim = np.where(np.isnan(lim) | (lim < 0), 0.0, lim)
        own = state.hi[j] - state.lo[j]
        if lim.size:
            lim_min = lim.min()
            ties = np.where(lim <= lim_min + 1e-15)[0]
            r = int(ties[np.argmin(state.basis[ties])])  # lowest-index leaving
            row_lim = lim_min
        else:
            r, row_lim = -1, np.inf
        step = min(row_lim, own)
        if not np.isfinite(step):
            # phase-one objective is bounded below; an infinite step there is
            # a numerical breakdown, reported like an iteration failure
            return "iterlimit" if phase_one else "unbounded"

        state.iters += 1
        degen_streak = degen_streak + 1 if step < DEGEN_TOL else 0

        if own <= row_lim:
            # bound flip, basis unchanged
            state.xb -= step * a
            state.status[j] = AT_HI if state.status[j] == AT_LO else AT_LO
            continue
        _pivot(state, j, r, step, delta_dir, a)


def _pivot(state, j, r, step, delta_dir, a, leaving_status=None):
    leaving = state.basis[r]
    if leaving_status is None:
        leaving_status = AT_LO if a[r] > 0 else AT_HI
    entering_val = (
        (state.lo[j] if state.status[j] == AT_LO else state.hi[j]) + delta_dir * step
    )
    state.xb -= step * a
    state.xb[r] = entering_val
    state.status[leaving] = leaving_status
    state.status[j] = BASIC
    state.basis[r] = j

    piv = state.Tab[r, j]
    state.Tab[r] /= piv
    col = state.Tab[:, j].copy()
    col[r] = 0.0
    state.Tab -= np.outer(col, state.Tab[r])
    state.Tab[:, j] = 0.0
    state.Tab[r, j] = 1.0
