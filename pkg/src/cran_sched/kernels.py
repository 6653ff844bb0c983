"""Hot numeric kernels: per-trial SINR, greedy MCS allocation, chunk driver.

Every function here is written as a plain scalar/loop routine that runs
unchanged under CPython.  At import time the module compiles the whole family
with ``numba.njit`` unless the environment variable ``CRAN_SCHED_NUMBA`` is
set to ``0`` (or numba is unavailable); the public names point at whichever
implementation was selected, and ``NUMBA_ENABLED`` reports the choice.  The
test suite and ``benchmarks/bench_kernels.py`` exercise the interpreted path
in subprocesses with the flag set.

The kernels avoid numpy ufunc calls on purpose: scalar ``math.*`` operations
lower to the same libm calls under numba and CPython, which keeps the two
paths bit-identical (the test suite asserts exact equality).

Scheduling kernels operate on compacted per-user arrays (active users only)
and break argmax ties toward the lowest array position.  All budget
comparisons recompute the running total as a fresh left-to-right sum so the
feasibility decision never depends on accumulated rounding drift.
"""

from __future__ import annotations

import math
import os

import numpy as np

# keep in sync with complexity.LN2 / complexity.GAP_GUARD (kernels must not
# import the dataclass modules so they stay numba-independent and simple)
_LN2 = math.log(2.0)


def _numba_requested() -> bool:
    return os.environ.get("CRAN_SCHED_NUMBA", "1") != "0"


def _seq_sum(values, n):
    """Left-to-right sum of the first n entries (deterministic order)."""
    total = 0.0
    for i in range(n):
        total += values[i]
    return total


def _max_feasible_idx(thresholds, sinr):
    """Highest index with thresholds[idx] <= sinr, or -1 (binary search)."""
    lo = 0
    hi = thresholds.shape[0]
    while lo < hi:
        mid = (lo + hi) // 2
        if thresholds[mid] <= sinr:
            lo = mid + 1
        else:
            hi = mid
    return lo - 1


def _complexity_value(rate, cap, c0, ilz):
    """Clamped decoding cost; caller guarantees rate < cap when rate > 0."""
    if rate <= 0.0:
        return 0.0
    raw = rate * ilz * (c0 - 2.0 * math.log2(cap - rate))
    return raw if raw > 0.0 else 0.0


def _water_level_and_beta(rate, cap, c0, ilz, comp):
    """Water level that would allocate `rate` under the local quadratic model.

    Returns ``(level, quad_beta)``.  ``comp`` is the (clamped, >= 0) cost
    currently charged to the user, so the radicand is at least quad_beta**2
    and the square root is always defined.
    """
    g = cap - rate
    a = -1.0 / (_LN2 * g)
    b = math.log2(g) - a * rate
    alpha = -2.0 * a * ilz
    beta = (c0 - 2.0 * b) * ilz
    return math.sqrt(4.0 * alpha * comp + beta * beta), beta


def _mrs_trial(sinr, cap, thresholds, rates, c0, ilz, idx, comp):
    """Max-rate allocation: every user at its highest feasible entry."""
    n = sinr.shape[0]
    sum_rate = 0.0
    for u in range(n):
        i = _max_feasible_idx(thresholds, sinr[u])
        idx[u] = i
        if i >= 0:
            comp[u] = _complexity_value(rates[i], cap[u], c0, ilz)
            sum_rate += rates[i]
        else:
            comp[u] = 0.0
    return sum_rate, _seq_sum(comp, n)


def _swf_trial(sinr, cap, thresholds, rates, c0, ilz, budget, drop_prep, idx, comp):
    """Water-level-guided MCS reduction with a final re-add pass.

    Starts every user at its max feasible entry, repeatedly steps down the
    user whose current operating point demands the highest water level until
    the total cost fits the budget, then tries to restore dropped users (at
    their max feasible entry, highest water level first) wherever the budget
    still allows.  ``drop_prep`` enables an optional pre-pass that zeroes
    every user whose required water level already reaches quad_beta; with
    clamped non-negative costs that comparison fires for everyone, so the
    pre-pass reduces the algorithm to its re-add phase.
    """
    n = sinr.shape[0]
    mf = np.empty(n, np.int64)
    init_c = np.empty(n, np.float64)
    for u in range(n):
        i = _max_feasible_idx(thresholds, sinr[u])
        mf[u] = i
        idx[u] = i
        if i >= 0:
            comp[u] = _complexity_value(rates[i], cap[u], c0, ilz)
        else:
            comp[u] = 0.0
        init_c[u] = comp[u]

    if drop_prep:
        for u in range(n):
            i = idx[u]
            if i >= 0:
                wl, beta = _water_level_and_beta(
                    rates[i], cap[u], c0, ilz, comp[u]
                )
                if wl >= beta:
                    idx[u] = -1
                    comp[u] = 0.0

    while _seq_sum(comp, n) > budget:
        best = -1
        best_wl = -math.inf
        for u in range(n):
            i = idx[u]
            if i >= 0:
                wl, _b = _water_level_and_beta(
                    rates[i], cap[u], c0, ilz, comp[u]
                )
                if wl > best_wl:
                    best_wl = wl
                    best = u
        if best < 0:
            break
        i = idx[best] - 1
        idx[best] = i
        if i >= 0:
            comp[best] = _complexity_value(rates[i], cap[best], c0, ilz)
        else:
            comp[best] = 0.0

    # re-add pass: dropped users, highest water level at max feasible first
    cand_wl = np.empty(n, np.float64)
    for u in range(n):
        if idx[u] < 0 and mf[u] >= 0:
            cand_wl[u], _b = _water_level_and_beta(
                rates[mf[u]], cap[u], c0, ilz, init_c[u]
            )
        else:
            cand_wl[u] = -math.inf
    while True:
        best = -1
        best_wl = -math.inf
        for u in range(n):
            if cand_wl[u] > best_wl:
                best_wl = cand_wl[u]
                best = u
        if best < 0 or best_wl == -math.inf:
            break
        cand_wl[best] = -math.inf
        if _seq_sum(comp, n) + init_c[best] <= budget:
            idx[best] = mf[best]
            comp[best] = init_c[best]

    sum_rate = 0.0
    for u in range(n):
        if idx[u] >= 0:
            sum_rate += rates[idx[u]]
    return sum_rate, _seq_sum(comp, n)


def _scc_trial(sinr, cap, thresholds, rates, c0, ilz, budget, idx, comp):
    """Cost-greedy MCS reduction: step down the most expensive user."""
    n = sinr.shape[0]
    for u in range(n):
        i = _max_feasible_idx(thresholds, sinr[u])
        idx[u] = i
        if i >= 0:
            comp[u] = _complexity_value(rates[i], cap[u], c0, ilz)
        else:
            comp[u] = 0.0

    while _seq_sum(comp, n) > budget:
        best = -1
        best_c = 0.0
        for u in range(n):
            if comp[u] > best_c:
                best_c = comp[u]
                best = u
        if best < 0:
            break
        i = idx[best] - 1
        idx[best] = i
        if i >= 0:
            comp[best] = _complexity_value(rates[i], cap[best], c0, ilz)
        else:
            comp[best] = 0.0

    sum_rate = 0.0
    for u in range(n):
        if idx[u] >= 0:
            sum_rate += rates[idx[u]]
    return sum_rate, _seq_sum(comp, n)


def _draw_arrays(
    u_occ, u_pos, u_fade, p_occ, pool_xy, pool_off, bs_xy, dmin, nc,
    occ, pos, d_serv, cross_d, fading,
):
    """Turn one trial's uniforms into occupancy, positions, distances, gains.

    Cells ``0..nc-1`` are the scheduled ones; any further instantiated cells
    contribute interference only.  All variates are consumed unconditionally
    (one position uniform per instantiated cell, one fading uniform per
    instantiated-cell x scheduled-cell pair) so a trial's draw depends only
    on its uniform row, never on which cells happen to be occupied.  Returns
    the number of occupied scheduled cells.
    """
    n_inst = p_occ.shape[0]
    n_active = 0
    for k in range(n_inst):
        o = u_occ[k] < p_occ[k]
        occ[k] = o
        if o:
            if k < nc:
                n_active += 1
            npts = pool_off[k + 1] - pool_off[k]
            j = int(u_pos[k] * npts)
            if j >= npts:
                j = npts - 1
            px = pool_xy[pool_off[k] + j, 0]
            py = pool_xy[pool_off[k] + j, 1]
            pos[k, 0] = px
            pos[k, 1] = py
            dx = px - bs_xy[k, 0]
            dy = py - bs_xy[k, 1]
            d = math.sqrt(dx * dx + dy * dy)
            d_serv[k] = d if d > dmin else dmin
        else:
            pos[k, 0] = np.nan
            pos[k, 1] = np.nan
            d_serv[k] = np.nan
    for i in range(n_inst):
        for k in range(nc):
            f = -math.log1p(-u_fade[i * nc + k])
            # a uniform draw of exactly 0.0 would give a zero gain; keep the
            # gains strictly positive as the fading model promises
            fading[i, k] = f if f > 0.0 else 1e-300
            if occ[i]:
                dx = pos[i, 0] - bs_xy[k, 0]
                dy = pos[i, 1] - bs_xy[k, 1]
                d = math.sqrt(dx * dx + dy * dy)
                cross_d[i, k] = d if d > dmin else dmin
            else:
                cross_d[i, k] = np.nan
    return n_active


def _sinr_trial(occ, d_serv, cross_d, fading, p0, noise, apl, s, nc, sinr):
    """Uplink SINR per occupied scheduled cell: fractionally power-controlled
    signal over noise plus interference from every other occupied cell."""
    n_inst = occ.shape[0]
    for k in range(nc):
        if not occ[k]:
            sinr[k] = -1.0
            continue
        num = p0 * fading[k, k] * d_serv[k] ** ((s - 1.0) * apl)
        den = noise
        for i in range(n_inst):
            if i != k and occ[i]:
                den += (
                    p0
                    * d_serv[i] ** (s * apl)
                    * fading[i, k]
                    * cross_d[i, k] ** (-apl)
                )
        sinr[k] = num / den


def _run_chunk(
    u_occ, u_pos, u_fade,
    p_occ, pool_xy, pool_off, bs_xy, dmin, nc,
    thresholds, rates, c0, ilz,
    p0, noise, apl, s,
    budget, do_swf, do_scc,
    out_n_active,
    out_mrs_rate, out_mrs_comp,
    out_swf_rate, out_swf_comp,
    out_scc_rate, out_scc_comp,
):
    """Full per-trial pipeline over one chunk of uniform rows."""
    rows = u_occ.shape[0]
    n_inst = p_occ.shape[0]
    occ = np.empty(n_inst, np.bool_)
    pos = np.empty((n_inst, 2), np.float64)
    d_serv = np.empty(n_inst, np.float64)
    cross_d = np.empty((n_inst, nc), np.float64)
    fading = np.empty((n_inst, nc), np.float64)
    sinr = np.empty(nc, np.float64)
    act_sinr = np.empty(nc, np.float64)
    act_cap = np.empty(nc, np.float64)
    idx = np.empty(nc, np.int64)
    comp = np.empty(nc, np.float64)

    for t in range(rows):
        n_active = _draw_arrays(
            u_occ[t], u_pos[t], u_fade[t],
            p_occ, pool_xy, pool_off, bs_xy, dmin, nc,
            occ, pos, d_serv, cross_d, fading,
        )
        out_n_active[t] = n_active
        _sinr_trial(occ, d_serv, cross_d, fading, p0, noise, apl, s, nc, sinr)
        na = 0
        for k in range(nc):
            if occ[k]:
                act_sinr[na] = sinr[k]
                act_cap[na] = math.log2(1.0 + sinr[k])
                na += 1
        a_sinr = act_sinr[:na]
        a_cap = act_cap[:na]
        r, c = _mrs_trial(a_sinr, a_cap, thresholds, rates, c0, ilz, idx, comp)
        out_mrs_rate[t] = r
        out_mrs_comp[t] = c
        if do_swf:
            r, c = _swf_trial(
                a_sinr, a_cap, thresholds, rates, c0, ilz, budget, False,
                idx, comp,
            )
            out_swf_rate[t] = r
            out_swf_comp[t] = c
        if do_scc:
            r, c = _scc_trial(
                a_sinr, a_cap, thresholds, rates, c0, ilz, budget, idx, comp
            )
            out_scc_rate[t] = r
            out_scc_comp[t] = c


# ----------------------------------------------------------------------
# implementation selection
# ----------------------------------------------------------------------
# The whole family is rebound to compiled versions in dependency order, so
# by the time a caller triggers the first (lazy) compilation every global a
# kernel refers to is already a compiled dispatcher.  One mode per process:
# flip CRAN_SCHED_NUMBA=0 to run the same sources interpreted.

NUMBA_ENABLED = False
if _numba_requested():
    try:
        from numba import njit
    except ImportError:  # pragma: no cover - numba is a hard dependency
        njit = None
    if njit is not None:
        _jit = njit(cache=True)
        _seq_sum = _jit(_seq_sum)
        _max_feasible_idx = _jit(_max_feasible_idx)
        _complexity_value = _jit(_complexity_value)
        _water_level_and_beta = _jit(_water_level_and_beta)
        _mrs_trial = _jit(_mrs_trial)
        _swf_trial = _jit(_swf_trial)
        _scc_trial = _jit(_scc_trial)
        _draw_arrays = _jit(_draw_arrays)
        _sinr_trial = _jit(_sinr_trial)
        _run_chunk = _jit(_run_chunk)
        NUMBA_ENABLED = True

seq_sum = _seq_sum
max_feasible_idx = _max_feasible_idx
complexity_value = _complexity_value
water_level_and_beta = _water_level_and_beta
mrs_trial = _mrs_trial
swf_trial = _swf_trial
scc_trial = _scc_trial
draw_arrays = _draw_arrays
sinr_trial = _sinr_trial
run_chunk = _run_chunk
