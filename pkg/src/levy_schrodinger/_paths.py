"""Path kernels for the jump samplers, numba and numpy twins.

Random numbers come from a counter-based splitmix64 generator: draw ``k`` of
stream ``s`` on path ``p`` is a pure function of ``(seed, p, s, k)``, so a path
does not depend on how many paths run or in which order.  Streams:

0  exponential clocks
1  jump proposals (region, magnitude, sign)
2  acceptance tests
3  Gaussian increments (Box-Muller, two draws each)
4  stationary starting points

Jump part of one step of length ``dt`` from ``x``: exact thinning of the
truncated kernel ``r(x, y) nu(y) 1_{|y| > eps}`` with ``r = phi(x+y)/phi(x)``.
Proposals come from ``nu`` at rate ``B * nu(region)`` and are accepted with
probability ``r / B``.  For algebraic ``phi`` the proposal region is split at
``|y| = |x|/2``: below it ``r <= ((a^2+x^2)/(a^2+x^2/4))^q <= 4^q``, above it the
global bound ``M(x)`` applies but the rate is small, so far-out states stay
cheap.  After the jumps the state moves by the small-jump drift and a
Gaussian increment.
"""

from __future__ import annotations

import numpy as np

from ._backend import HAVE_NUMBA, njit

# parameter vector layout
KIND, A, Q, SPLIT, C, ALPHA, EPS, SD, DT, GA, USE_PHI, MAXP = range(12)
TX0, TH, TLC, TLP, TRC, TRP, TCEN, LOGMAX, JUMPS = range(12, 21)
NPARAM = 21

CLOCK, JUMP, ACCEPT, GAUSS, START = 0, 1, 2, 3, 4

_G = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_S30, _S27, _S31, _S11 = np.uint64(30), np.uint64(27), np.uint64(31), np.uint64(11)
_TWO53 = 2.0 ** -53


@njit(inline="always")
def _mix(z):
    z = (z ^ (z >> _S30)) * _M1
    z = (z ^ (z >> _S27)) * _M2
    return z ^ (z >> _S31)


@njit(inline="always")
def _base(key, path, stream):
    return _mix(key ^ _mix(np.uint64(path) * np.uint64(8) + np.uint64(stream) + _G))


@njit(inline="always")
def _u(base, k):
    z = _mix(base + np.uint64(k + 1) * _G)
    return (np.float64(z >> _S11) + 0.5) * _TWO53


def _mix_np(z):
    z = (z ^ (z >> _S30)) * _M1
    z = (z ^ (z >> _S27)) * _M2
    return z ^ (z >> _S31)


def bases_np(key, paths, stream):
    with np.errstate(over="ignore"):
        p = np.asarray(paths).astype(np.uint64)
        return _mix_np(np.uint64(key) ^ _mix_np(p * np.uint64(8) + np.uint64(stream) + _G))


def uniforms_np(base, k):
    with np.errstate(over="ignore"):
        z = _mix_np(base + (np.asarray(k).astype(np.uint64) + np.uint64(1)) * _G)
    return ((z >> _S11).astype(np.float64) + 0.5) * _TWO53


# -- phi ratio and bounds -------------------------------------------------------
#
# Compiled kernels take the phi description as a tuple of scalars ``S`` plus a
# table ``T``: the log-phi samples for tabulated phi, the float 0.0 for the
# algebraic family.  Dispatch is on the type of ``T``, so the algebraic kernel
# never carries an array through its helpers (refcounting an array argument on
# every call costs an order of magnitude in the proposal loop).

# S layout
S_KIND, S_A2, S_Q, S_TX0, S_TH, S_TLC, S_TLP, S_TRC, S_TRP, S_TCEN, S_LOGMAX = range(11)
# Z layout (stepping scalars)
Z_EPS, Z_C, Z_ALPHA, Z_DT, Z_GA, Z_SD, Z_USE_PHI, Z_SPLIT, Z_MAXP, Z_JUMPS = range(10)


def _pack(P, tlog):
    S = (P[KIND], P[A] * P[A], P[Q], P[TX0], P[TH], P[TLC], P[TLP], P[TRC], P[TRP],
         P[TCEN], P[LOGMAX])
    Z = (P[EPS], P[C], P[ALPHA], P[DT], P[GA], P[SD], P[USE_PHI], P[SPLIT], P[MAXP], P[JUMPS])
    T = np.ascontiguousarray(tlog, dtype=float) if P[KIND] != 0.0 else 0.0
    return tuple(float(v) for v in S), tuple(float(v) for v in Z), T


@njit(inline="always")
def _powq(r, q):
    if q == 1.0:
        return r
    if q == 0.5:
        return np.sqrt(r)
    if q == 0.0:
        return 1.0
    return r ** q


@njit
def _log_phi_tab(x, S, tlog):
    s = (x - S[S_TX0]) / S[S_TH]
    n = tlog.size
    if s < 0.0:
        return S[S_TLC] - S[S_TLP] * np.log(abs(x - S[S_TCEN]))
    if s > n - 1:
        return S[S_TRC] - S[S_TRP] * np.log(abs(x - S[S_TCEN]))
    i = int(s)
    if i >= n - 1:
        i = n - 2
    f = s - i
    return tlog[i] * (1.0 - f) + tlog[i + 1] * f


def _phi_ratio(x, y, S, T):
    """``phi(x+y)/phi(x)``."""
    if isinstance(T, np.ndarray):
        return np.exp(_log_phi_tab(x + y, S, T) - _log_phi_tab(x, S, T))
    a2, q = S[S_A2], S[S_Q]
    return _powq((a2 + x * x) / (a2 + (x + y) * (x + y)), q)


def _phi_bound(x, S, T):
    """``sup_y phi(x+y)/phi(x)``."""
    if isinstance(T, np.ndarray):
        return np.exp(S[S_LOGMAX] - _log_phi_tab(x, S, T))
    a2, q = S[S_A2], S[S_Q]
    return _powq((a2 + x * x) / a2, q)


def _dlogphi(x, S, T):
    if isinstance(T, np.ndarray):
        h = 1e-4 * S[S_TH]
        return (_log_phi_tab(x + h, S, T) - _log_phi_tab(x - h, S, T)) / (2.0 * h)
    return -2.0 * S[S_Q] * x / (S[S_A2] + x * x)


if HAVE_NUMBA:
    from numba import types
    from numba.extending import overload

    def _is_table(T):
        return isinstance(T, types.Array)

    @overload(_phi_ratio)
    def _ov_ratio(x, y, S, T):
        if _is_table(T):
            return lambda x, y, S, T: np.exp(_log_phi_tab(x + y, S, T) - _log_phi_tab(x, S, T))

        def impl(x, y, S, T):
            a2 = S[S_A2]
            return _powq((a2 + x * x) / (a2 + (x + y) * (x + y)), S[S_Q])
        return impl

    @overload(_phi_bound)
    def _ov_bound(x, S, T):
        if _is_table(T):
            return lambda x, S, T: np.exp(S[S_LOGMAX] - _log_phi_tab(x, S, T))
        return lambda x, S, T: _powq((S[S_A2] + x * x) / S[S_A2], S[S_Q])

    @overload(_dlogphi)
    def _ov_dlogphi(x, S, T):
        if _is_table(T):
            def impl(x, S, T):
                h = 1e-4 * S[S_TH]
                return (_log_phi_tab(x + h, S, T) - _log_phi_tab(x - h, S, T)) / (2.0 * h)
            return impl
        return lambda x, S, T: -2.0 * S[S_Q] * x / (S[S_A2] + x * x)


@njit(inline="always")
def _near_bound(x, rho, a2, q):
    return _powq((a2 + x * x) / (a2 + rho * rho), q)


@njit(inline="always")
def _rpow(r, alpha):
    # r ** -alpha without pow for the Cauchy index
    if alpha == 1.0:
        return 1.0 / r
    return r ** (-alpha)


@njit(inline="always")
def _inv_pow(v, alpha):
    if alpha == 1.0:
        return 1.0 / v
    return v ** (-1.0 / alpha)


@njit(inline="always")
def _normal(bg, kg):
    u1 = _u(bg, kg)
    u2 = _u(bg, kg + 1)
    return np.sqrt(-2.0 * np.log(u1)) * np.cos(2.0 * np.pi * u2)


@njit
def _run_paths_kernel(x0, key, S, Z, T, dy, dw, steps_per_rec, n_rec, first_path):
    npaths = x0.size
    out = np.empty((npaths, n_rec))
    n_viol = 0
    n_prop = 0
    n_acc = 0
    n_over = 0
    a2, q = S[S_A2], S[S_Q]
    eps, alpha, dt, ga, sd = Z[Z_EPS], Z[Z_ALPHA], Z[Z_DT], Z[Z_GA], Z[Z_SD]
    use_phi = Z[Z_USE_PHI] != 0.0
    do_split = use_phi and Z[Z_SPLIT] != 0.0
    jumps = Z[Z_JUMPS] != 0.0
    maxp = Z[Z_MAXP]
    c2 = 2.0 * Z[Z_C] / alpha
    e_a = _rpow(eps, alpha)
    lam_eps = c2 * e_a
    nd = len(dy)
    for p in range(npaths):
        pid = first_path + p
        bc = _base(key, pid, CLOCK)
        bj = _base(key, pid, JUMP)
        ba = _base(key, pid, ACCEPT)
        bg = _base(key, pid, GAUSS)
        kc = 0
        kj = 0
        ka = 0
        kg = 0
        x = x0[p]
        out[p, 0] = x
        for r in range(1, n_rec):
            for s in range(steps_per_rec):
                if jumps:
                    # exact thinning over one step
                    rem = dt
                    nprop = 0
                    while True:
                        split = False
                        rho = 0.0
                        w_near = 0.0
                        B1 = 1.0
                        M = 1.0
                        if use_phi:
                            M = _phi_bound(x, S, T)
                            if do_split:
                                rho = 0.5 * abs(x)
                                split = rho > eps
                        if split:
                            lam_far = c2 * _rpow(rho, alpha)
                            B1 = _near_bound(x, rho, a2, q)
                            w_near = B1 * (lam_eps - lam_far)
                            rate = w_near + M * lam_far
                        else:
                            rate = M * lam_eps
                        w = -np.log(_u(bc, kc)) / rate
                        kc += 1
                        if w > rem:
                            break
                        rem -= w
                        nprop += 1
                        if nprop > maxp:
                            n_over += 1
                            break
                        if split:
                            ur = _u(bj, kj)
                            um = _u(bj, kj + 1)
                            kj += 2
                            if ur * rate < w_near:
                                mag = _inv_pow(e_a - um * (e_a - _rpow(rho, alpha)), alpha)
                                B = B1
                            else:
                                mag = rho * _inv_pow(um, alpha)
                                B = M
                        else:
                            um = _u(bj, kj)
                            kj += 1
                            mag = eps * _inv_pow(um, alpha)
                            B = M
                        us = _u(bj, kj)
                        kj += 1
                        y = mag if us < 0.5 else -mag
                        n_prop += 1
                        if use_phi:
                            rr = _phi_ratio(x, y, S, T)
                            if rr > B * (1.0 + 1e-12):
                                n_viol += 1
                            ua = _u(ba, ka)
                            ka += 1
                            if ua * B <= rr:
                                x = x + y
                                n_acc += 1
                        else:
                            x = x + y
                            n_acc += 1
                if use_phi:
                    drift = ga * _dlogphi(x, S, T)
                    for i in range(nd):
                        drift += dw[i] * (_phi_ratio(x, dy[i], S, T) - _phi_ratio(x, -dy[i], S, T))
                    x = x + drift * dt
                if sd > 0.0:
                    x = x + sd * _normal(bg, kg)
                    kg += 2
            out[p, r] = x
    return out, n_viol, n_prop, n_acc, n_over


def run_paths_nb(x0, key, P, tlog, dy, dw, steps_per_rec, n_rec, first_path):
    """Compiled path loop; returns ``(paths, stats)`` with stats =
    (bound violations, proposals, accepted, overflowed steps)."""
    S, Z, T = _pack(P, tlog)
    dy = tuple(float(v) for v in dy)
    dw = tuple(float(v) for v in dw)
    out, *st = _run_paths_kernel(np.ascontiguousarray(x0, dtype=float), key, S, Z, T, dy, dw,
                                 int(steps_per_rec), int(n_rec), int(first_path))
    return out, np.array(st, dtype=float)


@njit
def run_exact_cauchy_nb(x0, key, scale_dt, sd, steps_per_rec, n_rec, first_path):
    """Exact stable increments: ``scale_dt * tan(pi (U - 1/2))`` per step."""
    npaths = x0.size
    out = np.empty((npaths, n_rec))
    for p in range(npaths):
        pid = first_path + p
        bj = _base(key, pid, JUMP)
        bg = _base(key, pid, GAUSS)
        kj = 0
        kg = 0
        x = x0[p]
        out[p, 0] = x
        for r in range(1, n_rec):
            for s in range(steps_per_rec):
                x = x + scale_dt * np.tan(np.pi * (_u(bj, kj) - 0.5))
                kj += 1
                if sd > 0.0:
                    x = x + sd * _normal(bg, kg)
                    kg += 2
            out[p, r] = x
    return out


# -- numpy twins ----------------------------------------------------------------

def _log_phi_tab_np(x, P, tlog):
    n = tlog.size
    s = (x - P[TX0]) / P[TH]
    out = np.empty_like(x)
    lo, hi = s < 0.0, s > n - 1
    mid = ~(lo | hi)
    with np.errstate(divide="ignore"):
        out[lo] = P[TLC] - P[TLP] * np.log(np.abs(x[lo] - P[TCEN]))
        out[hi] = P[TRC] - P[TRP] * np.log(np.abs(x[hi] - P[TCEN]))
    sm = s[mid]
    i = np.minimum(sm.astype(np.int64), n - 2)
    f = sm - i
    out[mid] = tlog[i] * (1.0 - f) + tlog[i + 1] * f
    return out


def _pow_q(r, q):
    if q == 1.0:
        return r
    if q == 0.5:
        return np.sqrt(r)
    return r ** q


def _ratio_np(x, y, P, tlog):
    if P[KIND] == 0.0:
        if P[Q] == 0.0:
            return np.ones_like(x)
        a2 = P[A] * P[A]
        return _pow_q((a2 + x * x) / (a2 + (x + y) * (x + y)), P[Q])
    return np.exp(_log_phi_tab_np(x + y, P, tlog) - _log_phi_tab_np(x, P, tlog))


def _global_bound_np(x, P, tlog):
    if P[KIND] == 0.0:
        if P[Q] == 0.0:
            return np.ones_like(x)
        a2 = P[A] * P[A]
        return _pow_q((a2 + x * x) / a2, P[Q])
    return np.exp(P[LOGMAX] - _log_phi_tab_np(x, P, tlog))


def _dlogphi_np(x, P, tlog):
    if P[KIND] == 0.0:
        return -2.0 * P[Q] * x / (P[A] * P[A] + x * x)
    h = 1e-4 * P[TH]
    return (_log_phi_tab_np(x + h, P, tlog) - _log_phi_tab_np(x - h, P, tlog)) / (2.0 * h)


def _rpow_np(r, alpha):
    if alpha == 1.0:
        return 1.0 / r
    return r ** (-alpha)


def _inv_pow_np(v, alpha):
    if alpha == 1.0:
        return 1.0 / v
    return v ** (-1.0 / alpha)


def _tail_count_np(r, P):
    return 2.0 * P[C] / P[ALPHA] * _rpow_np(r, P[ALPHA])


def _small_drift_np(x, P, tlog, dy, dw):
    acc = np.zeros_like(x)
    for i in range(dy.size):
        acc += dw[i] * (_ratio_np(x, dy[i], P, tlog) - _ratio_np(x, -dy[i], P, tlog))
    return acc


def _normal_np(bg, kg):
    u1 = uniforms_np(bg, kg)
    u2 = uniforms_np(bg, kg + 1)
    return np.sqrt(-2.0 * np.log(u1)) * np.cos(2.0 * np.pi * u2)


def _jumps_one_step_np(x, P, tlog, bc, bj, ba, kc, kj, ka, stats):
    eps, alpha = P[EPS], P[ALPHA]
    n = x.size
    rem = np.full(n, P[DT])
    nprop = np.zeros(n, dtype=np.int64)
    active = np.arange(n)
    use_phi = P[USE_PHI] != 0.0
    while active.size:
        xa = x[active]
        if use_phi:
            M = _global_bound_np(xa, P, tlog)
        else:
            M = np.ones_like(xa)
        rate = M * _tail_count_np(eps, P)
        split = np.zeros(xa.size, dtype=bool)
        w_near = np.zeros_like(xa)
        B1 = np.ones_like(xa)
        rho = np.zeros_like(xa)
        if use_phi and P[SPLIT] != 0.0:
            rho = 0.5 * np.abs(xa)
            split = rho > eps
            if split.any():
                rs = rho[split]
                lam_far = _tail_count_np(rs, P)
                lam_near = _tail_count_np(eps, P) - lam_far
                a2 = P[A] * P[A]
                B1[split] = _pow_q((a2 + xa[split] ** 2) / (a2 + rs * rs), P[Q])
                w_near[split] = B1[split] * lam_near
                rate[split] = w_near[split] + M[split] * lam_far
        w = -np.log(uniforms_np(bc[active], kc[active])) / rate
        kc[active] += 1
        go = w <= rem[active]
        nprop[active[go]] += 1
        over = go & (nprop[active] > P[MAXP])
        stats[3] += int(over.sum())
        go &= ~over
        idx = active[go]
        if idx.size == 0:
            break
        rem[idx] -= w[go]
        xa, M, B1, rho, split, w_near, rate = (v[go] for v in (xa, M, B1, rho, split, w_near, rate))
        mag = np.empty_like(xa)
        B = M.copy()
        if split.any():
            si = idx[split]
            ur = uniforms_np(bj[si], kj[si])
            um = uniforms_np(bj[si], kj[si] + 1)
            kj[si] += 2
            near = ur * rate[split] < w_near[split]
            rs = rho[split]
            e_a = _rpow_np(eps, alpha)
            m_near = _inv_pow_np(e_a - um * (e_a - _rpow_np(rs, alpha)), alpha)
            m_far = rs * _inv_pow_np(um, alpha)
            mag[split] = np.where(near, m_near, m_far)
            B[split] = np.where(near, B1[split], M[split])
        ns = ~split
        if ns.any():
            ni = idx[ns]
            um = uniforms_np(bj[ni], kj[ni])
            kj[ni] += 1
            mag[ns] = eps * _inv_pow_np(um, alpha)
        us = uniforms_np(bj[idx], kj[idx])
        kj[idx] += 1
        y = np.where(us < 0.5, mag, -mag)
        stats[1] += idx.size
        if use_phi:
            r = _ratio_np(xa, y, P, tlog)
            stats[0] += int(np.sum(r > B * (1.0 + 1e-12)))
            ua = uniforms_np(ba[idx], ka[idx])
            ka[idx] += 1
            acc = ua * B <= r
            x[idx[acc]] = xa[acc] + y[acc]
            stats[2] += int(acc.sum())
        else:
            x[idx] = xa + y
            stats[2] += idx.size
        active = idx


def run_paths_np(x0, key, P, tlog, dy, dw, steps_per_rec, n_rec, first_path):
    n = x0.size
    pid = np.arange(first_path, first_path + n)
    bc, bj, ba, bg = (bases_np(key, pid, s) for s in (CLOCK, JUMP, ACCEPT, GAUSS))
    kc, kj, ka = (np.zeros(n, dtype=np.int64) for _ in range(3))
    kg = 0
    stats = np.zeros(4)
    x = np.array(x0, dtype=float)
    out = np.empty((n, n_rec))
    out[:, 0] = x
    use_phi = P[USE_PHI] != 0.0
    for r in range(1, n_rec):
        for _ in range(steps_per_rec):
            if P[JUMPS] != 0.0:
                _jumps_one_step_np(x, P, tlog, bc, bj, ba, kc, kj, ka, stats)
            if use_phi:
                drift = _small_drift_np(x, P, tlog, dy, dw) + P[GA] * _dlogphi_np(x, P, tlog)
                x = x + drift * P[DT]
            if P[SD] > 0.0:
                x = x + P[SD] * _normal_np(bg, np.full(n, kg, dtype=np.int64))
                kg += 2
        out[:, r] = x
    return out, stats


def run_exact_cauchy_np(x0, key, scale_dt, sd, steps_per_rec, n_rec, first_path):
    n = x0.size
    pid = np.arange(first_path, first_path + n)
    bj, bg = bases_np(key, pid, JUMP), bases_np(key, pid, GAUSS)
    x = np.array(x0, dtype=float)
    out = np.empty((n, n_rec))
    out[:, 0] = x
    k = 0  # every path draws in lockstep
    for r in range(1, n_rec):
        for _ in range(steps_per_rec):
            x = x + scale_dt * np.tan(np.pi * (uniforms_np(bj, np.full(n, k, dtype=np.int64)) - 0.5))
            if sd > 0.0:
                x = x + sd * _normal_np(bg, np.full(n, 2 * k, dtype=np.int64))
            k += 1
        out[:, r] = x
    return out


@njit
def _jump_moments_kernel(x, key, S, Z, T, n_props):
    bj = _base(key, 0, JUMP)
    ba = _base(key, 0, ACCEPT)
    eps, alpha = Z[Z_EPS], Z[Z_ALPHA]
    M = _phi_bound(x, S, T)
    rate = M * 2.0 * Z[Z_C] / alpha * _rpow(eps, alpha)
    acc = 0.0
    acc2 = 0.0
    for i in range(n_props):
        um = _u(bj, 2 * i)
        us = _u(bj, 2 * i + 1)
        mag = eps * _inv_pow(um, alpha)
        y = mag if us < 0.5 else -mag
        v = 0.0
        if _u(ba, i) * M <= _phi_ratio(x, y, S, T) and abs(y) <= 1.0:
            v = y
        acc += v
        acc2 += v * v
    mean = acc / n_props
    var = acc2 / n_props - mean * mean
    return rate * mean, rate * np.sqrt(var / n_props)


def jump_moments_nb(x, key, P, tlog, n_props):
    """Mean accepted displacement per unit time from ``x`` for ``eps < |y| <= 1``.

    Uses the sampler's proposal and acceptance steps with the global bound.
    """
    S, Z, T = _pack(P, tlog)
    return _jump_moments_kernel(float(x), key, S, Z, T, int(n_props))
