"""Hot numeric kernels.

Every kernel exists twice: a numba ``@njit`` version (explicit loops) and a
pure-numpy version.  The public names at the bottom of the module are bound
to one family at import time.  Set ``HOLOFACT_JIT=0`` in the environment to
force the numpy path (useful when numba is missing or while debugging);
``benchmarks/bench_kernels.py`` times both families side by side.

All series kernels work on truncated coefficient arrays of dtype complex128
and return a fresh array of the requested length ``n``.
"""
import os

import numpy as np

try:
    import numba
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None

USE_NUMBA = numba is not None and os.environ.get("HOLOFACT_JIT", "1").lower() not in (
    "0",
    "false",
    "no",
    "off",
)


def _njit(fn):
    if numba is None:  # pragma: no cover
        return fn
    return numba.njit(cache=True, nogil=True)(fn)


# --------------------------------------------------------------------------
# truncated series products and elementary functions
# --------------------------------------------------------------------------


@_njit
def mul_trunc_nb(a, b, n):
    out = np.zeros(n, dtype=np.complex128)
    na = min(len(a), n)
    nb = min(len(b), n)
    for i in range(na):
        ai = a[i]
        if ai == 0:
            continue
        for j in range(min(nb, n - i)):
            out[i + j] += ai * b[j]
    return out


def mul_trunc_np(a, b, n):
    out = np.zeros(n, dtype=np.complex128)
    c = np.convolve(a[:n], b[:n])[:n]
    out[: len(c)] = c
    return out


@_njit
def div_trunc_nb(b, a, n):
    # q = b / a, a[0] != 0 checked by the caller
    q = np.zeros(n, dtype=np.complex128)
    inv = 1.0 / a[0]
    for m in range(n):
        s = b[m] if m < len(b) else 0.0j
        for k in range(1, min(m, len(a) - 1) + 1):
            s -= a[k] * q[m - k]
        q[m] = s * inv
    return q


def div_trunc_np(b, a, n):
    q = np.zeros(n, dtype=np.complex128)
    aa = np.zeros(n, dtype=np.complex128)
    aa[: min(n, len(a))] = a[:n]
    bb = np.zeros(n, dtype=np.complex128)
    bb[: min(n, len(b))] = b[:n]
    inv = 1.0 / aa[0]
    for m in range(n):
        s = bb[m] - np.dot(aa[1 : m + 1], q[m - 1 :: -1][:m]) if m else bb[0]
        q[m] = s * inv
    return q


@_njit
def exp_series_nb(a, n):
    # b' = a' b  =>  m b_m = sum_{k=1}^{m} k a_k b_{m-k}
    b = np.zeros(n, dtype=np.complex128)
    b[0] = np.exp(a[0])
    for m in range(1, n):
        s = 0.0 + 0.0j
        for k in range(1, min(m, len(a) - 1) + 1):
            s += k * a[k] * b[m - k]
        b[m] = s / m
    return b


def exp_series_np(a, n):
    aa = np.zeros(n, dtype=np.complex128)
    aa[: min(n, len(a))] = a[:n]
    ka = aa * np.arange(n)
    b = np.zeros(n, dtype=np.complex128)
    b[0] = np.exp(aa[0])
    for m in range(1, n):
        b[m] = np.dot(ka[1 : m + 1], b[m - 1 :: -1][:m]) / m
    return b


@_njit
def log_series_nb(a, n):
    # a b' = a'  =>  m a_0 b_m = m a_m - sum_{k=1}^{m-1} k b_k a_{m-k}
    b = np.zeros(n, dtype=np.complex128)
    b[0] = np.log(a[0])
    inv = 1.0 / a[0]
    for m in range(1, n):
        s = m * a[m] if m < len(a) else 0.0j
        for k in range(1, m):
            if m - k < len(a):
                s -= k * b[k] * a[m - k]
        b[m] = s * inv / m
    return b


def log_series_np(a, n):
    aa = np.zeros(n, dtype=np.complex128)
    aa[: min(n, len(a))] = a[:n]
    b = np.zeros(n, dtype=np.complex128)
    b[0] = np.log(aa[0])
    kb = np.zeros(n, dtype=np.complex128)
    inv = 1.0 / aa[0]
    for m in range(1, n):
        s = m * aa[m]
        if m > 1:
            s -= np.dot(kb[1:m], aa[m - 1 : 0 : -1])
        b[m] = s * inv / m
        kb[m] = m * b[m]
    return b


@_njit
def compose_nb(outer, inner, n):
    # outer(inner(w)) with inner[0] == 0 (caller shifts); Horner in the ring
    res = np.zeros(n, dtype=np.complex128)
    m = min(len(outer), n)
    res[0] = outer[m - 1]
    tmp = np.zeros(n, dtype=np.complex128)
    for k in range(m - 2, -1, -1):
        for i in range(n):
            tmp[i] = 0.0
        for i in range(n):
            ri = res[i]
            if ri == 0:
                continue
            for j in range(1, min(len(inner), n - i)):
                tmp[i + j] += ri * inner[j]
        for i in range(n):
            res[i] = tmp[i]
        res[0] += outer[k]
    return res


def compose_np(outer, inner, n):
    m = min(len(outer), n)
    inn = np.zeros(n, dtype=np.complex128)
    inn[1 : min(n, len(inner))] = inner[1:n]
    res = np.zeros(n, dtype=np.complex128)
    res[0] = outer[m - 1]
    for k in range(m - 2, -1, -1):
        res = np.convolve(res, inn)[:n]
        res[0] += outer[k]
    return res


@_njit
def horner_nb(coeffs, w):
    # points in the inner loop: independent chains vectorize, one chain per point would not
    n = len(w)
    out = np.empty(n, dtype=np.complex128)
    m = len(coeffs)
    for i in range(n):
        out[i] = coeffs[m - 1]
    for k in range(m - 2, -1, -1):
        c = coeffs[k]
        for i in range(n):
            out[i] = out[i] * w[i] + c
    return out


def horner_np(coeffs, w):
    acc = np.full(w.shape, coeffs[-1], dtype=np.complex128)
    for c in coeffs[-2::-1]:
        acc = acc * w + c
    return acc


# --------------------------------------------------------------------------
# Taylor coefficients of  L' = E(w) * (L - a)^(-N) * exp(-G(L)),  L(0) = a0
# E holds the coefficients of exp(F) about the expansion centre.
# Every auxiliary series is advanced one coefficient per step (online
# recursion), so the whole solve costs O(n^2 * (deg G + 3)).
# Also returns scale[m] = sum |E_k PQ_{m-1-k}| / m, the size of the terms
# that cancel into c[m]; |c[m]| far below it means c[m] is rounding noise.
# --------------------------------------------------------------------------


@_njit
def ivp_taylor_nb(E, gcoef, N, a, a0, n):
    c = np.zeros(n, dtype=np.complex128)
    c[0] = a0
    dg = len(gcoef) - 1
    # powers[j] holds the series of L^j, j = 0..dg
    powers = np.zeros((dg + 1, n), dtype=np.complex128)
    powers[0, 0] = 1.0
    for j in range(1, dg + 1):
        powers[j, 0] = a0**j
    H = np.zeros(n, dtype=np.complex128)  # -G(L)
    Q = np.zeros(n, dtype=np.complex128)  # exp(-G(L))
    P = np.zeros(n, dtype=np.complex128)  # (L - a)^(-N)
    PQ = np.zeros(n, dtype=np.complex128)
    u0 = a0 - a
    s = -float(N)
    acc = 0.0j
    for j in range(dg + 1):
        acc += gcoef[j] * powers[j, 0]
    H[0] = -acc
    Q[0] = np.exp(H[0])
    P[0] = u0**s if N > 0 else 1.0
    PQ[0] = P[0] * Q[0]
    scale = np.zeros(n)
    scale[0] = abs(a0)
    for m in range(1, n):
        # R_{m-1} = sum_k E_k PQ_{m-1-k}
        r = 0.0j
        mag = 0.0
        for k in range(min(m, len(E))):
            t = E[k] * PQ[m - 1 - k]
            r += t
            mag += abs(t)
        c[m] = r / m
        scale[m] = mag / m
        if m == n - 1:
            break
        # powers of L, coefficient m
        for j in range(1, dg + 1):
            t = 0.0j
            for k in range(m + 1):
                t += c[k] * powers[j - 1, m - k]
            powers[j, m] = t
        acc = 0.0j
        for j in range(1, dg + 1):
            acc += gcoef[j] * powers[j, m]
        H[m] = -acc
        t = 0.0j
        for k in range(1, m + 1):
            t += k * H[k] * Q[m - k]
        Q[m] = t / m
        if N > 0:
            # J.C.P. Miller power recursion for (L - a)^s
            t = 0.0j
            for k in range(1, m + 1):
                t += ((s + 1.0) * k - m) * c[k] * P[m - k]
            P[m] = t / (m * u0)
        t = 0.0j
        for k in range(m + 1):
            t += P[k] * Q[m - k]
        PQ[m] = t
    return c, scale


def ivp_taylor_np(E, gcoef, N, a, a0, n):
    c = np.zeros(n, dtype=np.complex128)
    c[0] = a0
    dg = len(gcoef) - 1
    EE = np.zeros(n, dtype=np.complex128)
    EE[: min(n, len(E))] = E[:n]
    powers = np.zeros((dg + 1, n), dtype=np.complex128)
    powers[0, 0] = 1.0
    for j in range(1, dg + 1):
        powers[j, 0] = a0**j
    H = np.zeros(n, dtype=np.complex128)
    Q = np.zeros(n, dtype=np.complex128)
    P = np.zeros(n, dtype=np.complex128)
    PQ = np.zeros(n, dtype=np.complex128)
    kH = np.zeros(n, dtype=np.complex128)
    u0 = a0 - a
    s = -float(N)
    H[0] = -np.dot(gcoef, powers[:, 0])
    Q[0] = np.exp(H[0])
    P[0] = u0**s if N > 0 else 1.0
    PQ[0] = P[0] * Q[0]
    scale = np.zeros(n)
    scale[0] = abs(a0)
    for m in range(1, n):
        terms = EE[:m] * PQ[m - 1 :: -1][:m]
        c[m] = terms.sum() / m
        scale[m] = np.abs(terms).sum() / m
        if m == n - 1:
            break
        rev_c = c[m::-1]
        for j in range(1, dg + 1):
            powers[j, m] = np.dot(rev_c, powers[j - 1, : m + 1])
        H[m] = -np.dot(gcoef[1:], powers[1:, m])
        kH[m] = m * H[m]
        Q[m] = np.dot(kH[1 : m + 1], Q[m - 1 :: -1][:m]) / m
        if N > 0:
            k = np.arange(1, m + 1)
            P[m] = np.dot(((s + 1.0) * k - m) * c[1 : m + 1], P[m - 1 :: -1][:m]) / (m * u0)
        PQ[m] = np.dot(P[: m + 1], Q[m::-1])
    return c, scale


# --------------------------------------------------------------------------
# adaptive Gauss-Kronrod (7/15) along a straight complex segment
#
# integrand kinds:
#   0: (t - a)^N * exp(P(t)),  P given by ascending coefficients
#   1: exp(exp(t))
#   2: expm1(t) / t
# --------------------------------------------------------------------------

_XGK = np.array(
    [
        0.991455371120812639206854697526329,
        0.949107912342758524526189684047851,
        0.864864423359769072789712788640926,
        0.741531185599394439863864773280788,
        0.586087235467691130294144845693013,
        0.405845151377397166906606412076961,
        0.207784955007898467600689403773245,
        0.0,
    ]
)
_WGK = np.array(
    [
        0.022935322010529224963732008058970,
        0.063092092629978553290700663189204,
        0.104790010322250183839876322541518,
        0.140653259715525918745189590510238,
        0.169004726639267902826583426598550,
        0.190350578064785409913256402421014,
        0.204432940075298892414161999234649,
        0.209482141084727828012999174891714,
    ]
)
_WG = np.array(
    [
        0.129484966168869693270611432679082,
        0.279705391489276667901467771423780,
        0.381830050505118944950369775488975,
        0.417959183673469387755102040816327,
    ]
)
# full 15-point node set on [-1, 1] and matching weights
_NODES = np.concatenate((-_XGK[:7], _XGK[::-1]))
_WK15 = np.concatenate((_WGK[:7], _WGK[::-1]))
_WG15 = np.zeros(15)
for _i, _w in zip((1, 3, 5), _WG[:3]):
    _WG15[_i] = _w
    _WG15[14 - _i] = _w
_WG15[7] = _WG[3]

_EPS = np.finfo(float).eps


@_njit
def _integrand_nb(kind, t, pc, N, a):
    if kind == 0:
        acc = pc[len(pc) - 1]
        for k in range(len(pc) - 2, -1, -1):
            acc = acc * t + pc[k]
        v = np.exp(acc)
        if N > 0:
            v = v * (t - a) ** N
        return v
    if kind == 1:
        return np.exp(np.exp(t))
    if abs(t) < 1e-4:
        return 1.0 + t * (0.5 + t * (1.0 / 6.0 + t / 24.0))
    return (np.exp(t) - 1.0) / t


def _integrand_np(kind, t, pc, N, a):
    if kind == 0:
        v = np.exp(horner_np(pc, t))
        if N > 0:
            v = v * (t - a) ** N
        return v
    if kind == 1:
        return np.exp(np.exp(t))
    small = np.abs(t) < 1e-4
    tt = np.where(small, 1.0, t)
    big = (np.exp(tt) - 1.0) / tt
    ser = 1.0 + t * (0.5 + t * (1.0 / 6.0 + t / 24.0))
    return np.where(small, ser, big)


@_njit
def _gk15_nb(kind, pc, N, a, z0, dz, s0, s1, nodes, wk, wg):
    half = 0.5 * (s1 - s0)
    mid = 0.5 * (s1 + s0)
    k = 0.0j
    g = 0.0j
    l1 = 0.0
    for i in range(15):
        s = mid + half * nodes[i]
        v = _integrand_nb(kind, z0 + s * dz, pc, N, a)
        k += wk[i] * v
        g += wg[i] * v
        l1 += wk[i] * abs(v)
    scale = half * dz
    return k * scale, abs((k - g) * scale), l1 * abs(scale)


@_njit
def gk_segment_nb(kind, pc, N, a, z0, z1, rtol, max_intervals):
    """Integral of the kind-integrand from z0 to z1.

    Returns (value, error_estimate, status) where status 0 = converged,
    1 = interval budget exhausted, 2 = non-finite integrand.
    """
    dz = z1 - z0
    lo = np.empty(max_intervals)
    hi = np.empty(max_intervals)
    val = np.empty(max_intervals, dtype=np.complex128)
    err = np.empty(max_intervals)
    l1s = np.empty(max_intervals)
    v, e, l1 = _gk15_nb(kind, pc, N, a, z0, dz, 0.0, 1.0, _NODES, _WK15, _WG15)
    lo[0] = 0.0
    hi[0] = 1.0
    val[0] = v
    err[0] = e
    l1s[0] = l1
    cnt = 1
    while True:
        total = 0.0j
        terr = 0.0
        tl1 = 0.0
        worst = 0
        for i in range(cnt):
            total += val[i]
            terr += err[i]
            tl1 += l1s[i]
            if err[i] > err[worst]:
                worst = i
        if not (np.isfinite(total.real) and np.isfinite(total.imag) and np.isfinite(terr)):
            return total, terr, 2
        if terr <= max(rtol * abs(total), 50.0 * 2.220446049250313e-16 * tl1):
            return total, terr, 0
        if cnt + 1 > max_intervals:
            return total, terr, 1
        m = 0.5 * (lo[worst] + hi[worst])
        v1, e1, a1 = _gk15_nb(kind, pc, N, a, z0, dz, lo[worst], m, _NODES, _WK15, _WG15)
        v2, e2, a2 = _gk15_nb(kind, pc, N, a, z0, dz, m, hi[worst], _NODES, _WK15, _WG15)
        lo[cnt] = m
        hi[cnt] = hi[worst]
        val[cnt] = v2
        err[cnt] = e2
        l1s[cnt] = a2
        hi[worst] = m
        val[worst] = v1
        err[worst] = e1
        l1s[worst] = a1
        cnt += 1


def _gk15_np(kind, pc, N, a, z0, dz, s0, s1):
    half = 0.5 * (s1 - s0)
    mid = 0.5 * (s1 + s0)
    v = _integrand_np(kind, z0 + (mid + half * _NODES) * dz, pc, N, a)
    scale = half * dz
    k = np.dot(_WK15, v)
    g = np.dot(_WG15, v)
    return k * scale, abs((k - g) * scale), np.dot(_WK15, np.abs(v)) * abs(scale)


def gk_segment_np(kind, pc, N, a, z0, z1, rtol, max_intervals):
    dz = z1 - z0
    ivals = [(0.0, 1.0) + _gk15_np(kind, pc, N, a, z0, dz, 0.0, 1.0)]
    while True:
        total = sum(iv[2] for iv in ivals)
        terr = sum(iv[3] for iv in ivals)
        tl1 = sum(iv[4] for iv in ivals)
        if not (np.isfinite(total) and np.isfinite(terr)):
            return total, terr, 2
        if terr <= max(rtol * abs(total), 50.0 * _EPS * tl1):
            return total, terr, 0
        if len(ivals) + 1 > max_intervals:
            return total, terr, 1
        worst = max(range(len(ivals)), key=lambda i: ivals[i][3])
        s0, s1 = ivals[worst][:2]
        m = 0.5 * (s0 + s1)
        ivals[worst] = (s0, m) + _gk15_np(kind, pc, N, a, z0, dz, s0, m)
        ivals.append((m, s1) + _gk15_np(kind, pc, N, a, z0, dz, m, s1))


# --------------------------------------------------------------------------
# small least-squares fits used by the radius estimator
#   y ~ b0 + b1 x (+ b2 log x); returns (b1, rms residual)
# --------------------------------------------------------------------------


@_njit
def lsq_slope_nb(x, y, with_log):
    m = x.size
    k = 3 if with_log else 2
    A = np.empty((m, k))
    for i in range(m):
        A[i, 0] = 1.0
        A[i, 1] = x[i]
        if with_log:
            A[i, 2] = np.log(x[i])
    # centre the non-constant columns for conditioning
    for j in range(1, k):
        mu = 0.0
        for i in range(m):
            mu += A[i, j]
        mu /= m
        for i in range(m):
            A[i, j] -= mu
    ymu = 0.0
    for i in range(m):
        ymu += y[i]
    ymu /= m
    n = k - 1
    M = np.zeros((n, n))
    r = np.zeros(n)
    for a in range(n):
        for b in range(n):
            acc = 0.0
            for i in range(m):
                acc += A[i, a + 1] * A[i, b + 1]
            M[a, b] = acc
        acc = 0.0
        for i in range(m):
            acc += A[i, a + 1] * (y[i] - ymu)
        r[a] = acc
    coef = np.linalg.solve(M, r)
    ss = 0.0
    for i in range(m):
        e = y[i] - ymu
        for a in range(n):
            e -= coef[a] * A[i, a + 1]
        ss += e * e
    return coef[0], np.sqrt(ss / m)


def lsq_slope_np(x, y, with_log):
    cols = [np.ones_like(x), x] + ([np.log(x)] if with_log else [])
    A = np.column_stack(cols)
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    return coef[1], float(np.sqrt(np.mean((y - A @ coef) ** 2)))


# --------------------------------------------------------------------------
# dispatch
# --------------------------------------------------------------------------

if USE_NUMBA:
    mul_trunc = mul_trunc_nb
    div_trunc = div_trunc_nb
    exp_series = exp_series_nb
    log_series = log_series_nb
    compose = compose_nb
    horner = horner_nb
    ivp_taylor = ivp_taylor_nb
    gk_segment = gk_segment_nb
    lsq_slope = lsq_slope_nb
else:
    mul_trunc = mul_trunc_np
    div_trunc = div_trunc_np
    exp_series = exp_series_np
    log_series = log_series_np
    compose = compose_np
    horner = horner_np
    ivp_taylor = ivp_taylor_np
    gk_segment = gk_segment_np
    lsq_slope = lsq_slope_np


def backend():
    return "numba" if USE_NUMBA else "numpy"
