"""Truncated complex power series about a centre.

A :class:`PowerSeries` stores ``order`` coefficients ``c[0..order-1]`` of
``sum c[n] (z - center)**n``; coefficients beyond the truncation are unknown,
not zero, so binary operations return the smaller of the operand orders.
Instances are immutable (the coefficient buffer is marked read-only).
"""
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from . import kernels
from .errors import CenterMismatch, ConstantTermMismatch, InsufficientOrder, LogOfZeroConstantTerm

DEFAULT_ORDER = 64

_CENTER_TOL = 1e-14
_COMPOSE_TOL = 1e-12


def _close(u, v, tol):
    return abs(u - v) <= tol * max(1.0, abs(u), abs(v))


@dataclass(frozen=True, eq=False)
class PowerSeries:
    coeffs: np.ndarray
    center: complex = 0.0

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=np.complex128).ravel()
        if c.size < 1:
            raise ValueError("a power series needs at least one coefficient")
        if not np.all(np.isfinite(c)):
            raise ArithmeticError("non-finite coefficient in power series")
        c.flags.writeable = False
        object.__setattr__(self, "coeffs", c)
        object.__setattr__(self, "center", complex(self.center))

    @classmethod
    def constant(cls, value, order=DEFAULT_ORDER, center=0.0):
        c = np.zeros(order, dtype=np.complex128)
        c[0] = value
        return cls(c, center)

    @classmethod
    def variable(cls, center=0.0, order=DEFAULT_ORDER):
        """The identity map z expanded about ``center``."""
        c = np.zeros(order, dtype=np.complex128)
        c[0] = center
        if order > 1:
            c[1] = 1.0
        return cls(c, center)

    @classmethod
    def from_polynomial(cls, p, center=0.0, order=DEFAULT_ORDER):
        """Taylor shift of the polynomial with ascending coefficients ``p``."""
        p = np.array(p, dtype=np.complex128).ravel()
        if p.size == 0:
            p = np.zeros(1, dtype=np.complex128)
        center = complex(center)
        q = p.copy()
        # repeated synthetic division by (t - center)
        m = len(q)
        for j in range(m - 1):
            for k in range(m - 2, j - 1, -1):
                q[k] += center * q[k + 1]
        out = np.zeros(order, dtype=np.complex128)
        k = min(order, m)
        out[:k] = q[:k]
        return cls(out, center)

    @property
    def order(self):
        return self.coeffs.size

    def truncate(self, order):
        return PowerSeries(self.coeffs[:order], self.center)

    def __call__(self, z):
        """Horner evaluation (value only); accepts scalars and arrays."""
        w = np.asarray(z, dtype=np.complex128) - self.center
        out = kernels.horner(self.coeffs, np.atleast_1d(w).ravel())
        if np.ndim(z) == 0:
            return complex(out[0])
        return out.reshape(np.shape(z))

    # operator sugar over ps_arith
    def __add__(self, other):
        return ps_arith("add", self, other)

    def __radd__(self, other):
        return ps_arith("add", self, other)

    def __sub__(self, other):
        return ps_arith("sub", self, other)

    def __rsub__(self, other):
        return ps_arith("scale", self, -1.0) + other

    def __mul__(self, other):
        if isinstance(other, PowerSeries):
            return ps_arith("mul", self, other)
        return ps_arith("scale", self, other)

    def __rmul__(self, other):
        return ps_arith("scale", self, other)

    def __neg__(self):
        return ps_arith("scale", self, -1.0)

    def __truediv__(self, other):
        if isinstance(other, PowerSeries):
            return ps_div(self, other)
        return ps_arith("scale", self, 1.0 / other)

    def deriv(self):
        return ps_calculus("derive", self)

    def integ(self, c0=0.0):
        return ps_calculus("integrate", self, c0)

    def __repr__(self):
        head = ", ".join(f"{c:.6g}" for c in self.coeffs[:4])
        return f"PowerSeries(center={self.center:.6g}, order={self.order}, [{head}, ...])"


def _check_centers(a, b):
    if not _close(a.center, b.center, _CENTER_TOL):
        raise CenterMismatch(f"centres differ: {a.center} vs {b.center}")


def ps_arith(op, a, b):
    """Coefficientwise / Cauchy-product arithmetic.

    ``op`` is one of ``add``, ``sub``, ``mul`` (series operands) or ``scale``
    (scalar ``b``).  ``add`` and ``sub`` also accept a scalar ``b``, which
    only touches the constant term.
    """
    if op == "scale":
        return PowerSeries(a.coeffs * complex(b), a.center)
    if not isinstance(b, PowerSeries):
        if op not in ("add", "sub"):
            raise ValueError(f"op {op!r} needs a series operand")
        c = a.coeffs.copy()
        c[0] += complex(b) if op == "add" else -complex(b)
        return PowerSeries(c, a.center)
    _check_centers(a, b)
    n = min(a.order, b.order)
    if op == "add":
        return PowerSeries(a.coeffs[:n] + b.coeffs[:n], a.center)
    if op == "sub":
        return PowerSeries(a.coeffs[:n] - b.coeffs[:n], a.center)
    if op == "mul":
        return PowerSeries(kernels.mul_trunc(a.coeffs, b.coeffs, n), a.center)
    raise ValueError(f"unknown op {op!r}")


def ps_div(a, b):
    _check_centers(a, b)
    if b.coeffs[0] == 0:
        raise ZeroDivisionError("divisor series has zero constant term")
    n = min(a.order, b.order)
    return PowerSeries(kernels.div_trunc(a.coeffs, b.coeffs, n), a.center)


def ps_compose(outer, inner):
    """outer(inner(z)); ``inner``'s constant term must sit at ``outer``'s centre."""
    if not _close(inner.coeffs[0], outer.center, _COMPOSE_TOL):
        raise ConstantTermMismatch(
            f"inner constant term {inner.coeffs[0]} is not the outer centre {outer.center}"
        )
    n = min(outer.order, inner.order)
    shifted = inner.coeffs[:n].copy()
    shifted[0] = 0.0
    return PowerSeries(kernels.compose(outer.coeffs, shifted, n), inner.center)


def ps_exp_log(op, a):
    n = a.order
    if op == "exp":
        return PowerSeries(kernels.exp_series(a.coeffs, n), a.center)
    if op == "log":
        if a.coeffs[0] == 0:
            raise LogOfZeroConstantTerm("log of a series with zero constant term")
        return PowerSeries(kernels.log_series(a.coeffs, n), a.center)
    raise ValueError(f"unknown op {op!r}")


def ps_exp(a):
    return ps_exp_log("exp", a)


def ps_log(a):
    return ps_exp_log("log", a)


def ps_pow(a, s):
    """Principal power a**s via exp(s log a)."""
    return ps_exp(ps_arith("scale", ps_log(a), s))


def ps_calculus(op, a, c0=0.0):
    """Termwise derivative or antiderivative.

    ``derive`` drops one order (the top coefficient's derivative is unknown);
    ``integrate`` keeps the order, so the integrand's top coefficient falls
    off the end, and sets the constant term to ``c0``.
    """
    c = a.coeffs
    n = a.order
    if op == "derive":
        if n == 1:
            return PowerSeries([0.0], a.center)
        return PowerSeries(c[1:] * np.arange(1, n), a.center)
    if op == "integrate":
        out = np.empty(n, dtype=np.complex128)
        out[0] = c0
        out[1:] = c[: n - 1] / np.arange(1, n)
        return PowerSeries(out, a.center)
    raise ValueError(f"unknown op {op!r}")


class EvalResult(NamedTuple):
    value: complex
    error: float
    outside: bool


class RadiusEstimate(NamedTuple):
    value: float  # math.inf when unbounded
    method: str  # "hadamard-fit" | "ratio" | "declared-entire"
    fit_window: tuple
    fit_residual: float

    @property
    def unbounded(self):
        return not np.isfinite(self.value)


_SKIP_BELOW = 1e-300
_NOISE_RATIO = 1e-13
_BEAT_RESIDUAL = 0.02
_FIT_RESIDUAL_MAX = 0.5
_CURVATURE_ENTIRE = -0.05
_HALF_RESIDUAL_MAX = 0.25


def _line_fit(x, y):
    slope, res = kernels.lsq_slope(x, y, False)
    return float(slope), float(res)


def _ratio_radius(mags, idx):
    nz = idx[mags[idx] > _SKIP_BELOW][-8:]
    if nz.size < 2:
        return None
    i, j = nz[0], nz[-1]
    return float((mags[i] / mags[j]) ** (1.0 / (j - i))), (int(i), int(j + 1))


def ratio_estimate(a):
    """Root test on the last 8 nonzero coefficients (any order >= 2)."""
    rr = _ratio_radius(np.abs(a.coeffs), np.arange(1, a.order))
    if rr is None:
        return RadiusEstimate(np.inf, "declared-entire", (), 0.0)
    return RadiusEstimate(rr[0], "ratio", rr[1], 0.0)


def radius_estimate(a, scale=None):
    """Empirical radius of convergence from the coefficient tail.

    Least squares of ``log|c_n|`` against ``n`` and ``log n`` over the window
    ``[order/2, order)``; the ``log n`` column absorbs the algebraic prefactor
    of the nearest singularity, which otherwise biases the slope by ~1/n.
    Tail curvature (slope of the second half of the window markedly below the
    first) marks super-geometric decay, i.e. an entire function.

    ``scale`` optionally gives, per coefficient, the magnitude of the terms
    that cancelled to produce it.  Coefficients below ``1e-13 * scale`` are
    rounding noise; when they fill the tail the window slides down to the
    last reliable block.
    """
    n = a.order
    if n < 16:
        raise InsufficientOrder(f"radius fit needs order >= 16, got {n}")
    mags = np.abs(a.coeffs)
    ok = mags > _SKIP_BELOW
    if scale is not None:
        ok &= mags >= _NOISE_RATIO * np.asarray(scale)
    lo, hi = n // 2, n
    reliable = np.flatnonzero(ok[1:]) + 1
    if reliable.size < 2:
        return RadiusEstimate(np.inf, "declared-entire", (), 0.0)
    if scale is not None and reliable[-1] + 1 < (lo + hi) // 2:
        hi = int(reliable[-1]) + 1
        lo = max(2, hi - n // 4)
        if hi - lo < 8:
            return RadiusEstimate(np.inf, "declared-entire", (), 0.0)
    window = np.arange(lo, hi)
    keep = window[ok[window]]
    if keep.size * 2 < window.size:
        rr = _ratio_radius(np.where(ok, mags, 0.0), np.arange(1, hi))
        if rr is None:
            return RadiusEstimate(np.inf, "declared-entire", (), 0.0)
        return RadiusEstimate(rr[0], "ratio", rr[1], 0.0)

    x = keep.astype(float)
    y = np.log(mags[keep])
    est = _tail_fit(x, y, lo, hi)
    if est.fit_residual > _BEAT_RESIDUAL and est.method != "declared-entire":
        pair = _pair_radius(a.coeffs, keep)
        if pair is not None:
            return RadiusEstimate(pair, "hadamard-fit", (lo, hi), est.fit_residual)
    if est.fit_residual > _FIT_RESIDUAL_MAX:
        # A noisy tail is often rounding error from an alternating recursion;
        # the earlier, still clean window then decides whether the decay is
        # super-geometric.
        early = np.arange(max(2, lo - n // 4), lo)
        early = early[ok[early]]
        if early.size >= 8:
            pre = _tail_fit(early.astype(float), np.log(mags[early]), int(early[0]), lo)
            if pre.method == "declared-entire":
                return RadiusEstimate(np.inf, "declared-entire", (int(early[0]), lo), pre.fit_residual)
        # oscillating tail: the limsup only sees the upper envelope
        env = _tail_fit(x, _upper_hull(x, y), lo, hi)
        if env.fit_residual <= _FIT_RESIDUAL_MAX:
            return env
        rr = _ratio_radius(np.where(ok, mags, 0.0), np.arange(1, hi))
        if rr is not None:
            return RadiusEstimate(rr[0], "ratio", rr[1], est.fit_residual)
    return est


def _recurrence_fit(c, rows, k):
    """Fit c_n = sum_j (q_j + r_j / n) c_{n-j}, j = 1..k, rows scaled to unit |c_n|."""
    n = rows.astype(float)
    cols = [c[rows - j] for j in range(1, k + 1)] + [c[rows - j] / n for j in range(1, k + 1)]
    A = np.column_stack(cols) / np.abs(c[rows])[:, None]
    b = c[rows] / np.abs(c[rows])
    q, *_ = np.linalg.lstsq(A, b, rcond=None)
    res = float(np.linalg.norm(A @ q - b) / np.sqrt(rows.size))
    return q[:k], res


def _pair_radius(c, keep):
    """Radius from a two-term recurrence when two singularities share the circle.

    Equal-modulus singularities (a conjugate pair, say) make |c_n| beat, which
    biases a single-exponential fit.  A second-order recurrence with 1/n
    corrections resolves both; it is accepted only if it explains the tail far
    better than the first-order one and its two roots have equal modulus.
    """
    rows = keep[keep >= keep[0] + 2]
    if rows.size < 8:
        return None
    _, res1 = _recurrence_fit(c, rows, 1)
    q, res2 = _recurrence_fit(c, rows, 2)
    if not res2 < 0.01 * res1:
        return None
    lam = np.abs(np.roots([1.0, -q[0], -q[1]]))
    if lam.size != 2 or lam.min() < 0.9 * lam.max() or lam.max() == 0:
        return None
    return float(1.0 / lam.max())


def _upper_hull(x, y):
    """Values of the least concave majorant of the points (x, y) at x."""
    hull = []
    for i in range(x.size):
        while len(hull) >= 2:
            i0, i1 = hull[-2], hull[-1]
            if (y[i1] - y[i0]) * (x[i] - x[i0]) <= (y[i] - y[i0]) * (x[i1] - x[i0]):
                hull.pop()
            else:
                break
        hull.append(i)
    return np.interp(x, x[hull], y[hull])


def _tail_fit(x, y, lo, hi):
    slope, resid = kernels.lsq_slope(x, y, True)
    resid = float(resid)
    half = (lo + hi) // 2
    first = x < half
    if first.sum() >= 4 and (~first).sum() >= 4:
        s1, r1 = _line_fit(x[first], y[first])
        s2, r2 = _line_fit(x[~first], y[~first])
        if s2 - s1 < _CURVATURE_ENTIRE and max(r1, r2) < _HALF_RESIDUAL_MAX:
            return RadiusEstimate(np.inf, "declared-entire", (lo, hi), resid)
    return RadiusEstimate(float(np.exp(-slope)), "hadamard-fit", (lo, hi), resid)


def ps_eval(a, z):
    """Value at ``z`` with a truncation-error estimate.

    The estimate is the last retained term times the geometric tail factor
    q/(1-q), q = |z - center| / radius.  Points at or beyond the estimated
    radius are flagged (``outside``) and get an infinite error.
    """
    w = complex(z) - a.center
    value = a(z)
    if w == 0:
        return EvalResult(complex(a.coeffs[0]), 0.0, False)
    R = (radius_estimate(a) if a.order >= 16 else ratio_estimate(a)).value
    q = abs(w) / R if np.isfinite(R) else 0.0
    last = abs(a.coeffs[-1]) * abs(w) ** (a.order - 1)
    if q >= 1.0:
        return EvalResult(value, np.inf, True)
    return EvalResult(value, float(last * q / (1.0 - q)) if q > 0 else float(last), False)


def locate_singularity(a, tail=24):
    """Domb-Sykes estimate of the dominant singularity of ``a``.

    Fits c_n / c_{n+1} = A + B/n over the coefficient tail; A approximates
    (singularity - center).  Returns (location, relative_residual) or None
    when the tail is too sparse to fit.
    """
    c = a.coeffs
    n = a.order
    lo = max(2, n - 1 - tail)
    idx = np.arange(lo, n - 1)
    ok = (np.abs(c[idx]) > _SKIP_BELOW) & (np.abs(c[idx + 1]) > _SKIP_BELOW)
    idx = idx[ok]
    if idx.size < 6:
        return None
    r = c[idx] / c[idx + 1]
    A = np.column_stack((np.ones(idx.size), 1.0 / idx)).astype(np.complex128)
    coef, *_ = np.linalg.lstsq(A, r, rcond=None)
    resid = np.sqrt(np.mean(np.abs(r - A @ coef) ** 2))
    if coef[0] == 0:
        return None
    return a.center + complex(coef[0]), float(resid / abs(coef[0]))
