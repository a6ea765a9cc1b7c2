"""Concrete entire functions: evaluation, Taylor expansion, growth and values.

Each variant is a small frozen dataclass.  ``Chain(f1, f2, ..., fm)`` means
``f1(f2(...fm(z)))``.  Three non-entire helpers (``Linear``, ``LogShift``,
``Power``) exist so that factorization chains can be written down exactly;
they use principal branches.
"""
import cmath
import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from . import quadrature as quad
from .errors import RayDivergence, SchemaError, UnsupportedVariant
from .series import PowerSeries, ps_compose, ps_exp, ps_log

# |z| up to which h(z) = sum z^n / (n n!) is summed directly
_H_SERIES_RADIUS = 2.0


def _cx(v):
    return complex(v)


def _poly_tuple(p):
    out = tuple(complex(c) for c in p)
    while len(out) > 1 and out[-1] == 0:
        out = out[:-1]
    return out


@dataclass(frozen=True)
class IntExpPoly:
    """z -> integral_0^z exp(p(t)) dt + c, p given by ascending coefficients."""

    p: tuple
    c: complex = 0j
    kind = "IntExpPoly"

    def __post_init__(self):
        object.__setattr__(self, "p", _poly_tuple(self.p))
        object.__setattr__(self, "c", _cx(self.c))
        if len(self.p) < 2:
            raise ValueError("IntExpPoly exponent must be non-constant")

    @property
    def degree(self):
        return len(self.p) - 1


@dataclass(frozen=True)
class ExpAffine:
    alpha: complex
    a: complex
    b: complex
    kind = "ExpAffine"

    def __post_init__(self):
        for k in ("alpha", "a", "b"):
            object.__setattr__(self, k, _cx(getattr(self, k)))
        if self.a == 0:
            raise ValueError("ExpAffine needs a != 0")


@dataclass(frozen=True)
class Affine:
    a: complex
    kind = "Affine"

    def __post_init__(self):
        object.__setattr__(self, "a", _cx(self.a))


@dataclass(frozen=True)
class Monomial:
    n: int
    kind = "Monomial"

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise ValueError("Monomial degree must be an integer >= 1")
        object.__setattr__(self, "n", int(self.n))


@dataclass(frozen=True)
class ScaledExp:
    lam: complex
    kind = "ScaledExp"

    def __post_init__(self):
        object.__setattr__(self, "lam", _cx(self.lam))
        if self.lam == 0:
            raise ValueError("ScaledExp needs lam != 0")


@dataclass(frozen=True)
class ZExpH:
    """z exp(h(z)) with h(z) = sum_{n>=1} z^n / (n n!)."""

    kind = "ZExpH"


@dataclass(frozen=True)
class IntExpExp:
    """z -> integral_0^z exp(exp(t)) dt."""

    kind = "IntExpExp"


@dataclass(frozen=True)
class NgLimit:
    """Prefix (c_1 e^z + z) o ... o (c_K e^z + z) of a convergent infinite composition."""

    cs: tuple
    K: int
    kind = "NgLimit"

    def __post_init__(self):
        object.__setattr__(self, "cs", tuple(float(c) for c in self.cs))
        object.__setattr__(self, "K", int(self.K))
        if self.K < 1 or any(c <= 0 for c in self.cs):
            raise ValueError("NgLimit needs K >= 1 and positive cs")

    @property
    def tail_bound(self):
        return 2.0 ** (-self.K + 1)


@dataclass(frozen=True)
class Linear:
    """z -> m z + b."""

    m: complex
    b: complex = 0j
    kind = "Linear"

    def __post_init__(self):
        object.__setattr__(self, "m", _cx(self.m))
        object.__setattr__(self, "b", _cx(self.b))


@dataclass(frozen=True)
class LogShift:
    """z -> Log(z - shift), principal branch."""

    shift: complex
    kind = "LogShift"

    def __post_init__(self):
        object.__setattr__(self, "shift", _cx(self.shift))


@dataclass(frozen=True)
class Power:
    """z -> z**p, principal branch."""

    p: complex
    kind = "Power"

    def __post_init__(self):
        object.__setattr__(self, "p", _cx(self.p))


@dataclass(frozen=True)
class Chain:
    factors: tuple = field(default_factory=tuple)
    kind = "Chain"

    def __init__(self, *factors):
        if len(factors) == 1 and isinstance(factors[0], (list, tuple)):
            factors = tuple(factors[0])
        if not factors:
            raise ValueError("Chain needs at least one factor")
        object.__setattr__(self, "factors", tuple(factors))


VARIANTS = {
    cls.kind: cls
    for cls in (IntExpPoly, ExpAffine, Affine, Monomial, ScaledExp, ZExpH, IntExpExp, NgLimit, Linear, LogShift, Power, Chain)
}

ENTIRE_KINDS = {"IntExpPoly", "ExpAffine", "Affine", "Monomial", "ScaledExp", "ZExpH", "IntExpExp", "NgLimit", "Linear"}


def calabi():
    return IntExpPoly((0, 0, -1))


def is_entire(f):
    if isinstance(f, Chain):
        return all(is_entire(g) for g in f.factors)
    if isinstance(f, Power):
        return f.p.imag == 0 and f.p.real >= 0 and float(f.p.real).is_integer()
    return f.kind in ENTIRE_KINDS


# ---------------------------------------------------------------------------
# JSON codec
# ---------------------------------------------------------------------------


def cx_to_json(z):
    z = complex(z)
    return [z.real, z.imag]


def cx_from_json(v, path="value"):
    if isinstance(v, (int, float)) and not isinstance(v, bool):
        return complex(v)
    if isinstance(v, (list, tuple)) and len(v) == 2 and all(isinstance(x, (int, float)) for x in v):
        return complex(v[0], v[1])
    raise SchemaError(path, "expected a number or [re, im]")


_FIELDS = {
    "IntExpPoly": {"p": "poly", "c": "cx"},
    "ExpAffine": {"alpha": "cx", "a": "cx", "b": "cx"},
    "Affine": {"a": "cx"},
    "Monomial": {"n": "int"},
    "ScaledExp": {"lam": "cx"},
    "ZExpH": {},
    "IntExpExp": {},
    "NgLimit": {"cs": "reals", "K": "int"},
    "Linear": {"m": "cx", "b": "cx"},
    "LogShift": {"shift": "cx"},
    "Power": {"p": "cx"},
    "Chain": {"factors": "fns"},
}


def to_json(f):
    if f.kind not in _FIELDS:
        raise UnsupportedVariant(f.kind)
    out = {"kind": f.kind}
    for name, typ in _FIELDS[f.kind].items():
        v = getattr(f, name)
        if typ == "cx":
            out[name] = cx_to_json(v)
        elif typ == "poly":
            out[name] = [cx_to_json(c) for c in v]
        elif typ == "reals":
            out[name] = list(v)
        elif typ == "fns":
            out[name] = [to_json(g) for g in v]
        else:
            out[name] = v
    return out


def from_json(obj, path="fn"):
    from .errors import StrictFieldError

    if not isinstance(obj, dict) or "kind" not in obj:
        raise SchemaError(path, "expected an object with a 'kind' field")
    kind = obj["kind"]
    if kind not in _FIELDS:
        raise SchemaError(f"{path}.kind", f"unknown variant {kind!r}")
    fields = _FIELDS[kind]
    for k in obj:
        if k != "kind" and k not in fields:
            raise StrictFieldError(f"{path}.{k}")
    kw = {}
    for name, typ in fields.items():
        if name not in obj:
            continue
        v = obj[name]
        sub = f"{path}.{name}"
        if typ == "cx":
            kw[name] = cx_from_json(v, sub)
        elif typ == "poly":
            kw[name] = tuple(cx_from_json(c, f"{sub}[{i}]") for i, c in enumerate(v))
        elif typ == "reals":
            kw[name] = tuple(float(c) for c in v)
        elif typ == "int":
            kw[name] = int(v)
        elif typ == "fns":
            return Chain(*[from_json(g, f"{sub}[{i}]") for i, g in enumerate(v)])
    try:
        return VARIANTS[kind](**kw)
    except (TypeError, ValueError) as exc:
        raise SchemaError(path, str(exc)) from None


# ---------------------------------------------------------------------------
# evaluation
# ---------------------------------------------------------------------------


def h_entire(z):
    """h(z) = sum z^n/(n n!) = integral_0^z (e^t - 1)/t dt."""
    z = complex(z)
    if abs(z) <= _H_SERIES_RADIUS:
        term = 1.0 + 0j
        total = 0j
        for n in range(1, 60):
            term *= z / n
            total += term / n
            if abs(term) < 1e-18 * max(1.0, abs(total)):
                break
        return total
    return quad.segment(quad.EXPM1_OVER_T, 0.0, z)[0]


def h_prime(z):
    """(e^z - 1)/z, continuous at 0."""
    z = complex(z)
    if abs(z) < 1e-5:
        return 1.0 + z / 2 + z * z / 6
    return complex(np.expm1(z)) / z


def _ng_fold(cs, K, z):
    w = z
    for cj in reversed(cs[:K]):
        w = cj * np.exp(w) + w
    return w


def evaluate(f, z):
    """f(z) for a scalar z."""
    z = complex(z)
    k = f.kind
    if k == "IntExpPoly":
        return quad.int_exp_poly(np.array(f.p), z) + f.c
    if k == "ExpAffine":
        return f.alpha + cmath.exp(f.a * z + f.b)
    if k == "Affine":
        return z + f.a
    if k == "Monomial":
        return z**f.n
    if k == "ScaledExp":
        return cmath.exp(f.lam * z)
    if k == "ZExpH":
        return z * cmath.exp(h_entire(z))
    if k == "IntExpExp":
        return quad.segment(quad.EXP_EXP, 0.0, z)[0]
    if k == "NgLimit":
        if f.K > len(f.cs):
            raise UnsupportedVariant(f"NgLimit K={f.K} exceeds stored cs ({len(f.cs)})")
        return complex(_ng_fold(f.cs, f.K, z))
    if k == "Linear":
        return f.m * z + f.b
    if k == "LogShift":
        return cmath.log(z - f.shift)
    if k == "Power":
        if z == 0:
            return 0j if f.p.real > 0 else complex("nan")
        return cmath.exp(f.p * cmath.log(z))
    if k == "Chain":
        for g in reversed(f.factors):
            z = evaluate(g, z)
        return z
    raise UnsupportedVariant(k)


def evaluate_many(f, zs):
    """Vectorized evaluation; integral variants fall back to a loop."""
    zs = np.asarray(zs, dtype=np.complex128)
    k = f.kind
    if k == "ExpAffine":
        return f.alpha + np.exp(f.a * zs + f.b)
    if k == "Affine":
        return zs + f.a
    if k == "Monomial":
        return zs**f.n
    if k == "ScaledExp":
        return np.exp(f.lam * zs)
    if k == "Linear":
        return f.m * zs + f.b
    if k == "NgLimit" and f.K <= len(f.cs):
        return _ng_fold(f.cs, f.K, zs)
    if k == "Chain":
        w = zs
        for g in reversed(f.factors):
            w = evaluate_many(g, w)
        return w
    return np.array([evaluate(f, z) for z in zs.ravel()], dtype=np.complex128).reshape(zs.shape)


def eval_with_bound(f, z):
    """(value, error bound); only NgLimit carries a nonzero bound."""
    v = evaluate(f, z)
    return v, (f.tail_bound if f.kind == "NgLimit" else 0.0)


def derivative(f, z):
    z = complex(z)
    k = f.kind
    if k == "IntExpPoly":
        return cmath.exp(complex(np.polynomial.polynomial.polyval(z, f.p)))
    if k == "ExpAffine":
        return f.a * cmath.exp(f.a * z + f.b)
    if k in ("Affine",):
        return 1.0 + 0j
    if k == "Monomial":
        return f.n * z ** (f.n - 1)
    if k == "ScaledExp":
        return f.lam * cmath.exp(f.lam * z)
    if k == "ZExpH":
        # g' = e^h (1 + z h') and z h'(z) = e^z - 1
        return cmath.exp(h_entire(z) + z)
    if k == "IntExpExp":
        return cmath.exp(cmath.exp(z))
    if k == "NgLimit":
        w = z
        d = 1.0 + 0j
        for cj in reversed(f.cs[: f.K]):
            e = cj * cmath.exp(w)
            d *= e + 1.0
            w = e + w
        return d
    if k == "Linear":
        return f.m
    if k == "LogShift":
        return 1.0 / (z - f.shift)
    if k == "Power":
        return f.p * cmath.exp((f.p - 1) * cmath.log(z))
    if k == "Chain":
        d = 1.0 + 0j
        for g in reversed(f.factors):
            d *= derivative(g, z)
            z = evaluate(g, z)
        return d
    raise UnsupportedVariant(k)


# ---------------------------------------------------------------------------
# Taylor expansion
# ---------------------------------------------------------------------------


def _expm1_over_t_series(c, order):
    """Taylor coefficients of E(t) = (e^t - 1)/t about t = c.

    q_m = I_m / m! with I_m = integral_0^1 s^m e^{c s} ds.  The three-term
    relation c I_m = e^c - m I_{m-1} is run upward while m <= |c| and
    downward (Miller) above that, which keeps both directions stable.
    """
    c = complex(c)
    n = order
    ec = cmath.exp(c)
    I = np.zeros(n, dtype=np.complex128)
    split = min(n, int(abs(c)) + 1)
    I[0] = h_prime(c)
    for m in range(1, split):
        I[m] = (ec - m * I[m - 1]) / c
    if split < n:
        t = 0j
        for m in range(n + 40 + int(2 * abs(c)), split - 1, -1):
            if m <= n - 1:
                I[m] = t
            t = (ec - c * t) / m
    fact = np.cumprod(np.concatenate(([1.0], np.arange(1, n, dtype=float))))
    return I / fact


def taylor_at(f, center=0.0, order=64):
    """Taylor series of ``f`` about ``center`` truncated to ``order`` terms."""
    if order < 2:
        raise ValueError("taylor_at needs order >= 2")
    center = complex(center)
    x = PowerSeries.variable(center, order)
    k = f.kind
    if k == "IntExpPoly":
        integrand = ps_exp(PowerSeries.from_polynomial(f.p, center, order))
        return integrand.integ(evaluate(f, center))
    if k == "ExpAffine":
        return ps_exp(x * f.a + f.b) + f.alpha
    if k == "Affine":
        return x + f.a
    if k == "Linear":
        return x * f.m + f.b
    if k == "Monomial":
        return PowerSeries.from_polynomial([0] * f.n + [1], center, order)
    if k == "ScaledExp":
        return ps_exp(x * f.lam)
    if k == "ZExpH":
        E = PowerSeries(_expm1_over_t_series(center, order), center)
        return x * ps_exp(E.integ(h_entire(center)))
    if k == "IntExpExp":
        return ps_exp(ps_exp(x)).integ(evaluate(f, center))
    if k == "NgLimit":
        if f.K > len(f.cs):
            raise UnsupportedVariant(f"NgLimit K={f.K} exceeds stored cs ({len(f.cs)})")
        w = x
        for cj in reversed(f.cs[: f.K]):
            w = ps_exp(w) * cj + w
        return w
    if k == "LogShift":
        return ps_log(x - f.shift)
    if k == "Power":
        return ps_exp(ps_log(x) * f.p)
    if k == "Chain":
        s = taylor_at(f.factors[-1], center, order)
        for g in reversed(f.factors[:-1]):
            outer = taylor_at(g, s.coeffs[0], order)
            s = ps_compose(outer, s)
        return s
    raise UnsupportedVariant(k)


# ---------------------------------------------------------------------------
# asymptotic values
# ---------------------------------------------------------------------------


class AsymptoticSet(NamedTuple):
    values: tuple
    complete: bool
    provenance: str  # closed-form | sector-quadrature | set-algebra


DEDUP_TOL = 1e-9
RAY_CUTOFF = 1e-18
RAY_T_MAX = 1e4


def dedup(values, tol=DEDUP_TOL):
    out = []
    for v in values:
        v = complex(v)
        if all(abs(v - u) > tol for u in out):
            out.append(v)
    return tuple(out)


def decay_bisectors(p):
    """Directions of steepest decay of exp(lead t^d)."""
    p = _poly_tuple(p)
    d = len(p) - 1
    lead = p[-1]
    return [(math.pi - cmath.phase(lead) + 2 * math.pi * j) / d for j in range(d)]


def ray_integral(p, theta, N=0, a=0.0):
    """integral_0^{infinity e^{i theta}} (t-a)^N exp(p(t)) dt."""
    pc = np.array(_poly_tuple(p), dtype=np.complex128)
    u = cmath.exp(1j * theta)

    def mag(T):
        t = T * u
        return abs((t - a) ** N) * math.exp(np.polynomial.polynomial.polyval(t, pc).real)

    T = 1.0
    while mag(T) >= RAY_CUTOFF or mag(2 * T) >= mag(T):
        T *= 2.0
        if T > RAY_T_MAX:
            raise RayDivergence(f"integrand does not decay along arg t = {theta:.6g}")
    knots = [0.0]
    s = min(1.0, T)
    while s < T:
        knots.append(s)
        s *= 2.0
    knots.append(T)
    return quad.path_integral(quad.EXP_POLY, [k * u for k in knots], p=pc, N=N, a=a)


def asymptotic_values(f):
    k = f.kind
    if k in ("Affine", "Linear", "Monomial"):
        return AsymptoticSet((), True, "closed-form")
    if k == "ExpAffine":
        return AsymptoticSet((f.alpha,), True, "closed-form")
    if k == "ScaledExp":
        return AsymptoticSet((0j,), True, "closed-form")
    if k == "IntExpPoly":
        vals = [ray_integral(f.p, th) + f.c for th in decay_bisectors(f.p)]
        return AsymptoticSet(dedup(vals), True, "sector-quadrature")
    return AsymptoticSet((), False, "closed-form")


# ---------------------------------------------------------------------------
# maximum modulus
# ---------------------------------------------------------------------------

_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


def _golden_max(fun, lo, hi, tol=1e-10, max_iter=100):
    """Maximize a unimodal scalar function on [lo, hi]; returns (x, fun(x))."""
    x1 = hi - _GOLDEN * (hi - lo)
    x2 = lo + _GOLDEN * (hi - lo)
    f1, f2 = fun(x1), fun(x2)
    for _ in range(max_iter):
        if hi - lo < tol:
            break
        if f1 < f2:
            lo, x1, f1 = x1, x2, f2
            x2 = lo + _GOLDEN * (hi - lo)
            f2 = fun(x2)
        else:
            hi, x2, f2 = x2, x1, f1
            x1 = hi - _GOLDEN * (hi - lo)
            f1 = fun(x1)
    return (x1, f1) if f1 >= f2 else (x2, f2)


def max_modulus(f, r, samples=720):
    """M(r, f) = max |f| on |z| = r."""
    if r <= 0:
        raise ValueError("max_modulus needs r > 0")
    th = 2 * math.pi * np.arange(samples) / samples
    vals = np.abs(evaluate_many(f, r * np.exp(1j * th)))
    i = int(np.argmax(vals))
    step = 2 * math.pi / samples
    _, best = _golden_max(lambda t: abs(evaluate(f, r * cmath.exp(1j * t))), th[i] - step, th[i] + step)
    return float(max(best, vals[i]))


# ---------------------------------------------------------------------------
# surjectivity probe
# ---------------------------------------------------------------------------


class ProbeReport(NamedTuple):
    hits: dict
    misses: list


PROBE_RADIUS = 6.0
PROBE_ABORT = 12.0
PROBE_RESIDUAL = 1e-9


def probe_starts(radius=PROBE_RADIUS, n=9):
    g = np.linspace(-radius, radius, n)
    pts = [complex(x, y) for y in g for x in g if abs(complex(x, y)) <= radius + 1e-12]
    return sorted(pts, key=lambda z: (round(abs(z), 12), round(cmath.phase(z), 12)))


def _newton_step(f, w, z):
    try:
        r = evaluate(f, z) - w
        d = derivative(f, z)
    except (ArithmeticError, ValueError):
        return None, None, None
    if d == 0 or not cmath.isfinite(r) or not cmath.isfinite(d):
        return None, None, None
    return r, r / d, d


def newton_solve(f, w, z, budget=60):
    """Newton on f(z) = w; returns the root or None.

    A small residual alone is not accepted: along an asymptotic path the
    residual decays while the step length stays put, so the accepted step
    must also be much shorter than the one before it, and that one must
    already be small.  Points where f is flat to rounding level (r == 0
    exactly on a plateau) are rejected.
    """
    prev = math.inf
    for _ in range(budget):
        r, step, d = _newton_step(f, w, z)
        if r is None:
            return None
        if (abs(r) < PROBE_RESIDUAL and abs(step) <= 1e-8 * (1 + abs(z))
                and abs(step) <= 0.1 * prev and prev <= 1e-3 * (1 + abs(z))):
            if abs(d) * (1 + abs(z)) < 1e-6 * max(1.0, abs(w)):
                return None
            return z - step
        prev = abs(step)
        z = z - step
        if abs(z) > PROBE_ABORT or not cmath.isfinite(z):
            return None
    return None


def surjectivity_probe(f, targets, newton_budget=60):
    """Multi-start Newton preimage search; misses are data, not errors."""
    starts = probe_starts()
    hits = {}
    misses = []
    for w in targets:
        w = complex(w)
        for z0 in starts:
            z = newton_solve(f, w, z0, newton_budget)
            if z is not None and abs(evaluate(f, z) - w) < PROBE_RESIDUAL:
                hits[w] = z
                break
        else:
            misses.append(w)
    return ProbeReport(hits, misses)
