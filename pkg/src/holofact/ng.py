"""Infinite composition F = lim (c_1 e^z + z) o ... o (c_n e^z + z).

The constants are chosen one at a time so that
F_{k+1}(k) - F_k(k) = F_k(c_{k+1} e^k + k) - F_k(k) <= 2^-k.  Differences
are carried as (w, delta) pairs through each map w -> c e^w + w, so the
increment never has to be recovered from two huge values.

F_k(k) grows like a tower of exponentials: F_7(7) ~ 1e69, F_8(8) ~ 1e6410,
and F_9(9) ~ exp(1e6410) has no floating representation at all, so stage 8
is the last one that can be carried out and K is capped at 9.  Stage
arithmetic runs in an mpmath context whose precision covers the integer
digits of the largest intermediate w (about 6450 digits at stage 8).
"""
import math
from dataclasses import dataclass, field
from typing import NamedTuple

import mpmath
import numpy as np

from .catalog import NgLimit, taylor_at
from .errors import DefiningInequalityViolated, OutsideValidatedDisk, PreconditionFailed, UnderflowAtStage

MAX_K = 9
BISECT_RTOL = 1e-12
BISECT_MAX_ITER = 200
SHRINK = 0.5
TAIL_SAMPLES = 720
UNDERFLOW = 1e-300
DPS = 30
GUARD_DIGITS = 40

_mp = mpmath.MPContext()
_mp.dps = DPS


@dataclass(frozen=True)
class NgSequence:
    cs: tuple  # mpf values; c_8 ~ 1e-78 and c_9 ~ 1e-6422 are outside the double range
    margins: tuple = field(default_factory=tuple)  # achieved increment / 2^-k
    method_log: tuple = field(default_factory=tuple)  # bisection iterations per stage

    def __post_init__(self):
        object.__setattr__(self, "cs", tuple(_mp.mpf(c) for c in self.cs))
        object.__setattr__(self, "margins", tuple(float(m) for m in self.margins))
        object.__setattr__(self, "method_log", tuple(int(m) for m in self.method_log))
        if not self.cs or any(not c > 0 for c in self.cs):
            raise ValueError("NgSequence needs positive cs")

    @property
    def K(self):
        return len(self.cs)

    @property
    def float_cs(self):
        return tuple(float(c) for c in self.cs)

    def as_catalog(self, K=None):
        """NgLimit prefix of length K; every c_j in it must be a normal double."""
        K = self.K if K is None else K
        cs = self.float_cs[:K]
        if any(c < UNDERFLOW for c in cs):
            raise UnderflowAtStage(f"c_j underflows doubles within the first {K} stages")
        return NgLimit(cs, K)

    def to_json(self):
        return {"cs": [_mp.nstr(c, 17, strip_zeros=False) for c in self.cs], "margins": list(self.margins)}

    @classmethod
    def from_json(cls, obj):
        return cls([_mp.mpf(c) for c in obj["cs"]], obj.get("margins", ()))


def _fold_pair(cs, k, w, delta):
    """(F_k(w), F_k(w + delta) - F_k(w)) in the private context."""
    for c in reversed(cs[:k]):
        e = c * _mp.exp(w)
        delta = e * _mp.expm1(delta) + delta
        w = e + w
    return w, delta


def _increment(cs, k, c_next, x):
    return _fold_pair(cs, k, x, c_next * _mp.exp(x))[1]


def _digits_needed(cs, k, r):
    """Working digits for folds of F_k on |z| <= r: integer digits of max |w| plus guard."""
    w = _mp.mpf(r)
    top = abs(w)
    for c in reversed(cs[:k]):
        w = c * _mp.exp(w) + w
        top = max(top, abs(w))
    return int(max(0, _mp.log10(top + 1))) + GUARD_DIGITS


def _increment_exceeds(cs, k, c_next, x, bound):
    """increment > bound for real x >= 0, stopping once a layer passes the bound.

    On the positive axis each layer can only enlarge delta, so the early
    exit also keeps exp away from tower-sized arguments.
    """
    w = x
    delta = c_next * _mp.exp(x)
    for c in reversed(cs[:k]):
        if delta > bound:
            return True
        e = c * _mp.exp(w)
        delta = e * _mp.expm1(delta) + delta
        w = e + w
    return delta > bound


def _log_slope(cs, k, x):
    """log F_k'(x) for real x."""
    w = _mp.mpf(x)
    acc = _mp.mpf(0)
    for c in reversed(cs[:k]):
        e = c * _mp.exp(w)
        acc += _mp.log1p(e)
        w = e + w
    return acc


def _bisect_sup(cs, k):
    """Largest c with F_k(c e^k + k) - F_k(k) <= 2^-k, bisected in log c."""
    x = _mp.mpf(k)
    bound = _mp.mpf(2) ** (-k)

    def ok(logc):
        return not _increment_exceeds(cs, k, _mp.exp(logc), x, bound)

    # linearization: increment ~ c e^k F_k'(k)
    guess = _mp.log(bound) - x - _log_slope(cs, k, x)
    step = _mp.mpf(1)
    if ok(guess):
        lo, hi = guess, guess + step
        while ok(hi):
            lo, hi, step = hi, hi + step, 2 * step
    else:
        lo, hi = guess - step, guess
        while not ok(lo):
            lo, hi, step = lo - step, lo, 2 * step
    it = 0
    while hi - lo > BISECT_RTOL and it < BISECT_MAX_ITER:
        mid = (lo + hi) / 2
        if ok(mid):
            lo = mid
        else:
            hi = mid
        it += 1
    return _mp.exp(lo), it


def build_cs(K, shrink=SHRINK):
    """c_1 = 1 and c_{k+1} = shrink times the bisection supremum."""
    K = int(K)
    if K < 1:
        raise ValueError("build_cs needs K >= 1")
    if K > MAX_K:
        raise PreconditionFailed(f"K = {K} exceeds {MAX_K}")
    cs = [_mp.mpf(1)]
    margins = []
    log = []
    for k in range(1, K):
        with _mp.workdps(_digits_needed(cs, k, k)):
            sup, it = _bisect_sup(cs, k)
            c = shrink * sup
            if not c > 0:
                raise UnderflowAtStage(f"c_{k + 1} underflows at stage {k}")
            achieved = _increment(cs, k, c, _mp.mpf(k))
            bound = _mp.mpf(2) ** (-k)
        if achieved > bound:
            raise DefiningInequalityViolated(f"stage {k}: increment {_mp.nstr(achieved, 17)} > 2^-{k}")
        cs.append(c)
        margins.append(float(achieved / bound))
        log.append(it)
    return NgSequence(cs, margins, log)


def defining_gap(cs, k):
    """F_k(c_{k+1} e^k + k) - F_k(k) - 2^-k; nonpositive when stage k holds."""
    cs = [_mp.mpf(c) for c in cs]
    with _mp.workdps(_digits_needed(cs, k, k)):
        return float(_increment(cs, k, cs[k], _mp.mpf(k)) - _mp.mpf(2) ** (-k))


def tail_bound_check(seq, k, probe_radius):
    """max |F_{k+1} - F_k| over TAIL_SAMPLES points of |z| = probe_radius."""
    if not 1 <= k < seq.K:
        raise ValueError(f"tail_bound_check needs 1 <= k < {seq.K}")
    n = 1 if probe_radius == 0 else TAIL_SAMPLES
    best = 0.0
    with _mp.workdps(_digits_needed(seq.cs, k, probe_radius)):
        r = _mp.mpf(probe_radius)
        for j in range(n):
            z = r * _mp.expjpi(_mp.mpf(2 * j) / n)
            d = _increment(seq.cs, k, seq.cs[k], z)
            best = max(best, float(abs(d)))
    return best


class LimitValue(NamedTuple):
    value: complex  # may be infinite when F_K(z) leaves the double range
    error: float
    exact: object  # the mpc value


def limit_eval(seq, z):
    """F_K(z) with the tail bound 2^{-K+1}; valid for |z| <= K - 1."""
    z = complex(z)
    K = seq.K
    if abs(z) > K - 1:
        raise OutsideValidatedDisk(f"|z| = {abs(z):g} exceeds the validated radius {K - 1}")
    k0 = max(K, math.ceil(abs(z)))
    with _mp.workdps(_digits_needed(seq.cs, K, abs(z))):
        w, _ = _fold_pair(seq.cs, K, _mp.mpc(z), _mp.mpf(0))
    try:
        value = complex(w)
    except OverflowError:
        value = complex(math.inf, 0.0)
    return LimitValue(value, 2.0 ** (-k0 + 1), w)


def coefficients(seq, k, order=40):
    """Taylor coefficients of F_k at 0."""
    return taylor_at(seq.as_catalog(k), 0.0, order).coeffs


def nonnegative_coefficients(seq, k, order=40, tol=1e-12):
    """True when every Taylor coefficient of F_k at 0 is real and >= 0 up to tol."""
    c = coefficients(seq, k, order)
    scale = np.maximum(np.abs(c), 1e-300)
    return bool(np.all(np.abs(c.imag) <= tol * scale) and np.all(c.real >= -tol * scale))
