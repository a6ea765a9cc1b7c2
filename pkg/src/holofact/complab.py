"""Explicit factorization chains, the divide recursion, asymptotic-set algebra
and growth checks for compositions of entire functions."""
import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
from scipy.stats import qmc

from . import catalog
from .catalog import (
    Affine,
    AsymptoticSet,
    Chain,
    Linear,
    LogShift,
    Monomial,
    Power,
    ScaledExp,
    dedup,
    evaluate,
    evaluate_many,
    max_modulus,
    surjectivity_probe,
    taylor_at,
)
from .errors import (
    BranchObstruction,
    DegenerateModulus,
    GNotZeroAtOrigin,
    HPrimeZeroOnBox,
    IncompleteInput,
    NotOmittedOnProbe,
    SubadditivityViolation,
    ZeroValueOnProbe,
)
from .series import ps_compose, ps_div

PROVENANCES = ("thm4-affine", "thm4-transcendental", "eq15-root", "identity", "user")
AFFINE_TOL = 1e-10
AFFINE_CENTERS = (0.0, 1.0)
AFFINE_ORDER = 16
NORMALIZATION_TOL = 1e-10
RECURSION_ORDER = 64
RECURSION_RADIUS = 0.5
RECURSION_SAMPLES = 64
HPRIME_MIN = 1e-12


@dataclass(frozen=True)
class FactorChain:
    """Ordered factors, outermost first."""

    factors: tuple
    provenance: str = "user"
    residual: float = None

    def __post_init__(self):
        object.__setattr__(self, "factors", tuple(self.factors))
        if self.provenance not in PROVENANCES:
            raise ValueError(f"unknown provenance {self.provenance!r}")
        if not self.factors:
            raise ValueError("FactorChain needs at least one factor")

    def as_catalog(self):
        return Chain(*self.factors)

    def __call__(self, z):
        return evaluate(self.as_catalog(), z)

    def to_json(self):
        out = {"provenance": self.provenance, "factors": [catalog.to_json(f) for f in self.factors]}
        if self.residual is not None:
            out["residual"] = float(self.residual)
        return out


def normalization_defect(chain, f):
    """max(|chain(0) - f(0)|, |chain'(0) - f'(0)|)."""
    c = chain.as_catalog()
    return max(abs(evaluate(c, 0) - evaluate(f, 0)), abs(catalog.derivative(c, 0) - catalog.derivative(f, 0)))


def disk_samples(n, radius):
    """First n Halton points of the unit square mapped area-uniformly to |z| <= radius."""
    u = qmc.Halton(d=2, scramble=False).random(n + 1)[1:]
    return radius * np.sqrt(u[:, 0]) * np.exp(2j * math.pi * u[:, 1])


def verify_composition(f, chain, n_samples=200, box_radius=2.0):
    """max |f(z) - chain(z)| over Halton points in |z| <= box_radius."""
    if isinstance(chain, FactorChain):
        chain = chain.as_catalog()
    elif isinstance(chain, (list, tuple)):
        chain = Chain(*chain)
    zs = disk_samples(n_samples, box_radius)
    return float(np.max(np.abs(evaluate_many(f, zs) - evaluate_many(chain, zs))))


def power_tower_chain(n):
    """z^2 o z^3 o ... o z^n o e^{z/n!}, a chain for e^z."""
    if n < 2:
        raise ValueError("power_tower_chain needs n >= 2")
    return FactorChain(tuple(Monomial(k) for k in range(2, n + 1)) + (ScaledExp(1.0 / math.factorial(n)),), "identity")


def _finish(chain, f):
    return FactorChain(chain.factors, chain.provenance, verify_composition(f, chain))


def _is_affine(L):
    for c in AFFINE_CENTERS:
        try:
            s = taylor_at(L, c, AFFINE_ORDER)
        except (ArithmeticError, ValueError) as exc:
            raise BranchObstruction(f"log series failed at {c}: {exc}") from None
        if np.max(np.abs(s.coeffs[2:])) >= AFFINE_TOL:
            return False
    return True


def picard_factorize(f, omitted):
    """Nontrivial factorization of an elh function that omits ``omitted``.

    With L = log(f - omitted) the chain is (omitted + e^d z) o z^2 o e^{cz/2}
    when L = cz + d is affine, and (omitted + z) o e^z o L otherwise.
    """
    omitted = complex(omitted)
    rep = surjectivity_probe(f, [omitted])
    if rep.hits:
        raise NotOmittedOnProbe(f"f takes the value {omitted} at z = {rep.hits[omitted]}")
    L = Chain(LogShift(omitted), f)
    if _is_affine(L):
        s = taylor_at(L, 0.0, AFFINE_ORDER)
        d, c = complex(s.coeffs[0]), complex(s.coeffs[1])
        chain = FactorChain((Linear(np.exp(d), omitted), Monomial(2), ScaledExp(c / 2)), "thm4-affine")
    else:
        chain = FactorChain((Affine(omitted), ScaledExp(1.0), L), "thm4-transcendental")
    return _finish(chain, f)


def root_factorize(f, N):
    """(z/(N+1)) o z^{N+1} o z o L with L = ((N+1) f)^{1/(N+1)}, principal root."""
    N = int(N)
    if N < 1:
        raise ValueError("root_factorize needs N >= 1")
    if surjectivity_probe(f, [0.0]).hits:
        raise ZeroValueOnProbe("f has a zero on the probe grid")
    m = N + 1
    L = Chain(Linear(m ** (1.0 / m)), Power(1.0 / m), f)
    chain = FactorChain((Linear(1.0 / m), Monomial(m), Affine(0.0), L), "eq15-root")
    return _finish(chain, f)


# ---------------------------------------------------------------------------
# divide recursion f_{k+1} = f_k' / h'
# ---------------------------------------------------------------------------


def _split(f):
    if not isinstance(f, Chain) or len(f.factors) < 2:
        raise ValueError("divide_recursion needs f = Chain(g, h)")
    g = f.factors[0]
    h = f.factors[1] if len(f.factors) == 2 else Chain(*f.factors[1:])
    return g, h


def _check_h_prime(h, radius):
    zs = disk_samples(RECURSION_SAMPLES, radius)
    d = np.array([catalog.derivative(h, z) for z in zs])
    if np.min(np.abs(d)) < HPRIME_MIN or abs(catalog.derivative(h, 0)) < HPRIME_MIN:
        raise HPrimeZeroOnBox("h' vanishes (numerically) on the test box")


def _g_derivs_of_h(g, h_series, n_max, order):
    """Series of g^{(k)} o h for k = 0..n_max."""
    gs = taylor_at(g, h_series.coeffs[0], order)
    out = []
    for _ in range(n_max + 1):
        out.append(ps_compose(gs, h_series))
        gs = gs.deriv()
    return out


def divide_series(f, n_max, order=RECURSION_ORDER):
    """Series of f_0..f_{n_max} and of g^{(k)} o h about 0."""
    g, h = _split(f)
    _check_h_prime(h, RECURSION_RADIUS)
    hs = taylor_at(h, 0.0, order)
    hp = hs.deriv()
    fk = taylor_at(f, 0.0, order)
    fs = [fk]
    for _ in range(n_max):
        fk = ps_div(fk.deriv(), hp.truncate(fk.order - 1))
        fs.append(fk)
    return fs, _g_derivs_of_h(g, hs, n_max, order)


def _series_gap(a, b, zs):
    n = min(a.order, b.order)
    return float(np.max(np.abs(a.truncate(n)(zs) - b.truncate(n)(zs))))


def divide_recursion(f, n_max, order=RECURSION_ORDER):
    """Residuals |f_k - g^{(k)} o h| on sample points, k = 0..n_max."""
    fs, gk = divide_series(f, n_max, order)
    zs = disk_samples(RECURSION_SAMPLES, RECURSION_RADIUS)
    return [_series_gap(a, b, zs) for a, b in zip(fs, gk)]


def product_identity_residual(f, order=RECURSION_ORDER):
    """f_1 f_0 against ((g^2/2) o h)' / h' on sample points."""
    g, h = _split(f)
    _check_h_prime(h, RECURSION_RADIUS)
    hs = taylor_at(h, 0.0, order)
    hp = hs.deriv()
    f0 = taylor_at(f, 0.0, order)
    f1 = ps_div(f0.deriv(), hp)
    gs = taylor_at(g, hs.coeffs[0], order)
    g2h = ps_compose(gs * gs * 0.5, hs)
    rhs = ps_div(g2h.deriv(), hp)
    zs = disk_samples(RECURSION_SAMPLES, RECURSION_RADIUS)
    return _series_gap(f1 * f0.truncate(f1.order), rhs, zs)


# ---------------------------------------------------------------------------
# asymptotic-set algebra
# ---------------------------------------------------------------------------


def _require_complete(*sets):
    for s in sets:
        if not s.complete:
            raise IncompleteInput("asymptotic set is not known to be complete")


def asym_compose(A_f, f, A_g):
    """A(f o g) = A(f) u f(A(g))."""
    _require_complete(A_f, A_g)
    vals = list(A_f.values) + [evaluate(f, w) for w in A_g.values]
    return AsymptoticSet(dedup(vals), True, "set-algebra")


def asym_iterate(A_f, f, n):
    """A(f^{o(n+1)}) by folding asym_compose n times."""
    out = A_f
    for _ in range(n):
        out = asym_compose(A_f, f, out)
    return out


def asym_iterate_direct(A_f, f, n):
    """A(f) u f(A(f)) u ... u f^{ok}(A(f)), k <= n, expanded directly."""
    _require_complete(A_f)
    vals = list(A_f.values)
    layer = list(A_f.values)
    for _ in range(n):
        layer = [evaluate(f, w) for w in layer]
        vals += layer
    return AsymptoticSet(dedup(vals), True, "set-algebra")


def same_set(a, b, tol=catalog.DEDUP_TOL):
    """Set equality up to tol in both directions."""
    av, bv = list(a.values), list(b.values)
    return all(any(abs(x - y) <= tol for y in bv) for x in av) and all(any(abs(x - y) <= tol for y in av) for x in bv)


# ---------------------------------------------------------------------------
# comp counts and the Koebe majorant
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CompCounts:
    comp_f: int
    f_k: tuple = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "f_k", tuple(int(v) for v in self.f_k))
        if self.comp_f < 1 or any(v < 1 for v in self.f_k):
            raise SubadditivityViolation("counts must be positive integers")
        if self.f_k and self.f_k[0] != self.comp_f:
            raise SubadditivityViolation(f"f_1 = {self.f_k[0]} differs from comp_f = {self.comp_f}")
        f = self.f_k
        for k in range(1, len(f) + 1):
            for n in range(1, len(f) - k + 1):
                if f[k + n - 1] > f[k - 1] + f[n - 1]:
                    raise SubadditivityViolation(f"f_{k + n} = {f[k + n - 1]} > f_{k} + f_{n}")

    @classmethod
    def from_list(cls, f_k):
        f_k = list(f_k)
        if not f_k:
            raise SubadditivityViolation("empty counts")
        return cls(f_k[0], f_k)


class KoebeCheck(NamedTuple):
    lhs: float
    bound: float
    ok: bool
    tail: float


def koebe_tail(K, x):
    """sum_{k>K} k x^k for 0 <= x < 1."""
    return x ** (K + 1) * ((K + 1) - K * x) / (1 - x) ** 2


def comp_koebe(counts, z):
    """|sum f_k z^k| plus the tail allowance against comp_f |z|/(1-|z|)^2."""
    if isinstance(counts, (list, tuple)):
        counts = CompCounts.from_list(counts)
    x = abs(complex(z))
    if x >= 1:
        raise ValueError("comp_koebe needs |z| < 1")
    K = len(counts.f_k)
    partial = abs(sum(v * complex(z) ** (k + 1) for k, v in enumerate(counts.f_k)))
    tail = counts.comp_f * koebe_tail(K, x)
    lhs = partial + tail
    bound = counts.comp_f * x / (1 - x) ** 2
    return KoebeCheck(lhs, bound, lhs <= bound * (1 + 1e-12), tail)


# ---------------------------------------------------------------------------
# growth of compositions
# ---------------------------------------------------------------------------


class ClunieCheck(NamedTuple):
    lhs: float
    rhs: float
    ok: bool
    c_rho: float


def _mm(f, r):
    return abs(evaluate(f, 0)) if r <= 0 else max_modulus(f, r)


def growth_clunie(f, g, rho, R):
    """M(R, f o g) >= M(c(rho) M(rho R, g), f) with c(rho) = (1 - rho^2)/(4 rho)."""
    if not 0 < rho < 1 or R <= 0:
        raise ValueError("growth_clunie needs 0 < rho < 1 and R > 0")
    if abs(evaluate(g, 0)) > 1e-12:
        raise GNotZeroAtOrigin(f"g(0) = {evaluate(g, 0)}")
    c = (1 - rho * rho) / (4 * rho)
    lhs = _mm(Chain(f, g), R)
    rhs = _mm(f, c * _mm(g, rho * R))
    return ClunieCheck(lhs, rhs, lhs >= rhs * (1 - 1e-6), c)


class PolyaRatios(NamedTuple):
    ratios: list
    increasing: bool


def polya_ratio(f, g, r_grid):
    """log M(r, f o g) / log M(r, f) on each grid radius."""
    fg = Chain(f, g)
    ratios = []
    for r in r_grid:
        mf = max_modulus(f, r)
        if not mf > 1:
            raise DegenerateModulus(f"M({r}, f) = {mf} <= 1")
        ratios.append(math.log(max_modulus(fg, r)) / math.log(mf))
    return PolyaRatios(ratios, bool(np.all(np.diff(ratios) > 0)))


def exp_of(f):
    """e^{f} as a catalog chain."""
    return Chain(ScaledExp(1.0), f)

