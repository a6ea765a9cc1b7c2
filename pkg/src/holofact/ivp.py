"""Local Taylor solutions and radius lower bounds for the factorization ODE

    L'(z) = exp(F(z)) * (L - a)^(-N) * exp(-G(L)),   L(alpha) = a0.

Type 1 is the case N = 0.  Writing f = int_0^z e^F and
g(w) = int (t - a)^N e^G(t) dt (constant fixed by f(alpha) = g(a0)), every
solution satisfies f = g o L on its disk.
"""
import cmath
import math
from dataclasses import dataclass, replace
from typing import NamedTuple, Optional

import numpy as np

from . import catalog, kernels
from . import quadrature as quad
from .catalog import _golden_max, cx_from_json, cx_to_json
from .errors import BoxHitsExceptionalValue, NonElhSpec, SchemaError, SeedAtExceptionalValue, StrictFieldError
from .series import DEFAULT_ORDER, PowerSeries, RadiusEstimate, ps_exp, radius_estimate, ratio_estimate

BOX_A = 1.0
BOX_B_GRID = (0.25, 0.5, 1.0, 2.0, 4.0)
BOUNDARY_SAMPLES = 128


def _poly(p):
    out = tuple(complex(c) for c in p) or (0j,)
    while len(out) > 1 and out[-1] == 0:
        out = out[:-1]
    return out


@dataclass(frozen=True)
class IvpSpec:
    type: str
    F: tuple
    G: tuple
    N: int = 0
    a: complex = 0j
    alpha: complex = 0j
    a0: complex = 0j

    def __post_init__(self):
        object.__setattr__(self, "F", _poly(self.F))
        object.__setattr__(self, "G", _poly(self.G))
        for k in ("a", "alpha", "a0"):
            object.__setattr__(self, k, complex(getattr(self, k)))
        object.__setattr__(self, "N", int(self.N))
        if self.type not in ("type1", "type2"):
            raise NonElhSpec(f"unknown system type {self.type!r}")
        if self.N < 0:
            raise NonElhSpec("N must be >= 0")
        if len(self.F) < 2:
            raise NonElhSpec("the exponent F must be non-constant")
        if self.type == "type1" and (self.N != 0 or len(self.G) < 2):
            raise NonElhSpec("type1 needs N = 0 and a non-constant G")
        if self.N == 0 and len(self.G) < 2:
            raise NonElhSpec("G may be constant only when N > 0")
        if self.type == "type2" and self.a0 == self.a:
            raise SeedAtExceptionalValue(f"seed a0 = {self.a0} is the exceptional value")

    def reseeded(self, alpha, a0):
        return replace(self, alpha=complex(alpha), a0=complex(a0))

    def to_json(self):
        return {
            "type": self.type,
            "F": [cx_to_json(c) for c in self.F],
            "G": [cx_to_json(c) for c in self.G],
            "N": self.N,
            "a": cx_to_json(self.a),
            "alpha": cx_to_json(self.alpha),
            "a0": cx_to_json(self.a0),
        }

    @classmethod
    def from_json(cls, obj, path="spec"):
        if not isinstance(obj, dict):
            raise SchemaError(path, "expected an object")
        known = ("type", "F", "G", "N", "a", "alpha", "a0")
        for k in obj:
            if k not in known:
                raise StrictFieldError(f"{path}.{k}")
        for k in ("type", "F", "G"):
            if k not in obj:
                raise SchemaError(f"{path}.{k}", "missing required field")
        kw = {
            "type": obj["type"],
            "F": tuple(cx_from_json(c, f"{path}.F[{i}]") for i, c in enumerate(obj["F"])),
            "G": tuple(cx_from_json(c, f"{path}.G[{i}]") for i, c in enumerate(obj["G"])),
            "N": int(obj.get("N", 0)),
        }
        for k in ("a", "alpha", "a0"):
            if k in obj:
                kw[k] = cx_from_json(obj[k], f"{path}.{k}")
        return cls(**kw)


def benchmark_spec():
    """F = z, G = -w: L = -log(2 - e^z), singular on ln 2 + 2 pi i Z."""
    return IvpSpec("type1", (0, 1), (0, -1))


class Bounds(NamedTuple):
    banach: float
    picard: float
    cauchy: float
    M: float
    K: float
    box_a: float
    box_b: float


@dataclass(frozen=True, eq=False)
class DiskChart:
    id: int
    spec: IvpSpec
    L: PowerSeries
    r_theory: Optional[Bounds]
    r_emp: RadiusEstimate
    generation: int = 0
    parent: Optional[int] = None
    entry_angle: Optional[float] = None

    @property
    def center(self):
        return self.spec.alpha

    @property
    def radius(self):
        return self.r_emp.value


# ---------------------------------------------------------------------------
# coefficient recursion
# ---------------------------------------------------------------------------


def taylor_solution(spec, order=DEFAULT_ORDER, with_scale=False):
    """Coefficients of L about spec.alpha (no bounds, no radius fit).

    With ``with_scale`` also returns the per-coefficient cancellation scale
    used by the radius fit to discard rounding noise.
    """
    E = ps_exp(PowerSeries.from_polynomial(spec.F, spec.alpha, order)).coeffs
    g = np.array(spec.G if spec.G else (0j,), dtype=np.complex128)
    c, scale = kernels.ivp_taylor(np.ascontiguousarray(E), g, spec.N, spec.a, spec.a0, order)
    if not np.all(np.isfinite(c)):
        raise ArithmeticError("coefficient overflow in the Taylor recursion")
    L = PowerSeries(c, spec.alpha)
    return (L, scale) if with_scale else L


def solve_local(spec, order=DEFAULT_ORDER, *, chart_id=0, generation=0, parent=None, entry_angle=None, bounds=True):
    if order < 8:
        raise ValueError("solve_local needs order >= 8")
    if spec.type == "type2" and spec.a0 == spec.a:
        raise SeedAtExceptionalValue("seed at the exceptional value")
    L, scale = taylor_solution(spec, order, with_scale=True)
    r_emp = radius_estimate(L, scale) if order >= 16 else ratio_estimate(L)
    r_th = auto_box(spec) if bounds else None
    return DiskChart(chart_id, spec, L, r_th, r_emp, generation, parent, entry_angle)


# ---------------------------------------------------------------------------
# Hille-type bounds on a dicylinder
# ---------------------------------------------------------------------------


def _circle_max(logfun, center, radius, samples=BOUNDARY_SAMPLES):
    th = 2 * math.pi * np.arange(samples) / samples
    vals = logfun(center + radius * np.exp(1j * th))
    i = int(np.argmax(vals))
    step = 2 * math.pi / samples
    _, best = _golden_max(lambda t: float(logfun(np.array([center + radius * cmath.exp(1j * t)]))[0]),
                          th[i] - step, th[i] + step, tol=1e-9)
    return max(best, float(vals[i]))


def _polyval(p, z):
    return np.polynomial.polynomial.polyval(z, np.asarray(p))


def _log_rhs_w(spec):
    """log|(w - a)^(-N) e^(-G(w))| and log of its w-derivative's modulus."""
    dG = np.polynomial.polynomial.polyder(np.asarray(spec.G)) if len(spec.G) > 1 else np.zeros(1)

    def val(w):
        out = -_polyval(spec.G, w).real
        if spec.N:
            out = out - spec.N * np.log(np.abs(w - spec.a))
        return out

    def der(w):
        fac = -_polyval(dG, w)
        if spec.N:
            fac = fac - spec.N / (w - spec.a)
        with np.errstate(divide="ignore"):
            return val(w) + np.log(np.abs(fac))

    return val, der


def bounds_hille(spec, box_a, box_b):
    """Radius lower bounds from max |rhs| (M) and max |d rhs/dw| (K) on the box.

    The right side is a product of a z-part and a w-part, so both maxima
    split; each factor is holomorphic on its disk and is maximized on the
    boundary circle (sampled, then refined by golden section, in log space).
    """
    if box_a <= 0 or box_b <= 0:
        raise ValueError("box sides must be positive")
    if spec.N > 0 and abs(spec.a0 - spec.a) <= box_b:
        raise BoxHitsExceptionalValue(f"|w - a0| <= {box_b} contains the exceptional value {spec.a}")
    logF = _circle_max(lambda z: _polyval(spec.F, z).real, spec.alpha, box_a)
    val, der = _log_rhs_w(spec)
    logM = logF + _circle_max(val, spec.a0, box_b)
    logK = logF + _circle_max(der, spec.a0, box_b)
    M = math.exp(min(logM, 700.0))
    K = math.exp(min(logK, 700.0))
    picard = min(box_a, box_b / M)
    banach = min(picard, 1.0 / K)
    cauchy = box_a * -math.expm1(-box_b / (2 * box_a * M))
    return Bounds(banach, picard, cauchy, M, K, box_a, box_b)


def auto_box(spec, box_a=BOX_A, grid=BOX_B_GRID):
    """Best picard bound over box_b in ``grid``; boxes reaching a are skipped."""
    best = None
    for b in grid:
        try:
            r = bounds_hille(spec, box_a, b)
        except BoxHitsExceptionalValue:
            continue
        if best is None or r.picard > best.picard:
            best = r
    if best is None:
        best = bounds_hille(spec, box_a, 0.5 * abs(spec.a0 - spec.a))
    return best


def searched_boxes(spec, box_a=BOX_A, grid=BOX_B_GRID):
    out = []
    for b in grid:
        try:
            out.append(bounds_hille(spec, box_a, b))
        except BoxHitsExceptionalValue:
            pass
    return out


# ---------------------------------------------------------------------------
# pointwise checks
# ---------------------------------------------------------------------------


def rhs(spec, z, w):
    z = np.asarray(z, dtype=np.complex128)
    w = np.asarray(w, dtype=np.complex128)
    out = np.exp(_polyval(spec.F, z) - _polyval(spec.G, w))
    if spec.N:
        out = out * (w - spec.a) ** (-spec.N)
    return out


def disk_points(center, radius, n):
    """Deterministic sunflower points filling the closed disk."""
    k = np.arange(n)
    rho = radius * np.sqrt((k + 0.5) / n)
    th = k * math.pi * (3.0 - math.sqrt(5.0))
    return center + rho * np.exp(1j * th)


def residual_check(chart, n_samples=100):
    """max |L' - rhs(z, L)| over points of the half-validated disk."""
    r = chart.r_emp.value
    if chart.r_theory is not None:
        r = min(r, chart.r_theory.picard)
    if not np.isfinite(r):
        r = 1.0
    zs = disk_points(chart.center, 0.5 * r, n_samples)
    L = chart.L(zs)
    dL = chart.L.deriv()(zs)
    return float(np.max(np.abs(dL - rhs(chart.spec, zs, L))))


# ---------------------------------------------------------------------------
# the factor pair f, g with f = g o L
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GFunction:
    """g(w) = int_0^w (t - a)^N e^{G(t)} dt + d."""

    G: tuple
    N: int
    a: complex
    d: complex

    def __call__(self, w):
        return quad.int_exp_poly(np.array(self.G), w, N=self.N, a=self.a) + self.d

    def integrate(self, w0, w1):
        return quad.int_exp_poly(np.array(self.G), w1, z0=w0, N=self.N, a=self.a)

    def as_catalog(self):
        if self.N == 0 and len(self.G) > 1:
            return catalog.IntExpPoly(self.G, self.d)
        return None

    def asymptotic_values(self):
        cat = self.as_catalog()
        if cat is not None:
            return catalog.asymptotic_values(cat)
        if len(self.G) < 2:
            # polynomial g
            return catalog.AsymptoticSet((), True, "closed-form")
        vals = [catalog.ray_integral(self.G, th, N=self.N, a=self.a) + self.d for th in catalog.decay_bisectors(self.G)]
        return catalog.AsymptoticSet(catalog.dedup(vals), True, "sector-quadrature")


def f_of(spec):
    return catalog.IntExpPoly(spec.F)


def factor_pair(spec):
    """(f, g) with f(alpha) = g(a0)."""
    f = f_of(spec)
    base = GFunction(spec.G, spec.N, spec.a, 0j)
    d = catalog.evaluate(f, spec.alpha) - base(spec.a0)
    return f, replace(base, d=d)


def factorization_residual(chart, n_samples=200, frac=0.4):
    """max |f(z) - g(L(z))| on |z - alpha| <= frac * r_emp."""
    f, g = factor_pair(chart.spec)
    r = chart.r_emp.value if np.isfinite(chart.r_emp.value) else 1.0
    zs = disk_points(chart.center, frac * r, n_samples)
    Ls = chart.L(zs)
    return max(abs(catalog.evaluate(f, z) - g(w)) for z, w in zip(zs, Ls))
