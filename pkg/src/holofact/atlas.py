"""Generation-by-generation continuation of L across maximal disks.

Boundary points of a chart are classified by marching toward them with
local re-expansion: every step re-solves the initial value problem at the
current point (order 32) and moves a fraction of the local radius.  A point
whose value comes out of a series that contains it with margin is regular;
otherwise the march steers onto the nearest singularity (located by a
Domb-Sykes fit) and checks for unbounded growth of L together with
g(L) -> f(s).
"""
import cmath
import math
from dataclasses import dataclass, field
from typing import NamedTuple, Optional

import numpy as np

from . import catalog
from .catalog import cx_to_json
from .errors import GIncomplete, NotRegularDirection, OverlapMismatch, PreconditionFailed
from .ivp import DiskChart, factor_pair, solve_local, taylor_solution
from .parallel import pmap
from .series import DEFAULT_ORDER, locate_singularity, radius_estimate

LAMBDA = 1e8
MARCH_ORDER = 32
STEP_FRACTION = 0.3
REGULAR_MIN_RADIUS = 2.0 / 256.0  # of the chart radius
SPAWN_MIN_RADIUS = 1e-4
APPROACH = 1e-7  # stop the singular march at this fraction of the chart radius
GROWTH_RATIO = 0.95
CORROBORATION_TOL = 1e-4
DEDUP_TOL = 1e-6
OVERLAP_TOL = 1e-6
OVERLAP_POINTS = 20
MAX_REGULAR_STEPS = 200
MAX_SINGULAR_STEPS = 150
TAIL = 8
CLOSURE_GAP = 1.0 / 256


class Regular(NamedTuple):
    a: complex
    rho: float  # local radius at the boundary point
    source: object  # series (and its radius) the value was read from
    source_rho: float


class SingularPoint(NamedTuple):
    location: complex
    chart_id: int
    generation: int
    theta: float
    blowup_mag: float
    singular_value: complex
    corroboration_residual: float
    tail: tuple  # |g(L) - f(s)| along the last samples


class Inconclusive(NamedTuple):
    reason: str


class Edge(NamedTuple):
    parent: int
    child: int
    theta: float
    overlap_residual: float


@dataclass
class Atlas:
    spec: object
    charts: dict = field(default_factory=dict)
    edges: list = field(default_factory=list)
    singular: list = field(default_factory=list)
    classifications: dict = field(default_factory=dict)  # chart id -> [(theta, result)]
    budget_used: dict = field(default_factory=dict)
    budget_exhausted: bool = False
    inconclusive: int = 0

    @property
    def root(self):
        return self.charts[0]

    def entire_charts(self):
        return [c.id for c in self.charts.values() if not np.isfinite(c.r_emp.value)]


class Budget(NamedTuple):
    max_generation: int = 3
    max_charts: int = 64
    angles_per_chart: int = 64


# ---------------------------------------------------------------------------
# marching
# ---------------------------------------------------------------------------


def _local(spec, z, w, order=MARCH_ORDER):
    try:
        s, scale = taylor_solution(spec.reseeded(z, w), order, with_scale=True)
    except (ArithmeticError, ValueError):
        return None, 0.0
    return s, radius_estimate(s, scale).value


def _g_values(chart, g, samples):
    """g(L_k) accumulated along the polyline of L samples from the chart seed."""
    f, _ = factor_pair(chart.spec)
    acc = catalog.evaluate(f, chart.center)
    out = [acc]
    for w0, w1 in zip(samples[:-1], samples[1:]):
        acc = acc + g.integrate(w0, w1)
        out.append(acc)
    return out


def classify_boundary(chart, theta, *, Lambda=LAMBDA):
    """Regular | SingularPoint | Inconclusive for the boundary point at angle theta."""
    R = chart.r_emp.value
    if not np.isfinite(R):
        raise PreconditionFailed("chart has no finite radius; nothing to classify")
    spec = chart.spec
    beta = chart.center + R * cmath.exp(1j * theta)
    z = chart.center
    series = chart.L
    rho = R
    zs = [z]
    Ls = [complex(chart.L.coeffs[0])]

    for _ in range(MAX_REGULAR_STEPS):
        d = abs(beta - z)
        if d <= STEP_FRACTION * rho:
            a = series(beta)
            s_b, rho_b = _local(spec, beta, a)
            if s_b is not None and rho_b >= REGULAR_MIN_RADIUS * R:
                return Regular(a, rho_b, series, rho)
            break
        if rho < REGULAR_MIN_RADIUS * R:
            break
        z = z + STEP_FRACTION * rho * (beta - z) / d
        w = series(z)
        series, rho = _local(spec, z, w)
        if series is None:
            return Inconclusive("overflow while marching")
        zs.append(z)
        Ls.append(w)
    return _singular_march(chart, theta, beta, z, series, rho, zs, Ls, Lambda)


def _singular_march(chart, theta, beta, z, series, rho, zs, Ls, Lambda):
    R = chart.r_emp.value
    spec = chart.spec
    target = beta
    for _ in range(MAX_SINGULAR_STEPS):
        loc = locate_singularity(series)
        if loc is not None and abs(loc[0] - z) < 3 * rho:
            target = loc[0]
        dist = abs(target - z)
        if dist < APPROACH * R or rho < APPROACH * R:
            break
        step = STEP_FRACTION * min(rho, dist)
        z_new = z + step * (target - z) / dist
        w = series(z_new)
        nxt, rho_new = _local(spec, z_new, w)
        if nxt is None:
            break
        z, series, rho = z_new, nxt, rho_new
        zs.append(z)
        Ls.append(w)
    else:
        return Inconclusive("singular march did not converge")
    if abs(target - z) > 1e-5 * R and rho > 1e-5 * R:
        return Inconclusive("no radius collapse")
    mags = np.abs(np.array(Ls))
    if len(mags) < TAIL + 1:
        return Inconclusive("too few samples")
    if not np.all(np.diff(mags[-4:]) > 0):
        return Inconclusive("no monotone growth")
    inc = np.abs(np.diff(np.array(Ls)[-(TAIL + 1):]))
    ratio = float(np.exp(np.mean(np.log(inc[1:] / inc[:-1])))) if np.all(inc > 0) else 0.0
    if mags[-1] < Lambda and ratio < GROWTH_RATIO:
        return Inconclusive("bounded tail (finite limit)")
    f, g = factor_pair(spec)
    fs = catalog.evaluate(f, target)
    gv = _g_values(chart, g, Ls)
    tail = tuple(float(abs(v - fs)) for v in gv[-TAIL:])
    if tail[-1] >= CORROBORATION_TOL:
        return Inconclusive("g(L) does not approach f(s)")
    return SingularPoint(complex(target), chart.id, chart.generation, float(theta), float(mags.max()), complex(fs), tail[-1], tail)


# ---------------------------------------------------------------------------
# continuation
# ---------------------------------------------------------------------------


def _overlap_points(chart, beta, child_r, source, source_rho):
    """Sample points where both the parent data and the child series are valid."""
    rp = 0.7 * chart.r_emp.value
    rc = 0.7 * child_r
    d = abs(beta - chart.center)
    if rp + rc > d + 1e-12 and np.isfinite(rp):
        u = (beta - chart.center) / d
        lo = max(d - rc, -rp)
        hi = min(rp, d + rc)
        mid = chart.center + u * 0.5 * (lo + hi)
        # largest circle about mid inside the lens
        w = min(rp - abs(mid - chart.center), rc - abs(mid - beta))
        if w > 0:
            ring = mid + 0.9 * w * np.exp(2j * np.pi * np.arange(OVERLAP_POINTS) / OVERLAP_POINTS)
            return ring, chart.L
    src_center = source.center
    rad = 0.3 * min(child_r, source_rho - abs(beta - src_center))
    ring = beta + rad * np.exp(2j * np.pi * np.arange(OVERLAP_POINTS) / OVERLAP_POINTS)
    return ring, source


def spawn_child(chart, theta, reg, chart_id, order=DEFAULT_ORDER):
    beta = chart.center + chart.r_emp.value * cmath.exp(1j * theta)
    child = solve_local(
        chart.spec.reseeded(beta, reg.a),
        order,
        chart_id=chart_id,
        generation=chart.generation + 1,
        parent=chart.id,
        entry_angle=float(theta),
    )
    pts, ref = _overlap_points(chart, beta, child.r_emp.value if np.isfinite(child.r_emp.value) else chart.r_emp.value,
                               reg.source, reg.source_rho)
    resid = float(np.max(np.abs(ref(pts) - child.L(pts))))
    if not resid <= OVERLAP_TOL:
        raise OverlapMismatch(f"child {chart_id} disagrees with its parent on the overlap ({resid:.3g})")
    return child, resid


def continue_through(atlas, chart_id, theta, order=DEFAULT_ORDER):
    chart = atlas.charts[chart_id]
    res = classify_boundary(chart, theta)
    if not isinstance(res, Regular):
        raise NotRegularDirection(f"direction {theta:.6g} of chart {chart_id} is not regular")
    new_id = max(atlas.charts) + 1
    child, resid = spawn_child(chart, theta, res, new_id, order)
    atlas.charts[new_id] = child
    atlas.edges.append(Edge(chart_id, new_id, float(theta), resid))
    return child


# ---------------------------------------------------------------------------
# atlas construction
# ---------------------------------------------------------------------------


def _candidate_angles(chart, results):
    """Off-grid directions toward singularities seen by the chart or its arrivals.

    Estimates within 1/256 rad of each other are merged, keeping the one from
    the source closest to the located point.
    """
    R = chart.r_emp.value
    found = []
    sources = [chart.L] + [r.source for _, r in results if isinstance(r, Regular)]
    for s in sources:
        loc = locate_singularity(s)
        if loc is None or loc[1] > 1e-2:
            continue
        if abs(abs(loc[0] - chart.center) - R) <= 0.02 * R:
            th = cmath.phase(loc[0] - chart.center) % (2 * math.pi)
            found.append((abs(loc[0] - s.center), th))
    kept = []
    for _, th in sorted(found):
        if all(_angle_gap(th, t) > CLOSURE_GAP for t in kept):
            kept.append(th)
    return sorted(kept)


def _angle_gap(s, t):
    return abs((s - t + math.pi) % (2 * math.pi) - math.pi)


def _same_sheet_exists(atlas, beta, a):
    for c in atlas.charts.values():
        r = c.r_emp.value
        reach = 0.7 * r if np.isfinite(r) else math.inf
        if abs(beta - c.center) < reach and abs(c.L(beta) - a) < DEDUP_TOL * max(1.0, abs(a)):
            return True
    return False


def _add_singular(atlas, sp):
    for q in atlas.singular:
        if abs(q.location - sp.location) <= 1e-8 * max(1.0, abs(sp.location)):
            return
    atlas.singular.append(sp)


def classify_chart(chart, n_angles):
    grid = [2 * math.pi * k / n_angles for k in range(n_angles)]
    results = list(zip(grid, pmap(lambda t: classify_boundary(chart, t), grid)))
    extra = [t for t in _candidate_angles(chart, results) if all(abs(t - g) > 1e-9 for g in grid)]
    results += list(zip(extra, pmap(lambda t: classify_boundary(chart, t), extra)))
    results.sort(key=lambda tr: tr[0])
    return results


def build_atlas(spec, budget=Budget(), order=DEFAULT_ORDER):
    budget = Budget(*budget) if not isinstance(budget, Budget) else budget
    root = solve_local(spec, order)
    atlas = Atlas(spec, {0: root})
    frontier = [0]
    gen = 0
    while frontier:
        nxt = []
        for cid in frontier:
            chart = atlas.charts[cid]
            if not np.isfinite(chart.r_emp.value):
                continue
            results = classify_chart(chart, budget.angles_per_chart)
            atlas.classifications[cid] = results
            for theta, res in results:
                if isinstance(res, SingularPoint):
                    _add_singular(atlas, res)
                elif isinstance(res, Inconclusive):
                    atlas.inconclusive += 1
                elif chart.generation < budget.max_generation and res.rho >= SPAWN_MIN_RADIUS:
                    beta = chart.center + chart.r_emp.value * cmath.exp(1j * theta)
                    if _same_sheet_exists(atlas, beta, res.a):
                        continue
                    if len(atlas.charts) >= budget.max_charts:
                        atlas.budget_exhausted = True
                        continue
                    new_id = len(atlas.charts)
                    child, resid = spawn_child(chart, theta, res, new_id, order)
                    atlas.charts[new_id] = child
                    atlas.edges.append(Edge(cid, new_id, float(theta), resid))
                    nxt.append(new_id)
        gen = max(gen, max(atlas.charts[c].generation for c in frontier))
        frontier = nxt
    atlas.budget_used = {"generations": max(c.generation for c in atlas.charts.values()), "charts": len(atlas.charts)}
    return atlas


# ---------------------------------------------------------------------------
# structural checks
# ---------------------------------------------------------------------------


def verify_thm2(atlas):
    """Finite-budget checks of the boundary structure.

    b: |g(L) - f(s)| decreases along each singular tail and ends below 1e-4.
    c: singular values are finite asymptotic values of g.
    closure: no regular direction within 1/256 rad of a singular one.
    a: every chart with finite radius has at least one singular boundary point.
    """
    report = {"b_check": True, "c_check": True, "c_skipped": False, "closure_check": True, "a_check": True,
              "a_violations": [], "b_failures": [], "c_failures": [], "closure_failures": []}
    for sp in atlas.singular:
        tail = np.array(sp.tail)
        if not (tail[-1] < CORROBORATION_TOL and np.all(np.diff(tail) <= 1e-15 * max(1.0, tail[0]))):
            report["b_check"] = False
            report["b_failures"].append(sp.location)
    if atlas.singular:
        _, g = factor_pair(atlas.spec)
        A = g.asymptotic_values()
        if not A.complete:
            report["c_check"] = None
            report["c_skipped"] = True
        else:
            report["A_g"] = list(A.values)
            for sp in atlas.singular:
                if not A.values or min(abs(sp.singular_value - v) for v in A.values) > CORROBORATION_TOL:
                    report["c_check"] = False
                    report["c_failures"].append(sp.location)
    for cid, results in atlas.classifications.items():
        center = atlas.charts[cid].center
        sing = [cmath.phase(r.location - center) for t, r in results if isinstance(r, SingularPoint)]
        for t, r in results:
            if isinstance(r, Regular):
                for s in sing:
                    if _angle_gap(t, s) < CLOSURE_GAP:
                        report["closure_check"] = False
                        report["closure_failures"].append((cid, t))
        if not sing:
            report["a_check"] = False
            report["a_violations"].append(cid)
    report["ok"] = bool(report["b_check"] and report["c_check"] is not False and report["closure_check"] and report["a_check"])
    return report


def require_g_complete(atlas):
    _, g = factor_pair(atlas.spec)
    A = g.asymptotic_values()
    if not A.complete:
        raise GIncomplete("asymptotic values of g are not known to be complete")
    return A


# ---------------------------------------------------------------------------
# export
# ---------------------------------------------------------------------------


def _num(x):
    return None if not np.isfinite(x) else float(x)


def to_json(atlas, n_coeffs=16):
    charts = []
    for cid in sorted(atlas.charts):
        c = atlas.charts[cid]
        charts.append({
            "id": cid,
            "center": cx_to_json(c.center),
            "a0": cx_to_json(c.spec.a0),
            "radius": _num(c.r_emp.value),
            "radius_method": c.r_emp.method,
            "entire": not np.isfinite(c.r_emp.value),
            "r_theory": None if c.r_theory is None else {k: float(getattr(c.r_theory, k)) for k in ("banach", "picard", "cauchy")},
            "generation": c.generation,
            "parent": c.parent,
            "entry_angle": c.entry_angle,
            "coeffs": [cx_to_json(v) for v in c.L.coeffs[:n_coeffs]],
        })
    return {
        "schema": "atlas-v1",
        "spec": atlas.spec.to_json(),
        "charts": charts,
        "edges": [{"parent": e.parent, "child": e.child, "theta": e.theta, "overlap_residual": e.overlap_residual} for e in atlas.edges],
        "singular": [
            {
                "location": cx_to_json(s.location),
                "chart_id": s.chart_id,
                "generation": s.generation,
                "theta": s.theta,
                "blowup_mag": s.blowup_mag,
                "singular_value": cx_to_json(s.singular_value),
                "corroboration_residual": s.corroboration_residual,
            }
            for s in atlas.singular
        ],
        "inconclusive": atlas.inconclusive,
        "budget_used": atlas.budget_used,
        "budget_exhausted": atlas.budget_exhausted,
    }
