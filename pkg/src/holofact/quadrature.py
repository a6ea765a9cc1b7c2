"""Adaptive Gauss-Kronrod (7/15) quadrature along straight complex segments."""
import numpy as np

from . import kernels
from .errors import QuadratureNonConvergence

EXP_POLY = 0  # (t - a)**N * exp(p(t))
EXP_EXP = 1  # exp(exp(t))
EXPM1_OVER_T = 2  # (exp(t) - 1) / t

RTOL = 1e-12
MAX_INTERVALS = 4000

_EMPTY = np.zeros(1, dtype=np.complex128)


def segment(kind, z0, z1, p=None, N=0, a=0.0, rtol=RTOL, max_intervals=MAX_INTERVALS):
    """Integral of the selected integrand from ``z0`` to ``z1``; returns (value, err)."""
    z0 = complex(z0)
    z1 = complex(z1)
    if z0 == z1:
        return 0j, 0.0
    pc = _EMPTY if p is None else np.ascontiguousarray(p, dtype=np.complex128)
    val, err, status = kernels.gk_segment(kind, pc, int(N), complex(a), z0, z1, float(rtol), int(max_intervals))
    if status != 0:
        why = "interval budget exhausted" if status == 1 else "non-finite integrand"
        raise QuadratureNonConvergence(f"quadrature on [{z0}, {z1}] failed: {why}")
    return complex(val), float(err)


def int_exp_poly(p, z1, z0=0.0, N=0, a=0.0, rtol=RTOL):
    """Integral of (t - a)**N exp(p(t)) dt from z0 to z1."""
    return segment(EXP_POLY, z0, z1, p=p, N=N, a=a, rtol=rtol)[0]


def path_integral(kind, points, p=None, N=0, a=0.0, rtol=RTOL):
    """Sum of segment integrals along the polyline through ``points``."""
    total = 0j
    for z0, z1 in zip(points[:-1], points[1:]):
        total += segment(kind, z0, z1, p=p, N=N, a=a, rtol=rtol)[0]
    return total
