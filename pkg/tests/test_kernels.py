import json
import os
import subprocess
import sys

import numpy as np
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from holofact import kernels as k
from holofact.quadrature import EXP_POLY

cplx = arrays(np.complex128, 24, elements=st.complex_numbers(max_magnitude=2.0, allow_nan=False, allow_infinity=False))


def agree(u, v, tol=1e-12):
    u, v = np.asarray(u), np.asarray(v)
    return np.max(np.abs(u - v)) <= tol * max(1.0, np.max(np.abs(v)))


@given(cplx, cplx)
def test_mul_trunc_paths_agree(a, b):
    assert agree(k.mul_trunc_nb(a, b, 24), k.mul_trunc_np(a, b, 24))


@given(cplx, cplx)
def test_div_trunc_paths_agree(a, b):
    b = b.copy()
    b[0] = 1.0 + abs(b[0])
    # rescale so the quotient recursion stays well conditioned
    b[1:] *= 0.25 ** np.arange(1, 24)
    assert agree(k.div_trunc_nb(a, b, 24), k.div_trunc_np(a, b, 24), 1e-10)


@given(cplx)
def test_exp_log_paths_agree(a):
    a = a * 0.25 ** np.arange(24)
    assert agree(k.exp_series_nb(a, 24), k.exp_series_np(a, 24), 1e-11)
    b = a.copy()
    b[0] = 1.0 + abs(b[0])
    assert agree(k.log_series_nb(b, 24), k.log_series_np(b, 24), 1e-11)


@given(cplx, cplx)
def test_compose_and_horner_paths_agree(a, b):
    inner = b * 0.25 ** np.arange(24)
    inner[0] = 0.0
    assert agree(k.compose_nb(a, inner, 24), k.compose_np(a, inner, 24), 1e-11)
    w = b[:8] * 0.3
    assert agree(k.horner_nb(a, w), k.horner_np(a, w))


def test_ivp_taylor_paths_agree():
    n = 40
    E = np.array([1.0 / np.prod(np.arange(1, j + 1)) for j in range(n)], dtype=np.complex128)
    g = np.array([0, -1], dtype=np.complex128)
    u, s = k.ivp_taylor_nb(E, g, 0, 0j, 0j, n)
    v, t = k.ivp_taylor_np(E, g, 0, 0j, 0j, n)
    assert agree(u, v) and agree(s, t)
    assert np.allclose(u[:5], [0, 1, 1, 1, 13 / 12])


def test_gk_and_lsq_paths_agree():
    pc = np.array([0, 0, -1], dtype=np.complex128)
    a = k.gk_segment_nb(EXP_POLY, pc, 0, 0j, 0j, 3.0 + 1.0j, 1e-12, 4000)
    b = k.gk_segment_np(EXP_POLY, pc, 0, 0j, 0j, 3.0 + 1.0j, 1e-12, 4000)
    assert abs(a[0] - b[0]) < 1e-13 and a[2] == b[2] == 0
    x = np.arange(32, 64, dtype=float)
    y = -0.5 * x + 3.0
    assert agree(k.lsq_slope_nb(x, y, False), k.lsq_slope_np(x, y, False))


def _backend_under(flag):
    env = dict(os.environ, HOLOFACT_JIT=flag)
    code = "import json, holofact.kernels as k; print(json.dumps([k.backend(), k.mul_trunc is k.mul_trunc_np]))"
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    return json.loads(out.stdout)


def test_jit_flag_selects_numpy_path():
    assert _backend_under("0") == ["numpy", True]
    if k.numba is not None:
        assert _backend_under("1") == ["numba", False]
