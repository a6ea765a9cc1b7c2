import math

import pytest

from holofact import ng
from holofact.catalog import evaluate
from holofact.errors import OutsideValidatedDisk, PreconditionFailed, UnderflowAtStage

# root of e^{1 + c e} + c e = e + 1/2 (mpmath.findroot)
C2_SUP = 0.0471614696040788747023


def test_k1():
    s = ng.build_cs(1)
    assert s.float_cs == (1.0,) and s.margins == ()


def test_k2_against_scalar_equation():
    s = ng.build_cs(2)
    assert s.float_cs[1] == pytest.approx(C2_SUP / 2, rel=1e-10)
    c = s.float_cs[1]
    assert math.exp(1 + c * math.e) + c * math.e <= math.e + 0.5


def test_doubled_supremum_breaks_inequality():
    s = ng.build_cs(2, shrink=1.0)
    assert ng.defining_gap([1.0, s.cs[1] * 2], 1) > 0
    assert ng.defining_gap(s.cs, 1) <= 1e-12


def test_cap():
    with pytest.raises(PreconditionFailed):
        ng.build_cs(ng.MAX_K + 1)


def test_sequence_invariants(ng_seq):
    assert ng_seq.K == ng.MAX_K
    assert ng_seq.cs[0] == 1
    assert all(c > 0 for c in ng_seq.cs)
    for k in range(1, ng_seq.K):
        assert ng.defining_gap(ng_seq.cs, k) <= 0
    assert all(0 < m <= 1 for m in ng_seq.margins)


@pytest.mark.parametrize("k", [1, 2, 3, 4, 5])
def test_tail_bounds(ng_seq, k):
    assert ng.tail_bound_check(ng_seq, k, k) <= 2.0 ** -k
    assert ng.tail_bound_check(ng_seq, k, 0) <= 2.0 ** -k


def test_cauchy_property(ng_seq):
    r = 2.0
    vals = [ng.tail_bound_check(ng_seq, k, r) for k in range(2, 6)]
    assert all(v <= 2.0 ** -k for v, k in zip(vals, range(2, 6)))
    assert all(b < a for a, b in zip(vals, vals[1:]))


def test_limit_values(ng_seq):
    for n in range(1, 6):
        v = ng.limit_eval(ng_seq, n)
        assert v.value.real > n
    v0 = ng.limit_eval(ng_seq, 0)
    assert v0.value.real >= 1.0 and v0.error <= 2.0 ** (-ng_seq.K + 1)
    with pytest.raises(OutsideValidatedDisk):
        ng.limit_eval(ng_seq, 50)


def test_monotone_prefixes(ng_seq):
    for x in (0.0, 0.5, 1.5, 2.5):
        vals = [evaluate(ng_seq.as_catalog(k), x).real for k in range(1, 7)]
        assert all(b >= a for a, b in zip(vals, vals[1:]))


@pytest.mark.parametrize("k", [1, 2, 3, 4, 5, 6])
def test_nonnegative_coefficients(ng_seq, k):
    assert ng.nonnegative_coefficients(ng_seq, k, 40)


def test_json_round_trip(ng_seq):
    back = ng.NgSequence.from_json(ng_seq.to_json())
    assert back.to_json() == ng_seq.to_json()


def test_catalog_prefix_underflow(ng_seq):
    assert ng_seq.as_catalog(7).K == 7
    with pytest.raises(UnderflowAtStage):
        ng_seq.as_catalog(ng_seq.K)
