import itertools
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from holofact import complab as cl
from holofact.catalog import (
    Affine,
    AsymptoticSet,
    Chain,
    IntExpPoly,
    Monomial,
    ScaledExp,
    asymptotic_values,
    calabi,
    evaluate,
)
from holofact.errors import (
    GNotZeroAtOrigin,
    IncompleteInput,
    NotOmittedOnProbe,
    SubadditivityViolation,
    ZeroValueOnProbe,
)

EXPM1 = IntExpPoly((0, 1))
E_Z = IntExpPoly((0, 1), 1.0)
# quad(exp(-t^2), [0, sqrt(pi)/2]); e^{e^2-1} - 1; e^{0.375(e-1)} - 1
CALABI_AT_HALF_SQRT_PI = 0.700038265142128654790
CLUNIE_LHS = 594.294415380753682709
CLUNIE_RHS = 0.904759370061931547062


def test_square_minus_one_chain():
    chain = cl.FactorChain((Chain(Affine(-1.0), Monomial(2)), ScaledExp(0.5)))
    assert cl.verify_composition(EXPM1, chain) < 1e-12


def test_power_tower():
    for n in (2, 3, 4):
        assert cl.verify_composition(ScaledExp(1.0), cl.power_tower_chain(n)) < 1e-12


def test_identity_chain():
    f = IntExpPoly((0, 0.5, -0.25))
    assert cl.verify_composition(f, [f]) == 0.0


def test_disk_samples_in_disk():
    zs = cl.disk_samples(200, 2.0)
    assert len(zs) == 200 and np.all(np.abs(zs) <= 2.0)
    assert len(set(np.round(zs, 12))) == 200


def test_picard_affine():
    ch = cl.picard_factorize(ScaledExp(1.0), 0.0)
    assert ch.provenance == "thm4-affine"
    assert ch.residual < 1e-12
    assert [f.kind for f in ch.factors] == ["Linear", "Monomial", "ScaledExp"]
    assert abs(ch.factors[2].lam - 0.5) < 1e-12


def test_picard_transcendental():
    f = cl.exp_of(calabi())
    ch = cl.picard_factorize(f, 0.0)
    assert ch.provenance == "thm4-transcendental"
    assert ch.residual < 1e-10
    assert cl.normalization_defect(ch, f) < 1e-10


def test_picard_not_omitted():
    with pytest.raises(NotOmittedOnProbe):
        cl.picard_factorize(calabi(), 0.0)


@pytest.mark.parametrize("N", [1, 2])
def test_root_factorize(N):
    ch = cl.root_factorize(E_Z, N)
    assert ch.provenance == "eq15-root"
    assert ch.residual < 1e-12
    L = ch.factors[-1]
    m = N + 1
    for z in (0.0, 0.7, -1.2 + 0.4j):
        assert abs(evaluate(L, z) - m ** (1 / m) * np.exp(z / m)) < 1e-12


def test_root_factorize_zero_value():
    with pytest.raises(ZeroValueOnProbe):
        cl.root_factorize(EXPM1, 1)


def test_chain_json():
    ch = cl.power_tower_chain(3)
    out = ch.to_json()
    assert out["provenance"] == "identity"
    assert [f["kind"] for f in out["factors"]] == ["Monomial", "Monomial", "ScaledExp"]


def test_divide_recursion_instances():
    r = cl.divide_recursion(Chain(ScaledExp(1.0), EXPM1), 3)
    assert len(r) == 4 and max(r) < 1e-9
    r = cl.divide_recursion(Chain(Monomial(2), ScaledExp(1.0)), 2)
    assert max(r) < 1e-12
    assert cl.divide_recursion(Chain(Monomial(2), ScaledExp(1.0)), 0) == [0.0]


@pytest.mark.parametrize("f", [Chain(ScaledExp(1.0), EXPM1), Chain(Monomial(2), ScaledExp(1.0))])
def test_divide_series_coefficients(f):
    fs, gk = cl.divide_series(f, 3)
    for a, b in zip(fs, gk):
        a, b = a.coeffs[:32], b.coeffs[:32]
        assert np.max(np.abs(a - b)) <= 1e-10 * max(1.0, np.max(np.abs(b)))


def test_product_identity():
    assert cl.product_identity_residual(Chain(ScaledExp(1.0), EXPM1)) < 1e-9
    assert cl.product_identity_residual(Chain(Monomial(2), ScaledExp(1.0))) < 1e-9


def test_asym_compose_example():
    out = cl.asym_compose(AsymptoticSet((2.0,), True, "closed-form"), Affine(1.0), AsymptoticSet((0.0,), True, "closed-form"))
    assert cl.same_set(out, AsymptoticSet((2.0, 1.0), True, "set-algebra"))


def test_calabi_self_iterate():
    A = asymptotic_values(calabi())
    out = cl.asym_iterate(A, calabi(), 1)
    want = [0.886226925452758, -0.886226925452758, CALABI_AT_HALF_SQRT_PI, -CALABI_AT_HALF_SQRT_PI]
    assert len(out.values) == 4
    for w in want:
        assert min(abs(v - w) for v in out.values) < 1e-8


def test_asym_incomplete():
    with pytest.raises(IncompleteInput):
        cl.asym_compose(AsymptoticSet((), False, "closed-form"), Affine(0.0), AsymptoticSet((0.0,), True, "closed-form"))


vals = st.lists(st.complex_numbers(max_magnitude=3.0, allow_nan=False), min_size=1, max_size=4)


@given(vals, vals, st.complex_numbers(max_magnitude=2.0, allow_nan=False))
def test_asym_compose_monotone_idempotent(a, b, shift):
    A = AsymptoticSet(tuple(a), True, "closed-form")
    B = AsymptoticSet(tuple(b), True, "closed-form")
    f = Affine(shift)
    out = cl.asym_compose(A, f, B)
    assert all(min(abs(x - y) for y in out.values) <= 1e-9 for x in A.values)
    again = cl.asym_compose(out, f, B)
    assert cl.same_set(out, again)


def test_koebe_examples():
    r = cl.comp_koebe(list(range(1, 41)), 0.5)
    assert r.ok and r.lhs == pytest.approx(2.0, rel=1e-12) and r.bound == pytest.approx(2.0)
    r = cl.comp_koebe([1] * 40, 0.5)
    assert r.ok and r.lhs == pytest.approx(1.0 + r.tail, rel=1e-12) and abs(r.lhs - 1.0) < 1e-10
    with pytest.raises(SubadditivityViolation):
        cl.comp_koebe([1, 5], 0.5)


def _subadditive_sequences(c, n):
    for f in itertools.product(range(1, c * n + 1), repeat=n - 1):
        seq = (c,) + f
        if all(seq[k] <= c * (k + 1) for k in range(n)):
            try:
                yield cl.CompCounts(c, seq)
            except SubadditivityViolation:
                pass


@pytest.mark.parametrize("c", [1, 2])
def test_koebe_exhaustive_short(c):
    n = 4
    for counts in _subadditive_sequences(c, n):
        for z in (0.3, -0.6, 0.5j, 0.9 * np.exp(1j)):
            assert cl.comp_koebe(counts, z).ok


def test_clunie_examples():
    r = cl.growth_clunie(EXPM1, EXPM1, 0.5, 2.0)
    assert r.c_rho == pytest.approx(0.375)
    assert r.lhs == pytest.approx(CLUNIE_LHS, rel=1e-6)
    assert r.rhs == pytest.approx(CLUNIE_RHS, rel=1e-6)
    assert r.ok
    r = cl.growth_clunie(EXPM1, Affine(0.0), 0.5, 1.0)
    assert r.ok
    with pytest.raises(GNotZeroAtOrigin):
        cl.growth_clunie(EXPM1, ScaledExp(1.0), 0.5, 1.0)


def test_polya_examples():
    r = cl.polya_ratio(ScaledExp(1.0), ScaledExp(1.0), [1, 2, 3])
    assert r.ratios == pytest.approx([math.e, math.e ** 2 / 2, math.e ** 3 / 3], rel=1e-6)
    assert r.increasing
    r = cl.polya_ratio(ScaledExp(1.0), Affine(0.0), [1, 2])
    assert r.ratios == pytest.approx([1.0, 1.0], rel=1e-9)
    r = cl.polya_ratio(ScaledExp(1.0), ScaledExp(1.0), [2])
    assert len(r.ratios) == 1 and r.increasing
