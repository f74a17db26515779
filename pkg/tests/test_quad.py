import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from glspec.core import DomainError, QuadratureError, make_params, monomial, poly_fn
from glspec import density as d
from glspec import quad as q
from glspec.eigen import p_fn
from glspec.coeigen import r_fn


def rule_for(p, m=120):
    return q.build_rule(d.weight_e_ab(p), m)


def test_order_one_classical():
    p = make_params(1, 0)
    r = q.build_rule(d.weight_classical(p, 0.0), 1)
    assert r.nodes[0] == pytest.approx(1.0, rel=1e-14)
    assert r.weights[0] == pytest.approx(1.0, rel=1e-14)


def test_mass_normalization(p_half, p_three_quarter, p_classical):
    for p in (p_half, p_three_quarter, p_classical):
        r = rule_for(p, 80)
        assert float(r.weights.sum()) == pytest.approx(1.0, abs=1e-12)


def test_moment_reproduction_m50(p_half):
    r = rule_for(p_half, 50)
    for k in range(21):
        got = q.integrate(r, lambda x, k=k: x ** k)
        assert got == pytest.approx(d.moment(p_half, k), rel=1e-10), k


def test_moment_reproduction_all_params(p_three_quarter, p_classical):
    for p in (p_three_quarter, p_classical):
        r = rule_for(p, 60)
        for k in range(0, 21, 2):
            got = q.integrate(r, lambda x, k=k: x ** k)
            assert got == pytest.approx(d.moment(p, k), rel=1e-10)


def test_fractional_power_exactness(p_half):
    # co-eigen powers x^(j/alpha) integrate exactly as well
    r = rule_for(p_half, 60)
    a, b = 0.5, 1.0
    for j in range(1, 15):
        got = q.integrate(r, lambda x, j=j: x ** (j / a))
        expect = math.exp(math.lgamma(j + a * b + 1.0) - math.lgamma(a * b + 1.0))
        assert got == pytest.approx(expect, rel=1e-11), j


def test_build_rule_domain(p_half):
    with pytest.raises(DomainError):
        q.build_rule(d.weight_e_ab(p_half), 0)
    with pytest.raises(DomainError):
        q.build_rule(d.weight_e_ab(p_half), 501)
    with pytest.raises(DomainError):
        q.build_rule(d.weight_e_bar(p_half, 0.25), 50)


def test_inner_trivial_and_moment(p_half):
    from glspec.core import const_fn
    r = rule_for(p_half)
    assert q.inner(r, const_fn(), const_fn()) == pytest.approx(1.0, rel=1e-12)
    assert q.inner(r, monomial(1), monomial(1)) == pytest.approx(
        d.moment(p_half, 2), rel=1e-12)


def test_inner_biorthogonal_pair(p_half):
    r = rule_for(p_half)
    assert q.inner(r, p_fn(p_half, 1), r_fn(p_half, 1)) == pytest.approx(
        1.0, rel=1e-10)


def test_inner_error_estimate(p_half):
    r = rule_for(p_half)
    val, err = q.inner_with_error(r, monomial(2), monomial(3))
    assert val == pytest.approx(d.moment(p_half, 5), rel=1e-11)
    assert err < 1e-9
    # a wild integrand trips the two-order check
    with pytest.raises(QuadratureError):
        q.inner(r, lambda x: math.sin(40.0 * x * x), lambda x: 1.0, rtol=1e-12)


def test_gram_identity_double(p_half, p_three_quarter):
    for p in (p_half, p_three_quarter):
        G = q.gram_biorth(p, 8)
        assert np.abs(G - np.eye(9)).max() <= 1e-6


def test_gram_identity_extended(p_half_ext, p_three_quarter_ext):
    for p in (p_half_ext, p_three_quarter_ext):
        G = q.gram_biorth(p, 12)
        assert np.abs(G - np.eye(13)).max() <= 1e-8


def test_gram_trivial_and_classical(p_half, p_classical):
    G0 = q.gram_biorth(p_half, 0)
    assert G0.shape == (1, 1) and G0[0, 0] == pytest.approx(1.0, rel=1e-12)
    G = q.gram_biorth(p_classical, 12)
    assert np.abs(G - np.eye(13)).max() <= 1e-8


@settings(max_examples=15, deadline=None)
@given(st.lists(st.floats(-2.0, 2.0), min_size=1, max_size=5),
       st.lists(st.floats(-2.0, 2.0), min_size=1, max_size=5))
def test_inner_symmetric_bilinear(cf, cg):
    p = make_params(0.5, 1.0)
    r = rule_for(p)
    f, g = poly_fn(cf), poly_fn(cg)
    a = q.inner(r, f, g)
    b = q.inner(r, g, f)
    assert a == pytest.approx(b, rel=1e-12, abs=1e-12)
    two_f = poly_fn([2.0 * c for c in cf])
    assert q.inner(r, two_f, g) == pytest.approx(2.0 * a, rel=1e-12, abs=1e-12)


@settings(max_examples=10, deadline=None)
@given(st.lists(st.floats(-1.0, 1.0), min_size=2, max_size=6),
       st.integers(0, 6))
def test_cauchy_schwarz(coeffs, n):
    p = make_params(0.5, 1.0)
    f = poly_fn(coeffs)
    rn = r_fn(p, n)
    lhs = abs(q.inner_exact(p, f.powers, rn.powers))
    nf = math.sqrt(max(q.inner_exact(p, f.powers, f.powers), 0.0))
    nr = math.sqrt(max(q.inner_exact(p, rn.powers, rn.powers), 0.0))
    assert lhs <= nf * nr * (1.0 + 1e-9) + 1e-12


def test_bessel_inequality(p_half):
    r = rule_for(p_half)
    rep = q.bessel_check(p_half, lambda x: np.exp(-x), 15, r)
    assert rep.ok
    diffs = np.diff(rep.partial_sums)
    assert np.all(diffs >= -1e-15)  # monotone partial sums
    rep2 = q.bessel_check(p_half, monomial(2), 15, r)
    assert rep2.ok
    # f = P_0 case: first coefficient exhausts the norm
    from glspec.core import const_fn
    rep3 = q.bessel_check(p_half, const_fn(), 3, r)
    assert rep3.partial_sums[0] == pytest.approx(rep3.norm2, rel=1e-10)


def test_r_norm_trivial_and_envelope(p_half):
    n0, aux0 = q.r_norm(p_half, 0)
    assert n0 == pytest.approx(1.0, rel=1e-12)
    assert math.isfinite(aux0) and aux0 > 0.0
    n10, _ = q.r_norm(p_half, 10)
    assert 0.0 < math.log(n10) / 10.0 < p_half.t_alpha + 0.1


def test_r_norm_classical_formula():
    p = make_params(1, 0.7)
    for n in (3, 9, 17):
        got, _ = q.r_norm(p, n)
        expect = math.sqrt(math.exp(math.lgamma(n + 1.7) - math.lgamma(n + 1.0)
                                    - math.lgamma(1.7)))
        assert got == pytest.approx(expect, rel=1e-10), n


def test_u_rule_fallback_irrational_alpha():
    # non-rational alpha: u-substitution rule; accuracy degrades gracefully
    p = make_params(1.0 / math.pi, 2.0)
    r = q.build_rule(d.weight_e_ab(p), 160)
    assert float(r.weights.sum()) == pytest.approx(1.0, abs=1e-12)
    got = q.integrate(r, lambda x: x)
    assert got == pytest.approx(d.moment(p, 1), rel=1e-5)
