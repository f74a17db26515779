import math

import numpy as np
import pytest

from glspec.core import DomainError, make_params
from glspec import coeigen as ce
from glspec import density as d

from oracles import classical_laguerre, richardson_derivative, w_density_mp


def test_r0_is_one(p_half):
    assert ce.r_eval_bell(p_half, 0, 0.7) == 1.0
    assert ce.r_eval_bell(p_half, 0, 5.0) == 1.0


def test_classical_dispatch():
    p = make_params(1, 0)
    for x in (0.2, 1.0, 3.5):
        assert ce.r_eval_bell(p, 1, x) == pytest.approx(1.0 - x, rel=1e-14)
        assert ce.r_eval_bell(p, 4, x) == pytest.approx(
            classical_laguerre(4, 0.0, x), rel=1e-12)


def test_r1_closed_form(p_half):
    # R_1(x) = beta + 1/alpha - x^(1/alpha)/alpha
    for x in (0.3, 1.0, 2.0):
        assert ce.r_eval_bell(p_half, 1, x) == pytest.approx(
            3.0 - 2.0 * x * x, rel=1e-13)


def test_bell_vs_wright_cross(p_half):
    w = d.weight_e_ab(p_half)
    for n in (1, 2, 4):
        for x in (0.2, 1.0):
            bell = ce.r_eval_bell(p_half, n, x) * d.weight_eval(w, x)
            assert ce.w_eval_wright(p_half, n, 0, x) == pytest.approx(
                bell, rel=1e-10)


def test_w0_is_the_weight(p_half):
    w = d.weight_e_ab(p_half)
    for x in (0.4, 1.7):
        assert ce.w_eval_wright(p_half, 0, 0, x) == pytest.approx(
            d.weight_eval(w, x), rel=1e-13)


def test_w_classical_value():
    p = make_params(1, 0)
    assert ce.w_eval_wright(p, 2, 0, 1.0) == pytest.approx(
        -0.5 * math.exp(-1.0), rel=1e-13)


def test_w_oracle_highprec(p_half):
    # frozen from the 60-digit direct summation
    assert ce.w_eval_wright(p_half, 2, 0, 1.5) == pytest.approx(
        -2.2076434937136202, rel=1e-11)
    got = ce.w_eval_wright(p_half, 5, 0, 3.0)
    assert got == pytest.approx(w_density_mp(0.5, 1.0, 5, 0, 3.0), rel=1e-9)


def test_w_derivative_finite_difference(p_half, p_three_quarter):
    got = ce.w_eval_wright(p_half, 3, 1, 0.8)
    fd = richardson_derivative(lambda t: ce.w_eval_wright(p_half, 3, 0, t),
                               0.8, 1, h0=1e-2)
    assert got == pytest.approx(fd, rel=1e-7)
    got = ce.w_eval_wright(p_three_quarter, 30, 1, 0.2)
    fd = richardson_derivative(
        lambda t: ce.w_eval_wright(p_three_quarter, 30, 0, t), 0.2, 1, h0=2e-3)
    assert got == pytest.approx(fd, rel=1e-5)


def test_w_classical_derivative():
    p = make_params(1, 0)
    x = 1.3
    got = ce.w_eval_wright(p, 2, 1, x)
    fd = richardson_derivative(lambda t: ce.w_eval_wright(p, 2, 0, t), x, 1)
    assert got == pytest.approx(fd, rel=1e-9)


def test_mellin_matches_weight_at_n0(p_half):
    w = d.weight_e_ab(p_half)
    assert ce.w_eval_mellin(p_half, 0, 1.0) == pytest.approx(
        d.weight_eval(w, 1.0), rel=1e-12)


def test_representation_cross_agreement(p_half_ext, p_three_quarter_ext):
    # three independent paths agree pointwise (extended precision)
    for p in (p_half_ext, p_three_quarter_ext):
        w = d.weight_e_ab(p)
        for n in (2, 5, 8):
            for x in (0.1, 0.5, 1.0, 2.0, 5.0):
                bell = ce.r_eval_bell(p, n, x) * d.weight_eval(w, x)
                wr = ce.w_eval_wright(p, n, 0, x)
                me = ce.w_eval_mellin(p, n, x)
                scale = max(abs(bell), 1e-280)
                assert abs(bell - wr) / scale < 1e-7, (p.alpha, n, x)
                assert abs(bell - me) / scale < 1e-7, (p.alpha, n, x)


def test_mellin_specific_points(p_half, p_three_quarter):
    w = d.weight_e_ab(p_half)
    bell = ce.r_eval_bell(p_half, 2, 1.5) * d.weight_eval(w, 1.5)
    assert ce.w_eval_mellin(p_half, 2, 1.5) == pytest.approx(bell, rel=1e-8)
    w2 = d.weight_e_ab(p_three_quarter)
    bell2 = ce.r_eval_bell(p_three_quarter, 5, 3.0) * d.weight_eval(w2, 3.0)
    assert ce.w_eval_mellin(p_three_quarter, 5, 3.0) == pytest.approx(
        bell2, rel=1e-7)


def test_contour_abscissa_domain(p_half):
    with pytest.raises(DomainError):
        ce.w_eval_mellin(p_half, 1, 1.0, ce.ContourSpec(-4.0, 0.1, 50.0))


def test_rodrigues_oracle(p_half):
    # n-fold Richardson differentiation of x^n e(x) against n! W_n(x)
    w = d.weight_e_ab(p_half)

    for n in (1, 2, 3, 4):
        x = 1.1
        h = 1e-2
        num = richardson_derivative(
            lambda t, n=n: t ** n * d.weight_eval(w, t), x, n, h0=h)
        assert num == pytest.approx(
            math.factorial(n) * ce.w_eval_wright(p_half, n, 0, x), rel=1e-5), n


def test_crude_bound_domain_and_ratios(p_half, p_three_quarter):
    with pytest.raises(DomainError):
        ce.w_crude_bound_check(p_half, 20, 0, 100.0)
    rr = [ce.w_crude_bound_check(p_half, n, 0, 0.5)["ratio"]
          for n in (20, 40, 80)]
    assert all(math.isfinite(r) and r >= 0.0 for r in rr)
    assert max(rr) <= 1.0  # bounded envelope along the tested sequence
    r = ce.w_crude_bound_check(p_three_quarter, 30, 1, 0.2)
    assert math.isfinite(r["ratio"])


def test_trivial_crude_bound_small_n(p_half):
    r = ce.w_crude_bound_check(p_half, 5, 0, 0.3)
    assert math.isfinite(r["ratio"])
