import math

import numpy as np
import pytest

from glspec.core import make_params
from glspec import eigen as eg
from glspec.quad import inner_exact

from oracles import classical_laguerre, richardson_derivative


def test_p0_is_one(p_half):
    seq = eg.p_coeffs(p_half, 0)
    assert seq.coeff[0, 0] == 1.0
    assert eg.p_eval(seq, 0, 3.7) == 1.0


def test_p1_closed_form(p_half):
    seq = eg.p_coeffs(p_half, 1)
    for x in (0.0, 0.5, 2.0):
        assert eg.p_eval(seq, 1, x) == pytest.approx(1.0 - x / p_half.d_ab,
                                                     rel=1e-14)


def test_classical_coefficients():
    p = make_params(1, 0)
    seq = eg.p_coeffs(p, 4)
    for n in range(5):
        for k in range(n + 1):
            expect = (-1.0) ** k * math.comb(n, k) / math.factorial(k)
            assert seq.coeff[n, k] == pytest.approx(expect, rel=1e-13)


def test_constant_term_and_sign_alternation(p_half, p_three_quarter):
    for p in (p_half, p_three_quarter):
        seq = eg.p_coeffs(p, 12)
        for n in range(13):
            assert seq.coeff[n, 0] == pytest.approx(1.0, rel=1e-14)
            signs = np.sign(seq.coeff[n, :n + 1])
            assert all(signs == [(-1.0) ** k for k in range(n + 1)])


def test_p_eval_classical_oracle():
    p = make_params(1, 0)
    seq = eg.p_coeffs(p, 6)
    # beta = 0: constant-term normalisation is the classical one
    assert eg.p_eval(seq, 2, 1.0) == pytest.approx(-0.5, rel=1e-13)
    for n in (1, 3, 6):
        for x in (0.3, 1.7, 6.2):
            assert eg.p_eval(seq, n, x) == pytest.approx(
                classical_laguerre(n, 0.0, x), rel=1e-12)


def test_p_eval_classical_beta():
    p = make_params(1, 1.5)
    seq = eg.p_coeffs(p, 5)
    for n in (1, 4):
        b2 = math.exp(math.lgamma(n + 1.0) + math.lgamma(2.5)
                      - math.lgamma(n + 2.5))
        for x in (0.5, 2.0):
            assert eg.p_eval(seq, n, x) == pytest.approx(
                b2 * classical_laguerre(n, 1.5, x), rel=1e-12)


def test_derivative_matches_finite_difference(p_half):
    seq = eg.p_coeffs(p_half, 3)
    x = 0.7
    fd = richardson_derivative(lambda t: eg.p_eval(seq, 3, t), x, 1)
    assert eg.p_eval(seq, 3, x, 1) == pytest.approx(fd, rel=1e-9)
    fd2 = richardson_derivative(lambda t: eg.p_eval(seq, 3, t), x, 2)
    assert eg.p_eval(seq, 3, x, 2) == pytest.approx(fd2, rel=1e-7)


def test_derivative_shift_consistency_classical():
    # d/dx L_n = -L_{n-1}^(1): classical cross-check of the shift identity
    p = make_params(1, 0)
    seq = eg.p_coeffs(p, 4)
    for x in (0.4, 1.3):
        assert eg.p_eval(seq, 4, x, 1) == pytest.approx(
            -classical_laguerre(3, 1.0, x), rel=1e-12)


def test_index_error(p_half):
    seq = eg.p_coeffs(p_half, 3)
    with pytest.raises(IndexError):
        eg.p_eval(seq, 4, 1.0)


def test_jensen_generating_function(p_half):
    assert eg.jensen_check(p_half, 0.0, 0.5, 40) <= 1e-12
    assert eg.jensen_check(p_half, 1.0, 0.5, 40) <= 1e-10
    p1 = make_params(1, 0)
    assert eg.jensen_check(p1, 2.0, 1.0, 60) <= 1e-10


def test_growth_bound_ratios(p_half):
    ratios = [eg.p_growth_bound_check(p_half, n, 1.0, 0)["ratio"]
              for n in (20, 40, 80)]
    assert all(math.isfinite(r) for r in ratios)
    assert ratios == sorted(ratios, reverse=True)  # non-increasing along n
    assert abs(eg.p_eval(eg.p_coeffs(p_half, 20), 20, 0.0)) == 1.0 <= 20 ** 0.5
    p1 = make_params(1, 0)
    assert math.isfinite(eg.p_growth_bound_check(p1, 50, 2.0, 1)["ratio"])


def test_non_orthogonality(p_half):
    from glspec.eigen import p_fn
    g12 = inner_exact(p_half, p_fn(p_half, 1).powers, p_fn(p_half, 2).powers)
    assert abs(g12) > 1e-6


def test_eval_stability_large_n(p_half):
    # compensated Horner against the mp coefficients route
    import mpmath as mp
    seq = eg.p_coeffs(p_half, 40)
    x = 9.5
    got = eg.p_eval(seq, 40, x)
    with mp.workdps(60):
        cs = eg._coeffs_mp(p_half, 40)
        acc = mp.mpf(0)
        for c in reversed(cs):
            acc = acc * mp.mpf(x) + c
        ref = float(acc)
    assert got == pytest.approx(ref, rel=1e-7)
