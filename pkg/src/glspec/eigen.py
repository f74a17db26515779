"""Eigenpolynomial family P_n: coefficients, stable evaluation, derivatives,
and generating-function checks.

    P_n(x) = Gamma(a b + 1) * sum_k (-1)^k C(n,k) x^k / Gamma(a k + a b + 1)

P_0 = 1, P_n(0) = 1, the coefficients alternate in sign, and the family is
not orthogonal for alpha < 1, so there is no three-term recurrence: monomial
coefficients with compensated Horner are the only evaluation route, falling
back to extended precision when the Horner condition number explodes.  At
alpha = 1 evaluation dispatches to the stable classical Laguerre recurrence
rescaled so the constant term is 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import mpmath as mp
import numpy as np
from scipy.special import gammaln

from .core import (COND_THRESHOLD, ConvergenceError, DomainError, GLParams,
                   mp_ctx, monomial, RealFn)
from .specfun import frak_I, cal_I

__all__ = ["PolySeq", "p_coeffs", "p_eval", "p_fn", "jensen_check",
           "p_growth_bound_check", "laguerre_eval", "p_sup"]


@dataclass(frozen=True)
class PolySeq:
    """Coefficient table c_{n,k} in sign/log-magnitude form plus rounded floats."""

    params: GLParams
    degree: int
    sign: np.ndarray      # (N+1, N+1) int8
    logmag: np.ndarray    # (N+1, N+1) float64, -inf where zero
    coeff: np.ndarray     # (N+1, N+1) float64 (rounded)


@lru_cache(maxsize=64)
def p_coeffs(params: GLParams, N: int) -> PolySeq:
    """Coefficients of P_0 .. P_N in the monomial basis."""
    if N < 0:
        raise DomainError("degree must be >= 0")
    a, b = params.alpha, params.beta
    lg0 = gammaln(a * b + 1.0)
    sign = np.zeros((N + 1, N + 1), dtype=np.int8)
    logmag = np.full((N + 1, N + 1), -np.inf)
    lbin = np.zeros((N + 1, N + 1))
    for n in range(N + 1):
        for k in range(n + 1):
            lbin[n, k] = (gammaln(n + 1.0) - gammaln(k + 1.0)
                          - gammaln(n - k + 1.0))
    for n in range(N + 1):
        for k in range(n + 1):
            sign[n, k] = 1 if k % 2 == 0 else -1
            logmag[n, k] = lg0 + lbin[n, k] - gammaln(a * k + a * b + 1.0)
    coeff = np.where(np.isfinite(logmag), sign * np.exp(logmag), 0.0)
    return PolySeq(params, N, sign, logmag, coeff)


def _coeffs_mp(params: GLParams, n: int):
    """Exact-argument coefficient list of P_n at current mp precision."""
    am, bm = mp.mpf(params.alpha), mp.mpf(params.beta)
    g0 = mp.gamma(am * bm + 1)
    return [g0 * (-1) ** k * mp.binomial(n, k) / mp.gamma(am * k + am * bm + 1)
            for k in range(n + 1)]


def laguerre_eval(n: int, beta: float, x: float, derivative: int = 0) -> float:
    """Classical generalized Laguerre value by the three-term recurrence.

    d/dx L_n^(b) = -L_{n-1}^(b+1) handles derivatives recursively.
    """
    if derivative > 0:
        if n == 0:
            return 0.0
        return -laguerre_eval(n - 1, beta + 1.0, x, derivative - 1)
    if n == 0:
        return 1.0
    lm1, l = 1.0, 1.0 + beta - x
    for k in range(1, n):
        lm1, l = l, ((2.0 * k + 1.0 + beta - x) * l - (k + beta) * lm1) / (k + 1.0)
    return l


def _horner_compensated(coeffs: np.ndarray, x: float):
    """Horner value plus the classical running condition estimate."""
    p = 0.0
    cond = 0.0
    ax = abs(x)
    for c in coeffs[::-1]:
        p = p * x + c
        cond = cond * ax + abs(c)
    return p, (cond / abs(p) if p != 0.0 else math.inf)


def p_eval(seq: PolySeq, n: int, x: float, p: int = 0) -> float:
    """p-th derivative of P_n at x.

    Derivatives reduce to the (beta + p) family through the index-shift
    identity, so only plain evaluations remain.
    """
    if n > seq.degree:
        raise IndexError(f"n = {n} exceeds table degree {seq.degree}")
    if p < 0:
        raise DomainError("derivative order must be >= 0")
    params = seq.params
    if p > 0:
        if p > n:
            return 0.0
        a, b = params.alpha, params.beta
        from .core import make_params
        shifted = make_params(a, b + p, params.precision, params.eps)
        fac = ((-1.0) ** p) * math.exp(
            gammaln(n + 1.0) - gammaln(n - p + 1.0)
            + gammaln(a * b + 1.0) - gammaln(a * b + a * p + 1.0))
        return fac * p_eval(p_coeffs(shifted, n - p), n - p, x, 0)
    if params.is_classical:
        b2 = math.exp(gammaln(n + 1.0) + gammaln(params.beta + 1.0)
                      - gammaln(n + params.beta + 1.0))
        return b2 * laguerre_eval(n, params.beta, x)
    val, cond = _horner_compensated(seq.coeff[n, :n + 1], x)
    if cond <= COND_THRESHOLD and params.precision.is_double:
        return val
    dps = max(params.precision.dps, 17 + int(math.log10(max(cond, 10.0))))
    with mp_ctx(dps):
        cs = _coeffs_mp(params, n)
        xm = mp.mpf(x)
        acc = mp.mpf(0)
        for c in reversed(cs):
            acc = acc * xm + c
        return float(acc)


def p_fn(params: GLParams, n: int) -> RealFn:
    """P_n wrapped as a RealFn with exact derivatives and power expansion."""
    seq = p_coeffs(params, n)
    pw = tuple((float(seq.coeff[n, k]), float(k)) for k in range(n + 1))
    return RealFn(
        lambda x: p_eval(seq, n, x, 0),
        d1=lambda x: p_eval(seq, n, x, 1),
        d2=lambda x: p_eval(seq, n, x, 2),
        description=f"P_{n}",
        powers=pw,
    )


def p_sup(params: GLParams, n: int, lo: float = 0.0, hi: float = 10.0,
          grid: int = 33) -> float:
    """Grid sup of |P_n| on [lo, hi], used by truncation estimates."""
    seq = p_coeffs(params, n)
    return max(abs(p_eval(seq, n, x)) for x in np.linspace(lo, hi, grid))


def jensen_check(params: GLParams, x: float, t: float, N: int) -> float:
    """|exp(t) I(x t) - sum_{n<=N} P_n(-x) t^n / n!|.

    Both sides are positive-term series, so the comparison is well
    conditioned; a ConvergenceError signals that N leaves a visible tail.
    """
    a, b = params.alpha, params.beta
    if t < 0.0 or x < 0.0:
        raise DomainError("jensen_check expects x >= 0 and t >= 0")
    lhs = math.exp(t) * cal_I(params, x * t).value.real
    lg0 = gammaln(a * b + 1.0)
    acc = 0.0
    last = 0.0
    for n in range(N + 1):
        # P_n(-x) = Gamma(ab+1) sum_k C(n,k) x^k / Gamma(ak+ab+1), positive
        pn = sum(math.exp(lg0 + gammaln(n + 1.0) - gammaln(k + 1.0)
                          - gammaln(n - k + 1.0) - gammaln(a * k + a * b + 1.0)
                          + (k * math.log(x) if x > 0.0 else 0.0))
                 for k in range((n + 1) if x > 0.0 else 1))
        last = pn * (math.exp(n * math.log(t) - gammaln(n + 1.0)) if t > 0.0
                     else (1.0 if n == 0 else 0.0))
        acc += last
    if last > 1e-11 * max(abs(lhs), 1.0):
        raise ConvergenceError(f"jensen_check: N = {N} leaves tail term {last:.2e}")
    return abs(lhs - acc)


def p_growth_bound_check(params: GLParams, n: int, x: float, p: int = 0) -> dict:
    """Ratio |P_n^(p)(x)| / (n^{p+1/2} exp(frak_t (n|x|)^{1/(a+1)})).

    The growth bound hides an unspecified constant, so callers assert
    boundedness of the ratio along n, not a particular value.
    """
    seq = p_coeffs(params, n)
    val = p_eval(seq, n, x, p)
    a = params.alpha
    env = math.exp((p + 0.5) * math.log(n)
                   + params.frak_t * (n * abs(x)) ** (1.0 / (1.0 + a)))
    return {"n": n, "x": x, "p": p, "value": val, "envelope": env,
            "ratio": abs(val) / env}
