"""Co-eigenfunctions R_n and densities W_n = R_n * e, through three
independent computational paths that cross-validate each other:

  bell     finite expansion of R_n in powers x^(j/alpha) with partial-Bell
           coefficients (exact finite formula; best at small x)
  wright   term-by-term differentiated exponential series for W_n
           (entire; alternating, so conditioning degrades with n x)
  mellin   trapezoid Mellin-Barnes inversion on a vertical contour
           (oscillatory but cancellation-free)

R_n is normalised by the unsigned weighted Rodrigues form
R_n = (1/(n! e)) d^n/dx^n (x^n e); then <P_n, R_m> = delta_{nm} and
R_n = L_n^(beta) classical at alpha = 1.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional

import mpmath as mp
import numpy as np
from scipy.special import gammaln
from scipy.special import loggamma as sp_cloggamma

from .core import (COND_THRESHOLD, ContourError, DomainError, GLParams,
                   RealFn, mp_ctx)
from .density import weight_e_ab, weight_eval
from .eigen import laguerre_eval
from .specfun import (SeriesResult, bell_table, bell_table_mp, eval_series,
                      gamma_sign, log_abs_gamma)

__all__ = ["r_coeffs", "r_eval_bell", "r_fn", "w_eval_wright", "w_eval_mellin",
           "w_eval", "w_fn", "w_crude_bound_check", "ContourSpec"]


# --------------------------------------------------------------------------
# Bell-polynomial path
# --------------------------------------------------------------------------

@lru_cache(maxsize=256)
def r_coeffs(params: GLParams, n: int) -> np.ndarray:
    """Coefficients c_j with R_n(x) = sum_j c_j x^(j/alpha), j = 0..n.

    c_j = (1/n!) sum_{k>=j} C(n,k) [G(n+b+1/a)/G(k+b+1/a)] (-1)^(k+j) B_{k,j}.
    At alpha = 1 these are the classical Laguerre monomial coefficients.
    """
    if n < 0:
        raise DomainError("order must be >= 0")
    a, b = params.alpha, params.beta
    if params.is_classical:
        out = np.array([(-1.0) ** k * math.exp(
            gammaln(n + b + 1.0) - gammaln(k + b + 1.0) - gammaln(n - k + 1.0)
            - gammaln(k + 1.0)) for k in range(n + 1)])
        return out
    out = np.zeros(n + 1)
    if n == 0:
        out[0] = 1.0
        return out
    bt = bell_table(params, n)
    lgtop = gammaln(n + b + 1.0 / a)
    lbin = [gammaln(n + 1.0) - gammaln(k + 1.0) - gammaln(n - k + 1.0)
            for k in range(n + 1)]
    for j in range(n + 1):
        s = 0.0
        kmin = j if j > 0 else 0
        for k in range(kmin, n + 1):
            B = bt.B(k, j)
            if B == 0.0:
                continue
            s += (math.exp(lbin[k] + lgtop - gammaln(k + b + 1.0 / a))
                  * (-1.0) ** (k + j) * B)
        out[j] = s / 1.0
    out /= math.exp(gammaln(n + 1.0))
    return out


def r_coeffs_mp(params: GLParams, n: int):
    """mpmath variant of r_coeffs at the current working precision."""
    am, bm = mp.mpf(params.alpha), mp.mpf(params.beta)
    if params.is_classical:
        return [(-1) ** k * mp.gamma(n + bm + 1) / (mp.gamma(k + bm + 1)
                * mp.factorial(n - k) * mp.factorial(k)) for k in range(n + 1)]
    if n == 0:
        return [mp.mpf(1)]
    _, T = bell_table_mp(params, n)
    top = mp.gamma(n + bm + 1 / am)
    out = []
    for j in range(n + 1):
        s = mp.mpf(0)
        for k in range(j if j else 0, n + 1):
            B = T.get((k, j), mp.mpf(1) if (k, j) == (0, 0) else mp.mpf(0))
            if B == 0:
                continue
            s += mp.binomial(n, k) * top / mp.gamma(k + bm + 1 / am) \
                * (-1) ** (k + j) * B
        out.append(s / mp.factorial(n))
    return out


def r_eval_bell(params: GLParams, n: int, x: float) -> float:
    """R_n(x) from the finite power expansion in y = x^(1/alpha)."""
    if x <= 0.0:
        raise DomainError("co-eigenfunctions are evaluated on x > 0")
    if params.is_classical:
        return laguerre_eval(n, params.beta, x)
    cs = r_coeffs(params, n)
    y = x ** (1.0 / params.alpha)
    p = 0.0
    cond = 0.0
    for c in cs[::-1]:
        p = p * y + c
        cond = cond * y + abs(c)
    if p != 0.0 and cond / abs(p) <= COND_THRESHOLD and params.precision.is_double:
        return p
    condr = cond / abs(p) if p != 0.0 else 1e40
    dps = max(params.precision.dps, 20 + int(math.log10(max(condr, 10.0))))
    with mp_ctx(dps):
        cs_mp = r_coeffs_mp(params, n)
        ym = mp.mpf(x) ** (1 / mp.mpf(params.alpha))
        acc = mp.mpf(0)
        for c in reversed(cs_mp):
            acc = acc * ym + c
        return float(acc)


def r_fn(params: GLParams, n: int) -> RealFn:
    """R_n as a RealFn carrying its generalized power expansion."""
    inv = 1.0 / params.alpha
    if params.is_classical:
        cs = r_coeffs(params, n)
        pw = tuple((float(c), float(j)) for j, c in enumerate(cs))
    else:
        cs = r_coeffs(params, n)
        pw = tuple((float(c), j * inv) for j, c in enumerate(cs))
    return RealFn(lambda x: r_eval_bell(params, n, x),
                  description=f"R_{n}", powers=pw)


# --------------------------------------------------------------------------
# Wright-series path for W_n and derivatives
# --------------------------------------------------------------------------

def w_eval_wright(params: GLParams, n: int, q: int = 0, x: float = 1.0,
                  full: bool = False):
    """q-th derivative of W_n at x > 0 from the differentiated series

    W_n^(q)(x) = pref * sum_k (-1)^k G(k/a+n+ba+1) rg(k/a+ba+1-q) x^(k/a+ba-q)/k!

    with ba = beta + 1/alpha - 1 and pref = 1/(n! alpha Gamma(alpha beta+1)).
    """
    if x <= 0.0:
        raise DomainError("W_n is evaluated on x > 0")
    if q < 0 or n < 0:
        raise DomainError("orders must be >= 0")
    a, b = params.alpha, params.beta
    ba = params.beta_alpha
    if params.is_classical:
        # W_n = L_n^(beta) e_beta; finite Leibniz expansion over derivatives
        w = weight_e_ab(params)
        acc = 0.0
        for i in range(q + 1):
            binom = math.exp(gammaln(q + 1.0) - gammaln(i + 1.0) - gammaln(q - i + 1.0))
            acc += binom * laguerre_eval(n, b, x, derivative=i) * _e_classical_deriv(params, q - i, x)
        return (acc, None) if full else acc
    lpref = -(gammaln(n + 1.0) + math.log(a) + gammaln(a * b + 1.0))
    lx = math.log(x)
    A = n + ba + 1.0
    Bq = ba + 1.0 - q

    def fterm(k):
        ka = k / a
        w = ka + Bq
        sgn = (-1.0) ** k
        if w > 0.0:
            lt = gammaln(ka + A) - gammaln(w)
        elif w == round(w):
            return 0.0
        else:
            sgn *= gamma_sign(w)
            lt = gammaln(ka + A) - log_abs_gamma(w)
        lt += (ka + ba - q) * lx - gammaln(k + 1.0) + lpref
        return sgn * math.exp(lt) if lt < 700.0 else sgn * math.inf

    mp_state = {}

    def mpterm(k):
        st = mp_state.get(mp.mp.dps)
        if st is None:
            am, bm = mp.mpf(a), mp.mpf(b)
            bam = bm + 1 / am - 1
            pref = 1 / (mp.factorial(n) * am * mp.gamma(am * bm + 1))
            st = (am, bam, pref, mp.mpf(x))
            mp_state[mp.mp.dps] = st
        am, bam, pref, xm = st
        ka = mp.mpf(k) / am
        return (pref * (-1) ** k * mp.gamma(ka + n + bam + 1)
                * mp.rgamma(ka + bam + 1 - q) * xm ** (ka + bam - q)
                / mp.factorial(k))

    res = eval_series(fterm, mpterm, params, note=f"w_wright(n={n},q={q})")
    return (res.value.real, res) if full else res.value.real


def _e_classical_deriv(params: GLParams, q: int, x: float) -> float:
    """q-th derivative of the classical weight x^b e^{-x} / Gamma(b+1)."""
    b = params.beta
    acc = 0.0
    for k in range(q + 1):
        binom = math.exp(gammaln(q + 1.0) - gammaln(k + 1.0) - gammaln(q - k + 1.0))
        # d^k/dx^k x^b = G(b+1)/G(b-k+1) x^(b-k); d^(q-k) e^{-x} = (-1)^(q-k) e^{-x}
        w = b - k + 1.0
        if w <= 0.0 and w == round(w):
            continue
        term = binom * gamma_sign(w) * math.exp(
            gammaln(b + 1.0) - log_abs_gamma(w) + (b - k) * math.log(x) - x
            - gammaln(b + 1.0))
        acc += term * (-1.0) ** (q - k)
    return acc


# --------------------------------------------------------------------------
# Mellin-Barnes path
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class ContourSpec:
    """Vertical-contour parameters for the Mellin inversion of W_n."""

    a: float                  # abscissa, > max(0, 1 - beta - 1/alpha)
    h: float                  # trapezoid step
    height: float             # truncation height B


def default_contour(params: GLParams, n: int = 0) -> ContourSpec:
    a0 = max(1.0, 1.5 - params.beta - 1.0 / params.alpha)
    h = 0.05 / params.alpha
    # height solves a pi B / 2 - n log B = 18 log 10 + 6 (polynomial factor
    # from the gamma ratio slows the exponential decay)
    B = 2.0 * 18.0 * math.log(10.0) / (params.alpha * math.pi)
    for _ in range(4):
        B = 2.0 * (18.0 * math.log(10.0) + 6.0 + n * math.log(max(B, 3.0))) \
            / (params.alpha * math.pi)
    return ContourSpec(a0, h, B)


def w_eval_mellin(params: GLParams, n: int, x: float,
                  contour: Optional[ContourSpec] = None) -> float:
    """W_n(x) by trapezoid quadrature of the Mellin-Barnes inversion

        W_n(x) = (-1)^n/(2 pi n! G(ab+1)) Int x^{-s} prod_{j=1}^n (s-j)
                 * Gamma(alpha s - alpha + alpha beta + 1) dt,  s = a + i t.

    The gamma ratio G(s)/G(s-n) is the degree-n polynomial prod (s-j), so the
    integrand has no poles on the contour.  Raises ContourError when the
    integrand fails its decay estimate at the truncation height.
    """
    if x <= 0.0:
        raise DomainError("W_n is evaluated on x > 0")
    a, b = params.alpha, params.beta
    if contour is None:
        contour = default_contour(params, n)
    if contour.a <= max(0.0, 1.0 - b - 1.0 / a):
        raise DomainError("contour abscissa left of the analyticity strip")
    t = np.arange(0.0, contour.height, contour.h)
    s = contour.a + 1j * t
    lv = -s * math.log(x) + sp_cloggamma(a * s - a + a * b + 1.0)
    with np.errstate(divide="ignore"):
        for j in range(1, n + 1):
            lv = lv + np.log(s - j)
    vals = np.exp(lv)
    peak = float(np.max(np.abs(vals)))
    if abs(vals[-1]) > 1e-12 * peak:
        raise ContourError("Mellin contour integrand not decayed at height B; "
                           "increase height or adjust the abscissa")
    vals[0] *= 0.5
    integral = 2.0 * float(np.sum(vals.real)) * contour.h
    pref = (-1.0) ** n / (2.0 * math.pi) * math.exp(-gammaln(n + 1.0)
                                                    - gammaln(a * b + 1.0))
    return pref * integral


# --------------------------------------------------------------------------
# Dispatcher and wrappers
# --------------------------------------------------------------------------

def w_eval(params: GLParams, n: int, x: float, q: int = 0) -> float:
    """Default W_n^(q)(x) evaluation path.

    Small arguments go through the finite Bell expansion (q = 0), moderate
    ones through the differentiated series; the series escalates its own
    precision when its conditioning explodes, which is the regime where the
    Mellin path serves as the cancellation-free cross-check.
    """
    if q == 0 and x <= 1.0:
        w = weight_e_ab(params)
        return r_eval_bell(params, n, x) * weight_eval(w, x)
    return w_eval_wright(params, n, q, x)


def w_fn(params: GLParams, n: int, q: int = 0) -> RealFn:
    return RealFn(lambda x: w_eval(params, n, x, q), description=f"W_{n}^({q})")


def w_crude_bound_check(params: GLParams, n: int, q: int, x: float) -> dict:
    """Ratio of |W_n^(q)(x)| to its stretched-exponential envelope.

    Valid on 0 < x < exp(-2 a) ((1+a)/a)^a n^a; DomainError outside.
    """
    a, b = params.alpha, params.beta
    xmax = math.exp(-2.0 * a) * ((1.0 + a) / a) ** a * n ** a
    if not (0.0 < x < xmax):
        raise DomainError(f"x must lie in (0, {xmax:.4g}) for n = {n}")
    val = w_eval_wright(params, n, q, x)
    expo = b + 1.0 / a - q
    env = math.exp(expo * math.log(x)
                   + (abs(b + 1.0 / a - 1.0 - q) + 2.0) * math.log(max(n, 2))
                   + params.bar_frak_t * (n * x) ** (1.0 / (a + 1.0)))
    return {"n": n, "q": q, "x": x, "value": val, "envelope": env,
            "ratio": abs(val) / env}
