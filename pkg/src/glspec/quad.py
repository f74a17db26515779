"""Quadrature against the invariant density, inner products, norms,
biorthogonality matrices, and Bessel-inequality checks.

For rational alpha = p/q the substitution v = x**(1/p) turns every power
x**k (eigenpolynomials) and x**(j/alpha) (co-eigenfunctions) into an integer
power of v, and the weight into p * v**(p b + q - 1) exp(-v**q).  A Gauss
rule for that weight -- three-term recurrence by the discretized Stieltjes
procedure, nodes and weights by Golub-Welsch -- therefore integrates every
eigen/co-eigen product exactly up to degree 2m-1 in v.  Irrational alpha
falls back to the u = x**(1/alpha) generalized Gauss-Laguerre rule.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Optional

import mpmath as mp
import numpy as np
from scipy.linalg import eigh_tridiagonal
from scipy.special import gammaln, roots_legendre

from .core import (DomainError, GLParams, QuadratureError, RealFn, mp_ctx)
from .density import Weight, weight_classical, weight_e_ab
from .eigen import p_coeffs, p_eval, p_fn
from .coeigen import r_coeffs, r_coeffs_mp, r_fn

__all__ = ["QuadRule", "build_rule", "integrate", "inner", "inner_with_error",
           "gram_biorth", "bessel_check", "r_norm", "inner_exact"]

_MAX_ORDER = 500


@dataclass(frozen=True)
class QuadRule:
    """Nodes/weights for integration of f against a weight on (0, inf).

    ``nodes`` live in x-space; ``weights`` include the weight normalisation,
    so sum(weights) equals the weight's total mass (1 for the invariant
    density).  ``half`` is the order-m/2 rule used for error estimates.
    """

    weight: Weight
    nodes: np.ndarray
    weights: np.ndarray
    order: int
    half: Optional["QuadRule"] = None


def _rational_alpha(alpha: float):
    fr = Fraction(alpha).limit_denominator(64)
    if abs(float(fr) - alpha) < 1e-12 and fr.denominator <= 64:
        return fr.numerator, fr.denominator
    return None


def _classical_laguerre_rule(b: float, m: int):
    """Golub-Welsch from the generalized Laguerre Jacobi matrix."""
    k = np.arange(m, dtype=float)
    diag = 2.0 * k + b + 1.0
    off = np.sqrt(k[1:] * (k[1:] + b))
    vals, vecs = eigh_tridiagonal(diag, off)
    wts = vecs[0, :] ** 2  # relative weights; total mass folded in later
    return vals, wts


def _stieltjes_rule(p: int, q: int, beta: float, m: int, refine: int = 1):
    """Gauss rule for the weight p v^(p beta + q - 1) exp(-v^q) on (0, inf).

    Discretized Stieltjes with normalized polynomials on a composite
    Legendre grid, then Golub-Welsch.
    """
    theta = p * beta + q - 1.0
    V = 720.0 ** (1.0 / q)
    deg = 48 * refine
    npanel = 60 * refine
    xl, wl = roots_legendre(deg)
    edges = np.concatenate([[0.0], np.geomspace(V * 1e-4, V, npanel)])
    nodes, wts = [], []
    for lo, hi in zip(edges[:-1], edges[1:]):
        nodes.append(0.5 * (hi - lo) * xl + 0.5 * (hi + lo))
        wts.append(0.5 * (hi - lo) * wl)
    nodes = np.concatenate(nodes)
    wts = np.concatenate(wts) * p * np.power(nodes, theta) * np.exp(-np.power(nodes, q))
    mu0 = float(wts.sum())
    ak = np.zeros(m)
    sb = np.zeros(m)
    pkm1 = np.zeros_like(nodes)
    pk = np.full_like(nodes, 1.0 / math.sqrt(mu0))
    for k in range(m):
        ak[k] = float(wts @ (nodes * pk * pk))
        r = (nodes - ak[k]) * pk - (sb[k] if k > 0 else 0.0) * pkm1
        nr = math.sqrt(float(wts @ (r * r)))
        if k + 1 < m:
            sb[k + 1] = nr
        pkm1, pk = pk, r / nr
    vals, vecs = eigh_tridiagonal(ak, sb[1:])
    return vals, mu0 * (vecs[0, :] ** 2), mu0


def _check_v_moments(vn, wn, p, q, beta, m) -> float:
    worst = 0.0
    for r in range(0, min(2 * m - 1, 40) + 1):
        exact = (p / q) * math.exp(gammaln((p * beta + q + r) / q))
        got = float(wn @ np.power(vn, r))
        worst = max(worst, abs(got - exact) / exact)
    return worst


@lru_cache(maxsize=32)
def build_rule(w: Weight, m: int) -> QuadRule:
    """Quadrature rule of order m for the given weight.

    DomainError for m outside [1, 500] and for the growing auxiliary weight,
    which is handled by adaptive quadrature in ``r_norm`` instead.
    """
    if not (1 <= m <= _MAX_ORDER):
        raise DomainError(f"order must lie in [1, {_MAX_ORDER}]")
    if w.kind == "e_bar":
        raise DomainError("no fixed rule for the growing weight; "
                          "norms against it use adaptive quadrature")
    params = w.params
    half = build_rule(w, m // 2) if m >= 2 else None
    if w.kind == "e_classical" or params.alpha == 1.0:
        b = w.cl_beta if w.kind == "e_classical" else params.beta
        un, uw = _classical_laguerre_rule(b, m)
        return QuadRule(w, un, uw / uw.sum(), m, half)
    pq = _rational_alpha(params.alpha)
    a, b = params.alpha, params.beta
    if pq is not None:
        p, q = pq
        for refine in (1, 2, 4):
            vn, wn, mu0 = _stieltjes_rule(p, q, b, m, refine)
            if _check_v_moments(vn, wn, p, q, b, m) < 1e-11:
                break
        else:
            raise QuadratureError("Stieltjes recurrence failed its moment check")
        nodes = np.power(vn, p)
        weights = wn / mu0
        return QuadRule(w, nodes, weights, m, half)
    # irrational alpha: u-substitution generalized Gauss-Laguerre
    un, uw = _classical_laguerre_rule(a * b, m)
    return QuadRule(w, np.power(un, a), uw / uw.sum(), m, half)


def _apply(rule: QuadRule, f) -> float:
    try:
        vals = np.asarray(f(rule.nodes), dtype=float)
        if vals.shape != rule.nodes.shape:
            raise TypeError
    except Exception:
        vals = np.array([float(f(float(x))) for x in rule.nodes])
    return float(rule.weights @ vals)


def integrate(rule: QuadRule, f) -> float:
    """Integral of f against the rule's weight (mass-normalized)."""
    return _apply(rule, f)


def inner_with_error(rule: QuadRule, f, g):
    """Inner product <f, g> with an order-m vs order-m/2 error estimate."""
    fg = lambda x: (np.asarray(f(x)) * np.asarray(g(x))
                    if isinstance(x, np.ndarray) else f(x) * g(x))
    full = _apply(rule, fg)
    if rule.half is None:
        return full, math.inf
    coarse = _apply(rule.half, fg)
    return full, abs(full - coarse)


def inner(rule: QuadRule, f, g, rtol: Optional[float] = None) -> float:
    """Inner product; QuadratureError when the two-order estimate disagrees
    beyond rtol (relative, with an absolute floor)."""
    val, err = inner_with_error(rule, f, g)
    if rtol is not None and err > rtol * max(1.0, abs(val)):
        raise QuadratureError(
            f"quadrature estimate unstable: value {val:.6e}, "
            f"order-m vs m/2 discrepancy {err:.2e}")
    return val


# --------------------------------------------------------------------------
# Exact bilinear forms for generalized polynomials
# --------------------------------------------------------------------------

def inner_exact(params: GLParams, fpowers, gpowers) -> float:
    """<f, g> against the invariant density for generalized polynomials,
    through the exact fractional moments of the weight."""
    a, b = params.alpha, params.beta
    lg0 = gammaln(a * b + 1.0)
    acc = 0.0
    for cf, pf in fpowers:
        if cf == 0.0:
            continue
        for cg, pg in gpowers:
            if cg == 0.0:
                continue
            acc += cf * cg * math.exp(gammaln(a * (pf + pg) + a * b + 1.0) - lg0)
    return acc


def _inner_exact_mp(params: GLParams, fpowers, gpowers):
    am, bm = mp.mpf(params.alpha), mp.mpf(params.beta)
    g0 = mp.gamma(am * bm + 1)
    acc = mp.mpf(0)
    for cf, pf in fpowers:
        for cg, pg in gpowers:
            if cf == 0 or cg == 0:
                continue
            acc += cf * cg * mp.gamma(am * (pf + pg) + am * bm + 1) / g0
    return acc


def gram_biorth(params: GLParams, N: int, rule: Optional[QuadRule] = None) -> np.ndarray:
    """Matrix G_{nm} = <P_n, R_m> for n, m <= N; identity when everything
    works.

    Double precision uses the quadrature rule (exact in exact arithmetic for
    rational alpha); extended precision uses the mp-moment bilinear form with
    arguments assembled at working precision.
    """
    if N < 0:
        raise DomainError("N must be >= 0")
    if params.precision.is_double:
        if rule is None:
            rule = build_rule(weight_e_ab(params), max(120, 2 * N + 30))
        seq = p_coeffs(params, N)
        Pm = np.array([[p_eval(seq, n, float(x)) for x in rule.nodes]
                       for n in range(N + 1)])
        inv = 1.0 / params.alpha
        if params.is_classical:
            Rm = np.array([[np.polynomial.polynomial.polyval(x, r_coeffs(params, midx))
                            for x in rule.nodes] for midx in range(N + 1)])
        else:
            ys = np.power(rule.nodes, inv)
            Rm = np.array([np.polynomial.polynomial.polyval(ys, r_coeffs(params, midx))
                           for midx in range(N + 1)])
        return (Pm * rule.weights) @ Rm.T
    dps = max(params.precision.dps, 40)
    with mp_ctx(dps):
        am, bm = mp.mpf(params.alpha), mp.mpf(params.beta)
        g0 = mp.gamma(am * bm + 1)
        inv = 1 / am
        from .eigen import _coeffs_mp
        pc = [_coeffs_mp(params, n) for n in range(N + 1)]
        rc = [r_coeffs_mp(params, midx) for midx in range(N + 1)]
        G = np.zeros((N + 1, N + 1))
        for n in range(N + 1):
            for midx in range(N + 1):
                acc = mp.mpf(0)
                for k, ck in enumerate(pc[n]):
                    for j, cj in enumerate(rc[midx]):
                        s = am * k + j if not params.is_classical else am * (k + j)
                        acc += ck * cj * mp.gamma(s + am * bm + 1) / g0
                G[n, midx] = float(acc)
        return G


@dataclass
class BesselReport:
    partial_sums: np.ndarray
    norm2: float

    @property
    def ok(self) -> bool:
        return bool(self.partial_sums[-1] <= self.norm2 * (1.0 + 1e-8))


def bessel_check(params: GLParams, f, N: int, rule: Optional[QuadRule] = None) -> BesselReport:
    """Partial sums of sum_n <f, P_n>^2 against ||f||^2.

    The analysis coefficients of any square-integrable f are l2-bounded by
    the norm; the report carries the monotone partial sums.
    """
    if rule is None:
        rule = build_rule(weight_e_ab(params), max(120, 2 * N + 30))
    norm2 = inner(rule, f, f)
    seq = p_coeffs(params, N)
    coefs = []
    for n in range(N + 1):
        pn = lambda x, n=n: p_eval(seq, n, float(x)) if not isinstance(x, np.ndarray) \
            else np.array([p_eval(seq, n, float(t)) for t in x])
        coefs.append(inner(rule, f, pn) ** 2)
    return BesselReport(np.cumsum(coefs), norm2)


def r_norm(params: GLParams, n: int, gamma_: Optional[float] = None,
           eta_bar: float = 1.0) -> tuple:
    """(||R_n|| in the invariant-density space, ||R_n e/ebar|| in the
    auxiliary space).

    The first norm is an exact moment bilinear form (mp for n > 15); the
    second integrates a nonnegative integrand by tanh-sinh quadrature in the
    u = x**(1/alpha) variable, where the auxiliary exponent becomes
    eta_bar * u**(alpha/gamma).
    """
    a, b = params.alpha, params.beta
    if gamma_ is None:
        gamma_ = 0.5 * a
    if not (0.0 < gamma_ < a) and a < 1.0:
        raise DomainError("gamma must lie in (0, alpha)")
    use_mp = (n > 8) or params.is_classical or not params.precision.is_double
    if not use_mp:
        cs = r_coeffs(params, n)
        if params.is_classical:
            pw = tuple((float(c), float(j)) for j, c in enumerate(cs))
        else:
            pw = tuple((float(c), j / a) for j, c in enumerate(cs))
        nrm2 = inner_exact(params, pw, pw)
    else:
        dps = max(params.precision.dps, 30 + 2 * n)
        with mp_ctx(dps):
            cs = r_coeffs_mp(params, n)
            am, bm = mp.mpf(a), mp.mpf(b)
            g0 = mp.gamma(am * bm + 1)
            acc = mp.mpf(0)
            for j, cj in enumerate(cs):
                for i, ci in enumerate(cs):
                    s = (i + j) if not params.is_classical else am * (i + j)
                    acc += ci * cj * mp.gamma(s + am * bm + 1) / g0
            nrm2 = float(acc)
    if nrm2 < 0.0:
        raise QuadratureError(f"norm^2 of R_{n} came out negative: {nrm2:.3e}")
    # auxiliary norm: (1/(a G(ab+1)^2)) Int R_n(u^a)^2 u^(ab) e^(-2u - eta u^(a/g)) du
    dps = max(params.precision.dps, 25 + 2 * n)
    with mp_ctx(dps):
        am, bm = mp.mpf(a), mp.mpf(b)
        gm = mp.mpf(gamma_)
        em = mp.mpf(eta_bar)
        cs = r_coeffs_mp(params, n)
        g0 = mp.gamma(am * bm + 1)

        def integrand(u):
            if u <= 0:
                return mp.mpf(0)
            ua = u ** am if not params.is_classical else u
            rv = mp.mpf(0)
            for c in reversed(cs):
                rv = rv * ua + c
            return rv * rv * u ** (am * bm) * mp.e ** (-2 * u - em * u ** (am / gm))

        hi = 400.0
        val = mp.quad(integrand, [0, float(n) + 1.0, 4.0 * n + 40.0, hi])
        aux2 = float(val / (am * g0 ** 2))
    return math.sqrt(nrm2), math.sqrt(max(aux2, 0.0))
