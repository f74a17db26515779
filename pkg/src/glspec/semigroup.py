"""The generator, spectral expansion, heat kernel, classical reference
semigroup, intertwining verification, and the self-similar companion kernel.

Generator on twice-differentiable f:

    L f(x) = (d_ab - x) f'(x) + x * Int_0^1 f''(x y) gt(y) dy,

where gt collects the hypergeometric kernel and the sin(alpha pi)/pi factor;
gt(y) ~ (1 - y)^(-alpha) at the right endpoint, flattened by the substitution
y = 1 - v^(1/(1-alpha)) and integrated on double-exponential nodes in v.
At alpha = 1 the generator degenerates to x f'' + (beta + 1 - x) f'.

Spectral side: P_t f = sum_n e^{-n t} <f, R_n> P_n.  The full-space expansion
converges for t above the threshold time t_alpha; generalized polynomials
(the image of the reference space under the intertwining operator) expand
finitely and are valid for every t > 0 (the small-space regime).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Optional

import numpy as np
from scipy.special import gammaln

from .core import (DomainError, GLParams, RealFn, TruncationError, monomial,
                   phi)
from .coeigen import r_coeffs, r_fn, w_eval, w_eval_wright
from .density import (markov_lambda_apply, mellin_lambda, weight_classical,
                      weight_e_ab, weight_eval)
from .eigen import laguerre_eval, p_coeffs, p_eval, p_fn, p_sup
from .quad import QuadRule, build_rule, inner_exact
from .specfun import gauss_2f1, gauss_2f1_w1

__all__ = [
    "SpectralExpansion", "generator_apply", "generator_moment_identity_check",
    "expand", "evaluate_expansion", "expansion_fn", "heat_kernel",
    "heat_kernel_mass", "laguerre_semigroup", "intertwine_check",
    "selfsimilar_kernel",
]

_NMAX_DEFAULT = 200


# --------------------------------------------------------------------------
# Generator
# --------------------------------------------------------------------------

def _tanh_sinh_nodes(h: float = 0.05, tmax: float = 3.6):
    """Double-exponential nodes/weights for (0, 1)."""
    t = np.arange(-tmax, tmax + h / 2, h)
    st = 0.5 * math.pi * np.sinh(t)
    v = 0.5 * (1.0 + np.tanh(st))
    w = h * 0.25 * math.pi * np.cosh(t) / np.cosh(st) ** 2
    keep = (v > 0.0) & (v < 1.0) & (w > 0.0)
    return v[keep], w[keep]


@lru_cache(maxsize=32)
def _generator_grid(params: GLParams):
    """Cached y-nodes and gt-values for the generator's singular integral.

    After y = 1 - v^s with s = 1/(1-alpha), the integrand is bounded; the
    remaining fractional endpoint behavior is handled by the
    double-exponential nodes.  gt includes the substitution Jacobian and the
    quadrature weights, so L f needs only a weighted sum of f'' values.
    """
    a, b = params.alpha, params.beta
    if a == 1.0:
        raise DomainError("classical branch has no singular integral")
    s = 1.0 / (1.0 - a)
    v, wv = _tanh_sinh_nodes()
    delta = v ** s                       # delta = 1 - y, exact for tiny v
    y = 1.0 - delta
    c_a = a * (b + 1.0) + 1.0
    pref = 1.0 / ((b + 1.0 / a + 1.0) * math.exp(gammaln(1.0 - a)))
    gt = np.empty_like(v)
    for i in range(v.size):
        d = float(delta[i])
        if d >= 1.0:
            gt[i] = 0.0
            continue
        # z = y^(1/alpha); w1 = 1 - z computed cancellation-free
        w1 = -math.expm1(math.log1p(-d) / a)
        if w1 <= 0.0:
            w1 = d / a  # first-order fallback for ultra-tiny delta
        if w1 > 0.5:
            f21 = gauss_2f1(c_a, a + 1.0, c_a + 1.0, 1.0 - w1).value.real
        else:
            f21 = gauss_2f1_w1(c_a, a + 1.0, c_a + 1.0, w1).value.real
        gt[i] = pref * math.exp((b + 1.0 / a + 1.0) * math.log1p(-d)) * f21
    wts = wv * s * np.power(v, s - 1.0)
    return y, gt * wts


def generator_apply(params: GLParams, f: RealFn, x: float,
                    quad=None) -> float:
    """Generator value L f(x) for twice-differentiable f.

    Uses exact derivatives when the RealFn carries them, central finite
    differences otherwise.
    """
    if x <= 0.0:
        raise DomainError("generator acts on functions of x > 0")
    a, b = params.alpha, params.beta
    if params.is_classical:
        return x * f.deriv2(x) + (b + 1.0 - x) * f.deriv1(x)
    y, gw = _generator_grid(params)
    vals = np.array([f.deriv2(float(x * yy)) for yy in y])
    return (params.d_ab - x) * f.deriv1(x) + x * float(gw @ vals)


def generator_moment_identity_check(params: GLParams, k: int) -> float:
    """Residual |k(k-1) Int y^(k-2) gt(y) dy - (k phi(k) - k d_ab)|.

    Both sides vanish at k = 1; the left side is the quadrature route, the
    right side the gamma-ratio route.
    """
    if k < 1:
        raise DomainError("k must be >= 1")
    rhs = k * phi(params, k).real - k * params.d_ab
    if k == 1:
        return abs(rhs)
    if params.is_classical:
        # integral term of the classical generator acting on x^k
        return abs(k * (k - 1.0) - (k * phi(params, k).real - k * params.d_ab))
    y, gw = _generator_grid(params)
    lhs = k * (k - 1.0) * float(gw @ np.power(y, k - 2))
    return abs(lhs - rhs)


# --------------------------------------------------------------------------
# Spectral expansion
# --------------------------------------------------------------------------

@dataclass
class SpectralExpansion:
    """Truncated expansion sum_n a_n P_n with a_n = e^{-n t} <f, R_n>."""

    params: GLParams
    t: float
    coeffs: np.ndarray
    tail_estimate: float
    regime: str                      # "full_space" | "small_space"
    warnings: tuple = ()

    @property
    def N(self) -> int:
        return len(self.coeffs) - 1


def _coeff_against_r(params: GLParams, f, n: int, rule: QuadRule) -> float:
    powers = getattr(f, "powers", None)
    if powers is not None:
        rfn = r_fn(params, n)
        return inner_exact(params, powers, rfn.powers)
    rn = r_fn(params, n)
    fg = np.array([float(f(float(x))) * rn(float(x)) for x in rule.nodes])
    return float(rule.weights @ fg)


def expand(params: GLParams, f, t: float, rule: Optional[QuadRule] = None,
           tol: float = 1e-10, nmax: int = _NMAX_DEFAULT,
           regime: str = "auto") -> SpectralExpansion:
    """Spectral coefficients of P_t f until the tail estimate drops below tol.

    The tail estimate is |a_n| times the sup of |P_n| over the default
    evaluation window; three consecutive sub-tolerance terms stop the scan.
    Generalized polynomials stop exactly after their degree.  A warning is
    recorded when t <= t_alpha outside the small-space regime.
    """
    if t < 0.0:
        raise DomainError("time must be >= 0")
    if rule is None and getattr(f, "powers", None) is None:
        rule = build_rule(weight_e_ab(params), 160)
    powers = getattr(f, "powers", None)
    if regime == "auto":
        regime = "small_space" if powers is not None else "full_space"
    warns = []
    if regime == "full_space" and t <= params.t_alpha and not params.is_classical:
        warns.append(
            f"t = {t} is at or below the full-space threshold {params.t_alpha:.6f}; "
            "convergence only guaranteed on the smaller spaces")
    max_deg = None
    if powers is not None:
        fr = [p for _, p in powers]
        if all(abs(p - round(p)) < 1e-12 for p in fr):
            max_deg = int(max(round(p) for p in fr))
    coeffs = []
    small = 0
    tail = math.inf
    min_n = max_deg if max_deg is not None else 6
    for n in range(nmax + 1):
        c = _coeff_against_r(params, f, n, rule)
        a_n = math.exp(-n * t) * c
        coeffs.append(a_n)
        if max_deg is not None and n >= max_deg:
            # generalized polynomial: expansion is exactly finite
            tail = 0.0
            break
        tail = abs(a_n) * p_sup(params, max(n, 1))
        if tail < tol and n >= min_n:
            small += 1
            if small >= 3:
                break
        else:
            small = 0
    else:
        raise TruncationError(
            f"expansion cap {nmax} reached with tail estimate {tail:.2e} > {tol}")
    return SpectralExpansion(params, t, np.array(coeffs), tail,
                             regime, tuple(warns))


def evaluate_expansion(exp: SpectralExpansion, x: float, k: int = 0,
                       p: int = 0) -> float:
    """sum_n (-n)^k a_n P_n^(p)(x): time and space derivatives of P_t f."""
    if x < 0.0:
        raise DomainError("evaluation window is x >= 0")
    params = exp.params
    seq = p_coeffs(params, exp.N)
    acc = 0.0
    for n, a_n in enumerate(exp.coeffs):
        if a_n == 0.0 or n < p:
            continue
        fac = (-float(n)) ** k if k else 1.0
        acc += fac * a_n * p_eval(seq, n, x, p)
    return acc


def expansion_fn(exp: SpectralExpansion) -> RealFn:
    return RealFn(lambda x: evaluate_expansion(exp, x),
                  description=f"P_t f (t={exp.t})")


# --------------------------------------------------------------------------
# Heat kernel and companions
# --------------------------------------------------------------------------

def heat_kernel(params: GLParams, t: float, x: float, y: float, k: int = 0,
                p: int = 0, q: int = 0, tol: float = 1e-10,
                nmax: int = _NMAX_DEFAULT) -> float:
    """Transition density (and derivatives)

        d^k/dt^k P_t^(p,q)(x, y) = sum_{n >= p} (-n)^k e^{-nt} W_n^(q)(y) P_n^(p)(x)

    truncated once three consecutive terms fall below tol times the running
    scale.  TruncationError when the cap is reached first.
    """
    if t <= 0.0:
        raise DomainError("heat kernel needs t > 0")
    seq = p_coeffs(params, min(nmax, _NMAX_DEFAULT))
    acc = 0.0
    scale = 0.0
    small = 0
    for n in range(p, nmax + 1):
        term = math.exp(-n * t) * w_eval(params, n, y, q) * p_eval(seq, n, x, p)
        if k:
            term *= (-float(n)) ** k
        acc += term
        scale = max(scale, abs(term), abs(acc))
        if abs(term) <= tol * max(scale, 1e-300):
            small += 1
            if small >= 3:
                return acc
        else:
            small = 0
    raise TruncationError(f"heat kernel cap {nmax} reached (t may be too small)")


def heat_kernel_mass(params: GLParams, t: float, x, rule: Optional[QuadRule] = None,
                     tol: float = 1e-9, nmax: int = _NMAX_DEFAULT):
    """Row mass Int P_t(x, y) dy and min kernel value over the rule's nodes.

    Works through P_t(x, y)/e(y) = sum_n e^{-nt} R_n(y) P_n(x) so the
    co-eigenfunction node values are shared across all requested x.  Nodes
    whose quadrature weight is below 1e-20 of the maximum are skipped: their
    contribution is orders of magnitude below the tolerance, while the
    kernel series there is at its most expensive.
    """
    xs = np.atleast_1d(np.asarray(x, dtype=float))
    if rule is None:
        rule = build_rule(weight_e_ab(params), 120)
    keep = rule.weights >= 1e-20 * rule.weights.max()
    nodes = rule.nodes[keep]
    wts = rule.weights[keep]
    from .coeigen import r_eval_bell
    seq = p_coeffs(params, min(nmax, _NMAX_DEFAULT))
    acc = np.zeros((len(xs), nodes.size))
    small = 0
    for n in range(nmax + 1):
        rn = np.array([r_eval_bell(params, n, float(yy)) for yy in nodes])
        pn = np.array([p_eval(seq, n, float(xx)) for xx in xs])
        term = math.exp(-n * t) * np.outer(pn, rn)
        acc += term
        rel = np.max(np.abs(term) * wts)
        if rel <= tol / 10.0:
            small += 1
            if small >= 3:
                break
        else:
            small = 0
    else:
        raise TruncationError(f"kernel mass cap {nmax} reached")
    masses = acc @ wts
    dens = np.array([weight_eval(weight_e_ab(params), float(yy)) for yy in nodes])
    kmin = float((acc * dens).min())
    if np.isscalar(x) or np.ndim(x) == 0:
        return float(masses[0]), kmin
    return masses, kmin


def laguerre_semigroup(beta: float, t: float, f, x: float,
                       tol: float = 1e-12, nmax: int = _NMAX_DEFAULT) -> float:
    """Classical reference semigroup of order beta via its eigenexpansion.

    Q_t f(x) = sum_n e^{-nt} <f, L_n> L_n(x) / ||L_n||^2 with the classical
    Laguerre polynomials; coefficients by the order-beta Gauss rule, which is
    exact for polynomial f.
    """
    if t < 0.0:
        raise DomainError("time must be >= 0")
    from .core import make_params
    pref = make_params(1.0, max(beta, 0.0))
    rule = build_rule(weight_classical(pref, beta), 180)
    small = 0
    acc = 0.0
    for n in range(nmax + 1):
        ln = np.array([laguerre_eval(n, beta, float(xx)) for xx in rule.nodes])
        try:
            fv = np.asarray(f(rule.nodes), dtype=float)
            if fv.shape != rule.nodes.shape:
                raise TypeError
        except Exception:
            fv = np.array([float(f(float(xx))) for xx in rule.nodes])
        cn = float(rule.weights @ (ln * fv))
        norm2 = math.exp(gammaln(n + beta + 1.0) - gammaln(n + 1.0)
                         - gammaln(beta + 1.0))
        term = math.exp(-n * t) * cn / norm2 * laguerre_eval(n, beta, x)
        acc += term
        if abs(term) <= tol * max(abs(acc), 1.0):
            small += 1
            if small >= 3:
                return acc
        else:
            small = 0
    raise TruncationError(f"classical expansion cap {nmax} reached")


def intertwine_check(params: GLParams, f, t: float, xs,
                     rule: Optional[QuadRule] = None) -> dict:
    """max_x |P_t (Lam f)(x) - Lam (Q_t f)(x)| over the grid.

    Left side: Markov image of f, then the spectral expansion.  Right side:
    classical order-0 semigroup, then the Markov operator applied pointwise.
    The two paths share no numerical machinery beyond the kernel density.
    """
    xs = np.atleast_1d(np.asarray(xs, dtype=float))
    powers = getattr(f, "powers", None)
    if powers is not None:
        lam_f = RealFn(
            lambda xx: sum(c * mellin_lambda(params, pw).real * xx ** pw
                           for c, pw in powers),
            description="Lam f",
            powers=tuple((c * mellin_lambda(params, pw).real, pw)
                         for c, pw in powers))
    else:
        lam_f = RealFn(lambda xx: markov_lambda_apply(params, f, xx),
                       description="Lam f")
    exp_left = expand(params, lam_f, t, rule)
    left = np.array([evaluate_expansion(exp_left, float(xx)) for xx in xs])
    qt = RealFn(lambda yy: laguerre_semigroup(0.0, t, f, yy), description="Q_t f")
    right = np.array([markov_lambda_apply(params, qt, float(xx)) for xx in xs])
    disc = np.abs(left - right)
    return {"max_discrepancy": float(disc.max()), "xs": xs, "left": left,
            "right": right}


def selfsimilar_kernel(params: GLParams, t: float, x: float, y: float,
                       tol: float = 1e-10, nmax: int = _NMAX_DEFAULT) -> float:
    """Companion kernel K_t(x, y) = sum_n (1+t)^{-n-1} W_n(y/(1+t)) P_n(x).

    Related to the heat kernel by P_s(x, z) = e^s K_{e^s - 1}(x, e^s z).
    """
    if t <= 0.0:
        raise DomainError("self-similar kernel needs t > 0")
    seq = p_coeffs(params, min(nmax, _NMAX_DEFAULT))
    u = y / (1.0 + t)
    acc = 0.0
    scale = 0.0
    small = 0
    for n in range(nmax + 1):
        term = ((1.0 + t) ** (-n - 1) * w_eval(params, n, u)
                * p_eval(seq, n, x, 0))
        acc += term
        scale = max(scale, abs(term), abs(acc))
        if abs(term) <= tol * max(scale, 1e-300):
            small += 1
            if small >= 3:
                return acc
        else:
            small = 0
    raise TruncationError(f"self-similar kernel cap {nmax} reached")
