"""Lorentz functionals on step functions, sequences, and monotone curves.

The two-index functional is evaluated three independent ways: an exact
staircase sum over the distribution function, an exact staircase sum
over the rearrangement, and adaptive quadrature of the distribution-side
integral.  The first two are algebraically equal (both enumerate the
same plane rectangles); the third guards against bookkeeping errors.
"""

from __future__ import annotations

import math

import numpy as np
from scipy import optimize as _opt

from .operators import Seq
from .piecewise import (
    INF,
    Curve,
    LineMeasure,
    One,
    StepFunction,
    Weight,
    _quad,
    distribution,
    double_star_curve,
    ext_mul,
    rearrange,
)

GOLDEN_TOL = 1e-10


def _golden_max(fn, lo, hi, tol=GOLDEN_TOL):
    """Maximum of a unimodal-ish fn on [lo, hi] by golden-section, seeded
    defensively with the endpoints."""
    if hi <= lo:
        return fn(lo)
    res = _opt.minimize_scalar(lambda t: -fn(t), bounds=(lo, hi), method="bounded",
                               options={"xatol": tol})
    return max(fn(lo), fn(hi), -float(res.fun))


def _wpow(W: float, e: float) -> float:
    """W**e with the 0/inf conventions (0**neg = inf, inf**neg = 0)."""
    if W == 0.0:
        return 0.0 if e > 0 else (1.0 if e == 0 else INF)
    if math.isinf(W):
        return INF if e > 0 else (1.0 if e == 0 else 0.0)
    return W ** e


def lambda_norm_expressions(f: StepFunction, mu: LineMeasure, p: float, q: float,
                            w: Weight):
    """The three routes to the two-index functional; see module docstring.

    Returns (distribution_sum, rearrangement_sum, quadrature) for finite q
    and (distribution_sup, rearrangement_sup, grid_refined_sup) for q=inf.
    """
    if p <= 0 or q <= 0:
        raise ValueError("need p, q > 0")
    if f.is_zero:
        return (0.0, 0.0, 0.0)
    lam = distribution(f, mu)
    thr, masses = lam.thresholds, lam.masses
    Wm = np.array([w.primitive(m) for m in masses])
    fs = rearrange(f, mu)
    Ws = np.array([w.primitive(s) for s in fs.breaks])

    if math.isinf(q):
        d_side = max(ext_mul(float(t1), _wpow(float(Wj), 1 / p))
                     for t1, Wj in zip(thr[1:], Wm))
        r_side = max(ext_mul(float(a), _wpow(float(W1), 1 / p))
                     for a, W1 in zip(fs.values, Ws[1:]))

        third = _weak_sup_blackbox(lam, w, p, float(thr[-1]))
        return (float(d_side), float(r_side), float(third))

    e = q / p
    d_side = float(np.sum(_wpowv(Wm, e) * (thr[1:] ** q - thr[:-1] ** q))) ** (1 / q)
    r_side = float(np.sum(fs.values ** q * (_wpowv(Ws[1:], e) - _wpowv(Ws[:-1], e)))) ** (1 / q)

    # black-box quadrature of the distribution integral, split only at the
    # jump abscissas so the integrand is smooth per cell
    def dist_integrand(t):
        return q * t ** (q - 1) * _wpow(float(w.primitive(lam(t))), e)

    third = _quad(dist_integrand, 0.0, float(thr[-1]), points=list(thr)) ** (1 / q)
    return (d_side, r_side, float(third))


def _wpowv(arr, e):
    with np.errstate(divide="ignore"):
        out = np.where(arr > 0, arr ** e, 0.0 if e > 0 else INF)
    return out


def _weak_sup_blackbox(lam, w: Weight, p: float, t_hi: float) -> float:
    """sup_t t * W^{1/p}(lam(t)) treating lam as a black box.

    t * W^{1/p}(lam(t)) increases between the downward jumps of lam, so
    the sup is a left limit at a jump (or at t_hi).  Jumps are located by
    bisection and left limits taken at the adjacent float.
    """

    def obj(t):
        return ext_mul(t, _wpow(float(w.primitive(lam(t))), 1 / p))

    best = obj(np.nextafter(t_hi, -np.inf))
    lo = 0.0
    lam_lo = lam(lo)
    while lam(np.nextafter(t_hi, -np.inf)) < lam_lo:
        a, b = lo, t_hi
        while np.nextafter(a, np.inf) < b:
            mid = 0.5 * (a + b)
            if lam(mid) < lam_lo:
                b = mid
            else:
                a = mid
        best = max(best, obj(np.nextafter(b, -np.inf)))
        lo, lam_lo = b, lam(b)
    return best


def lambda_norm(f: StepFunction, mu: LineMeasure, p: float, q: float,
                w: Weight) -> float:
    """||f|| for the two-index functional, distribution-side exact sum."""
    if p <= 0 or q <= 0:
        raise ValueError("need p, q > 0")
    if f.is_zero:
        return 0.0
    lam = distribution(f, mu)
    thr, masses = lam.thresholds, lam.masses
    Wm = np.array([w.primitive(m) for m in masses])
    if math.isinf(q):
        return float(max(ext_mul(float(t1), _wpow(float(Wj), 1 / p))
                         for t1, Wj in zip(thr[1:], Wm)))
    e = q / p
    return float(np.sum(_wpowv(Wm, e) * (thr[1:] ** q - thr[:-1] ** q)) ** (1 / q))


def _curve_tail_exponent(w: Weight, q: float, e: float):
    """Integrand exponent of (1/t)^q d(W^e) at infinity, or None when the
    weight has bounded support (the integral terminates)."""
    te = w.tail_exponent()
    if te is None:
        return None
    return -q + (e - 1.0) * (1.0 + te) + te


def lambda_norm_of_curve(g: Curve, p: float, q: float, w: Weight) -> float:
    """||g|| for a nonincreasing curve on (0, inf) (g is its own
    rearrangement): (int g^q dW^{q/p})^{1/q}, segment-wise quadrature with
    analytic tail certification; +inf on certified divergence."""
    if p <= 0 or q <= 0:
        raise ValueError("need p, q > 0")
    e = q / p if not math.isinf(q) else None

    if math.isinf(q):
        best = 0.0
        for i, (kind, data) in enumerate(g.segments):
            lo, hi = g.piece_bounds(i)
            if kind == "const":
                best = max(best, ext_mul(data, _wpow(float(w.primitive(hi)), 1 / p)))
            else:
                fn = lambda t: ext_mul(g.eval_one(t), _wpow(float(w.primitive(t)), 1 / p))
                cuts = [lo] + [b for b in w.breakpoints() if lo < b < hi] + [hi]
                for a2, b2 in zip(cuts[:-1], cuts[1:]):
                    best = max(best, _golden_max(fn, a2, b2))
        kind, v = g.tail
        last = float(g.nodes[-1])
        if v > 0:
            if kind == "const":
                best = max(best, ext_mul(v, _wpow(w.primitive_inf(), 1 / p)))
            else:
                te = w.tail_exponent()
                if te is not None and (1.0 + te) / p > 1.0:
                    return INF
                end = w.support_end()
                hi = min(end, last * 2.0 ** 60) if math.isfinite(end) else last * 2.0 ** 60
                fn = lambda t: ext_mul(v / t, _wpow(float(w.primitive(t)), 1 / p))
                ts = np.geomspace(max(last, 1e-300), max(hi, last * 2), 400)
                best = max(best, max(fn(float(t)) for t in ts))
                best = max(best, _golden_max(fn, float(ts[0]), float(ts[-1]), tol=1e-9))
        return float(best)

    def integrand(fn_val, t):
        dens = float(w.density(t))
        if dens == 0.0:
            return 0.0
        Wt = float(w.primitive(t))
        return fn_val ** q * (q / p) * _wpow(Wt, e - 1.0) * dens

    total = 0.0
    for i, (kind, data) in enumerate(g.segments):
        lo, hi = g.piece_bounds(i)
        if kind == "const":
            if data > 0:
                total += data ** q * (_wpow(float(w.primitive(hi)), e)
                                      - _wpow(float(w.primitive(lo)), e))
        else:
            total += _quad(lambda t: integrand(g.eval_one(t), t), lo, hi,
                           points=w.breakpoints(), tol=1e-11)
        if math.isinf(total):
            return INF
    kind, v = g.tail
    last = float(g.nodes[-1])
    if v > 0:
        if kind == "const":
            total += v ** q * (_wpow(w.primitive_inf(), e) - _wpow(float(w.primitive(last)), e))
        else:
            ex = _curve_tail_exponent(w, q, e)
            if ex is not None and ex >= -1.0:
                return INF
            end = w.support_end()
            hi = end if math.isfinite(end) else INF
            if hi > last:
                total += _quad(lambda t: integrand(v / t, t), last, hi,
                               points=w.breakpoints(), tol=1e-11)
    if math.isinf(total):
        return INF
    return float(total ** (1 / q))


def gamma_norm(f: StepFunction, p: float, w: Weight,
               mu: LineMeasure | None = None) -> float:
    """(int (f**)^p w)^{1/p} against the piecewise-analytic f**."""
    if p <= 0:
        raise ValueError("need p > 0")
    if f.is_zero:
        return 0.0
    g = double_star_curve(f, mu)
    total = 0.0
    for i, (kind, data) in enumerate(g.segments):
        lo, hi = g.piece_bounds(i)
        if kind == "const":
            total += data ** p * (float(w.primitive(hi)) - float(w.primitive(lo)))
        else:
            total += _quad(lambda t: g.eval_one(t) ** p * float(w.density(t)), lo, hi,
                           points=w.breakpoints())
    M = g.tail[1]
    last = float(g.nodes[-1])
    if M > 0:
        total += M ** p * w.tail_power_integral(last, p)
    if math.isinf(total):
        return INF
    return float(total ** (1 / p))


def d_norm(f: Seq, omega: Seq, p: float, weak: bool = False) -> float:
    """Sequence-space functional: (sum f*(n)^p Omega_n)^{1/p}, or the weak
    form sup_n W_n^{1/p} f*(n)."""
    if p <= 0:
        raise ValueError("need p > 0")
    fstar = f.rearranged().terms
    if not fstar:
        return 0.0
    n = len(fstar)
    if not omega.is_positive(n - 1):
        raise ValueError("weight sequence must be positive on the support prefix")
    if weak:
        Wn = omega.prefix_sums(n)
        return float(max(Wn[k] ** (1 / p) * fstar[k] for k in range(n)))
    return float(sum(fstar[k] ** p * omega[k] for k in range(n)) ** (1 / p))


def kolmogorov_ratio(f: StepFunction, mu: LineMeasure, p: float, q: float,
                     w: Weight, thresholds=None):
    """Weak functional vs the best truncated strong functional.

    Returns (||f|| weak, sup over level sets E = {f > t} of
    ||f chi_E||_{Lambda^q} W(mu E)^{1/p - 1/q}); needs 0 < q < p.
    """
    if not 0 < q < p:
        raise ValueError("need 0 < q < p")
    weak = lambda_norm(f, mu, p, INF, w)
    if f.is_zero:
        return (0.0, 0.0)
    if thresholds is None:
        vals = f.distinct_values()
        thresholds = [0.0] + [float(v) for v in vals[:-1]]
    best = 0.0
    for t in thresholds:
        keep = np.where(f.values > t, f.values, 0.0)
        g = StepFunction(f.breaks, keep)
        if g.is_zero:
            continue
        mass = sum(mu.mass(a, b) for a, b, v in
                   zip(f.breaks[:-1], f.breaks[1:], f.values) if v > t)
        factor = _wpow(float(w.primitive(mass)), 1 / p - 1 / q)
        best = max(best, ext_mul(lambda_norm(g, mu, q, q, w), factor))
    return (float(weak), float(best))
