"""Weight-class membership checks with explicit constants and witnesses.

Every condition here has the shape "there exists C < inf with R(r) <= C
for all r > 0".  The supremum is certified on a declared log grid; power
behaviour of the weight at 0 and infinity is used to certify divergence
analytically before any quadrature runs, and a growth heuristic flags
the remaining escapes: a ratio that increases monotonically by at least
10x across the outer decade of the grid is treated as divergent.

Discrete conditions use the analogous doubling test on the horizon:
sequences whose constant keeps climbing by more than 5% from n/2 to n
are flagged.  Exponents within roughly 0.1 of a phase boundary converge
too slowly for that test and need a longer horizon.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .lorentz import _wpow, _wpowv
from .operators import Seq
from .piecewise import (
    INF,
    LineMeasure,
    PowerAbs,
    StepMeasure,
    Weight,
    _quad,
    ext_div,
    ext_mul,
)

_EXP_TOL = 1e-12       # slack for "exponent hits the boundary exactly"
_GROWTH_FACTOR = 10.0  # continuous heuristic: 10x across the outer decade
_DOUBLING_TOL = 1.05   # discrete heuristic: 5% climb from n/2 to n


class DegenerateWeight(ValueError):
    """The weight vanishes identically on the declared grid."""


@dataclass(frozen=True)
class GridSpec:
    """Log-spaced abscissas on which a pointwise condition is certified."""

    r_min: float = 2.0 ** -16
    r_max: float = 2.0 ** 16
    n: int = 129

    def __post_init__(self):
        if not (0.0 < self.r_min < self.r_max):
            raise ValueError("need 0 < r_min < r_max")
        if self.n < 2:
            raise ValueError("need at least two grid points")

    def points(self) -> np.ndarray:
        return np.geomspace(self.r_min, self.r_max, self.n)

    def describe(self) -> dict:
        return {"r_min": self.r_min, "r_max": self.r_max, "n": self.n}


@dataclass
class Verdict:
    """Outcome of one membership check.

    ``constant`` is the supremum of the tested ratio over the grid (inf
    when divergence is certified analytically); ``witness`` is the
    abscissa, pair, or interval where it is attained, and re-evaluating
    the ratio there reproduces ``constant`` exactly.  ``growth_flag``
    records that the heuristic, not a certificate, called divergence.
    """

    condition: str
    params: dict
    holds: bool
    constant: float
    witness: object
    growth_flag: bool
    grid: dict
    note: str = field(default="", compare=False)

    def as_dict(self) -> dict:
        return {
            "condition": self.condition,
            "params": self.params,
            "holds": self.holds,
            "constant": self.constant,
            "witness": self.witness,
            "grid": self.grid,
            "growth_flag": self.growth_flag,
        }


# ---------------------------------------------------------------------------
# growth heuristics and shared finishing


def _monotone_up(seg: np.ndarray) -> bool:
    return bool(np.all(np.diff(seg) >= -1e-12 * np.abs(seg[:-1])))


def _outer_decade_growth(xs: np.ndarray, vals: np.ndarray) -> bool:
    """Monotone increase by >= 10x across the outer decade, either end."""
    xs = np.asarray(xs, dtype=float)
    vals = np.asarray(vals, dtype=float)
    ok = np.isfinite(vals) & (vals > 0)
    if ok.sum() < 2:
        return False
    xs, vals = xs[ok], vals[ok]
    lim = _GROWTH_FACTOR * (1.0 - 1e-9)
    hi = xs >= xs[-1] / 10.0
    if hi.sum() >= 2:
        seg = vals[hi]
        if _monotone_up(seg) and seg[-1] >= lim * seg[0]:
            return True
    lo = xs <= xs[0] * 10.0
    if lo.sum() >= 2:
        seg = vals[lo][::-1]  # toward the boundary means decreasing x
        if _monotone_up(seg) and seg[-1] >= lim * seg[0]:
            return True
    return False


def _doubling_growth(vals: np.ndarray) -> bool:
    """Discrete heuristic: constant still climbing by >5% from n/2 to n."""
    n = len(vals) - 1
    if n < 4:
        return False
    run = np.maximum.accumulate(vals)
    half = run[n // 2]
    if not (math.isfinite(half) and half > 0):
        return bool(run[n] > half) if math.isfinite(half) else False
    return bool(run[n] >= _DOUBLING_TOL * half)


def _finish(condition, params, xs, vals, grid_desc, *, discrete=False,
            witnesses=None, note="") -> Verdict:
    vals = np.asarray(vals, dtype=float)
    i = int(np.nanargmax(vals))
    constant = float(vals[i])
    witness = witnesses[i] if witnesses is not None else float(np.asarray(xs)[i])
    if discrete:
        flag = _doubling_growth(vals)
    else:
        flag = _outer_decade_growth(np.asarray(xs, dtype=float), vals)
    holds = math.isfinite(constant) and not flag
    return Verdict(condition, params, holds, constant, witness, flag,
                   grid_desc, note)


def _certified(condition, params, grid_desc, note) -> Verdict:
    return Verdict(condition, params, False, INF, None, True, grid_desc, note)


# ---------------------------------------------------------------------------
# divergence certificates from local power behaviour


def _zero_int_diverges(a: float, lam: float) -> bool:
    """Whether int_0 t^a log(1/t)^lam dt diverges at 0."""
    if a < -1.0 - _EXP_TOL:
        return True
    if abs(a + 1.0) <= _EXP_TOL:
        return lam >= -1.0 - _EXP_TOL
    return False


def _bp_divergent(w: Weight, p: float):
    """Reason the B_p ratio diverges, or None.

    All three equivalent forms blow up exactly when p <= 1 + e for the
    density exponent e at either end; at equality the ratio grows
    logarithmically whatever the log-order, so the certificate ignores
    it.
    """
    z = w.zero_exponent()
    if z is None:
        return "weight vanishes near 0, ratio blows up at the support edge"
    if p <= 1.0 + z[0] + _EXP_TOL:
        return "origin exponent: p <= 1 + e0"
    e = w.tail_exponent()
    if e is not None and p <= 1.0 + e + _EXP_TOL:
        return "tail exponent: p <= 1 + e_inf"
    return None


def _growth_orders(w: Weight, p: float):
    """Growth exponents (with log orders) of W^(1/p)(r)/r at 0 and inf.

    Returns ((a0, l0) or None, (a1, l1) or None); None means the end has
    no power-log description (vanishing near 0, say) and certificates
    must stand down there.
    """
    z = w.zero_exponent()
    zero = None if z is None else ((1.0 + z[0]) / p - 1.0, z[1] / p)
    tail = w.w_tail()
    if tail[0] == "power":
        at_inf = (tail[1] / p - 1.0, 0.0)
    elif tail[0] == "log":
        at_inf = (-1.0, 1.0 / p)
    else:  # saturates to a finite mass
        at_inf = (-1.0, 0.0)
    return zero, at_inf


def _order_exceeds(a, b) -> bool:
    """Whether growth order a = (exp, log) strictly beats b."""
    if a is None or b is None:
        return False
    if a[0] > b[0] + _EXP_TOL:
        return True
    return abs(a[0] - b[0]) <= _EXP_TOL and a[1] > b[1] + _EXP_TOL


# ---------------------------------------------------------------------------
# prefix integrals used by several conditions


def _prefix_quad(fn, rs, points) -> np.ndarray:
    """int_0^r fn for each grid r, accumulated left to right.

    Pure relative tolerance: the early segments are many orders of
    magnitude smaller than the late ones and an absolute floor would
    swamp them.
    """
    out = np.empty(len(rs))
    acc = 0.0
    prev = 0.0
    for i, r in enumerate(rs):
        acc += _quad(fn, prev, float(r), points=points, tol=0.0)
        out[i] = acc
        prev = float(r)
    return out


def dual_prefix_divergent(w: Weight, p: float):
    """Reason int_0 (W(t)/t)^(-p') w(t) dt diverges at the lower end,
    or None.  Needs p > 1."""
    q = p / (p - 1.0)
    z = w.zero_exponent()
    if z is None:
        return "weight vanishes near 0: (W/t)^(-p') is non-integrable at the support edge"
    if _zero_int_diverges(z[0] * (1.0 - q), z[1] * (1.0 - q)):
        return "origin: (W/t)^(-p') w is non-integrable at 0"
    return None


def dual_prefix_curve(w: Weight, p: float, rs) -> np.ndarray:
    """Values of int_0^r (W(t)/t)^(-p') w(t) dt on the grid rs.

    Divergence must be ruled out first via dual_prefix_divergent.
    """
    q = p / (p - 1.0)

    def fn(t):
        d = float(w.density(t))
        if d == 0.0:
            return 0.0
        base = float(w.primitive(t)) / t
        return base ** (-q) * d

    return _prefix_quad(fn, rs, points=w.breakpoints())


# ---------------------------------------------------------------------------
# checkers


def check_delta2(w: Weight, grid: GridSpec | None = None) -> Verdict:
    """Doubling of the primitive: W(2r) <= C W(r) on the grid."""
    g = grid if grid is not None else GridSpec()
    rs = g.points()
    W_r = np.asarray(w.primitive(rs), dtype=float)
    W_2r = np.asarray(w.primitive(2.0 * rs), dtype=float)
    if np.all(W_r == 0.0) and np.all(W_2r == 0.0):
        raise DegenerateWeight(f"{w!r} vanishes on the declared grid")
    vals = np.array([ext_div(a, b) for a, b in zip(W_2r, W_r)])
    return _finish("delta2", {"w": w.spec()}, rs, vals, g.describe())


def check_bp(w: Weight, p: float, mode: str = "ii",
             grid: GridSpec | None = None) -> Verdict:
    """One of the three equivalent forms of the B_p condition.

    mode ii:  int_r^inf (r/t)^p w(t) dt <= C W(r)
    mode iii: int_0^r t^(p-1)/W(t) dt   <= C r^p / W(r)
    mode iv:  int_0^r W^(-1/p)(t) dt    <= C r W^(-1/p)(r)
    """
    if p <= 0:
        raise ValueError("p must be positive")
    if mode not in ("ii", "iii", "iv"):
        raise ValueError(f"unknown mode {mode!r}")
    g = grid if grid is not None else GridSpec()
    params = {"w": w.spec(), "p": p, "mode": mode}
    reason = _bp_divergent(w, p)
    if reason is not None:
        return _certified("bp", params, g.describe(), reason)
    rs = g.points()
    W = np.asarray(w.primitive(rs), dtype=float)
    if mode == "ii":
        vals = np.array([
            ext_div(ext_mul(r ** p, w.tail_power_integral(float(r), p)), Wr)
            for r, Wr in zip(rs, W)
        ])
    elif mode == "iii":
        ints = _prefix_quad(
            lambda t: t ** (p - 1.0) / float(w.primitive(t)),
            rs, points=w.breakpoints())
        vals = np.array([ext_div(ext_mul(I, Wr), r ** p)
                         for I, Wr, r in zip(ints, W, rs)])
    else:
        ints = _prefix_quad(
            lambda t: float(w.primitive(t)) ** (-1.0 / p),
            rs, points=w.breakpoints())
        vals = np.array([ext_div(ext_mul(I, _wpow(Wr, 1.0 / p)), r)
                         for I, Wr, r in zip(ints, W, rs)])
    return _finish("bp", params, rs, vals, g.describe())


def check_bp_weak(w0: Weight, w1: Weight, p0: float, p1: float,
                  grid: GridSpec | None = None) -> Verdict:
    """Weak-type boundedness condition for the averaging operator between
    two weighted cones.

    For p0 > 1 it is the pair
        (int_0^r (W0/t)^(-p0') w0)^(1/p0') W1^(1/p1)(r) <= C r
        W1^(1/p1)(r) <= C W0^(1/p0)(r);
    for p0 <= 1 the two-variable form
        W1^(1/p1)(r)/r <= C W0^(1/p0)(t)/t for all 0 < t < r.
    """
    if p0 <= 0 or p1 <= 0:
        raise ValueError("exponents must be positive")
    g = grid if grid is not None else GridSpec()
    rs = g.points()
    params = {"w0": w0.spec(), "w1": w1.spec(), "p0": p0, "p1": p1}
    desc = g.describe()
    z1, t1 = _growth_orders(w1, p1)
    z0, t0 = _growth_orders(w0, p0)

    if p0 > 1.0:
        reason = dual_prefix_divergent(w0, p0)
        if reason is not None:
            return _certified("bp_weak", params, desc, reason)
        if _order_exceeds(z0, z1):
            return _certified("bp_weak", params, desc,
                              "W1^(1/p1)/W0^(1/p0) blows up as r -> 0")
        if _order_exceeds(t1, t0):
            return _certified("bp_weak", params, desc,
                              "W1^(1/p1)/W0^(1/p0) blows up as r -> inf")
        q = p0 / (p0 - 1.0)
        inner = dual_prefix_curve(w0, p0, rs)
        W0 = np.asarray(w0.primitive(rs), dtype=float)
        W1 = np.asarray(w1.primitive(rs), dtype=float)
        vals = []
        witnesses = []
        for r, I, a, b in zip(rs, inner, W0, W1):
            first = ext_div(ext_mul(_wpow(I, 1.0 / q), _wpow(b, 1.0 / p1)),
                            float(r))
            second = ext_div(_wpow(b, 1.0 / p1), _wpow(a, 1.0 / p0))
            if first >= second:
                vals.append(first)
                witnesses.append(("prefix", float(r)))
            else:
                vals.append(second)
                witnesses.append(("ratio", float(r)))
        return _finish("bp_weak", params, rs, vals, desc,
                       witnesses=witnesses)

    # p0 <= 1: two-variable ratio over grid pairs t < r
    if z0 is not None and z0[0] > _EXP_TOL:
        return _certified("bp_weak", params, desc,
                          "W0^(1/p0)(t)/t vanishes as t -> 0")
    if t1 is not None and t1[0] > _EXP_TOL:
        return _certified("bp_weak", params, desc,
                          "W1^(1/p1)(r)/r blows up as r -> inf")
    if _order_exceeds(z0, z1):
        return _certified("bp_weak", params, desc,
                          "pair ratio blows up as t, r -> 0")
    if _order_exceeds(t1, t0):
        return _certified("bp_weak", params, desc,
                          "pair ratio blows up as t, r -> inf")
    f1 = np.array([ext_div(_wpow(W, 1.0 / p1), float(r))
                   for r, W in zip(rs, np.asarray(w1.primitive(rs), float))])
    f0 = np.array([ext_div(_wpow(W, 1.0 / p0), float(t))
                   for t, W in zip(rs, np.asarray(w0.primitive(rs), float))])
    vals = [0.0]
    witnesses = [(float(rs[0]), float(rs[0]))]
    best_t = 0
    for i in range(1, len(rs)):
        if f0[i - 1] < f0[best_t]:
            best_t = i - 1
        vals.append(ext_div(f1[i], f0[best_t]))
        witnesses.append((float(rs[best_t]), float(rs[i])))
    return _finish("bp_weak", params, rs, vals, desc, witnesses=witnesses)


def check_discrete_bp(omega: Seq, p: float, horizon: int = 256) -> Verdict:
    """Discrete analogue: sum_{k<=n} W_k^(-1/p) <= C (n+1) W_n^(-1/p)."""
    if p <= 0:
        raise ValueError("p must be positive")
    if not omega.is_positive(horizon):
        raise ValueError("sequence must be positive up to the horizon")
    W = omega.prefix_sums(horizon + 1)
    recip = W ** (-1.0 / p)
    lhs = np.cumsum(recip)
    ns = np.arange(horizon + 1)
    vals = lhs / ((ns + 1) * recip)
    v = _finish("discrete_bp", {"p": p, "horizon": horizon}, ns, vals,
                {"horizon": horizon}, discrete=True)
    v.witness = int(v.witness)
    return v


def check_regular(w, grid: GridSpec | None = None,
                  horizon: int = 256) -> Verdict:
    """Density controls its own average: W(t)/t <= C w(t), or for a
    sequence (1/(n+1)) sum_{k<=n} O_k <= C O_n."""
    if isinstance(w, Seq):
        if not w.is_positive(horizon):
            raise ValueError("sequence must be positive up to the horizon")
        ns = np.arange(horizon + 1)
        W = w.prefix_sums(horizon + 1)
        terms = w.head(horizon + 1)
        vals = np.array([ext_div(Wn / (n + 1), o)
                         for n, Wn, o in zip(ns, W, terms)])
        v = _finish("regular", {"horizon": horizon}, ns, vals,
                    {"horizon": horizon}, discrete=True)
        v.witness = int(v.witness)
        return v
    g = grid if grid is not None else GridSpec()
    rs = g.points()
    W = np.asarray(w.primitive(rs), dtype=float)
    d = np.asarray(w.density(rs), dtype=float)
    vals = np.array([ext_div(Wr / r, dr) for r, Wr, dr in zip(rs, W, d)])
    return _finish("regular", {"w": w.spec()}, rs, vals, g.describe())


def default_interval_grid() -> list:
    """Intervals touching 0 (centred and one-sided) and away from 0,
    across sixteen octaves of scales."""
    out = []
    for s in np.geomspace(2.0 ** -8, 2.0 ** 8, 33):
        out.append((-float(s), float(s)))
        out.append((0.0, float(s)))
        out.append((float(s), 2.0 * float(s)))
    return out


def _abs_power_integral(a: float, b: float, beta: float) -> float:
    """int_a^b |x|^(-beta) dx, exact, inf when the origin singularity is
    non-integrable."""
    def one_sided(hi):  # int_0^hi x^(-beta) dx
        if hi == 0.0:
            return 0.0
        if beta >= 1.0:
            return INF
        return hi ** (1.0 - beta) / (1.0 - beta)

    if a >= 0.0:
        return one_sided(b) - one_sided(a)
    if b <= 0.0:
        return one_sided(-a) - one_sided(-b)
    lo = one_sided(-a)
    hi = one_sided(b)
    return INF if math.isinf(lo) or math.isinf(hi) else lo + hi


def _recip_avg(u: LineMeasure, a: float, b: float, p: float) -> float:
    """(1/|Q|) int_Q u^(-1/(p-1)), exact for the families with closed
    forms and quadrature otherwise."""
    beta = 1.0 / (p - 1.0)
    length = b - a
    if isinstance(u, PowerAbs):
        val = _abs_power_integral(a, b, u.alpha * beta)
        return ext_mul(u.scale ** -beta, val) / length
    if isinstance(u, StepMeasure):
        total = 0.0
        for lo, hi, lvl in u._pieces_on(a, b):
            if lvl == 0.0:
                return INF
            total += (hi - lo) * lvl ** -beta  # lvl comes back scaled
        return total / length
    val = _quad(lambda x: float(u.density(x)) ** -beta, a, b,
                points=u.breakpoints())
    return val / length


def check_ap(u: LineMeasure, p: float, intervals=None) -> Verdict:
    """Muckenhoupt-type condition on a grid of intervals.

    p > 1: (u(Q)/|Q|) ((1/|Q|) int_Q u^(-1/(p-1)))^(p-1) <= C
    p = 1: (u(Q)/|Q|) / essinf_Q u <= C
    """
    if p < 1:
        raise ValueError("p must be at least 1")
    qs = list(intervals) if intervals is not None else default_interval_grid()
    vals = []
    lengths = []
    for a, b in qs:
        if not b > a:
            raise ValueError("intervals must have positive length")
        avg = u.mass(a, b) / (b - a)
        if p == 1.0:
            lo = float(u.range_on(a, b)[0])
            vals.append(ext_div(avg, lo))
        else:
            vals.append(ext_mul(avg, _wpow(_recip_avg(u, a, b, p), p - 1.0)))
        lengths.append(max(abs(a), abs(b)))
    # the growth scan works per scale, not per interval: several interval
    # shapes probe each scale and only their worst ratio matters
    order = np.argsort(lengths, kind="stable")
    xs, vv = [], []
    for i in order:
        if xs and lengths[i] == xs[-1]:
            vv[-1] = max(vv[-1], vals[i])
        else:
            xs.append(lengths[i])
            vv.append(vals[i])
    flag = _outer_decade_growth(np.asarray(xs), np.asarray(vv))
    i = int(np.nanargmax(vals))
    constant = float(vals[i])
    holds = math.isfinite(constant) and not flag
    return Verdict("ap", {"u": u.spec(), "p": p}, holds, constant,
                   tuple(qs[i]), flag, {"intervals": len(qs)})


def _index_predicate(w: Weight, p: float) -> bool:
    """Whether t^p/W(t) lies in L^(p'-1)((0,1), dt/t).

    Supremum form for p <= 1 (boundary included), integral form for
    p > 1 (boundary excluded); both decided by the decade ladder of the
    integrand toward 0.
    """
    if p <= 1.0:
        logs = []
        for k in range(10, 46):
            t = 2.0 ** -k
            Wt = float(w.primitive(t))
            if Wt == 0.0:
                return False
            logs.append(p * math.log(t) - math.log(Wt))
        inc = np.diff(logs)
        return float(np.mean(inc[-8:])) <= 1e-9
    q = 1.0 / (p - 1.0)

    def g(t):
        try:
            return (t ** p / float(w.primitive(t))) ** q / t
        except OverflowError:
            return INF

    decades = []
    for k in range(30, 42):
        val = _quad(g, 2.0 ** -(k + 1), 2.0 ** -k, points=w.breakpoints())
        if math.isinf(val):
            return False
        decades.append(val)
    if decades[-1] == 0.0:
        return True
    ratios = [b / a for a, b in zip(decades[:-1], decades[1:]) if a > 0]
    return float(np.mean(ratios[-6:])) < 1.0 - 1e-9


def index_pw(w: Weight, p_grid=None) -> float:
    """Infimum exponent p for which t^p/W(t) lies in the dual Lorentz
    scale on (0,1), to tolerance 1e-3.

    Depends only on the behaviour of w near 0.
    """
    grid = sorted(p_grid) if p_grid is not None else list(
        np.geomspace(1.0 / 16.0, 8.0, 19))
    lo = hi = None
    for pcur in grid:
        if _index_predicate(w, pcur):
            hi = pcur
            break
        lo = pcur
    if hi is None:
        hi = grid[-1]
        while hi < 64.0:
            lo, hi = hi, hi * 2.0
            if _index_predicate(w, hi):
                break
        else:
            return INF
    if lo is None:
        lo = grid[0]
        while lo > 1e-3:
            hi, lo = lo, lo / 2.0
            if not _index_predicate(w, lo):
                break
        else:
            return lo
    while hi - lo > 1e-3:
        mid = 0.5 * (lo + hi)
        if _index_predicate(w, mid):
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


def check_dual_trivial(w: Weight, p: float, t_grid=None,
                       r_grid=None) -> Verdict:
    """Whether g(t) = sup_r W^(1/p)(tr)/(t W^(1/p)(r)) tends to 0 with t.

    holds means the weak space has only the zero functional: g drops
    below g(1)/10 and the log-log tail slope stays positive.
    """
    if p <= 0:
        raise ValueError("p must be positive")
    ts = (np.asarray(t_grid, dtype=float) if t_grid is not None
          else np.geomspace(1.0, 2.0 ** -30, 61))
    ts = np.sort(ts)[::-1]
    if ts[0] != 1.0:
        ts = np.concatenate([[1.0], ts])
    rs = (np.asarray(r_grid, dtype=float) if r_grid is not None
          else GridSpec().points())
    denom = _wpowv(np.asarray(w.primitive(rs), dtype=float), 1.0 / p)
    gvals = np.empty(len(ts))
    arg = np.empty(len(ts))
    for i, t in enumerate(ts):
        numer = _wpowv(np.asarray(w.primitive(t * rs), dtype=float), 1.0 / p)
        ratios = np.array([ext_div(a, ext_mul(t, b))
                           for a, b in zip(numer, denom)])
        j = int(np.argmax(ratios))
        gvals[i] = ratios[j]
        arg[i] = rs[j]
    g1 = gvals[0]
    gmin = gvals[-1]
    tail = ts <= ts[-1] * 10.0
    trending = False
    if np.all(np.isfinite(gvals[tail])) and np.all(gvals[tail] > 0):
        slope = float(np.polyfit(np.log(ts[tail]), np.log(gvals[tail]), 1)[0])
        trending = slope >= 0.01
    elif np.any(gvals[tail] == 0.0):
        trending = True
    holds = (math.isfinite(g1) and g1 > 0 and gmin < 0.1 * g1 and trending)
    flag = _outer_decade_growth(ts[::-1], gvals[::-1])
    return Verdict("dual_trivial", {"w": w.spec(), "p": p}, holds,
                   float(gmin), (float(ts[-1]), float(arg[-1])), flag,
                   {"t_min": float(ts[-1]), "t_points": len(ts),
                    "r_points": len(rs)})
