import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from lorentzlab import (
    Chi,
    Const,
    ExpAbs,
    InvShift,
    LogPlus,
    One,
    OnePlusAbs,
    OnePlusLog,
    Power,
    PowerAbs,
    PowerXform,
    StepFunction,
    StepMeasure,
    StepWeight,
    UnboundedSupport,
    distribution,
    double_star,
    double_star_curve,
    ext_div,
    ext_mul,
    integrate,
    parse_measure,
    parse_step_function,
    parse_weight,
    primitive,
    rearrange,
)

# ---------------------------------------------------------------------------
# oracles


def sampled_distribution(f, mu, t):
    """mu({f > t}) by scanning the pieces; independent of the curve code."""
    total = 0.0
    for a, b, v in zip(f.breaks[:-1], f.breaks[1:], f.values):
        if v > t:
            total += mu.mass(a, b)
    return total


def sampled_rearrangement(f, mu, t):
    """f*(t) = inf{s >= 0 : mu({f > s}) <= t} by scanning distinct values."""
    levels = [0.0] + list(f.distinct_values())
    best = math.inf
    for s in levels:
        if sampled_distribution(f, mu, s) <= t:
            best = min(best, s)
    return best


def riemann(fn, a, b, n=20000, cuts=()):
    total = 0.0
    edges = sorted({a, b} | {c for c in cuts if a < c < b})
    for lo, hi in zip(edges[:-1], edges[1:]):
        xs = np.linspace(lo, hi, n + 1)
        mids = (xs[:-1] + xs[1:]) / 2
        total += float(np.sum(fn(mids)) * (hi - lo) / n)
    return total


# random generators shared with the hypothesis strategies

step_functions = st.builds(
    lambda cuts, vals: StepFunction(sorted(set(cuts)), vals[: len(set(cuts)) - 1] + [0.0] * max(0, len(set(cuts)) - 1 - len(vals))),
    st.lists(st.floats(0, 50, allow_nan=False), min_size=2, max_size=8, unique=True),
    st.lists(st.floats(0, 20, allow_nan=False), min_size=1, max_size=7),
)

measures = st.sampled_from([One(), ExpAbs(), PowerAbs(1.0), PowerAbs(-0.5),
                            OnePlusAbs(), StepMeasure((0.0, 1.0, 3.0), (2.0, 0.5, 1.0))])


# ---------------------------------------------------------------------------
# extended-real conventions


def test_ext_conventions():
    assert ext_mul(0.0, math.inf) == 0.0
    assert ext_mul(math.inf, 0.0) == 0.0
    assert ext_mul(2.0, math.inf) == math.inf
    assert ext_div(0.0, 0.0) == 0.0
    assert ext_div(math.inf, math.inf) == 0.0
    assert ext_div(3.0, 0.0) == math.inf
    assert ext_div(3.0, math.inf) == 0.0
    assert ext_div(6.0, 3.0) == 2.0


# ---------------------------------------------------------------------------
# step functions


def test_canonicalization_merges_and_trims():
    f = StepFunction([0, 1, 1, 2, 3, 4], [0, 2, 2, 2, 0])
    assert f == StepFunction([1, 3], [2])
    assert StepFunction([0, 5], [0]).is_zero


def test_addition_refines_grids():
    h = StepFunction([0, 1], [2]) + StepFunction([0.5, 2], [3])
    assert h == StepFunction([0, 0.5, 1, 2], [2, 5, 3])


def test_level_set_merges_adjacent():
    h = StepFunction([0, 1, 2, 3], [3, 4, 3])
    assert h.level_set(2.5) == [(0.0, 3.0)]
    assert h.level_set(3.0) == [(1.0, 2.0)]
    assert h.level_set(4.0) == []


def test_truncation_identity():
    f = StepFunction([0, 1, 2, 4], [5, 2, 3])
    for h in (0.0, 1.5, 2.0, 6.0):
        assert f.min_height(h) + f.excess(h) == f


def test_primitive_is_exact():
    f = StepFunction([0, 2, 3], [1, 5])
    assert f.primitive_at(0) == 0.0
    assert f.primitive_at(2.5) == 4.5
    assert f.primitive_at(10) == 7.0
    assert f.integral() == 7.0


# ---------------------------------------------------------------------------
# weights


WEIGHTS = [Const(), Power(0.5), Power(-0.5), Power(2.0), Chi(1.0), Chi(3.5),
           LogPlus(1.0), LogPlus(0.5), OnePlusLog(), InvShift(),
           StepWeight((0.0, 1.0, 2.0), (1.0, 2.0, 0.0)),
           StepWeight((0.5, 1.0), (0.0, 3.0)),
           PowerXform(Chi(1.0), a=1.0, n=2), Power(1.0, scale=2.5)]


@pytest.mark.parametrize("w", WEIGHTS, ids=lambda w: w.spec())
def test_primitive_matches_density(w):
    # W' = w away from kinks, checked by a fine Riemann sum on [lo, hi]
    rng = np.random.default_rng(7)
    for _ in range(6):
        lo, hi = np.sort(rng.uniform(0.01, 4.0, 2))
        if hi - lo < 1e-3:
            continue
        approx = riemann(lambda t: w.density(t), lo, hi, cuts=w.breakpoints())
        exact = primitive(w, hi) - primitive(w, lo)
        assert approx == pytest.approx(exact, rel=1e-5, abs=1e-7)


@pytest.mark.parametrize("w", WEIGHTS, ids=lambda w: w.spec())
def test_primitive_basics(w):
    assert primitive(w, 0.0) == 0.0
    ts = np.linspace(0, 10, 50)
    vals = w.primitive(ts)
    assert np.all(np.diff(vals) >= -1e-15)
    end = w.support_end()
    if math.isfinite(end):
        assert primitive(w, end + 5.0) == pytest.approx(w.primitive_inf(), rel=1e-12)


def test_tail_power_integral_closed_forms():
    # power alpha: int_r^inf t^(alpha-p) dt = r^(alpha-p+1)/(p-alpha-1)
    assert Power(1.0).tail_power_integral(2.0, 3.0) == pytest.approx(0.5)
    assert Power(1.0).tail_power_integral(1.0, 2.0) == math.inf
    assert Const().tail_power_integral(1.0, 1.0) == math.inf
    assert Chi(1.0).tail_power_integral(2.0, 5.0) == 0.0
    got = Chi(2.0).tail_power_integral(1.0, 2.0)
    assert got == pytest.approx(0.5)  # int_1^2 t^-2 dt


def test_weight_spec_round_trip():
    for w in WEIGHTS:
        if isinstance(w, PowerXform):
            continue  # not part of the textual mini-language
        again = parse_weight(w.spec())
        ts = np.linspace(0.01, 6, 40)
        assert np.allclose(again.primitive(ts), w.primitive(ts), rtol=1e-14)


def test_logplus_rejects_nonpositive_exponent():
    with pytest.raises(ValueError):
        LogPlus(0.0)
    with pytest.raises(ValueError):
        LogPlus(-0.5)


# ---------------------------------------------------------------------------
# measures


MEASURES = [One(), ExpAbs(), PowerAbs(1.0), PowerAbs(-0.5), OnePlusAbs(),
            StepMeasure((0.0, 1.0, 3.0), (2.0, 0.5, 1.0))]


@pytest.mark.parametrize("u", MEASURES, ids=lambda u: u.spec())
def test_mass_matches_density(u):
    rng = np.random.default_rng(3)
    for _ in range(6):
        a, b = np.sort(rng.uniform(-4, 4, 2))
        if b - a < 1e-2 or (a < 0.01 and b > -0.01 and isinstance(u, PowerAbs) and u.alpha < 0):
            continue
        assert riemann(u.density, a, b, cuts=u.breakpoints()) == pytest.approx(
            u.mass(a, b), rel=1e-4, abs=1e-6)


@pytest.mark.parametrize("u", MEASURES, ids=lambda u: u.spec())
def test_sublevel_consistency(u):
    # sublevel(c) really is {density < c}, and its mass matches direct sums
    rng = np.random.default_rng(5)
    for _ in range(8):
        a, b = np.sort(rng.uniform(-3, 3, 2))
        if b - a < 0.05:
            continue
        c = float(rng.uniform(0.1, 6.0))
        parts = u.sublevel(c, a, b)
        for lo, hi in parts:
            assert a <= lo < hi <= b
            mids = np.linspace(lo + 1e-9, hi - 1e-9, 7)
            assert np.all(u.density(mids) < c + 1e-9)
        covered = sorted(parts)
        # points outside the sublevel parts should sit at density >= c
        probe = np.linspace(a + 1e-6, b - 1e-6, 101)
        inside = np.zeros_like(probe, dtype=bool)
        for lo, hi in covered:
            inside |= (probe >= lo) & (probe <= hi)
        away = probe[~inside]
        if away.size:
            assert np.all(u.density(away) >= c - 1e-9)


def test_range_on_brackets_density():
    rng = np.random.default_rng(11)
    for u in MEASURES:
        for _ in range(5):
            a, b = np.sort(rng.uniform(-3, 3, 2))
            if b - a < 0.05:
                continue
            lo, hi = u.range_on(a, b)
            xs = np.linspace(a + 1e-9, b - 1e-9, 201)
            vals = u.density(xs)
            vals = vals[np.isfinite(vals)]
            assert np.all(vals >= lo - 1e-9)
            assert np.all(vals <= hi + 1e-9)


# ---------------------------------------------------------------------------
# rearrangement


def test_worked_rearrangement():
    f = StepFunction([0, 2, 3], [1, 5])
    assert rearrange(f) == StepFunction([0, 1, 3], [5, 1])


def test_rearrangement_under_exp_measure():
    f = StepFunction([0, 1], [1])
    fs = rearrange(f, ExpAbs())
    assert fs.values.tolist() == [1.0]
    assert fs.breaks[-1] == pytest.approx(math.e - 1, rel=1e-15)


@settings(max_examples=60, deadline=None)
@given(f=step_functions, mu=measures)
def test_equimeasurability(f, mu):
    lam_f = distribution(f, mu)
    lam_star = distribution(rearrange(f, mu), One())
    ts = np.linspace(0, f.max_value() * 1.1 + 1, 37)
    for t in ts:
        assert lam_star(float(t)) == pytest.approx(lam_f(float(t)), rel=1e-12, abs=1e-12)


@settings(max_examples=60, deadline=None)
@given(f=step_functions, mu=measures, p=st.sampled_from([1.0, 2.0]))
def test_power_integral_preserved(f, mu, p):
    fs = rearrange(f, mu)
    lhs = fs.power(p).integral()
    rhs = 0.0
    for a, b, v in zip(f.breaks[:-1], f.breaks[1:], f.values):
        rhs += v ** p * mu.mass(a, b)
    assert lhs == pytest.approx(rhs, rel=1e-12, abs=1e-12)


@settings(max_examples=60, deadline=None)
@given(f=step_functions, mu=measures)
def test_rearrangement_nonincreasing_and_matches_inf_formula(f, mu):
    fs = rearrange(f, mu)
    assert np.all(np.diff(fs.values) < 0) or fs.values.size <= 1
    for t in np.linspace(0, fs.breaks[-1] * 1.2 + 0.5, 23):
        want = sampled_rearrangement(f, mu, float(t))
        assert fs(float(t)) == pytest.approx(want, rel=1e-12, abs=1e-12)


def test_double_star_dominates_and_decays():
    f = StepFunction([0, 1], [1])
    assert double_star(f, 0.5) == 1.0
    assert double_star(f, 3.0) == pytest.approx(1 / 3)
    c = double_star_curve(f)
    fs = rearrange(f)
    for t in np.linspace(0.05, 6, 40):
        assert c(float(t)) >= fs(float(t)) - 1e-15
    # t * f**(t) nondecreasing
    ts = np.linspace(0.05, 6, 40)
    prods = np.array([t * c(float(t)) for t in ts])
    assert np.all(np.diff(prods) >= -1e-12)


# ---------------------------------------------------------------------------
# integration


def test_integrate_exact_on_steps():
    f = StepFunction([0, 1, 2], [3, 1])
    assert integrate(f, Const(), 0, math.inf) == pytest.approx(4.0)
    assert integrate(f, Chi(1.5), 0, math.inf) == pytest.approx(3 + 0.5)
    assert integrate(f, Power(1.0), 0, 2) == pytest.approx(3 * 0.5 + 1 * (2 - 0.5))


def test_integrate_quad_path_matches_riemann():
    f = StepFunction([0, 1], [1])
    c = double_star_curve(f)  # 1 then 1/t
    w = OnePlusLog()
    got = integrate(c, w, 0, 5)
    want = riemann(lambda t: np.array([c(float(x)) for x in np.atleast_1d(t)]) * w.density(t), 1e-9, 5, 40000)
    assert got == pytest.approx(want, rel=1e-4)


def test_integrate_divergent_tail_is_inf():
    f = StepFunction([0, 1], [1])
    c = double_star_curve(f)
    # 1/t tail against a constant weight diverges
    assert integrate(c, Const(), 0, math.inf) == math.inf
    # but against chi it converges
    assert integrate(c, Chi(4.0), 0, math.inf) == pytest.approx(1 + math.log(4))


# ---------------------------------------------------------------------------
# parsing


def test_parse_weight_families():
    assert isinstance(parse_weight("one"), Const)
    w = parse_weight("POWER:a=-0.5")
    assert isinstance(w, Power) and w.alpha == -0.5
    w = parse_weight("chi:b=2*3")
    assert isinstance(w, Chi) and w.b == 2.0 and w.scale == 3.0
    w = parse_weight("step:0,1;1,0")
    assert isinstance(w, StepWeight)
    with pytest.raises(ValueError):
        parse_weight("nope")


def test_parse_step_function_requires_compact_support():
    f = parse_step_function("step:0,1;1,0")
    assert f == StepFunction([0, 1], [1])
    with pytest.raises(UnboundedSupport):
        parse_step_function("step:0,1;1,2")
    g = parse_step_function("step:0,2;1,5;3,0*2")
    assert g == StepFunction([0, 1, 3], [4, 10])


def test_parse_measure_families():
    assert isinstance(parse_measure("one"), One)
    assert isinstance(parse_measure("expabs"), ExpAbs)
    u = parse_measure("powerabs:a=0.5*2")
    assert isinstance(u, PowerAbs) and u.alpha == 0.5 and u.scale == 2.0
