"""Interval arithmetic: containment, tier behaviour, serialization."""

import math
from fractions import Fraction

import mpmath
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from grhdesk.errors import (
    DivisorContainsZero,
    LogDomain,
    NegativeSqrtDomain,
    NonPositiveRealPart,
)
from grhdesk.interval import (
    ARITH_OPS,
    ELEM_OPS,
    HARDWARE,
    ComplexBox,
    RealInterval,
    arith,
    bigfloat,
    elem,
    log_gamma,
    pi_interval,
)

B128 = bigfloat(128)
TIERS = [HARDWARE, B128]


def mp_fraction(x, prec=220) -> Fraction:
    """Exact rational value of an mpmath float."""
    with mpmath.workprec(prec):
        sign, man, exp, _ = mpmath.mpf(x)._mpf_
    v = Fraction(int(man)) * Fraction(2) ** exp
    return -v if sign else v


def assert_contains_mp(iv: RealInterval, mp_value):
    fr = mp_fraction(mp_value)
    assert iv.lo_fraction() <= fr <= iv.hi_fraction(), (iv, mp_value)


# ---------------------------------------------------------------------------
# arithmetic


@pytest.mark.parametrize("tier", TIERS, ids=str)
def test_add_exact_endpoints(tier):
    s = arith("add", RealInterval(1, 2, tier), RealInterval(3, 4, tier))
    assert s.contains(4) and s.contains(6)
    assert s.lo_fraction() == 4 and s.hi_fraction() == 6


@pytest.mark.parametrize("tier", TIERS, ids=str)
def test_mul_sign_analysis(tier):
    p = arith("mul", RealInterval(-1, 1, tier), RealInterval(-1, 1, tier))
    assert p.lo_fraction() == -1 and p.hi_fraction() == 1


@pytest.mark.parametrize("tier", TIERS, ids=str)
def test_div_one_third_outward(tier):
    q = arith("div", RealInterval(1, 1, tier), RealInterval(3, 3, tier))
    third = Fraction(1, 3)
    assert q.lo_fraction() < third < q.hi_fraction()
    assert q.hi_fraction() > q.lo_fraction()


@pytest.mark.parametrize("tier", TIERS, ids=str)
def test_div_by_zero_straddle(tier):
    with pytest.raises(DivisorContainsZero):
        arith("div", RealInterval(1, 1, tier), RealInterval(-1, 1, tier))


@pytest.mark.parametrize("tier", TIERS, ids=str)
def test_sqrt_domain(tier):
    r = arith("sqrt", RealInterval(2, 2, tier))
    with mpmath.workprec(220):
        assert_contains_mp(r, mpmath.sqrt(2))
    with pytest.raises(NegativeSqrtDomain):
        arith("sqrt", RealInterval(-1, 1, tier))


def test_sub_and_negation():
    d = RealInterval(1, 2) - RealInterval(3, 4)
    assert d.lo == -3.0 and d.hi == -1.0


# ---------------------------------------------------------------------------
# elementary functions


@pytest.mark.parametrize("tier", TIERS, ids=str)
def test_exp_zero(tier):
    r = elem("exp", RealInterval.zero(tier))
    assert r.contains(1)


@pytest.mark.parametrize("tier", TIERS, ids=str)
def test_sin_over_zero_to_pi(tier):
    x = RealInterval.zero(tier).hull(pi_interval(tier))
    r = elem("sin", x)
    assert r.contains(0) and r.contains(1)
    eps = Fraction(1, 10**12)
    assert -eps <= r.lo_fraction() and r.hi_fraction() <= 1 + eps


@pytest.mark.parametrize("tier", TIERS, ids=str)
def test_log_exp_roundtrip(tier):
    r = elem("log", elem("exp", RealInterval.one(tier)))
    assert r.contains(1)


@pytest.mark.parametrize("tier", TIERS, ids=str)
def test_log_domain(tier):
    with pytest.raises(LogDomain):
        elem("log", RealInterval(0, 1, tier))


def test_cos_interval_spanning_minimum():
    r = RealInterval(3.0, 3.3).cos()
    assert r.lo == -1.0
    assert r.hi < math.cos(3.3) + 1e-12


def test_trig_full_period_clamps():
    r = RealInterval(0.0, 10.0).sin()
    assert r.lo == -1.0 and r.hi == 1.0


@pytest.mark.parametrize("tier", TIERS, ids=str)
@pytest.mark.parametrize("fname", ELEM_OPS)
def test_elem_width_near_image_width(tier, fname):
    # on a monotone subrange the result barely exceeds the image width
    x = RealInterval.from_decimal("0.5", tier)
    y = elem(fname, x)
    ulp = math.ulp(max(abs(y.lo_float()), abs(y.hi_float()), 1e-300))
    if tier.kind == "hardware":
        assert y.width() <= 8 * ulp
    else:
        assert y.width() <= 1e-30


# ---------------------------------------------------------------------------
# transcendental containment against a higher-precision oracle


@pytest.mark.parametrize("tier", TIERS, ids=str)
def test_containment_against_oracle_grid(tier):
    pts = [0.001, 0.3, 0.5, 1.0, 1.5, 2.718, 10.0, 123.456, 2500.0]
    with mpmath.workprec(200):
        for v in pts:
            x = RealInterval.point(v, tier)
            assert_contains_mp(x.exp() if v < 700 else x, mpmath.exp(v) if v < 700 else v)
            assert_contains_mp(x.log(), mpmath.log(v))
            assert_contains_mp(x.sin(), mpmath.sin(v))
            assert_contains_mp(x.cos(), mpmath.cos(v))
            assert_contains_mp(x.atan(), mpmath.atan(v))
            assert_contains_mp(x.sqrt(), mpmath.sqrt(v))


def test_pi_interval_contains_pi():
    for tier in TIERS:
        assert_contains_mp(pi_interval(tier), mpmath.pi)


# ---------------------------------------------------------------------------
# log_gamma


@pytest.mark.parametrize("tier", TIERS, ids=str)
def test_log_gamma_at_one(tier):
    lg = log_gamma(ComplexBox.one(tier))
    assert lg.re.contains(0) and lg.im.contains(0)


@pytest.mark.parametrize("tier", TIERS, ids=str)
def test_log_gamma_at_half(tier):
    z = ComplexBox.from_real(RealInterval.from_fraction(Fraction(1, 2), tier))
    lg = log_gamma(z)
    with mpmath.workprec(200):
        assert_contains_mp(lg.re, mpmath.log(mpmath.sqrt(mpmath.pi)))
    assert lg.im.contains(0)


def stirling_reference(z, prec=300, terms=60):
    """Independent Stirling evaluation with doubled term count.

    Shifts far right (|z| large), sums the asymptotic series at high
    precision, and undoes the shift.  Used as the oracle for log_gamma.
    """
    with mpmath.workprec(prec):
        z = mpmath.mpc(z)
        shift = mpmath.mpc(0)
        while abs(z) < 2 * terms:
            shift += mpmath.log(z)
            z += 1
        out = (z - mpmath.mpf(1) / 2) * mpmath.log(z) - z + mpmath.log(
            2 * mpmath.pi
        ) / 2
        for k in range(1, terms + 1):
            b = mpmath.bernoulli(2 * k)
            out += b / ((2 * k) * (2 * k - 1) * z ** (2 * k - 1))
        out -= shift
        return +out.real, +out.imag


@pytest.mark.parametrize("tier", TIERS, ids=str)
def test_log_gamma_3_plus_4i(tier):
    lg = log_gamma(ComplexBox.point(complex(3, 4), tier))
    re_ref, im_ref = stirling_reference(complex(3, 4))
    assert_contains_mp(lg.re, re_ref)
    assert_contains_mp(lg.im, im_ref)


@pytest.mark.parametrize(
    "z", [complex(0.25, 0.5), complex(0.75, 50.0), complex(1.25, 1250.0), complex(0.5, 5000.0)]
)
def test_log_gamma_tall_arguments(z):
    for tier in TIERS:
        lg = log_gamma(ComplexBox.point(z, tier))
        re_ref, im_ref = stirling_reference(z)
        assert_contains_mp(lg.re, re_ref)
        assert_contains_mp(lg.im, im_ref)
        assert lg.re.width() < 1e-9


def test_log_gamma_domain_error():
    with pytest.raises(NonPositiveRealPart):
        log_gamma(ComplexBox.point(complex(-1.0, 0.5)))


# ---------------------------------------------------------------------------
# widen_to


def test_widen_exact_value_roundtrip():
    one = RealInterval.one(B128).widen_to(HARDWARE)
    assert one.lo == 1.0 and one.hi == 1.0


def test_widen_pi_to_hardware_is_wider():
    pb = pi_interval(B128)
    ph = pb.widen_to(HARDWARE)
    assert ph.lo_fraction() <= pb.lo_fraction()
    assert ph.hi_fraction() >= pb.hi_fraction()
    assert_contains_mp(ph, mpmath.pi)


@given(
    st.floats(min_value=-1e12, max_value=1e12, allow_nan=False),
    st.floats(min_value=0, max_value=1e-3),
)
def test_widen_roundtrip_contains(mid, rad):
    x = RealInterval(mid - rad, mid + rad, B128)
    back = x.widen_to(HARDWARE).widen_to(B128)
    assert back.contains_interval(x)


# ---------------------------------------------------------------------------
# randomized containment under composition

finite = st.floats(min_value=-50.0, max_value=50.0, allow_nan=False)


@settings(max_examples=400, deadline=None)
@given(
    st.lists(
        st.tuples(st.sampled_from(ARITH_OPS + ELEM_OPS), finite, finite),
        min_size=1,
        max_size=8,
    ),
    finite,
)
def test_containment_under_composition(prog, seed):
    """Evaluate a random op chain pointwise at 4x precision and inside
    intervals at both tiers; the point result must land in every interval."""
    with mpmath.workprec(4 * 53):
        point = mpmath.mpf(seed)
        accs = {tier: RealInterval.point(seed, tier) for tier in TIERS}
        for op, x, _ in prog:
            try:
                if op in ("add", "sub", "mul", "div"):
                    pt_other = mpmath.mpf(x)
                    nxt = {}
                    for tier, acc in accs.items():
                        nxt[tier] = arith(op, acc, RealInterval.point(x, tier))
                    point = {
                        "add": point + pt_other,
                        "sub": point - pt_other,
                        "mul": point * pt_other,
                        "div": point / pt_other if pt_other != 0 else None,
                    }[op]
                    if point is None:
                        return
                    accs = nxt
                elif op == "sqrt":
                    accs = {tier: arith("sqrt", acc) for tier, acc in accs.items()}
                    point = mpmath.sqrt(point)
                elif op in ("exp", "log", "sin", "cos", "atan"):
                    if op == "exp" and point > 300:
                        return
                    accs = {tier: elem(op, acc) for tier, acc in accs.items()}
                    point = getattr(mpmath, op)(point)
            except (DivisorContainsZero, NegativeSqrtDomain, LogDomain, ValueError):
                return
            if abs(point) > 1e100:
                return
        fr = mp_fraction(point)
        for tier, acc in accs.items():
            assert acc.lo_fraction() <= fr <= acc.hi_fraction(), (tier, prog, seed)


@settings(max_examples=200, deadline=None)
@given(finite, finite, finite, finite)
def test_tiers_intersect_on_same_expression(a, b, c, d):
    lo1, hi1 = sorted((a, b))
    lo2, hi2 = sorted((c, d))
    res = {}
    for tier in TIERS:
        x = RealInterval(lo1, hi1, tier)
        y = RealInterval(lo2, hi2, tier)
        res[tier.kind] = (x * y + x).sin()
    h, g = res["hardware"], res["bigfloat"]
    assert h.lo_fraction() <= g.hi_fraction() and g.lo_fraction() <= h.hi_fraction()


@settings(max_examples=200, deadline=None)
@given(finite, st.floats(min_value=0, max_value=1.0), st.sampled_from(ELEM_OPS))
def test_inclusion_isotonicity(mid, rad, fname):
    narrow = RealInterval(mid, mid + rad / 2)
    wide = RealInterval(mid - rad / 2, mid + rad)
    try:
        out_wide = elem(fname, wide)
    except LogDomain:
        return
    out_narrow = elem(fname, narrow)
    assert out_wide.contains_interval(out_narrow)


# ---------------------------------------------------------------------------
# complex boxes


@pytest.mark.parametrize("tier", TIERS, ids=str)
def test_complex_mul_div_roundtrip(tier):
    z = ComplexBox.point(complex(1.5, -2.5), tier)
    w = ComplexBox.point(complex(-0.75, 0.125), tier)
    r = (z * w) / w
    assert r.re.contains(Fraction(3, 2)) and r.im.contains(Fraction(-5, 2))


@pytest.mark.parametrize("tier", TIERS, ids=str)
def test_complex_exp_log(tier):
    z = ComplexBox.point(complex(0.5, 1.0), tier)
    r = z.exp().log()
    assert r.re.contains(Fraction(1, 2)) and r.im.contains(1)


def test_complex_abs():
    z = ComplexBox.point(complex(3, 4))
    assert z.abs().contains(5)


def test_complex_log_needs_right_half_plane():
    with pytest.raises(NonPositiveRealPart):
        ComplexBox.point(complex(-1, 1)).log()


def test_complex_div_by_zero_box():
    z = ComplexBox.point(complex(1, 1))
    w = ComplexBox(RealInterval(-1, 1), RealInterval(-1, 1))
    with pytest.raises(DivisorContainsZero):
        z / w


@settings(max_examples=200, deadline=None)
@given(finite, finite, finite, finite)
def test_complex_mul_containment(ar, ai, br, bi):
    with mpmath.workprec(212):
        za = mpmath.mpc(ar, ai)
        zb = mpmath.mpc(br, bi)
        prod = za * zb
    for tier in TIERS:
        box = ComplexBox.point(complex(ar, ai), tier) * ComplexBox.point(
            complex(br, bi), tier
        )
        assert box.re.lo_fraction() <= mp_fraction(prod.real) <= box.re.hi_fraction()
        assert box.im.lo_fraction() <= mp_fraction(prod.imag) <= box.im.hi_fraction()


# ---------------------------------------------------------------------------
# serialization


@pytest.mark.parametrize("tier", TIERS, ids=str)
def test_hex_roundtrip_lossless(tier):
    x = RealInterval.point(1.5, tier).exp().sin()
    y = RealInterval.from_hex(x.to_hex(), tier)
    assert y.lo_fraction() == x.lo_fraction()
    assert y.hi_fraction() == x.hi_fraction()


def test_hex_roundtrip_complex():
    z = ComplexBox.point(complex(-0.3, 0.7), B128).exp()
    w = ComplexBox.from_hex(z.to_hex(), B128)
    assert w.re.lo_fraction() == z.re.lo_fraction()
    assert w.im.hi_fraction() == z.im.hi_fraction()


# ---------------------------------------------------------------------------
# structural


def test_invalid_endpoints_rejected():
    with pytest.raises(ValueError):
        RealInterval(2, 1)


def test_tier_mixing_rejected():
    with pytest.raises(TypeError):
        RealInterval(1, 2, HARDWARE) + RealInterval(1, 2, B128)


def test_sign_and_zero_queries():
    assert RealInterval(1, 2).sign() == 1
    assert RealInterval(-2, -1).sign() == -1
    assert RealInterval(-1, 1).sign() == 0
    assert RealInterval(-1, 1).contains_zero()
    assert not RealInterval(1, 2).contains_zero()


def test_pad_widens_both_sides():
    x = RealInterval(1, 2).pad(RealInterval.point(0.5))
    assert x.lo <= 0.5 and x.hi >= 2.5
