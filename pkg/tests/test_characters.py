"""Character group structure against brute-force definitions."""

import math
from fractions import Fraction

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from grhdesk.characters import (
    CharGroup,
    char_group,
    euler_phi,
    factorize,
    index_label,
    parse_index_label,
    unit_phase,
)
from grhdesk.errors import NotPrimitive, QTooSmall
from grhdesk.interval import bigfloat


# ---------------------------------------------------------------------------
# brute-force oracles (definition-level, independent of the fast rules)


def oracle_char_table(g: CharGroup, idx):
    """chi(n) phases for n = 0..q-1 straight from generator images."""
    q = g.q
    vals = {}
    for n in range(q):
        ph = g.phase(idx, n)
        vals[n] = ph
    return vals


def oracle_is_primitive(g: CharGroup, idx) -> bool:
    """Definition: for every proper divisor d < q some a = 1 (mod d),
    gcd(a, q) = 1 has chi(a) != 1."""
    q = g.q
    for d in range(1, q):
        if q % d != 0:
            continue
        found = False
        for a in range(1, q + 1):
            if a % d == 1 % d and math.gcd(a, q) == 1 and g.phase(idx, a) != 0:
                found = True
                break
        if not found:
            return False
    return True


def oracle_primitive_count(q: int) -> int:
    g = CharGroup(q)
    return sum(1 for idx in g.all_indices() if oracle_is_primitive(g, idx))


# ---------------------------------------------------------------------------
# decomposition


def test_decompose_8_special_two():
    g = CharGroup(8)
    assert g.special_two is not None
    assert g.special_two.orders == (2, 2)
    assert not g.factors
    assert g.phi == 4


def test_decompose_4_single_order_2():
    g = CharGroup(4)
    assert g.special_two is None
    assert len(g.factors) == 1
    assert g.factors[0].order == 2


def test_decompose_9_generator_2():
    g = CharGroup(9)
    assert len(g.factors) == 1
    f = g.factors[0]
    assert (f.prime_power, f.generator, f.order) == (9, 2, 6)


def test_decompose_merged_even():
    g = CharGroup(6)
    assert len(g.factors) == 1
    f = g.factors[0]
    assert f.prime_power == 6 and f.order == 2 and f.generator % 2 == 1


def test_q_too_small():
    with pytest.raises(QTooSmall):
        CharGroup(2)


@pytest.mark.parametrize("q", [3, 4, 5, 6, 8, 9, 12, 15, 16, 24, 35, 40, 72, 100])
def test_orders_multiply_to_phi(q):
    g = CharGroup(q)
    prod = 1
    for o in g.orders:
        prod *= o
    assert prod == euler_phi(q) == g.phi
    assert len(list(g.all_indices())) == g.phi


@pytest.mark.parametrize("q", [9, 25, 27, 49])
def test_generator_has_stated_order(q):
    g = CharGroup(q)
    f = g.factors[0]
    assert pow(f.generator, f.order, f.prime_power) == 1
    for d in range(1, f.order):
        if f.order % d == 0 and d < f.order:
            assert pow(f.generator, d, f.prime_power) != 1 or d == f.order


def test_crt_reconstruction_unique():
    g = CharGroup(120)  # 8 * 3 * 5
    seen = set()
    for n in range(120):
        if math.gcd(n, 120) != 1:
            continue
        coords = []
        for f in g.factors:
            coords.append(int(f.dlog[n % f.prime_power]))
        st2 = g.special_two
        coords.append(int(st2.dlog_sign[n % st2.modulus]))
        coords.append(int(st2.dlog_five[n % st2.modulus]))
        assert all(c >= 0 for c in coords)
        key = tuple(coords)
        assert key not in seen
        seen.add(key)
    assert len(seen) == euler_phi(120)


# ---------------------------------------------------------------------------
# evaluation


def test_principal_character_is_one():
    g = CharGroup(7)
    for n in (1, 2, 3, 10):
        assert g.eval_char(g.principal(), n).re.contains(1)
        assert g.eval_char(g.principal(), n).im.contains(0)


def test_nontrivial_mod4_at_3():
    g = CharGroup(4)
    v = g.eval_char((1,), 3)
    assert v.re.contains(-1) and v.im.contains(0)


def test_char_vanishes_off_units():
    g = CharGroup(12)
    for idx in g.all_indices():
        v = g.eval_char(idx, 12)
        assert v.re.lo_float() == 0 and v.re.hi_float() == 0
        assert g.phase(idx, 8) is None


@pytest.mark.parametrize("q", [5, 8, 9, 12, 21, 40])
def test_multiplicativity(q):
    g = CharGroup(q)
    rng = np.random.default_rng(q)
    units = [n for n in range(1, q) if math.gcd(n, q) == 1]
    for idx in g.all_indices():
        for _ in range(8):
            n, m = rng.choice(units, 2)
            lhs = g.phase(idx, int(n) * int(m))
            rhs = (g.phase(idx, int(n)) + g.phase(idx, int(m))) % 1
            assert lhs == rhs


def test_periodicity_exact():
    g = CharGroup(15)
    for idx in g.all_indices():
        for n in range(1, 15):
            assert g.phase(idx, n) == g.phase(idx, n + 15)


def test_batch_matches_scalar():
    g = CharGroup(35)
    ns = np.arange(120)
    for idx in [next(iter(g.all_indices())), (1, 2), (2, 3)]:
        batch = g.eval_char_batch(idx, ns)
        for n in (0, 1, 7, 11, 34, 36, 119):
            sc = g.eval_char(idx, int(n))
            assert batch.re.lo[n] <= sc.re.mid() <= batch.re.hi[n]
            assert batch.im.lo[n] <= sc.im.mid() <= batch.im.hi[n]


# ---------------------------------------------------------------------------
# parity


def test_parity_examples():
    assert CharGroup(5).parity(CharGroup(5).principal()) == 0
    assert CharGroup(4).parity((1,)) == 1
    g3 = CharGroup(3)
    nontrivial = [i for i in g3.all_indices() if i != g3.principal()][0]
    assert g3.parity(nontrivial) == 1


@pytest.mark.parametrize("q", [5, 8, 9, 16, 21])
def test_parity_matches_phase_at_minus_one(q):
    g = CharGroup(q)
    for idx in g.all_indices():
        ph = g.phase(idx, q - 1)
        assert g.parity(idx) == (0 if ph == 0 else 1)
        assert g.parity(idx) == g.parity(g.conjugate(idx))


# ---------------------------------------------------------------------------
# primitivity


def test_principal_never_primitive():
    for q in (3, 4, 5, 9, 12):
        g = CharGroup(q)
        assert not g.is_primitive(g.principal())


def test_nontrivial_mod4_primitive():
    assert CharGroup(4).is_primitive((1,))


def test_mod9_exponent3_factors_through_mod3():
    g = CharGroup(9)
    assert not g.is_primitive((3,))
    assert not oracle_is_primitive(g, (3,))


@pytest.mark.parametrize("q", list(range(3, 101)) + [105, 120, 128, 144, 200])
def test_primitive_rules_match_definition(q):
    g = CharGroup(q)
    for idx in g.all_indices():
        assert g.is_primitive(idx) == oracle_is_primitive(g, idx), (q, idx)


def test_primitive_count_zero_for_2_mod_4():
    for q in (6, 10, 14, 18, 22):
        assert not CharGroup(q).primitive_indices()


def test_conjugate_pairs_cover_primitives():
    g = CharGroup(40)
    pairs = g.conjugate_pairs()
    flat = set()
    for a, b in pairs:
        flat.add(a)
        flat.add(b)
    assert flat == set(g.primitive_indices())
    for a, b in pairs:
        assert g.conjugate(a) == b and g.conjugate(b) == a


def test_conjugate_involution():
    g = CharGroup(35)
    for idx in g.all_indices():
        assert g.conjugate(g.conjugate(idx)) == idx


# ---------------------------------------------------------------------------
# Gauss sums and root numbers


def brute_gauss_sum(q: int, g: CharGroup, idx, prec=200):
    with mpmath.workprec(prec):
        acc = mpmath.mpc(0)
        for a in range(1, q):
            ph = g.phase(idx, a)
            if ph is None:
                continue
            total = ph + Fraction(a, q)
            acc += mpmath.expjpi(2 * mpmath.mpf(total.numerator) / total.denominator)
        return acc


def test_root_number_mod4():
    g = CharGroup(4)
    tau = g.gauss_sum((1,))
    # tau = e(1/4) - e(3/4) = 2i
    assert tau.re.contains(0) and tau.im.contains(2)
    eps = g.root_number((1,))
    assert eps.re.contains(1) and eps.im.contains(0)


def test_root_number_quadratic_mod5():
    g = CharGroup(5)
    quad = None
    for idx in g.all_indices():
        if idx != g.principal() and g.is_real(idx):
            quad = idx
    assert quad is not None
    tau = g.gauss_sum(quad)
    with mpmath.workprec(120):
        root5 = mpmath.sqrt(5)
    assert tau.re.lo_float() <= float(root5) <= tau.re.hi_float()
    assert tau.im.contains(0)
    eps = g.root_number(quad)
    assert eps.re.contains(1) and eps.im.contains(0)


def test_gauss_sum_matches_brute_force():
    for q, idx in [(5, (1,)), (8, (1, 1)), (9, (1,)), (12, (1, 1)), (35, (1, 2))]:
        g = CharGroup(q)
        tau = g.gauss_sum(idx)
        ref = brute_gauss_sum(q, g, idx)
        assert tau.re.lo_float() <= float(ref.real) <= tau.re.hi_float(), (q, idx)
        assert tau.im.lo_float() <= float(ref.imag) <= tau.im.hi_float(), (q, idx)


def test_root_number_modulus_one_random_primitives():
    rng = np.random.default_rng(7)
    count = 0
    for q in (5, 7, 8, 9, 11, 12, 13, 15, 16, 17, 19, 20, 21, 23, 24, 25, 28, 29, 31, 32):
        g = CharGroup(q)
        prim = g.primitive_indices()
        take = min(8, len(prim))
        for pos in rng.choice(len(prim), size=take, replace=False):
            idx = prim[int(pos)]
            eps = g.root_number(idx)
            assert eps.abs2().contains(1), (q, idx)
            count += 1
    assert count >= 100


def test_root_number_conjugate_intersects_conj():
    g = CharGroup(13)
    for idx, conj in g.conjugate_pairs()[:4]:
        e1 = g.root_number(idx, bits=120)
        e2 = g.root_number(conj, bits=120)
        flipped = e1.conj()
        assert flipped.re.intersects(e2.re) and flipped.im.intersects(e2.im)


def test_root_number_requires_primitive():
    g = CharGroup(9)
    with pytest.raises(NotPrimitive):
        g.root_number((3,))


def test_root_number_at_bigfloat_tier():
    g = CharGroup(7)
    idx = g.primitive_indices()[0]
    eps = g.root_number(idx, out_tier=bigfloat(128))
    assert eps.abs2().contains(1)


# ---------------------------------------------------------------------------
# completion constants


def test_lambda_prefactor_squares_to_conj_root_number():
    for q in (5, 7, 8, 12, 13, 17, 21, 40):
        g = CharGroup(q)
        for idx in g.primitive_indices():
            w = g.lambda_prefactor(idx, out_tier=bigfloat(160))
            eps = g.root_number(idx, out_tier=bigfloat(160))
            assert (w * w).intersects(eps.conj()), (q, idx)
            assert w.abs2().contains(1)


def test_lambda_prefactor_real_for_quadratic():
    # real primitive characters have root number 1, so the prefactor is +-1
    for q, idx in [(5, (2,)), (8, (0, 1)), (12, (1, 1))]:
        g = CharGroup(q)
        assert g.is_real(idx) and g.is_primitive(idx)
        w = g.lambda_prefactor(idx)
        assert w.im.contains_zero()
        assert w.re.contains(1) or w.re.contains(-1)


def test_char_meta_fields():
    g = CharGroup(5)
    meta = g.char_meta((1,))
    assert meta.parity == 1 and meta.primitive
    assert meta.conjugate == (3,)
    assert meta.epsilon.abs2().contains(1)
    # conjugation is an involution on metadata
    again = g.char_meta(meta.conjugate)
    assert again.conjugate == (1,)


def test_char_meta_imprimitive_placeholder():
    g = CharGroup(9)
    meta = g.char_meta((3,))
    assert not meta.primitive
    assert meta.epsilon.re.contains(1) and meta.epsilon.im.contains_zero()


def test_unimodular_sqrt_covers_all_quadrants():
    from grhdesk.characters import _unimodular_sqrt
    from grhdesk.interval import ComplexBox

    tier = bigfloat(120)
    for num in range(8):
        z = unit_phase(Fraction(num, 8), tier)
        w = _unimodular_sqrt(z)
        assert (w * w).intersects(z), num
        assert w.abs2().contains(1)


# ---------------------------------------------------------------------------
# misc


def test_factorize_and_phi():
    assert factorize(360) == [(2, 3), (3, 2), (5, 1)]
    assert euler_phi(1) == 1
    assert euler_phi(97) == 96
    assert euler_phi(120) == 32


def test_unit_phase_exact_quadrants():
    for fr, (re, im) in [
        (Fraction(0), (1, 0)),
        (Fraction(1, 2), (-1, 0)),
        (Fraction(1, 4), (0, 1)),
        (Fraction(3, 4), (0, -1)),
    ]:
        v = unit_phase(fr)
        assert v.re.contains(re) and v.im.contains(im)
        assert v.re.lo_float() == v.re.hi_float()


def test_index_label_roundtrip():
    q, idx = 40, (1, 0, 3)
    assert parse_index_label(index_label(q, idx)) == (q, idx)


def test_char_group_cache():
    assert char_group(15) is char_group(15)


@settings(max_examples=40, deadline=None)
@given(st.integers(min_value=3, max_value=400))
def test_group_structure_random_q(q):
    g = CharGroup(q)
    prod = 1
    for o in g.orders:
        prod *= o
    assert prod == euler_phi(q)
    # a random character is multiplicative on a few pairs
    rng = np.random.default_rng(q)
    idx = tuple(int(rng.integers(0, o)) for o in g.orders)
    units = [n for n in range(1, q) if math.gcd(n, q) == 1]
    for _ in range(5):
        n, m = int(rng.choice(units)), int(rng.choice(units))
        assert g.phase(idx, n * m) == (g.phase(idx, n) + g.phase(idx, m)) % 1
