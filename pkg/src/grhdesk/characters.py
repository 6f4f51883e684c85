"""Dirichlet characters mod q: group structure, primitivity, root numbers.

The unit group (Z/qZ)* is decomposed into cyclic factors by CRT:

* odd prime powers p^a contribute one cyclic factor with a primitive root,
* q = 2m with m odd merges the trivial factor at 2 into the first odd one,
* 4 exactly contributes an order-2 factor generated by -1,
* 2^a with a >= 3 contributes the two-generator structure (-1, 5) of orders
  (2, 2^(a-2)).

A character is an exponent tuple, one entry per cyclic generator.  All
character values are exact rational phases (fractions of a turn), so parity,
conjugation and primitivity are exact integer computations; only the final
complex embedding e(phase) rounds, and it rounds outward into boxes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import product

import numpy as np

from .errors import HypothesisViolated, NotPrimitive, QTooSmall
from .interval import (
    HARDWARE,
    ComplexBox,
    PrecisionTier,
    RealInterval,
    bigfloat,
    pi_interval,
)
from .ivec import CVec, IVec


def factorize(n: int) -> list[tuple[int, int]]:
    """Prime factorization as (p, multiplicity) pairs, ascending."""
    out = []
    d = 2
    while d * d <= n:
        if n % d == 0:
            a = 0
            while n % d == 0:
                n //= d
                a += 1
            out.append((d, a))
        d += 1 if d == 2 else 2
    if n > 1:
        out.append((n, 1))
    return out


def euler_phi(n: int) -> int:
    out = 1
    for p, a in factorize(n):
        out *= (p - 1) * p ** (a - 1)
    return out


def _primitive_root(p: int, a: int) -> int:
    """Smallest primitive root mod p^a (p odd prime)."""
    phi_p = p - 1
    prime_divs = [f for f, _ in factorize(phi_p)]
    g = 2
    while True:
        if all(pow(g, phi_p // f, p) != 1 for f in prime_divs):
            break
        g += 1
    if a == 1:
        return g
    # g lifts to p^a unless g^(p-1) = 1 mod p^2
    if pow(g, phi_p, p * p) == 1:
        g += p
    return g


@dataclass(frozen=True)
class CyclicFactor:
    """One cyclic piece of (Z/qZ)*: modulus, generator, order, dlog table."""

    prime_power: int
    generator: int
    order: int
    dlog: np.ndarray

    def __repr__(self) -> str:  # pragma: no cover - cosmetic
        return f"C({self.prime_power}, g={self.generator}, ord={self.order})"


@dataclass(frozen=True)
class SpecialTwo:
    """Two-generator structure of (Z/2^a Z)* for a >= 3: <-1> x <5>."""

    alpha: int
    modulus: int
    orders: tuple[int, int]  # (2, 2^(a-2))
    dlog_sign: np.ndarray
    dlog_five: np.ndarray


def _dlog_table(m: int, g: int, order: int) -> np.ndarray:
    tab = np.full(m, -1, dtype=np.int64)
    x = 1
    for e in range(order):
        if tab[x] != -1:
            raise ValueError(f"generator {g} has order below {order} mod {m}")
        tab[x] = e
        x = (x * g) % m
    if x != 1:
        raise ValueError(f"generator {g} order exceeds {order} mod {m}")
    return tab


def _special_two_tables(alpha: int) -> SpecialTwo:
    m = 1 << alpha
    half = 1 << (alpha - 2)
    sign = np.full(m, -1, dtype=np.int64)
    five = np.full(m, -1, dtype=np.int64)
    x = 1
    for e1 in range(half):
        for e0 in (0, 1):
            y = (m - x) % m if e0 else x
            sign[y] = e0
            five[y] = e1
        x = (x * 5) % m
    return SpecialTwo(alpha, m, (2, half), sign, five)


@dataclass(frozen=True)
class CharMeta:
    """Facts about one character that the samplers and the certifier consume.

    epsilon is the unimodular constant that multiplies the gamma-completed L
    value; it is a square root of the conjugated root number, which is
    exactly the normalization that makes the completed function real on the
    critical line.  Either square root works (they differ by a global sign);
    the choice is deterministic per character and downstream assembly checks
    realness of every box a posteriori.
    """

    parity: int
    primitive: bool
    epsilon: ComplexBox
    conjugate: tuple[int, ...]


class CharGroup:
    """Character group mod q with O(1) character evaluation tables."""

    def __init__(self, q: int):
        if q < 3:
            raise QTooSmall(f"need q >= 3, got {q}")
        self.q = q
        self.phi = euler_phi(q)
        facs = factorize(q)
        two_alpha = facs[0][1] if facs and facs[0][0] == 2 else 0
        odd = [(p, a) for p, a in facs if p != 2]

        factors: list[CyclicFactor] = []
        self.special_two: SpecialTwo | None = None

        if two_alpha == 1:
            # merge the trivial factor at 2 into the first odd prime power
            p, a = odd[0]
            pp = p**a
            g = _primitive_root(p, a)
            if g % 2 == 0:
                g += pp
            m = 2 * pp
            factors.append(CyclicFactor(m, g % m, euler_phi(pp), _dlog_table(m, g % m, euler_phi(pp))))
            odd = odd[1:]
        elif two_alpha == 2:
            factors.append(CyclicFactor(4, 3, 2, _dlog_table(4, 3, 2)))
        elif two_alpha >= 3:
            self.special_two = _special_two_tables(two_alpha)

        for p, a in odd:
            pp = p**a
            g = _primitive_root(p, a)
            factors.append(CyclicFactor(pp, g, euler_phi(pp), _dlog_table(pp, g, euler_phi(pp))))

        self.factors = factors
        self.orders: tuple[int, ...] = tuple(
            [f.order for f in factors]
            + (list(self.special_two.orders) if self.special_two else [])
        )
        check = 1
        for o in self.orders:
            check *= o
        if check != self.phi:
            raise HypothesisViolated(f"factor orders {self.orders} do not multiply to phi({q})")
        self.exponent = 1
        for o in self.orders:
            self.exponent = self.exponent * o // math.gcd(self.exponent, o)
        self._unity_cache: dict = {}

    # -- indices ------------------------------------------------------------

    def all_indices(self):
        """Every character index (exponent tuple); phi(q) of them."""
        return product(*(range(o) for o in self.orders))

    def principal(self) -> tuple[int, ...]:
        return tuple(0 for _ in self.orders)

    def conjugate(self, idx) -> tuple[int, ...]:
        return tuple((-k) % o for k, o in zip(idx, self.orders))

    def is_real(self, idx) -> bool:
        return self.conjugate(tuple(idx)) == tuple(idx)

    # -- exact phase evaluation ----------------------------------------------

    def phase_numerator(self, idx, n: int) -> int | None:
        """Numerator c with chi(n) = e(c / exponent); None when gcd(n,q) > 1."""
        n %= self.q
        if math.gcd(n, self.q) != 1:
            return None
        L = self.exponent
        c = 0
        pos = 0
        for f in self.factors:
            e = int(f.dlog[n % f.prime_power])
            c += idx[pos] * e * (L // f.order)
            pos += 1
        if self.special_two:
            st = self.special_two
            r = n % st.modulus
            c += idx[pos] * int(st.dlog_sign[r]) * (L // 2)
            c += idx[pos + 1] * int(st.dlog_five[r]) * (L // st.orders[1])
        return c % L

    def phase(self, idx, n: int) -> Fraction | None:
        c = self.phase_numerator(idx, n)
        if c is None:
            return None
        return Fraction(c, self.exponent)

    def eval_char(self, idx, n: int, tier: PrecisionTier = HARDWARE) -> ComplexBox:
        ph = self.phase(idx, n)
        if ph is None:
            return ComplexBox.zero(tier)
        return unit_phase(ph, tier)

    def eval_char_batch(self, idx, ns: np.ndarray) -> CVec:
        """chi(n) for an integer array, as hardware boxes (0 off-units)."""
        ns = np.asarray(ns, dtype=np.int64)
        L = self.exponent
        c = np.zeros(ns.shape, dtype=np.int64)
        ok = np.ones(ns.shape, dtype=bool)
        pos = 0
        for f in self.factors:
            e = f.dlog[np.mod(ns, f.prime_power)]
            ok &= e >= 0
            c += idx[pos] * np.where(e >= 0, e, 0) * (L // f.order)
            pos += 1
        if self.special_two:
            st = self.special_two
            r = np.mod(ns, st.modulus)
            e0 = st.dlog_sign[r]
            e1 = st.dlog_five[r]
            ok &= e0 >= 0
            c += idx[pos] * np.where(e0 >= 0, e0, 0) * (L // 2)
            c += idx[pos + 1] * np.where(e1 >= 0, e1, 0) * (L // st.orders[1])
        c %= L
        cos_tab, sin_tab = self._unity_tables()
        re_lo = np.where(ok, cos_tab.lo[c], 0.0)
        re_hi = np.where(ok, cos_tab.hi[c], 0.0)
        im_lo = np.where(ok, sin_tab.lo[c], 0.0)
        im_hi = np.where(ok, sin_tab.hi[c], 0.0)
        return CVec(IVec(re_lo, re_hi, _checked=True), IVec(im_lo, im_hi, _checked=True))

    def _unity_tables(self):
        """Interval cos/sin of 2 pi c / exponent for c = 0..exponent-1."""
        tabs = self._unity_cache.get("hw")
        if tabs is None:
            L = self.exponent
            theta = IVec.from_points(np.arange(L, dtype=np.float64)) * (
                pi_interval(HARDWARE) * RealInterval.point(2.0)
            ) / L
            tabs = (theta.cos(), theta.sin())
            self._unity_cache["hw"] = tabs
        return tabs

    # -- character attributes -----------------------------------------------

    def parity(self, idx) -> int:
        """0 for even characters, 1 for odd: (1 - chi(-1)) / 2."""
        ph = self.phase(idx, self.q - 1)
        if ph == 0:
            return 0
        if ph == Fraction(1, 2):
            return 1
        raise HypothesisViolated(f"chi(-1) phase {ph} is not 0 or 1/2")

    def is_primitive(self, idx) -> bool:
        """Conductor equals q, by the local rule at each prime power.

        At an odd p (or at 4): a degree-1 factor needs a nonzero exponent,
        a higher power needs an exponent coprime to p.  A merged 2*p^a factor
        means the 2-part of any conductor is 1, so nothing mod q is
        primitive.  At 2^a (a >= 3) the exponent of 5 must be odd.
        """
        idx = tuple(idx)
        pos = 0
        for f in self.factors:
            k = idx[pos]
            pos += 1
            pp = f.prime_power
            if pp % 2 == 0 and pp % 4 != 0:
                return False
            p = factorize(pp)[0][0]
            if pp == p:
                if k == 0:
                    return False
            elif k % p == 0:
                return False
        if self.special_two and idx[pos + 1] % 2 == 0:
            return False
        return True

    def primitive_indices(self):
        return [idx for idx in self.all_indices() if self.is_primitive(idx)]

    def conjugate_pairs(self):
        """Primitive (chi, chibar) pairs, each unordered pair listed once."""
        seen = set()
        out = []
        for idx in self.primitive_indices():
            if idx in seen:
                continue
            conj = self.conjugate(idx)
            seen.add(idx)
            seen.add(conj)
            out.append((idx, conj))
        return out

    # -- Gauss sum and root number --------------------------------------------

    def gauss_sum(self, idx, bits: int = 160) -> ComplexBox:
        """tau(chi) = sum chi(a) e(a/q) over a mod q, at big-float precision."""
        tier = bigfloat(bits)
        q = self.q
        L = self.exponent
        acc_re = RealInterval.zero(tier)
        acc_im = RealInterval.zero(tier)
        for a in range(1, q):
            c = self.phase_numerator(idx, a)
            if c is None:
                continue
            fr = Fraction(c, L) + Fraction(a, q)
            term = unit_phase(fr % 1, tier)
            acc_re = acc_re + term.re
            acc_im = acc_im + term.im
        return ComplexBox(acc_re, acc_im)

    def root_number(
        self, idx, bits: int = 160, out_tier: PrecisionTier = HARDWARE
    ) -> ComplexBox:
        """epsilon = tau(chi) / (i^parity sqrt(q)); modulus must contain 1."""
        if not self.is_primitive(idx):
            raise NotPrimitive(f"index {idx} mod {self.q} is imprimitive")
        tier = bigfloat(bits)
        tau = self.gauss_sum(idx, bits)
        a = self.parity(idx)
        if a == 1:
            tau = ComplexBox(tau.im, -tau.re)  # divide by i
        eps = tau / ComplexBox.from_real(RealInterval.point(self.q, tier).sqrt())
        if not eps.abs2().contains(1):
            raise HypothesisViolated(
                f"|epsilon|^2 = {eps.abs2()!r} misses 1 for index {idx} mod {self.q}"
            )
        return eps.widen_to(out_tier)

    def lambda_prefactor(
        self, idx, bits: int = 160, out_tier: PrecisionTier = HARDWARE
    ) -> ComplexBox:
        """Unimodular w with conj(w)/w containing the root number.

        Conjugating the completed value flips w to conj(w) and applies the
        functional equation, which costs one factor of the root number; the
        two cancel exactly when w*w equals the conjugated root number, so w
        is taken as a square root of it.
        """
        eps = self.root_number(idx, bits=bits, out_tier=bigfloat(bits))
        return _unimodular_sqrt(eps.conj()).widen_to(out_tier)

    def char_meta(
        self, idx, bits: int = 160, tier: PrecisionTier = HARDWARE
    ) -> CharMeta:
        """Bundle parity, primitivity, completion constant, conjugate index.

        Imprimitive characters get epsilon = 1: they are never completed
        directly, only through the primitive character inducing them.
        """
        idx = tuple(int(v) for v in idx)
        primitive = self.is_primitive(idx)
        if primitive:
            eps = self.lambda_prefactor(idx, bits=bits, out_tier=tier)
        else:
            eps = ComplexBox.one(tier)
        return CharMeta(
            parity=self.parity(idx),
            primitive=primitive,
            epsilon=eps,
            conjugate=self.conjugate(idx),
        )


def _unimodular_sqrt(z: ComplexBox) -> ComplexBox:
    """One square root of a box near the unit circle, by quadrant.

    Rotates z into the open right half plane, takes exp(log/2) there, and
    rotates the result back by a square root of the rotation.  A box that
    straddles both coordinate axes has no well-defined quadrant; that can
    only happen when the box is far too wide to be useful, so it raises.
    """
    tier = z.tier
    half = RealInterval.from_fraction(Fraction(1, 2), tier)

    def principal(w: ComplexBox) -> ComplexBox:
        return (w.log() * half).exp()

    if z.re.sign() == 1:
        return principal(z)
    if z.re.sign() == -1:
        return principal(-z).mul_i()
    s2 = RealInterval.point(2, tier).sqrt()
    c = RealInterval.one(tier) / s2
    if z.im.sign() == 1:
        return ComplexBox(c, c) * principal(ComplexBox(z.im, -z.re))
    if z.im.sign() == -1:
        return ComplexBox(c, -c) * principal(ComplexBox(-z.im, z.re))
    raise HypothesisViolated(
        "unit box straddles both axes; square-root branch is undetermined"
    )


@lru_cache(maxsize=64)
def char_group(q: int) -> CharGroup:
    return CharGroup(q)


# ---------------------------------------------------------------------------
# complex embedding of exact phases


def unit_phase(fr: Fraction, tier: PrecisionTier = HARDWARE) -> ComplexBox:
    """e(fr) = exp(2 pi i fr) for an exact rational number of turns."""
    fr = fr % 1
    if fr.denominator == 1:
        return ComplexBox.one(tier)
    if fr.denominator == 2:
        return -ComplexBox.one(tier)
    if fr.denominator == 4:
        box = ComplexBox.zero(tier)
        one = RealInterval.one(tier)
        if fr.numerator == 1:
            return ComplexBox(box.re, one)
        return ComplexBox(box.re, -one)
    theta = pi_interval(tier) * RealInterval.from_fraction(2 * fr, tier)
    return ComplexBox(theta.cos(), theta.sin())


def index_label(q: int, idx) -> str:
    """Certificate form of a character: q, then exponents, comma-separated."""
    return ",".join(str(v) for v in (q, *idx))


def parse_index_label(text: str) -> tuple[int, tuple[int, ...]]:
    parts = [int(v) for v in text.strip().split(",")]
    return parts[0], tuple(parts[1:])
