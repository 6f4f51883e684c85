"""Two-tier outward-rounded interval arithmetic.

A :class:`RealInterval` is a closed interval [lo, hi] whose endpoints live in
one of two precision tiers:

* hardware -- IEEE double endpoints.  Correctly-rounded operations (+, -, *,
  /, sqrt) are nudged one ulp outward; libm transcendentals are nudged
  ``_TRANS_ULPS`` ulps outward to cover their documented worst-case error.
* bigfloat(bits) -- arbitrary-precision endpoints on mpmath's raw mpf
  representation.  Arithmetic kernels are correctly rounded under directed
  rounding; transcendental kernels run with ``_GUARD`` extra bits and are
  nudged two ulps outward at the target precision.

Every operation returns an interval that contains the exact image of its
input intervals.  Nothing here is ever allowed to round inward.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from mpmath import libmp
from mpmath.libmp import (
    fnan,
    fninf,
    fone,
    fzero,
    from_float,
    from_int,
    from_man_exp,
    from_rational,
    mpf_abs,
    mpf_add,
    mpf_atan,
    mpf_cmp,
    mpf_cos,
    mpf_div,
    mpf_exp,
    mpf_log,
    mpf_mul,
    mpf_neg,
    mpf_pi,
    mpf_pos,
    mpf_shift,
    mpf_sin,
    mpf_sqrt,
    mpf_sub,
    to_float,
)

from .errors import (
    DivisorContainsZero,
    LogDomain,
    NegativeSqrtDomain,
    NonPositiveRealPart,
)

_FLOOR = "f"
_CEIL = "c"
_GUARD = 32
_BIG_TRANS_ULPS = 2
# platform libm documents <= 1 ulp worst-case for exp/log/sin/cos/atan on
# x86-64 doubles; two ulps of outward slack keeps containment with margin.
_TRANS_ULPS = 2
_INF = math.inf
_TINY = math.ulp(0.0)  # smallest subnormal


@dataclass(frozen=True)
class PrecisionTier:
    """Where interval endpoints live: 'hardware' doubles or 'bigfloat' mpfs."""

    kind: str
    bits: int

    def __repr__(self) -> str:  # pragma: no cover - cosmetic
        if self.kind == "hardware":
            return "hardware"
        return f"bigfloat({self.bits})"


HARDWARE = PrecisionTier("hardware", 53)

_BIG_CACHE: dict[int, PrecisionTier] = {}


def bigfloat(bits: int = 128) -> PrecisionTier:
    """Big-float tier at the given mantissa size (minimum 64 bits)."""
    if bits < 64:
        raise ValueError("bigfloat tier requires at least 64 bits")
    tier = _BIG_CACHE.get(bits)
    if tier is None:
        tier = PrecisionTier("bigfloat", bits)
        _BIG_CACHE[bits] = tier
    return tier


# ---------------------------------------------------------------------------
# hardware endpoint helpers


def _dn(x: float) -> float:
    return math.nextafter(x, -_INF)


def _up(x: float) -> float:
    return math.nextafter(x, _INF)


def _dn_k(x: float, k: int) -> float:
    for _ in range(k):
        x = math.nextafter(x, -_INF)
    return x


def _up_k(x: float, k: int) -> float:
    for _ in range(k):
        x = math.nextafter(x, _INF)
    return x


def _sum_is_exact(a: float, b: float, s: float) -> bool:
    """TwoSum error term of a+b is zero (valid for any magnitudes)."""
    v = s - a
    return (a - (s - v)) + (b - v) == 0.0


def _prod_is_exact(a: float, b: float, p: float) -> bool:
    """p equals a*b exactly, checked in rational arithmetic."""
    if not (math.isfinite(a) and math.isfinite(b) and math.isfinite(p)):
        return False
    if a == 0.0 or b == 0.0:
        return True
    an, ad = a.as_integer_ratio()
    bn, bd = b.as_integer_ratio()
    pn, pd = p.as_integer_ratio()
    return an * bn * pd == pn * ad * bd


# ---------------------------------------------------------------------------
# bigfloat endpoint helpers (raw mpf tuples)


def _is_special(x) -> bool:
    return x[1] == 0 and x != fzero


def _raw_ulp(x, bits: int, count: int):
    """count ulps at the magnitude of x (or an absolute floor for x == 0)."""
    if x == fzero:
        return from_man_exp(count, -4 * bits)
    # value of x is man * 2^exp with bc = bit length of man
    e = x[2] + x[3] - bits
    return from_man_exp(count, e)


def _nudge(x, bits: int, count: int, direction: str):
    if _is_special(x):
        return x
    u = _raw_ulp(x, bits, count)
    if direction == _FLOOR:
        return mpf_sub(x, u, bits + 4, _FLOOR)
    return mpf_add(x, u, bits + 4, _CEIL)


def _big_trans(fn, x, bits: int, direction: str):
    r = fn(x, bits + _GUARD, direction)
    r = mpf_pos(r, bits, direction)
    return _nudge(r, bits, _BIG_TRANS_ULPS, direction)


def _raw_to_fraction(x) -> Fraction:
    if x == fzero:
        return Fraction(0)
    if _is_special(x):
        raise ValueError("cannot convert non-finite endpoint to Fraction")
    sign, man, exp, _ = x
    v = Fraction(int(man)) * Fraction(2) ** exp
    return -v if sign else v


def _raw_to_float_dir(x, direction: str) -> float:
    """Nearest double in the given direction (floor/ceil) for a raw mpf."""
    if x == fzero:
        return 0.0
    if _is_special(x):
        if x == fninf:
            return -_INF
        if x == fnan:
            raise ValueError("NaN endpoint")
        return _INF
    r = mpf_pos(x, 53, direction)
    f = to_float(r, strict=False)
    # exactness check: ldexp may have flushed past the double exponent range
    back = from_float(f)
    c = mpf_cmp(back, x)
    if direction == _FLOOR and c > 0:
        f = _dn(f)
    elif direction == _CEIL and c < 0:
        f = _up(f)
    return f


def _fmin(a, b):
    return a if mpf_cmp(a, b) <= 0 else b


def _fmax(a, b):
    return a if mpf_cmp(a, b) >= 0 else b


# ---------------------------------------------------------------------------


class RealInterval:
    """Closed interval with outward rounding on a fixed precision tier."""

    __slots__ = ("lo", "hi", "tier")

    def __init__(self, lo, hi, tier: PrecisionTier = HARDWARE, _raw: bool = False):
        if _raw:
            self.lo = lo
            self.hi = hi
            self.tier = tier
            return
        if tier.kind == "hardware":
            flo, fhi = float(lo), float(hi)
            if not flo <= fhi:
                raise ValueError(f"invalid interval endpoints [{lo}, {hi}]")
            self.lo = flo
            self.hi = fhi
        else:
            rlo = _any_to_raw(lo, tier.bits, _FLOOR)
            rhi = _any_to_raw(hi, tier.bits, _CEIL)
            if mpf_cmp(rlo, rhi) > 0:
                raise ValueError(f"invalid interval endpoints [{lo}, {hi}]")
            self.lo = rlo
            self.hi = rhi
        self.tier = tier

    # -- constructors ------------------------------------------------------

    @staticmethod
    def point(x, tier: PrecisionTier = HARDWARE) -> "RealInterval":
        """Tightest interval containing x (exact when x is representable)."""
        if tier.kind == "hardware":
            if isinstance(x, float):
                return RealInterval(x, x, tier, _raw=True)
            if isinstance(x, int):
                f = float(x)
                if int(f) == x:
                    return RealInterval(f, f, tier, _raw=True)
                return RealInterval.from_fraction(Fraction(x), tier)
            if isinstance(x, Fraction):
                return RealInterval.from_fraction(x, tier)
            f = float(x)
            return RealInterval(f, f, tier, _raw=True)
        lo = _any_to_raw(x, tier.bits, _FLOOR)
        hi = _any_to_raw(x, tier.bits, _CEIL)
        return RealInterval(lo, hi, tier, _raw=True)

    @staticmethod
    def from_fraction(fr: Fraction, tier: PrecisionTier = HARDWARE) -> "RealInterval":
        fr = Fraction(fr)
        if tier.kind == "hardware":
            f = fr.numerator / fr.denominator
            lo, hi = f, f
            if Fraction(lo) > fr:
                lo = _dn(lo)
            if Fraction(hi) < fr:
                hi = _up(hi)
            return RealInterval(lo, hi, tier, _raw=True)
        lo = from_rational(fr.numerator, fr.denominator, tier.bits, _FLOOR)
        hi = from_rational(fr.numerator, fr.denominator, tier.bits, _CEIL)
        return RealInterval(lo, hi, tier, _raw=True)

    @staticmethod
    def from_decimal(s: str, tier: PrecisionTier = HARDWARE) -> "RealInterval":
        """Enclosure of an exact decimal literal such as '1.8397'."""
        fr = Fraction(s)
        return RealInterval.from_fraction(fr, tier)

    @staticmethod
    def zero(tier: PrecisionTier = HARDWARE) -> "RealInterval":
        if tier.kind == "hardware":
            return RealInterval(0.0, 0.0, tier, _raw=True)
        return RealInterval(fzero, fzero, tier, _raw=True)

    @staticmethod
    def one(tier: PrecisionTier = HARDWARE) -> "RealInterval":
        if tier.kind == "hardware":
            return RealInterval(1.0, 1.0, tier, _raw=True)
        return RealInterval(fone, fone, tier, _raw=True)

    @staticmethod
    def hull_of(*vals: "RealInterval") -> "RealInterval":
        out = vals[0]
        for v in vals[1:]:
            out = out.hull(v)
        return out

    # -- basic queries -----------------------------------------------------

    def __repr__(self) -> str:
        if self.tier.kind == "hardware":
            return f"[{self.lo!r}, {self.hi!r}]"
        return (
            f"[{libmp.to_str(self.lo, 20)}, {libmp.to_str(self.hi, 20)}]"
            f"@{self.tier.bits}"
        )

    def lo_float(self) -> float:
        """Lower endpoint as the nearest double at or below it."""
        if self.tier.kind == "hardware":
            return self.lo
        return _raw_to_float_dir(self.lo, _FLOOR)

    def hi_float(self) -> float:
        if self.tier.kind == "hardware":
            return self.hi
        return _raw_to_float_dir(self.hi, _CEIL)

    def lo_fraction(self) -> Fraction:
        if self.tier.kind == "hardware":
            return Fraction(self.lo)
        return _raw_to_fraction(self.lo)

    def hi_fraction(self) -> Fraction:
        if self.tier.kind == "hardware":
            return Fraction(self.hi)
        return _raw_to_fraction(self.hi)

    def mid(self) -> float:
        """Approximate midpoint as a double (not a rigorous quantity)."""
        lo, hi = self.lo_float(), self.hi_float()
        m = 0.5 * (lo + hi)
        if not math.isfinite(m):
            m = 0.5 * lo + 0.5 * hi
        return m

    def width(self) -> float:
        """Upper bound on hi - lo as a double."""
        if self.tier.kind == "hardware":
            return _up(self.hi - self.lo)
        w = mpf_sub(self.hi, self.lo, 53, _CEIL)
        return _raw_to_float_dir(w, _CEIL)

    def mag(self) -> float:
        """Upper bound on sup |x| over the interval."""
        return max(abs(self.lo_float()), abs(self.hi_float()))

    def contains(self, x) -> bool:
        """Exact containment test for int/float/Fraction values."""
        fr = Fraction(x) if not isinstance(x, Fraction) else x
        return self.lo_fraction() <= fr <= self.hi_fraction()

    def contains_zero(self) -> bool:
        if self.tier.kind == "hardware":
            return self.lo <= 0.0 <= self.hi
        return mpf_cmp(self.lo, fzero) <= 0 <= mpf_cmp(self.hi, fzero)

    def contains_interval(self, other: "RealInterval") -> bool:
        return (
            self.lo_fraction() <= other.lo_fraction()
            and other.hi_fraction() <= self.hi_fraction()
        )

    def intersects(self, other: "RealInterval") -> bool:
        return (
            self.lo_fraction() <= other.hi_fraction()
            and other.lo_fraction() <= self.hi_fraction()
        )

    def sign(self) -> int:
        """1 if strictly positive, -1 if strictly negative, 0 if straddling."""
        if self.tier.kind == "hardware":
            if self.lo > 0.0:
                return 1
            if self.hi < 0.0:
                return -1
            return 0
        if mpf_cmp(self.lo, fzero) > 0:
            return 1
        if mpf_cmp(self.hi, fzero) < 0:
            return -1
        return 0

    def is_finite(self) -> bool:
        if self.tier.kind == "hardware":
            return math.isfinite(self.lo) and math.isfinite(self.hi)
        return not (_is_special(self.lo) or _is_special(self.hi))

    # -- lattice ops -------------------------------------------------------

    def hull(self, other: "RealInterval") -> "RealInterval":
        a, b = _coerce_pair(self, other)
        if a.tier.kind == "hardware":
            return RealInterval(min(a.lo, b.lo), max(a.hi, b.hi), a.tier, _raw=True)
        return RealInterval(_fmin(a.lo, b.lo), _fmax(a.hi, b.hi), a.tier, _raw=True)

    def pad(self, bound: "RealInterval") -> "RealInterval":
        """Widen by [-r, r] where r is the upper endpoint of `bound` (>= 0)."""
        r = bound if isinstance(bound, RealInterval) else RealInterval.point(bound, self.tier)
        if self.tier.kind == "hardware":
            m = r.hi_float()
            if m < 0.0:
                raise ValueError("pad radius must be nonnegative")
            return RealInterval(_dn(self.lo - m), _up(self.hi + m), self.tier, _raw=True)
        rr = _any_to_raw(r.hi_fraction(), self.tier.bits, _CEIL)
        if mpf_cmp(rr, fzero) < 0:
            raise ValueError("pad radius must be nonnegative")
        bits = self.tier.bits
        return RealInterval(
            mpf_sub(self.lo, rr, bits, _FLOOR),
            mpf_add(self.hi, rr, bits, _CEIL),
            self.tier,
            _raw=True,
        )

    def widen_to(self, tier: PrecisionTier) -> "RealInterval":
        """Re-represent on another tier, rounding outward as needed."""
        if tier == self.tier:
            return self
        if tier.kind == "hardware":
            return RealInterval(self.lo_float(), self.hi_float(), tier, _raw=True)
        if self.tier.kind == "hardware":
            lo = from_float(self.lo)
            hi = from_float(self.hi)
        else:
            lo = mpf_pos(self.lo, tier.bits, _FLOOR)
            hi = mpf_pos(self.hi, tier.bits, _CEIL)
        return RealInterval(lo, hi, tier, _raw=True)

    # -- arithmetic --------------------------------------------------------

    def __neg__(self) -> "RealInterval":
        if self.tier.kind == "hardware":
            return RealInterval(-self.hi, -self.lo, self.tier, _raw=True)
        return RealInterval(mpf_neg(self.hi), mpf_neg(self.lo), self.tier, _raw=True)

    def __add__(self, other) -> "RealInterval":
        a, b = _coerce_pair(self, other)
        if a.tier.kind == "hardware":
            lo = a.lo + b.lo
            hi = a.hi + b.hi
            # skip the nudge when the float sum is exact
            if not _sum_is_exact(a.lo, b.lo, lo):
                lo = _dn(lo)
            if not _sum_is_exact(a.hi, b.hi, hi):
                hi = _up(hi)
            return RealInterval(lo, hi, a.tier, _raw=True)
        bits = a.tier.bits
        return RealInterval(
            mpf_add(a.lo, b.lo, bits, _FLOOR),
            mpf_add(a.hi, b.hi, bits, _CEIL),
            a.tier,
            _raw=True,
        )

    __radd__ = __add__

    def __sub__(self, other) -> "RealInterval":
        a, b = _coerce_pair(self, other)
        return a + (-b)

    def __rsub__(self, other) -> "RealInterval":
        a, b = _coerce_pair(self, other)
        return b + (-a)

    def __mul__(self, other) -> "RealInterval":
        a, b = _coerce_pair(self, other)
        if a.tier.kind == "hardware":
            corners = ((a.lo, b.lo), (a.lo, b.hi), (a.hi, b.lo), (a.hi, b.hi))
            prods = [x * y for x, y in corners]
            lo, hi = min(prods), max(prods)
            # a tied corner with an inexact product still forces the nudge
            if not all(
                _prod_is_exact(x, y, lo)
                for (x, y), p in zip(corners, prods)
                if p == lo
            ):
                lo = _dn(lo)
            if not all(
                _prod_is_exact(x, y, hi)
                for (x, y), p in zip(corners, prods)
                if p == hi
            ):
                hi = _up(hi)
            return RealInterval(lo, hi, a.tier, _raw=True)
        bits = a.tier.bits
        los = (
            mpf_mul(a.lo, b.lo, bits, _FLOOR),
            mpf_mul(a.lo, b.hi, bits, _FLOOR),
            mpf_mul(a.hi, b.lo, bits, _FLOOR),
            mpf_mul(a.hi, b.hi, bits, _FLOOR),
        )
        his = (
            mpf_mul(a.lo, b.lo, bits, _CEIL),
            mpf_mul(a.lo, b.hi, bits, _CEIL),
            mpf_mul(a.hi, b.lo, bits, _CEIL),
            mpf_mul(a.hi, b.hi, bits, _CEIL),
        )
        lo = los[0]
        for p in los[1:]:
            lo = _fmin(lo, p)
        hi = his[0]
        for p in his[1:]:
            hi = _fmax(hi, p)
        return RealInterval(lo, hi, a.tier, _raw=True)

    __rmul__ = __mul__

    def __truediv__(self, other) -> "RealInterval":
        a, b = _coerce_pair(self, other)
        if b.contains_zero():
            raise DivisorContainsZero(f"division by {b!r}")
        if a.tier.kind == "hardware":
            corners = ((a.lo, b.lo), (a.lo, b.hi), (a.hi, b.lo), (a.hi, b.hi))
            quots = [x / y for x, y in corners]
            lo, hi = min(quots), max(quots)
            # q = x/y is exact iff q*y reproduces x exactly
            if not all(
                _prod_is_exact(q, y, x)
                for (x, y), q in zip(corners, quots)
                if q == lo
            ):
                lo = _dn(lo)
            if not all(
                _prod_is_exact(q, y, x)
                for (x, y), q in zip(corners, quots)
                if q == hi
            ):
                hi = _up(hi)
            return RealInterval(lo, hi, a.tier, _raw=True)
        bits = a.tier.bits
        los = (
            mpf_div(a.lo, b.lo, bits, _FLOOR),
            mpf_div(a.lo, b.hi, bits, _FLOOR),
            mpf_div(a.hi, b.lo, bits, _FLOOR),
            mpf_div(a.hi, b.hi, bits, _FLOOR),
        )
        his = (
            mpf_div(a.lo, b.lo, bits, _CEIL),
            mpf_div(a.lo, b.hi, bits, _CEIL),
            mpf_div(a.hi, b.lo, bits, _CEIL),
            mpf_div(a.hi, b.hi, bits, _CEIL),
        )
        lo = los[0]
        for p in los[1:]:
            lo = _fmin(lo, p)
        hi = his[0]
        for p in his[1:]:
            hi = _fmax(hi, p)
        return RealInterval(lo, hi, a.tier, _raw=True)

    def __rtruediv__(self, other) -> "RealInterval":
        a, b = _coerce_pair(self, other)
        return b / a

    def square(self) -> "RealInterval":
        """x^2 as a set image (never dips below 0 for straddling inputs)."""
        if self.contains_zero():
            m = self * self
            if self.tier.kind == "hardware":
                return RealInterval(0.0, m.hi, self.tier, _raw=True)
            return RealInterval(fzero, m.hi, self.tier, _raw=True)
        return self * self

    def abs(self) -> "RealInterval":
        if self.sign() >= 1:
            return self
        if self.sign() <= -1:
            return -self
        if self.tier.kind == "hardware":
            return RealInterval(0.0, max(-self.lo, self.hi), self.tier, _raw=True)
        return RealInterval(fzero, _fmax(mpf_abs(self.lo), mpf_abs(self.hi)), self.tier, _raw=True)

    # -- elementary functions ----------------------------------------------

    def sqrt(self) -> "RealInterval":
        if self.tier.kind == "hardware":
            if self.lo < 0.0:
                raise NegativeSqrtDomain(f"sqrt of {self!r}")
            lo = math.sqrt(self.lo)
            hi = math.sqrt(self.hi)
            if not _prod_is_exact(lo, lo, self.lo):
                lo = max(0.0, _dn(lo))
            if not _prod_is_exact(hi, hi, self.hi):
                hi = _up(hi)
            return RealInterval(lo, hi, self.tier, _raw=True)
        if mpf_cmp(self.lo, fzero) < 0:
            raise NegativeSqrtDomain(f"sqrt of {self!r}")
        bits = self.tier.bits
        return RealInterval(
            mpf_sqrt(self.lo, bits, _FLOOR),
            mpf_sqrt(self.hi, bits, _CEIL),
            self.tier,
            _raw=True,
        )

    def exp(self) -> "RealInterval":
        if self.tier.kind == "hardware":
            lo = max(0.0, _dn_k(_hw_exp(self.lo), _TRANS_ULPS))
            hi = _up_k(_hw_exp(self.hi), _TRANS_ULPS)
            if hi == 0.0:
                hi = _TINY
            return RealInterval(lo, hi, self.tier, _raw=True)
        return RealInterval(
            _big_trans(mpf_exp, self.lo, self.tier.bits, _FLOOR),
            _big_trans(mpf_exp, self.hi, self.tier.bits, _CEIL),
            self.tier,
            _raw=True,
        )

    def log(self) -> "RealInterval":
        if self.tier.kind == "hardware":
            if self.lo <= 0.0:
                raise LogDomain(f"log of {self!r}")
            return RealInterval(
                _dn_k(math.log(self.lo), _TRANS_ULPS),
                _up_k(math.log(self.hi), _TRANS_ULPS),
                self.tier,
                _raw=True,
            )
        if mpf_cmp(self.lo, fzero) <= 0:
            raise LogDomain(f"log of {self!r}")
        return RealInterval(
            _big_trans(mpf_log, self.lo, self.tier.bits, _FLOOR),
            _big_trans(mpf_log, self.hi, self.tier.bits, _CEIL),
            self.tier,
            _raw=True,
        )

    def atan(self) -> "RealInterval":
        if self.tier.kind == "hardware":
            return RealInterval(
                _dn_k(math.atan(self.lo), _TRANS_ULPS),
                _up_k(math.atan(self.hi), _TRANS_ULPS),
                self.tier,
                _raw=True,
            )
        return RealInterval(
            _big_trans(mpf_atan, self.lo, self.tier.bits, _FLOOR),
            _big_trans(mpf_atan, self.hi, self.tier.bits, _CEIL),
            self.tier,
            _raw=True,
        )

    def sin(self) -> "RealInterval":
        return _trig(self, is_sin=True)

    def cos(self) -> "RealInterval":
        return _trig(self, is_sin=False)

    # -- serialization -----------------------------------------------------

    def to_hex(self) -> str:
        """Lossless text form of both endpoints."""
        if self.tier.kind == "hardware":
            return f"{self.lo.hex()} {self.hi.hex()}"
        return f"{_raw_to_hex(self.lo)} {_raw_to_hex(self.hi)}"

    @staticmethod
    def from_hex(text: str, tier: PrecisionTier = HARDWARE) -> "RealInterval":
        slo, shi = text.split()
        if tier.kind == "hardware":
            return RealInterval(float.fromhex(slo), float.fromhex(shi), tier, _raw=True)
        return RealInterval(_raw_from_hex(slo), _raw_from_hex(shi), tier, _raw=True)


# ---------------------------------------------------------------------------


def _hw_exp(x: float) -> float:
    try:
        return math.exp(x)
    except OverflowError:
        return _INF


def _any_to_raw(x, bits: int, direction: str):
    """Directed conversion of int/float/Fraction/raw to a raw mpf."""
    if isinstance(x, tuple):
        return mpf_pos(x, bits, direction)
    if isinstance(x, float):
        return from_float(x)  # exact
    if isinstance(x, int):
        return from_int(x, bits, direction)
    if isinstance(x, Fraction):
        return from_rational(x.numerator, x.denominator, bits, direction)
    raise TypeError(f"cannot build bigfloat endpoint from {type(x)!r}")


def _coerce_pair(a: RealInterval, b) -> tuple[RealInterval, RealInterval]:
    if not isinstance(b, RealInterval):
        b = RealInterval.point(b, a.tier)
    if a.tier != b.tier:
        raise TypeError(f"tier mismatch: {a.tier!r} vs {b.tier!r}")
    return a, b


# pi enclosures ------------------------------------------------------------

_PI_CACHE: dict[int, RealInterval] = {}


def pi_interval(tier: PrecisionTier = HARDWARE) -> RealInterval:
    if tier.kind == "hardware":
        # math.pi is the nearest double below pi
        return RealInterval(math.pi, _up(math.pi), HARDWARE, _raw=True)
    iv = _PI_CACHE.get(tier.bits)
    if iv is None:
        lo = _nudge(mpf_pi(tier.bits + _GUARD, _FLOOR), tier.bits, 1, _FLOOR)
        hi = _nudge(mpf_pi(tier.bits + _GUARD, _CEIL), tier.bits, 1, _CEIL)
        iv = RealInterval(mpf_pos(lo, tier.bits, _FLOOR), mpf_pos(hi, tier.bits, _CEIL), tier, _raw=True)
        _PI_CACHE[tier.bits] = iv
    return iv


def _trig(x: RealInterval, is_sin: bool) -> RealInterval:
    """Range of sin/cos over the interval via endpoint values + extrema."""
    tier = x.tier
    pi = pi_interval(tier)
    two_pi_lo = (pi + pi).lo_float() if tier.kind != "hardware" else 2.0 * math.pi
    if x.width() >= two_pi_lo:
        if tier.kind == "hardware":
            return RealInterval(-1.0, 1.0, tier, _raw=True)
        none = mpf_neg(fone)
        return RealInterval(none, fone, tier, _raw=True)

    if tier.kind == "hardware":
        fn = math.sin if is_sin else math.cos
        vals = [
            _dn_k(fn(x.lo), _TRANS_ULPS),
            _up_k(fn(x.lo), _TRANS_ULPS),
            _dn_k(fn(x.hi), _TRANS_ULPS),
            _up_k(fn(x.hi), _TRANS_ULPS),
        ]
        lo, hi = min(vals), max(vals)
        lo_f, hi_f = x.lo, x.hi
        pi_lo, pi_hi = math.pi, _up(math.pi)
    else:
        kernel = mpf_sin if is_sin else mpf_cos
        bits = tier.bits
        vlo1 = _big_trans(kernel, x.lo, bits, _FLOOR)
        vhi1 = _big_trans(kernel, x.lo, bits, _CEIL)
        vlo2 = _big_trans(kernel, x.hi, bits, _FLOOR)
        vhi2 = _big_trans(kernel, x.hi, bits, _CEIL)
        lo = _fmin(vlo1, vlo2)
        hi = _fmax(vhi1, vhi2)
        lo_f, hi_f = x.lo_float(), x.hi_float()
        pi_lo, pi_hi = pi.lo_float(), pi.hi_float()

    # extremum locations: sin peaks at pi/2 + 2k*pi, dips at -pi/2 + 2k*pi;
    # cos peaks at 2k*pi, dips at pi + 2k*pi.  Enumerate candidate k with a
    # conservative float sweep (the interval is less than one period wide).
    offset_max = 0.5 if is_sin else 0.0
    offset_min = -0.5 if is_sin else 1.0
    has_max = _contains_odd_multiple(lo_f, hi_f, pi_lo, pi_hi, offset_max)
    has_min = _contains_odd_multiple(lo_f, hi_f, pi_lo, pi_hi, offset_min)

    if tier.kind == "hardware":
        if has_max:
            hi = 1.0
        if has_min:
            lo = -1.0
        lo = max(lo, -1.0)
        hi = min(hi, 1.0)
        return RealInterval(lo, hi, tier, _raw=True)
    none = mpf_neg(fone)
    if has_max:
        hi = fone
    if has_min:
        lo = none
    lo = _fmax(lo, none)
    hi = _fmin(hi, fone)
    return RealInterval(lo, hi, tier, _raw=True)


def _contains_odd_multiple(lo: float, hi: float, pi_lo: float, pi_hi: float, offset: float) -> bool:
    """Could (offset + 2k) * pi lie inside [lo, hi] for some integer k?

    Conservative: may answer True when the point is merely within a few ulps
    of the interval, which only widens the trig range.
    """
    # candidate k values bracketing the interval
    k_lo = math.floor(lo / (2.0 * pi_hi) - offset / 2.0) - 1
    k_hi = math.ceil(hi / (2.0 * pi_lo) - offset / 2.0) + 1
    for k in range(k_lo, k_hi + 1):
        m = offset + 2.0 * k
        # location interval for m*pi, outward
        if m >= 0:
            loc_lo, loc_hi = _dn(m * pi_lo), _up(m * pi_hi)
        else:
            loc_lo, loc_hi = _dn(m * pi_hi), _up(m * pi_lo)
        if loc_hi >= lo and loc_lo <= hi:
            return True
    return False


def _raw_to_hex(x) -> str:
    if x == fzero:
        return "0x0p0"
    sign, man, exp, _ = x
    return f"{'-' if sign else ''}0x{int(man):x}p{exp}"


def _raw_from_hex(s: str):
    neg = s.startswith("-")
    if neg:
        s = s[1:]
    mant, _, exp = s.partition("p")
    man = int(mant, 16)
    v = from_man_exp(man, int(exp))
    return mpf_neg(v) if neg else v


# ---------------------------------------------------------------------------
# complex boxes


class ComplexBox:
    """Axis-aligned rectangle re + i*im with RealInterval sides."""

    __slots__ = ("re", "im")

    def __init__(self, re: RealInterval, im: RealInterval):
        if re.tier != im.tier:
            raise TypeError("ComplexBox components must share a tier")
        self.re = re
        self.im = im

    @property
    def tier(self) -> PrecisionTier:
        return self.re.tier

    @staticmethod
    def point(z: complex, tier: PrecisionTier = HARDWARE) -> "ComplexBox":
        z = complex(z)
        return ComplexBox(RealInterval.point(z.real, tier), RealInterval.point(z.imag, tier))

    @staticmethod
    def from_real(re: RealInterval) -> "ComplexBox":
        return ComplexBox(re, RealInterval.zero(re.tier))

    @staticmethod
    def zero(tier: PrecisionTier = HARDWARE) -> "ComplexBox":
        return ComplexBox(RealInterval.zero(tier), RealInterval.zero(tier))

    @staticmethod
    def one(tier: PrecisionTier = HARDWARE) -> "ComplexBox":
        return ComplexBox(RealInterval.one(tier), RealInterval.zero(tier))

    def __repr__(self) -> str:
        return f"({self.re!r}) + i*({self.im!r})"

    def __add__(self, other) -> "ComplexBox":
        other = _coerce_box(other, self.tier)
        return ComplexBox(self.re + other.re, self.im + other.im)

    __radd__ = __add__

    def __sub__(self, other) -> "ComplexBox":
        other = _coerce_box(other, self.tier)
        return ComplexBox(self.re - other.re, self.im - other.im)

    def __rsub__(self, other) -> "ComplexBox":
        other = _coerce_box(other, self.tier)
        return other - self

    def __neg__(self) -> "ComplexBox":
        return ComplexBox(-self.re, -self.im)

    def __mul__(self, other) -> "ComplexBox":
        if isinstance(other, RealInterval):
            return ComplexBox(self.re * other, self.im * other)
        other = _coerce_box(other, self.tier)
        return ComplexBox(
            self.re * other.re - self.im * other.im,
            self.re * other.im + self.im * other.re,
        )

    __rmul__ = __mul__

    def __truediv__(self, other) -> "ComplexBox":
        if isinstance(other, RealInterval):
            return ComplexBox(self.re / other, self.im / other)
        other = _coerce_box(other, self.tier)
        d = other.abs2()
        if d.contains_zero():
            raise DivisorContainsZero(f"complex division by {other!r}")
        num = self * other.conj()
        return ComplexBox(num.re / d, num.im / d)

    def conj(self) -> "ComplexBox":
        return ComplexBox(self.re, -self.im)

    def mul_i(self) -> "ComplexBox":
        return ComplexBox(-self.im, self.re)

    def abs2(self) -> RealInterval:
        return self.re.square() + self.im.square()

    def abs(self) -> RealInterval:
        return self.abs2().sqrt()

    def exp(self) -> "ComplexBox":
        r = self.re.exp()
        return ComplexBox(r * self.im.cos(), r * self.im.sin())

    def log(self) -> "ComplexBox":
        """Principal log; requires Re(z) strictly positive."""
        if self.re.sign() != 1:
            raise NonPositiveRealPart(f"log of {self!r}")
        mod = self.abs2().log() * RealInterval.from_fraction(Fraction(1, 2), self.tier)
        arg = (self.im / self.re).atan()
        return ComplexBox(mod, arg)

    def pad(self, bound: RealInterval) -> "ComplexBox":
        return ComplexBox(self.re.pad(bound), self.im.pad(bound))

    def widen_to(self, tier: PrecisionTier) -> "ComplexBox":
        return ComplexBox(self.re.widen_to(tier), self.im.widen_to(tier))

    def contains(self, z) -> bool:
        z = complex(z) if not isinstance(z, tuple) else z
        if isinstance(z, tuple):
            re, im = z
        else:
            re, im = z.real, z.imag
        return self.re.contains(re) and self.im.contains(im)

    def intersects(self, other: "ComplexBox") -> bool:
        return self.re.intersects(other.re) and self.im.intersects(other.im)

    def contains_zero(self) -> bool:
        return self.re.contains_zero() and self.im.contains_zero()

    def to_hex(self) -> str:
        return f"{self.re.to_hex()} {self.im.to_hex()}"

    @staticmethod
    def from_hex(text: str, tier: PrecisionTier = HARDWARE) -> "ComplexBox":
        parts = text.split()
        if len(parts) != 4:
            raise ValueError("complex box hex form needs 4 fields")
        return ComplexBox(
            RealInterval.from_hex(" ".join(parts[:2]), tier),
            RealInterval.from_hex(" ".join(parts[2:]), tier),
        )


def _coerce_box(z, tier: PrecisionTier) -> ComplexBox:
    if isinstance(z, ComplexBox):
        if z.tier != tier:
            raise TypeError(f"tier mismatch: {z.tier!r} vs {tier!r}")
        return z
    if isinstance(z, RealInterval):
        return ComplexBox.from_real(z)
    return ComplexBox.point(complex(z), tier)


# ---------------------------------------------------------------------------
# log-gamma via Stirling with a rigorously bounded remainder


_BERN_CACHE: dict[int, Fraction] = {}


def bernoulli(n: int) -> Fraction:
    """Exact Bernoulli number B_n."""
    b = _BERN_CACHE.get(n)
    if b is None:
        import mpmath

        p, q = mpmath.bernfrac(n)
        b = Fraction(int(p), int(q))
        _BERN_CACHE[n] = b
    return b


def _stirling_params(bits: int) -> tuple[int, int]:
    """(target lower bound on |z|, term count K) for ~2^(8-bits) remainders."""
    if bits <= 64:
        return 10, 14
    if bits <= 128:
        return 22, 24
    if bits <= 256:
        return 44, 46
    return max(44, bits // 5), max(46, bits // 4)


def log_gamma(z: ComplexBox) -> ComplexBox:
    """Principal log Gamma for Re(z) > 0, any tier.

    Shifts right with log Gamma(z) = log Gamma(z+1) - log z until the Stirling
    series applies, then sums it with the remainder added as an interval.
    """
    tier = z.tier
    if z.re.sign() != 1:
        raise NonPositiveRealPart(f"log_gamma of {z!r}")
    target, K = _stirling_params(tier.bits)

    shift_acc = ComplexBox.zero(tier)
    # |z| >= target guarantees the remainder bound; cap the walk defensively
    budget = target + 8
    w = z
    while True:
        lo_abs = w.abs2().lo_float()
        if lo_abs >= float(target) * float(target):
            break
        if budget == 0:
            raise NonPositiveRealPart("log_gamma shift budget exhausted")
        shift_acc = shift_acc + w.log()
        w = w + ComplexBox.one(tier)
        budget -= 1

    half = RealInterval.from_fraction(Fraction(1, 2), tier)
    logw = w.log()
    # (w - 1/2) log w - w + (1/2) log(2 pi)
    two_pi = pi_interval(tier) * RealInterval.point(2, tier)
    result = (w - ComplexBox.from_real(half)) * logw - w + ComplexBox.from_real(
        two_pi.log() * half
    )

    w2 = w * w
    inv_w = ComplexBox.one(tier) / w
    inv_w2 = ComplexBox.one(tier) / w2
    term_pow = inv_w  # z^(1-2k) for k=1
    for k in range(1, K + 1):
        c = bernoulli(2 * k) / ((2 * k) * (2 * k - 1))
        coeff = RealInterval.from_fraction(c, tier)
        result = result + term_pow * coeff
        if k < K:
            term_pow = term_pow * inv_w2

    # remainder: |R| <= |B_{2K+2}| / ((2K+2)(2K+1)) * sec(arg/2)^{2K+2} / |z|^{2K+1}
    # with Re z > 0, sec(arg/2)^{2K+2} <= 2^{K+1}
    c_next = abs(bernoulli(2 * K + 2)) / ((2 * K + 2) * (2 * K + 1))
    abs_w = w.abs2().sqrt()
    denom = RealInterval.point(abs_w.lo_float(), tier)
    if denom.sign() != 1:
        raise NonPositiveRealPart("log_gamma: cannot bound remainder")
    pw = RealInterval.one(tier)
    for _ in range(2 * K + 1):
        pw = pw * denom
    rem = RealInterval.from_fraction(c_next * (2 ** (K + 1)), tier) / pw
    result = result.pad(rem)
    return result - shift_acc


# ---------------------------------------------------------------------------
# operation dispatch by name (used by the randomized containment suites)

_ARITH = {
    "add": lambda a, b: a + b,
    "sub": lambda a, b: a - b,
    "mul": lambda a, b: a * b,
    "div": lambda a, b: a / b,
    "sqrt": lambda a, b: a.sqrt(),
}

_ELEM = {
    "exp": lambda a: a.exp(),
    "log": lambda a: a.log(),
    "sin": lambda a: a.sin(),
    "cos": lambda a: a.cos(),
    "atan": lambda a: a.atan(),
}


def arith(op: str, a: RealInterval, b: RealInterval = None) -> RealInterval:
    """Named operation: add, sub, mul, div, and unary sqrt (b ignored)."""
    return _ARITH[op](a, b)


def elem(f: str, a: RealInterval) -> RealInterval:
    """Named elementary function: sqrt, exp, log, sin, cos, atan."""
    return _ELEM[f](a)


ARITH_OPS = tuple(_ARITH)
ELEM_OPS = tuple(_ELEM)
