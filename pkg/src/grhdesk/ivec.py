"""Vectorized hardware-tier interval arrays.

:class:`IVec` holds parallel numpy arrays of lower and upper endpoints;
:class:`CVec` pairs two of them as a complex rectangle array.  Every
elementwise operation widens its result enough to contain the exact image:

* IEEE-correct array arithmetic (+, -, *, /, sqrt) gets ``_KA`` relative ulps
  of outward slack per endpoint,
* numpy transcendental kernels (exp, log, sin, cos), whose SIMD paths are
  documented to a few ulps, get ``_KT``.

Reductions use the standard floating sum bound |fl(sum) - sum| <=
(n-1) u sum|x_i|, valid for any summation order, so numpy's pairwise
summation is covered.

A module-level operation counter tallies elementwise work (elements touched
per operation) so callers can compare measured work across problem sizes.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import DivisorContainsZero, LogDomain, NegativeSqrtDomain
from .interval import HARDWARE, ComplexBox, RealInterval

_EPS = 2.0**-52
_U = 2.0**-53
_TINY = 4.0 * 5e-324
# x +/- (k eps |x| + k tiny) moves at least k-ish ulps outward (k >= 1);
# one ulp covers IEEE-correct array arithmetic, eight cover numpy's SIMD
# transcendental kernels (documented to 4 ulp) with margin
_KA = 1.0
_KT = 8.0
_PI_LO = math.pi
_PI_HI = math.nextafter(math.pi, math.inf)


class _OpCounter:
    """Tallies elementwise interval operations (elements touched)."""

    __slots__ = ("count",)

    def __init__(self):
        self.count = 0

    def add(self, n: int):
        self.count += n

    def reset(self):
        self.count = 0


op_counter = _OpCounter()


def _dn_arr(x: np.ndarray, k: float) -> np.ndarray:
    with np.errstate(invalid="ignore", over="ignore"):
        out = x - ((k * _EPS) * np.abs(x) + k * _TINY)
    return np.where(np.isfinite(x), out, x)


def _up_arr(x: np.ndarray, k: float) -> np.ndarray:
    with np.errstate(invalid="ignore", over="ignore"):
        out = x + ((k * _EPS) * np.abs(x) + k * _TINY)
    return np.where(np.isfinite(x), out, x)


def _as_arr(x) -> np.ndarray:
    return np.asarray(x, dtype=np.float64)


class IVec:
    """Array of closed hardware intervals (endpoint arrays lo <= hi)."""

    __slots__ = ("lo", "hi")

    def __init__(self, lo, hi, _checked: bool = False):
        lo = _as_arr(lo)
        hi = _as_arr(hi)
        if not _checked:
            if lo.shape != hi.shape:
                raise ValueError("endpoint shape mismatch")
            with np.errstate(invalid="ignore"):
                bad = np.any(lo > hi)
            if bad:
                raise ValueError("lower endpoint above upper endpoint")
        self.lo = lo
        self.hi = hi

    # -- constructors --------------------------------------------------

    @staticmethod
    def from_points(x) -> "IVec":
        a = _as_arr(x).copy()
        return IVec(a, a.copy(), _checked=True)

    @staticmethod
    def zeros(shape) -> "IVec":
        return IVec(np.zeros(shape), np.zeros(shape), _checked=True)

    @staticmethod
    def from_intervals(ivs) -> "IVec":
        lo = np.array([v.lo_float() for v in ivs])
        hi = np.array([v.hi_float() for v in ivs])
        return IVec(lo, hi, _checked=True)

    @staticmethod
    def full(shape, iv: RealInterval) -> "IVec":
        return IVec(
            np.full(shape, iv.lo_float()), np.full(shape, iv.hi_float()), _checked=True
        )

    # -- structure -----------------------------------------------------

    @property
    def shape(self):
        return self.lo.shape

    @property
    def size(self) -> int:
        return self.lo.size

    def __len__(self) -> int:
        return self.lo.shape[0]

    def __getitem__(self, idx):
        lo = self.lo[idx]
        hi = self.hi[idx]
        if np.ndim(lo) == 0:
            return RealInterval(float(lo), float(hi), HARDWARE, _raw=True)
        return IVec(lo, hi, _checked=True)

    def take(self, idx) -> "IVec":
        return IVec(self.lo[idx], self.hi[idx], _checked=True)

    def reshape(self, *shape) -> "IVec":
        return IVec(self.lo.reshape(*shape), self.hi.reshape(*shape), _checked=True)

    def moveaxis(self, src: int, dst: int) -> "IVec":
        return IVec(
            np.moveaxis(self.lo, src, dst), np.moveaxis(self.hi, src, dst), _checked=True
        )

    def take_last(self, idx) -> "IVec":
        return IVec(
            np.take(self.lo, idx, axis=-1), np.take(self.hi, idx, axis=-1), _checked=True
        )

    @staticmethod
    def concatenate(parts, axis: int = 0) -> "IVec":
        return IVec(
            np.concatenate([p.lo for p in parts], axis=axis),
            np.concatenate([p.hi for p in parts], axis=axis),
            _checked=True,
        )

    def copy(self) -> "IVec":
        return IVec(self.lo.copy(), self.hi.copy(), _checked=True)

    def to_intervals(self):
        flat_lo = self.lo.ravel()
        flat_hi = self.hi.ravel()
        return [
            RealInterval(float(a), float(b), HARDWARE, _raw=True)
            for a, b in zip(flat_lo, flat_hi)
        ]

    def __repr__(self) -> str:  # pragma: no cover - cosmetic
        return f"IVec(shape={self.shape}, max_width={float(np.max(self.width())):.3g})"

    # -- queries ---------------------------------------------------------

    def width(self) -> np.ndarray:
        return _up_arr(self.hi - self.lo, _KA)

    def mid(self) -> np.ndarray:
        return 0.5 * (self.lo + self.hi)

    def mag(self) -> np.ndarray:
        """Pointwise upper bound of |x|."""
        return np.maximum(np.abs(self.lo), np.abs(self.hi))

    def mig(self) -> np.ndarray:
        """Pointwise lower bound of |x| (0 where the interval straddles)."""
        straddle = (self.lo <= 0.0) & (self.hi >= 0.0)
        return np.where(straddle, 0.0, np.minimum(np.abs(self.lo), np.abs(self.hi)))

    def contains_zero(self) -> np.ndarray:
        return (self.lo <= 0.0) & (self.hi >= 0.0)

    def signs(self) -> np.ndarray:
        """+1 strictly positive, -1 strictly negative, 0 straddling."""
        return np.where(self.lo > 0.0, 1, np.where(self.hi < 0.0, -1, 0))

    # -- arithmetic ------------------------------------------------------

    def __neg__(self) -> "IVec":
        return IVec(-self.hi, -self.lo, _checked=True)

    def __add__(self, other) -> "IVec":
        lo2, hi2 = _other_endpoints(other)
        lo = _dn_arr(self.lo + lo2, _KA)
        hi = _up_arr(self.hi + hi2, _KA)
        op_counter.add(lo.size)
        return IVec(lo, hi, _checked=True)

    __radd__ = __add__

    def __sub__(self, other) -> "IVec":
        lo2, hi2 = _other_endpoints(other)
        lo = _dn_arr(self.lo - hi2, _KA)
        hi = _up_arr(self.hi - lo2, _KA)
        op_counter.add(lo.size)
        return IVec(lo, hi, _checked=True)

    def __rsub__(self, other) -> "IVec":
        return (-self) + other

    def __mul__(self, other) -> "IVec":
        lo2, hi2 = _other_endpoints(other)
        with np.errstate(invalid="ignore", over="ignore"):
            p1 = self.lo * lo2
            p2 = self.lo * hi2
            p3 = self.hi * lo2
            p4 = self.hi * hi2
            lo = np.minimum(np.minimum(p1, p2), np.minimum(p3, p4))
            hi = np.maximum(np.maximum(p1, p2), np.maximum(p3, p4))
        op_counter.add(np.size(lo))
        return IVec(_dn_arr(lo, _KA), _up_arr(hi, _KA), _checked=True)

    __rmul__ = __mul__

    def __truediv__(self, other) -> "IVec":
        lo2, hi2 = _other_endpoints(other)
        lo2 = np.broadcast_to(_as_arr(lo2), np.broadcast_shapes(self.lo.shape, np.shape(lo2)))
        hi2 = np.broadcast_to(_as_arr(hi2), lo2.shape)
        if np.any((lo2 <= 0.0) & (hi2 >= 0.0)):
            raise DivisorContainsZero("vector division by interval containing 0")
        with np.errstate(invalid="ignore", over="ignore"):
            q1 = self.lo / lo2
            q2 = self.lo / hi2
            q3 = self.hi / lo2
            q4 = self.hi / hi2
            lo = np.minimum(np.minimum(q1, q2), np.minimum(q3, q4))
            hi = np.maximum(np.maximum(q1, q2), np.maximum(q3, q4))
        op_counter.add(np.size(lo))
        return IVec(_dn_arr(lo, _KA), _up_arr(hi, _KA), _checked=True)

    def __rtruediv__(self, other) -> "IVec":
        lo2, hi2 = _other_endpoints(other)
        num = IVec(np.broadcast_to(_as_arr(lo2), self.shape),
                   np.broadcast_to(_as_arr(hi2), self.shape), _checked=True)
        return num / self

    def square(self) -> "IVec":
        with np.errstate(over="ignore"):
            m1 = self.lo * self.lo
            m2 = self.hi * self.hi
        hi = _up_arr(np.maximum(m1, m2), _KA)
        lo = np.where(
            self.contains_zero(),
            0.0,
            np.maximum(_dn_arr(np.minimum(m1, m2), _KA), 0.0),
        )
        op_counter.add(np.size(m1))
        return IVec(lo, hi, _checked=True)

    def abs(self) -> "IVec":
        lo = self.mig()
        hi = self.mag()
        return IVec(lo, hi, _checked=True)

    # -- elementwise functions --------------------------------------------

    def sqrt(self) -> "IVec":
        if np.any(self.lo < 0.0):
            raise NegativeSqrtDomain("vector sqrt of negative interval")
        lo = np.maximum(_dn_arr(np.sqrt(self.lo), _KA), 0.0)
        hi = _up_arr(np.sqrt(self.hi), _KA)
        op_counter.add(lo.size)
        return IVec(lo, hi, _checked=True)

    def exp(self) -> "IVec":
        with np.errstate(over="ignore", under="ignore"):
            lo = np.maximum(_dn_arr(np.exp(self.lo), _KT), 0.0)
            hi = np.maximum(_up_arr(np.exp(self.hi), _KT), _TINY)
        op_counter.add(lo.size)
        return IVec(lo, hi, _checked=True)

    def log(self) -> "IVec":
        if np.any(self.lo <= 0.0):
            raise LogDomain("vector log needs strictly positive intervals")
        lo = _dn_arr(np.log(self.lo), _KT)
        hi = _up_arr(np.log(self.hi), _KT)
        op_counter.add(lo.size)
        return IVec(lo, hi, _checked=True)

    def sin(self) -> "IVec":
        return _trig_vec(self, is_sin=True)

    def cos(self) -> "IVec":
        return _trig_vec(self, is_sin=False)

    # -- reductions -------------------------------------------------------

    def sum(self, axis=None):
        """Rigorous interval sum; RealInterval for a full reduction."""
        n = self.size if axis is None else self.lo.shape[axis]
        slo = np.sum(self.lo, axis=axis)
        shi = np.sum(self.hi, axis=axis)
        tlo = np.sum(np.abs(self.lo), axis=axis)
        thi = np.sum(np.abs(self.hi), axis=axis)
        # (n-1) u sum|x| covers any ordering; n+2 absorbs the bound's own
        # rounding and the abs-sum's inflation
        lo = _dn_arr(slo - ((n + 2) * _U) * tlo, _KA)
        hi = _up_arr(shi + ((n + 2) * _U) * thi, _KA)
        op_counter.add(self.size)
        if axis is None:
            return RealInterval(float(lo), float(hi), HARDWARE, _raw=True)
        return IVec(lo, hi, _checked=True)

    # -- set operations -----------------------------------------------------

    def hull(self, other: "IVec") -> "IVec":
        return IVec(
            np.minimum(self.lo, other.lo), np.maximum(self.hi, other.hi), _checked=True
        )

    def pad(self, radius) -> "IVec":
        r = _as_arr(radius)
        if np.any(r < 0.0):
            raise ValueError("pad radius must be nonnegative")
        return IVec(_dn_arr(self.lo - r, _KA), _up_arr(self.hi + r, _KA), _checked=True)

    def intersects(self, other: "IVec") -> np.ndarray:
        return (self.lo <= other.hi) & (other.lo <= self.hi)

    def contains_points(self, x) -> np.ndarray:
        a = _as_arr(x)
        return (self.lo <= a) & (a <= self.hi)


def _other_endpoints(other):
    if isinstance(other, IVec):
        return other.lo, other.hi
    if isinstance(other, RealInterval):
        return other.lo_float(), other.hi_float()
    a = _as_arr(other)
    return a, a


def _trig_vec(x: IVec, is_sin: bool) -> IVec:
    fn = np.sin if is_sin else np.cos
    v1 = fn(x.lo)
    v2 = fn(x.hi)
    lo = _dn_arr(np.minimum(v1, v2), _KT)
    hi = _up_arr(np.maximum(v1, v2), _KT)
    # peaks of sin at (1/2 + 2k) pi, dips at (-1/2 + 2k) pi; for cos 0 and 1
    off_max = 0.5 if is_sin else 0.0
    off_min = -0.5 if is_sin else 1.0
    hi = np.where(_contains_extremum(x, off_max), 1.0, hi)
    lo = np.where(_contains_extremum(x, off_min), -1.0, lo)
    lo = np.maximum(lo, -1.0)
    hi = np.minimum(hi, 1.0)
    op_counter.add(lo.size)
    return IVec(lo, hi, _checked=True)


def _contains_extremum(x: IVec, off: float) -> np.ndarray:
    """Mask: might (off + 2k) pi lie inside the interval for integer k?

    Conservative by a few ulps of slack, which only widens trig output.
    """
    a = np.where(x.lo >= 0.0, x.lo / _PI_HI, x.lo / _PI_LO)
    b = np.where(x.hi >= 0.0, x.hi / _PI_LO, x.hi / _PI_HI)
    a = _dn_arr(a, 4.0)
    b = _up_arr(b, 4.0)
    return np.floor((b - off) / 2.0) >= np.ceil((a - off) / 2.0)


class CVec:
    """Array of complex rectangles (parallel IVec real and imaginary parts)."""

    __slots__ = ("re", "im")

    def __init__(self, re: IVec, im: IVec):
        if re.shape != im.shape:
            raise ValueError("component shape mismatch")
        self.re = re
        self.im = im

    # -- constructors -----------------------------------------------------

    @staticmethod
    def from_points(z) -> "CVec":
        z = np.asarray(z, dtype=np.complex128)
        return CVec(IVec.from_points(z.real), IVec.from_points(z.imag))

    @staticmethod
    def from_re_im(re, im) -> "CVec":
        return CVec(IVec.from_points(re), IVec.from_points(im))

    @staticmethod
    def zeros(shape) -> "CVec":
        return CVec(IVec.zeros(shape), IVec.zeros(shape))

    @staticmethod
    def from_real(re: IVec) -> "CVec":
        return CVec(re, IVec.zeros(re.shape))

    @staticmethod
    def from_boxes(boxes) -> "CVec":
        return CVec(
            IVec.from_intervals([b.re for b in boxes]),
            IVec.from_intervals([b.im for b in boxes]),
        )

    @staticmethod
    def full(shape, box: ComplexBox) -> "CVec":
        return CVec(IVec.full(shape, box.re), IVec.full(shape, box.im))

    # -- structure ----------------------------------------------------------

    @property
    def shape(self):
        return self.re.shape

    @property
    def size(self) -> int:
        return self.re.size

    def __len__(self) -> int:
        return len(self.re)

    def __getitem__(self, idx):
        r = self.re[idx]
        i = self.im[idx]
        if isinstance(r, RealInterval):
            return ComplexBox(r, i)
        return CVec(r, i)

    def take(self, idx) -> "CVec":
        return CVec(self.re.take(idx), self.im.take(idx))

    def reshape(self, *shape) -> "CVec":
        return CVec(self.re.reshape(*shape), self.im.reshape(*shape))

    def moveaxis(self, src: int, dst: int) -> "CVec":
        return CVec(self.re.moveaxis(src, dst), self.im.moveaxis(src, dst))

    def take_last(self, idx) -> "CVec":
        return CVec(self.re.take_last(idx), self.im.take_last(idx))

    @staticmethod
    def concatenate(parts, axis: int = 0) -> "CVec":
        return CVec(
            IVec.concatenate([p.re for p in parts], axis=axis),
            IVec.concatenate([p.im for p in parts], axis=axis),
        )

    def copy(self) -> "CVec":
        return CVec(self.re.copy(), self.im.copy())

    def to_boxes(self):
        return [ComplexBox(r, i) for r, i in zip(self.re.to_intervals(), self.im.to_intervals())]

    def __repr__(self) -> str:  # pragma: no cover - cosmetic
        w = max(float(np.max(self.re.width())), float(np.max(self.im.width())))
        return f"CVec(shape={self.shape}, max_width={w:.3g})"

    # -- arithmetic -----------------------------------------------------------

    def __neg__(self) -> "CVec":
        return CVec(-self.re, -self.im)

    def __add__(self, other) -> "CVec":
        o = _coerce_cvec(other)
        return CVec(self.re + o.re, self.im + o.im)

    __radd__ = __add__

    def __sub__(self, other) -> "CVec":
        o = _coerce_cvec(other)
        return CVec(self.re - o.re, self.im - o.im)

    def __rsub__(self, other) -> "CVec":
        return (-self) + other

    def __mul__(self, other) -> "CVec":
        if not _is_complexlike(other):
            return CVec(self.re * other, self.im * other)
        o = _coerce_cvec(other)
        return CVec(
            self.re * o.re - self.im * o.im,
            self.re * o.im + self.im * o.re,
        )

    __rmul__ = __mul__

    def __truediv__(self, other):
        if not _is_complexlike(other):
            return CVec(self.re / other, self.im / other)
        o = _coerce_cvec(other)
        d = o.abs2()
        num = self * o.conj()
        return CVec(num.re / d, num.im / d)

    def conj(self) -> "CVec":
        return CVec(self.re, -self.im)

    def mul_i(self) -> "CVec":
        return CVec(-self.im, self.re)

    def abs2(self) -> IVec:
        return self.re.square() + self.im.square()

    def abs(self) -> IVec:
        return self.abs2().sqrt()

    def exp(self) -> "CVec":
        r = self.re.exp()
        return CVec(r * self.im.cos(), r * self.im.sin())

    def sum(self, axis=None):
        r = self.re.sum(axis)
        i = self.im.sum(axis)
        if isinstance(r, RealInterval):
            return ComplexBox(r, i)
        return CVec(r, i)

    def hull(self, other: "CVec") -> "CVec":
        return CVec(self.re.hull(other.re), self.im.hull(other.im))

    def pad(self, radius) -> "CVec":
        return CVec(self.re.pad(radius), self.im.pad(radius))

    def widen_by_imag(self) -> IVec:
        """Project to the real axis, widening by the imaginary magnitude.

        Valid when the represented quantity is known to be real: the true
        value lies within |im| of some point of re.
        """
        return self.re.pad(self.im.mag())


def _is_complexlike(other) -> bool:
    if isinstance(other, (CVec, ComplexBox, complex)):
        return True
    return not isinstance(other, (IVec, RealInterval)) and np.iscomplexobj(other)


def _coerce_cvec(other) -> CVec:
    if isinstance(other, CVec):
        return other
    if isinstance(other, ComplexBox):
        return CVec(
            IVec(np.asarray(other.re.lo_float()), np.asarray(other.re.hi_float()), _checked=True),
            IVec(np.asarray(other.im.lo_float()), np.asarray(other.im.hi_float()), _checked=True),
        )
    z = np.asarray(other, dtype=np.complex128)
    return CVec(IVec.from_points(z.real), IVec.from_points(z.imag))


def cis(theta: IVec) -> CVec:
    """exp(i theta) for a real interval array."""
    return CVec(theta.cos(), theta.sin())
