"""Rigorous Hurwitz zeta evaluation.

Three evaluation paths, stacked bottom to top:

* ``em_hurwitz`` — direct Euler-Maclaurin summation of zeta(s, alpha)
  with the truncation remainder enclosed as an interval, at either
  precision tier;
* ``build_lattice`` — a precomputed grid of tail values
  zeta_M(1/2 + it + c, r/D) along one horizontal line, built at the
  big-float tier and narrowed to hardware boxes, persisted on disk;
* ``eval_taylor`` — Taylor-shift queries against that grid for rational
  second arguments a/q, with a geometric bound on the truncated Taylor
  tail and exact restoration of the first M+1 direct terms.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

from .errors import DomainError, PoleProximity, RadiusViolation
from .interval import (
    HARDWARE,
    ComplexBox,
    PrecisionTier,
    RealInterval,
    bernoulli,
    bigfloat,
    pi_interval,
)

DEFAULT_D = 2048
DEFAULT_NCOLS = 15
DEFAULT_M = 9
DEFAULT_BUILD_BITS = 128

_HALF = Fraction(1, 2)


def zeta_upper(m: int) -> Fraction:
    """Exact rational upper bound on zeta(m) for integer m >= 2."""
    if m < 2:
        raise DomainError("zeta_upper needs m >= 2")
    # 1 + 2^-m + integral_2^inf x^-m dx
    return 1 + Fraction(1, 2**m) + Fraction(2, (m - 1) * 2**m)


def _ipow(iv: RealInterval, n: int) -> RealInterval:
    """iv**n for n >= 1 by square-and-multiply."""
    acc = None
    sq = iv
    k = n
    while k:
        if k & 1:
            acc = sq if acc is None else acc * sq
        k >>= 1
        if k:
            sq = sq.square()
    return acc


def _cpow(base: RealInterval, z: ComplexBox) -> ComplexBox:
    """base**z for a strictly positive real base."""
    lg = base.log()
    return ComplexBox(z.re * lg, z.im * lg).exp()


@dataclass(frozen=True)
class EMParams:
    """Euler-Maclaurin truncation choices.

    terms_a: number of direct power terms summed before the boundary.
    terms_b: number of Bernoulli correction terms.  The remainder after
    terms_b corrections is rigorously enclosed and added to the result,
    so both choices affect only the width of the output, never its
    containment.
    """

    terms_a: int
    terms_b: int


def auto_params(s: ComplexBox, alpha: RealInterval, tier: PrecisionTier) -> EMParams:
    """Truncation choices aiming the remainder near the tier's resolution."""
    bits = tier.bits
    b = max(8, (bits + 3) // 4)
    smag = s.abs().hi_float()
    sigma = s.re.lo_float()
    al = max(alpha.lo_float(), 0.0)
    # float estimate of log2 of the remainder as a function of the
    # boundary point A = a + alpha; solve for the smallest adequate a
    num = 1.0 + math.log2(float(zeta_upper(2 * b + 1)))
    for j in range(2 * b + 1):
        num += math.log2(smag + j + 1.0)
    num -= (2 * b + 1) * math.log2(2.0 * math.pi)
    num -= math.log2(sigma + 2 * b)
    num += bits + 8
    a_boundary = 2.0 ** (num / (sigma + 2 * b))
    a = max(2, math.ceil(a_boundary - al) + 1)
    return EMParams(a, b)


def _em_core(s: ComplexBox, alpha: RealInterval, a: int, b: int) -> ComplexBox:
    """Enclosure of sum_{n>=0} (n + alpha)^{-s}, continued past sigma > 1.

    alpha may be any strictly positive interval here; the public wrapper
    restricts it to (0, 1].  Remainder bound used: with A = a + alpha,

        |R_b| <= 2 zeta(2b+1) (2 pi)^{-(2b+1)} |(s)_{2b+1}| A^{-sigma-2b} / (sigma+2b)

    valid whenever sigma + 2b > 0.
    """
    tier = s.tier
    if alpha.lo_fraction() <= 0:
        raise DomainError("alpha must be strictly positive")
    if (s - 1).contains_zero():
        raise PoleProximity("s overlaps the pole at 1")
    if s.re.lo_fraction() + 2 * b <= 0:
        raise DomainError("remainder bound needs Re(s) + 2*terms_b > 0")
    if a < 0 or b < 1:
        raise DomainError("terms_a must be >= 0 and terms_b >= 1")

    neg_s = -s
    acc = ComplexBox.zero(tier)
    for n in range(a):
        acc = acc + _cpow(alpha + n, neg_s)

    A = alpha + a
    logA = A.log()
    P = ComplexBox(neg_s.re * logA, neg_s.im * logA).exp()  # A^{-s}
    half = RealInterval.from_fraction(_HALF, tier)
    acc = acc + (P * A) / (s - 1)
    acc = acc + P * half

    invA2 = RealInterval.one(tier) / A.square()
    apow = P * A  # A^{1-s}
    poch = s  # (s)_1
    for k in range(1, b + 1):
        apow = apow * invA2  # A^{1-s-2k}
        coef = RealInterval.from_fraction(bernoulli(2 * k) / math.factorial(2 * k), tier)
        acc = acc + (poch * coef) * apow
        poch = (poch * (s + (2 * k - 1))) * (s + 2 * k)
    # poch is now (s)_{2b+1}

    sig2b = s.re + 2 * b
    rpow = (logA * (-sig2b)).exp()  # A^{-sigma-2b}
    zu = RealInterval.from_fraction(zeta_upper(2 * b + 1), tier)
    two_pi_pow = _ipow(pi_interval(tier) * 2, 2 * b + 1)
    radius = (zu * 2 * poch.abs() * rpow) / (two_pi_pow * sig2b)
    return acc.pad(radius)


def _coerce_s(s, tier: PrecisionTier) -> ComplexBox:
    if isinstance(s, ComplexBox):
        return s
    if isinstance(s, RealInterval):
        return ComplexBox.from_real(s)
    if isinstance(s, Fraction):
        return ComplexBox(RealInterval.from_fraction(s, tier), RealInterval.zero(tier))
    return ComplexBox.point(complex(s), tier)


def _coerce_alpha(alpha, tier: PrecisionTier) -> RealInterval:
    if isinstance(alpha, RealInterval):
        return alpha
    if isinstance(alpha, (Fraction, int)):
        return RealInterval.from_fraction(Fraction(alpha), tier)
    return RealInterval.point(alpha, tier)


def em_hurwitz(s, alpha, params: EMParams | None = None, tier: PrecisionTier = HARDWARE) -> ComplexBox:
    """Enclosure of the Hurwitz zeta zeta(s, alpha) for alpha in (0, 1].

    s may be a ComplexBox (its tier then wins), a RealInterval, or a
    plain number; alpha likewise.  With params omitted the truncation is
    chosen so the remainder sits near the tier's resolution.
    """
    sb = _coerce_s(s, tier)
    tier = sb.tier
    al = _coerce_alpha(alpha, tier)
    if al.lo_fraction() <= 0:
        raise DomainError("alpha must be strictly positive")
    if al.hi_fraction() > 1:
        raise DomainError("alpha must lie in (0, 1]")
    if params is None:
        params = auto_params(sb, al, tier)
    return _em_core(sb, al, params.terms_a, params.terms_b)


def em_hurwitz_tail(s, alpha, skip: int, params: EMParams | None = None, tier: PrecisionTier = HARDWARE) -> ComplexBox:
    """Enclosure of zeta(s, alpha) - sum_{n=0}^{skip-1} (n+alpha)^{-s}.

    Evaluated directly as the shifted series zeta(s, alpha + skip), so no
    cancellation between the full value and the removed head occurs.
    """
    sb = _coerce_s(s, tier)
    tier = sb.tier
    al = _coerce_alpha(alpha, tier)
    shifted = al + skip
    if params is None:
        params = auto_params(sb, shifted, tier)
    return _em_core(sb, shifted, params.terms_a, params.terms_b)


# ---------------------------------------------------------------------------
# shared-logarithm engine for one row, all columns


def _em_columns(
    t: float,
    base_sigma: Fraction,
    alpha: RealInterval,
    ncols: int,
    a: int,
    b: int,
) -> list[ComplexBox]:
    """Enclosures of sum_{n>=0} (n+alpha)^{-(base_sigma+c+it)} for c = 0..ncols.

    Column c differs from column c-1 by one extra factor (n+alpha)^{-1},
    so each direct term costs one complex exponential total plus a real
    scaling per column.
    """
    tier = alpha.tier
    if alpha.lo_fraction() <= 0:
        raise DomainError("alpha must be strictly positive")
    if base_sigma + 2 * b <= 0:
        raise DomainError("remainder bound needs Re(s) + 2*terms_b > 0")
    if t == 0.0 and any(base_sigma + c == 1 for c in range(ncols + 1)):
        raise PoleProximity("a column coincides with the pole at 1")
    if t == 0.0:
        zero = RealInterval.zero(tier)
        return [
            ComplexBox(re, zero)
            for re in _em_columns_real(base_sigma, alpha, ncols, a, b)
        ]

    cols = range(ncols + 1)
    t_iv = RealInterval.point(t, tier)
    neg_t = -t_iv
    s_list = [
        ComplexBox(RealInterval.from_fraction(base_sigma + c, tier), t_iv) for c in cols
    ]
    sigma0 = RealInterval.from_fraction(base_sigma, tier)

    acc = [ComplexBox.zero(tier) for _ in cols]
    one = RealInterval.one(tier)
    for n in range(a):
        base = alpha + n
        lg = base.log()
        p = ComplexBox((-sigma0) * lg, neg_t * lg).exp()  # base^{-s_0}
        inv = one / base
        for c in cols:
            if c:
                p = p * inv
            acc[c] = acc[c] + p

    A = alpha + a
    logA = A.log()
    invA = one / A
    invA2 = invA.square()
    half = RealInterval.from_fraction(_HALF, tier)
    zu = RealInterval.from_fraction(zeta_upper(2 * b + 1), tier)
    two_pi_pow = _ipow(pi_interval(tier) * 2, 2 * b + 1)
    coefs = [
        RealInterval.from_fraction(bernoulli(2 * k) / math.factorial(2 * k), tier)
        for k in range(1, b + 1)
    ]

    out: list[ComplexBox] = []
    P = ComplexBox((-sigma0) * logA, neg_t * logA).exp()  # A^{-s_0}
    for c in cols:
        if c:
            P = P * invA
        s = s_list[c]
        cell = acc[c] + (P * A) / (s - 1) + P * half
        apow = P * A
        poch = s
        for k in range(1, b + 1):
            apow = apow * invA2
            cell = cell + (poch * coefs[k - 1]) * apow
            poch = (poch * (s + (2 * k - 1))) * (s + 2 * k)
        sig2b = s.re + 2 * b
        rpow = (logA * (-sig2b)).exp()
        radius = (zu * 2 * poch.abs() * rpow) / (two_pi_pow * sig2b)
        out.append(cell.pad(radius))
    return out


def _em_columns_real(
    base_sigma: Fraction,
    alpha: RealInterval,
    ncols: int,
    a: int,
    b: int,
) -> list[RealInterval]:
    """Real-argument variant of _em_columns (the t = 0 case)."""
    tier = alpha.tier
    cols = range(ncols + 1)
    sigma0 = RealInterval.from_fraction(base_sigma, tier)
    s_list = [RealInterval.from_fraction(base_sigma + c, tier) for c in cols]

    acc = [RealInterval.zero(tier) for _ in cols]
    one = RealInterval.one(tier)
    for n in range(a):
        base = alpha + n
        p = ((-sigma0) * base.log()).exp()
        inv = one / base
        for c in cols:
            if c:
                p = p * inv
            acc[c] = acc[c] + p

    A = alpha + a
    logA = A.log()
    invA = one / A
    invA2 = invA.square()
    half = RealInterval.from_fraction(_HALF, tier)
    zu = RealInterval.from_fraction(zeta_upper(2 * b + 1), tier)
    two_pi_pow = _ipow(pi_interval(tier) * 2, 2 * b + 1)
    coefs = [
        RealInterval.from_fraction(bernoulli(2 * k) / math.factorial(2 * k), tier)
        for k in range(1, b + 1)
    ]

    out: list[RealInterval] = []
    P = ((-sigma0) * logA).exp()
    for c in cols:
        if c:
            P = P * invA
        s = s_list[c]
        cell = acc[c] + (P * A) / (s - 1) + P * half
        apow = P * A
        poch = s
        for k in range(1, b + 1):
            apow = apow * invA2
            cell = cell + (poch * coefs[k - 1]) * apow
            poch = (poch * (s + (2 * k - 1))) * (s + 2 * k)
        sig2b = s + 2 * b
        rpow = (logA * (-sig2b)).exp()
        radius = (zu * 2 * poch.abs() * rpow) / (two_pi_pow * sig2b)
        out.append(cell.pad(radius))
    return out


# ---------------------------------------------------------------------------
# the lattice


@dataclass
class HurwitzLattice:
    """Grid of tail values zeta_M(1/2 + it + c, r/D), hardware boxes.

    Rows r = 1..D hold the offset alpha = r/D (row D is alpha = 1);
    columns c = 0..Ncols shift the first argument by integers.  Each cell
    contains zeta(1/2+it+c, r/D) - sum_{n=0}^{M} (n + r/D)^{-(1/2+it+c)}.
    Immutable once built; queries only read.
    """

    t: float
    D: int
    Ncols: int
    M: int
    tier: PrecisionTier
    rows: list[list[ComplexBox]] = field(repr=False)

    def cell(self, r: int, c: int) -> ComplexBox:
        """Cell for row r (1-based) and column c (0-based)."""
        if not (1 <= r <= self.D):
            raise IndexError(f"row {r} outside 1..{self.D}")
        if not (0 <= c <= self.Ncols):
            raise IndexError(f"column {c} outside 0..{self.Ncols}")
        return self.rows[r - 1][c]

    def s_at(self, c: int = 0) -> ComplexBox:
        """The point 1/2 + it + c as a box on the lattice tier."""
        return ComplexBox(
            RealInterval.from_fraction(_HALF + c, self.tier),
            RealInterval.point(self.t, self.tier),
        )


def _build_rows(args) -> list[tuple[int, list[str]]]:
    t, D, Ncols, M, bits, r_lo, r_hi = args
    tier = bigfloat(bits)
    sb = ComplexBox(
        RealInterval.from_fraction(_HALF, tier), RealInterval.point(t, tier)
    )
    out = []
    for r in range(r_lo, r_hi):
        alpha = RealInterval.from_fraction(Fraction(r, D) + (M + 1), tier)
        params = auto_params(sb, alpha, tier)
        cells = _em_columns(t, _HALF, alpha, Ncols, params.terms_a, params.terms_b)
        out.append((r, [cell.widen_to(HARDWARE).to_hex() for cell in cells]))
    return out


def build_lattice(
    t: float,
    D: int = DEFAULT_D,
    Ncols: int = DEFAULT_NCOLS,
    M: int = DEFAULT_M,
    tier: PrecisionTier | None = None,
    workers: int | None = None,
    cache_dir: str | Path | None = None,
    cache: bool = True,
) -> HurwitzLattice:
    """Build (or load from cache) the lattice at ordinate t.

    tier is the build tier (big-float); the returned lattice is narrowed
    to hardware boxes for the query path.  With cache enabled the result
    is persisted keyed by (t, D, Ncols, M, build bits).
    """
    t = float(t)
    if D < 2 or Ncols < 2 or M < 0:
        raise DomainError("need D >= 2, Ncols >= 2, M >= 0")
    if tier is None:
        tier = bigfloat(DEFAULT_BUILD_BITS)
    if tier.kind == "hardware":
        raise DomainError("lattice must be built at a big-float tier")

    path = None
    if cache:
        path = _cache_path(cache_dir, t, D, Ncols, M, tier.bits)
        if path.is_file():
            return load_lattice(path)

    if workers is None:
        workers = min(os.cpu_count() or 1, 8) if D >= 256 else 1

    row_hex: dict[int, list[str]] = {}
    if workers > 1:
        chunk = max(8, (D + workers * 4 - 1) // (workers * 4))
        tasks = [
            (t, D, Ncols, M, tier.bits, lo, min(lo + chunk, D + 1))
            for lo in range(1, D + 1, chunk)
        ]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            for part in pool.map(_build_rows, tasks):
                for r, cells in part:
                    row_hex[r] = cells
    else:
        for r, cells in _build_rows((t, D, Ncols, M, tier.bits, 1, D + 1)):
            row_hex[r] = cells

    rows = [
        [ComplexBox.from_hex(h, HARDWARE) for h in row_hex[r]] for r in range(1, D + 1)
    ]
    lat = HurwitzLattice(t=t, D=D, Ncols=Ncols, M=M, tier=HARDWARE, rows=rows)
    if path is not None:
        path.parent.mkdir(parents=True, exist_ok=True)
        save_lattice(lat, path, build_bits=tier.bits)
    return lat


def _cache_path(cache_dir, t: float, D: int, Ncols: int, M: int, bits: int) -> Path:
    if cache_dir is None:
        cache_dir = os.environ.get("GRHDESK_CACHE")
    if cache_dir is None:
        cache_dir = Path.home() / ".cache" / "grhdesk"
    name = f"hurlat_t{t!r}_D{D}_N{Ncols}_M{M}_b{bits}.dat"
    return Path(cache_dir) / name


_MAGIC = "hurwitz-lattice 1"


def save_lattice(lat: HurwitzLattice, path: str | Path, build_bits: int = DEFAULT_BUILD_BITS) -> None:
    """Write header (decimal) then cells row-major, one hex box per line."""
    path = Path(path)
    lines = [_MAGIC, f"{lat.t!r} {lat.D} {lat.Ncols} {lat.M} {build_bits}"]
    for row in lat.rows:
        for cell in row:
            lines.append(cell.to_hex())
    tmp = path.with_suffix(path.suffix + ".tmp")
    tmp.write_text("\n".join(lines) + "\n")
    tmp.replace(path)


def load_lattice(path: str | Path) -> HurwitzLattice:
    path = Path(path)
    with path.open() as fh:
        magic = fh.readline().strip()
        if magic != _MAGIC:
            raise ValueError(f"not a lattice file: {path}")
        head = fh.readline().split()
        t = float(head[0])
        D, Ncols, M = int(head[1]), int(head[2]), int(head[3])
        rows = []
        for _ in range(D):
            row = [ComplexBox.from_hex(fh.readline(), HARDWARE) for _ in range(Ncols + 1)]
            rows.append(row)
    return HurwitzLattice(t=t, D=D, Ncols=Ncols, M=M, tier=HARDWARE, rows=rows)


# ---------------------------------------------------------------------------
# Taylor-shift queries


def nearest_row(a: int, q: int, D: int) -> int:
    """Lattice row nearest to a/q, ties toward larger r, clamped to 1..D."""
    r = (2 * a * D + q) // (2 * q)
    return min(max(r, 1), D)


def taylor_tail_bound(
    s_mag_hi: Fraction,
    delta_abs: Fraction,
    radius: Fraction,
    first_k: int,
) -> Fraction:
    """Upper bound on sum_{k>=first_k} |delta|^k |(s)_k|/k! |zeta_M(s+k, alpha)|.

    radius is M + 1 + alpha, the decay base of the zeta_M column values;
    s_mag_hi an upper bound on |s| with Re(s) = 1/2.  Uses
    |zeta_M(s+k, alpha)| <= radius^(-1/2-k) (1 + radius/(k - 1/2)) and the
    termwise ratio bound; raises RadiusViolation when the ratio reaches 1.
    """
    K = first_k
    if delta_abs == 0:
        return Fraction(0)
    # first term, with the column-value bound at k = K
    poch = Fraction(1)
    for j in range(K):
        poch *= s_mag_hi + j
    tK = (
        delta_abs**K
        * poch
        / math.factorial(K)
        * radius ** (-K)  # the extra radius^(-1/2) factor < 1 is dropped
        * (1 + radius / (K - _HALF))
    )
    ratio = delta_abs * max(Fraction(1), (s_mag_hi + K) / (K + 1)) / radius
    if ratio >= 1:
        raise RadiusViolation(
            f"Taylor tail ratio {float(ratio):.3g} >= 1 at k = {K}"
        )
    return tK / (1 - ratio)


def eval_taylor(lat: HurwitzLattice, a: int, q: int) -> ComplexBox:
    """Enclosure of zeta(1/2 + i t, a/q) from the lattice.

    Shifts the nearest row by delta = a/q - r/D through Ncols Taylor
    terms, bounds the truncated Taylor tail geometrically, and restores
    the first M+1 direct terms at the exact argument a/q.
    """
    if not (0 < a < q):
        raise DomainError("need 0 < a < q")
    if math.gcd(a, q) != 1:
        raise DomainError("a and q must be coprime")
    tier = lat.tier
    r = nearest_row(a, q, lat.D)
    delta_fr = Fraction(a, q) - Fraction(r, lat.D)

    s0 = lat.s_at(0)
    row = lat.rows[r - 1]
    acc = row[0]
    if delta_fr:
        neg_delta = RealInterval.from_fraction(-delta_fr, tier)
        coef = ComplexBox.one(tier)
        for k in range(1, lat.Ncols + 1):
            # coef_k = (-delta)^k (s)_k / k!
            coef = (coef * (s0 + (k - 1))) * (neg_delta / k)
            acc = acc + coef * row[k]

    # truncated Taylor terms, bounded via exact rational arithmetic
    s_mag_sq = Fraction(1, 4) + Fraction(lat.t) ** 2
    s_mag_hi = fraction_sqrt_upper(s_mag_sq)
    radius = Fraction(r, lat.D) + (lat.M + 1)
    tail = taylor_tail_bound(s_mag_hi, abs(delta_fr), radius, lat.Ncols + 1)
    if tail:
        acc = acc.pad(RealInterval.from_fraction(tail, tier))

    # restore the removed head at the exact argument a/q
    neg_s = -s0
    aq = Fraction(a, q)
    for n in range(lat.M + 1):
        acc = acc + _cpow(RealInterval.from_fraction(aq + n, tier), neg_s)
    return acc


def fraction_sqrt_upper(x: Fraction) -> Fraction:
    """A rational upper bound on sqrt(x) for x >= 0."""
    if x < 0:
        raise DomainError("sqrt of a negative rational")
    if x == 0:
        return Fraction(0)
    # scale to a large integer, take isqrt, round up
    scale = 2**64
    n = x.numerator * scale * scale
    d = x.denominator
    root = math.isqrt(n // d) + 1
    return Fraction(root, scale)
