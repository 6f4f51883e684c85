"""Large-modulus samples of the completed function via lattice + group DFT.

At one ordinate t the values L_chi(1/2+it) for every character mod q are
character sums over Hurwitz values:

    L_chi(1/2+it) = q^(-s) sum_{a mod q, gcd(a,q)=1} chi(a) zeta(s, a/q).

The Hurwitz values come off the precomputed lattice by Taylor shift, the
character sums are one group DFT, and the q^(-s) scaling is a single
interval power; all phi(q) L-values for the modulus drop out of one pass.
Completion multiplies in the archimedean factor and the unimodular
constant, then projects the provably real result onto the real axis.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .characters import CharMeta, char_group
from .dft import group_dft_cvec, units_of
from .errors import DomainError, RealnessViolation
from .hurwitz import (
    DEFAULT_D,
    DEFAULT_M,
    DEFAULT_NCOLS,
    HurwitzLattice,
    build_lattice,
    fraction_sqrt_upper,
    nearest_row,
    taylor_tail_bound,
)
from .interval import (
    HARDWARE,
    ComplexBox,
    RealInterval,
    bigfloat,
    log_gamma,
    pi_interval,
)
from .ivec import CVec, IVec

DEFAULT_STEP = Fraction(5, 64)

# Lattices store hardware boxes, so ~1e-19 absolute build accuracy already
# saturates the stored width; higher build tiers only slow the build down.
SAMPLER_BUILD_BITS = 64


@dataclass
class SampleGrid:
    """Consecutive samples of the completed function on a dyadic grid.

    samples[i] encloses the completed value at (n_start + i) * t_step;
    each is the realness projection of an assembled complex box, so the
    enclosure is rigorous even though only the real part is kept.
    """

    q: int
    character: tuple[int, ...]
    t_step: Fraction
    n_start: int
    samples: list[RealInterval]
    meta: CharMeta

    def __post_init__(self):
        if self.t_step <= 0:
            raise DomainError("t_step must be positive")

    def __len__(self) -> int:
        return len(self.samples)

    def t_at(self, i: int) -> Fraction:
        """Exact ordinate of samples[i]."""
        return self.t_step * (self.n_start + i)

    def t_float(self, i: int) -> float:
        return float(self.t_at(i))


def _grid_span(t_lo, t_hi, t_step) -> tuple[int, int]:
    """First and last multiple of t_step inside [t_lo, t_hi], as indices."""
    step = Fraction(t_step)
    if step <= 0:
        raise DomainError("t_step must be positive")
    lo = Fraction(t_lo)
    hi = Fraction(t_hi)
    if hi < lo:
        raise DomainError("empty ordinate range")
    n0 = -int(-lo // step)
    n1 = int(hi // step)
    if n1 < n0:
        raise DomainError("no grid ordinate inside the range")
    return n0, n1


def grid_count(t_lo, t_hi, t_step) -> int:
    """Number of step-multiples inside [t_lo, t_hi].

    When t_lo sits on the grid this equals floor((t_hi - t_lo)/t_step) + 1.
    """
    n0, n1 = _grid_span(t_lo, t_hi, t_step)
    return n1 - n0 + 1


# ---------------------------------------------------------------------------
# batched Hurwitz values over the unit residues


def _lattice_arrays(lat: HurwitzLattice):
    """Endpoint arrays of all lattice cells, cached on the lattice."""
    arrs = getattr(lat, "_endpoint_arrays", None)
    if arrs is None:
        ncol = lat.Ncols + 1
        shape = (lat.D, ncol)
        re_lo = np.empty(shape)
        re_hi = np.empty(shape)
        im_lo = np.empty(shape)
        im_hi = np.empty(shape)
        for i, row in enumerate(lat.rows):
            for k, cell in enumerate(row):
                re_lo[i, k] = cell.re.lo
                re_hi[i, k] = cell.re.hi
                im_lo[i, k] = cell.im.lo
                im_hi[i, k] = cell.im.hi
        arrs = (re_lo, re_hi, im_lo, im_hi)
        lat._endpoint_arrays = arrs
    return arrs


def unit_hurwitz(lat: HurwitzLattice, q: int, units: np.ndarray) -> CVec:
    """zeta(1/2 + i lat.t, a/q) for every a in units, batched.

    Same Taylor shift and head restoration as the scalar lattice query,
    run across all units at once; the per-unit rational tail bound is
    replaced by its maximum over the batch (monotone in |delta| and in
    the reciprocal of the row radius, so the extremes bound everybody).
    """
    D = lat.D
    units = np.asarray(units, dtype=np.int64)
    rows = np.clip((2 * units * D + q) // (2 * q), 1, D)

    d_max = Fraction(0)
    deltas = []
    for a, r in zip(units, rows):
        d = Fraction(int(a), q) - Fraction(int(r), D)
        deltas.append(RealInterval.from_fraction(-d, HARDWARE))
        if abs(d) > d_max:
            d_max = abs(d)
    neg_delta = IVec.from_intervals(deltas)

    re_lo, re_hi, im_lo, im_hi = _lattice_arrays(lat)
    sel = rows - 1
    cells = CVec(
        IVec(re_lo[sel], re_hi[sel], _checked=True),
        IVec(im_lo[sel], im_hi[sel], _checked=True),
    )

    def col(k: int) -> CVec:
        return cells[(slice(None), k)]

    s0 = lat.s_at(0)
    acc = col(0)
    if d_max:
        coef = CVec.full(neg_delta.shape, ComplexBox.one(HARDWARE))
        for k in range(1, lat.Ncols + 1):
            coef = (coef * (s0 + (k - 1))) * (neg_delta / k)
            acc = acc + coef * col(k)
        s_mag_hi = fraction_sqrt_upper(Fraction(1, 4) + Fraction(lat.t) ** 2)
        radius = Fraction(int(rows.min()), D) + (lat.M + 1)
        tail = taylor_tail_bound(s_mag_hi, d_max, radius, lat.Ncols + 1)
        if tail:
            acc = acc.pad(RealInterval.from_fraction(tail, HARDWARE).hi_float())

    # restore the removed head sum_{n<=M} (n + a/q)^(-s) at the exact argument
    neg_re = -s0.re
    neg_im = -s0.im
    for n in range(lat.M + 1):
        base = IVec.from_points((units + n * q).astype(np.float64)) / q
        lg = base.log()
        acc = acc + CVec(lg * neg_re, lg * neg_im).exp()
    return acc


def q_pow(q: int, t: float, bits: int = 96) -> ComplexBox:
    """q^(-s) at s = 1/2 + it: exp(-s log q) at big-float tier, narrowed."""
    tier = bigfloat(bits)
    lq = RealInterval.point(q, tier).log()
    z = ComplexBox(
        lq * RealInterval.from_fraction(Fraction(-1, 2), tier),
        lq * RealInterval.point(-t, tier),
    )
    return z.exp().widen_to(HARDWARE)


def l_values_at(q: int, lat: HurwitzLattice) -> dict[tuple[int, ...], ComplexBox]:
    """L_chi(1/2 + i lat.t) for every character mod q, in one transform.

    The imprimitive characters come out of the same DFT at no extra cost;
    they are returned too, though only primitive ones get certified.
    """
    if q < 3:
        raise DomainError("need q >= 3")
    group = char_group(q)
    units = units_of(group)
    zvals = unit_hurwitz(lat, q, units)
    sums = group_dft_cvec(group, zvals).reshape(group.phi)
    scale = q_pow(q, lat.t)
    out = {}
    for pos, idx in enumerate(np.ndindex(*group.orders)):
        out[tuple(int(v) for v in idx)] = sums[pos] * scale
    return out


# ---------------------------------------------------------------------------
# completion


def lambda_box(l: ComplexBox, t: float, meta: CharMeta, q: int) -> ComplexBox:
    """Pre-projection completed box:

        epsilon * (q/pi)^(it/2) Gamma((1/2 + a + it)/2) exp(pi|t|/4) * L.

    Assembled in log space: Re log Gamma decays like -pi|t|/4, so adding
    pi|t|/4 before exponentiating keeps magnitudes near 1 and avoids
    overflow at any desk-scale height.  |t| rather than t keeps the
    factor even, so the completed function of a real character is even.
    """
    a = meta.parity
    z = ComplexBox(
        RealInterval.from_fraction(Fraction(2 * a + 1, 4), HARDWARE),
        RealInterval.point(t / 2, HARDWARE),
    )
    lg = log_gamma(z)
    pi = pi_interval(HARDWARE)
    log_q_pi = (RealInterval.point(q, HARDWARE) / pi).log()
    arg = ComplexBox(
        lg.re + pi * RealInterval.point(abs(t) / 4, HARDWARE),
        lg.im + RealInterval.point(t / 2, HARDWARE) * log_q_pi,
    )
    return (meta.epsilon * arg.exp()) * l


def lambda_from_l(l: ComplexBox, t: float, meta: CharMeta, q: int) -> RealInterval:
    """Real enclosure of the completed value at ordinate t.

    The assembled box must straddle the real axis; its real part widened
    by the imaginary radius then encloses the true (real) value.
    """
    lam = lambda_box(l, t, meta, q)
    if not lam.im.contains_zero():
        raise RealnessViolation(
            f"imaginary part {lam.im!r} misses 0 at t={t} for modulus {q}"
        )
    return lam.re.pad(lam.im.mag())


# ---------------------------------------------------------------------------
# grids


def default_lattice_size(q: int) -> int:
    """Row count policy: keep |delta| <= 1/(8q) until the standard cap.

    With D >= 4q the shift never exceeds 1/(8q), so Taylor terms decay by
    a factor >= 8 each and the default column count is ample; above the
    cap the shared full-size lattice serves every modulus.
    """
    size = 64
    while size < 4 * q and size < DEFAULT_D:
        size *= 2
    return size


@lru_cache(maxsize=8)
def _shared_lattice(
    t: float, size: int, ncols: int, m: int, bits: int, cache_dir
) -> HurwitzLattice:
    return build_lattice(
        t, D=size, Ncols=ncols, M=m, tier=bigfloat(bits), cache_dir=cache_dir
    )


def sample_range(
    q: int,
    char,
    t_lo,
    t_hi,
    t_step: Fraction = DEFAULT_STEP,
    *,
    size: int | None = None,
    build_bits: int = SAMPLER_BUILD_BITS,
    cache_dir=None,
) -> SampleGrid:
    """Grid of completed-value enclosures for one character.

    Ordinates are the multiples of t_step inside [t_lo, t_hi]; each must
    be an exact binary rational so the lattice is keyed by the exact
    ordinate.  Lattices are cached in memory and on disk, so every
    modulus sampled at the same ordinate reuses the same one.
    """
    step = Fraction(t_step)
    n_start, n_end = _grid_span(t_lo, t_hi, step)
    count = n_end - n_start + 1

    group = char_group(q)
    char = tuple(int(v) for v in char)
    meta = group.char_meta(char)
    size = default_lattice_size(q) if size is None else size

    samples = []
    for n in range(n_start, n_start + count):
        t_fr = step * n
        t = float(t_fr)
        if Fraction(t) != t_fr:
            raise DomainError("grid ordinates must be binary rationals")
        lat = _shared_lattice(t, size, DEFAULT_NCOLS, DEFAULT_M, build_bits, cache_dir)
        samples.append(lambda_from_l(l_values_at(q, lat)[char], t, meta, q))
    return SampleGrid(q, char, step, n_start, samples, meta)
