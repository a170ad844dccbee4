"""Closed-form equiripple fractions on a symmetric pair of bands.

Stack n period rectangles on top of each other.  The conformal maps of the
single and of the n-fold rectangle onto the upper half plane are tied by
one rational function Z of degree n, Z(x_nfold(u)) = x_single(u), and that
function solves the two-band equiripple problem outright: it is odd, maps
E = [-1/k_b, -1] union [1, 1/k_b] onto the value windows +-[1, 1/k] with
n + 1 extremal touches per band, and all of its structure is explicit.
Zeros and poles sit on the imaginary axis at heights given by Jacobi sc
values, the critical points are the images of the horizontal edge
intersections, and the attained deviations are elliptic expressions in n
and the modulus alone.

Two moduli appear and the convention is fixed here once.  build_zolotarev
takes the modulus k of the single rectangle, which controls the value
levels 1 and 1/k.  The bands come out as +-[1, 1/k_b] with the smaller
modulus k_b of the n-fold rectangle.  deviation and zolotarev_for_bands
take k_b instead, the number a caller with a fixed band geometry knows.

The rational form is expanded from the zero and pole lists plus the single
normalization Z(1) = 1; nothing is interpolated or solved for.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from mpmath import mp, mpc, mpf

from .bands import Band, BandSystem, RangeSystem, PASS, STOP, _angle_distance, cross_ratio_points, phi_of
from .elliptic import (
    DEFAULT_PRECISION,
    EllipticModulus,
    Precision,
    _round,
    complete_elliptic,
    jacobi_sn_cn_dn,
)
from .errors import DomainError, PoleSignal
from .rational import Mobius, RationalFunction, polymul, polyscale, polyval


@dataclass(frozen=True)
class ZolotarevFraction:
    """Degree-n extremal fraction in its normalized frame.

    zeros and poles hold signed heights: an entry h stands for the point
    i h of the imaginary axis, h = 0 for the origin and h = inf for the
    point at infinity.  Exactly one of the two lists contains inf (which
    one depends on the parity of n), and the merged heights alternate
    strictly between the kinds along the imaginary circle.  scale is the
    positive constant applied to the monic product of zero factors so that
    Z(1) = 1, the common image of the rectangle corner under both
    parametric maps.  modulus belongs to the single rectangle and sets the
    value levels; band_modulus to the n-fold one, so the bands are
    +-[1, 1/band_modulus.k].
    """

    n: int
    modulus: EllipticModulus
    band_modulus: EllipticModulus
    zeros: tuple
    poles: tuple
    scale: mpf
    func: RationalFunction = field(repr=False)

    def __post_init__(self):
        if not isinstance(self.n, int) or self.n < 1:
            raise DomainError(f"degree must be a positive integer, got {self.n!r}")
        if len(self.zeros) != self.n or len(self.poles) != self.n:
            raise DomainError("zero and pole height lists must each have length n")
        if not (self.scale > 0 and mp.isfinite(self.scale)):
            raise DomainError("normalization scale must be positive and finite")

    def critical_points(self, prec: Precision = DEFAULT_PRECISION):
        """The 2n-2 finite critical points, ascending.

        Computed as images of the interior edge intersections u = +-1 +
        l tau of the stacked rectangles, not as roots of the derivative;
        the covering structure gives their exact locations.
        """
        with prec.work():
            xs = _edge_images(self.n, self.band_modulus, Precision(mp.prec))[1:-1]
            out = sorted([-x for x in xs] + xs)
            return [_round(x, prec) for x in out]

    def alternation_points(self, prec: Precision = DEFAULT_PRECISION):
        """All 2n+2 extremal touches as (point, level) pairs, ascending.

        Band endpoints included.  Levels alternate between +-1 and
        +-1/modulus.k along each band and are not yet renormalized to any
        value frame.
        """
        with prec.work():
            xs = _edge_images(self.n, self.band_modulus, Precision(mp.prec))
            high = 1 / self.modulus.k
            plus = [(x, mpf(1) if l % 2 == 0 else high) for l, x in enumerate(xs)]
            pairs = [(-x, -v) for x, v in reversed(plus)] + plus
            return [(_round(x, prec), _round(v, prec)) for x, v in pairs]

    def band_system(self, prec: Precision = DEFAULT_PRECISION) -> BandSystem:
        """The normalized bands, E- as a stopband and E+ as a passband."""
        with prec.work():
            edge = _round(1 / self.band_modulus.k, prec)
        return BandSystem([Band(-edge, -1, STOP), Band(1, edge, PASS)])

    def range_system(self, prec: Precision = DEFAULT_PRECISION) -> RangeSystem:
        """The value windows the normalized fraction oscillates in."""
        with prec.work():
            edge = _round(1 / self.modulus.k, prec)
        return RangeSystem(-edge, -1, 1, edge)

    def sign_approximant(self, prec: Precision = DEFAULT_PRECISION) -> RationalFunction:
        """The rescaled copy approximating sign on E.

        2k/(1+k) Z stays within mu of -1 on E- and of +1 on E+, with
        equality at the alternation points; k is the value modulus.
        """
        with prec.work():
            c = 2 * self.modulus.k / (1 + self.modulus.k)
            num = tuple(_round(x * c, prec) for x in self.func.num)
            nodes = None
            if self.func.support_nodes:
                nodes = [
                    (x, _round(v * c, prec), w) for x, v, w in self.func.support_nodes
                ]
        return RationalFunction(num, self.func.den, support_nodes=nodes)


@dataclass(frozen=True)
class TwoBandDeviation:
    """The pair of equiripple levels for the symmetric two-band geometry.

    theta is the bounded-modulus level shared by the first three value
    frames, mu the sign-approximation error of the fourth; the two are
    tied by 1/mu = (theta + 1/theta)/2, which the constructor enforces.
    """

    theta: mpf
    mu: mpf

    def __post_init__(self):
        for name in ("theta", "mu"):
            v = getattr(self, name)
            object.__setattr__(self, name, v if isinstance(v, mpf) else mpf(v))
        if not (0 < self.theta <= 1) or not (0 < self.mu <= 1):
            raise DomainError("deviation levels must lie in (0, 1]")
        with mp.workprec(96):
            gap = 1 / self.mu - (self.theta + 1 / self.theta) / 2
            if abs(gap) * self.mu > mpf(2) ** -40:
                raise DomainError(
                    "theta and mu do not satisfy the two-band deviation relation"
                )


def _edge_images(n, band_modulus: EllipticModulus, prec: Precision):
    """1/dn(l K'/n | k') for l = 0..n: the x-plane images of the points
    where the right band edge of the n-fold rectangle crosses the stacked
    horizontal lines.  Increasing, from the inner band endpoint 1 to the
    outer 1/k."""
    periods = complete_elliptic(band_modulus.k, prec)
    out = []
    for l in range(n + 1):
        _, _, d = jacobi_sn_cn_dn(periods.K_prime * l / n, band_modulus.k_complement, prec)
        out.append(1 / d)
    return out


def build_zolotarev(n: int, k, prec: Precision = DEFAULT_PRECISION) -> ZolotarevFraction:
    """Construct the degree-n fraction with value modulus k.

    Zeros occupy the even-index lattice heights of the n-fold rectangle
    and poles the odd ones; each interior height enters with both signs,
    keeping the coefficients real, and the exceptional indices contribute
    the origin and the point at infinity.  The one free scale is pinned by
    Z(1) = 1.
    """
    if not isinstance(n, int) or n < 1:
        raise DomainError(f"degree must be a positive integer, got {n!r}")
    modulus = EllipticModulus.from_k(k, prec)
    band = modulus.scaled(n, prec)
    with prec.work():
        inner = Precision(mp.prec)
        periods = complete_elliptic(band.k, inner)
        num, den = (mpf(0), mpf(1)), (mpf(1),)
        zeros, poles = [mpf(0)], []
        for l in range(1, n):
            s, c, _ = jacobi_sn_cn_dn(periods.K_prime * l / n, band.k_complement, inner)
            t = s / c
            quad = (t * t, mpf(0), mpf(1))  # (x - it)(x + it)
            if l % 2 == 0:
                num = polymul(num, quad)
                zeros.extend((-t, t))
            else:
                den = polymul(den, quad)
                poles.extend((-t, t))
        (zeros if n % 2 == 0 else poles).append(mp.inf)
        scale = polyval(den, mpf(1)) / polyval(num, mpf(1))
        num = polyscale(num, scale)

        xs = _edge_images(n, band, inner)
        high = 1 / modulus.k
        nodes = []
        for l, x in enumerate(xs):
            v = mpf(1) if l % 2 == 0 else high
            nodes.append((_round(-x, prec), _round(-v, prec), -l))
            nodes.append((_round(x, prec), _round(v, prec), l))
        func = RationalFunction(
            tuple(_round(c, prec) for c in num),
            tuple(_round(c, prec) for c in den),
            support_nodes=nodes,
        )
        return ZolotarevFraction(
            n=n,
            modulus=modulus,
            band_modulus=band,
            zeros=tuple(_round(h, prec) for h in sorted(zeros)),
            poles=tuple(_round(h, prec) for h in sorted(poles)),
            scale=_round(scale, prec),
            func=func,
        )


def zolotarev_for_bands(n: int, k, prec: Precision = DEFAULT_PRECISION) -> ZolotarevFraction:
    """Construct the degree-n fraction whose bands are +-[1, 1/k].

    The band modulus k is what a caller with fixed segments knows; the
    value modulus it implies is the one whose period ratio is n times
    smaller.
    """
    if not isinstance(n, int) or n < 1:
        raise DomainError(f"degree must be a positive integer, got {n!r}")
    band = EllipticModulus.from_k(k, prec)
    with prec.work():
        value = EllipticModulus.from_tau(mpc(0, band.tau.imag / n), prec)
    return build_zolotarev(n, value.k, prec)


def eval_parametric(zf: ZolotarevFraction, u, prec: Precision = DEFAULT_PRECISION):
    """The parametric value x_single(u) for u in the n-fold rectangle.

    Composing with the n-fold rectangle map recovers the rational form:
    Z(x_nfold(u)) equals this value wherever both sides are finite.  Points
    outside the closed rectangle {|Re u| <= 1, 0 <= Im u <= n |tau|} raise
    DomainError.  At the odd lattice heights u = l tau the value has a
    pole, reported as a PoleSignal whose ``where`` field carries the
    signed height of the matching pole of the rational form (inf for
    l = n).
    """
    with prec.work():
        inner = Precision(mp.prec)
        uu = mpc(u)
        height = zf.band_modulus.tau.imag
        tol = mpf(2) ** (-(prec.bits // 2))
        if abs(uu.real) > 1 + tol or uu.imag < -tol or uu.imag > height + tol:
            raise DomainError(
                f"u = {u!r} lies outside the n-fold rectangle of height {height}"
            )
        periods = complete_elliptic(zf.modulus.k, inner)
        arg = periods.K * uu
        # The single-rectangle map is periodic with period 2iK'; fold the
        # tall rectangle down before evaluating.
        two_kp = 2 * periods.K_prime
        arg = mpc(arg.real, arg.imag - two_kp * mp.floor(arg.imag / two_kp))
        on_edge = (
            abs(abs(uu.real) - 1) <= tol
            or abs(uu.imag) <= tol
            or abs(uu.imag - height) <= tol
        )
        try:
            if arg.imag == 0:
                sn, _, _ = jacobi_sn_cn_dn(mpf(arg.real), zf.modulus.k, inner)
            else:
                sn, _, _ = jacobi_sn_cn_dn(arg, zf.modulus.k, inner)
        except PoleSignal as sig:
            l = int(mp.nint(uu.imag / zf.modulus.tau.imag))
            if l >= zf.n:
                h = mp.inf
            else:
                per_n = complete_elliptic(zf.band_modulus.k, inner)
                s, c, _ = jacobi_sn_cn_dn(
                    per_n.K_prime * l / zf.n, zf.band_modulus.k_complement, inner
                )
                h = _round(s / c, prec)
            raise PoleSignal(
                f"parametric pole at u = {l} tau; the rational form has its"
                f" matching pole at height {h}",
                where=h,
            ) from sig
        value = mpc(sn)
        if on_edge:
            return _round(mpf(value.real), prec)
        return _round(value, prec)


def deviation(n: int, k, prec: Precision = DEFAULT_PRECISION) -> TwoBandDeviation:
    """Closed-form equiripple levels for degree n on the bands +-[1, 1/k].

    k is the band modulus.  theta comes from the value modulus k_v of the
    single rectangle as (1 - sqrt(k_v))/(1 + sqrt(k_v)) and mu as
    (1 - k_v)/(1 + k_v); the relation 1/mu = (theta + 1/theta)/2 is then
    an algebraic identity.  Strictly decreasing in n for fixed k.
    """
    if not isinstance(n, int) or n < 1:
        raise DomainError(f"degree must be a positive integer, got {n!r}")
    band = EllipticModulus.from_k(k, prec)
    with prec.work():
        value = EllipticModulus.from_tau(mpc(0, band.tau.imag / n), Precision(mp.prec))
        root = mp.sqrt(value.k)
        theta = _round((1 - root) / (1 + root), prec)
        mu = _round((1 - value.k) / (1 + value.k), prec)
    return TwoBandDeviation(theta, mu)


def _as_band(segment, kind: str) -> Band:
    if isinstance(segment, Band):
        return Band(segment.lo, segment.hi, kind)
    lo, hi = segment
    return Band(lo, hi, kind)


def _correspondence(minus: Band, plus: Band, band_k, tol) -> Mobius:
    """The projective change of variable onto the normalized bands.

    Carries the target minus segment onto [-1/k, -1] and the plus segment
    onto [1, 1/k].  The normalized geometry is symmetric under
    x -> 1/(k x), so an orientation-preserving and a reversing
    correspondence can verify at the same time; preferring the affine one
    and then the preserving one makes symmetric targets deterministic.
    """
    edge = 1 / band_k
    src = (minus.lo, minus.hi, plus.lo)
    last = plus.hi
    candidates = []
    for dst, dst_last in (((-edge, -1, 1), edge), ((-1, -edge, edge), mpf(1))):
        m = Mobius.from_triples(src, dst)
        if _angle_distance(phi_of(m(last)), phi_of(mpf(dst_last))) <= tol:
            candidates.append(m)
    if not candidates:
        raise DomainError("segment endpoints do not match the normalized band geometry")
    for m in candidates:
        if abs(m.c) <= tol:  # entries are rescaled to max 1, so this means affine
            return m
    for m in candidates:
        if m.preserves_orientation:
            return m
    return candidates[0]


def adapt_to_segments(
    zf: ZolotarevFraction, eplus, eminus, prec: Precision = DEFAULT_PRECISION
) -> RationalFunction:
    """Transplant the fraction onto two arbitrary disjoint closed segments.

    eplus receives the values near +1 and eminus those near -1 (in the
    sign frame).  Segments may be given as (lo, hi) pairs or Band objects;
    arcs through infinity are allowed.  When the four target endpoints
    share the normalized cross-ratio, a single projective change of
    variable is composed in and the equioscillation levels are untouched;
    otherwise the fraction is first rebuilt at the modulus the target
    geometry dictates, so the levels are the ones of that modulus instead.
    Overlapping or touching segments raise DomainError.
    """
    plus = _as_band(eplus, PASS)
    minus = _as_band(eminus, STOP)
    try:
        BandSystem([minus, plus])
    except DomainError:
        try:
            BandSystem([plus, minus])
        except DomainError:
            raise DomainError("target segments overlap or touch") from None
    with prec.work():
        tol = mpf(2) ** (-(prec.bits // 2))
        kappa_target = cross_ratio_points(minus.lo, minus.hi, plus.lo, plus.hi)
        band_k = zf.band_modulus.k
        if abs(kappa_target - ((1 + band_k) / (1 - band_k)) ** 2) > tol * kappa_target:
            root = mp.sqrt(kappa_target)
            zf = zolotarev_for_bands(zf.n, _round((root - 1) / (root + 1), prec), prec)
            band_k = zf.band_modulus.k
        f = _correspondence(minus, plus, band_k, tol)
        adapted = zf.func.compose_mobius(f)
        nodes = None
        if zf.func.support_nodes:
            back = f.inverse()
            nodes = []
            for x, v, w in zf.func.support_nodes:
                y = back(x)
                if not mp.isinf(y):
                    nodes.append((_round(y, prec), v, w))
        return RationalFunction(
            tuple(_round(c, prec) for c in adapted.num),
            tuple(_round(c, prec) for c in adapted.den),
            support_nodes=nodes,
        )
