"""Band geometry on the real projective circle.

The working set E is a union of closed disjoint arcs ("bands") of the circle
R union {inf}; the admissible value windows F form a second pair of arcs on
the value circle.  This module owns that geometry: the half-angle chart that
makes infinity an ordinary point, band systems and their gaps, range systems
and their cross-ratio, the topological sign classes with their parity
constraint, and the conversions between the four classical problem frames.

Chart convention: a point x corresponds to the angle phi = 2 atan(x) in
(-pi, pi], with infinity at phi = pi.  Arcs are traversed counterclockwise
(increasing phi).  Tolerances quoted for containment tests are measured in
the phi chart.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product as _bit_product

from mpmath import mp, mpf

from .elliptic import DEFAULT_PRECISION, Precision
from .errors import AmbiguityError, DomainError
from .rational import (
    Mobius,
    RationalFunction,
    cluster_points,
    poly_reverse,
    polyroots,
    polyval,
)

PASS = "pass"
STOP = "stop"

# Floor for internal geometric comparisons (endpoint ordering, containment),
# so that band validation does not silently depend on the ambient context.
_GEOMETRY_BITS = 192


def as_extended(x):
    """Normalize a point of R union {inf}; both signed infinities collapse
    to the single projective infinity."""
    if isinstance(x, str) and x.strip().lower() in ("inf", "+inf", "-inf"):
        return mp.inf
    v = x if isinstance(x, mpf) else mpf(x)
    if mp.isnan(v):
        raise DomainError("nan is not a point of the projective line")
    return mp.inf if mp.isinf(v) else v


def is_infinite(x) -> bool:
    return mp.isinf(x)


def phi_of(x):
    """Chart angle 2 atan(x) in (-pi, pi], with phi(inf) = pi."""
    if mp.isinf(x):
        return +mp.pi
    return 2 * mp.atan(x)


def x_of(phi):
    """Inverse chart; any representative of phi mod 2 pi is accepted."""
    half = phi / 2
    c = mp.cos(half)
    if c == 0:
        return mp.inf
    return mp.sin(half) / c


def _ccw_span(phi_a, phi_b):
    """Length of the ccw arc from phi_a to phi_b, in (0, 2 pi]."""
    span = mp.fmod(phi_b - phi_a, 2 * mp.pi)
    if span <= 0:
        span += 2 * mp.pi
    return span


def chart_rotation(phi_to_infinity) -> Mobius:
    """The rotation of the circle taking the point at angle phi to infinity.

    Orientation-preserving; used to move all relevant endpoints to finite
    coordinates before any computation that dislikes infinity.
    """
    with mp.workprec(max(mp.prec, _GEOMETRY_BITS)):
        half = (mp.pi - mpf(phi_to_infinity)) / 2
        c, s = mp.cos(half), mp.sin(half)
    return Mobius(c, s, -s, c)


@dataclass(frozen=True)
class Band:
    """Closed arc from lo to hi (counterclockwise) tagged pass or stop.

    For an ordinary finite segment lo < hi; an arc through infinity has its
    endpoints "out of order" or infinite.  The arc must be proper: endpoints
    distinct and span strictly less than the full circle.
    """

    lo: object
    hi: object
    kind: str

    def __post_init__(self):
        object.__setattr__(self, "lo", as_extended(self.lo))
        object.__setattr__(self, "hi", as_extended(self.hi))
        if self.kind not in (PASS, STOP):
            raise DomainError(f"band kind must be '{PASS}' or '{STOP}', got {self.kind!r}")
        if self.lo == self.hi:
            raise DomainError("band endpoints must be distinct")

    @property
    def sign(self) -> int:
        return 1 if self.kind == PASS else -1

    @property
    def finite(self) -> bool:
        if mp.isinf(self.lo) or mp.isinf(self.hi):
            return False
        return self.lo < self.hi

    def phi_interval(self, prec: Precision = DEFAULT_PRECISION):
        """(phi_lo, phi_hi) with phi_lo < phi_hi <= phi_lo + 2 pi."""
        with prec.work():
            a = phi_of(self.lo)
            return a, a + _ccw_span(a, phi_of(self.hi))

    def midpoint(self, prec: Precision = DEFAULT_PRECISION):
        with prec.work():
            a, b = self.phi_interval(prec)
            return x_of((a + b) / 2)

    def contains(self, x, tol=0, prec: Precision = DEFAULT_PRECISION) -> bool:
        with prec.work():
            a, b = self.phi_interval(prec)
            p = phi_of(as_extended(x))
            for shift in (0, 2 * mp.pi, -2 * mp.pi):
                if a - tol <= p + shift <= b + tol:
                    return True
            return False

    def chebyshev_grid(self, count: int, prec: Precision = DEFAULT_PRECISION):
        """count Chebyshev-Lobatto nodes on a finite band, endpoints included."""
        if not self.finite:
            raise DomainError("grids are only defined on finite bands; rotate the chart first")
        if count < 2:
            raise DomainError("need at least the two endpoints")
        with prec.work():
            mid = (self.lo + self.hi) / 2
            half = (self.hi - self.lo) / 2
            return [mid - half * mp.cos(mp.pi * i / (count - 1)) for i in range(count)]


class BandSystem:
    """m >= 2 pairwise disjoint bands in counterclockwise cyclic order.

    Both kinds must occur.  The listed order fixes the gap indexing: gap j
    separates band j from band j+1 (mod m); the gap between the last and
    first band is the wrap gap, whose sign bit is the one implied by parity.
    """

    def __init__(self, bands):
        bands = tuple(bands)
        if len(bands) < 2:
            raise DomainError("a band system needs at least two bands")
        kinds = {b.kind for b in bands}
        if kinds != {PASS, STOP}:
            raise DomainError("a band system needs at least one band of each kind")
        with mp.workprec(_GEOMETRY_BITS):
            base, _ = bands[0].phi_interval(Precision(_GEOMETRY_BITS - 32))
            cursor = mpf(0)
            for i, band in enumerate(bands):
                a, b = band.phi_interval(Precision(_GEOMETRY_BITS - 32))
                start = _ccw_span(base, a) if i else mpf(0)
                end = start + (b - a)
                if i and start <= cursor:
                    raise DomainError(
                        f"bands {i - 1} and {i} overlap or touch; bands must be "
                        "disjoint and listed in counterclockwise order"
                    )
                if end >= 2 * mp.pi:
                    raise DomainError(f"band {i} wraps past the starting band")
                cursor = end
        self.bands = bands

    @property
    def m(self) -> int:
        return len(self.bands)

    def __iter__(self):
        return iter(self.bands)

    def __repr__(self):
        inner = ", ".join(f"{b.kind}[{b.lo}, {b.hi}]" for b in self.bands)
        return f"BandSystem({inner})"

    def band_of(self, x, tol=0, prec: Precision = DEFAULT_PRECISION):
        for i, band in enumerate(self.bands):
            if band.contains(x, tol=tol, prec=prec):
                return i
        return None

    def indicator(self, x, prec: Precision = DEFAULT_PRECISION):
        """+1 on passbands, -1 on stopbands, None in the gaps."""
        i = self.band_of(x, prec=prec)
        return None if i is None else self.bands[i].sign

    def gap_interval(self, j: int, prec: Precision = DEFAULT_PRECISION):
        """(phi_start, phi_end) of gap j, from band j's hi to band j+1's lo."""
        with prec.work():
            _, b = self.bands[j].phi_interval(prec)
            a2, _ = self.bands[(j + 1) % self.m].phi_interval(prec)
            return b, b + _ccw_span(b, a2)

    def gap_midpoint(self, j: int, prec: Precision = DEFAULT_PRECISION):
        with prec.work():
            a, b = self.gap_interval(j, prec)
            return x_of((a + b) / 2)

    def largest_gap(self, prec: Precision = DEFAULT_PRECISION):
        """(index, midpoint angle, width) of the widest gap; ties break low."""
        with prec.work():
            best = None
            for j in range(self.m):
                a, b = self.gap_interval(j, prec)
                if best is None or b - a > best[2]:
                    best = (j, (a + b) / 2, b - a)
            return best

    def all_finite(self) -> bool:
        return all(b.finite for b in self.bands)


def indicator(x, system: BandSystem, prec: Precision = DEFAULT_PRECISION):
    return system.indicator(x, prec=prec)


# ---------------------------------------------------------------------------
# Range systems on the value circle and the cross-ratio.
# ---------------------------------------------------------------------------


def cross_ratio_points(e1, e2, e3, e4):
    """Cross-ratio ((e1-e3)(e4-e2)) / ((e1-e2)(e4-e3)) on the projective
    line, with exact limit handling when one point is infinite.

    The argument order is the endpoint order of a range system: lower and
    upper end of F-, then lower and upper end of F+.
    """
    pts = [as_extended(e) for e in (e1, e2, e3, e4)]
    for i in range(4):
        for j in range(i + 1, 4):
            if pts[i] == pts[j]:
                raise DomainError("cross-ratio requires four distinct points")
    if sum(mp.isinf(p) for p in pts) > 1:
        raise DomainError("at most one of the four points may be infinite")
    a, b, c, d = pts
    if mp.isinf(a):
        return (d - b) / (d - c)
    if mp.isinf(b):
        return (a - c) / (d - c)
    if mp.isinf(c):
        return (d - b) / (a - b)
    if mp.isinf(d):
        return (a - c) / (a - b)
    return ((a - c) * (d - b)) / ((a - b) * (d - c))


@dataclass(frozen=True)
class RangeSystem:
    """The pair of admissible value windows F- and F+.

    Four endpoints, cyclically ordered on the value circle as: lower end of
    F-, upper end of F-, lower end of F+, upper end of F+ (each window
    traversed counterclockwise).  Coincident endpoints are rejected and the
    cross-ratio of the four, in this order, exceeds 1.
    """

    minus_lo: object
    minus_hi: object
    plus_lo: object
    plus_hi: object

    def __post_init__(self):
        vals = [as_extended(v) for v in
                (self.minus_lo, self.minus_hi, self.plus_lo, self.plus_hi)]
        for name, v in zip(("minus_lo", "minus_hi", "plus_lo", "plus_hi"), vals):
            object.__setattr__(self, name, v)
        with mp.workprec(_GEOMETRY_BITS):
            phis = [phi_of(v) for v in vals]
            total = mpf(0)
            for i in range(4):
                span = _ccw_span(phis[i], phis[(i + 1) % 4])
                total += span
            # Going around e1 -> e2 -> e3 -> e4 -> e1 ccw must close up after
            # exactly one revolution, which is the cyclic-order condition.
            if abs(total - 2 * mp.pi) > mpf(2) ** -(_GEOMETRY_BITS // 2):
                raise DomainError(
                    "range endpoints are not in the cyclic order "
                    "minus_lo, minus_hi, plus_lo, plus_hi"
                )
            kappa = cross_ratio_points(*vals)
            if not kappa > 1:
                raise DomainError(f"cross-ratio must exceed 1, got {kappa}")

    @classmethod
    def from_theta(cls, theta) -> "RangeSystem":
        """Windows of the bounded-modulus frame: F+ = [-theta, theta] and
        F- = [1/theta, -1/theta] through infinity."""
        t = _as_mpf(theta)
        if not (0 < t < 1):
            raise DomainError("theta must lie in (0, 1)")
        return cls(1 / t, -1 / t, -t, t)

    @classmethod
    def from_mu(cls, mu) -> "RangeSystem":
        """Windows of the sign-approximation frame: F± = ±[1-mu, 1+mu]."""
        m_ = _as_mpf(mu)
        if not (0 < m_ < 1):
            raise DomainError("mu must lie in (0, 1)")
        return cls(-1 - m_, -1 + m_, 1 - m_, 1 + m_)

    def window(self, kind: str):
        if kind == PASS:
            return self.plus_lo, self.plus_hi
        if kind == STOP:
            return self.minus_lo, self.minus_hi
        raise DomainError(f"unknown band kind {kind!r}")

    def beta_windows(self):
        """Canonical lifted windows on the value double cover.

        Values live on the circle beta = atan(value) of circumference pi
        (the double cover has circumference 2 pi).  Returns real intervals
        (lo, hi) for the copy-0 minus and plus windows, with the plus window
        the first plus-copy counterclockwise after the minus window; the
        copy-1 windows sit pi higher.
        """
        def lifted(a, b):
            pa = phi_of(a) / 2  # atan(a): half the projective chart angle
            pb = phi_of(b) / 2
            while pb <= pa:
                pb += mp.pi
            if pb - pa >= mp.pi:
                raise DomainError("value window must be a proper arc")
            return pa, pb

        w_minus = lifted(self.minus_lo, self.minus_hi)
        w_plus = lifted(self.plus_lo, self.plus_hi)
        c_minus = (w_minus[0] + w_minus[1]) / 2
        c_plus = (w_plus[0] + w_plus[1]) / 2
        shift = mp.pi * mp.floor((c_plus - c_minus) / mp.pi)
        c_target_lo, c_target_hi = w_plus[0] - shift, w_plus[1] - shift
        if c_target_lo + c_target_hi < 2 * c_minus:
            c_target_lo += mp.pi
            c_target_hi += mp.pi
        return {STOP: w_minus, PASS: (c_target_lo, c_target_hi)}


def cross_ratio(f: RangeSystem):
    """kappa of a range system; invariant under projective maps and > 1."""
    return cross_ratio_points(f.minus_lo, f.minus_hi, f.plus_lo, f.plus_hi)


def _as_mpf(x):
    return x if isinstance(x, mpf) else mpf(x)


def kappa_from_theta(theta):
    t = _as_mpf(theta)
    if not (0 < t < 1):
        raise DomainError("theta must lie in (0, 1)")
    return ((t + 1 / t) / 2) ** 2


def theta_from_kappa(kappa):
    k = _as_mpf(kappa)
    if not k > 1:
        raise DomainError("kappa must exceed 1")
    return mp.sqrt(k) - mp.sqrt(k - 1)


def mu_from_theta(theta):
    t = _as_mpf(theta)
    if not (0 < t <= 1):
        raise DomainError("theta must lie in (0, 1]")
    return 2 * t / (1 + t * t)


def theta_from_mu(mu):
    m_ = _as_mpf(mu)
    if not (0 < m_ <= 1):
        raise DomainError("mu must lie in (0, 1]")
    if m_ == 1:
        return mpf(1)
    return (1 - mp.sqrt((1 - m_) * (1 + m_))) / m_


# ---------------------------------------------------------------------------
# Sign classes.
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SignClass:
    """Topological class data: one bit per interior gap plus degree parity.

    sigma lists the gap bits for gaps 0..m-2 (band j to band j+1); the wrap
    gap's bit is the one forced by the parity constraint: the sum of all m
    gap bits must equal the degree of the function mod 2.  Storing m-1 free
    bits plus the parity realizes exactly the 2^(m-1) classes per degree.
    """

    sigma: tuple
    degree_parity: int

    def __post_init__(self):
        object.__setattr__(self, "sigma", tuple(int(b) for b in self.sigma))
        object.__setattr__(self, "degree_parity", int(self.degree_parity))
        if any(b not in (0, 1) for b in self.sigma):
            raise DomainError("sign-class bits must be 0 or 1")
        if self.degree_parity not in (0, 1):
            raise DomainError("degree parity must be 0 or 1")

    @property
    def m(self) -> int:
        return len(self.sigma) + 1

    @property
    def wrap_bit(self) -> int:
        return (self.degree_parity - sum(self.sigma)) % 2

    def full_bits(self) -> tuple:
        return self.sigma + (self.wrap_bit,)

    @classmethod
    def from_full_bits(cls, bits, degree: int) -> "SignClass":
        bits = tuple(int(b) for b in bits)
        if sum(bits) % 2 != degree % 2:
            raise DomainError(
                f"gap bits {bits} sum to {sum(bits) % 2} mod 2, "
                f"incompatible with degree {degree}"
            )
        return cls(bits[:-1], degree % 2)

    @classmethod
    def enumerate(cls, m: int, degree: int):
        """All 2^(m-1) classes for m bands at the given degree, in
        lexicographic bit order."""
        if m < 2:
            raise DomainError("need at least two bands")
        for bits in _bit_product((0, 1), repeat=m - 1):
            yield cls(bits, degree % 2)

    def __str__(self):
        return "".join(str(b) for b in self.full_bits())


def _projective_angle(r: RationalFunction, x):
    """atan of R(x) as a point of (-pi/2, pi/2], from the projective pair so
    poles cost nothing."""
    if mp.isinf(x):
        n = max(len(r.num), len(r.den)) - 1
        p = polyval(poly_reverse(r.num, n), mpf(0))
        q = polyval(poly_reverse(r.den, n), mpf(0))
    else:
        p, q = r.eval_pair(x)
    if p == 0 and q == 0:
        raise AmbiguityError("numerator and denominator vanish together", points=[x])
    a = mp.atan2(p, q)
    if a <= -mp.pi / 2:
        a += mp.pi
    elif a > mp.pi / 2:
        a -= mp.pi
    return a


def _angle_distance(a, b):
    """Distance of two chart angles on the circle."""
    d = abs(a - b)
    return min(d, abs(d - 2 * mp.pi))


def _circle_events(r: RationalFunction, prec: Precision):
    """Real zeros and poles of r on the projective circle.

    Returns (angle, is_pole, multiplicity) triples sorted by angle in
    (-pi, pi], with the point at infinity carrying the degree imbalance.
    A conjugate root pair hugging the real axis merges into one even
    multiplicity, which is also its topological effect, so the
    classification cannot corrupt a crossing parity.  A zero and a pole at
    the same angle mean a common factor the lift cannot see through.
    """
    events = []
    for coeffs, is_pole in ((r.num, False), (r.den, True)):
        if len(coeffs) < 2:
            continue
        for group in cluster_points(polyroots(coeffs), prec.cluster_threshold):
            center = sum(group) / len(group)
            if abs(center.imag) <= prec.cluster_threshold:
                events.append([phi_of(center.real), is_pole, len(group)])
    if r.degree_num != r.degree_den:
        events.append([+mp.pi, r.degree_num > r.degree_den, abs(r.degree_num - r.degree_den)])
    events.sort(key=lambda e: e[0])

    tol = mpf(2) ** -(prec.bits // 2)
    merged = []
    for e in events:
        if merged and _angle_distance(e[0], merged[-1][0]) <= tol:
            if e[1] != merged[-1][1]:
                raise AmbiguityError(
                    "a zero and a pole coincide at working precision",
                    points=[x_of(e[0])],
                )
            merged[-1][2] += e[2]
        else:
            merged.append(e)
    if len(merged) > 1 and _angle_distance(merged[0][0], merged[-1][0]) <= tol:
        if merged[0][1] != merged[-1][1]:
            raise AmbiguityError(
                "a zero and a pole coincide at working precision",
                points=[x_of(merged[0][0])],
            )
        merged[0][2] += merged.pop()[2]
    return [tuple(e) for e in merged]


def _lift_along_gap(r, events, phi_a, phi_b, beta_start):
    """Continuous lift of atan(R(x(phi))) from phi_a to phi_b.

    Between consecutive zeros and poles the lifted angle is trapped in one
    open interval between adjacent quarter-turn levels, so a single interior
    sample pins its branch exactly; an odd-multiplicity event then reflects
    the anchor across the level it touches.  No sampling density assumption
    enters, which is what makes steep zero-pole walls safe.
    """
    two_pi = 2 * mp.pi
    inside = []
    for phi0, is_pole, mult in events:
        shifted = phi0 + two_pi * mp.ceil((phi_a - phi0) / two_pi)
        while shifted <= phi_a:
            shifted += two_pi
        if shifted < phi_b:
            inside.append((shifted, is_pole, mult))
    inside.sort()

    half = mp.pi / 2
    beta = beta_start
    cursor = phi_a
    for shifted, is_pole, mult in inside + [(phi_b, None, 0)]:
        raw = _projective_angle(r, x_of((cursor + shifted) / 2))
        lifted = raw + mp.pi * mp.nint((beta - raw) / mp.pi)
        if abs(lifted - beta) > half * (1 + mpf(2) ** -16):
            raise AmbiguityError(
                "branch anchor moved a full half level between events; the "
                "zero and pole locations are unreliable at this precision",
                points=[x_of((cursor + shifted) / 2)],
            )
        beta = lifted
        if is_pole is None:
            raw_end = _projective_angle(r, x_of(phi_b))
            return raw_end + mp.pi * mp.nint((beta - raw_end) / mp.pi)
        if mult % 2:
            level = (
                half + mp.pi * mp.nint((beta - half) / mp.pi)
                if is_pole
                else mp.pi * mp.nint(beta / mp.pi)
            )
            beta = 2 * level - beta
        cursor = shifted
    raise AssertionError("unreachable")


def sign_class_of(
    r: RationalFunction,
    system: BandSystem,
    ranges: RangeSystem,
    prec: Precision = DEFAULT_PRECISION,
) -> SignClass:
    """Compute the gap bits of r relative to a band system and value windows.

    For each gap, the value path from one band midpoint to the next is
    lifted to the double cover of the value circle; the bit records which
    copy of the target window the path lands in, with the convention that
    it starts in copy 0.  Band midpoint values must lie inside their
    windows (this is the membership precondition, checked here); the parity
    of the resulting bits must match the degree, anything else indicating a
    degenerate leading coefficient or a lift failure.
    """
    with prec.work():
        windows = ranges.beta_windows()
        events = _circle_events(r, prec)
        slack = (mp.pi / 32) + mpf(2) ** (-(prec.bits // 2))

        def window_rep(beta, kind):
            lo, hi = windows[kind]
            center = (lo + hi) / 2
            k = mp.nint((beta - center) / mp.pi)
            res = beta - k * mp.pi
            if not (lo - slack <= res <= hi + slack):
                raise DomainError(
                    f"function value leaves the {kind} window at the band "
                    "midpoint; the candidate is not in any class for these ranges"
                )
            return int(k)

        m = system.m
        bits = []
        for j in range(m):
            band_a = system.bands[j]
            band_b = system.bands[(j + 1) % m]
            pa, pa_hi = band_a.phi_interval(prec)
            pb_lo, pb_hi = band_b.phi_interval(prec)
            phi_start = (pa + pa_hi) / 2
            mid_b = (pb_lo + pb_hi) / 2
            phi_end = phi_start + _ccw_span(phi_start, mid_b)

            beta0 = _projective_angle(r, x_of(phi_start))
            k0 = window_rep(beta0, band_a.kind)
            beta_start = beta0 - k0 * mp.pi  # shift the lift into copy 0
            beta_end = _lift_along_gap(r, events, phi_start, phi_end, beta_start)
            bits.append(window_rep(beta_end, band_b.kind) % 2)

        degree = r.degree
        if sum(bits) % 2 != degree % 2:
            raise AmbiguityError(
                f"gap bits {bits} violate the degree-{degree} parity "
                "constraint; leading coefficients may be degenerate",
                points=[],
            )
        return SignClass(tuple(bits[: m - 1]), degree % 2)


# ---------------------------------------------------------------------------
# Projective transforms of the geometry.
# ---------------------------------------------------------------------------


def apply_projective(t: Mobius, obj, band_kinds=None):
    """Image of a band system, range system, or sign class under a Mobius
    map.

    Band systems transform pointwise on the argument circle (reversal flips
    traversal, so endpoint roles and cyclic order both reverse).  Range
    systems transform pointwise on the value circle.  Sign classes follow
    the value-side action: a bit flips exactly when the map reverses
    orientation and the two bands flanking that gap have different kinds,
    which requires the band kind sequence as context.
    """
    if isinstance(obj, BandSystem):
        if t.preserves_orientation:
            return BandSystem(Band(t(b.lo), t(b.hi), b.kind) for b in obj)
        flipped = [Band(t(b.hi), t(b.lo), b.kind) for b in obj]
        return BandSystem([flipped[0]] + flipped[:0:-1])
    if isinstance(obj, RangeSystem):
        if t.preserves_orientation:
            return RangeSystem(
                t(obj.minus_lo), t(obj.minus_hi), t(obj.plus_lo), t(obj.plus_hi)
            )
        return RangeSystem(
            t(obj.minus_hi), t(obj.minus_lo), t(obj.plus_hi), t(obj.plus_lo)
        )
    if isinstance(obj, SignClass):
        if band_kinds is None:
            raise DomainError("transforming a sign class needs the band kind sequence")
        kinds = tuple(band_kinds)
        if len(kinds) != obj.m:
            raise DomainError("band kind sequence length disagrees with the class")
        if t.preserves_orientation:
            return obj
        full = list(obj.full_bits())
        for j in range(len(full)):
            if kinds[j] != kinds[(j + 1) % len(kinds)]:
                full[j] ^= 1
        return SignClass.from_full_bits(full, obj.degree_parity)
    raise DomainError(f"cannot transform object of type {type(obj).__name__}")


# ---------------------------------------------------------------------------
# The four problem frames.
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SettingSolution:
    """A rational minimizer together with its frame and deviation.

    setting 1: ratio frame, deviation theta^2 (scale pinned as in frame 3).
    setting 2: modified-deviation frame, deviation theta.
    setting 3: bounded-modulus frame, deviation theta; values within
               [-theta, theta] on passbands, beyond 1/theta on stopbands.
    setting 4: sign-approximation frame, deviation mu; values within
               mu of ±1 on the respective bands.
    Frames 1-3 share one function; frame 4 differs by a value-side Mobius
    map fixed by theta and mu.
    """

    setting: int
    func: RationalFunction
    deviation: object

    def __post_init__(self):
        if self.setting not in (1, 2, 3, 4):
            raise DomainError("setting must be 1, 2, 3, or 4")
        # mpf passes through unrounded so a high-precision deviation survives
        # construction under a low ambient context.
        d = self.deviation if isinstance(self.deviation, mpf) else mpf(self.deviation)
        if not (0 < d <= 1):
            raise DomainError("deviation must lie in (0, 1]")
        object.__setattr__(self, "deviation", d)

    def theta(self, prec: Precision = DEFAULT_PRECISION):
        with prec.work():
            if self.setting == 1:
                val = mp.sqrt(self.deviation)
            elif self.setting in (2, 3):
                val = mpf(self.deviation)
            else:
                val = theta_from_mu(self.deviation)
            return +val

    def mu(self, prec: Precision = DEFAULT_PRECISION):
        if self.setting == 4:
            return self.deviation
        with prec.work():
            return +mu_from_theta(self.theta(prec))


def _value_frame_map(theta, mu) -> Mobius:
    # Sends theta -> 1+mu, -theta -> 1-mu, 1/theta -> -1-mu; the fourth
    # correspondence -1/theta -> -1+mu then holds automatically, which is
    # the content of the deviation relation between the frames.
    return Mobius.from_triples(
        (theta, -theta, 1 / theta), (1 + mu, 1 - mu, -1 - mu)
    )


def convert_setting(
    sol: SettingSolution, target: int, prec: Precision = DEFAULT_PRECISION
) -> SettingSolution:
    """Re-express a solution in another of the four frames.

    Functions are shared by frames 1-3 (the scale-invariant frame-1
    functional is pinned to the frame-3 normalization); frame 4 attaches
    the value-side Mobius map.  Deviations convert through theta.
    """
    if target not in (1, 2, 3, 4):
        raise DomainError("setting must be 1, 2, 3, or 4")
    if target == sol.setting:
        return sol
    with prec.work():
        theta = sol.theta(prec)
        if target == 4 or sol.setting == 4:
            frame = _value_frame_map(theta, mu_from_theta(theta))
        if sol.setting == 4:
            base = sol.func.mobius_of_value(frame.inverse())
        else:
            base = sol.func
        if target == 4:
            func = base.mobius_of_value(frame)
            deviation = mu_from_theta(theta)
        else:
            func = base
            deviation = theta**2 if target == 1 else theta
        return SettingSolution(target, func, +deviation)
