"""Class-constrained equiripple solver and certifier on a band system.

The solver looks for the rational function of prescribed degree whose error
against the band indicator equioscillates, working inside one topological
sign class at a time.  Each round solves a levelled linear system that
interpolates the current reference with alternating signed levels, then
exchanges the reference onto the extrema of the new error; iterates that
drift out of the requested class are blended back toward the last accepted
one.  The certifier is independent of the solver: it locates every error
extremum on the bands and either issues an alternation certificate or
explains, machine-readably, why the candidate is not equiripple-optimal.
"""

import bisect
from dataclasses import dataclass

import numpy as np
from mpmath import mp, mpf
from scipy.optimize import linprog

from .bands import (
    PASS,
    STOP,
    Band,
    BandSystem,
    RangeSystem,
    SignClass,
    apply_projective,
    chart_rotation,
    cross_ratio_points,
    phi_of,
    sign_class_of,
    x_of,
)
from .elliptic import DEFAULT_PRECISION, Precision, _round
from .errors import (
    AmbiguityError,
    ClassEmptyError,
    DomainError,
    EquirippleRefusal,
    GridError,
    NonConvergedError,
    PoleSignal,
)
from .rational import (
    Mobius,
    RationalFunction,
    cluster_points,
    poly_affine,
    poly_from_roots,
    polyadd,
    polyroots,
    polyscale,
    polyval,
)
from .zolotarev import _correspondence, zolotarev_for_bands

# grid doublings local_extrema may try before giving up
_REFINE_DOUBLINGS = 6
# floor on consecutive exchange stalls tolerated before a class is declared
# empty; the ladder grows when the class admits more reference layouts
_STALL_LIMIT = 3


@dataclass(frozen=True)
class SolverConfig:
    """Knobs for the exchange solver and the certifier.

    certificate_tolerance is the relative ripple-equality tolerance; None
    selects the default of 1e-10 at 256 bits, scaled by 2^(64 - bits/4) so
    coarser precision loosens acceptance proportionally.
    """

    precision: Precision = DEFAULT_PRECISION
    max_iterations: int = 64
    exchange_damping: object = 1.0
    certificate_tolerance: object = None
    grid_density: int = 129

    def __post_init__(self):
        if not isinstance(self.precision, Precision):
            raise DomainError("precision must be a Precision instance")
        if not isinstance(self.max_iterations, int) or self.max_iterations < 1:
            raise DomainError("max_iterations must be a positive integer")
        d = mpf(self.exchange_damping)
        if not mp.isfinite(d) or not 0 < d <= 1:
            raise DomainError("exchange_damping must lie in (0, 1]")
        if self.certificate_tolerance is not None:
            t = mpf(self.certificate_tolerance)
            if not mp.isfinite(t) or not 0 < t < 1:
                raise DomainError("certificate_tolerance must lie in (0, 1)")
        if not isinstance(self.grid_density, int) or self.grid_density < 5:
            raise DomainError("grid_density must be an integer of at least 5")

    def ripple_tolerance(self) -> mpf:
        """The resolved relative tolerance for ripple equality."""
        if self.certificate_tolerance is not None:
            return mpf(self.certificate_tolerance)
        with self.precision.work():
            return mpf("1e-10") * mpf(2) ** (64 - mpf(self.precision.bits) / 4)


class ErrorFunction:
    """The signed error R - S, defined on the bands only.

    S is +1 on passbands and -1 on stopbands.  deviation starts as None and
    is filled in by local_extrema once the extrema have been located.
    """

    __slots__ = ("func", "system", "deviation", "prec")

    def __init__(self, func, system, prec: Precision = DEFAULT_PRECISION):
        self.func = func
        self.system = system
        self.deviation = None
        self.prec = prec

    def __call__(self, x):
        i = self.system.band_of(x, tol=self.prec.membership_threshold, prec=self.prec)
        if i is None:
            raise DomainError(f"x = {x} lies outside every band")
        return self.func(x) - self.system.bands[i].sign


@dataclass(frozen=True)
class AlternationCertificate:
    """Proof data for an equioscillating error.

    points follow the cyclic band order and signs alternate cyclically, so
    the sequence read around the circle changes sign at every step.  count
    is the number of points; a certificate of optimality at degree n needs
    at least 2n+2 of them, which certify enforces before constructing one.
    """

    points: tuple
    signs: tuple
    achieved_deviation: object
    count: int

    def __post_init__(self):
        object.__setattr__(self, "points", tuple(self.points))
        object.__setattr__(self, "signs", tuple(int(s) for s in self.signs))
        object.__setattr__(self, "count", int(self.count))
        if self.count != len(self.points) or self.count != len(self.signs):
            raise DomainError("count must match the number of points and signs")
        if self.count < 4 or self.count % 2:
            raise DomainError("an alternation set has an even count of at least 4")
        if any(s not in (-1, 1) for s in self.signs):
            raise DomainError("signs must be +-1")
        if any(self.signs[i] == self.signs[i - 1] for i in range(self.count)):
            raise DomainError("signs must alternate cyclically")
        if not (self.achieved_deviation > 0 and mp.isfinite(self.achieved_deviation)):
            raise DomainError("achieved deviation must be positive and finite")


# ---------------------------------------------------------------------------
# Extremum location.
# ---------------------------------------------------------------------------


def _golden_refine(f, lo, hi, mode, iters):
    """Golden-section search inside a bracket; mode +1 maximizes f."""
    invphi = (mp.sqrt(5) - 1) / 2
    a, b = mpf(lo), mpf(hi)
    span = b - a
    c = b - invphi * span
    d = a + invphi * span
    fc = mode * f(c)
    fd = mode * f(d)
    for _ in range(iters):
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = mode * f(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = mode * f(d)
    x = (a + b) / 2
    return x, f(x)


def _expected_interior(delta, prec):
    """Lower bounds on interior extrema per band, from derivative roots.

    Counts the odd-multiplicity near-real root clusters of the derivative
    numerator strictly inside each band.  Even clusters touch without a
    slope change and clusters hugging an endpoint are covered by the
    endpoint entries, so neither may force a grid refinement.
    """
    system = delta.system
    counts = [0] * system.m
    dn = delta.func.derivative_numerator()
    if len(dn) <= 1:
        return counts
    near = mpf(2) ** (-(prec.bits // 3))
    reals = []
    for z in polyroots(dn):
        if abs(mp.im(z)) <= near * (1 + abs(mp.re(z))):
            reals.append(mp.re(z))
    if not reals:
        return counts
    scale = max(1, max(abs(r) for r in reals))
    intervals = []
    for band in system.bands:
        a, b = band.phi_interval(prec)
        margin = (b - a) * mpf(2) ** -16
        intervals.append((a + margin, b - margin))
    for group in cluster_points(reals, scale * near):
        if len(group) % 2 == 0:
            continue
        p = phi_of(sum(group) / len(group))
        for i, (a, b) in enumerate(intervals):
            if any(a <= p + shift <= b for shift in (0, 2 * mp.pi, -2 * mp.pi)):
                counts[i] += 1
                break
    return counts


def _scan_band(delta, band, density, prec, iters):
    """Bracket slope sign changes on a Lobatto grid and refine each one."""
    grid = band.chebyshev_grid(density, prec)
    vals = [delta(x) for x in grid]
    found = []
    last_sign = 0
    last_idx = 0
    for i in range(len(grid) - 1):
        s = vals[i + 1] - vals[i]
        sg = 1 if s > 0 else (-1 if s < 0 else 0)
        if sg == 0:
            continue
        if last_sign and sg != last_sign:
            x, v = _golden_refine(delta, grid[last_idx], grid[i + 1], last_sign, iters)
            found.append((x, v))
        last_sign = sg
        last_idx = i
    edge = (band.hi - band.lo) * mpf(2) ** -30
    return [(x, v) for x, v in found if x - band.lo > edge and band.hi - x > edge]


def local_extrema(delta: ErrorFunction, cfg: SolverConfig, *, refine_bits=None):
    """All local extrema of the error over the bands, as (point, value).

    Band endpoints are always included.  Interior extrema are bracketed by
    slope sign changes of the sampled error on a per-band Lobatto grid and
    sharpened by golden-section search; when a band shows fewer of them
    than the derivative of the current iterate implies, the grid density
    doubles, up to a cap, after which GridError is raised.  Results follow
    the cyclic band order; delta.deviation is filled in as a side effect.
    """
    prec = cfg.precision
    with prec.work():
        if not delta.system.all_finite():
            raise DomainError("extremum search needs finite bands; rotate the chart first")
        bits = prec.bits // 2 if refine_bits is None else refine_bits
        iters = int(bits * 1.4405) + 1
        expected = _expected_interior(delta, prec)
        density = cfg.grid_density
        per_band = []
        for attempt in range(_REFINE_DOUBLINGS + 1):
            per_band = []
            for i, band in enumerate(delta.system.bands):
                interior = _scan_band(delta, band, density, prec, iters)
                if len(interior) < expected[i]:
                    per_band = None
                    break
                per_band.append((band, interior))
            if per_band is not None:
                break
            density = 2 * density - 1
        if per_band is None:
            raise GridError(
                f"{density} grid points per band still cannot separate the "
                f"expected extrema"
            )
        out = []
        for band, interior in per_band:
            pts = [(band.lo, delta(band.lo))] + interior + [(band.hi, delta(band.hi))]
            out.extend((_round(x, prec), _round(v, prec)) for x, v in pts)
        delta.deviation = max(abs(v) for _, v in out)
        return out


def _alternating_subsequence(pairs):
    """Longest cyclically alternating subsequence of (point, value) pairs.

    Collapses each maximal run of equal-signed values to its largest
    magnitude member, merging the first and last runs when they share a
    sign, so the result alternates cyclically and has even length.  Zero
    values carry no sign and are dropped.
    """
    runs = []
    for idx, (x, v) in enumerate(pairs):
        if v == 0:
            continue
        s = 1 if v > 0 else -1
        if runs and runs[-1][0] == s:
            if abs(v) > abs(runs[-1][3]):
                runs[-1] = (s, idx, x, v)
        else:
            runs.append((s, idx, x, v))
    if len(runs) > 1 and runs[0][0] == runs[-1][0]:
        keep = runs[0] if abs(runs[0][3]) >= abs(runs[-1][3]) else runs[-1]
        runs = [keep] + runs[1:-1]
        runs.sort(key=lambda r: r[1])
    return [(x, v) for _, _, x, v in runs]


def _trim_alternating(alt, target):
    """Drop adjacent pairs, weakest first, until exactly target remain.

    The pair containing the global magnitude maximum is protected; removing
    an adjacent pair keeps the cyclic alternation intact.
    """
    alt = list(alt)
    while len(alt) > target:
        size = len(alt)
        top = max(range(size), key=lambda i: abs(alt[i][1]))
        choice = None
        for i in range(size):
            j = (i + 1) % size
            if top in (i, j):
                continue
            score = max(abs(alt[i][1]), abs(alt[j][1]))
            if choice is None or score < choice[0]:
                choice = (score, i, j)
        _, i, j = choice
        if j > i:
            del alt[j]
            del alt[i]
        else:
            del alt[i]
            del alt[j]
    return alt


# ---------------------------------------------------------------------------
# Certification.
# ---------------------------------------------------------------------------


def _reject_band_poles(r, system, prec):
    # near-real denominator roots inside a band invalidate the candidate
    if len(r.den) <= 1:
        return
    near = mpf(2) ** (-(prec.bits // 3))
    for z in polyroots(r.den):
        if abs(mp.im(z)) > near * (1 + abs(mp.re(z))):
            continue
        x = mp.re(z)
        if system.band_of(x, tol=prec.pole_threshold, prec=prec) is not None:
            raise DomainError(
                f"denominator vanishes inside a band, near x = {mp.nstr(x, 8)}"
            )


def certify(R: RationalFunction, E: BandSystem, cfg: SolverConfig = None):
    """Check a candidate for equiripple optimality on the given bands.

    Returns an AlternationCertificate when the extremal error values reach
    the achieved deviation with at least 2n+2 cyclically alternating signs.
    Otherwise an EquirippleRefusal is returned, not raised, whose reason
    field tells whether the levels are unequal, the levels agree but the
    signs fail to alternate, or there are too few extremal points at the
    deviation altogether.  A pole inside a band raises DomainError.
    """
    cfg = cfg if cfg is not None else SolverConfig()
    prec = cfg.precision
    with prec.work():
        back = None
        E_w, R_w = E, R
        if not E.all_finite():
            _, mid, _ = E.largest_gap(prec)
            rot = chart_rotation(mid)
            E_w = apply_projective(rot, E)
            back = rot.inverse()
            R_w = R.compose_mobius(back)
        _reject_band_poles(R_w, E_w, prec)
        delta = ErrorFunction(R_w, E_w, prec)
        ext = local_extrema(delta, cfg)
        dev = delta.deviation
        target = 2 * max(R.degree, 1) + 2
        if dev == 0:
            return EquirippleRefusal(
                "too-few-alternations",
                "the error vanishes at every located extremum",
                details={"achieved_deviation": dev, "alternation_count": 0,
                         "required": target},
            )
        rtol = cfg.ripple_tolerance()
        strict = [(x, v) for x, v in ext if abs(v) >= dev * (1 - rtol)]
        alt = _alternating_subsequence(strict)
        if len(alt) >= target:
            points = []
            for x, _ in alt:
                if back is not None:
                    x = back(x)
                points.append(_round(x, prec) if mp.isfinite(x) else x)
            signs = [1 if v > 0 else -1 for _, v in alt]
            return AlternationCertificate(
                points=tuple(points),
                signs=tuple(signs),
                achieved_deviation=_round(dev, prec),
                count=len(alt),
            )
        details = {
            "achieved_deviation": _round(dev, prec),
            "alternation_count": len(alt),
            "required": target,
        }
        cands = [(x, v) for x, v in ext if abs(v) >= dev / 2]
        alt_c = _alternating_subsequence(cands)
        if len(alt_c) >= target:
            low = min(abs(v) for _, v in alt_c)
            details["level_spread"] = _round((dev - low) / dev, prec)
            return EquirippleRefusal(
                "unequal-ripple",
                f"{len(alt_c)} alternating extrema found, but their levels "
                f"differ by {mp.nstr(details['level_spread'], 6)} relative",
                details=details,
            )
        if len(strict) >= target:
            return EquirippleRefusal(
                "non-alternating",
                f"{len(strict)} extrema reach the deviation but only "
                f"{len(alt)} alternate in sign",
                details=details,
            )
        return EquirippleRefusal(
            "too-few-alternations",
            f"only {len(alt)} alternating extrema of the required {target}",
            details=details,
        )


# ---------------------------------------------------------------------------
# Seeding.
# ---------------------------------------------------------------------------


def _check_class(E, n, sigma):
    if not isinstance(n, int) or n < 1:
        raise DomainError("degree must be a positive integer")
    if not isinstance(sigma, SignClass):
        raise DomainError("sigma must be a SignClass")
    if sigma.m != E.m:
        raise DomainError(f"class describes {sigma.m} bands, the system has {E.m}")
    if sigma.degree_parity != n % 2:
        raise DomainError(
            f"class parity {sigma.degree_parity} is incompatible with degree {n}"
        )


def _gap_flips(E):
    kinds = [b.kind for b in E.bands]
    return [int(kinds[j] != kinds[(j + 1) % E.m]) for j in range(E.m)]


def _gap_point(E, j, frac, prec):
    """A finite point at roughly the given fraction along gap j."""
    a, b = E.gap_interval(j, prec)
    for shift in (mpf(0), mpf(1) / 20, -mpf(1) / 20, mpf(1) / 10, -mpf(1) / 10):
        x = x_of(a + (b - a) * (frac + shift))
        if mp.isfinite(x) and abs(x) < mpf(2) ** (prec.bits // 4):
            return x
    raise DomainError(f"cannot place a finite point inside gap {j}")


def _hull_factor(E, d, a, b, prec):
    """Degree-d equioscillating factor spanning the two band groups that
    gaps a and b separate; its real zero goes to gap b and, for odd d, its
    real pole to gap a (even d puts the second zero there instead)."""
    bands = E.bands
    m = E.m
    eminus = Band(bands[(a + 1) % m].lo, bands[b].hi, STOP)
    eplus = Band(bands[(b + 1) % m].lo, bands[a].hi, PASS)
    kappa = cross_ratio_points(eminus.lo, eminus.hi, eplus.lo, eplus.hi)
    root = mp.sqrt(kappa)
    zf = zolotarev_for_bands(d, _round((root - 1) / (root + 1), prec), prec)
    tol = mpf(2) ** (-(prec.bits // 2))
    f = _correspondence(eminus, eplus, zf.band_modulus.k, tol)
    base = zf.sign_approximant(prec)
    fac = base.compose_mobius(f)
    tau = None
    if not f.preserves_orientation:
        # the correspondence absorbed the x -> 1/(kx) symmetry of the
        # normalized geometry, which swaps the gaps the real zero and pole
        # land in; compose it once more to undo the swap
        k = zf.band_modulus.k
        tau = Mobius(mpf(0), mpf(1), k, mpf(0))
        fac = base.compose_mobius(tau).compose_mobius(f)
    nodes = None
    if base.support_nodes:
        inv = f.inverse()
        nodes = []
        for x, v, w in base.support_nodes:
            y = inv(x if tau is None else tau(x))
            if mp.isfinite(y):
                nodes.append((_round(y, prec), v, w))
    return RationalFunction(fac.num, fac.den, support_nodes=nodes)


def _gap_pair_factor(E, j, power, prec):
    """((x - z)/(x - p))^power with both roots inside gap j, scaled to unit
    geometric mean over the band midpoints."""
    z = _gap_point(E, j, mpf(2) / 5, prec)
    p = _gap_point(E, j, mpf(3) / 5, prec)
    fac = RationalFunction(poly_from_roots([z] * power), poly_from_roots([p] * power))
    logsum = mpf(0)
    for band in E.bands:
        logsum += mp.log(abs(fac(band.midpoint(prec))))
    return mp.exp(-logsum / E.m) * fac


def initial_guess(E: BandSystem, n: int, sigma: SignClass,
                  prec: Precision = DEFAULT_PRECISION) -> RationalFunction:
    """A sign-class-consistent starting candidate of degree n.

    Pairs of gap transitions each receive one equioscillating factor built
    on the two band groups they separate (two bands and their natural class
    reduce to the classical degree-n seed); a gap that needs both a pole
    and a zero receives a matched pair inside that gap, and leftover degree
    rides on the first factor.  Raises ClassEmptyError(likely=True) when
    the forced pole and zero counts already exceed n.
    """
    _check_class(E, n, sigma)
    with prec.work():
        if E.all_finite():
            return _guess_finite(E, n, sigma, prec)
        _, mid, _ = E.largest_gap(prec)
        rot = chart_rotation(mid)
        inner = _guess_finite(apply_projective(rot, E), n, sigma, prec)
        out = inner.compose_mobius(rot)
        nodes = None
        if inner.support_nodes:
            back = rot.inverse()
            nodes = []
            for x, v, w in inner.support_nodes:
                y = back(x)
                if mp.isfinite(y):
                    nodes.append((_round(y, prec), v, w))
        return RationalFunction(
            tuple(_round(c, prec) for c in out.num),
            tuple(_round(c, prec) for c in out.den),
            support_nodes=nodes,
        )


def _guess_finite(E, n, sc, prec):
    m = E.m
    flips = _gap_flips(E)
    full = list(sc.full_bits())
    zeta = [flips[j] ^ full[j] for j in range(m)]
    poles_needed = sum(full)
    zeros_needed = sum(zeta)
    if max(poles_needed, zeros_needed) > n:
        raise ClassEmptyError(
            f"class {sc} forces {poles_needed} gap poles and {zeros_needed} "
            f"gap zeros, which does not fit degree {n}",
            likely=True,
        )
    spare = n - max(poles_needed, zeros_needed)  # even by the parity constraint
    only_p = [j for j in range(m) if full[j] and not zeta[j]]
    only_z = [j for j in range(m) if zeta[j] and not full[j]]
    both = [j for j in range(m) if full[j] and zeta[j]]
    crossed = min(len(only_p), len(only_z))
    plan = [("trans", 1, only_p[i], only_z[i]) for i in range(crossed)]
    for i in range(crossed, len(only_p) - 1, 2):
        plan.append(("poles", 2, only_p[i], only_p[i + 1]))
    for i in range(crossed, len(only_z) - 1, 2):
        plan.append(("zeros", 2, only_z[i], only_z[i + 1]))
    if plan:
        kind, d, a, b = plan[0]
        plan[0] = (kind, d + spare, a, b)
        plan.extend(("pair", 1, j, j) for j in both)
    else:
        plan = [("pair", 1 + spare, j, j) for j in both]
    factors = []
    for kind, d, a, b in plan:
        if kind == "trans":
            factors.append(_hull_factor(E, d, a, b, prec))
        elif kind == "zeros":
            factors.append(_hull_factor(E, d, a, b, prec))
        elif kind == "poles":
            w = _hull_factor(E, d, b, a, prec)
            factors.append(RationalFunction(w.den, w.num))
        else:
            factors.append(_gap_pair_factor(E, a, d, prec))
    r = factors[0]
    for fac in factors[1:]:
        r = r * fac
    nodes = factors[0].support_nodes if len(factors) == 1 else None
    mid0 = E.bands[0].midpoint(prec)
    if r(mid0) * E.bands[0].sign < 0:
        r = -1 * r
        if nodes:
            nodes = [(x, -v, w) for x, v, w in nodes]
    return RationalFunction(
        tuple(_round(c, prec) for c in r.num),
        tuple(_round(c, prec) for c in r.den),
        support_nodes=nodes,
    )


# ---------------------------------------------------------------------------
# The exchange solver.
# ---------------------------------------------------------------------------


def _powers(y, count):
    out = [mpf(1)]
    for _ in range(count - 1):
        out.append(out[-1] * y)
    return out


def _nullvector(rows, prec):
    """One kernel vector of a near-singular square matrix, by elimination
    with full pivoting; None when the matrix looks regular."""
    size = len(rows)
    m = [[mpf(v) for v in row] for row in rows]
    scale = max(abs(v) for row in m for v in row)
    if scale == 0:
        return [mpf(1)] + [mpf(0)] * (size - 1)
    cutoff = scale * mpf(2) ** (-(prec.bits // 2))
    cols = list(range(size))
    rank = size
    for k in range(size):
        best_v, best_i, best_j = cutoff, None, None
        for i in range(k, size):
            for j in range(k, size):
                v = abs(m[i][cols[j]])
                if v > best_v:
                    best_v, best_i, best_j = v, i, j
        if best_i is None:
            rank = k
            break
        m[k], m[best_i] = m[best_i], m[k]
        cols[k], cols[best_j] = cols[best_j], cols[k]
        piv = m[k][cols[k]]
        for i in range(k + 1, size):
            f = m[i][cols[k]] / piv
            if f != 0:
                for j in range(k, size):
                    m[i][cols[j]] -= f * m[k][cols[j]]
    if rank == size:
        return None
    x = [mpf(0)] * size
    x[cols[rank]] = mpf(1)
    for k in range(rank - 1, -1, -1):
        acc = mpf(0)
        for j in range(k + 1, size):
            acc += m[k][cols[j]] * x[cols[j]]
        x[cols[k]] = -acc / m[k][cols[k]]
    return x


def _levelled_solve(refs, signs, system, n, prec):
    """Equioscillation steps on a fixed reference.

    Finds levels h and coefficients with p(x) - S(x) q(x) = s h q(x) at
    every reference point.  Eliminating p (it exists exactly when the
    sliding divided differences of the interpolation data vanish) leaves a
    matrix pencil in h whose determinant has the admissible levels among
    its real roots.  The root h = 0 is always discarded: it carries the
    degenerate iterate that collapses onto one band level, with p and q
    sharing all their roots, which exists whenever one band kind holds no
    more than n references.  Also dropped are candidates whose denominator
    vanishes at a reference or changes sign between two references in the
    same band.  Works in an affinely scaled variable for conditioning.
    Returns a list of (num, den, |h|), ascending in |h| with positive
    levels first on ties; the list may be empty.
    """
    count = len(refs)
    if len({mp.mpf(x) for x in refs}) < count:
        return []
    lo = min(min(b.lo, b.hi) for b in system.bands)
    hi = max(max(b.lo, b.hi) for b in system.bands)
    mid = (lo + hi) / 2
    half = (hi - lo) / 2
    ys = [(x - mid) / half for x in refs]
    svals = []
    owners = []
    for x in refs:
        i = system.band_of(x, tol=prec.membership_threshold, prec=prec)
        if i is None:
            return []
        svals.append(system.bands[i].sign)
        owners.append(i)
    V = [_powers(y, n + 1) for y in ys]
    T0 = []
    T1 = []
    for j in range(n + 1):
        window = range(j, j + n + 2)
        r0 = [mpf(0)] * (n + 1)
        r1 = [mpf(0)] * (n + 1)
        for i in window:
            w = mpf(1)
            for l in window:
                if l != i:
                    w /= ys[i] - ys[l]
            for t in range(n + 1):
                r0[t] += w * svals[i] * V[i][t]
                r1[t] += w * signs[i] * V[i][t]
        T0.append(r0)
        T1.append(r1)
    # the determinant of T0 + h T1 is a polynomial in h; sample and fit
    nodes = [mpf(2 * k) / (n + 1) - 1 for k in range(n + 2)]
    dets = []
    for hk in nodes:
        M = mp.matrix([[T0[a][b] + hk * T1[a][b] for b in range(n + 1)]
                       for a in range(n + 1)])
        dets.append(mp.det(M))
    top = max(abs(d) for d in dets)
    if top == 0:
        return []
    try:
        coef = mp.lu_solve(mp.matrix([_powers(hk, n + 2) for hk in nodes]),
                           mp.matrix([d / top for d in dets]))
    except (ZeroDivisionError, ValueError, TypeError):
        return []
    dpoly = [coef[i] for i in range(n + 2)]
    tiny = max(abs(c) for c in dpoly) * mpf(2) ** (-(prec.bits // 2))
    while len(dpoly) > 1 and abs(dpoly[-1]) <= tiny:
        dpoly.pop()
    if len(dpoly) == 1:
        return []
    near = mpf(2) ** (-(prec.bits // 3))
    floor_h = mpf(2) ** (-(prec.bits // 2))
    levels = []
    for r in polyroots(dpoly):
        if abs(r.imag) <= near * (1 + abs(r.real)) and abs(r.real) > floor_h:
            levels.append(r.real)
    out = []
    for group in cluster_points(levels, near):
        h = group[0]
        q_y = _nullvector([[T0[a][b] + h * T1[a][b] for b in range(n + 1)]
                           for a in range(n + 1)], prec)
        if q_y is None:
            continue
        qv = [polyval(q_y, y) for y in ys]
        if any(v == 0 or not mp.isfinite(v) for v in qv):
            continue
        if any(owners[i] == owners[i + 1] and (qv[i] > 0) != (qv[i + 1] > 0)
               for i in range(count - 1)):
            continue
        # the numerator interpolates the levelled values; the trailing
        # references must then agree, or the root was spurious
        wv = [(svals[i] + signs[i] * h) * qv[i] for i in range(count)]
        try:
            sol = mp.lu_solve(mp.matrix(V[: n + 1]), mp.matrix(wv[: n + 1]))
        except (ZeroDivisionError, ValueError, TypeError):
            continue
        p_y = tuple(sol[i] for i in range(n + 1))
        wscale = max(max(abs(v) for v in wv), mpf(1))
        if any(abs(polyval(p_y, ys[i]) - wv[i]) > wscale * near
               for i in range(n + 1, count)):
            continue
        out.append((p_y, q_y, h))
    out.sort(key=lambda t: (abs(t[2]), 0 if t[2] > 0 else 1))
    alpha = -mid / half
    beta = 1 / half
    return [(poly_affine(p, alpha, beta), poly_affine(q, alpha, beta), abs(h))
            for p, q, h in out]


def _blend(a, b, t):
    """Coefficientwise homotopy between two normalized iterates."""
    na, nb = a.normalized(), b.normalized()
    num = polyadd(polyscale(na.num, 1 - t), polyscale(nb.num, t))
    den = polyadd(polyscale(na.den, 1 - t), polyscale(nb.den, t))
    if len(den) == 1 and den[0] == 0:
        return None
    return RationalFunction(num, den)


def _in_class(r, E, sigma_full, window, prec):
    try:
        cls = sign_class_of(r, E, RangeSystem.from_mu(window), prec)
    except (DomainError, AmbiguityError, PoleSignal):
        return False
    return cls.full_bits() == sigma_full


def _accept(cands, prev, E, sigma_full, scale, prec):
    """Class membership gate over ranked candidates, with a blending rescue
    toward the previous accepted iterate; returns (iterate, candidate index,
    unblended flag) or (None, -1, False)."""
    floor = mpf(2) ** (-(prec.bits // 2))
    window = min(scale * mpf("1.25") + floor, mpf("0.95"))
    for idx, cand in enumerate(cands):
        if _in_class(cand, E, sigma_full, window, prec):
            return cand, idx, True
    for idx, cand in enumerate(cands):
        t = mpf(1) / 2
        for _ in range(6):
            mix = _blend(prev, cand, t)
            if mix is not None and _in_class(mix, E, sigma_full, window, prec):
                return mix, idx, False
            t /= 2
    return None, -1, False


def _exchange(ext, refs, signs, count, damping, system, prec):
    """Multi-point exchange: move the reference onto the new extrema.

    Aligns the trimmed alternating extrema with the old reference by the
    sign-compatible cyclic rotation of least total travel, then applies the
    damping blend pointwise (snapping back to the undamped point whenever
    the blend leaves the bands).  Returns None on an alternation shortfall.
    """
    alt = _alternating_subsequence(ext)
    if len(alt) < count:
        return None
    alt = _trim_alternating(alt, count)
    new_pts = [x for x, _ in alt]
    new_sgn = [1 if v > 0 else -1 for _, v in alt]
    best = None
    for shift in range(count):
        if new_sgn[shift] != signs[0]:
            continue
        cost = mpf(0)
        for i in range(count):
            cost += abs(new_pts[(shift + i) % count] - refs[i])
        if best is None or cost < best[0]:
            best = (cost, shift)
    if best is None:
        return None
    shift = best[1]
    pts = [new_pts[(shift + i) % count] for i in range(count)]
    sgn = [new_sgn[(shift + i) % count] for i in range(count)]
    d = mpf(damping)
    if d < 1:
        blended = []
        for old, new in zip(refs, pts):
            x = old + d * (new - old)
            if system.band_of(x, tol=prec.membership_threshold, prec=prec) is None:
                x = new
            blended.append(x)
        pts = blended
    return pts, sgn


def _single_exchange(ext, refs, signs):
    """Swap the global extremum in for its same-signed cyclic neighbor."""
    x_star, v_star = max(ext, key=lambda t: abs(t[1]))
    if v_star == 0 or any(x == x_star for x in refs):
        return None
    s_star = 1 if v_star > 0 else -1
    pairs = sorted(zip(refs, signs))
    xs = [x for x, _ in pairs]
    count = len(pairs)
    i = bisect.bisect_left(xs, x_star)
    left = (i - 1) % count
    right = i % count
    target = left if pairs[left][1] == s_star else right
    if pairs[target][1] != s_star:
        return None
    pairs[target] = (x_star, s_star)
    pairs.sort()
    return [x for x, _ in pairs], [s for _, s in pairs]


def _spread(amount, widths, members):
    """Largest-remainder split of amount over the listed band indices."""
    extra = {i: 0 for i in members}
    total = sum(widths[i] for i in members)
    if amount <= 0 or total <= 0:
        return extra
    quota = {i: amount * widths[i] / total for i in members}
    for i in members:
        extra[i] = int(mp.floor(quota[i]))
    order = sorted(members, key=lambda i: quota[i] - extra[i], reverse=True)
    for i in order[: amount - sum(extra.values())]:
        extra[i] += 1
    return extra


def _bump_combos(total, m, cap_each_side):
    """All ways to place `total` increments on m bands within the per-side
    caps; cap_each_side maps band index to a shared side counter key."""
    sides, caps = cap_each_side
    out = []

    def rec(i, left, used):
        if i == m:
            if left == 0:
                out.append(tuple(combo))
            return
        side = sides[i]
        room = caps[side] - used[side]
        for e in range(min(left, room) + 1):
            combo.append(e)
            used[side] += e
            rec(i + 1, left - e, used)
            used[side] -= e
            combo.pop()

    combo = []
    rec(0, total, {0: 0, 1: 0})
    return out


def _layout_candidates(E, n, sc, cap=6):
    """Reference counts per band consistent with the class sign structure.

    At a class optimum the error alternates through all 2n+2 points, so
    following the signs of p - q and p + q around the circle fixes each
    band's count mod 2, and the alternation gaps inside pass bands and
    stop bands are budgeted against the n real zeros each of the two
    polynomials can spend.  A same-kind gap leaves the edge sign free (one
    case bit) and always burns one zero.  Returns the evenest layouts
    first; an empty list means no layout fits, which points at a class
    without an interior optimum.
    """
    m = E.m
    count = 2 * n + 2
    kinds = [b.kind for b in E.bands]
    full = list(sc.full_bits())
    flip_gap = [kinds[j] != kinds[(j + 1) % m] for j in range(m)]
    free = [j for j in range(m) if not flip_gap[j]]
    if len(free) > 4:
        return []
    waste_plus = 0
    waste_minus = 0
    for j in free:
        if kinds[j] == PASS:
            waste_plus += 1 - full[j]
            waste_minus += full[j]
        else:
            waste_plus += full[j]
            waste_minus += 1 - full[j]
    p_bands = [i for i in range(m) if kinds[i] == PASS]
    sides = [0 if kinds[i] == PASS else 1 for i in range(m)]
    layouts = []
    for mask in range(1 << len(free)):
        t = [0] * m
        for j in range(m):
            if flip_gap[j]:
                if kinds[j] == PASS:
                    t[j] = 1 if full[j] else -1
                else:
                    t[j] = -1 if full[j] else 1
        for bit, j in enumerate(free):
            t[j] = 1 if mask >> bit & 1 else -1
        minimal = [1 if t[j] != t[j - 1] else 2 for j in range(m)]
        extra = count - sum(minimal)
        if extra < 0 or extra % 2:
            continue
        bp = n - waste_plus - sum(minimal[i] - 1 for i in p_bands)
        bs = n - waste_minus - sum(minimal[i] - 1 for i in range(m)
                                   if i not in p_bands)
        if bp < 0 or bs < 0:
            continue
        for combo in _bump_combos(extra // 2, m, (sides, {0: bp // 2, 1: bs // 2})):
            layout = tuple(minimal[i] + 2 * combo[i] for i in range(m))
            if layout not in layouts:
                layouts.append(layout)
    layouts.sort(key=lambda L: (sum(c * c for c in L), L))
    return layouts[:cap]


def _arc_reference(delta, E, count, prec, layout=None):
    """Allocation fallback when the extrema cannot seed the reference.

    A given layout (points per band) is honored directly; otherwise every
    band anchors one point and the interior is split between the pass and
    stop sides by angular width, with neither side exceeding n since an
    alternation gap inside a band costs one real zero of the degree-n
    polynomial p - q or p + q.
    """
    m = E.m
    n = count // 2 - 1
    widths = []
    for band in E.bands:
        a, b = band.phi_interval(prec)
        widths.append(b - a)
    if layout is not None:
        base = list(layout)
    else:
        base = [0] * m
        by_width = sorted(range(m), key=lambda i: widths[i], reverse=True)
        for i in by_width[: min(m, count)]:
            base[i] = 1
        interior = count - sum(base)
        p_side = [i for i in range(m) if E.bands[i].kind == PASS]
        s_side = [i for i in range(m) if E.bands[i].kind != PASS]
        if interior > 0:
            wp = sum(widths[i] for i in p_side)
            ws = sum(widths[i] for i in s_side)
            if not p_side or not s_side:
                a = interior if p_side else 0
            else:
                a = int(mp.floor(interior * wp / (wp + ws) + mpf(1) / 2))
                a = min(n, max(interior - n, a))
            for i, e in _spread(a, widths, p_side).items():
                base[i] += e
            for i, e in _spread(interior - a, widths, s_side).items():
                base[i] += e
    pts = []
    for i, band in enumerate(E.bands):
        if base[i] == 1:
            pts.append(band.midpoint(prec))
        elif base[i] > 1:
            pts.extend(band.chebyshev_grid(base[i], prec))
    try:
        first = delta(pts[0])
    except (DomainError, PoleSignal):
        first = mpf(1)
    s0 = 1 if first >= 0 else -1
    return pts, [s0 * (1 if i % 2 == 0 else -1) for i in range(count)]


def _seed_reference(delta, ext, E, count, prec, layouts=()):
    alt = _alternating_subsequence(ext)
    if len(alt) >= count:
        alt = _trim_alternating(alt, count)
        return [x for x, _ in alt], [1 if v > 0 else -1 for _, v in alt]
    layout = layouts[0] if layouts else None
    return _arc_reference(delta, E, count, prec, layout=layout)


def _iterate(E, n, sc, guess, cfg):
    """The exchange loop inside one class, on an all-finite system."""
    prec = cfg.precision
    count = 2 * n + 2
    tol = cfg.ripple_tolerance()
    coarse = max(48, prec.bits // 4)
    sigma_full = sc.full_bits()
    layouts = _layout_candidates(E, n, sc)
    stall_limit = max(_STALL_LIMIT, len(layouts) + 2)
    R_prev = guess
    delta = ErrorFunction(guess, E, prec)
    ext = local_extrema(delta, cfg, refine_bits=coarse)
    U_prev = delta.deviation
    refs, signs = _seed_reference(delta, ext, E, count, prec, layouts)
    best_seen = (U_prev, R_prev)
    h_best = mpf(0)
    slack = mpf(2) ** (-(prec.bits // 8))
    stalls = 0
    regress = 0
    single = False
    fresh = True

    def reseed(d):
        # first re-seed keeps the width-proportional split, later ones walk
        # the layouts the class sign structure admits, evenest first
        k = stalls - 2
        layout = layouts[k] if 0 <= k < len(layouts) else None
        return _arc_reference(d, E, count, prec, layout=layout)

    for _ in range(cfg.max_iterations):
        lev = _levelled_solve(refs, signs, E, n, prec)
        cands = [RationalFunction(num, den).normalized() for num, den, _ in lev]
        accepted, idx, pure = _accept(cands, R_prev, E, sigma_full, U_prev, prec)
        h = lev[idx][2] if idx >= 0 else mpf(0)
        if accepted is None:
            stalls += 1
            if stalls >= stall_limit:
                raise ClassEmptyError(
                    f"exchange collapsed while solving class {sc} at degree {n}",
                    likely=False,
                )
            retry = _single_exchange(ext, refs, signs) if stalls == 1 else None
            if retry is None:
                retry = reseed(ErrorFunction(R_prev, E, prec))
            refs, signs = retry
            fresh = True
            continue
        if pure and h > 0:
            # reference level is a lower bound; an undamped exchange must
            # not let it regress between accepted iterates of one run
            if not fresh and cfg.exchange_damping == 1:
                assert h >= h_best * (1 - slack)
            h_best = max(h_best, h)
        delta = ErrorFunction(accepted, E, prec)
        try:
            ext = local_extrema(delta, cfg, refine_bits=coarse)
        except (PoleSignal, GridError):
            stalls += 1
            if stalls >= stall_limit:
                raise ClassEmptyError(
                    f"iterates of class {sc} keep leaving the feasible region",
                    likely=False,
                )
            refs, signs = reseed(ErrorFunction(R_prev, E, prec))
            fresh = True
            continue
        fresh = False
        U = delta.deviation
        if U < best_seen[0]:
            best_seen = (U, accepted)
        if U > U_prev:
            regress += 1
        else:
            regress = 0
            single = False
        if regress >= 2:
            single = True
        if h_best > 0 and (U - h_best) / U <= tol / 4:
            res = certify(accepted, E, cfg)
            if isinstance(res, AlternationCertificate):
                return accepted, res
        nxt = (
            _single_exchange(ext, refs, signs)
            if single
            else _exchange(ext, refs, signs, count, cfg.exchange_damping, E, prec)
        )
        if nxt is None:
            stalls += 1
            if stalls >= stall_limit:
                raise ClassEmptyError(
                    f"the error of class {sc} iterates keeps too few "
                    f"alternations to continue",
                    likely=False,
                )
            refs, signs = reseed(delta)
            fresh = True
        else:
            stalls = 0
            refs, signs = nxt
        R_prev = accepted
        U_prev = U
    raise NonConvergedError(
        f"no certificate for class {sc} within {cfg.max_iterations} iterations",
        best=best_seen[1],
        deviation=best_seen[0],
    )


def _corrected_start(E, n, sc, prec):
    """Linear-programming rescue start for a class the exchange missed.

    Runs differential correction on a dense float grid: inside one class
    the signs of p and q along the bands are fixed, so each round that
    shrinks the linearized overshoot |p - S q| - d |eps q| is a linear
    program and the level d decreases monotonically from any start.  No
    reference set is involved, which reaches basins the re-seeding ladder
    cannot.  Returns a start for the exchange, or None when the rounds
    degenerate; float accuracy is plenty for a warm start.
    """
    bits = sc.full_bits()
    m = E.m
    qsign = [1]
    for j in range(m - 1):
        qsign.append(qsign[-1] * (-1 if bits[j] else 1))
    rsign = [1 if b.kind == PASS else -1 for b in E.bands]
    psign = [qsign[i] * rsign[i] for i in range(m)]
    dens = 256
    xs, sv, ep, eq = [], [], [], []
    for band, sp, sq, rs in zip(E.bands, psign, qsign, rsign):
        xs.append(np.linspace(float(band.lo), float(band.hi), dens))
        sv.append(np.full(dens, float(rs)))
        ep.append(np.full(dens, float(sp)))
        eq.append(np.full(dens, float(sq)))
    xs = np.concatenate(xs)
    sv = np.concatenate(sv)
    ep = np.concatenate(ep)
    eq = np.concatenate(eq)
    scale = max(abs(xs[0]), abs(xs[-1]), 1.0)
    V = np.vander(xs / scale, n + 1, increasing=True)
    npts = len(xs)
    na = n + 1
    cost = np.zeros(2 * na + 1)
    cost[-1] = 1.0
    box = [(-50.0, 50.0)] * na + [(-1.0, 1.0)] * na + [(None, None)]
    zero = np.zeros((npts, na))
    col = np.ones((npts, 1))
    level = None
    a = b = None
    for _ in range(40):
        d = 1.0 if level is None else level
        rows = np.vstack([
            np.hstack([V, -(sv + d * eq)[:, None] * V, -col]),
            np.hstack([-V, (sv - d * eq)[:, None] * V, -col]),
            np.hstack([zero, -eq[:, None] * V, 0 * col]),
            np.hstack([-ep[:, None] * V, zero, 0 * col]),
        ])
        rhs = np.concatenate([np.zeros(2 * npts), np.full(npts, -1e-9),
                              np.zeros(npts)])
        res = linprog(cost, A_ub=rows, b_ub=rhs, bounds=box, method="highs")
        if not res.success:
            return None
        a_new, b_new = res.x[:na], res.x[na:2 * na]
        qv = V @ b_new
        dev = float(np.max(np.abs(V @ a_new - sv * qv)
                           / np.maximum(np.abs(qv), 1e-300)))
        if not np.isfinite(dev):
            return None
        # a warm start does not need the grid optimum to full accuracy
        if level is not None and dev >= level - 1e-7 * max(level, 1e-3):
            if dev < level:
                a, b, level = a_new, b_new, dev
            break
        a, b, level = a_new, b_new, dev
    if level is None or not 0 < level < 1:
        return None
    qv = np.abs(V @ b)
    if qv.min() <= 1e-6 * qv.max():
        return None
    beta = 1 / mpf(float(scale))
    num = poly_affine(tuple(mpf(float(v)) for v in a), mpf(0), beta)
    den = poly_affine(tuple(mpf(float(v)) for v in b), mpf(0), beta)
    try:
        start = RationalFunction(num, den).normalized()
        ranges = RangeSystem.from_mu(mpf(float(level)) * (1 + mpf("1e-6")))
        got = sign_class_of(start, E, ranges, prec)
    except (DomainError, AmbiguityError, PoleSignal):
        return None
    if got.full_bits() != bits:
        return None
    return start


def _solve_class(E, n, sc, cfg):
    prec = cfg.precision
    with prec.work():
        rot = None
        E_w = E
        if not E.all_finite():
            _, mid, _ = E.largest_gap(prec)
            rot = chart_rotation(mid)
            E_w = apply_projective(rot, E)
        guess = initial_guess(E_w, n, sc, prec=prec)
        try:
            try:
                R_w, cert = _iterate(E_w, n, sc, guess, cfg)
            except (ClassEmptyError, NonConvergedError) as exc:
                if isinstance(exc, ClassEmptyError) and exc.likely:
                    raise
                start = _corrected_start(E_w, n, sc, prec)
                if start is None:
                    raise
                R_w, cert = _iterate(E_w, n, sc, start, cfg)
        except NonConvergedError as exc:
            if rot is not None and exc.best is not None:
                exc.best = exc.best.compose_mobius(rot)
            raise
        if rot is not None:
            back = rot.inverse()
            R = R_w.compose_mobius(rot)
            pts = []
            for x in cert.points:
                y = back(x)
                pts.append(_round(y, prec) if mp.isfinite(y) else y)
            cert = AlternationCertificate(
                tuple(pts), cert.signs, cert.achieved_deviation, cert.count
            )
        else:
            R = R_w
        norm = R.normalized()
        num = tuple(_round(c, prec) for c in norm.num)
        den = tuple(_round(c, prec) for c in norm.den)
        report = RationalFunction(num, den)
        nodes = []
        for x, s in zip(cert.points, cert.signs):
            if not mp.isfinite(x):
                continue
            try:
                nodes.append((x, _round(report(x), prec), mpf(s)))
            except PoleSignal:
                continue
        out = RationalFunction(num, den, support_nodes=nodes or None)
        return out, cert.achieved_deviation, cert


def solve(E: BandSystem, n: int, sigma="all", cfg: SolverConfig = None):
    """Minimize the uniform error to the band indicator at degree n.

    sigma selects one topological class, or "all" to try every class whose
    parity matches n and return the best certified result; earlier classes
    win ties in lexicographic bit order.  Returns (minimizer, deviation,
    certificate).  An exhausted iteration budget raises NonConvergedError
    carrying the best iterate; an unrealizable class raises ClassEmptyError.
    """
    cfg = cfg if cfg is not None else SolverConfig()
    if not isinstance(n, int) or n < 1:
        raise DomainError("degree must be a positive integer")
    if not isinstance(sigma, str):
        _check_class(E, n, sigma)
        return _solve_class(E, n, sigma, cfg)
    if sigma != "all":
        raise DomainError(f"sigma must be a SignClass or 'all', got {sigma!r}")
    margin = cfg.ripple_tolerance() / 4
    best = None
    notes = []
    non_converged = None
    for sc in SignClass.enumerate(E.m, n):
        try:
            cand = _solve_class(E, n, sc, cfg)
        except ClassEmptyError as exc:
            notes.append(f"{sc}: {exc}")
            continue
        except NonConvergedError as exc:
            if non_converged is None:
                non_converged = exc
            notes.append(f"{sc}: no certificate within the budget")
            continue
        if best is None or cand[1] < best[1] * (1 - margin):
            best = cand
    if best is not None:
        return best
    if non_converged is not None:
        raise non_converged
    raise ClassEmptyError(
        f"no class of degree {n} is feasible on this system: " + "; ".join(notes),
        likely=False,
    )
