"""Dense polynomial and rational-function arithmetic over mpmath floats.

Polynomials are tuples of real coefficients in ascending order; a rational
function is a pair of such tuples.  Everything here runs at the ambient
mpmath precision and performs no rounding of its own: the calling modules
open a working-precision context, chain operations freely, and round only
what they hand back to users.  Keeping this layer context-free avoids
precision loss between chained coefficient operations.

Mobius transformations get their own small class because band geometry and
value-frame changes both consume them, argument-side and value-side.
"""

from __future__ import annotations

from dataclasses import dataclass

from mpmath import mp, mpc, mpf

from .errors import DomainError, NonConvergedError, PoleSignal


def as_coeffs(seq) -> tuple:
    """Validate and normalize a coefficient sequence, stripping high-order
    exact zeros (but always keeping at least the constant term).

    mpf entries pass through unrounded; only foreign types are parsed (and
    those at ambient precision, per the module contract)."""
    coeffs = [c if isinstance(c, mpf) else mpf(c) for c in seq]
    if not coeffs:
        raise DomainError("empty coefficient sequence")
    for c in coeffs:
        if not mp.isfinite(c):
            raise DomainError("polynomial coefficients must be finite")
    while len(coeffs) > 1 and coeffs[-1] == 0:
        coeffs.pop()
    return tuple(coeffs)


def polyval(coeffs, x):
    """Horner evaluation; x may be real or complex."""
    acc = coeffs[-1]
    for c in reversed(coeffs[:-1]):
        acc = acc * x + c
    return acc


def polyadd(a, b):
    n = max(len(a), len(b))
    out = [mpf(0)] * n
    for i, c in enumerate(a):
        out[i] += c
    for i, c in enumerate(b):
        out[i] += c
    return as_coeffs(out)


def polysub(a, b):
    return polyadd(a, tuple(-c for c in b))


def polymul(a, b):
    out = [mpf(0)] * (len(a) + len(b) - 1)
    for i, ca in enumerate(a):
        if ca == 0:
            continue
        for j, cb in enumerate(b):
            out[i + j] += ca * cb
    return as_coeffs(out)


def polyscale(a, s):
    return as_coeffs(tuple(c * s for c in a))


def polyder(a):
    if len(a) == 1:
        return (mpf(0),)
    return as_coeffs(tuple(i * c for i, c in enumerate(a) if i > 0))


def poly_affine(coeffs, alpha, beta):
    """Coefficients of p(alpha + beta x), by Horner in the shifted variable."""
    acc = (coeffs[-1],)
    lin = (mpf(alpha), mpf(beta))
    for c in reversed(coeffs[:-1]):
        acc = polyadd(polymul(acc, lin), (mpf(c),))
    return acc


def poly_reverse(coeffs, degree: int):
    """Coefficients of y^degree * p(1/y), padding p up to the given degree.

    Used to study behaviour at infinity in a finite chart; degree must be at
    least deg p.
    """
    if degree + 1 < len(coeffs):
        raise DomainError("reversal degree smaller than polynomial degree")
    padded = list(coeffs) + [mpf(0)] * (degree + 1 - len(coeffs))
    return tuple(reversed(padded))


def linear_power(a, b, n: int):
    """(a + b x)^n by repeated multiplication; n small in all callers."""
    out = (mpf(1),)
    lin = (mpf(a), mpf(b))
    for _ in range(n):
        out = polymul(out, lin)
    return out


def polyroots(coeffs, extraprec: int = 64, maxsteps: int = 200):
    """All complex roots of a nonconstant polynomial, ascending coefficients.

    Exact zero roots are peeled off symbolically first; the iteration
    converges only linearly on multiple roots, so clusters get one retry
    with generous headroom before giving up."""
    c = as_coeffs(coeffs)
    if len(c) == 1:
        raise DomainError("constant polynomial has no root set")
    roots = []
    while len(c) > 1 and c[0] == 0:
        roots.append(mpc(0))
        c = c[1:]
    if len(c) > 1:
        # leading coefficients below working precision only manufacture
        # phantom roots near infinity that stall the iteration
        floor = max(abs(x) for x in c) * mpf(2) ** (-mp.prec)
        while len(c) > 1 and abs(c[-1]) <= floor:
            c = c[:-1]
    if len(c) > 1:
        rev = list(reversed(c))
        try:
            found = mp.polyroots(rev, maxsteps=maxsteps, extraprec=extraprec)
        except mp.NoConvergence:
            try:
                found = mp.polyroots(
                    rev, maxsteps=10 * maxsteps, extraprec=4 * extraprec + mp.prec
                )
            except mp.NoConvergence as exc:
                raise NonConvergedError(f"root finding stalled: {exc}") from exc
        roots.extend(found)
    return [mpc(r) for r in roots]


def cluster_points(points, threshold):
    """Greedy grouping of points closer than threshold to a cluster member.

    Returns a list of lists; order follows first appearance.  Adequate for
    recognizing numerically multiple roots, where true clusters sit far
    apart compared to the intra-cluster spread.
    """
    clusters = []
    for z in points:
        for group in clusters:
            if any(abs(z - w) <= threshold for w in group):
                group.append(z)
                break
        else:
            clusters.append([z])
    return clusters


def poly_from_roots(roots, leading=1):
    """Expand prod (x - r) times a leading factor; complex roots must be
    accompanied by their conjugates if a real result is expected."""
    out = (mpf(leading),) if not isinstance(leading, mpc) else (leading,)
    for r in roots:
        out = polymul_any(out, (-r, 1))
    return out


def polymul_any(a, b):
    # polymul without the real-coefficient validation, for root expansion
    out = [mp.mpf(0)] * (len(a) + len(b) - 1)
    for i, ca in enumerate(a):
        for j, cb in enumerate(b):
            out[i + j] += ca * cb
    return tuple(out)


def realify(coeffs, tol):
    """Drop imaginary parts no larger than tol (relative to the largest
    coefficient); complain otherwise."""
    scale = max(abs(c) for c in coeffs)
    scale = scale if scale > 0 else mpf(1)
    out = []
    for c in coeffs:
        z = mpc(c)
        if abs(z.imag) > tol * scale:
            raise DomainError(f"coefficient {c} is not real to tolerance {tol}")
        out.append(z.real)
    return as_coeffs(out)


@dataclass(frozen=True)
class Mobius:
    """x -> (a x + b) / (c x + d) on the projective real line.

    Infinity is a regular point here: the map sends -d/c to it and it to
    a/c.  Orientation on the circle is the sign of the determinant.
    """

    a: mpf
    b: mpf
    c: mpf
    d: mpf

    def __post_init__(self):
        for name in ("a", "b", "c", "d"):
            v = getattr(self, name)
            v = v if isinstance(v, mpf) else mpf(v)
            object.__setattr__(self, name, v)
            if not mp.isfinite(v):
                raise DomainError("Mobius entries must be finite")
        if self.det == 0:
            raise DomainError("Mobius transformation must have nonzero determinant")

    @property
    def det(self):
        return self.a * self.d - self.b * self.c

    @property
    def preserves_orientation(self) -> bool:
        return self.det > 0

    def __call__(self, x):
        if mp.isinf(x):
            return self.a / self.c if self.c != 0 else mp.inf
        den = self.c * x + self.d
        if den == 0:
            return mp.inf
        return (self.a * x + self.b) / den

    def inverse(self) -> "Mobius":
        return Mobius(self.d, -self.b, -self.c, self.a)

    def compose(self, other: "Mobius") -> "Mobius":
        """self after other."""
        return Mobius(
            self.a * other.a + self.b * other.c,
            self.a * other.b + self.b * other.d,
            self.c * other.a + self.d * other.c,
            self.c * other.b + self.d * other.d,
        )

    def rescaled(self) -> "Mobius":
        s = max(abs(self.a), abs(self.b), abs(self.c), abs(self.d))
        return Mobius(self.a / s, self.b / s, self.c / s, self.d / s)

    @staticmethod
    def to_zero_one_inf(p, q, r) -> "Mobius":
        """The map sending (p, q, r) to (0, 1, inf); any one point may be inf."""
        pts = [mpf(p), mpf(q), mpf(r)]
        infs = [mp.isinf(v) for v in pts]
        if sum(infs) > 1:
            raise DomainError("triple must contain at most one infinite point")
        p, q, r = pts
        if infs[0]:
            m = Mobius(0, q - r, 1, -r)
        elif infs[1]:
            m = Mobius(1, -p, 1, -r)
        elif infs[2]:
            m = Mobius(1, -p, 0, q - p)
        else:
            m = Mobius(q - r, -p * (q - r), q - p, -r * (q - p))
        return m.rescaled()

    @staticmethod
    def from_triples(src, dst) -> "Mobius":
        """The unique map carrying one ordered triple of distinct projective
        points onto another."""
        fwd = Mobius.to_zero_one_inf(*src)
        back = Mobius.to_zero_one_inf(*dst)
        return back.inverse().compose(fwd).rescaled()


class RationalFunction:
    """Quotient of two real polynomials, ascending coefficient tuples.

    No common-factor removal is attempted at construction: numerical gcd is
    ill-posed, and callers that know the factor structure (the closed-form
    equiripple constructions do) cancel explicitly.  Evaluation raises
    PoleSignal on an exact denominator zero; eval_pair returns the
    projective pair (p(x), q(x)) and never fails, which is what winding
    computations want.
    """

    __slots__ = ("num", "den", "support_nodes")

    def __init__(self, num, den, support_nodes=None):
        self.num = as_coeffs(num)
        self.den = as_coeffs(den)
        if len(self.den) == 1 and self.den[0] == 0:
            raise DomainError("denominator is identically zero")
        # Optional (node, value, weight) triples from the construction grid;
        # carried for diagnostics and cross-validated via check_support_nodes.
        self.support_nodes = tuple(support_nodes) if support_nodes else None

    def check_support_nodes(self, tol):
        """Verify the coefficient form reproduces the stored node values."""
        if not self.support_nodes:
            return True
        for node, value, _ in self.support_nodes:
            if abs(self(node) - value) > tol * max(1, abs(value)):
                raise DomainError(
                    f"coefficient and node representations disagree at x = {node}"
                )
        return True

    @property
    def degree(self) -> int:
        return max(len(self.num), len(self.den)) - 1

    @property
    def degree_num(self) -> int:
        return len(self.num) - 1

    @property
    def degree_den(self) -> int:
        return len(self.den) - 1

    def __repr__(self):
        return f"RationalFunction(num={self.num!r}, den={self.den!r})"

    def __call__(self, x):
        p, q = polyval(self.num, x), polyval(self.den, x)
        if q == 0:
            if p == 0:
                raise DomainError(f"0/0 at x = {x}; numerator and denominator share a root")
            raise PoleSignal(f"denominator vanishes at x = {x}", where=x)
        return p / q

    def eval_pair(self, x):
        return polyval(self.num, x), polyval(self.den, x)

    def derivative_numerator(self):
        """Coefficients of p'q - pq', the numerator of the derivative."""
        return polysub(
            polymul(polyder(self.num), self.den), polymul(self.num, polyder(self.den))
        )

    def compose_mobius(self, m: Mobius) -> "RationalFunction":
        """R(m(x)) as a rational function.

        Both entries are cleared by the same power of (c x + d), so the pair
        stays a ratio of honest polynomials of degree at most deg R.
        """
        n = self.degree
        up = (m.b, m.a)
        down = (m.d, m.c)
        num = (mpf(0),)
        den = (mpf(0),)
        for j in range(n + 1):
            weight = polymul(linear_power(*up, j), linear_power(*down, n - j))
            if j < len(self.num):
                num = polyadd(num, polyscale(weight, self.num[j]))
            if j < len(self.den):
                den = polyadd(den, polyscale(weight, self.den[j]))
        return RationalFunction(num, den)

    def mobius_of_value(self, m: Mobius) -> "RationalFunction":
        """m(R(x)): a projective change of the value axis."""
        num = polyadd(polyscale(self.num, m.a), polyscale(self.den, m.b))
        den = polyadd(polyscale(self.num, m.c), polyscale(self.den, m.d))
        return RationalFunction(num, den)

    def __mul__(self, other):
        if isinstance(other, RationalFunction):
            return RationalFunction(polymul(self.num, other.num), polymul(self.den, other.den))
        return RationalFunction(polyscale(self.num, mpf(other)), self.den)

    __rmul__ = __mul__

    def normalized(self) -> "RationalFunction":
        """Scale both entries so the largest-magnitude denominator
        coefficient becomes +1; a stable canonical form for reporting."""
        pivot = max(self.den, key=abs)
        return RationalFunction(
            tuple(c / pivot for c in self.num), tuple(c / pivot for c in self.den)
        )
