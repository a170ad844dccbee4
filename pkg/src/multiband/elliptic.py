"""Arbitrary-precision elliptic layer.

Everything downstream (closed-form equiripple fractions, deviation formulas,
certificates) rests on four primitives evaluated at configurable binary
precision: the arithmetic-geometric mean, complete elliptic integrals, the
theta_3 null value, and the Jacobi functions sn/cn/dn.  Algorithms follow the
classical AGM / descending-Landen route (Abramowitz & Stegun ch. 16-17, DLMF
22.7) because it stays uniformly stable across the modulus range, including
k -> 1 where series in k fail.

mpmath supplies the big-float scalars; the recursions here are self-contained
so their error behaviour stays under our control.
"""

from __future__ import annotations

from dataclasses import dataclass

from mpmath import mp, mpc, mpf

from .errors import DomainError, PoleSignal

# Extra working bits beyond the caller's request; final results are rounded
# back to the requested width.
GUARD_BITS = 24


@dataclass(frozen=True)
class Precision:
    """Binary working precision for every operation in the package.

    bits >= 53 so that double precision is the floor, not the ceiling.  The
    derived thresholds are package-wide conventions: pole and membership
    tests at the half-precision scale, root clustering at the third.
    """

    bits: int = 256

    def __post_init__(self):
        if not isinstance(self.bits, int) or self.bits < 53:
            raise DomainError(f"precision must be an integer >= 53 bits, got {self.bits!r}")

    def work(self, extra: int = GUARD_BITS):
        """Context manager setting mpmath to bits + extra."""
        return mp.workprec(self.bits + extra)

    @property
    def eps(self) -> mpf:
        with mp.workprec(self.bits):
            return mpf(2) ** (1 - self.bits)

    @property
    def pole_threshold(self) -> mpf:
        with mp.workprec(self.bits):
            return mpf(2) ** (-(self.bits // 2))

    @property
    def membership_threshold(self) -> mpf:
        return self.pole_threshold

    @property
    def cluster_threshold(self) -> mpf:
        with mp.workprec(self.bits):
            return mpf(2) ** (-(self.bits // 3))


DEFAULT_PRECISION = Precision(256)


def _round(x, prec: Precision):
    """Round a work-precision result to the caller's requested width."""
    with mp.workprec(prec.bits):
        return +x


def _as_real(x, name: str) -> mpf:
    v = mpf(x)
    if not mp.isfinite(v):
        raise DomainError(f"{name} must be finite, got {x!r}")
    return v


def _as_modulus(k) -> mpf:
    v = mpf(k)
    if not (0 < v < 1):
        raise DomainError(f"modulus k must lie in the open interval (0, 1), got {k!r}")
    return v


def _imag_tau(tau) -> mpf:
    """Validate a purely imaginary tau with positive imaginary part, return |tau|."""
    t = mpc(tau)
    if t.real != 0:
        raise DomainError(f"tau must be purely imaginary, got {tau!r}")
    if not (t.imag > 0):
        raise DomainError(f"tau must have positive imaginary part, got {tau!r}")
    return mpf(t.imag)


# ---------------------------------------------------------------------------
# Raw kernels.  These assume mp.prec is already set and never touch it.
# ---------------------------------------------------------------------------


def _agm_chain_raw(a: mpf, b: mpf):
    if b > a:
        a, b = b, a
    chain = [(+a, +b)]
    stop = mpf(2) ** (-(mp.prec - 8))
    while abs(a - b) > a * stop:
        a, b = (a + b) / 2, mp.sqrt(a * b)
        chain.append((+a, +b))
    return chain


def _agm_raw(a: mpf, b: mpf) -> mpf:
    return _agm_chain_raw(a, b)[-1][0]


def _complement_raw(k: mpf) -> mpf:
    # sqrt((1-k)(1+k)) rather than sqrt(1-k^2): no cancellation near k = 1.
    return mp.sqrt((1 - k) * (1 + k))


def _quarter_periods_raw(k: mpf):
    kc = _complement_raw(k)
    return mp.pi / (2 * _agm_raw(mpf(1), kc)), mp.pi / (2 * _agm_raw(mpf(1), k))


def _theta_series(q, kind: int) -> mpf:
    """Null values theta_2/3/4 at real nome q in (0, 1), by direct summation.

    Terms fall like q^(j^2); the running product update keeps each term one
    multiply.  Callers guarantee q is small enough to converge fast (the
    modulus helpers invert tau < 1 through the modular transformation).
    """
    stop = mpf(2) ** (-(mp.prec + 8))
    if kind == 2:
        # 2 q^(1/4) sum_{j>=0} q^(j(j+1))
        total = mpf(1)
        term = mpf(1)
        j = 1
        while True:
            term *= q ** (2 * j)  # q^(j(j+1)) from q^((j-1)j)
            total += term
            if term < stop:
                break
            j += 1
            if j > 10 ** 6:
                raise DomainError("theta_2 series failed to converge; tau too close to 0")
        return 2 * mp.root(q, 4) * total
    total = mpf(1)
    term = mpf(1)
    j = 1
    sign = -1 if kind == 4 else 1
    while True:
        term *= q ** (2 * j - 1)  # q^(j^2) from q^((j-1)^2)
        total += 2 * (sign ** j) * term
        if term < stop:
            break
        j += 1
        if j > 10 ** 6:
            raise DomainError("theta series failed to converge; tau too close to 0")
    return total


def _k_from_ratio_raw(t: mpf) -> mpf:
    """Modulus with K'/K = t, through theta null values.

    For t < 1 the series at q = exp(-pi t) crawls, so use the modular
    inversion k(i t) = k'(i / t) and read k off theta_4/theta_3 instead;
    both branches avoid the cancellation-prone sqrt(1 - k'^2).
    """
    if t >= 1:
        q = mp.exp(-mp.pi * t)
        return (_theta_series(q, 2) / _theta_series(q, 3)) ** 2
    q = mp.exp(-mp.pi / t)
    return (_theta_series(q, 4) / _theta_series(q, 3)) ** 2


def _sn_cn_dn_real_raw(u: mpf, k: mpf):
    """Jacobi functions for real argument at the current working precision.

    Descending Landen until the modulus is negligible, sine base case with
    the O(k^2) correction (A&S 16.13), then the ascending recombination
    (DLMF 22.7.2-4).  dn comes from its defining identity; it is positive
    for real u so the square root is safe.
    """
    big_k, _ = _quarter_periods_raw(k)
    period = 4 * big_k
    if abs(u) > period:
        u = mp.fmod(u, period)

    floor = mpf(2) ** (-(mp.prec + 16) // 4)
    moduli = []
    ki = k
    while ki > floor:
        kci = _complement_raw(ki)
        ki = (1 - kci) / (1 + kci)
        moduli.append(ki)
        if len(moduli) > mp.prec:
            raise DomainError("Landen descent failed to converge")

    un = u
    for ki in moduli:
        un /= (1 + ki)

    kn = moduli[-1] if moduli else k
    s, c = mp.sin(un), mp.cos(un)
    corr = (kn * kn / 4) * (un - s * c)
    s, c = s - corr * c, c + corr * s

    for ki in reversed(moduli):
        d = mp.sqrt(1 - ki * ki * s * s)
        a = 1 + ki * s * s
        s, c = (1 + ki) * s / a, c * d / a

    d = mp.sqrt(1 - k * k * s * s)
    return s, c, d


# ---------------------------------------------------------------------------
# Public surface.
# ---------------------------------------------------------------------------


def agm_chain(a, b, prec: Precision = DEFAULT_PRECISION):
    """Full AGM iteration trace [(a_0, b_0), (a_1, b_1), ...] with a_i >= b_i.

    Exposed so the monotone-bracketing invariant (b_i increasing, a_i
    decreasing, both trapping the limit) can be asserted step by step.
    """
    a = _as_real(a, "a")
    b = _as_real(b, "b")
    if a <= 0 or b <= 0:
        raise DomainError("agm requires strictly positive arguments")
    with prec.work():
        chain = _agm_chain_raw(a, b)
    return [(_round(x, prec), _round(y, prec)) for x, y in chain]


def agm(a, b, prec: Precision = DEFAULT_PRECISION) -> mpf:
    """Arithmetic-geometric mean of two positive reals."""
    return agm_chain(a, b, prec)[-1][0]


@dataclass(frozen=True)
class QuarterPeriods:
    """K and K' for a modulus k; K'/K equals |tau| of the associated lattice."""

    K: mpf
    K_prime: mpf

    @property
    def ratio(self) -> mpf:
        return self.K_prime / self.K


def complete_elliptic(k, prec: Precision = DEFAULT_PRECISION) -> QuarterPeriods:
    """Complete elliptic integrals K(k), K'(k) via the AGM."""
    k = _as_modulus(k)
    with prec.work():
        big_k, big_kp = _quarter_periods_raw(k)
    return QuarterPeriods(_round(big_k, prec), _round(big_kp, prec))


def theta3(tau, prec: Precision = DEFAULT_PRECISION) -> mpf:
    """theta_3 null value by q-series, q = exp(i pi tau), tau purely imaginary.

    Ties the theta and AGM routes together through (pi/2) theta_3(tau)^2 =
    K(k(tau)), which the tests assert.
    """
    t = _imag_tau(tau)
    with prec.work():
        q = mp.exp(-mp.pi * t)
        val = _theta_series(q, 3)
    return _round(val, prec)


@dataclass(frozen=True)
class EllipticModulus:
    """A modulus k bundled with its complement and period ratio tau = i K'/K.

    The fields are redundant by construction; carrying them together saves
    every caller from re-deriving the others and pins down which convention
    ("modulus", not parameter m = k^2) is in force.
    """

    k: mpf
    k_complement: mpf
    tau: mpc

    def __post_init__(self):
        if not (0 < self.k < 1) or not (0 < self.k_complement < 1):
            raise DomainError("modulus and complement must lie in (0, 1)")
        if self.tau.real != 0 or not (self.tau.imag > 0):
            raise DomainError("tau must be purely imaginary with positive imaginary part")

    @classmethod
    def from_k(cls, k, prec: Precision = DEFAULT_PRECISION) -> "EllipticModulus":
        k = _as_modulus(k)
        with prec.work():
            kc = _complement_raw(k)
            t = _agm_raw(mpf(1), kc) / _agm_raw(mpf(1), k)  # K'/K
        return cls(_round(k, prec), _round(kc, prec), mpc(0, _round(t, prec)))

    @classmethod
    def from_tau(cls, tau, prec: Precision = DEFAULT_PRECISION) -> "EllipticModulus":
        t = _imag_tau(tau)
        with prec.work():
            k = _k_from_ratio_raw(t)
            kc = _complement_raw(k)
        return cls(_round(k, prec), _round(kc, prec), mpc(0, _round(t, prec)))

    def scaled(self, factor: int, prec: Precision = DEFAULT_PRECISION) -> "EllipticModulus":
        """Modulus for factor * tau (stacking `factor` period rectangles)."""
        if not isinstance(factor, int) or factor < 1:
            raise DomainError("tau scale factor must be a positive integer")
        if factor == 1:
            return self
        return EllipticModulus.from_tau(mpc(0, self.tau.imag * factor), prec)


def landen_descend(k, prec: Precision = DEFAULT_PRECISION) -> mpf:
    """One descending Landen step: k -> (1 - k')/(1 + k').

    The argument transforms as u -> u / (1 + k_next); callers recombine with
    DLMF 22.7.2-4.  Exposed so the step can be checked against direct
    evaluation.
    """
    k = _as_modulus(k)
    with prec.work():
        kc = _complement_raw(k)
        nxt = (1 - kc) / (1 + kc)
    return _round(nxt, prec)


def jacobi_sn_cn_dn(u, k, prec: Precision = DEFAULT_PRECISION):
    """(sn, cn, dn) at real or complex u.

    Complex arguments split into real evaluations at moduli k and k'
    (A&S 16.21), so no complex square roots enter and the only failure mode
    is the genuine lattice pole u = i K' (mod 2K, 2i K'), reported as a
    PoleSignal once u comes within 2^(-bits/2) of it.  Complex u must stay
    within one period rectangle (|Re u| <= 4K, |Im u| <= 2K'); reduce first.
    Real u is reduced modulo 4K internally.
    """
    k = _as_modulus(k)
    with prec.work():
        uu = mpc(u)
        if uu.imag == 0:
            s, c, d = _sn_cn_dn_real_raw(mpf(uu.real), k)
            return _round(s, prec), _round(c, prec), _round(d, prec)

        kc = _complement_raw(k)
        big_k, big_kp = _quarter_periods_raw(k)
        x, y = mpf(uu.real), mpf(uu.imag)
        slack = 1 + mpf(2) ** (-(prec.bits // 2))
        if abs(x) > 4 * big_k * slack or abs(y) > 2 * big_kp * slack:
            raise DomainError(
                "complex argument outside one period rectangle; reduce modulo (4K, 2iK')"
            )

        # Distance to the nearest pole of sn: x = 0 (mod 2K), y = K' (mod 2K').
        dx = x - 2 * big_k * mp.nint(x / (2 * big_k))
        dy = (y - big_kp) - 2 * big_kp * mp.nint((y - big_kp) / (2 * big_kp))
        if mp.hypot(dx, dy) < prec.pole_threshold:
            raise PoleSignal("argument within pole-detection distance of i K'", where=mpc(x, y))

        s, c, d = _sn_cn_dn_real_raw(x, k)
        s1, c1, d1 = _sn_cn_dn_real_raw(y, kc)
        den = c1 * c1 + k * k * s * s * s1 * s1
        if den == 0:
            raise PoleSignal("argument hit a lattice pole exactly", where=mpc(x, y))
        sn = mpc(s * d1, c * d * s1 * c1) / den
        cn = mpc(c * c1, -(s * d * s1 * d1)) / den
        dn = mpc(d * c1 * d1, -(k * k * s * c * s1)) / den
        return _round(sn, prec), _round(cn, prec), _round(dn, prec)


def rectangle_map(u, tau, prec: Precision = DEFAULT_PRECISION):
    """Conformal map of {|Re u| <= 1, 0 <= Im u <= |tau|} onto the closed
    upper half plane: u -> sn(K(tau) u | k(tau)).

    Normalization: -1, 0, 1 stay put and the corners +-1 + tau go to +-1/k.
    The boundary lands on the extended real line (the top-edge midpoint
    u = tau is the pole, raised as PoleSignal); boundary results are returned
    as real numbers, interior points as complex values with Im > 0.
    """
    t = _imag_tau(tau)
    with prec.work():
        uu = mpc(u)
        tol = mpf(2) ** (-(prec.bits // 2))
        if abs(uu.real) > 1 + tol or uu.imag < -tol or uu.imag > t + tol:
            raise DomainError(f"u = {u!r} lies outside the closed rectangle of height |tau| = {t}")
        k = _k_from_ratio_raw(t)
        big_k, _ = _quarter_periods_raw(k)
        arg = big_k * uu
        on_boundary = (
            abs(abs(uu.real) - 1) <= tol or abs(uu.imag) <= tol or abs(uu.imag - t) <= tol
        )
        if uu.imag == 0:
            sn, _, _ = jacobi_sn_cn_dn(mpf(arg.real), k, Precision(mp.prec))
            return _round(sn, prec)
        sn, _, _ = jacobi_sn_cn_dn(arg, k, Precision(mp.prec))
        sn = mpc(sn)
        if on_boundary:
            return _round(mpf(sn.real), prec)
        return _round(sn, prec)
