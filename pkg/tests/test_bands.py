"""Checks for band geometry, sign classes, and problem-frame conversions.

Cross-ratio reference values are exact rational arithmetic done by hand
(kappa = 4, 9, 15 for the worked window examples, 25.5025 for theta = 0.1),
as is theta = 2 - sqrt(3) at mu = 1/2.  The expected sign-class bits for
the low-degree rationals were derived by tracking atan(R) along each gap on
paper: a zero crossing keeps the window copy, an odd pole count swaps it.

Every comparison constant is parsed or derived under raised working
precision (see test_elliptic for the 53-bit parsing trap).
"""

from __future__ import annotations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from mpmath import mp, mpf

from multiband.bands import (
    PASS,
    STOP,
    Band,
    BandSystem,
    RangeSystem,
    SettingSolution,
    SignClass,
    apply_projective,
    as_extended,
    chart_rotation,
    convert_setting,
    cross_ratio,
    cross_ratio_points,
    indicator,
    kappa_from_theta,
    mu_from_theta,
    phi_of,
    sign_class_of,
    theta_from_kappa,
    theta_from_mu,
    x_of,
)
from multiband.elliptic import Precision
from multiband.errors import AmbiguityError, DomainError
from multiband.rational import Mobius, RationalFunction

P256 = Precision(256)
TOL = mpf(2) ** -200


def two_band_system():
    return BandSystem([Band(-2, -1, STOP), Band(1, 2, PASS)])


def wide_ranges():
    # Generous windows around ±1.4ish band midpoint values.
    with mp.workprec(280):
        return RangeSystem(mpf(-2.2), mpf(-0.8), mpf(0.8), mpf(2.2))


def test_chart_roundtrip():
    with mp.workprec(220):
        for xs in ("0", "1", "-3.25", "17", "-0.004"):
            x = mpf(xs)
            assert abs(x_of(phi_of(x)) - x) < mpf(2) ** -210 * max(1, abs(x))
        assert phi_of(mp.inf) == +mp.pi
        assert as_extended("inf") == mp.inf
        assert as_extended(mpf("-inf")) == mp.inf
        with pytest.raises(DomainError):
            as_extended(mp.nan)


def test_chart_rotation_sends_target_outward():
    with mp.workprec(256):
        rot = chart_rotation(phi_of(mpf(3)))
        assert rot.preserves_orientation
        # The designated point lands far out; nearby points stay finite and
        # keep their counterclockwise order.
        assert abs(rot(mpf(3))) > mpf(10) ** 50
        a, b = rot(mpf(2.5)), rot(mpf(3.5))
        assert mp.isfinite(a) and mp.isfinite(b)
        span = phi_of(b) - phi_of(a)
        assert span < 0 or span > mp.pi  # image arc runs through infinity
        # Rotating the point already at infinity is the identity.
        ident = chart_rotation(mp.pi)
        assert ident(mpf(5)) == 5
        assert ident(mp.inf) == mp.inf


def test_cross_ratio_worked_examples():
    with mp.workprec(280):
        mu = mpf(1) / 2
        f = RangeSystem.from_mu(mu)
        assert abs(cross_ratio(f) - 4) < TOL  # 1 / mu^2

        nine = cross_ratio_points(mpf(-2), mpf(-1), mpf(1), mpf(2))
        assert abs(nine - 9) < TOL

        fifteen = cross_ratio_points(mpf(-2), mpf(-1), mpf(1), mpf(1.5))
        assert abs(fifteen - 15) < TOL
        assert fifteen > nine  # shrinking a window always raises kappa


def test_cross_ratio_infinite_branches():
    with mp.workprec(280):
        t = mpf(1) / 2
        f = RangeSystem.from_theta(t)
        # Window through infinity handled by the exact limit branch.
        target = kappa_from_theta(t)
        assert abs(cross_ratio(f) - target) < TOL
        assert abs(target - mpf("1.5625")) < TOL
        # Each argument position accepts the infinite point.
        vals = [
            cross_ratio_points(mp.inf, mpf(-1), mpf(1), mpf(2)),
            cross_ratio_points(mpf(-2), mp.inf, mpf(1), mpf(2)),
            cross_ratio_points(mpf(-2), mpf(-1), mp.inf, mpf(2)),
            cross_ratio_points(mpf(-2), mpf(-1), mpf(1), mp.inf),
        ]
        for v in vals:
            assert mp.isfinite(v)
        with pytest.raises(DomainError):
            cross_ratio_points(mp.inf, mpf(0), mp.inf, mpf(1))
        with pytest.raises(DomainError):
            cross_ratio_points(mpf(1), mpf(1), mpf(2), mpf(3))


def test_frame_constant_conversions():
    with mp.workprec(280):
        # theta = 0.1: kappa = ((0.1 + 10) / 2)^2 = 25.5025 exactly.
        k = kappa_from_theta(mpf(1) / 10)
        assert abs(k - mpf("25.5025")) < TOL
        assert abs(theta_from_kappa(k) - mpf(1) / 10) < TOL

        # mu = 1/2 pairs with theta = 2 - sqrt(3).
        th = theta_from_mu(mpf(1) / 2)
        assert abs(th - (2 - mp.sqrt(3))) < TOL
        assert abs(mu_from_theta(th) - mpf(1) / 2) < TOL

        # The deviation relation: 1/mu = (theta + 1/theta) / 2, and kappa is
        # its square.
        for ts in ("0.05", "0.31", "0.77", "0.99"):
            t = mpf(ts)
            mu = mu_from_theta(t)
            assert abs(1 / mu - (t + 1 / t) / 2) < TOL
            assert abs(kappa_from_theta(t) - 1 / mu**2) < TOL * 1 / mu**2

        assert theta_from_mu(mpf(1)) == 1
        with pytest.raises(DomainError):
            kappa_from_theta(mpf(1))
        with pytest.raises(DomainError):
            theta_from_kappa(mpf(1))


def test_range_system_validation():
    RangeSystem(-2, -1, 1, 2)
    with pytest.raises(DomainError):
        RangeSystem(-1, -2, 1, 2)  # endpoints of F- listed clockwise
    with pytest.raises(DomainError):
        RangeSystem(-2, 1, -1, 2)  # interleaved windows
    with pytest.raises(DomainError):
        RangeSystem(-2, -1, 1, 1)
    with pytest.raises(DomainError):
        RangeSystem.from_theta(mpf(2))
    with pytest.raises(DomainError):
        RangeSystem.from_mu(mpf(0))
    f = RangeSystem.from_mu(mpf(1) / 4)
    assert f.window(PASS) == (f.plus_lo, f.plus_hi)
    assert f.window(STOP) == (f.minus_lo, f.minus_hi)
    with pytest.raises(DomainError):
        f.window("other")


def test_beta_windows_canonical_placement():
    with mp.workprec(256):
        f = RangeSystem.from_mu(mpf(1) / 2)
        w = f.beta_windows()
        lo, hi = w[STOP]
        assert abs(lo - mp.atan(mpf(-1.5))) < TOL
        assert abs(hi - mp.atan(mpf(-0.5))) < TOL
        c_minus = (lo + hi) / 2
        c_plus = (w[PASS][0] + w[PASS][1]) / 2
        assert 0 < c_plus - c_minus < mp.pi

        g = RangeSystem.from_theta(mpf(1) / 2)
        wg = g.beta_windows()
        # F- runs through infinity, centred on the infinite value.
        assert abs((wg[STOP][0] + wg[STOP][1]) / 2 - mp.pi / 2) < TOL
        cg = (wg[PASS][0] + wg[PASS][1]) / 2
        assert 0 < cg - mp.pi / 2 < mp.pi


def test_band_basics():
    with pytest.raises(DomainError):
        Band(1, 2, "other")
    with pytest.raises(DomainError):
        Band(1, 1, PASS)
    b = Band(1, 2, PASS)
    assert b.finite and b.sign == 1
    tol = mpf(2) ** -180
    assert b.contains(1.5)
    assert b.contains(1, tol=tol) and b.contains(2, tol=tol)
    assert not b.contains(3)
    assert b.contains(b.midpoint())

    wrap = Band(2, -2, STOP)
    assert not wrap.finite and wrap.sign == -1
    assert wrap.contains("inf")
    assert wrap.contains(5) and wrap.contains(-3)
    assert not wrap.contains(0)
    assert wrap.midpoint() == mp.inf or abs(wrap.midpoint()) > mpf(10) ** 50

    half_line = Band(1, "inf", PASS)
    assert not half_line.finite
    assert half_line.contains(100) and half_line.contains(mp.inf, tol=tol)
    assert not half_line.contains(0)


def test_chebyshev_grid():
    with mp.workprec(220):
        b = Band(-1, 3, PASS)
        g = b.chebyshev_grid(9)
        assert len(g) == 9
        assert g[0] == -1 and g[-1] == 3
        assert all(g[i] < g[i + 1] for i in range(8))
        # Lobatto nodes crowd toward the endpoints.
        assert (g[1] - g[0]) < (g[5] - g[4])
    with pytest.raises(DomainError):
        Band(2, -2, STOP).chebyshev_grid(5)
    with pytest.raises(DomainError):
        b.chebyshev_grid(1)


def test_band_system_validation():
    with pytest.raises(DomainError):
        BandSystem([Band(1, 2, PASS)])
    with pytest.raises(DomainError):
        BandSystem([Band(1, 2, PASS), Band(3, 4, PASS)])  # one kind only
    with pytest.raises(DomainError):
        BandSystem([Band(1, 2, PASS), Band(1.5, 3, STOP)])  # overlap
    with pytest.raises(DomainError):
        BandSystem([Band(1, 2, PASS), Band(2, 3, STOP)])  # touching
    with pytest.raises(DomainError):
        # Listed out of counterclockwise order.
        BandSystem([Band(1, 2, PASS), Band(5, 6, STOP), Band(3, 4, PASS)])
    with pytest.raises(DomainError):
        # Second band swallows the start of the first.
        BandSystem([Band(1, 2, PASS), Band(3, 1.5, STOP)])
    # Wrapping the left band around as "later" in ccw order is legitimate.
    BandSystem([Band(1, 2, PASS), Band(-2, -1, STOP)])
    # A band through infinity participates like any other arc.
    BandSystem([Band(2, -2, STOP), Band(-1, 1, PASS)])


def test_band_system_gaps_and_indicator():
    sys2 = two_band_system()
    assert sys2.m == 2
    assert sys2.all_finite()
    assert indicator(mpf(1.5), sys2) == 1
    assert indicator(mpf(-1.5), sys2) == -1
    assert indicator(mpf(0), sys2) is None
    assert indicator(mp.inf, sys2) is None
    assert sys2.band_of(mpf(-1.2)) == 0 and sys2.band_of(mpf(1.2)) == 1

    with mp.workprec(256):
        # Bands at ±[1, 2]: the gap through zero and the gap through
        # infinity; by symmetry the midpoints are 0 and infinity.
        j, mid_phi, width = sys2.largest_gap()
        inner = sys2.gap_midpoint(0)
        outer = sys2.gap_midpoint(1)
        assert abs(inner) < mpf(2) ** -200 or abs(outer) < mpf(2) ** -200
        far = outer if abs(inner) < 1 else inner
        assert far == mp.inf or abs(far) > mpf(10) ** 50
        assert width > 0

    infinite = BandSystem([Band(2, -2, STOP), Band(-1, 1, PASS)])
    assert not infinite.all_finite()
    assert infinite.indicator(mp.inf) == -1
    assert infinite.indicator(mpf(0)) == 1
    assert infinite.indicator(mpf(1.5)) is None


def test_sign_class_bits():
    classes = list(SignClass.enumerate(3, 5))
    assert len(classes) == 4
    for c in classes:
        assert c.m == 3
        assert sum(c.full_bits()) % 2 == 1
        assert c.wrap_bit == c.full_bits()[-1]
    assert [c.sigma for c in classes] == [(0, 0), (0, 1), (1, 0), (1, 1)]

    c = SignClass.from_full_bits((1, 0, 1), 2)
    assert c.sigma == (1, 0) and c.wrap_bit == 1
    assert str(c) == "101"
    with pytest.raises(DomainError):
        SignClass.from_full_bits((1, 0, 0), 2)
    with pytest.raises(DomainError):
        SignClass((0, 2), 1)
    with pytest.raises(DomainError):
        list(SignClass.enumerate(1, 3))


def test_sign_class_of_identity_function():
    # R(x) = x maps each band onto its own window; the inner gap crosses the
    # zero, the wrap gap crosses the pole at infinity.
    r = RationalFunction((0, 1), (1,))
    cls = sign_class_of(r, two_band_system(), wide_ranges(), P256)
    assert cls.sigma == (0,)
    assert cls.degree_parity == 1
    assert cls.full_bits() == (0, 1)


def test_sign_class_of_reciprocal():
    # R(x) = 1/x: pole in the inner gap, zero at infinity in the wrap gap.
    with mp.workprec(280):
        ranges = RangeSystem(mpf(-1.2), mpf(-0.3), mpf(0.3), mpf(1.2))
    r = RationalFunction((1,), (0, 1))
    cls = sign_class_of(r, two_band_system(), ranges, P256)
    assert cls.full_bits() == (1, 0)


def test_sign_class_with_band_through_infinity():
    # 1/x again, but now the passband is the arc through infinity and the
    # stopband straddles the pole; sampling the pole itself must not hurt.
    system = BandSystem([Band(2, -2, PASS), Band(-1, 1, STOP)])
    with mp.workprec(280):
        ranges = RangeSystem.from_theta(mpf(1) / 2)
    r = RationalFunction((1,), (0, 1))
    cls = sign_class_of(r, system, ranges, P256)
    assert cls.full_bits() == (0, 1)
    assert cls.degree_parity == 1


def test_sign_class_sees_leading_coefficient():
    # A tiny quadratic term moves the function's zero to x = -2^20 inside
    # the wrap gap and doubles the pole at infinity; the class parity must
    # follow the true degree, not the visual proximity to R(x) = x.
    with mp.workprec(280):
        eps = mpf(2) ** -20
        r = RationalFunction((mpf(0), mpf(1), eps), (mpf(1),))
    cls = sign_class_of(r, two_band_system(), wide_ranges(), P256)
    assert cls.degree_parity == 0
    assert cls.full_bits() == (0, 0)


def test_sign_class_window_violation():
    system = BandSystem([Band(-2, -1, STOP), Band(2, 3, PASS)])
    r = RationalFunction((0, 1), (1,))
    with mp.workprec(280):
        ranges = RangeSystem.from_mu(mpf(1) / 2)
    with pytest.raises(DomainError):
        sign_class_of(r, system, ranges, P256)


def test_sign_class_common_root_is_ambiguous():
    # x^2 / x hits an exact 0/0 at the inner gap midpoint.
    r = RationalFunction((0, 0, 1), (0, 1))
    with pytest.raises(AmbiguityError):
        sign_class_of(r, two_band_system(), wide_ranges(), P256)


def test_apply_projective_translation():
    with mp.workprec(256):
        t = Mobius(1, 3, 0, 1)
        sys2 = apply_projective(t, two_band_system())
        assert sys2.bands[0].lo == 1 and sys2.bands[0].hi == 2
        assert sys2.bands[1].lo == 4 and sys2.bands[1].hi == 5
        assert sys2.bands[0].kind == STOP

        f = wide_ranges()
        g = apply_projective(t, f)
        assert abs(cross_ratio(g) - cross_ratio(f)) < TOL

        cls = SignClass((0,), 1)
        assert apply_projective(t, cls, band_kinds=(STOP, PASS)) == cls


def test_apply_projective_reversal():
    with mp.workprec(256):
        v = Mobius(-1, 0, 0, 1)
        assert not v.preserves_orientation

        sys2 = apply_projective(v, two_band_system())
        # stop[-2,-1], pass[1,2] reflects to stop[1,2], pass[-2,-1].
        assert sys2.bands[0].kind == STOP
        assert sys2.bands[0].lo == 1 and sys2.bands[0].hi == 2
        assert sys2.bands[1].kind == PASS
        assert sys2.bands[1].lo == -2 and sys2.bands[1].hi == -1

        f = wide_ranges()
        g = apply_projective(v, f)
        assert abs(cross_ratio(g) - cross_ratio(f)) < TOL

        # Both adjacencies here join different kinds, so a reversing value
        # map flips both gap bits.
        cls = SignClass((0,), 1)
        flipped = apply_projective(v, cls, band_kinds=(STOP, PASS))
        assert flipped.full_bits() == (1, 0)

        same_kind = SignClass((0, 1), 0)
        moved = apply_projective(v, same_kind, band_kinds=(STOP, STOP, PASS))
        # stop|stop adjacency keeps its bit; the two mixed ones flip.
        assert moved.full_bits() == (0, 0, 0)


def test_value_reversal_matches_recomputed_class():
    # Flip rule cross-check: transform the function and the windows by the
    # same reversing value map and recompute the class from scratch.
    with mp.workprec(280):
        v = Mobius(-1, 0, 0, 1)
        system = two_band_system()
        ranges = wide_ranges()
        r = RationalFunction((0, 1), (1,))
        direct = sign_class_of(r, system, ranges, P256)
        moved = sign_class_of(
            r.mobius_of_value(v), system, apply_projective(v, ranges), P256
        )
        kinds = tuple(b.kind for b in system)
        assert moved == apply_projective(v, direct, band_kinds=kinds)


def test_apply_projective_errors():
    t = Mobius(1, 0, 0, 1)
    with pytest.raises(DomainError):
        apply_projective(t, SignClass((0,), 1))
    with pytest.raises(DomainError):
        apply_projective(t, SignClass((0,), 1), band_kinds=(PASS,))
    with pytest.raises(DomainError):
        apply_projective(t, "not geometry")


def test_setting_solution_validation():
    r = RationalFunction((0, 1), (1,))
    with pytest.raises(DomainError):
        SettingSolution(5, r, mpf(1) / 2)
    with pytest.raises(DomainError):
        SettingSolution(3, r, mpf(0))
    with pytest.raises(DomainError):
        SettingSolution(3, r, mpf(2))
    sol = SettingSolution(3, r, mpf(1) / 4)
    assert sol.theta(P256) == mpf(1) / 4


def test_convert_setting_deviations_and_roundtrip():
    with mp.workprec(300):
        r = RationalFunction((mpf(0), mpf(1)), (mpf(1),))
        theta = mpf(1) / 4
        sol3 = SettingSolution(3, r, theta)

        sol1 = convert_setting(sol3, 1, P256)
        assert abs(sol1.deviation - theta**2) < TOL
        assert sol1.func is r  # frames 1-3 share the function

        sol2 = convert_setting(sol3, 2, P256)
        assert abs(sol2.deviation - theta) < TOL

        sol4 = convert_setting(sol3, 4, P256)
        # mu = 2 theta / (1 + theta^2) = 8/17 for theta = 1/4.
        assert abs(sol4.deviation - mpf(8) / 17) < TOL
        assert abs(sol4.theta(P256) - theta) < TOL
        assert abs(sol3.mu(P256) - sol4.deviation) < TOL

        # The value-frame map sends the windows onto each other: level theta
        # goes to 1 + mu, level -theta to 1 - mu, level 1/theta to -1 - mu.
        mu = sol4.deviation
        for x_at, lvl3, lvl4 in (
            (theta, theta, 1 + mu),
            (-theta, -theta, 1 - mu),
            (1 / theta, 1 / theta, -1 - mu),
            (-1 / theta, -1 / theta, -1 + mu),
        ):
            # R(x) = x takes the value lvl3 at x = lvl3; its frame-4 image
            # must take lvl4 there.
            assert abs(sol4.func(x_at) - lvl4) < TOL

        back = convert_setting(sol4, 3, P256)
        assert abs(back.deviation - theta) < TOL
        a, b = back.func.normalized(), r.normalized()
        assert len(a.num) == len(b.num) and len(a.den) == len(b.den)
        for c, d in zip(a.num + a.den, b.num + b.den):
            assert abs(c - d) < TOL

        # Conversion between frames 1 and 4 composes the same pieces.
        sol14 = convert_setting(sol1, 4, P256)
        assert abs(sol14.deviation - sol4.deviation) < TOL
        assert convert_setting(sol3, 3, P256) is sol3


@settings(max_examples=150, deadline=None)
@given(
    st.tuples(
        st.floats(min_value=-4, max_value=4),
        st.floats(min_value=-4, max_value=4),
        st.floats(min_value=-4, max_value=4),
        st.floats(min_value=-4, max_value=4),
    )
)
def test_cross_ratio_projective_invariance(entries):
    a, b, c, d = entries
    if abs(a * d - b * c) < 1e-3:
        return
    with mp.workprec(256):
        t = Mobius(a, b, c, d)
        f = RangeSystem.from_mu(mpf("0.37"))
        g = apply_projective(t, f)
        kf, kg = cross_ratio(f), cross_ratio(g)
        assert abs(kg - kf) < mpf(2) ** -180 * kf


@settings(max_examples=80, deadline=None)
@given(st.floats(min_value=1e-6, max_value=1 - 1e-9))
def test_theta_kappa_mu_roundtrips(tf):
    with mp.workprec(200):
        t = mpf(tf)
        assert abs(theta_from_kappa(kappa_from_theta(t)) - t) < mpf(2) ** -150
        assert abs(theta_from_mu(mu_from_theta(t)) - t) < mpf(2) ** -140 * t
