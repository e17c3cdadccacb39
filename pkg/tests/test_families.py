"""Closed-form periodic families cross-checked against map composition."""

from __future__ import annotations

import dataclasses
import math
from fractions import Fraction

import numpy as np
import pytest

from conftest import composed_trace
from imbilliards.curves import Ellipse
from imbilliards.dynamics import PhasePoint, StepData, jacobian_analytic
from imbilliards.errors import (
    BeyondXHat,
    InfeasibleStadium,
    MuTooLarge,
    NoConvergence,
    NotSymmetric,
    SingularJacobian,
    X0OutOfRange,
)
from imbilliards.families import (
    dual_orbit,
    ellipse4_reference_roots,
    ellipse4_root_report,
    find_periodic_newton,
    four_periodic_circle,
    four_periodic_ellipse,
    four_periodic_superellipse_axis,
    four_periodic_superellipse_diag,
    parabolic_roots,
    scan_family,
    superellipse_diag_ratio,
    superellipse_diag_tangential,
    three_periodic_circle,
    trace3_coefficients,
    trace3_symmetric,
    trace4_circle_quartic,
    trace4_ellipse,
    trace4_superellipse_axis,
    trace4_superellipse_diag,
    two_periodic_circle,
    two_periodic_ellipse,
    two_periodic_stadium,
    two_periodic_superellipse_axis,
    two_periodic_superellipse_diag,
    x_hat,
)
from imbilliards.stability import trace2_closed

SQRT3 = math.sqrt(3.0)


def assert_orbit_sane(orbit, n, rotation):
    assert orbit.n == n
    assert len(orbit.points) == n
    assert len(orbit.steps) == n
    assert len(orbit.boundary_points) == 2 * n
    assert orbit.residual <= 1e-7
    assert orbit.rotation == Fraction(*rotation)
    for d in orbit.steps:
        assert abs(d.ell2 - 2.0 * orbit.mu * math.sin(d.chi)) < 1e-9


def rel_close(x, y, tol):
    return abs(x - y) <= tol * max(1.0, abs(x), abs(y))


# ------------------------------------------------------------------
# 2-periodic families
# ------------------------------------------------------------------

def test_two_periodic_circle_is_parabolic_throughout():
    for mu in np.linspace(0.05, 0.95, 19):
        orbit, params = two_periodic_circle(1.0, float(mu))
        assert_orbit_sane(orbit, 2, (1, 2))
        for d in orbit.steps:
            assert abs(d.chi - 0.5 * math.pi) < 1e-9
            assert abs(math.cos(d.theta0) - mu) < 1e-9  # cos(theta0) = mu / R
        assert abs(params.alpha * params.beta - 4.0) < 1e-10
        assert params.beta == pytest.approx(params.delta, abs=1e-10)
        assert trace2_closed(params) == pytest.approx(2.0, abs=1e-9)
        assert composed_trace(orbit) == pytest.approx(2.0, abs=1e-7)


def test_two_periodic_circle_reference_values():
    orbit, params = two_periodic_circle(1.0, 0.5)
    # theta0 = pi/3, chord sqrt(3), alpha = 2 sqrt(3), beta = 2 cot(pi/3).
    assert orbit.steps[0].theta0 == pytest.approx(math.pi / 3.0, abs=1e-10)
    assert params.alpha == pytest.approx(2.0 * SQRT3, rel=1e-10)
    assert params.beta == pytest.approx(2.0 / SQRT3, rel=1e-10)


def test_two_periodic_circle_scale_equivariance():
    """alpha, beta, delta are dimensionless: scaling (R, mu) together must
    reproduce them exactly."""
    _, p1 = two_periodic_circle(1.0, 0.37)
    _, p2 = two_periodic_circle(2.0, 0.74)
    assert p1.alpha == pytest.approx(p2.alpha, rel=1e-9)
    assert p1.beta == pytest.approx(p2.beta, rel=1e-9)
    assert p1.delta == pytest.approx(p2.delta, rel=1e-9)


def test_two_periodic_circle_rejects_large_mu():
    with pytest.raises(MuTooLarge):
        two_periodic_circle(1.0, 1.0)
    with pytest.raises(MuTooLarge):
        two_periodic_circle(1.0, -0.1)


@pytest.mark.parametrize("a, b", [(2.0, 1.0), (3.0, 2.0), (1.5, 1.0)])
def test_two_periodic_ellipse_product_identities(a, b):
    """alpha*beta = 4a^2/b^2 on the major axis and 4b^2/a^2 on the minor."""
    for axis, product in (("major", 4.0 * a * a / (b * b)), ("minor", 4.0 * b * b / (a * a))):
        cap = 2.0 * a * b * b / (a * a + b * b) if axis == "major" else 2.0 * a * a * b / (a * a + b * b)
        cap = min(cap, b if axis == "major" else a)
        for mu in np.linspace(0.1, 0.95, 8) * cap:
            orbit, params = two_periodic_ellipse(a, b, float(mu), axis=axis)
            assert_orbit_sane(orbit, 2, (1, 2))
            assert abs(params.alpha * params.beta - product) < 1e-10 * max(1.0, product)
            assert params.beta == pytest.approx(params.delta, abs=1e-9)
            expected = (product - 2.0) ** 2 - 2.0
            assert rel_close(trace2_closed(params), expected, 1e-9)
            assert rel_close(composed_trace(orbit), expected, 1e-7)


def test_two_periodic_ellipse_reference_values():
    orbit, params = two_periodic_ellipse(2.0, 1.0, 0.5, axis="major")
    assert params.alpha == pytest.approx(4.0 * SQRT3, rel=1e-9)
    assert params.beta == pytest.approx(4.0 / SQRT3, rel=1e-9)
    assert trace2_closed(params) == pytest.approx(194.0, rel=1e-9)
    assert composed_trace(orbit) == pytest.approx(194.0, rel=1e-7)

    _, params = two_periodic_ellipse(2.0, 1.0, 0.5, axis="minor")
    assert trace2_closed(params) == pytest.approx(-1.0, abs=1e-9)


def test_two_periodic_ellipse_root_two_aspect_is_parabolic():
    """a^2 = 2 b^2 makes the minor-axis product alpha*beta = 2: trace -2."""
    a = math.sqrt(2.0)
    for mu in (0.2, 0.5, 0.8):
        _, params = two_periodic_ellipse(a, 1.0, mu, axis="minor")
        assert trace2_closed(params) == pytest.approx(-2.0, abs=1e-9)


def test_two_periodic_ellipse_feasibility():
    # (2, 1) major: arc re-entry caps mu at 2*a*b^2/(a^2+b^2) = 0.8 < b.
    with pytest.raises(InfeasibleStadium):
        two_periodic_ellipse(2.0, 1.0, 0.85, axis="major")
    with pytest.raises(MuTooLarge):
        two_periodic_ellipse(2.0, 1.0, 1.2, axis="major")
    with pytest.raises(MuTooLarge):
        two_periodic_ellipse(2.0, 1.0, 2.5, axis="minor")
    with pytest.raises(ValueError):
        two_periodic_ellipse(2.0, 1.0, 0.3, axis="diagonal")
    with pytest.raises(ValueError):
        two_periodic_ellipse(1.0, 2.0, 0.3)


@pytest.mark.parametrize("k", [2, 3])
def test_two_periodic_superellipse_axis_identities(k):
    for mu in np.linspace(0.15, 0.9, 8):
        orbit, params, (mu_star, mu_dstar) = two_periodic_superellipse_axis(k, float(mu))
        assert_orbit_sane(orbit, 2, (1, 2))
        w = mu ** (-2 * k) - 1.0
        assert rel_close(params.alpha, params.beta * w, 1e-9)
        assert rel_close(params.alpha * params.beta, 4.0 * w ** ((1.0 - k) / k), 1e-9)
        assert params.beta == pytest.approx(params.delta, rel=1e-9)
        expected = (params.alpha * params.beta - 2.0) ** 2 - 2.0
        assert rel_close(composed_trace(orbit), expected, 1e-7)


@pytest.mark.parametrize(
    "k, mu_star, mu_dstar",
    [
        (2, 0.668740304976422, 0.8408964152537145),
        (3, (2.0 ** 1.5 + 1.0) ** (-1.0 / 6.0), 2.0 ** (-1.0 / 6.0)),
        (4, (2.0 ** (4.0 / 3.0) + 1.0) ** (-1.0 / 8.0), 2.0 ** (-1.0 / 8.0)),
    ],
)
def test_superellipse_axis_thresholds(k, mu_star, mu_dstar):
    """mu* (tangential trace -2) and mu** (transversal trace +2) sit at
    the advertised closed forms; the trace confirms both."""
    _, _, (m1, m2) = two_periodic_superellipse_axis(k, 0.5)
    assert m1 == pytest.approx(mu_star, abs=1e-12)
    assert m2 == pytest.approx(mu_dstar, abs=1e-12)

    def closed_trace(mu: float) -> float:
        prod = 4.0 * (mu ** (-2 * k) - 1.0) ** ((1.0 - k) / k)
        return (prod - 2.0) ** 2 - 2.0

    assert closed_trace(m1) == pytest.approx(-2.0, abs=1e-9)
    assert closed_trace(m2) == pytest.approx(2.0, abs=1e-9)
    # Elliptic on both sides of mu*, hyperbolic beyond mu**.
    assert -2.0 < closed_trace(0.8 * m1) < 2.0
    assert -2.0 < closed_trace(0.5 * (m1 + m2)) < 2.0
    assert closed_trace(0.5 * (m2 + 1.0)) > 2.0


@pytest.mark.parametrize("k", [2, 3])
def test_two_periodic_superellipse_diag_trace_identities(k):
    q = 2.0 ** (-1.0 / (2 * k))
    for x0 in np.linspace(-0.95 * q, 0.95 * q, 9):
        orbit, params, f = two_periodic_superellipse_diag(k, float(x0))
        assert_orbit_sane(orbit, 2, (1, 2))
        t = trace2_closed(params)
        assert rel_close(t - 2.0, 16.0 * f * (f - 1.0), 1e-8)
        assert rel_close(t + 2.0, 4.0 * (2.0 * f - 1.0) ** 2, 1e-8)
        assert rel_close(composed_trace(orbit), t, 1e-7)
        # Verdict structure: hyperbolic iff f > 1 iff x0 > 0.
        if x0 > 1e-6:
            assert t > 2.0
        elif x0 < -1e-6:
            assert -2.0 <= t < 2.0


@pytest.mark.parametrize("k", [2, 3])
def test_superellipse_diag_ratio_limits(k):
    """f tends to 1/(2k-1) at x0 = -q and to 2k-1 at x0 = +q; at the
    endpoints themselves (where the chord degenerates and no orbit
    exists) the ratio function takes the limit values exactly."""
    q = 2.0 ** (-1.0 / (2 * k))
    assert superellipse_diag_ratio(k, -q) == pytest.approx(1.0 / (2 * k - 1), abs=1e-12)
    assert superellipse_diag_ratio(k, q) == pytest.approx(float(2 * k - 1), abs=1e-12)
    assert superellipse_diag_ratio(k, -q + 1e-8) == pytest.approx(1.0 / (2 * k - 1), abs=1e-6)
    assert superellipse_diag_ratio(k, q - 1e-8) == pytest.approx(float(2 * k - 1), abs=1e-6)
    _, _, f_mid = two_periodic_superellipse_diag(k, 0.0)
    assert f_mid == pytest.approx(1.0, abs=1e-12)
    # The orbit constructor reports the same ratio where both exist.
    _, _, f_orbit = two_periodic_superellipse_diag(k, -0.4 * q)
    assert f_orbit == pytest.approx(superellipse_diag_ratio(k, -0.4 * q), rel=1e-14)


def test_superellipse_diag_tangential_point():
    x_t, mu_t = superellipse_diag_tangential(2)
    assert x_t == pytest.approx(-0.37995997440465035, abs=1e-10)
    assert mu_t == pytest.approx(0.972065420906982, abs=1e-10)
    orbit, params, f = two_periodic_superellipse_diag(2, x_t)
    assert f == pytest.approx(0.5, abs=1e-12)
    assert trace2_closed(params) == pytest.approx(-2.0, abs=1e-9)
    assert composed_trace(orbit) == pytest.approx(-2.0, abs=1e-7)
    # k = 3 also has an interior tangential point in (-q, 0).
    x_t3, _ = superellipse_diag_tangential(3)
    assert -(2.0 ** (-1.0 / 6.0)) < x_t3 < 0.0


def test_two_periodic_superellipse_diag_domain():
    q = 2.0 ** (-0.25)
    for bad in (-q, q, 0.99, -1.5):
        with pytest.raises(X0OutOfRange):
            two_periodic_superellipse_diag(2, bad)


def test_two_periodic_stadium_sides_is_exactly_parabolic():
    for mu in (0.2, 0.5, 0.9):
        orbit, params = two_periodic_stadium(2.0, 1.0, mu, kind="sides")
        assert_orbit_sane(orbit, 2, (1, 2))
        assert params.beta == 0.0 and params.delta == 0.0
        assert trace2_closed(params) == 2.0
        assert composed_trace(orbit) == pytest.approx(2.0, abs=1e-9)
        for d in orbit.steps:
            assert abs(d.theta0 - 0.5 * math.pi) < 1e-9
            assert d.kappa0 == 0.0


def test_two_periodic_stadium_caps_is_hyperbolic():
    side, R = 2.0, 1.0
    for mu in np.linspace(0.05, 0.95, 10):
        orbit, params = two_periodic_stadium(side, R, float(mu), kind="caps")
        expected_alpha = side / mu + 2.0 * math.sqrt(R * R - mu * mu) / mu
        assert rel_close(params.alpha, expected_alpha, 1e-9)
        assert trace2_closed(params) > 2.0
        assert composed_trace(orbit) > 2.0


def test_two_periodic_stadium_feasibility():
    with pytest.raises(MuTooLarge):
        two_periodic_stadium(2.0, 1.0, 1.0, kind="sides")  # 2 mu = side
    with pytest.raises(MuTooLarge):
        two_periodic_stadium(2.0, 1.0, 1.0, kind="caps")
    with pytest.raises(ValueError):
        two_periodic_stadium(2.0, 1.0, 0.3, kind="diagonal")


# ------------------------------------------------------------------
# 3-periodic families
# ------------------------------------------------------------------

@pytest.mark.parametrize("rot, q", [("1/3", 1), ("2/3", 2)])
def test_three_periodic_circle_is_parabolic(rot, q):
    R = 1.0
    for mu in np.linspace(0.05, 0.95, 12):
        orbit, theta, trace = three_periodic_circle(R, float(mu), rot)
        assert_orbit_sane(orbit, 3, (q, 3))
        assert (q - 1) * math.pi / 3.0 < theta < q * math.pi / 3.0
        # Closed-form incidence angle.
        disc = math.sqrt(4.0 * R * R - 3.0 * mu * mu)
        sign = 1.0 if q == 1 else -1.0
        assert math.cos(theta) == pytest.approx((3.0 * mu + sign * disc) / (4.0 * R), abs=1e-10)
        # Re-entry relation satisfied.
        gap = math.sqrt(R * R + mu * mu - 2.0 * R * mu * math.cos(theta))
        assert abs(math.sin(q * math.pi / 3.0 - theta) * gap - mu * math.sin(theta)) < 1e-10
        assert trace == pytest.approx(2.0, abs=1e-7)
        assert composed_trace(orbit) == pytest.approx(2.0, abs=1e-7)
        # All three arcs sweep 2 chi = 2 q pi / 3.
        for d in orbit.steps:
            assert abs(d.chi - q * math.pi / 3.0) < 1e-9


def synthetic_cycle(thetas, chi, ell, mu, kappas):
    """Three StepData records with equal chords, equal arc angles and
    consistently chained curvatures (junction i+1 closes junction i)."""
    steps = []
    for i in range(3):
        steps.append(
            StepData(
                s0=0.0, theta0=thetas[2 * i], s1=0.0, theta1=thetas[2 * i + 1],
                s2=0.0, theta2=thetas[(2 * i + 2) % 6],
                ell1=ell, ell2=2.0 * mu * math.sin(chi), chi=chi,
                kappa0=kappas[i], kappa1=0.0, kappa2=kappas[(i + 1) % 3],
                mu=mu,
            )
        )
    return steps


def cycle_trace(steps):
    S = np.eye(2)
    for d in steps:
        S = jacobian_analytic(d) @ S
    return float(S[0, 0] + S[1, 1])


@pytest.mark.parametrize("rot, chi", [("1/3", math.pi / 3.0), ("2/3", 2.0 * math.pi / 3.0)])
def test_trace3_symmetric_matches_composition(rot, chi, rng):
    """The equal-angle cubic must reproduce the matrix product for any
    angle, any alpha and any (chained) curvature."""
    for _ in range(20):
        theta = float(rng.uniform(0.3, math.pi - 0.3))
        alpha = float(rng.uniform(0.2, 8.0))
        mu = float(rng.uniform(0.1, 1.0))
        kappas = rng.uniform(0.0, 2.0, size=3)
        steps = synthetic_cycle([theta] * 6, chi, alpha * mu, mu, list(kappas))
        got = cycle_trace(steps)
        want = trace3_symmetric(theta, alpha, rot)
        assert rel_close(got, want, 1e-9)


@pytest.mark.parametrize("rot, chi", [("1/3", math.pi / 3.0), ("2/3", 2.0 * math.pi / 3.0)])
def test_trace3_coefficients_against_polynomial_fit(rot, chi, rng):
    """With equal chords and equal arc angles the composed trace is an exact
    cubic in alpha = ell/mu; its constant and leading coefficients must
    match the closed forms for arbitrary angle six-tuples."""
    for _ in range(15):
        thetas = rng.uniform(0.4, math.pi - 0.4, size=6)
        mu = float(rng.uniform(0.2, 0.8))
        kappas = rng.uniform(0.0, 1.5, size=3)
        alphas = np.array([0.5, 1.0, 1.7, 2.6, 4.0])
        values = [
            cycle_trace(synthetic_cycle(list(thetas), chi, float(al) * mu, mu, list(kappas)))
            for al in alphas
        ]
        coeffs = np.polyfit(alphas, values, 3)  # highest power first
        # The fit of a degree-3 polynomial through 5 points is exact up to
        # conditioning; compare against the residual scale.
        c0_want, c3_want = trace3_coefficients(list(thetas), rot)
        scale = max(1.0, float(np.max(np.abs(values))))
        assert abs(coeffs[3] - c0_want) < 1e-6 * scale
        assert abs(coeffs[0] - c3_want) < 1e-6 * scale


def test_trace3_coefficients_validates_input():
    with pytest.raises(ValueError):
        trace3_coefficients([0.5] * 5, "1/3")
    with pytest.raises(ValueError):
        trace3_coefficients([0.5] * 6, "1/2")


# ------------------------------------------------------------------
# 4-periodic: circle
# ------------------------------------------------------------------

@pytest.mark.parametrize("rot, q", [("1/4", 1), ("3/4", 3)])
def test_four_periodic_circle_is_parabolic(rot, q):
    R = 1.0
    for mu in np.linspace(0.05, 0.95, 12):
        orbit, theta, trace = four_periodic_circle(R, float(mu), rot)
        assert_orbit_sane(orbit, 4, (q, 4))
        assert (q - 1) * math.pi / 4.0 < theta < q * math.pi / 4.0
        assert trace == pytest.approx(2.0, abs=1e-7)
        assert composed_trace(orbit) == pytest.approx(2.0, abs=1e-7)


def test_four_periodic_circle_chebyshev_structure():
    """All four steps share one matrix; the composed trace must equal
    (t^2 - 2)^2 - 2 in the single-step trace t, and so must the quartic."""
    for rot in ("1/4", "3/4"):
        orbit, theta, trace = four_periodic_circle(1.0, 0.4, rot)
        ts = [float(np.trace(jacobian_analytic(d))) for d in orbit.steps]
        assert max(ts) - min(ts) < 1e-9
        t = ts[0]
        assert trace4_circle_quartic(theta, 1.0 / 0.4) == pytest.approx(
            (t * t - 2.0) ** 2 - 2.0, abs=1e-7
        )


# ------------------------------------------------------------------
# 4-periodic: ellipse
# ------------------------------------------------------------------

def ellipse4_grid(a, b, rot, n=7):
    lo, split, hi = (
        a * (a * a - b * b) / (a * a + b * b),
        a * a / math.sqrt(a * a + b * b),
        a,
    )
    pad = 1e-3 * (hi - lo)
    if rot == "1/4":
        return np.linspace(split + pad, hi - pad, n)
    return np.linspace(lo + pad, split - pad, n)


@pytest.mark.parametrize("a, b", [(3.0, 2.0), (2.0, 1.0)])
@pytest.mark.parametrize("rot", ["1/4", "3/4"])
def test_four_periodic_ellipse_closed_vs_composed(a, b, rot):
    for x0 in ellipse4_grid(a, b, rot):
        orbit, rec, trace = four_periodic_ellipse(a, b, float(x0), rot)
        assert_orbit_sane(orbit, 4, (1, 4) if rot == "1/4" else (3, 4))
        assert rel_close(composed_trace(orbit), trace, 1e-7)
        assert rel_close(trace, trace4_ellipse(a, b, float(x0)), 1e-12)


@pytest.mark.parametrize("rot", ["1/4", "3/4"])
def test_four_periodic_ellipse_record_geometry(rot):
    a, b = 3.0, 2.0
    for x0 in ellipse4_grid(a, b, rot, n=4):
        orbit, rec, _ = four_periodic_ellipse(a, b, float(x0), rot)
        sgn = 1.0 if rot == "1/4" else -1.0

        # Both launch abscissae lie on the ellipse.
        for x, y in ((rec.x0, rec.y0), (rec.x2, rec.y2)):
            assert abs((x / a) ** 2 + (y / b) ** 2 - 1.0) < 1e-10

        # Larmor radius in closed form, positive on either branch.
        assert rec.mu == pytest.approx(
            sgn * 2.0 * (b * b * rec.x0 - a * a * rec.y0) / (a * a + b * b), rel=1e-9
        )
        assert rec.mu == pytest.approx(orbit.mu, rel=1e-12)

        # Chord lengths: vertical first chord 2*y0, horizontal second 2*x2.
        assert rec.ell1 == pytest.approx(2.0 * rec.y0, rel=1e-9)
        assert rec.ell3 == pytest.approx(2.0 * rec.x2, rel=1e-9)
        assert orbit.steps[0].ell1 == pytest.approx(rec.ell1, rel=1e-8)
        assert orbit.steps[1].ell1 == pytest.approx(rec.ell3, rel=1e-8)

        # Arc half-turning angle and launch-angle cosines (the recorded
        # values are acute references; on the 3/4 branch the interior
        # angles are their supplements).
        for d in orbit.steps:
            assert abs(d.chi - rec.chi) < 1e-8
        assert math.cos(orbit.steps[0].theta0) == pytest.approx(sgn * rec.cos_theta0, abs=1e-9)
        assert math.cos(orbit.steps[1].theta0) == pytest.approx(sgn * rec.cos_theta2, abs=1e-9)

        # Second launch point, with the mirrored ordinate on the 3/4 branch.
        p2 = orbit.boundary_points[2]
        assert p2[0] == pytest.approx(rec.x2, abs=1e-8)
        assert p2[1] == pytest.approx(sgn * rec.y2, abs=1e-8)


def test_four_periodic_ellipse_domain():
    a, b = 3.0, 2.0
    lo, split, hi = 15.0 / 13.0, 9.0 / math.sqrt(13.0), 3.0
    with pytest.raises(X0OutOfRange):
        four_periodic_ellipse(a, b, lo - 0.01, "3/4")
    with pytest.raises(X0OutOfRange):
        four_periodic_ellipse(a, b, hi + 0.01, "1/4")
    # Branch mismatch: x0 on the wrong side of the zero-radius point.
    with pytest.raises(X0OutOfRange):
        four_periodic_ellipse(a, b, split - 0.1, "1/4")
    with pytest.raises(X0OutOfRange):
        four_periodic_ellipse(a, b, split + 0.1, "3/4")


def test_ellipse4_reference_roots_closed_forms():
    r1, r2, r3 = ellipse4_reference_roots(3.0, 2.0)
    assert r1 == pytest.approx(291.0 / (9.0 * math.sqrt(13.0)), rel=1e-14)
    assert r2 == pytest.approx(
        math.sqrt((88731.0 + 1575.0 * math.sqrt(217.0)) / 14534.0), rel=1e-14
    )
    assert r3 == pytest.approx(291.0 / (13.0 * math.sqrt(61.0)), rel=1e-14)


def test_ellipse4_root_report_flags_stray_reference():
    """Numeric parabolic parameters: the zero-radius branch point (trace
    +2), one tangential touch of -2 and one transversal crossing; the
    first quoted closed form lies far outside the admissible interval and
    must be flagged, the other two must match numeric roots."""
    report = ellipse4_root_report(3.0, 2.0)
    lo, hi = report.interval
    assert lo == pytest.approx(15.0 / 13.0, rel=1e-12)
    assert hi == pytest.approx(3.0, rel=1e-12)
    assert report.reference_in_interval == (False, True, True)

    # The first root sits at the zero-radius branch point where the trace
    # meets +2 with a vertical tangent, so its location is only good to
    # about the square root of the trace tolerance; the other two are
    # ordinary roots and come out sharp.
    expected = (2.4961508830135313, 2.7751402706262516, 2.8660563123440563)
    tolerances = (1e-6, 1e-8, 1e-8)
    assert len(report.numeric_roots) == 3
    for got, want, tol in zip(sorted(report.numeric_roots), expected, tolerances):
        assert got == pytest.approx(want, abs=tol)

    # The in-interval references agree with numeric roots to 1e-5.
    refs = report.reference_values
    assert min(abs(r - refs[1]) for r in report.numeric_roots) < 1e-5
    assert min(abs(r - refs[2]) for r in report.numeric_roots) < 1e-5
    assert min(abs(r - refs[0]) for r in report.numeric_roots) > 1.0


# ------------------------------------------------------------------
# 4-periodic: superellipse, diagonal arcs
# ------------------------------------------------------------------

@pytest.mark.parametrize("k, value", [(2, 0.98484637197994), (3, 0.9853248267311407)])
def test_x_hat_values(k, value):
    assert x_hat(k) == pytest.approx(value, abs=1e-10)


@pytest.mark.parametrize("k", [2, 3])
def test_four_periodic_superellipse_diag_quarter_branch(k):
    """Rotation 1/4 on (q, x_hat): hyperbolic all along, closed trace
    matching the composed one."""
    q = 2.0 ** (-1.0 / (2 * k))
    hi = x_hat(k)
    for x0 in np.linspace(q + 1e-3, hi - 1e-3, 7):
        orbit, trace = four_periodic_superellipse_diag(k, float(x0), "1/4")
        assert_orbit_sane(orbit, 4, (1, 4))
        assert trace > 2.0
        assert rel_close(composed_trace(orbit), trace, 1e-6)


@pytest.mark.parametrize("k", [2, 3])
def test_four_periodic_superellipse_diag_three_quarter_branch(k):
    q = 2.0 ** (-1.0 / (2 * k))
    for x0 in np.linspace(-0.98, q - 1e-3, 9):
        orbit, trace = four_periodic_superellipse_diag(k, float(x0), "3/4")
        assert_orbit_sane(orbit, 4, (3, 4))
        assert rel_close(composed_trace(orbit), trace, 1e-6)


def test_superellipse_diag_trace_special_points():
    for k in (2, 3):
        q = 2.0 ** (-1.0 / (2 * k))
        assert trace4_superellipse_diag(k, 0.0) == 2.0
        assert trace4_superellipse_diag(k, -q) == pytest.approx(2.0, abs=1e-9)
    # An elliptic stretch exists on the 3/4 branch (k = 2, near -0.3).
    t = trace4_superellipse_diag(2, -0.3)
    assert -2.0 < t < 2.0


def test_four_periodic_superellipse_diag_domain():
    with pytest.raises(BeyondXHat):
        four_periodic_superellipse_diag(2, 0.99, "1/4")
    q = 2.0 ** (-0.25)
    with pytest.raises(X0OutOfRange):
        four_periodic_superellipse_diag(2, q - 0.05, "1/4")
    with pytest.raises(X0OutOfRange):
        four_periodic_superellipse_diag(2, q + 0.05, "3/4")
    with pytest.raises(X0OutOfRange):
        four_periodic_superellipse_diag(2, -1.0, "3/4")


# ------------------------------------------------------------------
# 4-periodic: superellipse, axis-aligned arcs
# ------------------------------------------------------------------

@pytest.mark.parametrize("k", [2, 3])
@pytest.mark.parametrize("rot", ["1/4", "3/4"])
def test_four_periodic_superellipse_axis_closed_vs_composed(k, rot):
    # Stay 0.01 clear of |x0| = q: there mu reaches sqrt(2)*q and the
    # Larmor circle grazes all four corners of the table at once, so the
    # constructed orbit degenerates (the closed-form trace is still fine).
    q = 2.0 ** (-1.0 / (2 * k))
    lo = q + 0.01 if rot == "1/4" else -q + 0.01
    for x0 in np.linspace(lo, 0.997, 8):
        orbit, trace = four_periodic_superellipse_axis(k, float(x0), rot)
        assert_orbit_sane(orbit, 4, (1, 4) if rot == "1/4" else (3, 4))
        assert rel_close(composed_trace(orbit), trace, 1e-6)
        assert rel_close(trace, trace4_superellipse_axis(k, float(x0), rot), 1e-12)

        # Dihedral symmetry: the four step matrices share one trace t and
        # the composed trace is the Chebyshev image (t^2 - 2)^2 - 2.  The
        # per-step traces carry the boundary-lookup noise of the orbit
        # construction (~1e-7 relative), hence the looser spread bound.
        ts = [float(np.trace(jacobian_analytic(d))) for d in orbit.steps]
        assert max(ts) - min(ts) < 1e-6 * max(1.0, abs(ts[0]))
        t_mean = float(np.mean(ts))
        assert rel_close(trace, (t_mean ** 2 - 2.0) ** 2 - 2.0, 1e-6)


def test_parabolic_roots_axis_quarter():
    """Rotation 1/4: a single transversal trace = +2 root, hyperbolic
    below it and elliptic above."""
    for k, want in ((2, 0.9792754384596497), (3, 0.9971420104409094)):
        (root,) = parabolic_roots(k, "1/4")
        assert root == pytest.approx(want, abs=1e-9)
        assert trace4_superellipse_axis(k, root, "1/4") == pytest.approx(2.0, abs=1e-7)
        assert trace4_superellipse_axis(k, root - 0.003, "1/4") > 2.0
        assert abs(trace4_superellipse_axis(k, root + 0.5 * (1.0 - root), "1/4")) < 2.0


@pytest.mark.parametrize(
    "k, expected",
    [
        (
            2,
            (0.0, 2.0 ** (-0.25), 0.914328689104131, 0.977146529828137, 0.997737467358199),
        ),
        (
            3,
            (0.0, 2.0 ** (-1.0 / 6.0), 0.933585736179959, 0.977473721960245, 0.996520011429145),
        ),
    ],
)
def test_parabolic_roots_axis_three_quarter(k, expected):
    roots = parabolic_roots(k, "3/4")
    assert len(roots) == 5
    for got, want in zip(roots, expected):
        assert got == pytest.approx(want, abs=1e-9)
    for r in roots:
        assert abs(abs(trace4_superellipse_axis(k, r, "3/4")) - 2.0) < 1e-7


# ------------------------------------------------------------------
# duality between the rotation-1/4 and rotation-3/4 families
# ------------------------------------------------------------------

def test_dual_orbit_ellipse_swaps_rotation_and_matches_family():
    a, b = 3.0, 2.0
    for x0 in ellipse4_grid(a, b, "1/4", n=5):
        orbit, rec, _ = four_periodic_ellipse(a, b, float(x0), "1/4")
        dual = dual_orbit(orbit)
        assert dual.rotation == Fraction(3, 4)
        assert dual.residual <= 1e-7
        assert dual.mu == pytest.approx(orbit.mu, rel=1e-12)
        # The dual is itself a member of the rotation-3/4 family, at the
        # parameter given by the second launch abscissa.
        assert rel_close(composed_trace(dual), trace4_ellipse(a, b, rec.x2), 1e-6)

        # Duality is an involution on the boundary point set.
        back = dual_orbit(dual)
        scale = max(a, b)
        for p, q in zip(back.boundary_points, orbit.boundary_points):
            assert float(np.max(np.abs(p - q))) < 1e-8 * scale


def test_dual_orbit_superellipse_diag_lands_on_mirror_parameter():
    """The dual of the diagonal quarter-turn orbit at x0 is the
    three-quarter-turn family member at x0' = y0(x0)."""
    k = 2
    for x0 in (0.87, 0.9, 0.95):
        orbit, _ = four_periodic_superellipse_diag(k, x0, "1/4")
        dual = dual_orbit(orbit)
        y0 = (1.0 - x0 ** (2 * k)) ** (1.0 / (2 * k))
        assert dual.rotation == Fraction(3, 4)
        assert rel_close(composed_trace(dual), trace4_superellipse_diag(k, y0), 1e-6)


def test_dual_orbit_superellipse_axis_keeps_parameter():
    """The axis families have mu = sqrt(2) * y0 on both branches, so the
    dual of the quarter-turn orbit at x0 is the three-quarter-turn orbit
    at the same x0."""
    k = 2
    for x0 in (0.9, 0.95):
        orbit, _ = four_periodic_superellipse_axis(k, x0, "1/4")
        dual = dual_orbit(orbit)
        assert dual.rotation == Fraction(3, 4)
        assert rel_close(composed_trace(dual), trace4_superellipse_axis(k, x0, "3/4"), 1e-6)


def test_dual_orbit_rejects_unsuitable_orbits():
    orbit2, _ = two_periodic_circle(1.0, 0.4)
    with pytest.raises(ValueError):
        dual_orbit(orbit2)

    orbit, _, _ = four_periodic_ellipse(3.0, 2.0, 2.8, "1/4")
    pts = list(orbit.boundary_points)
    pts[5] = pts[5] + np.array([0.05, 0.0])
    broken = dataclasses.replace(orbit, boundary_points=tuple(pts))
    with pytest.raises(NotSymmetric):
        dual_orbit(broken)


# ------------------------------------------------------------------
# Newton refinement
# ------------------------------------------------------------------

def test_newton_recovers_perturbed_orbits():
    """Isolated (non-parabolic) periodic points are recovered from seeds
    perturbed by 1e-4 in both chart coordinates."""
    targets = [
        two_periodic_ellipse(2.0, 1.0, 0.5, axis="major")[0],        # trace 194
        two_periodic_ellipse(2.0, 1.0, 0.5, axis="minor")[0],        # trace -1
        four_periodic_ellipse(3.0, 2.0, 2.8, "1/4")[0],              # elliptic
        four_periodic_superellipse_diag(2, -0.3, "3/4")[0],          # elliptic
        two_periodic_stadium(2.0, 1.0, 0.5, kind="caps")[0],         # hyperbolic
    ]
    for orbit in targets:
        z = orbit.points[0]
        seed = PhasePoint(s=z.s + 1e-4, theta=z.theta + 1e-4)
        found = find_periodic_newton(orbit.curve, orbit.mu, orbit.n, seed, max_iter=10)
        assert found.residual <= 1e-10
        assert abs(found.points[0].s - z.s) < 1e-6
        assert abs(found.points[0].theta - z.theta) < 1e-6


def test_newton_raises_on_parabolic_families():
    """Parabolic orbits are non-isolated: perturbing a seed transversely
    to the family leaves Newton facing a singular matrix, which it must
    report rather than wander.  (A seed shifted *along* the family is
    itself periodic and converges trivially — also checked.)"""
    circle2, _ = two_periodic_circle(1.0, 0.45)
    circle3, _, _ = three_periodic_circle(1.0, 0.45, "1/3")
    circle4, _, _ = four_periodic_circle(1.0, 0.45, "1/4")
    stadium, _ = two_periodic_stadium(2.0, 1.0, 0.4, kind="sides")
    for orbit in (circle2, circle3, circle4, stadium):
        z = orbit.points[0]
        seed = PhasePoint(s=z.s + 1e-4, theta=z.theta + 1e-4)
        with pytest.raises(SingularJacobian):
            find_periodic_newton(orbit.curve, orbit.mu, orbit.n, seed, max_iter=10)
        shifted = find_periodic_newton(
            orbit.curve, orbit.mu, orbit.n, PhasePoint(s=z.s + 1e-4, theta=z.theta)
        )
        assert shifted.residual <= 1e-10


def test_newton_rejects_hopeless_seeds():
    curve = Ellipse(2.0, 1.0)
    with pytest.raises((NoConvergence, SingularJacobian)):
        find_periodic_newton(curve, 0.3, 5, PhasePoint(0.123, 1.234), max_iter=4)
    with pytest.raises(ValueError):
        find_periodic_newton(curve, 0.3, 0, PhasePoint(0.1, 1.0))


# ------------------------------------------------------------------
# family scans
# ------------------------------------------------------------------

def test_scan_family_locates_axis_thresholds():
    k = 2

    def closed_trace(mu: float) -> float:
        prod = 4.0 * (mu ** (-2 * k) - 1.0) ** ((1.0 - k) / k)
        return (prod - 2.0) ** 2 - 2.0

    scan = scan_family(closed_trace, 0.05, 0.99, parameter="mu")
    mu_star = (2.0 ** 2 + 1.0) ** (-0.25)
    mu_dstar = 2.0 ** (-0.25)
    assert len(scan.thresholds) == 2
    assert scan.thresholds[0] == pytest.approx(mu_star, abs=1e-8)
    assert scan.thresholds[1] == pytest.approx(mu_dstar, abs=1e-10)
    assert len(scan.grid) == len(scan.traces) == len(scan.verdicts)


def test_scan_family_finds_tangential_and_transversal_diag_points():
    k = 2
    q = 2.0 ** (-0.25)

    def closed_trace(x0: float) -> float:
        y0 = (1.0 - x0 ** (2 * k)) ** (1.0 / (2 * k))
        plain = sum(y0 ** j * x0 ** (2 * k - 2 - j) for j in range(2 * k - 1))
        alt = sum((-1.0) ** j * y0 ** j * x0 ** (2 * k - 2 - j) for j in range(2 * k - 1))
        f = plain / alt
        return 2.0 + 16.0 * f * (f - 1.0)

    scan = scan_family(closed_trace, -q + 1e-4, q - 1e-4, parameter="x0")
    x_t, _ = superellipse_diag_tangential(k)
    assert len(scan.thresholds) == 2
    assert scan.thresholds[0] == pytest.approx(x_t, abs=1e-7)
    assert scan.thresholds[1] == pytest.approx(0.0, abs=1e-10)


def test_scan_family_rejects_bad_requests():
    with pytest.raises(ValueError):
        scan_family(lambda x: x, 1.0, 0.5)
    with pytest.raises(ValueError):
        scan_family(lambda x: x, 0.0, 1.0, n_grid=8)
