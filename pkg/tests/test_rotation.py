"""Caustic classification and rotation numbers of chord families."""

from __future__ import annotations

import math

import numpy as np
import pytest
from scipy.optimize import brentq

from imbilliards.errors import LambdaDegenerate, Nu0OutOfRange
from imbilliards.rotation import (
    CausticKind,
    caustic_kind,
    confocal_param,
    limiting_rotation,
    rot_lambda,
    rotation_form_diagnostics,
    rotation_table,
)

#: Reference rotation numbers from 40-digit adaptive quadrature of the
#: defining integral ratio (tanh-sinh rule, absolute-value integrand with
#: the inverse-square-root endpoint singularities handled natively).
ORACLE = [
    (2.0, 1.0, 0.3, 0.26614583485683577),
    (2.0, 1.0, 0.7, 0.44868554040415362),
    (2.0, 1.0, 1.5, 0.46928896962393516),
    (2.0, 1.0, 2.5, 0.38382791586982001),
    (2.0, 1.0, 3.2, 0.35529950762104406),
    (2.0, 1.0, 3.9, 0.33567708663183477),
    (3.0, 2.0, 1.0, 0.27249628756390309),
    (3.0, 2.0, 5.0, 0.58796185964608596),
    (3.0, 2.0, 8.5, 0.47290738836252953),
]

TABLES = [(math.sqrt(2.0), 1.0), (2.0, 1.0), (3.0, 2.0)]


def test_caustic_kind_classification():
    a, b = 2.0, 1.0
    assert caustic_kind(a, b, -0.5) is CausticKind.EXTERIOR
    assert caustic_kind(a, b, 0.0) is CausticKind.EXTERIOR
    assert caustic_kind(a, b, 0.5) is CausticKind.ELLIPSE
    assert caustic_kind(a, b, 1.0) is CausticKind.DEGENERATE_MAJOR
    assert caustic_kind(a, b, 1.0 + 1e-14) is CausticKind.DEGENERATE_MAJOR
    assert caustic_kind(a, b, 2.0) is CausticKind.HYPERBOLA
    assert caustic_kind(a, b, 4.0) is CausticKind.DEGENERATE_MINOR
    assert caustic_kind(a, b, 4.5) is CausticKind.IMAGINARY
    with pytest.raises(ValueError):
        caustic_kind(1.0, 2.0, 0.5)
    with pytest.raises(ValueError):
        caustic_kind(a, b, math.nan)


@pytest.mark.parametrize("a, b, lam, expected", ORACLE)
def test_rot_lambda_against_quadrature_oracle(a, b, lam, expected):
    assert rot_lambda(a, b, lam) == pytest.approx(expected, abs=1e-9)


def test_rot_lambda_rejects_non_caustics():
    with pytest.raises(LambdaDegenerate):
        rot_lambda(2.0, 1.0, 1.0)
    with pytest.raises(LambdaDegenerate):
        rot_lambda(2.0, 1.0, 4.0)
    with pytest.raises(ValueError):
        rot_lambda(2.0, 1.0, -0.3)
    with pytest.raises(ValueError):
        rot_lambda(2.0, 1.0, 5.0)


@pytest.mark.parametrize("a, b", TABLES)
def test_rotation_monotone_on_both_branches(a, b):
    """Increasing 0 -> 1 on the ellipse branch, decreasing 1 ->
    (2/pi)*arcsin(b/a) on the hyperbola branch, on 100-point grids."""
    b2, a2 = b * b, a * a
    ellipse_grid = np.linspace(1e-3 * b2, b2 * (1.0 - 1e-3), 100)
    values = [rot_lambda(a, b, float(lam)) for lam in ellipse_grid]
    assert all(x < y for x, y in zip(values, values[1:]))
    assert values[0] < 0.05
    assert values[-1] > 0.7

    hyper_grid = np.linspace(b2 * (1.0 + 1e-3), a2 * (1.0 - 1e-3), 100)
    values = [rot_lambda(a, b, float(lam)) for lam in hyper_grid]
    assert all(x > y for x, y in zip(values, values[1:]))
    assert values[0] > 0.7
    central = (2.0 / math.pi) * math.asin(b / a)
    assert values[-1] == pytest.approx(central, abs=2e-2)

    # The shared endpoint b^2 is a logarithmic divergence toward 1: the two
    # branches agree across it and creep upward as the probe tightens.
    probes = [
        (rot_lambda(a, b, b2 * (1.0 - eps)), rot_lambda(a, b, b2 * (1.0 + eps)))
        for eps in (1e-3, 1e-6, 1e-9)
    ]
    for lower, upper in probes[1:]:
        assert lower == pytest.approx(upper, abs=1e-5)
    assert probes[0][0] < probes[1][0] < probes[2][0] < 1.0
    assert probes[2][0] > 0.85


def test_central_chord_limit():
    """lam -> a^2- recovers the central-chord value (2/pi)*arcsin(b/a); at
    the aspect ratio a^2 = 2 b^2 that value is 1/2."""
    a, b = math.sqrt(2.0), 1.0
    assert rot_lambda(a, b, a * a * (1.0 - 1e-6)) == pytest.approx(0.5, abs=1e-5)
    for a, b in ((2.0, 1.0), (3.0, 2.0)):
        central = (2.0 / math.pi) * math.asin(b / a)
        assert rot_lambda(a, b, a * a * (1.0 - 1e-6)) == pytest.approx(central, abs=1e-5)


def test_limiting_rotation_values():
    assert limiting_rotation(2.0) == 0.5  # acos(0) = pi/2 exactly
    assert limiting_rotation(1.0) == pytest.approx(1.0, abs=1e-15)
    assert limiting_rotation(4.0 / 3.0) == pytest.approx(2.0 / 3.0, rel=1e-15)
    with pytest.raises(Nu0OutOfRange):
        limiting_rotation(0.99)
    with pytest.raises(Nu0OutOfRange):
        limiting_rotation(math.inf)


@pytest.mark.parametrize("a, b", TABLES)
def test_limiting_rotation_complements_central_chords(a, b):
    """limiting_rotation(a^2/(a^2-b^2)) = 1 - (2/pi)*arcsin(b/a) for every
    aspect ratio; the two sides agree (both 1/2) exactly when a^2 = 2b^2."""
    nu0 = confocal_param(a, b)
    complement = 1.0 - (2.0 / math.pi) * math.asin(b / a)
    assert limiting_rotation(nu0) == pytest.approx(complement, abs=1e-14)
    near_limit = rot_lambda(a, b, a * a * (1.0 - 1e-6))
    assert limiting_rotation(nu0) == pytest.approx(1.0 - near_limit, abs=1e-4)


def test_confocal_param_values():
    assert confocal_param(math.sqrt(2.0), 1.0) == pytest.approx(2.0, rel=1e-15)
    assert confocal_param(2.0, 1.0) == pytest.approx(4.0 / 3.0, rel=1e-15)
    with pytest.raises(ValueError):
        confocal_param(1.0, 1.0)


def test_rotation_table_spans_all_kinds():
    rows = rotation_table(2.0, 1.0, [-0.5, 0.5, 1.0, 2.0, 4.0, 4.5])
    kinds = [kind for _, kind, _ in rows]
    assert kinds == [
        "exterior",
        "ellipse",
        "degenerate-major",
        "hyperbola",
        "degenerate-minor",
        "imaginary",
    ]
    rhos = [rho for _, _, rho in rows]
    assert math.isnan(rhos[0]) and math.isnan(rhos[2]) and math.isnan(rhos[4])
    assert math.isnan(rhos[5])
    assert 0.0 < rhos[1] < 1.0 and 0.0 < rhos[3] < 1.0


@pytest.mark.parametrize("a, b", TABLES)
def test_hyperbola_branch_rational_values_take_even_periods(a, b):
    """On the hyperbola branch a rational rotation number p/q corresponds
    to orbits that close only after an even number of chords (the chord
    sequence alternates between the two hyperbola arms), so rationality
    checks use even denominators: 3/4 is admissible and must be attained;
    at a^2 = 2b^2 the infimum 1/2 = 2/4 is approached but not attained."""
    b2, a2 = b * b, a * a
    lo, hi = b2 * (1.0 + 1e-6), a2 * (1.0 - 1e-8)
    lam = brentq(lambda x: rot_lambda(a, b, x) - 0.75, lo, hi, xtol=1e-13)
    assert rot_lambda(a, b, lam) == pytest.approx(0.75, abs=1e-9)
    if abs(a * a - 2.0 * b * b) < 1e-12:
        grid = np.linspace(lo, hi, 50)
        assert all(rot_lambda(a, b, float(x)) > 0.5 for x in grid)


def test_rotation_form_diagnostics_pin_the_integrand():
    """The selected normalization approaches 1 at the shared endpoint
    (deviation shrinking markedly as the probe tightens) and matches the
    central-chord value at the minor-axis limit; the rejected separable
    variant stalls at the endpoint and blows up at the limit."""
    diag = rotation_form_diagnostics(2.0, 1.0)
    assert diag.selected_small_lambda < 1e-3
    assert diag.selected_bsq_trend < 0.8
    assert diag.selected_minor_limit < 1e-5
    assert diag.separable_bsq_trend > 0.95
    assert diag.separable_minor_limit > 1.0
