"""One map step, geometrically: chord exit and Larmor-arc re-entry.

The particle leaves the boundary point Gamma(s0) at angle theta0 from the
positive tangent, travels straight inside the table, exits at P1, then
follows an anticlockwise circular arc of Larmor radius mu outside the
table until the first boundary crossing P2.

Root-finding policy (shared by both predicates): bracket a sign change of
the boundary's implicit function, refine with Brent's method, then polish
with one or two Newton steps on the smooth implicit value.  For the chord
we exploit that all built-in tables have an implicit function that is
convex along any line, so a geometric bracket shrink from the diameter
bound is reliable; for the Larmor circle we sample N=512 sweep angles and
take the first transversal crossing past a small sweep guard (the circle
is tangent to the chord at P1, so re-detection of P1 is excluded by sweep
angle, not by distance).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .curves import Curve, rot90
from .errors import NoInteriorHit, NoReentry, TangentialChord, TangentialContact

__all__ = ["ChordHit", "LarmorHit", "chord_exit", "larmor_reentry"]

ANGLE_EPS = 1e-12      # theta within this of {0, pi} counts as tangential
SWEEP_GUARD = 1e-7     # smallest admissible Larmor sweep angle
N_SWEEP_SAMPLES = 512  # dense sampling of the Larmor circle


@dataclass(frozen=True)
class ChordHit:
    """Where the straight chord leaves the table."""

    s1: float      # arclength of the exit point P1
    theta1: float  # angle in (0, pi) between chord direction and tangent at P1
    ell1: float    # chord length |P0 P1|


@dataclass(frozen=True)
class LarmorHit:
    """Where the Larmor arc re-enters the table.

    ``chi`` is the angle between the exit velocity and the ray P1->P2; it
    satisfies ell2 = 2 mu sin(chi), and the arc sweep equals 2 chi (the
    tangent-chord angle of the Larmor circle).  ``n_crossings`` counts the
    transversal boundary crossings strictly after the exit point over one
    full revolution (the return to the exit point itself is excluded): 1
    for a clean re-entry, 3 when the Larmor circle meets the boundary at
    four points — a diagnostic for geometries where the circle "clips a
    corner" of the table.
    """

    s2: float
    theta2: float
    chi: float
    ell2: float
    arc_sweep: float
    n_crossings: int


def _incidence_angle(v: np.ndarray, tangent: np.ndarray, *, entering: bool) -> float:
    """Angle in (0, pi) between a unit velocity and the positive tangent.

    For an *entering* velocity the inward normal component is positive and
    the angle is measured directly; for an *exiting* one the normal
    component is reflected, which matches the convention that the angle at
    a chord endpoint is read on the interior side of the tangent line.
    """
    n = rot90(tangent)
    normal_part = float(v @ n)
    if not entering:
        normal_part = -normal_part
    return math.atan2(normal_part, float(v @ tangent))


def chord_exit(curve: Curve, s0: float, theta0: float) -> ChordHit:
    """First boundary intersection of the chord launched from (s0, theta0).

    Raises :class:`TangentialChord` for theta0 within ``ANGLE_EPS`` of
    {0, pi} (the map is the identity there) and :class:`NoInteriorHit`
    when no interior travel is possible, which cannot happen on the convex
    built-in tables.
    """
    if theta0 < ANGLE_EPS or theta0 > math.pi - ANGLE_EPS:
        raise TangentialChord(f"launch angle {theta0!r} is within {ANGLE_EPS} of 0 or pi")

    p0 = curve.point_at(s0)
    tangent = curve.tangent_at(s0)
    v = math.cos(theta0) * tangent + math.sin(theta0) * rot90(tangent)

    def f(r: float) -> float:
        return float(curve.implicit(p0 + r * v))

    eps_sep = 1e-9 * curve.total_length()
    r_hi = 1.01 * curve.diameter_bound()
    if f(r_hi) <= 0.0:  # pragma: no cover - diameter bound is conservative
        raise NoInteriorHit("ray does not leave the table within the diameter bound")

    # F is convex along the ray with F(0) = 0 and F < 0 on (0, r_exit):
    # shrink geometrically until we land inside the negative stretch.
    r_lo = 0.5 * r_hi
    shrinks = 0
    while f(r_lo) >= 0.0:
        r_hi = r_lo
        r_lo *= 0.5
        shrinks += 1
        if r_lo < eps_sep or shrinks > 80:
            raise NoInteriorHit(
                f"no interior travel beyond {eps_sep:.3e} from s0={s0!r}: "
                "the ray exits immediately"
            )
    r = brentq(f, r_lo, r_hi, xtol=1e-13, rtol=8.9e-16)

    # Newton polish on the implicit value.
    for _ in range(2):
        p = p0 + r * v
        df = float(curve.implicit_gradient(p) @ v)
        if df != 0.0:
            r -= float(curve.implicit(p)) / df

    p1 = p0 + r * v
    s1 = curve.locate(p1)
    theta1 = _incidence_angle(v, curve.tangent_at(s1), entering=False)
    return ChordHit(s1=s1, theta1=theta1, ell1=float(r))


def larmor_reentry(curve: Curve, s1: float, v: np.ndarray, mu: float) -> LarmorHit:
    """First boundary crossing of the anticlockwise Larmor arc from P1.

    ``v`` is the unit chord direction at the exit point; the Larmor center
    sits at P1 + mu * rot90(v).  The crossing is located on the implicit
    function sampled along the circle, refined by Brent + Newton, and must
    be transversal; otherwise :class:`TangentialContact` is raised.
    """
    if mu <= 0:
        raise ValueError(f"Larmor radius must be positive, got {mu}")
    p1 = curve.point_at(s1)
    center = p1 + mu * rot90(v)
    rel = p1 - center  # radius vector, |rel| = mu

    def arc_point(psi: float) -> np.ndarray:
        c, s = math.cos(psi), math.sin(psi)
        return center + np.array([c * rel[0] - s * rel[1], s * rel[0] + c * rel[1]])

    def f(psi: float) -> float:
        return float(curve.implicit(arc_point(psi)))

    # Dense sweep sampling, one vectorized implicit evaluation.
    psis = np.linspace(SWEEP_GUARD, 2.0 * math.pi - SWEEP_GUARD, N_SWEEP_SAMPLES)
    cs, ss = np.cos(psis), np.sin(psis)
    pts = np.stack(
        [center[0] + cs * rel[0] - ss * rel[1], center[1] + ss * rel[0] + cs * rel[1]],
        axis=1,
    )
    vals = np.asarray(curve.implicit(pts))

    if vals[0] < 0.0:
        # Already inside at the sweep guard: the arc hugs the boundary at
        # tangency order; no transversal re-entry to report.
        raise TangentialContact(
            f"Larmor arc from s1={s1!r} is inside the table at sweep {SWEEP_GUARD}"
        )

    sign_flips = np.nonzero(np.diff(np.signbit(vals)))[0]
    n_crossings = int(len(sign_flips))
    entering = [i for i in sign_flips if vals[i] > 0.0 >= vals[i + 1]]
    if not entering:
        raise NoReentry(
            f"no boundary crossing along the full Larmor sweep from s1={s1!r} "
            f"(mu={mu!r}); the table is not convex around this arc"
        )
    i = entering[0]
    a, b = float(psis[i]), float(psis[i + 1])
    if f(a) <= 0.0 or f(b) >= 0.0:  # pragma: no cover - defensive
        raise TangentialContact("bracketing sign change collapsed under refinement")
    psi = brentq(f, a, b, xtol=1e-13, rtol=8.9e-16)

    def df(psi: float) -> float:
        # d/dpsi F(arc_point) = grad F . rot90(arc_point - center)
        p = arc_point(psi)
        return float(curve.implicit_gradient(p) @ rot90(p - center))

    slope = df(psi)
    arc_scale = float(np.hypot(*curve.implicit_gradient(arc_point(psi)))) * mu
    if abs(slope) < 1e-10 * max(arc_scale, 1e-30):
        raise TangentialContact(
            f"Larmor circle grazes the boundary tangentially at sweep {psi!r}"
        )
    for _ in range(2):
        psi -= f(psi) / df(psi)

    p2 = arc_point(psi)
    s2 = curve.locate(p2)
    v2 = np.array(
        [
            math.cos(psi) * v[0] - math.sin(psi) * v[1],
            math.sin(psi) * v[0] + math.cos(psi) * v[1],
        ]
    )
    theta2 = _incidence_angle(v2, curve.tangent_at(s2), entering=True)

    delta = p2 - p1
    ell2 = float(np.hypot(*delta))
    # chi: angle from the exit velocity v to the chord P1->P2, positive for
    # the anticlockwise arc.
    chi = math.atan2(float(v[0] * delta[1] - v[1] * delta[0]), float(v @ delta))
    if chi <= 0.0:
        chi += 2.0 * math.pi  # numerically hugging pi from above
    return LarmorHit(
        s2=s2, theta2=theta2, chi=chi, ell2=ell2, arc_sweep=float(psi),
        n_crossings=n_crossings,
    )
