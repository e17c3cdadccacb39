"""The inverse magnetic billiard map on the phase annulus.

Phase space is [0, L) x (0, pi) in coordinates (s, theta): arclength of
the chord's launch point and its angle from the positive tangent.  One
application of the map is chord exit followed by Larmor re-entry,
(s0, theta0) -> (s2, theta2).  The boundary circles theta = 0 and
theta = pi are fixed pointwise and are guarded, not iterated.

The map preserves the area form sin(theta) ds ^ dtheta; in the chart
(s, u) with u = -cos(theta) its derivative DT has determinant one.  The
four closed-form entries of DT are assembled in :func:`jacobian_analytic`
from a single step's geometric record (:class:`StepData`) — no
re-intersection happens there, which keeps the finite-difference check in
:func:`jacobian_numeric` an independent oracle.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .collision import ANGLE_EPS, chord_exit, larmor_reentry
from .curves import Curve, rot90
from .errors import DegenerateStep

__all__ = [
    "PhasePoint",
    "StepData",
    "step",
    "iterate",
    "jacobian_analytic",
    "jacobian_numeric",
    "well_conditioned",
    "launch_direction",
]

#: entries of StepData smaller than this make the closed-form DT ill-defined
DEGENERACY_EPS = 1e-12


@dataclass(frozen=True)
class PhasePoint:
    """A point of the phase annulus: arclength s in [0, L), angle theta.

    ``u`` is the symplectic vertical coordinate -cos(theta)."""

    s: float
    theta: float

    @property
    def u(self) -> float:
        return -math.cos(self.theta)

    @staticmethod
    def from_u(s: float, u: float) -> "PhasePoint":
        return PhasePoint(s, math.acos(-min(1.0, max(-1.0, u))))


@dataclass(frozen=True)
class StepData:
    """Geometric record of one completed map step.

    Angles theta0/theta1/theta2 at the launch, exit and re-entry points,
    chord lengths ell1 (straight) and ell2 (Larmor chord), tangent-chord
    angle chi of the arc, boundary curvatures kappa0 and kappa2 at the two
    phase points (kappa1 is kept for diagnostics only; the closed-form DT
    does not involve it), and the Larmor radius mu.
    """

    s0: float
    theta0: float
    s1: float
    theta1: float
    s2: float
    theta2: float
    ell1: float
    ell2: float
    chi: float
    kappa0: float
    kappa1: float
    kappa2: float
    mu: float


def launch_direction(curve: Curve, z: PhasePoint) -> np.ndarray:
    """Unit velocity of the chord leaving Gamma(z.s) at angle z.theta."""
    tangent = curve.tangent_at(z.s)
    return math.cos(z.theta) * tangent + math.sin(z.theta) * rot90(tangent)


def step(curve: Curve, mu: float, z: PhasePoint) -> tuple[PhasePoint, StepData | None]:
    """One application of the map.  Near theta in {0, pi} the map is the
    identity; that guarded case returns ``(z, None)``."""
    if z.theta < ANGLE_EPS or z.theta > math.pi - ANGLE_EPS:
        return z, None

    hit1 = chord_exit(curve, z.s, z.theta)
    v = launch_direction(curve, z)
    hit2 = larmor_reentry(curve, hit1.s1, v, mu)

    data = StepData(
        s0=curve.wrap(z.s),
        theta0=z.theta,
        s1=hit1.s1,
        theta1=hit1.theta1,
        s2=hit2.s2,
        theta2=hit2.theta2,
        ell1=hit1.ell1,
        ell2=hit2.ell2,
        chi=hit2.chi,
        kappa0=curve.curvature_at(z.s),
        kappa1=curve.curvature_at(hit1.s1),
        kappa2=curve.curvature_at(hit2.s2),
        mu=mu,
    )
    return PhasePoint(hit2.s2, hit2.theta2), data


def iterate(
    curve: Curve, mu: float, z: PhasePoint, n: int
) -> list[tuple[PhasePoint, StepData | None]]:
    """n successive steps; element i holds the image of the i-th step.

    On a collision failure the raised error carries the completed prefix in
    its ``partial`` attribute, so callers can inspect how far the orbit
    got.
    """
    out: list[tuple[PhasePoint, StepData | None]] = []
    current = z
    for _ in range(n):
        try:
            current, data = step(curve, mu, current)
        except Exception as exc:
            exc.partial = out  # type: ignore[attr-defined]
            raise
        out.append((current, data))
    return out


def jacobian_analytic(d: StepData) -> np.ndarray:
    """Closed-form derivative of one map step in the (s, u) chart.

    Returns the 2x2 matrix [[ds2/ds0, ds2/du0], [du2/ds0, du2/du0]].  Its
    determinant is 1 for any valid step.  Raises :class:`DegenerateStep`
    when a denominator (a sine of theta0/theta1/theta2, or ell2) is below
    ``DEGENERACY_EPS``.
    """
    st0, st1, st2 = math.sin(d.theta0), math.sin(d.theta1), math.sin(d.theta2)
    for name, val in (("sin(theta0)", st0), ("sin(theta1)", st1),
                      ("sin(theta2)", st2), ("ell2", d.ell2)):
        if abs(val) < DEGENERACY_EPS:
            raise DegenerateStep(f"{name} = {val:.3e} below {DEGENERACY_EPS}")

    k0, k2 = d.kappa0, d.kappa2
    l1, l2 = d.ell1, d.ell2
    chi = d.chi
    schi, cchi = math.sin(chi), math.cos(chi)
    s_2chi_t1 = math.sin(2 * chi - d.theta1)
    s_2chi_t2 = math.sin(2 * chi - d.theta2)
    s_2chi_t1_t2 = math.sin(2 * chi - d.theta1 - d.theta2)

    a11 = (k0 * l1 * s_2chi_t1 - st0 * s_2chi_t1 - k0 * l2 * cchi * st1) / (st1 * st2)
    a12 = (l1 * s_2chi_t1 - l2 * cchi * st1) / (st0 * st1 * st2)
    a21 = (
        k2 * st0 * s_2chi_t1 / st1
        + 2 * schi * s_2chi_t1_t2 * (k0 * l1 - st0) / (l2 * st1)
        - k0 * (s_2chi_t2 + k2 * l1 * s_2chi_t1 / st1 - k2 * l2 * cchi)
    )
    a22 = (2 * l1 * schi * s_2chi_t1_t2 - k2 * l1 * l2 * s_2chi_t1) / (
        l2 * st0 * st1
    ) + (k2 * l2 * cchi - s_2chi_t2) / st0
    return np.array([[a11, a12], [a21, a22]])


def well_conditioned(d: StepData) -> bool:
    """True when the step is far enough from chart singularities for the
    analytic/numeric Jacobian comparison to be meaningful: every sine of
    theta at least 1e-4 and ell2 at least 1e-6 * mu."""
    return (
        min(math.sin(d.theta0), math.sin(d.theta1), math.sin(d.theta2)) >= 1e-4
        and d.ell2 >= 1e-6 * d.mu
    )


def _map_su(curve: Curve, mu: float, s: float, u: float) -> tuple[float, float]:
    z1, data = step(curve, mu, PhasePoint.from_u(s, u))
    if data is None:
        raise DegenerateStep("finite-difference stencil touched the identity region")
    return z1.s, z1.u


def jacobian_numeric(
    curve: Curve, mu: float, z: PhasePoint, h: float = 1e-6
) -> np.ndarray:
    """Finite-difference derivative of one map step in the (s, u) chart.

    Central differences with step ``h * max(1, L)`` in s and ``h`` in u;
    the stencil falls back to one-sided differences when u +/- h would
    leave (-1, 1).  s-differences are wrapped to the shortest signed
    representative, so the stencil may straddle s = 0.
    """
    L = curve.total_length()
    hs = h * max(1.0, L)
    hu = h

    def wrap_diff(a: float, b: float) -> float:
        return (a - b + 0.5 * L) % L - 0.5 * L

    s_p, u_p = _map_su(curve, mu, z.s + hs, z.u)
    s_m, u_m = _map_su(curve, mu, z.s - hs, z.u)
    ds2_ds0 = wrap_diff(s_p, s_m) / (2 * hs)
    du2_ds0 = (u_p - u_m) / (2 * hs)

    u_hi, u_lo = z.u + hu, z.u - hu
    margin = 1.0 - 1e-9
    if u_hi < margin and u_lo > -margin:
        s_p, u_p = _map_su(curve, mu, z.s, u_hi)
        s_m, u_m = _map_su(curve, mu, z.s, u_lo)
        denom = 2 * hu
    elif u_hi >= margin:  # one-sided downwards
        s_p, u_p = _map_su(curve, mu, z.s, z.u)
        s_m, u_m = _map_su(curve, mu, z.s, u_lo)
        denom = hu
    else:  # one-sided upwards
        s_p, u_p = _map_su(curve, mu, z.s, u_hi)
        s_m, u_m = _map_su(curve, mu, z.s, z.u)
        denom = hu
    ds2_du0 = wrap_diff(s_p, s_m) / denom
    du2_du0 = (u_p - u_m) / denom

    return np.array([[ds2_ds0, ds2_du0], [du2_ds0, du2_du0]])
