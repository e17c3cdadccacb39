"""Boundary geometry of convex billiard tables.

Every table is a simple closed curve parametrized anticlockwise by arc
length, with ``s = 0`` at the rightmost boundary point (the intersection
with the positive x-axis).  A curve exposes

* ``point_at(s)``, ``tangent_at(s)``, ``curvature_at(s)`` — pointwise
  differential geometry in the arclength chart;
* ``implicit(p)`` / ``implicit_gradient(p)`` — a defining function F with
  F < 0 strictly inside, used by the collision routines (``implicit``
  accepts arrays of points and is vectorized);
* ``locate(p)`` — inverse of ``point_at`` for points on the boundary;
* ``contains(p)``, ``total_length()``.

Circle and stadium have exact arclength formulas.  Ellipse and
superellipse are defined through a native angle parameter and carry an
:class:`ArclengthTable`: cumulative Gauss–Legendre quadrature of the
parametric speed on a dense panel grid, inverted by monotone cubic
(PCHIP) interpolation plus a Newton polish on the quadrature itself.

The inward unit normal is the positive quarter-turn of the tangent; for an
anticlockwise convex boundary this points into the table and equals
``-grad F / |grad F|``.
"""

from __future__ import annotations

import math
from abc import ABC, abstractmethod
from typing import Callable

import numpy as np
from scipy.interpolate import PchipInterpolator

__all__ = [
    "Curve",
    "Circle",
    "Ellipse",
    "Superellipse",
    "Stadium",
    "ImplicitSmooth",
    "ArclengthTable",
    "make_curve",
    "rot90",
]

_TWO_PI = 2.0 * math.pi

# Gauss-Legendre rule reused for every arclength panel.
_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(12)


def rot90(v: np.ndarray) -> np.ndarray:
    """Rotate a 2-vector by +90 degrees (anticlockwise)."""
    return np.array([-v[1], v[0]])


class ArclengthTable:
    """Cumulative arclength of a native-parameter curve on [0, 2*pi).

    ``speed`` must be vectorized.  The table stores arclength at
    ``panels + 1`` equally spaced parameter nodes; between nodes the
    arclength is completed with the same Gauss-Legendre rule used to
    build the table, so ``s_of_t`` is smooth and self-consistent.
    """

    def __init__(self, speed: Callable[[np.ndarray], np.ndarray], panels: int = 2048):
        self._speed = speed
        self.t_nodes = np.linspace(0.0, _TWO_PI, panels + 1)
        half = 0.5 * (_TWO_PI / panels)
        mid = 0.5 * (self.t_nodes[:-1] + self.t_nodes[1:])
        # all panels in one vectorized evaluation: shape (panels, order)
        pts = mid[:, None] + half * _GL_NODES[None, :]
        panel_lengths = half * (speed(pts.ravel()).reshape(pts.shape) @ _GL_WEIGHTS)
        self.s_nodes = np.concatenate(([0.0], np.cumsum(panel_lengths)))
        self.total_length = float(self.s_nodes[-1])
        self._t_of_s_guess = PchipInterpolator(self.s_nodes, self.t_nodes)

    def s_of_t(self, t: float) -> float:
        """Arclength from parameter 0 to ``t`` (t in [0, 2*pi])."""
        t = float(np.clip(t, 0.0, _TWO_PI))
        i = min(int(np.searchsorted(self.t_nodes, t, side="right")) - 1,
                len(self.t_nodes) - 2)
        a = self.t_nodes[i]
        half = 0.5 * (t - a)
        if half == 0.0:
            return float(self.s_nodes[i])
        mid = a + half
        partial = half * float(self._speed(mid + half * _GL_NODES) @ _GL_WEIGHTS)
        return float(self.s_nodes[i] + partial)

    def t_of_s(self, s: float) -> float:
        """Parameter at arclength ``s`` (s in [0, L]); Newton-polished."""
        s = float(np.clip(s, 0.0, self.total_length))
        t = float(self._t_of_s_guess(s))
        for _ in range(3):
            t -= (self.s_of_t(t) - s) / float(self._speed(np.array([t]))[0])
            t = min(max(t, 0.0), _TWO_PI)
        return t


class Curve(ABC):
    """Convex billiard table boundary, parametrized by arc length."""

    @abstractmethod
    def total_length(self) -> float: ...

    @abstractmethod
    def point_at(self, s: float) -> np.ndarray: ...

    @abstractmethod
    def tangent_at(self, s: float) -> np.ndarray: ...

    @abstractmethod
    def curvature_at(self, s: float) -> float: ...

    @abstractmethod
    def implicit(self, p: np.ndarray) -> np.ndarray | float:
        """Defining function, negative strictly inside.  ``p`` may be a
        single point of shape (2,) or an array of points of shape (n, 2)."""

    @abstractmethod
    def implicit_gradient(self, p: np.ndarray) -> np.ndarray: ...

    @abstractmethod
    def locate(self, p: np.ndarray) -> float:
        """Arclength of a point on (or within 1e-8 of) the boundary."""

    def inward_normal_at(self, s: float) -> np.ndarray:
        return rot90(self.tangent_at(s))

    def contains(self, p: np.ndarray) -> bool:
        return bool(self.implicit(np.asarray(p, dtype=float)) < 0.0)

    def wrap(self, s: float) -> float:
        return float(s) % self.total_length()

    # A conservative upper bound on the diameter, used to cap chord searches.
    @abstractmethod
    def diameter_bound(self) -> float: ...

    def _check_on_boundary(self, p: np.ndarray, tol: float = 1e-8) -> None:
        val = float(self.implicit(p))
        grad = self.implicit_gradient(p)
        dist = abs(val) / max(float(np.hypot(*grad)), 1e-300)
        if dist > tol * max(1.0, self.diameter_bound()):
            raise ValueError(
                f"point {p!r} is not on the boundary: implicit value {val:.3e} "
                f"corresponds to distance ~{dist:.3e}"
            )


class Circle(Curve):
    """Circle of radius R centered at the origin."""

    def __init__(self, R: float):
        if R <= 0:
            raise ValueError(f"circle radius must be positive, got {R}")
        self.R = float(R)

    def total_length(self) -> float:
        return _TWO_PI * self.R

    def point_at(self, s: float) -> np.ndarray:
        a = self.wrap(s) / self.R
        return self.R * np.array([math.cos(a), math.sin(a)])

    def tangent_at(self, s: float) -> np.ndarray:
        a = self.wrap(s) / self.R
        return np.array([-math.sin(a), math.cos(a)])

    def curvature_at(self, s: float) -> float:
        return 1.0 / self.R

    def implicit(self, p):
        p = np.asarray(p, dtype=float)
        return p[..., 0] ** 2 + p[..., 1] ** 2 - self.R**2

    def implicit_gradient(self, p):
        p = np.asarray(p, dtype=float)
        return 2.0 * p

    def locate(self, p) -> float:
        p = np.asarray(p, dtype=float)
        self._check_on_boundary(p)
        return self.wrap(self.R * math.atan2(p[1], p[0]))

    def diameter_bound(self) -> float:
        return 2.0 * self.R


class _TableCurve(Curve):
    """Shared machinery for curves defined by a native angle parameter."""

    _table: ArclengthTable

    # subclass interface -----------------------------------------------------
    def _pt(self, t: float) -> np.ndarray: ...
    def _vel(self, t: float) -> np.ndarray: ...
    def _kappa(self, t: float) -> float: ...
    def _t_of_point(self, p: np.ndarray) -> float: ...
    def _speed_arr(self, t: np.ndarray) -> np.ndarray: ...

    def total_length(self) -> float:
        return self._table.total_length

    def point_at(self, s: float) -> np.ndarray:
        return self._pt(self._table.t_of_s(self.wrap(s)))

    def tangent_at(self, s: float) -> np.ndarray:
        v = self._vel(self._table.t_of_s(self.wrap(s)))
        return v / np.hypot(*v)

    def curvature_at(self, s: float) -> float:
        return self._kappa(self._table.t_of_s(self.wrap(s)))

    def locate(self, p) -> float:
        p = np.asarray(p, dtype=float)
        self._check_on_boundary(p)
        return self.wrap(self._table.s_of_t(self._t_of_point(p)))


class Ellipse(_TableCurve):
    """Ellipse x^2/a^2 + y^2/b^2 = 1 with a > b > 0."""

    def __init__(self, a: float, b: float, panels: int = 2048):
        if not a > b > 0:
            raise ValueError(f"ellipse semi-axes must satisfy a > b > 0, got a={a}, b={b}")
        self.a = float(a)
        self.b = float(b)
        self._table = ArclengthTable(self._speed_arr, panels)

    def _speed_arr(self, t):
        return np.sqrt((self.a * np.sin(t)) ** 2 + (self.b * np.cos(t)) ** 2)

    def _pt(self, t):
        return np.array([self.a * math.cos(t), self.b * math.sin(t)])

    def _vel(self, t):
        return np.array([-self.a * math.sin(t), self.b * math.cos(t)])

    def _kappa(self, t):
        sp = math.hypot(self.a * math.sin(t), self.b * math.cos(t))
        return self.a * self.b / sp**3

    def _t_of_point(self, p):
        return math.atan2(p[1] / self.b, p[0] / self.a) % _TWO_PI

    def implicit(self, p):
        p = np.asarray(p, dtype=float)
        return (p[..., 0] / self.a) ** 2 + (p[..., 1] / self.b) ** 2 - 1.0

    def implicit_gradient(self, p):
        p = np.asarray(p, dtype=float)
        return np.array([2.0 * p[0] / self.a**2, 2.0 * p[1] / self.b**2])

    def diameter_bound(self) -> float:
        return 2.0 * self.a


class Superellipse(_TableCurve):
    """The curve x^(2k) + y^(2k) = 1 for integer k >= 1.

    Strictly convex; for k >= 2 the curvature vanishes at the four axis
    points and peaks at the four diagonal points.  Parametrized by polar
    angle: r(phi) = (cos(phi)^(2k) + sin(phi)^(2k))^(-1/(2k)), which keeps
    the parametric speed bounded (the classic Lame parametrization does
    not).
    """

    def __init__(self, k: int, panels: int = 2048):
        if int(k) != k or k < 1:
            raise ValueError(f"superellipse exponent k must be an integer >= 1, got {k}")
        self.k = int(k)
        self._table = ArclengthTable(self._speed_arr, panels)

    # r(phi) and its phi-derivative, sign-safe via even powers of cos/sin
    def _r_rp(self, t):
        k = self.k
        c2 = np.cos(t) ** 2
        s2 = np.sin(t) ** 2
        u = c2**k + s2**k
        r = u ** (-1.0 / (2 * k))
        du = 2 * k * np.sin(t) * np.cos(t) * (s2 ** (k - 1) - c2 ** (k - 1))
        rp = -(1.0 / (2 * k)) * u ** (-1.0 / (2 * k) - 1.0) * du
        return r, rp

    def _speed_arr(self, t):
        r, rp = self._r_rp(np.asarray(t, dtype=float))
        return np.sqrt(r * r + rp * rp)

    def _pt(self, t):
        r, _ = self._r_rp(t)
        return np.array([r * math.cos(t), r * math.sin(t)])

    def _vel(self, t):
        r, rp = self._r_rp(t)
        c, s = math.cos(t), math.sin(t)
        return np.array([rp * c - r * s, rp * s + r * c])

    def _kappa(self, t):
        # curvature from the implicit form F = x^(2k) + y^(2k) - 1:
        # kappa = (Fxx Fy^2 - 2 Fxy Fx Fy + Fyy Fx^2)/|grad F|^3 with Fxy = 0
        p = self._pt(t)
        k = self.k
        x2 = p[0] ** 2
        y2 = p[1] ** 2
        fx = 2 * k * p[0] * x2 ** (k - 1)
        fy = 2 * k * p[1] * y2 ** (k - 1)
        num = 2 * k * (2 * k - 1) * (x2 ** (k - 1) * fy**2 + y2 ** (k - 1) * fx**2)
        return float(num / math.hypot(fx, fy) ** 3)

    def _t_of_point(self, p):
        return math.atan2(p[1], p[0]) % _TWO_PI

    def implicit(self, p):
        p = np.asarray(p, dtype=float)
        k = self.k
        return (p[..., 0] ** 2) ** k + (p[..., 1] ** 2) ** k - 1.0

    def implicit_gradient(self, p):
        p = np.asarray(p, dtype=float)
        k = self.k
        return np.array(
            [2 * k * p[0] * (p[0] ** 2) ** (k - 1), 2 * k * p[1] * (p[1] ** 2) ** (k - 1)]
        )

    def diameter_bound(self) -> float:
        # farthest points are the diagonal ones, at radius sqrt(2) * 2^(-1/(2k))
        return 2.0 * 2.0 ** (0.5 - 1.0 / (2.0 * self.k))


class Stadium(Curve):
    """Stadium: rectangle of width ``side`` and height 2R, capped by two
    radius-R semicircles on the left and right.

    Piecewise-exact arclength; curvature jumps between 0 (sides) and 1/R
    (caps), and ``curvature_at`` returns the value of the piece *ahead* in
    the anticlockwise direction at the four junctions.  The implicit
    function is the capsule signed-distance field, which is C^1 across the
    junction normals.
    """

    def __init__(self, side: float, R: float):
        if side <= 0 or R <= 0:
            raise ValueError(f"stadium needs side > 0 and R > 0, got side={side}, R={R}")
        self.side = float(side)
        self.R = float(R)
        self._cap = math.pi * self.R  # length of one semicircular cap
        self._L = 2.0 * self.side + 2.0 * self._cap

    def total_length(self) -> float:
        return self._L

    # piece boundaries: [0, cap/2) right-upper cap, [cap/2, cap/2+side) top,
    # [cap/2+side, 3cap/2+side) left cap, then bottom, then right-lower cap.
    def _piece(self, s: float):
        s = self.wrap(s)
        h = 0.5 * self._cap
        if s < h:
            return "cap_r", s
        if s < h + self.side:
            return "top", s - h
        if s < 3 * h + self.side:
            return "cap_l", s - h - self.side
        if s < 3 * h + 2 * self.side:
            return "bottom", s - 3 * h - self.side
        return "cap_r2", s - 3 * h - 2 * self.side

    def point_at(self, s: float) -> np.ndarray:
        piece, u = self._piece(s)
        hx = 0.5 * self.side
        R = self.R
        if piece == "cap_r":
            a = u / R
            return np.array([hx + R * math.cos(a), R * math.sin(a)])
        if piece == "top":
            return np.array([hx - u, R])
        if piece == "cap_l":
            a = math.pi / 2 + u / R
            return np.array([-hx + R * math.cos(a), R * math.sin(a)])
        if piece == "bottom":
            return np.array([-hx + u, -R])
        a = 3 * math.pi / 2 + u / R
        return np.array([hx + R * math.cos(a), R * math.sin(a)])

    def tangent_at(self, s: float) -> np.ndarray:
        piece, u = self._piece(s)
        R = self.R
        if piece == "cap_r":
            a = u / R
        elif piece == "top":
            return np.array([-1.0, 0.0])
        elif piece == "cap_l":
            a = math.pi / 2 + u / R
        elif piece == "bottom":
            return np.array([1.0, 0.0])
        else:
            a = 3 * math.pi / 2 + u / R
        return np.array([-math.sin(a), math.cos(a)])

    def curvature_at(self, s: float) -> float:
        piece, _ = self._piece(s)
        return 0.0 if piece in ("top", "bottom") else 1.0 / self.R

    def implicit(self, p):
        p = np.asarray(p, dtype=float)
        qx = np.maximum(np.abs(p[..., 0]) - 0.5 * self.side, 0.0)
        return np.hypot(qx, p[..., 1]) - self.R

    def implicit_gradient(self, p):
        p = np.asarray(p, dtype=float)
        qx = max(abs(p[0]) - 0.5 * self.side, 0.0)
        h = math.hypot(qx, p[1])
        if h == 0.0:
            return np.array([0.0, 0.0])
        return np.array([math.copysign(qx, p[0]) / h, p[1] / h])

    def locate(self, p) -> float:
        p = np.asarray(p, dtype=float)
        self._check_on_boundary(p)
        hx = 0.5 * self.side
        h = 0.5 * self._cap
        x, y = float(p[0]), float(p[1])
        if x >= hx:
            a = math.atan2(y, x - hx)  # in (-pi/2, pi/2)
            return self.wrap(self.R * a)
        if x <= -hx:
            a = math.atan2(y, x + hx) % _TWO_PI  # in (pi/2, 3pi/2)
            return self.wrap(h + self.side + self.R * (a - math.pi / 2))
        if y > 0:
            return self.wrap(h + (hx - x))
        return self.wrap(3 * h + self.side + (x + hx))

    def diameter_bound(self) -> float:
        return self.side + 2.0 * self.R


class ImplicitSmooth(Curve):
    """Star-shaped (about the origin) boundary given by an implicit
    function ``f(x, y)`` with f < 0 inside.

    Geometry is recovered numerically: the boundary point along each polar
    ray by bisection, tangent and curvature by central differences in the
    polar angle.  Intended for qualitative demonstrations on non-convex
    tables; not used for any golden-value computation.
    """

    def __init__(self, f: Callable[[np.ndarray, np.ndarray], np.ndarray],
                 r_max: float, panels: int = 2048, fd_h: float = 1e-5):
        self.f = f
        self.r_max = float(r_max)
        self._h = fd_h
        self._table = ArclengthTable(self._speed_arr, panels)

    def _radius(self, t: float) -> float:
        lo, hi = 1e-9, self.r_max
        if self.f(np.array(lo * math.cos(t)), np.array(lo * math.sin(t))) >= 0:
            raise ValueError("implicit curve must enclose the origin")
        for _ in range(80):
            mid = 0.5 * (lo + hi)
            v = float(self.f(np.array(mid * math.cos(t)), np.array(mid * math.sin(t))))
            if v < 0:
                lo = mid
            else:
                hi = mid
        return 0.5 * (lo + hi)

    def _pt(self, t: float) -> np.ndarray:
        r = self._radius(t)
        return np.array([r * math.cos(t), r * math.sin(t)])

    def _vel(self, t: float) -> np.ndarray:
        return (self._pt(t + self._h) - self._pt(t - self._h)) / (2 * self._h)

    def _speed_arr(self, t):
        t = np.atleast_1d(np.asarray(t, dtype=float))
        return np.array([float(np.hypot(*self._vel(ti))) for ti in t])

    def total_length(self) -> float:
        return self._table.total_length

    def point_at(self, s: float) -> np.ndarray:
        return self._pt(self._table.t_of_s(self.wrap(s)))

    def tangent_at(self, s: float) -> np.ndarray:
        v = self._vel(self._table.t_of_s(self.wrap(s)))
        return v / np.hypot(*v)

    def curvature_at(self, s: float) -> float:
        t = self._table.t_of_s(self.wrap(s))
        h = self._h
        v = self._vel(t)
        acc = (self._pt(t + h) - 2.0 * self._pt(t) + self._pt(t - h)) / h**2
        sp = math.hypot(*v)
        return float((v[0] * acc[1] - v[1] * acc[0]) / sp**3)

    def implicit(self, p):
        p = np.asarray(p, dtype=float)
        return self.f(p[..., 0], p[..., 1])

    def implicit_gradient(self, p):
        p = np.asarray(p, dtype=float)
        h = self._h
        fx = (float(self.f(p[0] + h, p[1])) - float(self.f(p[0] - h, p[1]))) / (2 * h)
        fy = (float(self.f(p[0], p[1] + h)) - float(self.f(p[0], p[1] - h))) / (2 * h)
        return np.array([fx, fy])

    def locate(self, p) -> float:
        p = np.asarray(p, dtype=float)
        self._check_on_boundary(p, tol=1e-6)
        return self.wrap(self._table.s_of_t(math.atan2(p[1], p[0]) % _TWO_PI))

    def diameter_bound(self) -> float:
        return 2.0 * self.r_max


_KINDS = {"circle", "ellipse", "superellipse", "stadium"}


def make_curve(config: dict) -> Curve:
    """Build a curve from a plain config mapping.

    Recognized kinds: ``circle`` (R), ``ellipse`` (a, b), ``superellipse``
    (k), ``stadium`` (side, R).  Unknown kinds or missing parameters raise
    ``ValueError`` with the offending key named.
    """
    if "kind" not in config:
        raise ValueError("curve config needs a 'kind' key")
    kind = config["kind"]
    params = {key: val for key, val in config.items() if key != "kind"}
    try:
        if kind == "circle":
            return Circle(**params)
        if kind == "ellipse":
            return Ellipse(**params)
        if kind == "superellipse":
            return Superellipse(**params)
        if kind == "stadium":
            return Stadium(**params)
    except TypeError as exc:
        raise ValueError(f"bad parameters for curve kind {kind!r}: {exc}") from exc
    raise ValueError(f"unknown curve kind {kind!r}; expected one of {sorted(_KINDS)}")
