"""Contours for the double integral and their Gauss-Legendre discretization."""

from __future__ import annotations

import csv
import enum
import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .errors import DomainError, GeometryError
from .spectral_model import (ModelSpec, Variant, edge_constants, saddle_points,
                             zeta_curve, zeta_curve_deriv, zeta_range)


class SegmentKind(str, enum.Enum):
    VerticalLine = "VerticalLine"
    HorizontalSegment = "HorizontalSegment"
    CircularArc = "CircularArc"
    ZetaCurve = "ZetaCurve"
    LineSegment = "LineSegment"
    EllipticArc = "EllipticArc"


class Orientation(str, enum.Enum):
    Forward = "Forward"
    Reverse = "Reverse"


_STRAIGHT = (SegmentKind.VerticalLine, SegmentKind.HorizontalSegment, SegmentKind.LineSegment)


@dataclass(frozen=True)
class ContourSegment:
    kind: SegmentKind
    params: dict
    orientation: Orientation = Orientation.Forward
    tag: str = ""

    @property
    def straight(self) -> bool:
        return self.kind in _STRAIGHT

    def _raw(self, u):
        p = self.params
        k = self.kind
        if k in _STRAIGHT:
            a, b = p["a"], p["b"]
            return a + (b - a) * u, np.full(np.shape(u), b - a, dtype=complex)
        if k is SegmentKind.CircularArc:
            th = p["theta0"] + (p["theta1"] - p["theta0"]) * u
            e = p["radius"] * np.exp(1j * th)
            return p["center"] + e, 1j * e * (p["theta1"] - p["theta0"])
        if k is SegmentKind.EllipticArc:
            th = p["theta0"] + (p["theta1"] - p["theta0"]) * u
            ra, rb = p["a"], p["b"]
            z = p["center"] + ra * np.cos(th) + 1j * rb * np.sin(th)
            dz = (-ra * np.sin(th) + 1j * rb * np.cos(th)) * (p["theta1"] - p["theta0"])
            return z, dz
        # ZetaCurve
        th = p["phi0"] + (p["phi1"] - p["phi0"]) * u
        z = p["scale"] * zeta_curve(p["spec"], th)
        dz = p["scale"] * zeta_curve_deriv(p["spec"], th) * (p["phi1"] - p["phi0"])
        if p.get("branch", 1) < 0:
            z, dz = np.conj(z), np.conj(dz)
        return z, dz

    def point(self, u):
        u = np.asarray(u, dtype=float)
        if self.orientation is Orientation.Reverse:
            return self._raw(1.0 - u)[0]
        return self._raw(u)[0]

    def deriv(self, u):
        u = np.asarray(u, dtype=float)
        if self.orientation is Orientation.Reverse:
            return -self._raw(1.0 - u)[1]
        return self._raw(u)[1]

    @property
    def start(self) -> complex:
        return complex(self.point(0.0))

    @property
    def end(self) -> complex:
        return complex(self.point(1.0))

    def length(self) -> float:
        if self.straight:
            return abs(self.params["b"] - self.params["a"])
        t, w = _gl(64)
        u = 0.5 * (t + 1)
        return float(0.5 * np.sum(w * np.abs(self.deriv(u))))


def line(a, b, tag="", kind=None) -> ContourSegment:
    a, b = complex(a), complex(b)
    if abs(b - a) == 0:
        raise GeometryError("degenerate segment")
    if kind is None:
        if a.real == b.real:
            kind = SegmentKind.VerticalLine
        elif a.imag == b.imag:
            kind = SegmentKind.HorizontalSegment
        else:
            kind = SegmentKind.LineSegment
    return ContourSegment(kind, {"a": a, "b": b}, tag=tag)


def zeta_segment(spec, scale, phi0, phi1, branch=1, tag="") -> ContourSegment:
    if phi0 == phi1:
        raise GeometryError("degenerate zeta segment")
    return ContourSegment(SegmentKind.ZetaCurve, {"spec": spec, "scale": float(scale), "phi0": float(phi0),
                                                  "phi1": float(phi1), "branch": branch}, tag=tag)


def arc(center, radius, theta0, theta1, tag="") -> ContourSegment:
    return ContourSegment(SegmentKind.CircularArc, {"center": complex(center), "radius": float(radius),
                                                    "theta0": float(theta0), "theta1": float(theta1)}, tag=tag)


@dataclass(frozen=True)
class Contour:
    segments: tuple
    closed: bool
    name: str = ""
    saddles: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "segments", tuple(self.segments))
        segs = self.segments
        for s0, s1 in zip(segs, segs[1:]):
            if abs(s0.end - s1.start) > 1e-12 * max(1.0, abs(s0.end)) * 1e3:
                raise GeometryError(f"{self.name}: segments do not join ({s0.end} vs {s1.start})")
        if self.closed and abs(segs[-1].end - segs[0].start) > 1e-9 * max(1.0, abs(segs[0].start)):
            raise GeometryError(f"{self.name}: closed contour does not return to its start")

    def subcontour(self, *tags, name=None) -> "Contour":
        segs = [s for s in self.segments if any(s.tag.startswith(t) for t in tags)]
        if not segs:
            raise GeometryError(f"no segments tagged {tags}")
        return Contour.__new__(Contour)._init_loose(segs, name or f"{self.name}:{'+'.join(tags)}",
                                                    self.saddles)

    def _init_loose(self, segs, name, saddles):
        # pieces of a contour need not be connected
        object.__setattr__(self, "segments", tuple(segs))
        object.__setattr__(self, "closed", False)
        object.__setattr__(self, "name", name)
        object.__setattr__(self, "saddles", tuple(saddles))
        return self

    def length(self) -> float:
        return sum(s.length() for s in self.segments)


@dataclass(frozen=True)
class QuadratureGrid:
    nodes: np.ndarray
    weights: np.ndarray
    sourceContour: Contour
    segment: np.ndarray = field(default=None, repr=False)


@lru_cache(maxsize=16)
def _gl(order):
    t, w = np.polynomial.legendre.leggauss(order)
    return t, w


# ---------------------------------------------------------------- discretization


def _breakpoints(seg, step, max_panels=200_000):
    """Panel boundaries in the segment parameter for a target local panel length step(z)."""
    us = [0.0]
    u = 0.0
    while u < 1.0:
        z = complex(seg.point(u))
        speed = abs(complex(seg.deriv(u)))
        du = step(z) / speed
        # look ahead once so a shrinking step is honoured at the far end too
        u2 = min(1.0, u + du)
        z2 = complex(seg.point(u2))
        du = min(du, step(z2) / max(abs(complex(seg.deriv(u2))), 1e-300))
        du = max(du, 1e-12)
        u = min(1.0, u + du)
        if 1.0 - u < 0.25 * du:
            u = 1.0
        us.append(u)
        if len(us) > max_panels:
            raise GeometryError("too many panels requested")
    return np.array(us)


def panel_breaks(c: Contour, step) -> list:
    """Panel boundaries (segment parameters) for every segment of c."""
    return [_breakpoints(seg, step) for seg in c.segments]


def discretize(c: Contour, panelsPerUnitLength: float = 1.0, order: int = 16, step=None,
               saddleRadius: float | None = None, breaks=None) -> QuadratureGrid:
    """Composite Gauss-Legendre rule along the contour (complex dz weights)."""
    if order not in (8, 16, 32):
        raise DomainError("order must be 8, 16 or 32")
    if step is None:
        h0 = 1.0 / panelsPerUnitLength
        sad = np.array(c.saddles, dtype=complex)

        def step(z):
            if saddleRadius is not None and len(sad) and np.min(np.abs(sad - z)) < 3 * saddleRadius:
                return 0.5 * h0
            return h0
    if breaks is None:
        breaks = panel_breaks(c, step)
    t, w = _gl(order)
    nodes, weights, segidx = [], [], []
    for k, (seg, us) in enumerate(zip(c.segments, breaks)):
        a, b = us[:-1], us[1:]
        half = 0.5 * (b - a)
        u = (0.5 * (a + b))[:, None] + half[:, None] * t[None, :]
        z = seg.point(u.ravel())
        dz = seg.deriv(u.ravel())
        nodes.append(z)
        weights.append(dz * (half[:, None] * w[None, :]).ravel())
        segidx.append(np.full(z.size, k))
    return QuadratureGrid(np.concatenate(nodes), np.concatenate(weights), c, np.concatenate(segidx))


def discretize_count(c: Contour, points: int) -> QuadratureGrid:
    """About `points` midpoint nodes spread over the segments in proportion to length."""
    lens = np.array([s.length() for s in c.segments])
    counts = np.maximum(1, np.round(points * lens / lens.sum()).astype(int))
    nodes, weights, segidx = [], [], []
    for k, (seg, m) in enumerate(zip(c.segments, counts)):
        u = (np.arange(m) + 0.5) / m
        nodes.append(seg.point(u))
        weights.append(seg.deriv(u) / m)
        segidx.append(np.full(m, k))
    return QuadratureGrid(np.concatenate(nodes), np.concatenate(weights), c, np.concatenate(segidx))


def winding_number(grid: QuadratureGrid, p: complex) -> complex:
    return complex(np.sum(grid.weights / (grid.nodes - p)) / (2j * math.pi))


def export_csv(c: Contour, path, samples: int = 200):
    """Sampled contour as CSV rows (segment_index, param, re, im)."""
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(["segment_index", "param", "re", "im"])
        for k, seg in enumerate(c.segments):
            u = np.linspace(0.0, 1.0, samples)
            for uu, z in zip(u, seg.point(u)):
                wr.writerow([k, repr(float(uu)), repr(float(z.real)), repr(float(z.imag))])


# ---------------------------------------------------------------- geometry helpers


def _radius_param(spec, r):
    """Curve parameter where |zeta| = r (|zeta| decreases along the curve)."""
    lo, hi = 0.0, zeta_range(spec)
    if not (0 < r < abs(complex(zeta_curve(spec, 0.0)))):
        raise GeometryError("radius outside the curve's range")
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if abs(complex(zeta_curve(spec, mid))) > r:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def _re_param(spec, re_target, th_max):
    """Parameter in (0, th_max) where Re zeta = re_target (Re zeta decreases along the curve)."""
    lo, hi = 0.0, th_max
    f_lo = complex(zeta_curve(spec, lo)).real - re_target
    f_hi = complex(zeta_curve(spec, hi)).real - re_target
    if f_lo <= 0 or f_hi >= 0:
        raise GeometryError("vertical line does not cross the saddle curve")
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if complex(zeta_curve(spec, mid)).real > re_target:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def scaled_sigma(spec: ModelSpec, n: int, R: float, cuts=(), tag="curved") -> list:
    """Segments of n * Sigma-tilde^r (radius R in the scaled plane), counterclockwise.

    The curve is split at the parameters in `cuts` (e.g. where a vertical line
    crosses it) so that every crossing is a panel boundary.
    """
    th_R = _radius_param(spec, R / n)
    pts = sorted({0.0, th_R, *[c for c in cuts if 0 < c < th_R]})
    segs = []
    for a, b in zip(pts, pts[1:]):
        segs.append(zeta_segment(spec, n, a, b, 1, tag))
    segs.append(arc(0.0, R, th_R, 2 * math.pi - th_R, tag))
    for a, b in reversed(list(zip(pts, pts[1:]))):
        segs.append(zeta_segment(spec, n, b, a, -1, tag))
    return segs


def default_radius(n: int, eps_prime: float = 0.1) -> float:
    return math.floor(eps_prime * n) + 0.5


def _scan_height(spec, n, re_s, start=0.0, drop=45.0):
    """Half-height where Re F along Re s = re_s has fallen `drop` below its peak and keeps falling."""
    from .phase_functions import PhaseContext, big_F
    ctx = PhaseContext(spec.with_n(n), 1.0)
    tau = start + np.arange(0, 4000, 1.0)
    vals = np.empty_like(tau)
    for i in range(0, len(tau), 200):
        chunk = tau[i:i + 200]
        vals[i:i + 200] = big_F(ctx, re_s + 1j * chunk).real
        peak = np.max(vals[:i + 200])
        below = np.nonzero(vals[:i + 200] < peak - drop)[0]
        if below.size and below[-1] > np.argmax(vals[:i + 200]):
            k = below[np.searchsorted(below, np.argmax(vals[:i + 200]))]
            tail = vals[k:i + 200]
            if tail.size > 5 and np.all(np.diff(tail[:6]) < 0):
                return float(tau[k] + 5)
    raise GeometryError("integrand along C did not decay")


# ---------------------------------------------------------------- builders


def build_sigma_tilde(M, epsilon: float) -> Contour:
    spec = M if isinstance(M, ModelSpec) else ModelSpec(Variant.GinibreProduct, 1, int(M))
    z_right = abs(complex(zeta_curve(spec, 0.0)))
    if not (0 < epsilon < 0.5 * min(1.0, z_right)):
        raise DomainError("epsilon too large for the curve")
    segs = scaled_sigma(spec, 1, epsilon)
    return Contour(segs, True, "SigmaTilde")


def bulk_abscissa(spec: ModelSpec, phi: float, bar: float = 0.2, shift: bool = True) -> float:
    """Re s of the vertical contour C, moved to a half-integer when it (or a bar) would sit too close to an integer."""
    wp, _ = saddle_points(spec, phi)
    c = spec.n * wp.real
    if shift:
        d = abs(c - round(c))
        if d < 0.1 + bar:
            c = math.floor(c) + 0.5
            if spec.variant is Variant.WithInverses and c >= spec.n:
                c -= 1.0
    return c


def build_bulk_contours(spec: ModelSpec, phi: float, epsilonPair=None, shift: bool = True,
                        height: float | None = None):
    """(C, SigmaCurved, SigmaVertical) for the bulk regime.

    SigmaCurved holds the left piece (tag S1) and the right piece (tag S2) of
    n*Sigma-tilde^r; SigmaVertical holds the bars S3 and S4 closing them.
    """
    n = spec.n
    if n < 10:
        raise DomainError("bulk contours need n >= 10")
    eps, eps_prime = epsilonPair if epsilonPair is not None else (0.2 / n, 0.1)
    bar = eps * n
    wp, wm = saddle_points(spec, phi)
    c = bulk_abscissa(spec, phi, bar, shift)
    R = default_radius(n, eps_prime)
    th_R = _radius_param(spec, R / n)
    zR = n * complex(zeta_curve(spec, th_R))
    if c - bar <= zR.real + 1e-9 or c + bar >= n * complex(zeta_curve(spec, 0.0)).real:
        raise GeometryError("vertical contour does not cut the curved part of Sigma twice")
    thL = _re_param(spec, (c - bar) / n, th_R)
    thRt = _re_param(spec, (c + bar) / n, th_R)
    S1 = [zeta_segment(spec, n, thL, th_R, 1, "S1"), arc(0.0, R, th_R, 2 * math.pi - th_R, "S1"),
          zeta_segment(spec, n, th_R, thL, -1, "S1")]
    S2 = [zeta_segment(spec, n, thRt, 0.0, -1, "S2"), zeta_segment(spec, n, 0.0, thRt, 1, "S2")]
    p1u, p1d = S1[0].start, S1[-1].end
    p2u, p2d = S2[-1].end, S2[0].start
    S3 = line(p1d, p1u, "S3")
    S4 = line(p2u, p2d, "S4")
    if shift:
        for x in (c, c - bar, c + bar):
            if abs(x - round(x)) < 0.1 - 1e-12:
                raise GeometryError("contour passes too close to an integer")
    if height is None:
        height = 2.0 * n * (abs(wp) + 1.0)
    C = Contour([line(c - 1j * height, c + 1j * height, "C")], False, "C", (n * wp, n * wm))
    curved = Contour.__new__(Contour)._init_loose(S1 + S2, "SigmaCurved", (n * wp, n * wm))
    vertical = Contour.__new__(Contour)._init_loose([S3, S4], "SigmaVertical", ())
    return C, curved, vertical


def build_bulk_sigma(spec: ModelSpec, c: float, eps_prime: float = 0.1) -> tuple:
    """Closed n*Sigma-tilde^r split where it crosses Re t = c; returns (contour, p_plus, p_minus)."""
    n = spec.n
    R = default_radius(n, eps_prime)
    th_R = _radius_param(spec, R / n)
    th_c = _re_param(spec, c / n, th_R)
    segs = scaled_sigma(spec, n, R, cuts=(th_c,))
    p_plus = n * complex(zeta_curve(spec, th_c))
    return Contour(segs, True, "Sigma"), p_plus, p_plus.conjugate()


def build_edge_contours(spec: ModelSpec, height: float | None = None, eps_prime: float = 0.1):
    """(C, Sigma) for the soft edge: wedges at +-pi/3 and +-2pi/3 around n*z0, Sigma left of C."""
    n = spec.n
    if n < 10:
        raise DomainError("edge contours need n >= 10")
    ed = edge_constants(spec)
    zc = n * ed.z0
    L = ed.c1 * n ** (2 / 3)
    Lg = ed.c1 * n ** 0.7
    e1, e2 = np.exp(1j * math.pi / 3), np.exp(2j * math.pi / 3)
    if height is None:
        height = 2.0 * n * (ed.z0 + 1.0)
    top = max(height, math.sqrt(3) / 2 * Lg + 1.0)
    C = Contour([
        line(zc + Lg / 2 - 1j * top, zc + Lg * np.conj(e1), "glob"),
        line(zc + Lg * np.conj(e1), zc + L * np.conj(e1), "local"),
        line(zc + L * np.conj(e1), zc + L * e1, "local"),
        line(zc + L * e1, zc + Lg * e1, "local"),
        line(zc + Lg * e1, zc + Lg / 2 + 1j * top, "glob"),
    ], False, "C", (zc,))
    R = default_radius(n, eps_prime)
    th_R = _radius_param(spec, R / n)
    th_p = _re_param(spec, (zc - Lg / 2) / n, th_R)
    z_plus = n * complex(zeta_curve(spec, th_p))
    segs = [
        line(zc + Lg * np.conj(e2), zc + L * np.conj(e2), "local"),
        line(zc + L * np.conj(e2), zc + L * e2, "local"),
        line(zc + L * e2, zc + Lg * e2, "local"),
        line(zc + Lg * e2, z_plus, "glob_vertical"),
        zeta_segment(spec, n, th_p, th_R, 1, "glob_curved"),
        arc(0.0, R, th_R, 2 * math.pi - th_R, "glob_curved"),
        zeta_segment(spec, n, th_R, th_p, -1, "glob_curved"),
        line(z_plus.conjugate(), zc + Lg * np.conj(e2), "glob_vertical"),
    ]
    return C, Contour(segs, True, "Sigma", (zc,))


def build_direct_contours(spec: ModelSpec, height: float | None = None, right: bool = False,
                          abscissa: float | None = None):
    """Vertical C at Re s = -1/2 (or n - 1/2 when right=True) and an ellipse Sigma around 0..n-1.

    `abscissa` overrides the position of C; it must stay clear of Sigma and of the pole at -1.
    """
    n = spec.n
    if n > 512:
        raise DomainError("direct contours are meant for n <= 512")
    re_s = n - 0.5 if right else -0.5
    if abscissa is not None:
        re_s = float(abscissa)
        if not (-0.9 <= re_s <= -0.3 or re_s >= n - 0.5):
            raise GeometryError("C would touch Sigma or the pole at -1")
        right = re_s > 0
    if right and spec.variant is Variant.WithInverses and spec.K > 0:
        raise DomainError("C cannot pass right of Sigma for WithInverses (poles at s >= n)")
    if height is None:
        height = _scan_height(spec, n, re_s, drop=41.5)
    C = Contour([line(re_s - 1j * height, re_s + 1j * height, "C")], False, "C")
    center = (n - 1) / 2
    ell = ContourSegment(SegmentKind.EllipticArc, {"center": complex(center), "a": n / 2 - 0.25,
                                                   "b": max(2.0, n / 8), "theta0": 0.0,
                                                   "theta1": 2 * math.pi})
    return C, Contour([ell], True, "Sigma")
