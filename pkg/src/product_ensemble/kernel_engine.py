"""Finite-n correlation kernels by double contour quadrature, their rescalings, and the limit kernels."""

from __future__ import annotations

import contextlib
import contextvars
import enum
import math
import os
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .contours import (Contour, build_bulk_contours, build_bulk_sigma, build_direct_contours,
                       build_edge_contours, discretize, discretize_count, line,
                       panel_breaks)
from .errors import (ConvergenceError, DomainError, GeometryError, PoleClearanceError,
                     ProductEnsembleError, RangeError)
from .special_functions import airy_ai, log_gamma
from .spectral_model import (BulkPoint, EdgeData, ModelSpec, Variant, bulk_point, edge_constants,
                             inverse_param, saddle_points, support_end)

TWO_PI_I = 2j * math.pi
DIRECT_MAX_N = 9  # bulk and edge contours need n >= 10; direct loses accuracy beyond
TOL = 1e-6
CLEARANCE = 1e-8
_DROP = 45.0
_H_MAX = 4.0
_CHUNK = int(os.environ.get("PRODUCT_ENSEMBLE_CHUNK", "2048"))


@dataclass(frozen=True)
class KernelValue:
    value: float
    imagResidual: float
    errorEstimate: float


@dataclass(frozen=True)
class KernelBatch:
    values: np.ndarray
    imagResidual: np.ndarray
    errorEstimate: np.ndarray


class FrameMode(str, enum.Enum):
    Bulk = "Bulk"
    Edge = "Edge"


@dataclass(frozen=True)
class ScalingFrame:
    mode: FrameMode
    n: int
    bulk: BulkPoint | None = None
    edge: EdgeData | None = None

    def __post_init__(self):
        object.__setattr__(self, "mode", FrameMode(self.mode))
        if (self.mode is FrameMode.Bulk) != (self.bulk is not None) or (self.mode is FrameMode.Edge) != (
                self.edge is not None):
            raise DomainError("frame needs exactly the data matching its mode")


def bulk_frame(spec: ModelSpec, phi=None, x0=None, n=None) -> ScalingFrame:
    return ScalingFrame(FrameMode.Bulk, n or spec.n, bulk=bulk_point(spec, phi=phi, x0=x0))


def edge_frame(spec: ModelSpec, n=None) -> ScalingFrame:
    return ScalingFrame(FrameMode.Edge, n or spec.n, edge=edge_constants(spec))


# ---------------------------------------------------------------- integrand pieces


def log_integrand_core(spec: ModelSpec, z):
    """F(z; 1): the gamma part of F, so that F(z; a) = core(z) - z log a."""
    z = np.asarray(z, dtype=complex)
    n = spec.n
    out = -log_gamma(z - n + 1)
    for v in spec.nus:
        out = out + log_gamma(z + v + 1)
    if spec.variant is Variant.WithInverses:
        for v in spec.nuTilde:
            out = out + log_gamma(n - z + v)
    elif spec.variant is Variant.TruncatedUnitary:
        out = out - log_gamma(z + n + spec.kappa)
    return out


def _slope(spec, z, ell):
    """Cheap stand-in for F'(z): digammas replaced by logs."""
    n = spec.n
    with np.errstate(divide="ignore", invalid="ignore"):
        d = -np.log(z - n + 1 + 0j) - ell
        for v in spec.nus:
            d = d + np.log(z + v + 1 + 0j)
        if spec.variant is Variant.WithInverses:
            for v in spec.nuTilde:
                d = d - np.log(n - z + v + 0j)
        elif spec.variant is Variant.TruncatedUnitary:
            d = d - np.log(z + n + spec.kappa + 0j)
    return d


def _s_pole_distance(spec, z):
    """Distance to the poles of exp(F(s)): s <= -1, and s >= n for WithInverses."""
    d = np.abs(z - np.minimum(np.round(z.real), -1.0))
    if spec.variant is Variant.WithInverses and spec.K > 0:
        d = np.minimum(d, np.abs(z - np.maximum(np.round(z.real), float(spec.n))))
    return d


def _t_pole_distance(spec, z):
    """Distance to the poles of exp(-F(t)): 0, ..., n-1 (and t <= -n-kappa for TruncatedUnitary)."""
    d = np.abs(z - np.clip(np.round(z.real), 0.0, spec.n - 1.0))
    if spec.variant is Variant.TruncatedUnitary:
        d = np.minimum(d, np.abs(z - np.minimum(np.round(z.real), -float(spec.n + spec.kappa))))
    return d


def _step_fn(spec, ell, poles, mult, other=None):
    """Local panel length: resolve the phase of exp F, keep off poles and off the other contour."""
    def step(z):
        z = complex(z)
        sl = abs(complex(_slope(spec, np.array([z]), ell)[0]))
        d = float(poles(spec, np.array([z]))[0])
        if not math.isfinite(sl):
            # log singularity of a single factor where the integrand itself is regular
            sl = 1.0
        h = min(_H_MAX, 8.0 / max(1.0, sl), 0.7 * d)
        if other is not None:
            h = min(h, max(0.5 * float(np.min(np.abs(other - z))), 0.05))
        return mult * h
    return step


def c_height(spec: ModelSpec, re_s: float, start: float = 0.0, ref: float | None = None) -> float:
    """Where Re F along the vertical Re s = re_s has dropped e^-45 below the reference and keeps falling.

    |y^{-s}| is constant on a vertical line, so the answer does not depend on y.
    """
    tau = start + np.arange(0.0, 200_000.0, 0.5)
    top = -np.inf if ref is None else ref
    for i in range(0, tau.size, 400):
        tt = tau[i:i + 400]
        vals = log_integrand_core(spec, re_s + 1j * tt).real
        for k, v in enumerate(vals):
            top = max(top, v)
            if v < top - _DROP and k + 1 < vals.size and vals[k + 1] < v:
                return float(tt[k] + 1.0)
    raise ConvergenceError("integrand along C does not decay")


# ---------------------------------------------------------------- the double integral


@dataclass
class _Geometry:
    C: Contour
    Sigma: Contour
    crossing: tuple | None  # (p_plus, p_minus) when C cuts Sigma


def _split_vertical(C: Contour, cuts) -> Contour:
    segs = []
    for seg in C.segments:
        a, b = seg.start, seg.end
        if seg.straight and a.real == b.real:
            ims = sorted(c.imag for c in cuts if min(a.imag, b.imag) < c.imag < max(a.imag, b.imag))
            if b.imag < a.imag:
                ims = ims[::-1]
            pts = [a] + [complex(a.real, v) for v in ims] + [b]
            segs.extend(line(p, q, seg.tag) for p, q in zip(pts, pts[1:]))
        else:
            segs.append(seg)
    return Contour(segs, C.closed, C.name, C.saddles)


def geometry(spec: ModelSpec, placement: str = "auto", x0: float | None = None) -> _Geometry:
    """Contours for the given placement: direct, switched, bulk or edge ('auto' picks one)."""
    n = spec.n
    if placement == "auto":
        placement = _auto_placement(spec, x0)
    if placement in ("direct", "switched"):
        right = placement == "switched"
        C, S = build_direct_contours(spec, right=right)
        return _Geometry(C, S, None)
    if placement == "edge":
        ed = edge_constants(spec)
        C0, S = build_edge_contours(spec, height=1.0)
        top = math.sqrt(3) / 2 * ed.c1 * n ** 0.7
        ref = float(log_integrand_core(spec, np.array([n * ed.z0]))[0].real)
        re_tail = C0.segments[-1].start.real
        h = c_height(spec, re_tail, start=top, ref=ref)
        C, S = build_edge_contours(spec, height=h)
        return _Geometry(C, S, None)
    if placement == "bulk":
        phi = inverse_param(spec, x0)
        C0, _, _ = build_bulk_contours(spec, phi, height=1.0)
        c = C0.segments[0].start.real
        S, pp, pm = build_bulk_sigma(spec, c)
        wp, _ = saddle_points(spec, phi)
        ref = float(log_integrand_core(spec, np.array([complex(c, n * wp.imag)]))[0].real)
        h = c_height(spec, c, ref=ref)
        C = Contour([line(c - 1j * h, c + 1j * h, "C")], False, "C", C0.saddles)
        return _Geometry(_split_vertical(C, (pp, pm)), S, (pp, pm))
    raise DomainError(f"unknown placement {placement!r}")


def _auto_placement(spec, x0):
    if spec.n <= DIRECT_MAX_N or x0 is None:
        return "direct"
    try:
        xs = support_end(spec)
    except ProductEnsembleError:
        xs = math.inf
    if xs < math.inf and x0 >= xs * (1 - 2.0 * spec.n ** (-2 / 3)):
        return "edge"
    try:
        phi = inverse_param(spec, x0)
        build_bulk_contours(spec, phi, height=1.0)
        return "bulk"
    except (GeometryError, DomainError):
        if spec.n > 512:
            raise
        return "direct"


def _check_clearance(nodes, poles_fn, spec, what):
    if nodes.size and np.min(poles_fn(spec, nodes)) < CLEARANCE:
        raise PoleClearanceError(f"{what} node within {CLEARANCE} of a pole")


def _phi1(w):
    """(e^w - 1)/w, accurate near 0."""
    w = np.asarray(w, dtype=complex)
    small = np.abs(w) < 1e-5
    safe = np.where(small, 1.0, w)
    return np.where(small, 1 + w / 2 + w * w / 6, np.expm1(safe) / safe)


def _panels(spec, geo, lx, ly, mult):
    ell = 0.5 * (float(np.mean(lx)) + float(np.mean(ly)))
    # where the contours cross, 1/(s - t) is handled by the subtraction, not by refinement
    far_c = far_s = None
    if geo.crossing is None:
        far_c = discretize_count(geo.C, 2000).nodes
        far_s = discretize_count(geo.Sigma, 2000).nodes
    return (panel_breaks(geo.C, _step_fn(spec, ell, _s_pole_distance, mult, far_s)),
            panel_breaks(geo.Sigma, _step_fn(spec, ell, _t_pole_distance, mult, far_c)))


def _integral(spec, geo, lx, ly, pairs, order, mult, panels=None):
    """Raw double integral I (K = I / (y (2 pi i)^2)) as mantissa * exp(scale).

    pairs == 'outer' gives arrays of shape (len(ly), len(lx)); 'diag' pairs lx[i] with ly[i].
    """
    ell = 0.5 * (float(np.mean(lx)) + float(np.mean(ly)))
    if panels is None:
        panels = _panels(spec, geo, lx, ly, mult)
    gs = discretize(geo.C, order=order, breaks=panels[0])
    gt = discretize(geo.Sigma, order=order, breaks=panels[1])
    s, ws = gs.nodes, gs.weights
    t, wt = gt.nodes, gt.weights
    _check_clearance(s, _s_pole_distance, spec, "C")
    _check_clearance(t, _t_pole_distance, spec, "Sigma")

    Fs = log_integrand_core(spec, s) - s * ell
    Ft = -(log_integrand_core(spec, t) - t * ell)
    Ls, Lt = float(np.max(Fs.real)), float(np.max(Ft.real))
    dy = np.asarray(ly) - ell
    dx = np.asarray(lx) - ell
    ey = -np.outer(s, dy)  # (Ns, ny)
    ex = np.outer(t, dx)  # (Nt, nx)
    cy = np.max(ey.real, axis=0)
    cx = np.max(ex.real, axis=0)
    A = ws[:, None] * np.exp(Fs[:, None] - Ls + ey - cy[None, :])
    B = wt[:, None] * np.exp(Ft[:, None] - Lt + ex - cx[None, :])

    crossing = geo.crossing is not None
    DB = np.zeros((s.size, B.shape[1]), dtype=complex)
    lam_num = np.zeros(t.size, dtype=complex) if crossing else None
    for i in range(0, t.size, _CHUNK):
        D = 1.0 / (s[:, None] - t[None, i:i + _CHUNK])
        DB += D @ B[i:i + _CHUNK]
        if crossing:
            lam_num[i:i + _CHUNK] = ws @ D

    if pairs == "outer":
        T1 = A.T @ DB  # (ny, nx)
        s1 = Ls + Lt + cy[:, None] + cx[None, :]
        lam = np.subtract.outer(np.asarray(ly), np.asarray(lx)) * -1.0  # log x - log y, (ny, nx)
    else:
        T1 = np.einsum("si,si->i", A, DB)
        s1 = Ls + Lt + cy + cx
        lam = np.asarray(lx) - np.asarray(ly)
    if not crossing:
        return T1, s1

    # singular part of the inner integral, subtracted and added back exactly
    lam_exact = np.zeros(t.size, dtype=complex)
    dist = np.full(t.size, np.inf)
    for seg in geo.C.segments:
        a, b = seg.start, seg.end
        lam_exact += np.log((b - t) / (a - t))
        u = np.clip(((t - a) * np.conj(b - a)).real / abs(b - a) ** 2, 0.0, 1.0)
        dist = np.minimum(dist, np.abs(t - (a + u * (b - a))))
    # away from C the difference is pure rounding, which (x/y)^t could amplify
    corr = np.where(dist < 4 * _H_MAX * mult, wt * (lam_exact - lam_num), 0.0)
    pp, pm = geo.crossing
    lamf = np.ravel(lam)
    E = np.outer(t, lamf)  # (Nt, P)
    s2 = np.maximum(np.max(E.real, axis=0), np.maximum((pp * lamf).real, (pm * lamf).real))
    T2 = corr @ np.exp(E - s2[None, :])
    T3 = TWO_PI_I * np.exp(pm * lamf - s2) * (pp - pm) * _phi1(lamf * (pp - pm))
    T23 = (T2 + T3).reshape(np.shape(lam))
    s2 = s2.reshape(np.shape(lam))
    S = np.maximum(s1, s2)
    return T1 * np.exp(s1 - S) + T23 * np.exp(s2 - S), S


@dataclass(frozen=True)
class QuadratureSettings:
    tol: float = TOL
    order: int = 16
    panels: float = 1.0  # panel density relative to the default step


_SETTINGS: contextvars.ContextVar[QuadratureSettings] = contextvars.ContextVar(
    "quadrature", default=QuadratureSettings())


@contextlib.contextmanager
def quadrature_settings(tol: float | None = None, order: int | None = None, panels: float | None = None):
    """Temporarily override the error target, base Gauss order and panel density."""
    cur = _SETTINGS.get()
    new = QuadratureSettings(cur.tol if tol is None else float(tol),
                             cur.order if order is None else int(order),
                             cur.panels if panels is None else float(panels))
    if not (new.tol > 0 and new.order >= 2 and new.panels > 0):
        raise DomainError("tol, order and panels must be positive (order >= 2)")
    token = _SETTINGS.set(new)
    try:
        yield new
    finally:
        _SETTINGS.reset(token)


def _evaluate(spec, geo, lx, ly, pairs, extra_log=0.0):
    """K (times exp(extra_log)) with order-16 vs order-32 error estimate and up to 3 refinements."""
    lx = np.atleast_1d(np.asarray(lx, dtype=float))
    ly = np.atleast_1d(np.asarray(ly, dtype=float))
    if pairs == "outer":
        lyy = ly[:, None]
    else:
        lyy = ly
    extra = np.asarray(extra_log, dtype=float)
    cfg = _SETTINGS.get()
    mult = 1.0 / cfg.panels
    for attempt in range(4):
        out = []
        panels = _panels(spec, geo, lx, ly, mult)
        for order in (cfg.order, 2 * cfg.order):
            m, sc = _integral(spec, geo, lx, ly, pairs, order, mult, panels)
            out.append(m * np.exp(sc - lyy + extra) / (TWO_PI_I ** 2))
        v16, v32 = out
        err = np.abs(v32 - v16)
        if np.all(err <= cfg.tol * np.maximum(1.0, np.abs(v32.real))):
            break
        mult *= 0.5
    else:
        raise ConvergenceError(f"kernel quadrature unresolved (max error {float(np.max(err)):.3g})")
    return KernelBatch(v32.real, np.abs(v32.imag), err)


# ---------------------------------------------------------------- public kernels


def _check_xy(x, y):
    for v in (x, y):
        if not (np.all(np.isfinite(v)) and np.all(np.asarray(v) > 0)):
            raise DomainError("x and y must be positive")


def _direct_abscissa(spec, logy):
    """Where C goes for direct quadrature at this y: Re s = -1/2, or the real saddle right of Sigma.

    The saddle (a local minimum of F(s; y) on s > n - 1) is used when it lowers the
    peak of |exp F| on C; for large y this avoids cancelling huge contributions.
    """
    left = -0.5
    if spec.variant is Variant.WithInverses and spec.K > 0:
        return left
    n = spec.n
    core = lambda x: float(log_integrand_core(spec, np.array([complex(x)]))[0].real)
    f_left = core(left) - left * logy
    s = np.concatenate([n - 1 + np.geomspace(0.5, 1e6, 400)])
    f = log_integrand_core(spec, s + 0j).real - s * logy
    k = int(np.argmin(f))
    if k == 0 or k == s.size - 1 or f[k] >= f_left:
        return left
    lo, hi = s[k - 1], s[k + 1]
    for _ in range(60):
        m1, m2 = lo + (hi - lo) / 3, hi - (hi - lo) / 3
        if core(m1) - m1 * logy < core(m2) - m2 * logy:
            hi = m2
        else:
            lo = m1
    return max(0.5 * (lo + hi), n - 0.5)


def _direct_geometry(spec, logy, placement):
    if placement == "switched":
        return geometry(spec, "switched")
    c = _direct_abscissa(spec, logy)
    if c < 0:
        return geometry(spec, "direct")
    ref = float(log_integrand_core(spec, np.array([complex(c)]))[0].real)
    h = c_height(spec, c, ref=ref)
    C, S = build_direct_contours(spec, height=h, abscissa=c)
    return _Geometry(C, S, None)


def kernel_finite_n_batch(spec: ModelSpec, xs, ys, pairs: str = "outer",
                          placement: str = "auto") -> KernelBatch:
    """K_n on a set of points; 'outer' gives K_n(xs[j], ys[i]) at [i, j]."""
    xs = np.atleast_1d(np.asarray(xs, dtype=float))
    ys = np.atleast_1d(np.asarray(ys, dtype=float))
    _check_xy(xs, ys)
    if pairs == "diag" and xs.shape != ys.shape:
        raise DomainError("diag pairs need equally many x and y")
    if spec.n > 512 and placement in ("direct", "switched"):
        raise DomainError("direct quadrature is limited to n <= 512")
    x0 = math.exp(0.5 * (np.mean(np.log(xs)) + np.mean(np.log(ys)))) / float(spec.n) ** spec.scale_power
    auto = placement == "auto"
    if auto:
        placement = _auto_placement(spec, x0)
    if placement not in ("direct", "switched"):
        geo = geometry(spec, placement, x0)
        try:
            return _evaluate(spec, geo, np.log(xs), np.log(ys), pairs)
        except ConvergenceError:
            if not auto or xs.size * ys.size == 1 or (pairs == "diag" and xs.size == 1):
                raise
        # one contour pair cannot cover a grid whose values span many decades; split it
        return _split_batch(spec, xs, ys, pairs)
    # small n: one C per distinct y, placed for that y
    shape = (ys.size, xs.size) if pairs == "outer" else ys.shape
    vals, im, err = np.empty(shape), np.empty(shape), np.empty(shape)
    for y in np.unique(ys):
        geo = _direct_geometry(spec, math.log(y), placement)
        if pairs == "outer":
            b = _evaluate(spec, geo, np.log(xs), np.array([math.log(y)]), "outer")
            rows = ys == y
            vals[rows], im[rows], err[rows] = b.values[0], b.imagResidual[0], b.errorEstimate[0]
        else:
            sel = ys == y
            b = _evaluate(spec, geo, np.log(xs[sel]), np.log(ys[sel]), "diag")
            vals[sel], im[sel], err[sel] = b.values, b.imagResidual, b.errorEstimate
    return KernelBatch(vals, im, err)


def _split_batch(spec, xs, ys, pairs):
    if pairs == "diag":
        parts = [kernel_finite_n_batch(spec, [x], [y], "diag") for x, y in zip(xs, ys)]
        cat = lambda f: np.array([float(getattr(b, f)[0]) for b in parts])
        return KernelBatch(cat("values"), cat("imagResidual"), cat("errorEstimate"))
    if ys.size > 1:
        parts = [kernel_finite_n_batch(spec, xs, [y], "outer") for y in ys]
    else:
        parts = [kernel_finite_n_batch(spec, [x], ys, "outer") for x in xs]
    axis = 0 if ys.size > 1 else 1
    cat = lambda f: np.concatenate([getattr(b, f) for b in parts], axis=axis)
    return KernelBatch(cat("values"), cat("imagResidual"), cat("errorEstimate"))


def kernel_finite_n(spec: ModelSpec, x: float, y: float, placement: str = "auto") -> KernelValue:
    b = kernel_finite_n_batch(spec, [x], [y], "diag", placement)
    return KernelValue(float(b.values[0]), float(b.imagResidual[0]), float(b.errorEstimate[0]))


def _bulk_cot(spec, phi):
    if spec.variant is Variant.TruncatedUnitary:
        return 1.0 / math.tan(phi / 2)
    return 1.0 / math.tan(phi)


def _frame_spec(spec, frame):
    return spec if frame.n == spec.n else spec.with_n(frame.n)


def _bulk_args(spec, frame, xi, eta):
    bp = frame.bulk
    n = frame.n
    p = spec.scale_power
    x = float(n) ** p * (bp.x0 + np.asarray(xi, dtype=float) / (n * bp.rho))
    y = float(n) ** p * (bp.x0 + np.asarray(eta, dtype=float) / (n * bp.rho))
    if np.any(x <= 0) or np.any(y <= 0):
        raise DomainError("rescaled point falls outside (0, inf)")
    return x, y


def rescaled_bulk_batch(spec: ModelSpec, frame: ScalingFrame, xis, etas, pairs="outer") -> KernelBatch:
    """Bulk rescaling of K_n with its conjugation factor; 'outer' gives value(xis[j], etas[i]) at [i, j]."""
    if frame.mode is not FrameMode.Bulk:
        raise DomainError("rescaled_bulk_kernel needs a Bulk frame")
    xis = np.atleast_1d(np.asarray(xis, dtype=float))
    etas = np.atleast_1d(np.asarray(etas, dtype=float))
    if np.any(np.abs(xis) > 5) or np.any(np.abs(etas) > 5):
        raise DomainError("bulk rescaling expects |xi|, |eta| <= 5")
    sp = _frame_spec(spec, frame)
    n, bp = frame.n, frame.bulk
    x, y = _bulk_args(sp, frame, xis, etas)
    cot = _bulk_cot(sp, bp.phi)
    base = (sp.scale_power - 1) * math.log(n) - math.log(bp.rho)
    if pairs == "outer":
        extra = base - math.pi * cot * (xis[None, :] - etas[:, None])
    else:
        extra = base - math.pi * cot * (xis - etas)
    geo = geometry(sp, "bulk", bp.x0)
    return _evaluate(sp, geo, np.log(x), np.log(y), pairs, extra)


def rescaled_bulk_kernel(spec: ModelSpec, frame: ScalingFrame, xi: float, eta: float) -> float:
    return float(rescaled_bulk_batch(spec, frame, [xi], [eta], "diag").values[0])


def _edge_scaling(spec, n):
    ed = edge_constants(spec)
    M = spec.M
    if spec.variant is Variant.TruncatedUnitary:
        coef = 2 ** (-1 / 3) * math.sqrt(M + 1) / (M - 1) ** (1 / 6)
    else:
        coef = 2 ** (-1 / 3) * (M + 1) ** (2 / 3)
    return ed, coef * n ** (1 / 3)


def rescaled_edge_batch(spec: ModelSpec, frame: ScalingFrame, xis, etas, pairs="outer") -> KernelBatch:
    if frame.mode is not FrameMode.Edge:
        raise DomainError("rescaled_edge_kernel needs an Edge frame")
    xis = np.atleast_1d(np.asarray(xis, dtype=float))
    etas = np.atleast_1d(np.asarray(etas, dtype=float))
    if np.any(xis < -4) or np.any(xis > 2) or np.any(etas < -4) or np.any(etas > 2):
        raise DomainError("edge rescaling expects xi, eta in [-4, 2]")
    sp = _frame_spec(spec, frame)
    n = frame.n
    ed, g = _edge_scaling(sp, n)
    p = sp.scale_power
    x = float(n) ** p * (ed.xStar + ed.c2 * xis / n ** (2 / 3))
    y = float(n) ** p * (ed.xStar + ed.c2 * etas / n ** (2 / 3))
    base = (p - 2 / 3) * math.log(n) + math.log(ed.c2)
    if pairs == "outer":
        extra = base - g * (xis[None, :] - etas[:, None])
    else:
        extra = base - g * (xis - etas)
    geo = geometry(sp, "edge")
    return _evaluate(sp, geo, np.log(x), np.log(y), pairs, extra)


def rescaled_edge_kernel(spec: ModelSpec, frame: ScalingFrame, xi: float, eta: float) -> float:
    return float(rescaled_edge_batch(spec, frame, [xi], [eta], "diag").values[0])


# ---------------------------------------------------------------- limit kernels


def sine_kernel(xi: float, eta: float) -> float:
    d = xi - eta
    if d == 0:
        return 1.0
    return math.sin(math.pi * d) / (math.pi * d)


class AiryMethod(str, enum.Enum):
    AiryFormula = "AiryFormula"
    ContourIntegral = "ContourIntegral"


def _airy_formula(x, y):
    ax, apx = airy_ai(x)
    if abs(x - y) < 1e-7:
        # removable singularity: diagonal value at the midpoint, error O((x - y)^2)
        m = 0.5 * (x + y)
        am, apm = airy_ai(m) if x != y else (ax, apx)
        return apm * apm - m * am * am
    ay, apy = airy_ai(y)
    return (ax * apy - apx * ay) / (x - y)


@lru_cache(maxsize=1)
def _airy_rays():
    t, w = np.polynomial.legendre.leggauss(40)
    edges = np.concatenate([[0.0], 0.25 * 2.0 ** np.arange(0, 6), [9.0, 12.0]])
    u = np.concatenate([0.5 * (b - a) * t + 0.5 * (a + b) for a, b in zip(edges[:-1], edges[1:])])
    wu = np.concatenate([0.5 * (b - a) * w for a, b in zip(edges[:-1], edges[1:])])
    return u, wu


def _airy_contour(x, y):
    """Double integral over gamma_R (vertex 1, rays at +-pi/3, upward) and its mirror gamma_L (vertex -1).

    gamma_L is the reflection of gamma_R in the imaginary axis traversed as a
    reflection, i.e. downward; with it the integral reproduces the Airy formula.
    """
    u, wu = _airy_rays()
    e = np.exp(1j * math.pi / 3)
    # gamma_R from e^{-i pi/3} inf to e^{i pi/3} inf
    mu = np.concatenate([1 + u[::-1] * np.conj(e), 1 + u * e])
    dmu = np.concatenate([-np.conj(e) * wu[::-1], e * wu])
    # gamma_L = -conj(gamma_R), from e^{2 pi i/3} inf to e^{-2 pi i/3} inf
    lam = -np.conj(mu)
    dlam = -np.conj(dmu)
    lead = max(abs(x), abs(y))
    fmu = np.exp(mu ** 3 / 3 - x * mu) * dmu
    flam = np.exp(-(lam ** 3) / 3 + y * lam) * dlam
    tail = max(abs(fmu[0]), abs(fmu[-1]), abs(flam[0]), abs(flam[-1]))
    if tail > 1e-18 * max(1.0, np.max(np.abs(fmu)), np.max(np.abs(flam))) or lead > 30:
        raise ConvergenceError("Airy contour integrand not truncated at 1e-18 of its peak")
    val = fmu @ (1.0 / (mu[:, None] - lam[None, :])) @ flam
    return val / (TWO_PI_I ** 2)


def airy_kernel(xi: float, eta: float, method: AiryMethod | str = AiryMethod.AiryFormula) -> float:
    method = AiryMethod(method)
    if not (-30 <= xi <= 10 and -30 <= eta <= 10):
        raise RangeError("airy_kernel supports arguments in [-30, 10]")
    if method is AiryMethod.AiryFormula:
        return float(_airy_formula(float(xi), float(eta)))
    v = _airy_contour(float(xi), float(eta))
    return float(v.real)


# ---------------------------------------------------------------- convergence


@dataclass(frozen=True)
class ConvergenceRow:
    n: int
    supError: float


@dataclass(frozen=True)
class ConvergenceReport:
    rows: tuple
    decreasing: bool


def convergence_report(spec: ModelSpec, mode, nList, grid, phi=None, x0=None) -> ConvergenceReport:
    """sup over grid of |rescaled K_n - limit| for each n in nList.

    grid is an iterable of (xi, eta) pairs.
    """
    mode = FrameMode(mode)
    nList = [int(n) for n in nList]
    if any(b <= a for a, b in zip(nList, nList[1:])):
        raise DomainError("nList must be increasing")
    pts = np.array(list(grid), dtype=float)
    xis, etas = pts[:, 0], pts[:, 1]
    rows = []
    for n in nList:
        sp = spec.with_n(n)
        if mode is FrameMode.Bulk:
            fr = bulk_frame(sp, phi=phi, x0=x0)
            got = _rescaled_on_pairs(rescaled_bulk_batch, sp, fr, xis, etas)
            ref = np.array([sine_kernel(a, b) for a, b in zip(xis, etas)])
        else:
            fr = edge_frame(sp)
            got = _rescaled_on_pairs(rescaled_edge_batch, sp, fr, xis, etas)
            ref = np.array([airy_kernel(a, b) for a, b in zip(xis, etas)])
        rows.append(ConvergenceRow(n, float(np.max(np.abs(got - ref)))))
    errs = [r.supError for r in rows]
    return ConvergenceReport(tuple(rows), all(b < a for a, b in zip(errs, errs[1:])))


def _rescaled_on_pairs(fn, spec, frame, xis, etas):
    # evaluate on the tensor grid of distinct values when the pairs form one, else pairwise
    ux, uy = np.unique(xis), np.unique(etas)
    if ux.size * uy.size == xis.size:
        tab = fn(spec, frame, ux, uy, "outer").values
        ix = np.searchsorted(ux, xis)
        iy = np.searchsorted(uy, etas)
        return tab[iy, ix]
    return fn(spec, frame, xis, etas, "diag").values
