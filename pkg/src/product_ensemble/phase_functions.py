"""Phase functions F, F-hat and their derivatives; numerical checks of the contour inequalities."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import BranchPointError, PoleError, SingularityError
from .special_functions import log_gamma
from .spectral_model import (ModelSpec, Variant, edge_constants, inverse_param,
                             saddle_points, zeta_curve, zeta_curve_deriv, zeta_range)


@dataclass(frozen=True)
class PhaseContext:
    spec: ModelSpec
    a: float
    n: int | None = None

    def __post_init__(self):
        if not self.a > 0:
            raise ValueError("PhaseContext needs a > 0")
        if self.n is None:
            object.__setattr__(self, "n", self.spec.n)


@dataclass
class LemmaReport:
    contourName: str
    pointsChecked: int
    violations: list = field(default_factory=list)
    delta: float = math.inf

    @property
    def passed(self) -> bool:
        return not self.violations


class Lemma(str, enum.Enum):
    Bulk21 = "Bulk21"
    Edge22 = "Edge22"
    Sigma31 = "Sigma31"
    C32 = "C32"


def _clean(z):
    # turn -0.0 imaginary parts into +0.0 so the negative axis is approached from above
    z = np.asarray(z, dtype=complex)
    return z.real + 1j * (z.imag + 0.0)


def _check_clearance(w, what):
    bad = (w.real <= 0.5) & (np.abs(w - np.round(w.real)) < 1e-8) & (np.round(w.real) <= 0)
    if np.any(bad):
        raise PoleError(f"{what}: argument within 1e-8 of a gamma pole")


def big_F(ctx: PhaseContext, z):
    """F(z; a): sum of log-gammas of the integrand minus z log a (never the log of a product)."""
    spec, n = ctx.spec, ctx.n
    scalar = np.ndim(z) == 0
    z = np.atleast_1d(_clean(z))
    args_plus = [z + nu + 1 for nu in spec.nus]
    args_minus = [z - n + 1]
    if spec.variant is Variant.WithInverses:
        args_plus += [n - z + nt for nt in spec.nuTilde]
    elif spec.variant is Variant.TruncatedUnitary:
        args_minus.append(z + n + spec.kappa)
    out = -z * math.log(ctx.a)
    for w in args_plus:
        _check_clearance(w, "big_F")
        out = out + log_gamma(w)
    for w in args_minus:
        _check_clearance(w, "big_F")
        out = out - log_gamma(w)
    return complex(out[0]) if scalar else out


def _xlogx_m(u):
    """u (log u - 1) with principal log; 0 at u = 0."""
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(u == 0, 0.0, u * (np.log(np.where(u == 0, 1.0, u)) - 1.0))


def f_hat(spec: ModelSpec, z, a: float):
    """Leading-order phase function F-hat(z; a) of the model."""
    scalar = np.ndim(z) == 0
    z = np.atleast_1d(_clean(z))
    _branch_check(spec, z)
    M = spec.M
    out = (M + 1) * _xlogx_m(z) - _xlogx_m(_clean(z - 1)) - z * math.log(a)
    if spec.variant is Variant.WithInverses:
        out = out + spec.K * _xlogx_m(_clean(1 - z))
    elif spec.variant is Variant.TruncatedUnitary:
        out = out - _xlogx_m(_clean(1 + z))
    return complex(out[0]) if scalar else out


def _branch_check(spec, z):
    pts = [0.0, 1.0] + ([-1.0] if spec.variant is Variant.TruncatedUnitary else [])
    for p in pts:
        if np.any(z == p):
            raise BranchPointError(f"f_hat evaluated at branch point {p}")


def f_hat_derivs(spec: ModelSpec, z, a: float, order: int):
    scalar = np.ndim(z) == 0
    z = np.atleast_1d(_clean(z))
    _branch_check(spec, z)
    M = spec.M
    wi = spec.variant is Variant.WithInverses
    tu = spec.variant is Variant.TruncatedUnitary
    if order == 1:
        out = (M + 1) * np.log(z) - np.log(_clean(z - 1)) - math.log(a)
        if wi:
            out = out - spec.K * np.log(_clean(1 - z))
        if tu:
            out = out - np.log(_clean(1 + z))
    elif order == 2:
        out = (M + 1) / z - 1 / (z - 1)
        if wi:
            out = out + spec.K / (1 - z)
        if tu:
            out = out - 1 / (1 + z)
    elif order == 3:
        out = -(M + 1) / z ** 2 + 1 / (z - 1) ** 2
        if wi:
            out = out + spec.K / (1 - z) ** 2
        if tu:
            out = out + 1 / (1 + z) ** 2
    else:
        raise ValueError("order must be 1, 2 or 3")
    return complex(out[0]) if scalar else out


# ---------------------------------------------------------------- reflection path

_BERN = [1 / 6, -1 / 30, 1 / 42, -1 / 30, 5 / 66, -691 / 2730, 7 / 6, -3617 / 510]


def _re_lgamma_stirling(w):
    """Re log Gamma(w) for Re w >= 1/2 by upward recurrence and the Stirling series."""
    w = np.asarray(w, dtype=complex)
    shift = np.zeros(w.shape)
    acc = np.zeros(w.shape)
    need = np.abs(w) < 15
    while np.any(need):
        acc = acc - np.where(need, np.log(np.abs(w + shift)), 0.0)
        shift = shift + need
        need = np.abs(w + shift) < 15
    u = w + shift
    s = (u - 0.5) * np.log(u) - u + 0.5 * math.log(2 * math.pi)
    for k, b in enumerate(_BERN, start=1):
        s = s + b / (2 * k * (2 * k - 1) * u ** (2 * k - 1))
    return s.real + acc


def _log_abs_sin_pi(w):
    x, y = w.real, np.abs(w.imag)
    return (math.pi * y + 0.5 * np.log(
        (1 + np.exp(-4 * math.pi * y) - 2 * np.cos(2 * math.pi * x) * np.exp(-2 * math.pi * y)) / 4))


def _re_lgamma_reflect(w):
    w = np.asarray(w, dtype=complex)
    left = w.real < 0.5
    out = np.empty(w.shape)
    if np.any(~left):
        out[~left] = _re_lgamma_stirling(w[~left])
    if np.any(left):
        wl = w[left]
        out[left] = math.log(math.pi) - _log_abs_sin_pi(wl) - _re_lgamma_stirling(1 - wl)
    return out


def re_F_left(ctx: PhaseContext, z):
    """Re F(z; a) through the reflection formula and Stirling series.

    An evaluation path independent of the Lanczos-based big_F, meant for points
    near [0, n] where the shifted gamma Gamma(z - n + 1) has a large negative
    argument.
    """
    spec, n = ctx.spec, ctx.n
    scalar = np.ndim(z) == 0
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    dist = np.abs(z - np.round(z.real))
    if np.any(dist < 1e-6):
        raise SingularityError("re_F_left: z within 1e-6 of a zero of sin(pi z)")
    out = -z.real * math.log(ctx.a)
    for nu in spec.nus:
        out = out + _re_lgamma_reflect(z + nu + 1)
    out = out - _re_lgamma_reflect(z - n + 1)
    if spec.variant is Variant.WithInverses:
        for nt in spec.nuTilde:
            out = out + _re_lgamma_reflect(n - z + nt)
    elif spec.variant is Variant.TruncatedUnitary:
        out = out - _re_lgamma_reflect(z + n + spec.kappa)
    return float(out[0]) if scalar else out


# ---------------------------------------------------------------- lemma verification

_SLACK = 1e-12


def _x0_from_ctx(ctx):
    return ctx.a / ctx.n ** ctx.spec.scale_power


def _is_edge(ctx):
    if ctx.spec.variant is Variant.WithInverses and ctx.spec.K > 0:
        return False
    return abs(_x0_from_ctx(ctx) / edge_constants(ctx.spec).xStar - 1) < 1e-12


def _grid_nodes(grid, default):
    if grid is None:
        return default
    return np.asarray(grid.nodes, dtype=complex)


def verify_lemma(ctx: PhaseContext, which, grid=None, points: int = 500) -> LemmaReport:
    """Check the contour inequalities pointwise; violations are returned as data.

    Bulk21/Edge22 compare the exact Re F along the scaled contours with its value
    at the saddle; inside the local discs the quadratic bound is checked on the
    leading-order phase n*F-hat, since the exact saddle of F is displaced by O(1).
    Sigma31/C32 check the sign pattern of directional derivatives of Re F-hat.
    """
    which = Lemma(which)
    if which is Lemma.Bulk21:
        return _verify_bulk(ctx, grid, points)
    if which is Lemma.Edge22:
        return _verify_edge(ctx, grid, points)
    if which is Lemma.Sigma31:
        return _verify_sigma(ctx, grid, points)
    return _verify_c(ctx, grid, points)


def _role(grid, fallback):
    if grid is None:
        return fallback
    name = getattr(grid.sourceContour, "name", "") or ""
    return "C" if name.startswith("C") else "Sigma"


def _merge(name, reports):
    out = LemmaReport(name, 0)
    for r in reports:
        out.pointsChecked += r.pointsChecked
        out.violations.extend(r.violations)
        out.delta = min(out.delta, r.delta)
    return out


def _verify_bulk(ctx, grid, points):
    from .contours import build_bulk_contours, discretize_count
    spec, n = ctx.spec, ctx.n
    x0 = _x0_from_ctx(ctx)
    phi = inverse_param(spec, x0)
    wp, wm = saddle_points(spec, phi)
    C, Scurved, _ = build_bulk_contours(spec.with_n(n), phi, shift=False)
    if grid is not None:
        roles = [(_role(grid, "Sigma"), np.asarray(grid.nodes, dtype=complex))]
    else:
        roles = [("Sigma", discretize_count(Scurved, points).nodes),
                 ("C", discretize_count(C, points).nodes)]
    ref = big_F(ctx, n * wp).real
    fw = f_hat(spec, wp, x0).real
    rad = n ** 0.6
    reports = []
    for role, nodes in roles:
        sign = 1.0 if role == "Sigma" else -1.0
        rep = LemmaReport("SigmaCurved" if role == "Sigma" else "C", len(nodes))
        d = np.minimum(np.abs(nodes - n * wp), np.abs(nodes - n * wm))
        local = d < rad
        if np.any(local):
            z = nodes[local] / n
            lhs = sign * n * (f_hat(spec, z, x0).real - fw)
            rhs = n * (d[local] / n) ** 2
            for zz, l, r in zip(nodes[local], lhs, rhs):
                if r < 1e-18:
                    continue
                if l < -_SLACK * max(1.0, abs(n * fw)):
                    rep.violations.append((complex(zz), float(l), float(r)))
                else:
                    rep.delta = min(rep.delta, l / r)
        far = ~local
        if np.any(far):
            lhs = sign * (big_F(ctx, nodes[far]).real - ref)
            scale = n ** 0.2
            for zz, l in zip(nodes[far], lhs):
                if l <= _SLACK * max(1.0, abs(ref)):
                    rep.violations.append((complex(zz), float(l), 0.0))
                else:
                    rep.delta = min(rep.delta, l / scale)
        reports.append(rep)
    return _merge("Bulk21", reports)


def _verify_edge(ctx, grid, points):
    from .contours import build_edge_contours, discretize_count
    spec, n = ctx.spec, ctx.n
    ed = edge_constants(spec)
    C, Sigma = build_edge_contours(spec.with_n(n))
    # the estimate concerns the edge point itself, whatever x the context holds
    ctx = PhaseContext(spec, float(n) ** spec.scale_power * ed.xStar, n)
    if grid is not None:
        roles = [(_role(grid, "Sigma"), np.asarray(grid.nodes, dtype=complex))]
    else:
        roles = [("Sigma", discretize_count(Sigma.subcontour("glob"), points).nodes),
                 ("C", discretize_count(C.subcontour("glob"), points).nodes)]
    ref = big_F(ctx, n * ed.z0).real
    scale = n ** 0.1
    reports = []
    for role, nodes in roles:
        sign = 1.0 if role == "Sigma" else -1.0
        rep = LemmaReport("SigmaGlob" if role == "Sigma" else "CGlob", len(nodes))
        lhs = sign * (big_F(ctx, nodes).real - ref)
        for zz, l in zip(nodes, lhs):
            if l <= _SLACK * max(1.0, abs(ref)):
                rep.violations.append((complex(zz), float(l), 0.0))
            else:
                rep.delta = min(rep.delta, l / scale)
        reports.append(rep)
    return _merge("Edge22", reports)


def _verify_sigma(ctx, grid, points):
    spec = ctx.spec
    x0 = _x0_from_ctx(ctx)
    edge = _is_edge(ctx)
    top = zeta_range(spec)
    if grid is not None:
        # recover the curve parameter of each node from its argument
        nodes = np.asarray(grid.nodes, dtype=complex)
        th = np.abs(np.angle(nodes))
        th = th[(th > 0) & (th < top)]
    else:
        th = top * (np.arange(points) + 0.5) / points
    theta0 = 0.0 if edge else _curve_param(spec, inverse_param(spec, x0))
    rep = LemmaReport("SigmaTilde", 2 * len(th))
    z = zeta_curve(spec, th)
    dz = zeta_curve_deriv(spec, th)
    d1 = f_hat_derivs(spec, z, x0, 1)
    for branch in (1, -1):
        # conj branch: d/dphi Re F(conj zeta) = Re(F'(conj z) conj(dz))
        g = np.real(d1 * dz) if branch == 1 else np.real(np.conj(d1) * np.conj(dz))
        want = np.where(th < theta0, -1.0, 1.0)
        for t, gv, wv in zip(th, g, want):
            if abs(t - theta0) < 1e-9:
                continue
            margin = wv * gv
            if margin <= _SLACK:
                node = zeta_curve(spec, t) if branch == 1 else np.conj(zeta_curve(spec, t))
                rep.violations.append((complex(node), float(gv), 0.0))
            else:
                rep.delta = min(rep.delta, margin)
    return rep


def _curve_param(spec, phi):
    return phi / 2 if spec.variant is Variant.TruncatedUnitary else phi


def _verify_c(ctx, grid, points):
    spec = ctx.spec
    x0 = _x0_from_ctx(ctx)
    reports = []
    if not _is_edge(ctx):
        phi = inverse_param(spec, x0)
        wp, _ = saddle_points(spec, phi)
        if grid is not None:
            ys = np.asarray(grid.nodes, dtype=complex).imag
        else:
            Y = 4 * abs(wp) + 4
            ys = np.linspace(-Y, Y, points)
        ys = ys[(ys != 0) & (np.abs(np.abs(ys) - wp.imag) > 1e-12)]
        z = wp.real + 1j * ys
        g = -np.imag(f_hat_derivs(spec, z, x0, 1))  # d/dy Re F-hat
        want = np.where(np.abs(ys) > wp.imag, -1.0, 1.0) * np.sign(ys)
        rep = LemmaReport("CTilde", len(ys))
        for zz, gv, wv in zip(z, g, want):
            if wv * gv <= _SLACK:
                rep.violations.append((complex(zz), float(gv), 0.0))
            else:
                rep.delta = min(rep.delta, wv * gv)
        # local concavity in y around Im w+-
        for yc in (wp.imag, -wp.imag):
            zc = wp.real + 1j * yc
            second = -np.real(f_hat_derivs(spec, zc, x0, 2))  # d^2/dy^2 Re F-hat
            rep.pointsChecked += 1
            if second >= -_SLACK:
                rep.violations.append((complex(zc), float(second), 0.0))
            else:
                rep.delta = min(rep.delta, -second)
        reports.append(rep)
    if spec.variant is not Variant.WithInverses or spec.K == 0:
        z0 = edge_constants(spec).z0
        rep = LemmaReport("CEdge", 0)
        Y = 4 * z0 + 4
        ys = np.linspace(-Y, Y, points)
        ys = ys[ys != 0]
        for c in (0.05, 0.5, 2.0):
            z = z0 + c + 1j * ys
            g = -np.imag(f_hat_derivs(spec, z, x0, 1))
            want = -np.sign(ys)
            rep.pointsChecked += len(ys)
            for zz, gv, wv in zip(z, g, want):
                if wv * gv <= _SLACK:
                    rep.violations.append((complex(zz), float(gv), 0.0))
                else:
                    rep.delta = min(rep.delta, wv * gv)
        reports.append(rep)
    return _merge("C32", reports)
