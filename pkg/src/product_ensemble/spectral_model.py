"""Model specifications, angle parametrizations, densities, saddle points and edge constants."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import ConvergenceError, DomainError, NoSoftEdgeError

GUARD = 1e-9


class Variant(str, enum.Enum):
    GinibreProduct = "GinibreProduct"
    WithInverses = "WithInverses"
    TruncatedUnitary = "TruncatedUnitary"


@dataclass(frozen=True)
class ModelSpec:
    variant: Variant = Variant.GinibreProduct
    n: int = 1
    M: int = 1
    K: int = 0
    nu: tuple = ()
    nuTilde: tuple = ()
    kappa: int = 0

    def __post_init__(self):
        object.__setattr__(self, "variant", Variant(self.variant))
        if not self.nu:
            object.__setattr__(self, "nu", (0,) * self.M)
        object.__setattr__(self, "nu", tuple(int(v) for v in self.nu))
        if self.variant is Variant.WithInverses and not self.nuTilde:
            object.__setattr__(self, "nuTilde", (0,) * self.K)
        object.__setattr__(self, "nuTilde", tuple(int(v) for v in self.nuTilde))
        if self.n < 1 or self.M < 1:
            raise DomainError("n and M must be positive")
        if len(self.nu) != self.M or any(v < 0 for v in self.nu):
            raise DomainError("nu must hold M nonnegative integers")
        if self.variant is Variant.WithInverses:
            if self.K < 0 or len(self.nuTilde) != self.K or any(v < 0 for v in self.nuTilde):
                raise DomainError("nuTilde must hold K nonnegative integers")
            if self.K > 0 and self.nuTilde[-1] != 0:
                raise DomainError("the last nuTilde must be 0")
        elif self.K != 0:
            raise DomainError("K is only used by WithInverses")
        if self.variant is Variant.TruncatedUnitary and self.kappa <= self.nu[0]:
            raise DomainError("TruncatedUnitary needs kappa > nu_1")

    @property
    def nus(self) -> np.ndarray:
        """(nu_0 = 0, nu_1, ..., nu_M)."""
        return np.array((0,) + self.nu, dtype=float)

    def with_n(self, n: int) -> "ModelSpec":
        return ModelSpec(self.variant, n, self.M, self.K, self.nu, self.nuTilde, self.kappa)

    @property
    def scale_power(self) -> int:
        """Power of n that the squared singular values grow like."""
        if self.variant is Variant.WithInverses:
            return self.M - self.K
        if self.variant is Variant.TruncatedUnitary:
            return self.M - 1
        return self.M


@dataclass(frozen=True)
class BulkPoint:
    x0: float
    phi: float
    rho: float
    wPlus: complex
    wMinus: complex


@dataclass(frozen=True)
class EdgeData:
    xStar: float
    c1: float
    c2: float
    z0: float


def _is_ginibre(spec):
    return spec.variant is Variant.GinibreProduct or (
        spec.variant is Variant.WithInverses and spec.K == 0)


def phi_interval(spec: ModelSpec) -> tuple[float, float]:
    if spec.variant is Variant.TruncatedUnitary:
        if spec.M < 2:
            raise DomainError("TruncatedUnitary parametrization needs M >= 2")
        return 0.0, 2 * math.pi / (spec.M + 1)
    return 0.0, math.pi / (spec.M + 1)


def _check_phi(spec, phi):
    lo, hi = phi_interval(spec)
    if not (lo + GUARD < phi < hi - GUARD):
        raise DomainError(f"phi={phi} outside ({lo}, {hi})")


def _ratio_and_angle(spec, phi):
    """|w| and arg w at angle phi (the saddle of the model lies at ratio*e^{i*angle})."""
    M, K = spec.M, spec.K
    if spec.variant is Variant.TruncatedUnitary:
        r = math.sqrt(math.sin((M + 1) * phi / 2) / math.sin((M - 1) * phi / 2))
        return r, phi / 2
    if _is_ginibre(spec):
        return math.sin((M + 1) * phi) / math.sin(M * phi), phi
    A = ((M + 1) * phi + K * math.pi) / (K + 1)
    B = ((M - K) * phi + K * math.pi) / (K + 1)
    return math.sin(A) / math.sin(B), phi


def param_x(spec: ModelSpec, phi: float) -> float:
    _check_phi(spec, phi)
    M, K = spec.M, spec.K
    if spec.variant is Variant.TruncatedUnitary:
        lx = ((M + 1) / 2 * math.log(math.sin((M + 1) * phi / 2)) - math.log(math.sin(phi))
              - (M - 1) / 2 * math.log(math.sin((M - 1) * phi / 2)))
        return math.exp(lx)
    if _is_ginibre(spec):
        lx = ((M + 1) * math.log(math.sin((M + 1) * phi)) - math.log(math.sin(phi))
              - M * math.log(math.sin(M * phi)))
        return math.exp(lx)
    A = ((M + 1) * phi + K * math.pi) / (K + 1)
    B = ((M - K) * phi + K * math.pi) / (K + 1)
    lx = (M + 1) * math.log(math.sin(A)) - (K + 1) * math.log(math.sin(phi)) - (M - K) * math.log(math.sin(B))
    return math.exp(lx)


def density_rho(spec: ModelSpec, phi: float) -> float:
    x0 = param_x(spec, phi)
    r, ang = _ratio_and_angle(spec, phi)
    return r * math.sin(ang) / (math.pi * x0)


def saddle_points(spec: ModelSpec, phi: float) -> tuple[complex, complex]:
    _check_phi(spec, phi)
    r, ang = _ratio_and_angle(spec, phi)
    w = complex(r * math.cos(ang), r * math.sin(ang))
    return w, w.conjugate()


def saddle_residual(spec: ModelSpec, phi: float, z: complex) -> complex:
    x0 = param_x(spec, phi)
    M = spec.M
    if spec.variant is Variant.TruncatedUnitary:
        return z ** (M + 1) + x0 * (1 - z * z)
    if _is_ginibre(spec):
        return z ** (M + 1) - x0 * (z - 1)
    return z ** (M + 1) + x0 * (1 - z) ** (spec.K + 1)


def support_end(spec: ModelSpec) -> float:
    if spec.variant is Variant.WithInverses and spec.K > 0:
        return math.inf
    return edge_constants(spec).xStar


def inverse_param(spec: ModelSpec, x0: float) -> float:
    """Angle phi with param_x(phi) = x0, by bisection (param_x is decreasing)."""
    xmax = support_end(spec)
    if not (0 < x0 < xmax):
        raise DomainError(f"x0={x0} outside the open support (0, {xmax})")
    lo, hi = phi_interval(spec)
    lo, hi = lo + 2 * GUARD, hi - 2 * GUARD
    if not (param_x(spec, hi) < x0 < param_x(spec, lo)):
        raise DomainError(f"x0={x0} too close to the support boundary")
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi):
            break
        if param_x(spec, mid) > x0:
            lo = mid
        else:
            hi = mid
    phi = 0.5 * (lo + hi)
    return phi


def bulk_point(spec: ModelSpec, phi: float | None = None, x0: float | None = None) -> BulkPoint:
    if (phi is None) == (x0 is None):
        raise DomainError("give exactly one of phi, x0")
    if phi is None:
        phi = inverse_param(spec, x0)
    wp, wm = saddle_points(spec, phi)
    return BulkPoint(param_x(spec, phi), phi, density_rho(spec, phi), wp, wm)


def edge_constants(spec: ModelSpec) -> EdgeData:
    M = spec.M
    if spec.variant is Variant.TruncatedUnitary:
        if M < 2:
            raise DomainError("TruncatedUnitary soft edge needs M >= 2")
        xs = (M + 1) ** ((M + 1) / 2) / (2 * (M - 1) ** ((M - 1) / 2))
        c2 = (M + 1) ** ((M + 1) / 2) / (2 ** (4 / 3) * (M - 1) ** (M / 2 - 7 / 6))
        return EdgeData(xs, xs / c2, c2, math.sqrt((M + 1) / (M - 1)))
    if spec.variant is Variant.WithInverses and spec.K > 0:
        raise NoSoftEdgeError("products with inverses have unbounded support")
    xs = (M + 1) ** (M + 1) / M ** M
    c2 = (M + 1) ** (M + 2 / 3) / (2 ** (1 / 3) * M ** (M - 1))
    return EdgeData(xs, xs / c2, c2, 1 + 1 / M)


def fuss_catalan_moment(M: int, k: int) -> int:
    if M < 1 or k < 0:
        raise ValueError("need M >= 1, k >= 0")
    return math.comb(M * k + k, k) // (M * k + 1)


def _dlogx_dphi(spec, phi):
    M = spec.M
    return ((M + 1) ** 2 / math.tan((M + 1) * phi) - 1 / math.tan(phi)
            - M ** 2 / math.tan(M * phi))


def density_moment(spec: ModelSpec, k: int, nodes: int = 200) -> float:
    """int x^k rho(x) dx, computed in the angle variable."""
    if spec.variant is not Variant.GinibreProduct:
        raise DomainError("density_moment is only defined for GinibreProduct")
    lo, hi = phi_interval(spec)

    def integrate(m):
        t, w = np.polynomial.legendre.leggauss(m)
        phis = 0.5 * (hi - lo) * (t + 1) + lo
        acc = 0.0
        for p, wt in zip(phis, w):
            x = param_x(spec, p)
            acc += wt * x ** k * density_rho(spec, p) * x * -_dlogx_dphi(spec, p)
        return 0.5 * (hi - lo) * acc

    a, b = integrate(nodes), integrate(2 * nodes)
    if abs(a - b) > 1e-10 * max(1.0, abs(b)):
        raise ConvergenceError(f"density moment k={k} unresolved ({a} vs {b})")
    return b


def zeta_range(spec: ModelSpec) -> float:
    """Upper end of the curve parameter; the curve hits the origin there."""
    return math.pi / (spec.M + 1)


def _ratio_c(spec, th):
    """Modulus of the saddle curve at parameter th (complex th allowed)."""
    M, K = spec.M, spec.K
    with np.errstate(invalid="ignore", divide="ignore"):
        if spec.variant is Variant.TruncatedUnitary:
            r2 = np.sin((M + 1) * th) / np.sin((M - 1) * th)
            r2 = np.where(th == 0, (M + 1) / (M - 1), r2)
            if np.iscomplexobj(th):
                return np.sqrt(r2 + 0j)
            return np.sqrt(np.maximum(r2, 0.0))
        if _is_ginibre(spec):
            r = np.sin((M + 1) * th) / np.sin(M * th)
            return np.where(th == 0, (M + 1) / M, r)
        A = ((M + 1) * th + K * math.pi) / (K + 1)
        B = ((M - K) * th + K * math.pi) / (K + 1)
        return np.sin(A) / np.sin(B)


def zeta_curve(spec: ModelSpec, theta):
    """Points of the saddle curve through w+- (upper branch), vectorized."""
    th = np.asarray(theta, dtype=float)
    return _ratio_c(spec, th) * np.exp(1j * th)


def zeta_curve_deriv(spec: ModelSpec, theta):
    """d zeta / d theta; the modulus is differentiated by complex step."""
    th = np.asarray(theta, dtype=float)
    h = 1e-20
    rp = np.imag(_ratio_c(spec, th + 1j * h)) / h
    r = _ratio_c(spec, th)
    return (rp + 1j * r) * np.exp(1j * th)
