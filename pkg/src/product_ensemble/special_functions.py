"""Complex log-gamma, Airy Ai/Ai', the Meijer-G weights w_k and their Mellin moments."""

from __future__ import annotations

import math
from dataclasses import dataclass
from decimal import Decimal, localcontext
from functools import lru_cache

import numpy as np
from scipy.special import digamma, polygamma

from .errors import ConvergenceError, PoleError, RangeError

# Lanczos coefficients, g = 671/128 (14 terms); ~1e-15 relative on Re z >= 1/2.
_LANCZOS_G = 671.0 / 128.0
_LANCZOS_C0 = 0.999999999999997092
_LANCZOS_COF = np.array([
    57.1562356658629235, -59.5979603554754912, 14.1360979747417471,
    -0.491913816097620199, 0.339946499848118887e-4, 0.465236289270485756e-4,
    -0.983744753048795646e-4, 0.158088703224912494e-3, -0.210264441724104883e-3,
    0.217439618115212643e-3, -0.164318106536763890e-3, 0.844182239838527433e-4,
    -0.261908384015814087e-4, 0.368991826595316234e-5,
])
_SQRT_2PI = 2.5066282746310005
_LOG_PI = math.log(math.pi)
_LOG_HALF_I = np.log(0.5j)


def _lanczos(z):
    tmp = z + _LANCZOS_G
    ser = np.full(z.shape, _LANCZOS_C0, dtype=complex)
    for j, c in enumerate(_LANCZOS_COF):
        ser += c / (z + (j + 1))
    return (z + 0.5) * np.log(tmp) - tmp + np.log(_SQRT_2PI * ser / z)


def _reflect_upper(w):
    # log Gamma for Re w < 1/2, Im w >= 0; log sin(pi w) is written as
    # -i pi w + log(1 - e^{2 pi i w}) + log(i/2) so the branch stays continuous.
    return (_LOG_PI + 1j * np.pi * w - np.log1p(-np.exp(2j * np.pi * w))
            - _LOG_HALF_I - _lanczos(1.0 - w))


def log_gamma(z):
    """Principal branch of log Gamma(z), elementwise.

    Accepts a scalar or array. On the negative real axis the value is the
    limit from the upper half-plane. Raises PoleError at 0, -1, -2, ...
    """
    scalar = np.ndim(z) == 0
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    if not np.all(np.isfinite(z)):
        raise PoleError("non-finite argument to log_gamma")
    pole = (z.imag == 0) & (z.real <= 0) & (z.real == np.round(z.real))
    if np.any(pole):
        raise PoleError(f"log_gamma pole at {z[pole][0].real:g}")
    out = np.empty_like(z)
    right = z.real >= 0.5
    if np.any(right):
        out[right] = _lanczos(z[right])
    left = ~right
    if np.any(left):
        w = z[left]
        up = w.imag >= 0
        res = np.empty_like(w)
        res[up] = _reflect_upper(w[up])
        res[~up] = np.conj(_reflect_upper(np.conj(w[~up])))
        out[left] = res
    return complex(out[0]) if scalar else out


# ---------------------------------------------------------------- Airy

_AI0 = "0.35502805388781723926006318600418317639797917419917724058332651030081004245"
_AIP0 = "0.25881940379280679840518356018920396347909113835493458221000181385610277267"
_SERIES_CUT = 8.0
_AIRY_PREC = 70


@lru_cache(maxsize=1)
def _airy_coeffs():
    with localcontext() as ctx:
        ctx.prec = _AIRY_PREC
        a = [Decimal(1)]
        b = [Decimal(1)]
        for k in range(60):
            a.append(a[-1] / ((3 * k + 2) * (3 * k + 3)))
            b.append(b[-1] / ((3 * k + 3) * (3 * k + 4)))
        return a, b


def _airy_series(x: float):
    # Maclaurin series summed in 70-digit decimal arithmetic: the partial sums
    # cancel heavily for |x| ~ 8 and double precision would lose ~5 digits.
    a, b = _airy_coeffs()
    with localcontext() as ctx:
        ctx.prec = _AIRY_PREC
        xd = Decimal(x)
        X = xd * xd * xd
        f = g = fp = gp = Decimal(0)
        p = Decimal(1)  # X**k
        for k in range(len(a)):
            f += a[k] * p
            g += b[k] * p
            gp += (3 * k + 1) * b[k] * p
            if k > 0:
                fp += 3 * k * a[k] * p
            p *= X
        g *= xd
        fp = fp / xd if x != 0 else Decimal(0)
        c1, c2 = Decimal(_AI0), Decimal(_AIP0)
        return float(c1 * f - c2 * g), float(c1 * fp - c2 * gp)


def _asym_coeffs(nterms: int):
    u = [1.0]
    for k in range(1, nterms):
        u.append(u[-1] * (6 * k - 5) * (6 * k - 3) * (6 * k - 1) / (216.0 * k * (2 * k - 1)))
    v = [1.0] + [-(6 * k + 1) / (6 * k - 1) * u[k] for k in range(1, nterms)]
    return u, v


def _airy_asymptotic(x: float):
    ax = abs(x)
    zeta = 2.0 / 3.0 * ax ** 1.5
    u, v = _asym_coeffs(40)
    if x > 0:
        su = sv = 0.0
        for k in range(40):
            tu = (-1) ** k * u[k] / zeta ** k
            su += tu
            sv += (-1) ** k * v[k] / zeta ** k
            if abs(tu) < 1e-17:
                break
        pref = math.exp(-zeta) / (2.0 * math.sqrt(math.pi))
        return pref * su / ax ** 0.25, -pref * sv * ax ** 0.25
    # oscillatory side
    pu_e = pu_o = pv_e = pv_o = 0.0
    for k in range(20):
        te = (-1) ** k * u[2 * k] / zeta ** (2 * k)
        to = (-1) ** k * u[2 * k + 1] / zeta ** (2 * k + 1)
        pu_e += te
        pu_o += to
        pv_e += (-1) ** k * v[2 * k] / zeta ** (2 * k)
        pv_o += (-1) ** k * v[2 * k + 1] / zeta ** (2 * k + 1)
        if abs(to) < 1e-17:
            break
    th = zeta + math.pi / 4
    s, c = math.sin(th), math.cos(th)
    ai = (s * pu_e - c * pu_o) / (math.sqrt(math.pi) * ax ** 0.25)
    aip = -(ax ** 0.25) * (c * pv_e + s * pv_o) / math.sqrt(math.pi)
    return ai, aip


def airy_ai(x: float) -> tuple[float, float]:
    """(Ai(x), Ai'(x)) for real x in [-30, 30]."""
    x = float(x)
    if not (-30.0 <= x <= 30.0):
        raise RangeError(f"airy_ai supports [-30, 30], got {x}")
    if abs(x) <= _SERIES_CUT:
        return _airy_series(x)
    return _airy_asymptotic(x)


# ---------------------------------------------------------------- weights


@dataclass(frozen=True)
class WeightSpec:
    M: int
    nu: tuple
    k: int = 0

    def __post_init__(self):
        if self.M < 1 or len(self.nu) != self.M:
            raise ValueError("WeightSpec needs M >= 1 and len(nu) == M")
        if any(v < 0 for v in self.nu) or self.k < 0:
            raise ValueError("nu_j and k must be nonnegative")

    @property
    def shifts(self) -> np.ndarray:
        """a_j with integrand prod_j Gamma(s + a_j) x^{-s}."""
        a = np.array(self.nu, dtype=float)
        a[0] += self.k
        return a


def _mb_abscissa(a: np.ndarray, logx: float) -> float:
    # Real saddle of prod Gamma(s + a_j) x^{-s}: sum psi(s + a_j) = log x.
    lo = -a.min() + 0.5
    if np.sum(digamma(lo + a)) >= logx:
        return lo
    hi = lo + 1.0
    while np.sum(digamma(hi + a)) < logx:
        hi = lo + 2 * (hi - lo)
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if np.sum(digamma(mid + a)) < logx:
            lo = mid
        else:
            hi = mid
        if hi - lo < 1e-10 * max(1.0, hi):
            break
    return 0.5 * (lo + hi)


def weight_w(spec: WeightSpec, x: float, _max_nodes: int = 400_000) -> float:
    """w_k(x) by trapezoidal quadrature of its Mellin-Barnes integral.

    The vertical line passes through the real saddle of the integrand (kept at
    least 1/2 to the right of the poles), which avoids cancellation for large x.
    """
    if not x > 0:
        raise ValueError("weight_w needs x > 0")
    a = spec.shifts
    logx = math.log(x)
    c = _mb_abscissa(a, logx)
    curv = float(np.sum(polygamma(1, c + a)))
    sigma = 1.0 / math.sqrt(curv)
    dist = c + a.min()
    h = min(sigma / 3.0, dist / 6.0)

    def logg(u):
        s = c + 1j * u
        out = -s * logx
        for aj in a:
            out = out + log_gamma(s + aj)
        return out

    peak = logg(np.zeros(1))[0].real
    total = 0.5
    start = 1
    chunk = 2048
    while True:
        j = np.arange(start, start + chunk)
        vals = np.exp(logg(h * j) - peak)
        total += np.sum(vals.real)
        tail = np.abs(vals[-64:])
        if np.all(tail < 1e-18):
            break
        start += chunk
        if start > _max_nodes:
            raise ConvergenceError("Mellin-Barnes integrand did not decay to 1e-18 of its peak")
    return math.exp(peak) * h * 2.0 * total / (2.0 * math.pi)


def log_mellin_moment(j: int, spec: WeightSpec) -> float:
    a = spec.shifts
    return float(sum(math.lgamma(j + 1 + aj) for aj in a))


def mellin_moment(j: int, spec: WeightSpec):
    """int_0^inf x^j w_k(x) dx = Gamma(j+1+nu_1+k) prod_{l>=2} Gamma(j+1+nu_l).

    Integer parameters give an exact int; raises OverflowError when the value
    does not fit in a double (use log_mellin_moment then).
    """
    if j < 0:
        raise ValueError("j must be >= 0")
    a = spec.shifts
    if all(float(v).is_integer() for v in a):
        val = 1
        for aj in a:
            val *= math.factorial(j + int(aj))
        if val > 1.7976931348623157e308:
            raise OverflowError("moment exceeds double range; use log_mellin_moment")
        return val
    lv = log_mellin_moment(j, spec)
    if lv > 709.78:
        raise OverflowError("moment exceeds double range; use log_mellin_moment")
    return math.exp(lv)
