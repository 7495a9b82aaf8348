"""Brute-force small-n kernel from the moment matrix, independent of the contour engine."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import DomainError, IllConditionedError
from .special_functions import WeightSpec, mellin_moment, weight_w
from .spectral_model import ModelSpec, Variant

COND_LIMIT = 1e12


@dataclass(frozen=True)
class MomentMatrix:
    n: int
    entries: tuple  # exact integers, entries[j][k] = int x^j w_k dx
    conditionEstimate: float

    def as_array(self) -> np.ndarray:
        return np.array([[float(v) for v in row] for row in self.entries])


def _weight_spec(spec, k):
    return WeightSpec(spec.M, spec.nu, k)


def _check(spec):
    if spec.variant is not Variant.GinibreProduct:
        raise DomainError("the moment oracle covers GinibreProduct only")
    if any(not float(v).is_integer() for v in spec.nu):
        raise DomainError("the moment oracle needs integer nu")


def _entries(spec, n):
    _check(spec)
    if n < 1:
        raise DomainError("n must be positive")
    return tuple(tuple(mellin_moment(j, _weight_spec(spec, k)) for k in range(n)) for j in range(n))


def moment_matrix(spec: ModelSpec, n: int | None = None) -> MomentMatrix:
    n = spec.n if n is None else n
    rows = _entries(spec, n)
    cond = float(np.linalg.cond(np.array(rows, dtype=float)))
    if cond > COND_LIMIT:
        raise IllConditionedError(f"moment matrix condition {cond:.3g} exceeds {COND_LIMIT:g}")
    if n > 8:
        warnings.warn("moment matrices beyond n=8 are outside the tested range", stacklevel=2)
    return MomentMatrix(n, rows, cond)


def _exact_inverse(rows):
    """Gauss-Jordan over the rationals."""
    n = len(rows)
    a = [[Fraction(v) for v in row] + [Fraction(int(i == j)) for j in range(n)] for i, row in enumerate(rows)]
    for col in range(n):
        piv = next(r for r in range(col, n) if a[r][col] != 0)
        a[col], a[piv] = a[piv], a[col]
        p = a[col][col]
        a[col] = [v / p for v in a[col]]
        for r in range(n):
            if r != col and a[r][col] != 0:
                f = a[r][col]
                a[r] = [u - f * v for u, v in zip(a[r], a[col])]
    return [row[n:] for row in a]


def _exact_det(rows):
    n = len(rows)
    a = [[Fraction(v) for v in row] for row in rows]
    det = Fraction(1)
    for col in range(n):
        piv = next((r for r in range(col, n) if a[r][col] != 0), None)
        if piv is None:
            return Fraction(0)
        if piv != col:
            a[col], a[piv] = a[piv], a[col]
            det = -det
        det *= a[col][col]
        for r in range(col + 1, n):
            f = a[r][col] / a[col][col]
            a[r] = [u - f * v for u, v in zip(a[r], a[col])]
    return det


class _Oracle:
    """Coefficients c[k][j] = (M^-1)[k][j] so that K(x, y) = sum_jk x^j c[k][j] w_k(y)."""

    def __init__(self, spec, n):
        self.spec, self.n = spec, n
        # exact rational inverse, so the float condition guard of moment_matrix does not apply
        self.inv = _exact_inverse(_entries(spec, n))
        self.ws = [_weight_spec(spec, k) for k in range(n)]

    def weights(self, y):
        return [weight_w(w, y) for w in self.ws]

    def kernel(self, x, y, wy=None):
        wy = self.weights(y) if wy is None else wy
        # the polynomial in x has exact rational coefficients: q_k(x) = sum_j c[k][j] x^j
        acc = 0.0
        for k in range(self.n):
            qk = math.fsum(float(self.inv[k][j]) * x ** j for j in range(self.n))
            acc += qk * wy[k]
        return acc


def kernel_direct(spec: ModelSpec, n: int | None, x: float, y: float) -> float:
    if not (x > 0 and y > 0):
        raise DomainError("x and y must be positive")
    n = spec.n if n is None else n
    return _Oracle(spec, n).kernel(x, y)


def kernel_direct_grid(spec: ModelSpec, n: int | None, xs, ys) -> np.ndarray:
    """K(xs[j], ys[i]) at [i, j], reusing the weights for each y."""
    n = spec.n if n is None else n
    orc = _Oracle(spec, n)
    out = np.empty((len(ys), len(xs)))
    for i, y in enumerate(ys):
        wy = orc.weights(y)
        for j, x in enumerate(xs):
            out[i, j] = orc.kernel(x, y, wy)
    return out


@dataclass(frozen=True)
class NormalizationResult:
    lhs: float
    rhs: float
    passed: bool


def normalization_check(spec: ModelSpec, n: int | None = None, tol: float = 1e-9) -> NormalizationResult:
    """log det of the moment matrix against the sum of log-gammas over i = 1..n, j = 0..M."""
    _check(spec)
    n = spec.n if n is None else n
    det = _exact_det(_entries(spec, n))
    if det <= 0:
        raise IllConditionedError("moment matrix determinant is not positive")
    lhs = math.log(det.numerator) - math.log(det.denominator)
    rhs = math.fsum(math.lgamma(i + v) for i in range(1, n + 1) for v in spec.nus)
    return NormalizationResult(lhs, rhs, abs(lhs - rhs) <= tol)


def _positive_line(order, lo=-30.0, hi=None, panels=40):
    """Gauss-Legendre nodes in log t on [lo, hi]; returns (t, weights for dt)."""
    g, w = np.polynomial.legendre.leggauss(order)
    edges = np.linspace(lo, hi, panels + 1)
    v = np.concatenate([0.5 * (b - a) * g + 0.5 * (a + b) for a, b in zip(edges[:-1], edges[1:])])
    wv = np.concatenate([0.5 * (b - a) * w for a, b in zip(edges[:-1], edges[1:])])
    t = np.exp(v)
    return t, wv * t


def tail_cutoff(spec: ModelSpec, n: int, rel: float = 1e-18) -> float:
    """x beyond which x^(n-1) w_(n-1)(x) has fallen below rel times its maximum (found by log-spaced scan)."""
    w = _weight_spec(spec, n - 1)
    best = 0.0
    x = 1.0
    while True:
        v = x ** (n - 1) * weight_w(w, x) * x
        best = max(best, v)
        if v < rel * best and x > 10 * n:
            return x
        x *= 1.5
        if x > 1e12:
            return x


def reproducing_check(spec: ModelSpec, n: int | None = None, quadratureOrder: int = 16,
                      grid=(0.5, 1.0, 2.0, 3.0)) -> float:
    """max |int K(x,t) K(t,y) dt - K(x,y)| / max(1, |K(x,y)|) over a grid, by quadrature in log t."""
    n = spec.n if n is None else n
    if n > 6:
        raise DomainError("reproducing_check is meant for n <= 6")
    orc = _Oracle(spec, n)
    hi = math.log(tail_cutoff(spec, n))
    t, wt = _positive_line(quadratureOrder, hi=hi)
    W = np.array([orc.weights(tt) for tt in t])  # (Nt, n)
    Q = np.array([[float(v) for v in row] for row in orc.inv])  # c[k][j]
    # K(x, t) = sum_k q_k(x) w_k(t);  K(t, y) = sum_k q_k(t) w_k(y)
    powers = t[:, None] ** np.arange(n)[None, :]
    qt = powers @ Q.T  # (Nt, n): q_k(t)
    worst = 0.0
    for x in grid:
        qx = Q @ (x ** np.arange(n))
        kxt = W @ qx
        for y in grid:
            wy = np.array(orc.weights(y))
            kty = qt @ wy
            lhs = float(np.sum(wt * kxt * kty))
            rhs = orc.kernel(x, y, list(wy))
            worst = max(worst, abs(lhs - rhs) / max(1.0, abs(rhs)))
    return worst
