"""Sampling the matrix products and comparing their spectra with the limiting density."""

from __future__ import annotations

import csv
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, SingularFactorError
from .spectral_model import (ModelSpec, Variant, density_rho, edge_constants, inverse_param,
                             support_end)

COND_LIMIT = 1e14
_RETRIES = 20


def sample_ginibre(rows: int, cols: int, rng: np.random.Generator) -> np.ndarray:
    """Standard complex Gaussian matrix, E|z|^2 = 1."""
    if rows < 1 or cols < 1:
        raise DomainError("rows and cols must be positive")
    z = rng.standard_normal((rows, cols, 2)) * math.sqrt(0.5)
    return z[..., 0] + 1j * z[..., 1]


def haar_unitary(size: int, rng: np.random.Generator) -> np.ndarray:
    """QR of a Ginibre matrix, columns rotated by the phases of diag(R)."""
    q, r = np.linalg.qr(sample_ginibre(size, size, rng))
    d = np.diagonal(r)
    return q * (d / np.abs(d))[None, :]


def _product(dims, rng):
    """X_k ... X_1 with X_j of size dims[j] x dims[j-1]."""
    out = sample_ginibre(dims[1], dims[0], rng)
    for a, b in zip(dims[1:-1], dims[2:]):
        out = sample_ginibre(b, a, rng) @ out
    return out


def sample_squared_singular_values(spec: ModelSpec, rng: np.random.Generator) -> np.ndarray:
    """Squared singular values of one draw of the product, ascending and unscaled."""
    n = spec.n
    if spec.variant is Variant.GinibreProduct:
        y = _product([n] + [n + v for v in spec.nu], rng)
    elif spec.variant is Variant.WithInverses:
        y = _product([n] + [n + v for v in spec.nu], rng)
        if spec.K:
            den = _product([n] + [n + v for v in spec.nuTilde], rng)
            if np.linalg.cond(den) > COND_LIMIT:
                raise SingularFactorError("inverse factor is numerically singular")
            # Y = P Q^{-1}, i.e. solve Y Q = P from the right
            y = np.linalg.solve(den.T, y.T).T
    else:
        l = spec.kappa + 2 * n - 1
        y = haar_unitary(l, rng)[: n + spec.nu[0], :n]
        for a, b in zip(spec.nu[:-1], spec.nu[1:]):
            y = sample_ginibre(n + b, n + a, rng) @ y
    s = np.linalg.svd(y, compute_uv=False)
    return np.sort(s * s)


def trial_rng(seed: int, trial: int) -> np.random.Generator:
    """Counter-based stream for one trial; independent of how trials are scheduled."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=(trial,))))


def _one_trial(spec, seed, trial):
    rng = trial_rng(seed, trial)
    for _ in range(_RETRIES):
        try:
            return sample_squared_singular_values(spec, rng)
        except SingularFactorError:
            continue
    raise SingularFactorError(f"trial {trial}: no invertible draw in {_RETRIES} attempts")


def _workers(workers):
    if workers is not None:
        return max(1, int(workers))
    env = os.environ.get("PRODUCT_ENSEMBLE_THREADS")
    return max(1, int(env)) if env else 1


@dataclass(frozen=True)
class SampleBatch:
    spec: ModelSpec
    trials: int
    seed: int
    rescaledValues: np.ndarray  # trial-major, each trial ascending

    def per_trial(self) -> np.ndarray:
        return self.rescaledValues.reshape(self.trials, self.spec.n)


def sample_batch(spec: ModelSpec, trials: int, seed: int, workers: int | None = None) -> SampleBatch:
    if trials < 1:
        raise DomainError("trials must be positive")
    seed = int(seed)
    scale = float(spec.n) ** spec.scale_power
    w = _workers(workers)
    if w == 1:
        rows = [_one_trial(spec, seed, t) for t in range(trials)]
    else:
        with ThreadPoolExecutor(w) as ex:
            rows = list(ex.map(lambda t: _one_trial(spec, seed, t), range(trials)))
    return SampleBatch(spec, trials, seed, np.concatenate(rows) / scale)


@dataclass(frozen=True)
class Histogram:
    edges: np.ndarray
    counts: np.ndarray
    normalizedDensity: np.ndarray
    analyticDensity: np.ndarray


def density_at(spec: ModelSpec, x: float) -> float:
    """Limiting density of the rescaled values at x; nan where the angle cannot be resolved."""
    try:
        return density_rho(spec, inverse_param(spec, x))
    except DomainError:
        return math.nan


def bin_average_density(spec: ModelSpec, a: float, b: float, nodes: int = 8) -> float:
    g, w = np.polynomial.legendre.leggauss(nodes)
    xs = 0.5 * (b - a) * g + 0.5 * (a + b)
    return 0.5 * float(np.sum(w * np.array([density_at(spec, x) for x in xs])))


def empirical_vs_density(batch: SampleBatch, bins: int = 80, quantile: float | None = None):
    """Histogram of the batch against the bin-averaged density; sup error over interior bins.

    Products with inverses have unbounded support, so the histogram stops at the 99th
    percentile there (or at `quantile` if given) and the analytic side is renormalized
    to the same mass.
    """
    if bins < 5:
        raise DomainError("need at least 5 bins")
    spec, vals = batch.spec, batch.rescaledValues
    end = support_end(spec)
    if math.isinf(end) and quantile is None:
        quantile = 0.99
    if quantile is not None:
        hi = float(np.quantile(vals, quantile))
        kept = vals[vals <= hi]
    else:
        hi = max(end, float(vals.max()))
        kept = vals
    edges = np.linspace(0.0, hi, bins + 1)
    counts, _ = np.histogram(kept, edges)
    width = np.diff(edges)
    dens = counts / (kept.size * width)
    ana = np.array([bin_average_density(spec, a, b) if a < end else 0.0
                    for a, b in zip(edges[:-1], edges[1:])])
    ana *= vals.size / kept.size
    inner = slice(2, bins - 2)
    diff = np.abs(dens[inner] - ana[inner])
    sup = float(np.nanmax(diff))
    return Histogram(edges, counts, dens, ana), sup


def edge_statistics(spec: ModelSpec, trials: int, seed: int | np.random.Generator = 0,
                    workers: int | None = None) -> tuple[float, float]:
    """Mean and standard deviation of the rescaled largest value."""
    edge_constants(spec)  # raises for models without a soft edge
    if isinstance(seed, np.random.Generator):
        seed = int(seed.integers(2 ** 63))
    b = sample_batch(spec, trials, seed, workers)
    top = b.per_trial()[:, -1]
    return float(top.mean()), float(top.std(ddof=1)) if trials > 1 else 0.0


def _atomic_csv(path, header, rows):
    tmp = f"{path}.tmp{os.getpid()}"
    with open(tmp, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        w.writerows(rows)
    os.replace(tmp, path)


def export_batch_csv(batch: SampleBatch, path) -> None:
    rows = ((t, i, repr(float(v))) for t, row in enumerate(batch.per_trial()) for i, v in enumerate(row))
    _atomic_csv(path, ("trial", "index", "value"), rows)


def export_histogram_csv(hist: Histogram, path) -> None:
    e = hist.edges
    rows = ((repr(float(e[i])), repr(float(e[i + 1])), int(hist.counts[i]),
             repr(float(hist.normalizedDensity[i])), repr(float(hist.analyticDensity[i])))
            for i in range(len(hist.counts)))
    _atomic_csv(path, ("bin_left", "bin_right", "count", "density", "analytic_density"), rows)
