import math
from functools import lru_cache

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from product_ensemble.errors import DomainError, NoSoftEdgeError
from product_ensemble.spectral_model import (ModelSpec, bulk_point, density_moment, density_rho,
                                             edge_constants, fuss_catalan_moment, inverse_param,
                                             param_x, phi_interval, saddle_points, saddle_residual,
                                             support_end)

G1, G2 = ModelSpec("GinibreProduct", 1, 1), ModelSpec("GinibreProduct", 1, 2)
SPECS = [ModelSpec("GinibreProduct", 1, m) for m in (1, 2, 3, 4)] + [
    ModelSpec("WithInverses", 1, 2, K=1), ModelSpec("WithInverses", 1, 3, K=2),
    ModelSpec("TruncatedUnitary", 1, 2, kappa=3), ModelSpec("TruncatedUnitary", 1, 3, kappa=1)]


def dyck_count(M, k):
    """Lattice paths with k up-steps of +M and M*k down-steps of -1 that stay >= 0."""
    @lru_cache(None)
    def count(ups, downs, h):
        if ups == 0 and downs == 0:
            return 1
        total = 0
        if ups:
            total += count(ups - 1, downs, h + M)
        if downs and h > 0:
            total += count(ups, downs - 1, h - 1)
        return total
    return count(k, M * k, 0)


def test_param_x_examples():
    assert param_x(G1, math.pi / 4) == pytest.approx(2.0, rel=1e-14)
    for M in (1, 2, 3):
        s = ModelSpec("GinibreProduct", 1, M)
        assert param_x(s, 1e-6) == pytest.approx((M + 1) ** (M + 1) / M ** M, rel=1e-3)
        assert param_x(s, math.pi / (M + 1) - 1e-6) < 1e-4


def test_density_examples():
    assert density_rho(G1, math.pi / 4) == pytest.approx(1 / (2 * math.pi), rel=1e-13)
    # Marchenko-Pastur at other points
    for x in (0.5, 1.0, 3.0):
        phi = inverse_param(G1, x)
        assert density_rho(G1, phi) == pytest.approx(math.sqrt((4 - x) / x) / (2 * math.pi), rel=1e-10)


@pytest.mark.parametrize("M", [1, 2, 3])
def test_density_trends(M):
    s = ModelSpec("GinibreProduct", 1, M)
    hi = math.pi / (M + 1)
    tail = [density_rho(s, hi * (0.9 + 0.0099 * i)) for i in range(10)]
    assert all(b > a for a, b in zip(tail, tail[1:]))
    assert density_rho(s, 1e-5) < 1e-2


def test_inverse_param_examples():
    assert inverse_param(G1, 2.0) == pytest.approx(math.pi / 4, abs=1e-12)
    assert inverse_param(G2, param_x(G2, 0.7)) == pytest.approx(0.7, abs=1e-12)
    with pytest.raises(DomainError):
        inverse_param(G2, 6.75)


def test_saddle_examples():
    wp, wm = saddle_points(G1, math.pi / 4)
    assert wp == pytest.approx(1 + 1j, abs=1e-14) and wm == pytest.approx(1 - 1j, abs=1e-14)
    wp, _ = saddle_points(G2, math.pi / 6)
    assert wp == pytest.approx(2 / math.sqrt(3) * complex(math.cos(math.pi / 6), math.sin(math.pi / 6)))
    assert abs(saddle_residual(G2, math.pi / 6, wp)) < 1e-13


@settings(max_examples=100, deadline=None)
@given(st.sampled_from(SPECS), st.floats(0.001, 0.999))
def test_saddle_residuals_and_symmetry(spec, u):
    lo, hi = phi_interval(spec)
    phi = lo + u * (hi - lo)
    wp, wm = saddle_points(spec, phi)
    assert wm == wp.conjugate()
    assert abs(saddle_residual(spec, phi, wp)) < 1e-10 * max(1.0, abs(wp) ** (spec.M + 1))
    if spec.variant.value == "GinibreProduct":
        assert 0 < wp.real < (spec.M + 1) / spec.M


def test_param_x_monotone():
    for s in SPECS[:4]:
        lo, hi = phi_interval(s)
        xs = [param_x(s, p) for p in np.linspace(lo + 1e-6, hi - 1e-6, 1000)]
        assert all(b < a for a, b in zip(xs, xs[1:]))


@settings(max_examples=60, deadline=None)
@given(st.sampled_from(SPECS), st.floats(0.01, 0.99))
def test_inverse_round_trip(spec, u):
    lo, hi = phi_interval(spec)
    phi = lo + u * (hi - lo)
    assert inverse_param(spec, param_x(spec, phi)) == pytest.approx(phi, abs=1e-10)


def test_edge_constants():
    e = edge_constants(G1)
    assert e.xStar == 4 and e.z0 == 2
    assert e.c2 == pytest.approx(2 ** (4 / 3), rel=1e-14)
    assert edge_constants(ModelSpec("TruncatedUnitary", 1, 3, kappa=1)).xStar == pytest.approx(4.0)
    with pytest.raises(NoSoftEdgeError):
        edge_constants(ModelSpec("WithInverses", 1, 2, K=1))
    assert support_end(ModelSpec("WithInverses", 1, 2, K=1)) == math.inf


@pytest.mark.parametrize("spec", [G1, G2, ModelSpec("TruncatedUnitary", 1, 2, kappa=3)])
def test_edge_continuity(spec):
    z0 = edge_constants(spec).z0
    lo, _ = phi_interval(spec)
    gaps = [abs(saddle_points(spec, lo + d)[0] - z0) for d in (1e-2, 1e-3, 1e-4)]
    assert gaps[0] > gaps[1] > gaps[2] and gaps[2] < 1e-3


def test_fuss_catalan():
    assert fuss_catalan_moment(2, 2) == 3
    assert fuss_catalan_moment(1, 3) == 5
    for M in (1, 2, 3):
        assert fuss_catalan_moment(M, 0) == 1


@pytest.mark.parametrize("M", [1, 2, 3, 4])
def test_fuss_catalan_vs_paths(M):
    for k in range(7):
        assert fuss_catalan_moment(M, k) == dyck_count(M, k)


def test_density_moment_examples():
    assert density_moment(G2, 0) == pytest.approx(1, rel=1e-10)
    assert density_moment(G2, 1) == pytest.approx(1, rel=1e-10)
    assert density_moment(G2, 2) == pytest.approx(3, rel=1e-10)


def test_bulk_point():
    bp = bulk_point(G2, x0=1.0)
    assert bp.x0 == pytest.approx(1.0)
    assert bp.rho == pytest.approx(density_rho(G2, bp.phi))
    with pytest.raises(DomainError):
        bulk_point(G2)


def test_model_validation():
    with pytest.raises(DomainError):
        ModelSpec("TruncatedUnitary", 3, 2, kappa=0)
    with pytest.raises(DomainError):
        ModelSpec("GinibreProduct", 3, 2, nu=(0,))
    with pytest.raises(DomainError):
        ModelSpec("WithInverses", 3, 2, K=1, nuTilde=(1,))
    with pytest.raises(DomainError):
        param_x(G2, math.pi / 3)
