import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from product_ensemble.errors import DomainError, IllConditionedError
from product_ensemble.moment_oracle import (kernel_direct, kernel_direct_grid, moment_matrix,
                                            normalization_check, reproducing_check, tail_cutoff)
from product_ensemble.spectral_model import ModelSpec


def test_moment_matrix_examples():
    assert moment_matrix(ModelSpec("GinibreProduct", 2, 1)).entries == ((1, 1), (1, 2))
    assert moment_matrix(ModelSpec("GinibreProduct", 1, 2)).entries == ((1,),)


def test_large_n_guard():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        with pytest.raises(IllConditionedError):
            moment_matrix(ModelSpec("GinibreProduct", 9, 2))


def test_only_ginibre():
    with pytest.raises(DomainError):
        moment_matrix(ModelSpec("TruncatedUnitary", 3, 2, kappa=3))


def test_single_term_kernel():
    spec = ModelSpec("GinibreProduct", 1, 1)
    for x in (0.2, 1.0, 4.0):
        assert kernel_direct(spec, 1, x, 1.0) == pytest.approx(math.exp(-1), rel=1e-12)
    # trace of K_1: int e^{-x} dx
    g, w = np.polynomial.legendre.leggauss(60)
    t = 20 * (g + 1)
    assert 20 * sum(wi * kernel_direct(spec, 1, ti, ti) for ti, wi in zip(t, w)) == pytest.approx(1, abs=1e-8)


def test_normalization_examples():
    r = normalization_check(ModelSpec("GinibreProduct", 2, 1))
    assert r.passed and abs(r.lhs) < 1e-15 and abs(r.rhs) < 1e-15
    for nu in ((0, 0), (1, 3), (2, 0)):
        r = normalization_check(ModelSpec("GinibreProduct", 1, 2, nu=nu))
        assert r.passed and r.lhs == pytest.approx(sum(math.lgamma(1 + v) for v in nu), abs=1e-12)
    r = normalization_check(ModelSpec("GinibreProduct", 2, 3, nu=(0, 0, 1)))
    assert r.passed


def test_reproducing_examples():
    assert reproducing_check(ModelSpec("GinibreProduct", 1, 1)) < 1e-8
    assert reproducing_check(ModelSpec("GinibreProduct", 3, 2)) < 1e-4


def test_grid_matches_pointwise():
    spec = ModelSpec("GinibreProduct", 3, 2, nu=(1, 0))
    xs, ys = [0.5, 2.0], [1.0, 3.0, 0.7]
    g = kernel_direct_grid(spec, 3, xs, ys)
    for i, y in enumerate(ys):
        for j, x in enumerate(xs):
            assert g[i, j] == pytest.approx(kernel_direct(spec, 3, x, y), rel=1e-13)


@settings(max_examples=20, deadline=None)
@given(st.integers(1, 5), st.integers(1, 3), st.floats(0.3, 4), st.floats(0.3, 4))
def test_polynomial_in_x(n, M, y, x):
    # n-th finite difference of a degree n-1 polynomial vanishes
    spec = ModelSpec("GinibreProduct", n, M)
    h = 0.25
    vals = [kernel_direct(spec, n, x + k * h, y) for k in range(n + 1)]
    diff = sum((-1) ** (n - k) * math.comb(n, k) * v for k, v in enumerate(vals))
    assert abs(diff) <= 1e-9 * max(1.0, max(abs(v) for v in vals))


def test_tail_cutoff_grows_with_n():
    a = tail_cutoff(ModelSpec("GinibreProduct", 2, 2), 2)
    b = tail_cutoff(ModelSpec("GinibreProduct", 5, 2), 5)
    assert b > a > 10
