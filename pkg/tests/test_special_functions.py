import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from product_ensemble.errors import RangeError
from product_ensemble.special_functions import (WeightSpec, airy_ai, log_gamma, log_mellin_moment,
                                                mellin_moment, weight_w)

# mpmath.loggamma at 30 digits, frozen
LOGGAMMA_REF = {
    1 + 1j: -0.650923199301856338885 - 0.301640320467533197888j,
    0.3 - 4j: -5.64106353482052872957 - 1.23644912154980662503j,
    -2.5 + 0.1j: -0.103149244042819202888 - 9.31444426835983811501j,
    10 + 50j: -40.4002623504829710215 + 159.627372804728334948j,
    0.5: 0.572364942924700087072,
}

# mpmath.airyai(x), airyai(x, 1)
AIRY_REF = {
    0.0: (0.355028053887817239260, -0.258819403792806798405),
    -2.0: (0.227407428201685575992, 0.618259020741691041406),
    -5.5: (0.0177815412765749756030, 0.864197217771398390772),
    1.5: (0.0717494970081054096736, -0.0973820128423013192185),
    7.0: (7.4921288639971670807710e-07, -2.00815089473879199116931e-06),
    12.0: (1.3931846888753608390490e-13, -4.8547365549853084629937e-13),
    -12.0: (-0.0665551750543731294742, 1.02311045336797072990),
    -25.0: (0.163526578830429469486, 0.962378851387697410038),
}


def test_log_gamma_trivial():
    assert abs(log_gamma(1.0)) < 1e-14
    assert abs(log_gamma(5.0) - math.log(24)) < 1e-13


@pytest.mark.parametrize("z", list(LOGGAMMA_REF))
def test_log_gamma_frozen(z):
    assert abs(log_gamma(z) - LOGGAMMA_REF[z]) < 1e-12 * max(1, abs(LOGGAMMA_REF[z]))


def test_log_gamma_vectorized():
    zs = np.array(list(LOGGAMMA_REF), dtype=complex)
    got = log_gamma(zs)
    assert np.allclose(got, [LOGGAMMA_REF[z] for z in LOGGAMMA_REF], rtol=1e-12, atol=1e-12)


@settings(max_examples=200, deadline=None)
@given(st.floats(-30, 30), st.floats(-50, 50))
def test_reflection(re, im):
    z = complex(re, im)
    if abs(z - round(re)) <= 0.1 or abs(im) > 50:
        return
    # work in logs: |Gamma| can overflow at |Im z| = 50
    lhs = log_gamma(z) + log_gamma(1 - z) + np.log(np.sin(np.pi * z) / np.pi + 0j)
    k = round(lhs.imag / (2 * math.pi))
    assert abs(lhs - 2j * math.pi * k) < 1e-11 * max(1.0, abs(z))


@settings(max_examples=200, deadline=None)
@given(st.floats(-20, 40), st.floats(-60, 60))
def test_recurrence(re, im):
    z = complex(re, im)
    if abs(z - round(re)) < 1e-3 and round(re) <= 0:
        return
    d = log_gamma(z + 1) - log_gamma(z) - np.log(z)
    k = round(d.imag / (2 * math.pi))
    assert abs(d - 2j * math.pi * k) < 1e-12 * max(1.0, abs(log_gamma(z)))


def test_airy_closed_forms():
    ai, aip = airy_ai(0.0)
    assert ai == pytest.approx(3 ** (-2 / 3) / math.gamma(2 / 3), rel=1e-14)
    assert aip == pytest.approx(-(3 ** (-1 / 3)) / math.gamma(1 / 3), rel=1e-14)


@pytest.mark.parametrize("x", list(AIRY_REF))
def test_airy_frozen(x):
    ai, aip = airy_ai(x)
    rai, raip = AIRY_REF[x]
    assert abs(ai - rai) < 2e-14 + 1e-12 * abs(rai)
    assert abs(aip - raip) < 2e-14 + 1e-12 * abs(raip)


def test_airy_first_zero():
    assert abs(airy_ai(-2.338107410459767)[0]) < 1e-9


def test_airy_range():
    with pytest.raises(RangeError):
        airy_ai(31.0)


def test_airy_switch_is_continuous():
    for x in (-8.0, 8.0):
        h = 1e-6
        a, b = airy_ai(x - h), airy_ai(x + h)
        # second-order Taylor step across the switch, Ai'' = x Ai
        assert abs(a[0] + 2 * h * a[1] + 2 * h * h * x * a[0] - b[0]) < 1e-13
        assert abs(a[1] + 2 * h * x * a[0] + 2 * h * h * (a[0] + x * a[1]) - b[1]) < 1e-12


def test_weight_m1_closed_form():
    assert weight_w(WeightSpec(1, (0,), 0), 1.0) == pytest.approx(math.exp(-1), rel=1e-10)
    assert weight_w(WeightSpec(1, (2,), 1), 1.0) == pytest.approx(math.exp(-1), rel=1e-10)


@pytest.mark.parametrize("nu,k", [(0, 0), (1, 2), (3, 0)])
def test_weight_m1_grid(nu, k):
    for x in np.geomspace(1e-4, 50, 15):
        ref = x ** (nu + k) * math.exp(-x)
        assert weight_w(WeightSpec(1, (nu,), k), float(x)) == pytest.approx(ref, rel=1e-9)


# 2 K0(2 sqrt x), 2 sqrt(x) K1(2 sqrt x) and Meijer G values from mpmath
@pytest.mark.parametrize("spec,x,ref", [
    (WeightSpec(2, (0, 0)), 1.0, 0.227787745499066871305),
    (WeightSpec(2, (0, 0)), 3.0, 0.0408284473120759703057),
    (WeightSpec(2, (0, 0)), 0.01, 3.50540771105629179336),
    (WeightSpec(2, (0, 1)), 2.0, 0.139667474015293142858),
    (WeightSpec(3, (0, 0, 0)), 1.0, 0.164041606748376073151),
    (WeightSpec(3, (0, 2, 0), 1), 2.5, 0.204354484611274017692),
])
def test_weight_frozen(spec, x, ref):
    assert weight_w(spec, x) == pytest.approx(ref, rel=1e-9)


def test_mellin_moment_examples():
    assert mellin_moment(1, WeightSpec(1, (0,), 1)) == 2
    assert mellin_moment(0, WeightSpec(2, (0, 0), 0)) == 1
    assert mellin_moment(2, WeightSpec(1, (0,), 0)) == 2
    assert log_mellin_moment(3, WeightSpec(2, (1, 0), 1)) == pytest.approx(math.lgamma(6) + math.lgamma(4))


@pytest.mark.parametrize("spec", [WeightSpec(1, (1,), 2), WeightSpec(2, (0, 1), 0), WeightSpec(3, (0, 0, 1), 1)])
def test_mellin_moment_matches_quadrature(spec):
    # Gauss-Legendre in log x
    g, w = np.polynomial.legendre.leggauss(40)
    edges = np.linspace(-25.0, math.log(1e6), 61)
    for j in range(4):
        acc = 0.0
        for a, b in zip(edges[:-1], edges[1:]):
            v = 0.5 * (b - a) * g + 0.5 * (a + b)
            x = np.exp(v)
            f = np.array([weight_w(spec, float(t)) for t in x]) * x ** (j + 1)
            acc += 0.5 * (b - a) * float(np.sum(w * f))
        assert acc == pytest.approx(float(mellin_moment(j, spec)), rel=1e-6)
