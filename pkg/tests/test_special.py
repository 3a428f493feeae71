import math

import mpmath
import numpy as np
import pytest
import scipy.special as sp
from hypothesis import given, strategies as st

from casimir.special import bessel_j0, bessel_j1, bessel_j2, coth_half, j1_zeros


def test_j1_spot_values():
    assert bessel_j1(0.0) == 0.0
    assert bessel_j1(1.8411837813406593) == pytest.approx(0.5818652242815966, abs=1e-12)
    assert abs(bessel_j1(3.8317059702075123)) < 1e-12


@pytest.mark.parametrize("fn, ref", [(bessel_j0, sp.j0), (bessel_j1, sp.j1), (bessel_j2, lambda t: sp.jv(2, t))])
def test_bessel_against_scipy(fn, ref):
    t = np.concatenate([np.linspace(0, 40, 4001), np.geomspace(40, 1e6, 2000)])
    assert np.max(np.abs(fn(t) - ref(t))) < 1e-10


def test_j1_against_mpmath_high_precision():
    for t in (0.3, 7.9, 8.1, 24.9, 25.1, 333.3, 9.87e5):
        assert abs(bessel_j1(t) - float(mpmath.besselj(1, t))) < 1e-12


def test_j1_odd():
    t = np.linspace(0.1, 100, 50)
    assert np.array_equal(bessel_j1(-t), -bessel_j1(t))


def test_j1_zeros_match_scipy():
    z = j1_zeros(1, 200)
    assert np.max(np.abs(z - sp.jn_zeros(1, 200))) < 1e-11


@given(st.floats(1e-3, 1e5))
def test_recurrence_identity(t):
    assert abs(bessel_j0(t) + bessel_j2(t) - 2.0 / t * bessel_j1(t)) <= 1e-9


def test_coth_half_spot_values():
    assert coth_half(10.0) == pytest.approx(1.000000004122307, rel=1e-14)
    assert coth_half(1.0) == pytest.approx(1.3130352854993312, rel=1e-13)
    assert abs(1e-8 * coth_half(1e-8) - 1.0) < 1e-10


@given(st.floats(1e-12, 700))
def test_coth_half_against_mpmath(x):
    assert coth_half(x) == pytest.approx(float(mpmath.coth(x)), rel=1e-13)


def test_coth_half_large_argument_is_one():
    assert coth_half(1e4) == 1.0


@pytest.mark.parametrize("x", [0.0, -1.0, math.nan])
def test_coth_half_domain(x):
    with pytest.raises(ValueError):
        coth_half(x)
