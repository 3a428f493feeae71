import math

import numpy as np
import pytest
from scipy import integrate, special

from casimir.constants import C, MU0
from casimir.dipole import (DEFAULT_METAL, DipoleConfig, field_sweep, ideal_metal_field, lateral_field,
                            lateral_field_direct, skin_depth)
from casimir.models import COPPER, COPPER_PLASMA, IdealMetal

CFG = DipoleConfig()


def test_config_validation():
    with pytest.raises(ValueError):
        DipoleConfig(h=0)
    with pytest.raises(ValueError):
        DipoleConfig(units="gauss")
    assert DipoleConfig(units="si").prefactor == pytest.approx(CFG.m0 * MU0 / (4 * math.pi))


def test_ideal_metal_spot_value():
    assert ideal_metal_field(CFG, 0.05) == pytest.approx(-8.60, abs=0.005)
    r = lateral_field(IdealMetal(), CFG, 0.05)
    assert r.converged
    assert r.value.real == pytest.approx(ideal_metal_field(CFG, 0.05), rel=1e-8)


@pytest.mark.parametrize("x", np.geomspace(0.01, 0.3, 7))
def test_ideal_metal_closed_form(x):
    r = lateral_field(IdealMetal(), CFG, float(x))
    assert abs(r.value - ideal_metal_field(CFG, float(x))) <= 1e-8 * abs(ideal_metal_field(CFG, float(x)))


@pytest.mark.parametrize("model", [COPPER, COPPER_PLASMA])
@pytest.mark.parametrize("x", [0.01, 0.05, 0.1])
def test_quadrature_routes_agree(model, x):
    lobe = lateral_field(model, CFG, x)
    brute = lateral_field_direct(model, CFG, x)
    assert abs(lobe.value - brute.value) <= lobe.abs_error + brute.abs_error + 1e-9 * abs(brute.value)


def test_against_scipy_oracle():
    """Drude field with the reflection coefficient written out independently."""
    x, w = 0.05, CFG.omega
    eps = 1 - COPPER.omega_p**2 / (w * (w + 1j * COPPER.gamma))

    def f(k, part):
        q = math.sqrt(max(k * k - (w / C) ** 2, 0.0))
        q1 = np.sqrt(k * k - eps * (w / C) ** 2 + 0j)
        r = (q - q1) / (q + q1)
        v = k * k * special.j1(k * x) * r * math.exp(-2 * CFG.h * q)
        return v.real if part == 0 else v.imag

    pts = [j / x for j in special.jn_zeros(1, 40) if j / x < 1500]
    re = integrate.quad(f, w / C, 1500, args=(0,), points=pts, limit=500, epsabs=1e-12)[0]
    im = integrate.quad(f, w / C, 1500, args=(1,), points=pts, limit=500, epsabs=1e-12)[0]
    got = lateral_field(COPPER, CFG, x).value / CFG.m0
    assert abs(got - (re + 1j * im)) < 1e-7 * abs(got)


def test_plasma_is_real():
    r = lateral_field(COPPER_PLASMA, CFG, 0.04)
    assert r.value.imag == 0


def test_plasma_frequency_independent():
    a = lateral_field(COPPER_PLASMA, DipoleConfig(omega=2 * math.pi * 15), 0.05).value
    b = lateral_field(COPPER_PLASMA, CFG, 0.05).value
    assert abs(a - b) < 1e-5 * abs(b)


def test_drude_weaker_at_lower_frequency():
    vals = [abs(lateral_field(COPPER, DipoleConfig(omega=2 * math.pi * f), 0.05).value) for f in (5, 15, 25)]
    assert vals[0] < vals[1] < vals[2]


def test_skin_depth_below_twice_height():
    for f in (15, 25):
        d = skin_depth(COPPER, 2 * math.pi * f)
        assert 0.01 < d < 2 * CFG.h
    assert skin_depth(COPPER, 2 * math.pi * 15) > skin_depth(COPPER, 2 * math.pi * 25)


def test_sweep_singleton_matches_point():
    row = field_sweep(COPPER, CFG, [0.03])[0]
    v = lateral_field(COPPER, CFG, 0.03).value
    assert (row.re, row.im) == (v.real, v.imag)


def test_sweep_validation():
    with pytest.raises(ValueError):
        field_sweep(COPPER, CFG, [0.05, 0.01])
    with pytest.raises(ValueError):
        field_sweep(COPPER, CFG, [])
    with pytest.raises(ValueError):
        lateral_field(COPPER, CFG, 0.0)


def test_default_metal_is_copper():
    assert DEFAULT_METAL == COPPER
