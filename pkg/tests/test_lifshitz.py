import math

import numpy as np
import pytest
from scipy import integrate

from casimir.constants import C, HBAR
from casimir.lifshitz import (Geometry, cavity_resonances, classical_limit, ideal_pressure, inner_integrals,
                              pressure_breakdown, pressure_matsubara, pressure_sector)
from casimir.models import COPPER, COPPER_PLASMA, DomainError, GrapheneTransverse, IdealMetal, Tabulated

WP, GAMMA = 1.12e16, 1.38e13


def _x_oracle(eps, w, q, a, pol):
    """r^2 e / (1 - r^2 e) written out directly; q on the retarded branch."""
    q1 = np.sqrt(q * q + (1 - eps) * (w / C) ** 2)
    if q1.real < 0:
        q1 = -q1
    r = (q - q1) / (q + q1) if pol == "TE" else (eps * q - q1) / (eps * q + q1)
    x = r * r * np.exp(-2 * a * q)
    return x / (1 - x)


@pytest.mark.parametrize("pol", ["TM", "TE"])
@pytest.mark.parametrize("w", [1e14, 1e15])
def test_inner_integrals_against_scipy(pol, w):
    a = 1e-6
    eps = complex(COPPER.eps(w))
    evan_ref, _ = integrate.quad(lambda q: q * q * _x_oracle(eps, w, q + 0j, a, pol).imag, 0, 40 / a,
                                 limit=400, epsabs=0, epsrel=1e-11)
    # propagating part in k_z: q = -i k_z, k dk = -k_z dk_z
    prop_ref, _ = integrate.quad(lambda kz: -(kz * kz * _x_oracle(eps, w, -1j * kz, a, pol)).real, 0, w / C,
                                 limit=400, epsabs=0, epsrel=1e-11)
    evan, *_ = inner_integrals(COPPER, pol, "evan", np.array([w]), a, abs_tol=0.0, rel_tol=1e-12)
    line, *_ = inner_integrals(COPPER, pol, "line", np.array([w]), a, abs_tol=0.0, rel_tol=1e-12)
    scale = abs(evan_ref) + abs(prop_ref)
    assert abs(evan[0] - evan_ref) <= 1e-8 * scale
    assert abs(line[0] - evan[0] - prop_ref) <= 1e-8 * scale


def test_geometry_validation():
    with pytest.raises(ValueError):
        Geometry(0.0, 300)
    with pytest.raises(ValueError):
        Geometry(1e-6, 0.0)


def test_ideal_pressure_value():
    assert ideal_pressure(1e-6) == pytest.approx(-1.300e-3, rel=1e-3)
    assert ideal_pressure(1e-6) == pytest.approx(-math.pi**2 * HBAR * C / (240 * 1e-24), rel=1e-14)


def test_classical_limit_values():
    g = Geometry(5e-6, 300)
    assert classical_limit("drude", g) == pytest.approx(-1.585e-6, rel=1e-3)
    assert classical_limit("plasma", g) == pytest.approx(-3.170e-6, rel=1e-3)
    assert classical_limit("plasma", g) / classical_limit("drude", g) == 2.0
    with pytest.raises(ValueError):
        classical_limit("graphene", g)


def test_matsubara_zero_term_structure():
    g = Geometry(5e-6, 300)
    _, drude = pressure_matsubara(COPPER, g, 1e-8, return_terms=True)
    _, plasma = pressure_matsubara(COPPER_PLASMA, g, 1e-8, return_terms=True)
    # Drude l=0: TE drops out, TM (r=1) gives exactly the classical value
    assert drude[0] == pytest.approx(classical_limit("drude", g), rel=1e-9)
    # plasma l=0 keeps a finite TE term
    assert abs(plasma[0]) > abs(drude[0]) * 1.5


def test_matsubara_ideal_metal_zero_temperature():
    r = pressure_matsubara(IdealMetal(), Geometry(1e-6, 1.0), 1e-6)
    assert r.converged
    assert r.value == pytest.approx(ideal_pressure(1e-6), rel=5e-3)


def test_matsubara_rejects_models_without_continuation():
    with pytest.raises(DomainError):
        pressure_matsubara(GrapheneTransverse(), Geometry(1e-6, 300))


def test_real_axis_rejects_tabulated_and_nonmetals():
    t = Tabulated(np.array([1e14, 1e15]), COPPER.eps(np.array([1e14, 1e15])), COPPER)
    for m in (t, GrapheneTransverse(), IdealMetal()):
        with pytest.raises(DomainError):
            pressure_breakdown(m, Geometry(1e-6, 300), 1e-3)


@pytest.fixture(scope="module")
def plasma_1um():
    return pressure_breakdown(COPPER_PLASMA, Geometry(1e-6, 300), 1e-4)


@pytest.fixture(scope="module")
def drude_1um():
    return pressure_breakdown(COPPER, Geometry(1e-6, 300), 1e-4)


def test_plasma_breakdown_structure(plasma_1um):
    b = plasma_1um
    assert b.converged
    assert b.tm_evan.value == 0 and b.te_evan.value == 0
    assert b.total == b.tm_prop.value + b.te_prop.value
    assert b.total_error == pytest.approx(math.hypot(b.tm_prop.abs_error, b.te_prop.abs_error), rel=1e-12)


def test_drude_te_evanescent_is_repulsive(drude_1um):
    assert drude_1um.te_evan.value > 0 > drude_1um.te_prop.value


def test_tm_nearly_equal_te_different(drude_1um, plasma_1um):
    tm = abs(drude_1um.p_tm - plasma_1um.p_tm) / abs(plasma_1um.p_tm)
    te = abs(drude_1um.p_te - plasma_1um.p_te) / abs(plasma_1um.p_te)
    assert tm < 0.02 and tm < te


def test_real_axis_matches_matsubara(drude_1um):
    ref = pressure_matsubara(COPPER, Geometry(1e-6, 300), 1e-6)
    assert abs(drude_1um.total - ref.value) <= 1e-3 * abs(ref.value)


def test_tightening_tolerance_stays_within_error_bar():
    g = Geometry(2e-6, 300)
    loose = pressure_breakdown(COPPER, g, 1e-3)
    tight = pressure_breakdown(COPPER, g, 1e-4)
    for name in ("tm_prop", "te_prop", "tm_evan", "te_evan"):
        lo, ti = getattr(loose, name), getattr(tight, name)
        assert abs(lo.value - ti.value) <= lo.abs_error + ti.abs_error


def test_attraction_decays_with_separation(plasma_1um):
    far = pressure_breakdown(COPPER_PLASMA, Geometry(2e-6, 300), 1e-4)
    assert abs(far.total) < abs(plasma_1um.total)


def test_sector_matches_breakdown(drude_1um):
    s = pressure_sector("TE", "evan", COPPER, Geometry(1e-6, 300), 1e-4)
    assert s.value == pytest.approx(drude_1um.te_evan.value, rel=1e-12)
    with pytest.raises(ValueError):
        pressure_sector("TX", "evan", COPPER, Geometry(1e-6, 300))


def test_cavity_resonances_ideal_spacing():
    a = 1e-6
    res = cavity_resonances(COPPER_PLASMA, a, 1e13, 2e15)
    # the field penetrates each plasma mirror by c / wp, lengthening the cavity
    assert np.allclose(np.diff(res), math.pi * C / (a + 2 * C / WP), rtol=1e-3)
