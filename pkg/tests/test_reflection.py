import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, strategies as st

from casimir.constants import C
from casimir.models import COPPER, DomainError, Drude, GrapheneTransverse, IdealMetal, NonlocalPhenom, Plasma
from casimir.reflection import (ReflectionInput, branch_sqrt, flipped_branch, fresnel, perp_wavenumbers,
                                reflection_arrays)

WP, GAMMA = 1.12e16, 1.38e13
MODELS = [COPPER, Plasma(WP), NonlocalPhenom(WP, GAMMA, 1e6), GrapheneTransverse()]


def test_vacuum_degenerate():
    w = perp_wavenumbers(C * 1.0, 2.0, 1.0)
    assert w.q1 == w.q


def test_evanescent_vacuum():
    assert perp_wavenumbers(C * 1.0, 2.0, 1.0).q == pytest.approx(math.sqrt(3))


def test_propagating_vacuum():
    q = perp_wavenumbers(C * 2.0, 1.0, 2.0).q
    assert q.real == 0 and q.imag == pytest.approx(-math.sqrt(3))


def test_branch_on_cut():
    assert branch_sqrt(-4.0 + 0j) == -2j
    assert branch_sqrt(-4.0 - 0j) == -2j


def test_ideal_metal_limits():
    assert fresnel(ReflectionInput("TE", 1e10, 1.0), IdealMetal()) == -1
    assert fresnel(ReflectionInput("TM", 1e10, 1.0), IdealMetal()) == 1
    big = Drude(1e22, 1.0)
    w = 1e10
    assert abs(fresnel(ReflectionInput("TE", w, 1.0), big) + 1) < 1e-6
    assert abs(fresnel(ReflectionInput("TM", w, 1.0), big) - 1) < 1e-6


def test_drude_te_vanishes_at_low_frequency():
    assert abs(fresnel(ReflectionInput("TE", 1e-6 * GAMMA, 1e8), COPPER)) < 1e-6
    # |r_TE| ~ wp^2 w / (2 gamma c^2 k^2): linear in w
    r1 = abs(fresnel(ReflectionInput("TE", 1e-6 * GAMMA, 1e6), COPPER))
    r2 = abs(fresnel(ReflectionInput("TE", 1e-7 * GAMMA, 1e6), COPPER))
    assert r2 == pytest.approx(0.1 * r1, rel=1e-3)


def test_plasma_te_low_frequency_limit():
    r = fresnel(ReflectionInput("TE", 1.0, WP / C), Plasma(WP))
    assert r.real == pytest.approx((1 - math.sqrt(2)) / (1 + math.sqrt(2)), rel=1e-9)


def test_input_validation():
    with pytest.raises(ValueError):
        ReflectionInput("XY", 1.0, 1.0)
    with pytest.raises(ValueError):
        ReflectionInput("TE", 0.0, 1.0)
    with pytest.raises(ValueError):
        ReflectionInput("TE", 1.0, -1.0)
    assert ReflectionInput("TE", C, 0.5).sector == "propagating"
    assert ReflectionInput("TE", C, 2.0).sector == "evanescent"


def test_domain_error_propagates():
    m = NonlocalPhenom(WP, GAMMA, 1e6)
    with pytest.raises(DomainError):
        fresnel(ReflectionInput("TM", 1e14, 2 * m.k_max), m)


def _mp_fresnel(eps, w, k):
    """Independent high-precision Fresnel pair on the retarded branch.

    k^2 and (w/c)^2 are rounded to double first, as any double-precision
    caller forms them: on the light cone their difference decides whether q
    vanishes, and with |eps| ~ 1e11 that input rounding alone moves r_TM by 1e-3.
    """
    mpmath.mp.dps = 40
    eps = mpmath.mpc(eps.real, eps.imag)
    w2 = mpmath.mpf((w / C) ** 2)
    kk = mpmath.mpf(k * k)

    def root(z):
        s = mpmath.sqrt(z)
        return -s if (s.real == 0 and s.imag > 0) or s.real < 0 else s

    q, q1 = root(kk - w2), root(kk - eps * w2)
    return complex((eps * q - q1) / (eps * q + q1)), complex((q - q1) / (q + q1))


@given(st.floats(1e8, 1e17), st.floats(0.0, 5.0))
def test_fresnel_against_mpmath(w, s):
    k = s * w / C
    eps = complex(COPPER.eps(w))
    tm, te = reflection_arrays(COPPER, np.array([w]), np.array([k]))
    tm_ref, te_ref = _mp_fresnel(eps, w, k)
    assert abs(te[0] - te_ref) <= 1e-9 * max(1, abs(te_ref))
    assert abs(tm[0] - tm_ref) <= 1e-9 * max(1, abs(tm_ref))


@given(st.sampled_from(MODELS), st.floats(1e4, 1e17), st.floats(0.0, 1e3))
def test_te_passivity(model, w, s):
    k = s * w / C
    if isinstance(model, NonlocalPhenom):
        k = min(k, 0.999 * model.k_max)
    assert abs(fresnel(ReflectionInput("TE", w, k), model)) <= 1 + 1e-12


@given(st.floats(1e4, 1.1e16), st.floats(1.0 + 1e-9, 1e3))
def test_plasma_evanescent_reality(w, s):
    k = s * w / C
    tm, te = reflection_arrays(Plasma(WP), np.array([w]), np.array([k]))
    assert abs(tm[0].imag) < 1e-15 * max(1, abs(tm[0])) and abs(te[0].imag) < 1e-15


@given(st.floats(1e14, 1e15), st.floats(0.0, 3.0))
def test_drude_to_plasma_convergence(w, s):
    k = s * w / C
    d = reflection_arrays(Drude(WP, WP * 1e-9), w, k)
    p = reflection_arrays(Plasma(WP), w, k)
    for rd, rp in zip(d, p):
        assert abs(rd - rp) <= 1e-6 * max(1, abs(rp))


@given(st.sampled_from(MODELS), st.floats(1e8, 1e16))
def test_light_cone_continuity(model, w):
    """The jump across k = w/c shrinks like sqrt(delta), the size of a continuous change."""
    kl = w / C
    if isinstance(model, NonlocalPhenom) and kl >= model.k_max:
        return
    mag = max(1.0, abs(model.eps(w, kl)))
    jumps = []
    for delta in (1e-6 / mag, 1e-8 / mag):
        if delta < 1e-12:
            return
        lo = reflection_arrays(model, w, kl * (1 - delta))
        hi = reflection_arrays(model, w, kl * (1 + delta))
        jumps.append(max(abs(a - b) for a, b in zip(lo, hi)))
    assert jumps[1] <= 0.2 * jumps[0] + 1e-12


def test_flipped_branch_hook_changes_q_and_restores():
    q = perp_wavenumbers(1e15, 1e6, COPPER.eps(1e15)).q1
    with flipped_branch():
        assert perp_wavenumbers(1e15, 1e6, COPPER.eps(1e15)).q1 == -q
    assert perp_wavenumbers(1e15, 1e6, COPPER.eps(1e15)).q1 == q
