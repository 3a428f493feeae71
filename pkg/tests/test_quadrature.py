import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from casimir.quadrature import OscillationSpec, QuadratureResult, integrate_adaptive, integrate_batch, \
    integrate_oscillatory, wynn_epsilon
from casimir.special import bessel_j1

LAPLACE_J1 = 6.0 / 5.0**2.5  # int_0^inf t^2 e^{-2t} J1(t) dt = 3bc/(b^2+c^2)^{5/2}, b=1, c=2


def test_exponential():
    r = integrate_adaptive(lambda t: np.exp(-t), 0.0, math.inf, 1e-10, decay_scale=1.0)
    assert r.converged and r.value == pytest.approx(1.0, rel=1e-12)


def test_endpoint_singularity():
    r = integrate_adaptive(lambda t: t**-0.5, 0.0, 1.0, 1e-10, endpoint="left")
    assert r.converged and r.value == pytest.approx(2.0, rel=1e-12)


def test_laplace_bessel_both_integrators():
    a = integrate_adaptive(lambda t: t * t * np.exp(-2 * t) * bessel_j1(t), 0.0, math.inf, 1e-10, decay_scale=0.5)
    o = integrate_oscillatory(lambda t: t * t * np.exp(-2 * t), OscillationSpec("bessel_j1", 1.0, decay_scale=0.5),
                              0.0, 1e-10)
    assert a.value == pytest.approx(LAPLACE_J1, abs=1e-10)
    assert o.value == pytest.approx(LAPLACE_J1, abs=1e-10)
    assert abs(a.value - o.value) <= a.abs_error + o.abs_error + 1e-15


def test_weber_integral():
    r = integrate_oscillatory(lambda t: np.ones_like(t), OscillationSpec("bessel_j1", 1.0), 0.0, 1e-8)
    assert r.converged and r.value == pytest.approx(1.0, abs=1e-8)
    assert r.acceleration_order > 0


def test_zero_envelope():
    r = integrate_oscillatory(lambda t: 0.0 * t, OscillationSpec("bessel_j1", 2.0), 0.0, 1e-8)
    assert r.value == 0.0 and r.abs_error == 0.0


def test_complex_exponential():
    r = integrate_oscillatory(lambda t: np.exp(-t), OscillationSpec("complex_exponential", 3.0, decay_scale=1.0),
                              0.0, 1e-10)
    assert abs(r.value - 1.0 / (1.0 - 3.0j)) < 1e-12


def test_complex_integrand_shares_subdivision():
    r = integrate_adaptive(lambda t: np.exp(1j * t), 0.0, math.pi, 1e-12)
    assert abs(r.value - 2j) < 1e-12


def test_oscillatory_rejects_none():
    with pytest.raises(ValueError):
        integrate_oscillatory(np.exp, OscillationSpec("none"), 0.0)


def test_spec_validation():
    with pytest.raises(ValueError):
        OscillationSpec("sine", 1.0)
    with pytest.raises(ValueError):
        OscillationSpec("bessel_j1", 0.0)
    with pytest.raises(ValueError):
        QuadratureResult(1.0, -1.0, 1, True)


def test_exhausted_subdivision_is_flagged_not_raised():
    r = integrate_adaptive(lambda t: np.sin(1.0 / t), 1e-6, 1.0, 1e-14, limit=5)
    assert not r.converged


def test_batch_matches_scalar():
    breaks = np.array([[0.0, 1.0], [0.0, 2.0], [1.0, 3.0]])
    r = integrate_batch(lambda idx, t: (idx + 1) * t**2, breaks, rel_tol=1e-13)
    exact = np.array([1 / 3, 2 * 8 / 3, 3 * 26 / 3])
    assert np.allclose(r.values, exact, rtol=1e-13) and r.converged.all()


def test_wynn_accelerates_alternating_series():
    partial = np.cumsum([(-1.0) ** n / (n + 1) for n in range(20)])
    value, err, _ = wynn_epsilon(partial)
    assert abs(value - math.log(2)) < 1e-10
    assert err >= 0


@given(st.floats(0.5, 5.0), st.integers(0, 4), st.floats(1e-10, 1e-4))
def test_converged_result_is_honest(s, n, tol):
    exact = math.factorial(n) / s ** (n + 1)
    r = integrate_adaptive(lambda x: x**n * np.exp(-s * x), 0.0, math.inf, tol, decay_scale=1.0 / s)
    assert r.converged
    assert r.abs_error <= tol * abs(r.value) * (1 + 1e-12)
    assert abs(r.value - exact) <= 10 * r.abs_error + 1e-15 * exact


@given(st.floats(1.0, 60.0), st.floats(0.0, 6.28), st.floats(1.0, 5.0))
def test_tolerance_monotonicity(kap, phi, L):
    errs = [integrate_adaptive(lambda x: np.cos(kap * x + phi), 0.0, L, tol).abs_error
            for tol in (1e-4, 1e-6, 1e-8, 1e-10)]
    assert all(b <= a for a, b in zip(errs, errs[1:]))
