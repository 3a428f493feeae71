"""Lateral magnetic field of an oscillating vertical dipole above a metal half-space.

    B_x(x) = m0 * int_{omega/c}^inf dk k^2 J1(k x) r_TE(omega, k) exp(-2 h q),
    q = sqrt(k^2 - omega^2/c^2)

in "raw" units (A/m: m0 times the integral as written). "si" multiplies by mu0/4pi
to give tesla. Only the reflected field is included; the direct dipole field
is model independent.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .constants import C, MU0
from .models import COPPER
from .quadrature import OscillationSpec, QuadratureResult, integrate_adaptive, integrate_oscillatory
from .reflection import reflection_arrays
from .special import bessel_j1

UNITS = ("raw", "si")
J1_MAX = 0.5818652242815966  # max |J1| on the real line


@dataclass(frozen=True)
class DipoleConfig:
    m0: float = 2.776e-3  # dipole amplitude, A m^2
    h: float = 0.03  # height above the surface, m
    omega: float = 2 * math.pi * 25.0  # rad/s
    units: str = "raw"

    def __post_init__(self):
        if not (self.m0 > 0 and self.h > 0 and self.omega > 0):
            raise ValueError("m0, h and omega must all be > 0")
        if self.units not in UNITS:
            raise ValueError(f"units must be one of {UNITS}")

    @property
    def prefactor(self) -> float:
        return self.m0 * (MU0 / (4 * math.pi) if self.units == "si" else 1.0)


def _envelope(model, cfg: DipoleConfig):
    """k^2 r_TE exp(-2 h q) on k >= omega/c."""
    w2 = (cfg.omega / C) ** 2

    def f(k):
        k = np.asarray(k, dtype=float)
        q = np.sqrt(np.maximum(k * k - w2, 0.0))
        _, rte = reflection_arrays(model, np.full_like(k, cfg.omega), k)
        return k * k * rte * np.exp(-2.0 * cfg.h * q)

    return f


def ideal_metal_field(cfg: DipoleConfig, x: float) -> float:
    """Closed form for r_TE = -1 with the lower limit taken as 0."""
    b = 2.0 * cfg.h
    return -cfg.prefactor * 3.0 * x * b / (x * x + b * b) ** 2.5


def lateral_field(model, cfg: DipoleConfig, x: float, tol: float = 1e-10) -> QuadratureResult:
    """B_x at lateral distance x by lobe summation between zeros of J1(k x)."""
    if not x > 0:
        raise ValueError("x must be > 0")
    env = _envelope(model, cfg)
    osc = OscillationSpec("bessel_j1", x, decay_scale=2.0 * cfg.h)
    res = integrate_oscillatory(env, osc, cfg.omega / C, tol)
    value = complex(res.value) * cfg.prefactor
    return QuadratureResult(value, res.abs_error * cfg.prefactor, res.evaluations, res.converged,
                            res.subdivisions, res.acceleration_order, res.message)


def lateral_field_direct(model, cfg: DipoleConfig, x: float, tol: float = 1e-10,
                         k_cut: float | None = None) -> QuadratureResult:
    """Brute-force check: adaptive quadrature on [omega/c, 60/h] plus a bound on the rest.

    With |r_TE| <= 1 and |J1| <= 0.582 the remainder is at most
    0.582 * int_K^inf k^2 exp(-2 h k) dk (q ~ k there).
    """
    k_max = 60.0 / cfg.h if k_cut is None else k_cut
    env = _envelope(model, cfg)

    def f(k):
        return env(k) * bessel_j1(k * x)

    breaks = [z for z in np.arange(1, int(k_max * x / math.pi) + 2) * math.pi / x if z < k_max]
    res = integrate_adaptive(f, cfg.omega / C, k_max, tol, breakpoints=breaks[:2000], limit=20000)
    b = 2.0 * cfg.h
    tail = J1_MAX * math.exp(-b * k_max) * (k_max**2 / b + 2 * k_max / b**2 + 2 / b**3)
    value = complex(res.value) * cfg.prefactor
    return QuadratureResult(value, (res.abs_error + tail) * cfg.prefactor, res.evaluations, res.converged,
                            res.subdivisions, 0, res.message)


@dataclass(frozen=True)
class FieldRow:
    x: float
    re: float
    im: float
    abs_error: float
    converged: bool


def field_sweep(model, cfg: DipoleConfig, xs: Sequence[float], tol: float = 1e-10) -> list[FieldRow]:
    xs = np.asarray(xs, dtype=float)
    if xs.ndim != 1 or xs.size == 0 or np.any(xs <= 0) or np.any(np.diff(xs) <= 0):
        raise ValueError("xs must be a non-empty, strictly increasing grid of positive values")
    rows = []
    for x in xs:
        r = lateral_field(model, cfg, float(x), tol)
        v = complex(r.value)
        rows.append(FieldRow(float(x), v.real, v.imag, r.abs_error, r.converged))
    return rows


def skin_depth(model, omega: float) -> float:
    """1 / Im k_metal at normal incidence, k_metal = sqrt(eps) omega / c."""
    eps = complex(model.eps(omega))
    return 1.0 / abs((np.sqrt(eps) * omega / C).imag)


DEFAULT_METAL = COPPER
