"""Perpendicular wavenumbers and Fresnel reflection coefficients of a half-space.

Branch convention (used everywhere in the package): the square root is taken
with Re >= 0, and on the cut (negative real argument) the root with Im <= 0.
For a passive medium this is the retarded root, it is continuous as
Im eps -> 0+, and it makes q = -i*sqrt(omega^2/c^2 - k^2) for propagating
waves. Nonlocal models use the same formulas with eps(omega, k) substituted.
"""

from __future__ import annotations

import contextlib
from dataclasses import dataclass

import numpy as np

from .constants import C
from .models import IdealMetal

_FLIP = False


@contextlib.contextmanager
def flipped_branch():
    """Testing hook: use the opposite root for q1 inside the block."""
    global _FLIP
    old = _FLIP
    _FLIP = True
    try:
        yield
    finally:
        _FLIP = old


def branch_sqrt(z):
    """sqrt(z) with Re >= 0 and, for Re == 0, Im <= 0."""
    s = np.sqrt(np.asarray(z, dtype=complex))
    s = np.where((s.real == 0) & (s.imag > 0), -s, s)
    if _FLIP:
        s = -s
    return s[()] if s.ndim == 0 else s


@dataclass(frozen=True)
class PerpWavenumbers:
    q: complex
    q1: complex


def perp_wavenumbers(omega, k, eps) -> PerpWavenumbers:
    """q = branch(k^2 - omega^2/c^2) and q1 = branch(k^2 - eps omega^2/c^2)."""
    omega = np.asarray(omega, dtype=float)
    k = np.asarray(k, dtype=float)
    w2 = (omega / C) ** 2
    k2 = k * k
    q = branch_sqrt(k2 - w2)
    q1 = branch_sqrt(k2 - eps * w2)
    if np.ndim(eps) == 0 and eps == 1:
        q1 = q
    return PerpWavenumbers(q, q1)


def r_te(q, q1):
    return (q - q1) / (q + q1)


def r_tm(eps, q, q1):
    return (eps * q - q1) / (eps * q + q1)


@dataclass(frozen=True)
class ReflectionInput:
    polarization: str  # "TM" | "TE"
    omega: float
    k: float

    def __post_init__(self):
        if self.polarization not in ("TM", "TE"):
            raise ValueError("polarization must be 'TM' or 'TE'")
        if not self.omega > 0:
            raise ValueError("omega must be > 0")
        if not self.k >= 0:
            raise ValueError("k must be >= 0")

    @property
    def sector(self) -> str:
        return "propagating" if self.k <= self.omega / C else "evanescent"


def fresnel(inp: ReflectionInput, model) -> complex:
    """Reflection coefficient r_TM or r_TE of a half-space of ``model``."""
    if isinstance(model, IdealMetal):
        return 1.0 + 0j if inp.polarization == "TM" else -1.0 + 0j
    eps = complex(model.eps(inp.omega, inp.k))
    w = perp_wavenumbers(inp.omega, inp.k, eps)
    if inp.polarization == "TE":
        return complex(r_te(w.q, w.q1))
    return complex(r_tm(eps, w.q, w.q1))


def reflection_arrays(model, omega, k):
    """Vectorised (r_TM, r_TE) for array arguments of matching shape."""
    omega = np.asarray(omega, dtype=float)
    k = np.asarray(k, dtype=float)
    if isinstance(model, IdealMetal):
        one = np.ones(np.broadcast(omega, k).shape, dtype=complex)
        return one, -one
    eps = np.asarray(model.eps(omega, k), dtype=complex)
    w2 = (omega / C) ** 2
    q = branch_sqrt(k * k - w2)
    q1 = branch_sqrt(k * k - eps * w2)
    return r_tm(eps, q, q1), r_te(q, q1)
