"""Dielectric response models.

Each model is a frozen dataclass with an ``eps(omega, k)`` method (real
frequency) and, where an analytic continuation exists, ``eps_imag(xi, k)`` for
imaginary frequency omega = i*xi. Local models ignore k.
"""

from __future__ import annotations

import csv
import io
import math
import warnings
from dataclasses import dataclass, field
from typing import Union

import numpy as np

from .constants import ALPHA_FS, C


class DomainError(ValueError):
    """Model evaluated outside the region where it is defined or passive."""


class RangeError(ValueError):
    """Frequency outside a tabulated range."""


class FormatError(ValueError):
    """Malformed permittivity table."""


class PassivityError(ValueError):
    """Tabulated data with negative imaginary permittivity."""


class IndeterminateError(ArithmeticError):
    """Zero-frequency extrapolation failed to converge."""


def _check_omega(omega):
    omega = np.asarray(omega, dtype=float)
    if np.any(~(omega > 0)):
        raise DomainError("frequency must be > 0")
    return omega


def _out(x):
    x = np.asarray(x)
    return x[()] if x.ndim == 0 else x


@dataclass(frozen=True)
class Drude:
    omega_p: float
    gamma: float
    local = True

    def __post_init__(self):
        if not (self.omega_p > 0 and self.gamma > 0):
            raise ValueError("Drude model needs omega_p > 0 and gamma > 0")

    def eps(self, omega, k=0.0):
        omega = _check_omega(omega)
        return _out(1.0 - self.omega_p**2 / (omega * (omega + 1j * self.gamma)))

    def eps_imag(self, xi, k=0.0):
        xi = np.asarray(xi, dtype=float)
        return _out(1.0 + self.omega_p**2 / (xi * (xi + self.gamma)))

    def static_limit(self, k=0.0):
        """lim xi->0 of xi^2 (eps(i xi) - 1)."""
        return 0.0

    @property
    def scale(self):
        return self.omega_p**2


@dataclass(frozen=True)
class Plasma:
    omega_p: float
    local = True

    def __post_init__(self):
        if not self.omega_p > 0:
            raise ValueError("plasma model needs omega_p > 0")

    def eps(self, omega, k=0.0):
        omega = _check_omega(omega)
        return _out((1.0 - self.omega_p**2 / omega**2) + 0j)

    def eps_imag(self, xi, k=0.0):
        xi = np.asarray(xi, dtype=float)
        return _out(1.0 + self.omega_p**2 / xi**2)

    def static_limit(self, k=0.0):
        return self.omega_p**2

    @property
    def scale(self):
        return self.omega_p**2


@dataclass(frozen=True)
class NonlocalPhenom:
    """Drude response with a wave-vector dependent factor (1 + i v k / omega).

    Passive only for k < gamma / v; evaluation beyond raises DomainError.
    ``v = 0`` reduces to the Drude model.
    """

    omega_p: float
    gamma: float
    v: float
    local = False

    def __post_init__(self):
        if not (self.omega_p > 0 and self.gamma > 0 and self.v >= 0):
            raise ValueError("nonlocal model needs omega_p, gamma > 0 and v >= 0")

    @property
    def k_max(self):
        return math.inf if self.v == 0 else self.gamma / self.v

    def _check_k(self, k):
        k = np.asarray(k, dtype=float)
        if np.any(k < 0):
            raise DomainError("wave vector must be >= 0")
        if np.any(k >= self.k_max):
            raise DomainError(f"k must stay below gamma/v = {self.k_max:.6g} 1/m")
        return k

    def eps(self, omega, k=0.0):
        omega = _check_omega(omega)
        k = self._check_k(k)
        return _out(1.0 - self.omega_p**2 / (omega * (omega + 1j * self.gamma))
                    * (1.0 + 1j * self.v * k / omega))

    def eps_imag(self, xi, k=0.0):
        xi = np.asarray(xi, dtype=float)
        k = self._check_k(k)
        return _out(1.0 + self.omega_p**2 / (xi * (xi + self.gamma)) * (1.0 + self.v * k / xi))

    def static_limit(self, k=0.0):
        return self.omega_p**2 * self.v * k / self.gamma

    @property
    def scale(self):
        return self.omega_p**2


@dataclass(frozen=True)
class GrapheneTransverse:
    """Zero-temperature transverse permittivity of a Dirac-cone sheet.

    Below the branch point |omega| < v_F k the response is real with a double
    pole at omega = 0; above it is purely dissipative. The upper branch is
    taken as 1 + i(...) so that both branches meet at 1.
    """

    v_F: float = C / 300.0
    alpha_fs: float = ALPHA_FS
    local = False

    def __post_init__(self):
        if not 0 < self.v_F < C:
            raise ValueError("need 0 < v_F < c")

    def eps(self, omega, k=0.0):
        omega = np.asarray(omega, dtype=float)
        if np.any(omega == 0):
            raise DomainError("frequency must be nonzero")
        k = np.asarray(k, dtype=float)
        if np.any(k < 0):
            raise DomainError("wave vector must be >= 0")
        pref = math.pi * self.alpha_fs * k * C / (2.0 * omega**2)
        d = (self.v_F * k) ** 2 - omega**2
        below = 1.0 - pref * np.sqrt(np.maximum(d, 0.0))
        above = 1.0 + 1j * pref * np.sign(omega) * np.sqrt(np.maximum(-d, 0.0))
        return _out(np.where(np.abs(omega) < self.v_F * k, below + 0j, above))

    def eps_imag(self, xi, k=0.0):
        xi = np.asarray(xi, dtype=float)
        k = np.asarray(k, dtype=float)
        return _out(1.0 + math.pi * self.alpha_fs * k * C / (2.0 * xi**2)
                    * np.sqrt((self.v_F * k) ** 2 + xi**2))

    def static_limit(self, k=0.0):
        return math.pi * self.alpha_fs * C * self.v_F * k**2 / 2.0

    @property
    def scale(self):
        return self.alpha_fs * C * self.v_F


@dataclass(frozen=True)
class IdealMetal:
    """Perfect reflector: r_TM = +1, r_TE = -1 at every frequency."""

    local = True

    def eps(self, omega, k=0.0):
        omega = _check_omega(omega)
        return _out(np.full(np.shape(omega), complex(0.0, math.inf)))

    def eps_imag(self, xi, k=0.0):
        return _out(np.full(np.shape(xi), math.inf))

    def static_limit(self, k=0.0):
        return math.inf

    @property
    def scale(self):
        return 1.0


@dataclass(frozen=True)
class Tabulated:
    """Optical data interpolated linearly in log(omega), extrapolated below by a model."""

    omega: np.ndarray
    values: np.ndarray
    extrapolation: Union[Drude, Plasma]
    mismatch_rtol: float = 0.05
    local = True

    def __post_init__(self):
        w = np.asarray(self.omega, dtype=float)
        e = np.asarray(self.values, dtype=complex)
        if w.ndim != 1 or w.size < 2 or e.shape != w.shape:
            raise FormatError("need at least two (omega, eps) samples")
        if np.any(~(w > 0)) or np.any(np.diff(w) <= 0):
            raise FormatError("frequencies must be positive and strictly increasing")
        if np.any(e.imag < 0):
            raise PassivityError("Im eps must be >= 0 at every sample")
        if not isinstance(self.extrapolation, (Drude, Plasma)):
            raise TypeError("extrapolation must be a Drude or Plasma model")
        object.__setattr__(self, "omega", w)
        object.__setattr__(self, "values", e)
        if self.mismatch > self.mismatch_rtol:
            warnings.warn(f"extrapolation differs from the lowest sample by "
                          f"{self.mismatch:.3g} (relative)", stacklevel=3)

    @property
    def mismatch(self) -> float:
        """Relative jump between the extrapolation and the lowest tabulated sample."""
        e0 = self.values[0]
        return float(abs(self.extrapolation.eps(self.omega[0]) - e0) / abs(e0))

    @property
    def omega_p(self):
        return self.extrapolation.omega_p

    @property
    def scale(self):
        return self.extrapolation.scale

    def eps(self, omega, k=0.0):
        omega = _check_omega(omega)
        if np.any(omega > self.omega[-1]):
            raise RangeError(f"frequency above tabulated range (max {self.omega[-1]:.6g} rad/s)")
        lw = np.log(self.omega)
        x = np.log(omega)
        inside = np.interp(x, lw, self.values.real) + 1j * np.interp(x, lw, self.values.imag)
        below = omega < self.omega[0]
        if np.any(below):
            ext = self.extrapolation.eps(np.where(below, omega, self.omega[0]))
            inside = np.where(below, ext, inside)
        return _out(inside)

    def eps_imag(self, xi, k=0.0):
        raise DomainError("tabulated data has no closed-form continuation to imaginary frequency")

    def static_limit(self, k=0.0):
        return self.extrapolation.static_limit(k)


DielectricModel = Union[Drude, Plasma, NonlocalPhenom, GrapheneTransverse, Tabulated, IdealMetal]

COPPER = Drude(omega_p=1.12e16, gamma=1.38e13)
COPPER_PLASMA = Plasma(omega_p=1.12e16)


def is_local(model) -> bool:
    return bool(model.local)


def permittivity(model, omega, k=0.0):
    """Complex permittivity at real frequency omega (rad/s) and wave vector k (1/m)."""
    return model.eps(omega, k)


@dataclass(frozen=True)
class ZeroFrequencyClass:
    kind: str  # "vanishing" | "nonvanishing"
    limit: complex
    error: float = 0.0
    samples: int = field(default=0, compare=False)

    @property
    def vanishing(self) -> bool:
        return self.kind == "vanishing"


def _richardson(h, values, ratio):
    """Neville-style Richardson table for values at h, h*ratio, h*ratio^2, ... assuming a power series in h."""
    table = [list(values)]
    for m in range(1, len(values)):
        prev = table[-1]
        fac = ratio ** (-m)
        table.append([(fac * prev[i + 1] - prev[i]) / (fac - 1.0) for i in range(len(prev) - 1)])
    return table


def zero_frequency_class(model, k: float = 0.0, *, rtol: float = 1e-6, levels: int = 8,
                         omega_start: float | None = None) -> ZeroFrequencyClass:
    """Classify lim_{omega->0} omega^2 (eps(omega, k) - 1).

    The limit is estimated by Richardson extrapolation over omega_j =
    omega_start / 2^j. "vanishing" means |limit| < rtol * scale, with scale =
    omega_p^2 for the metal models.
    """
    if isinstance(model, IdealMetal):
        return ZeroFrequencyClass("nonvanishing", complex(math.inf), 0.0, 0)
    if isinstance(model, Tabulated):
        model = model.extrapolation
    if omega_start is None:
        if isinstance(model, GrapheneTransverse):
            if k <= 0:
                omega_start = 1.0
            else:
                omega_start = 1e-2 * model.v_F * k
        elif isinstance(model, Plasma):
            omega_start = 1e-2 * model.omega_p
        else:
            omega_start = 1e-2 * model.gamma
    ratio = 0.5
    omegas = omega_start * ratio ** np.arange(levels)
    g = [complex(w * w * (model.eps(w, k) - 1.0)) for w in omegas]
    table = _richardson(omega_start, g, ratio)
    diag = [col[-1] for col in table]
    limit = diag[-1]
    err = abs(diag[-1] - diag[-2])
    scale = model.scale
    if isinstance(model, GrapheneTransverse):
        scale = max(model.scale * k * k, 1e-300)
    if not np.isfinite(limit) or err > 1e-3 * max(abs(limit), rtol * scale):
        raise IndeterminateError(f"zero-frequency extrapolation did not converge (last change {err:.3g})")
    kind = "vanishing" if abs(limit) < rtol * scale else "nonvanishing"
    if kind == "vanishing":
        limit = 0j if abs(limit) < 1e-12 * scale else limit
    return ZeroFrequencyClass(kind, complex(limit), err, levels)


TABLE_HEADER = ("omega_rad_s", "re_eps", "im_eps")


def load_tabulated(source, extrapolation, *, mismatch_rtol: float = 0.05) -> Tabulated:
    """Read a permittivity table from CSV bytes, text, or a binary/text stream.

    Columns: omega_rad_s,re_eps,im_eps with one header row, rows ascending in
    frequency. Raises FormatError for empty, short, unsorted or malformed input
    and PassivityError for negative Im eps.
    """
    if hasattr(source, "read"):
        source = source.read()
    if isinstance(source, bytes):
        source = source.decode("utf-8")
    rows = [r for r in csv.reader(io.StringIO(source)) if r and any(x.strip() for x in r)]
    if not rows:
        raise FormatError("empty permittivity table")
    header = tuple(x.strip() for x in rows[0])
    if header != TABLE_HEADER:
        raise FormatError(f"expected header {','.join(TABLE_HEADER)}, got {','.join(header)}")
    data = rows[1:]
    if len(data) < 2:
        raise FormatError("need at least two data rows")
    try:
        arr = np.array([[float(x) for x in r] for r in data])
    except ValueError as exc:
        raise FormatError(f"non-numeric entry: {exc}") from None
    if arr.shape[1] != 3:
        raise FormatError("each row needs exactly three columns")
    if np.any(np.diff(arr[:, 0]) <= 0):
        raise FormatError("frequencies must be strictly increasing without duplicates")
    if np.any(arr[:, 2] < 0):
        raise PassivityError("negative Im eps in table")
    return Tabulated(arr[:, 0], arr[:, 1] + 1j * arr[:, 2], extrapolation, mismatch_rtol)
