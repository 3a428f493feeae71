"""Casimir pressure between two identical half-spaces.

Real-frequency representation
-----------------------------
    P = -(hbar / 2 pi^2) int_0^inf d omega coth(hbar omega / 2 k_B T) G(omega)

split into propagating (k <= omega/c) and evanescent (k > omega/c) parts of
the inner integral G, separately for TM and TE. With q the perpendicular
vacuum wavenumber and X = r^2 e^{-2aq} / (1 - r^2 e^{-2aq}):

    G_evan(omega) = int_0^inf dq q^2 Im X(q)                      (q real)
    G_prop(omega) = int_0^{omega/c} dk_z k_z^2 Re[-X(q = -i k_z)]

The propagating integrand has a comb of near-poles (cavity resonances) on
the real k_z axis. Because X is analytic in the strip between the
propagating segment q in [-i omega/c, 0] and the shifted line
q = y - i omega/c (y >= 0), Cauchy's theorem gives

    G_prop + G_evan = int_0^inf dy Im[q^2 X(q)],   q = y - i omega/c,

whose integrand is smooth and exponentially decaying. We compute the
evanescent part on the real q axis and the propagating part as the
difference; ``propagating_inner_direct`` evaluates the original k_z
integral for cross-checking.

For a lossless model (plasma) X is real on the real q axis, so every
evanescent quadrature node returns exactly zero; the real cavity poles on the
propagating segment are resolved by the retarded prescription implicit in the
contour shift.

For dissipative models the evanescent integrand decays only like 1/omega far
above the plasma frequency (grazing-incidence absorption), so each sector on
its own is logarithmically divergent while their sum converges. The
evanescent sectors are therefore integrated up to ``omega_cut`` (default
10 omega_p) and the convergent remainder of the per-polarisation total above
that frequency is booked to the propagating sector.

Outer integral: [omega_lo, omega_sw] in log omega (the coth weight is
2 k_B T / hbar omega there), [omega_sw, 2 omega_p] with breakpoints at the
cavity resonances, where G jumps, and above 2 omega_p the contour is rotated to
omega = 2 omega_p + i xi. Along that ray exp(2 i a omega / c) decays instead
of oscillating; this needs the analytic continuation of eps, so only the
closed-form Drude and plasma models are accepted here.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.optimize import brentq

from .constants import C, HBAR, K_B, ZETA3, matsubara_frequency
from .models import DomainError, Drude, IdealMetal, Plasma, Tabulated
from .quadrature import QuadratureResult, integrate_adaptive, integrate_batch
from .reflection import branch_sqrt
from .special import coth_half

POLARIZATIONS = ("TM", "TE")
SECTORS = ("prop", "evan")
DEFAULT_TOL = 1e-4
PREFACTOR = HBAR / (2.0 * math.pi**2)


@dataclass(frozen=True)
class Geometry:
    a: float  # plate separation, m
    T: float  # temperature, K

    def __post_init__(self):
        if not self.a > 0:
            raise ValueError("separation a must be > 0")
        if not self.T > 0:
            raise ValueError("temperature T must be > 0")


def ideal_pressure(a: float) -> float:
    """Zero-temperature pressure between perfect mirrors, -pi^2 hbar c / (240 a^4)."""
    return -math.pi**2 * HBAR * C / (240.0 * a**4)


def classical_limit(kind: str, geom: Geometry) -> float:
    """Large-separation (l = 0 Matsubara term) pressure.

    Drude plates lose the TE zero-frequency term and get half the ideal-metal
    value -zeta(3) k_B T / (4 pi a^3).
    """
    base = -ZETA3 * K_B * geom.T / (8.0 * math.pi * geom.a**3)
    if kind == "drude":
        return base
    if kind in ("plasma", "ideal"):
        return 2.0 * base
    raise ValueError(f"unknown model kind {kind!r}")


def _plasma_frequency(model) -> float:
    if isinstance(model, (Drude, Plasma)):
        return model.omega_p
    if isinstance(model, Tabulated):
        raise DomainError("the frequency integral runs to infinity and past any finite table; "
                          "use the table's extrapolation model for pressures")
    raise DomainError(f"real-frequency pressure needs a Drude or plasma model, got {type(model).__name__}")


def _x_ratio(n, d, e):
    """X = (n/d)^2 e / (1 - (n/d)^2 e) without dividing by d (r_TM has a pole)."""
    num = n * n * e
    return num / (d * d - num)


def _eps(model, omega):
    """Permittivity at real or complex (upper half-plane) frequency."""
    if not np.iscomplexobj(omega):
        return model.eps(omega)
    if isinstance(model, Drude):
        return 1.0 - model.omega_p**2 / (omega * (omega + 1j * model.gamma))
    if isinstance(model, Plasma):
        return 1.0 - model.omega_p**2 / omega**2
    raise DomainError(f"{type(model).__name__} has no continuation to complex frequency")


def _x_factor(model, pol, omega, q, a):
    """X(q) at frequency omega for arbitrary complex q; arrays broadcast."""
    eps = _eps(model, omega)
    w2 = (omega / C) ** 2
    q1 = branch_sqrt(q * q + (1.0 - eps) * w2)
    e = np.exp(-2.0 * a * q)
    if pol == "TE":
        return _x_ratio(q - q1, q + q1, e)
    return _x_ratio(eps * q - q1, eps * q + q1, e)


def evanescent_integrand(model, pol, omega, y, a):
    """q^2 Im X on the real q axis."""
    y = np.asarray(y, dtype=float)
    return y * y * np.imag(_x_factor(model, pol, omega, y + 0j, a))


def line_integrand(model, pol, omega, y, a):
    """Im[q^2 X(q)] on the shifted line q = y - i omega/c."""
    return np.imag(line_function(model, pol, omega, y, a))


def line_function(model, pol, omega, y, a):
    """q^2 X(q) on q = y - i omega/c; omega may be complex (Im omega >= 0)."""
    q = y - 1j * (omega / C)
    return q * q * _x_factor(model, pol, omega, q, a)


def _plasmon_roots(model, omega, a, y_max, grid=400):
    """Real-q roots of r_TM^2 e^{-2aq} = 1 using Re eps (the lossless skeleton).

    For a dissipative model these sit next to the near-poles of the TM
    evanescent integrand and are used as breakpoints. Returns an (N, 4) array
    padded with NaN.
    """
    omega = np.atleast_1d(omega)
    eps = np.real(model.eps(omega))[:, None]
    w2 = (omega / C)[:, None] ** 2
    q = np.geomspace(1e-4 / a, y_max, grid)[None, :]

    roots = np.full((omega.size, 4), np.nan)
    count = np.zeros(omega.size, dtype=int)
    for sign in (1.0, -1.0):
        v = _h_rows(q, eps, w2, a, sign)
        change = np.signbit(v[:, :-1]) != np.signbit(v[:, 1:])
        rows, cols = np.nonzero(change)
        if rows.size == 0:
            continue
        lo = q[0, cols].copy()
        hi = q[0, cols + 1].copy()
        e_r = eps[rows, 0]
        w_r = w2[rows, 0]
        flo = _h_rows(lo, e_r, w_r, a, sign)
        for _ in range(40):
            mid = 0.5 * (lo + hi)
            fm = _h_rows(mid, e_r, w_r, a, sign)
            left = np.signbit(fm) == np.signbit(flo)
            lo = np.where(left, mid, lo)
            flo = np.where(left, fm, flo)
            hi = np.where(left, hi, mid)
        for r, root in zip(rows, 0.5 * (lo + hi)):
            if count[r] < 4:
                roots[r, count[r]] = root
                count[r] += 1
    return roots


def _h_rows(qq, eps, w2, a, sign):
    """Lossless gap-plasmon condition r_TM e^{-aq} = +-1, cleared of denominators."""
    q1 = np.sqrt(np.maximum(qq * qq + (1.0 - eps) * w2, 0.0))
    return (eps * qq - q1) * np.exp(-a * qq) - sign * (eps * qq + q1)


def _graded_breaks(y_max, levels):
    return np.concatenate([[0.0], y_max * 2.0 ** -np.arange(levels, -1, -1)])


def inner_integrals(model, pol, kind, omega, a, *, abs_tol, rel_tol=1e-13, limit=400, resonances=None):
    """Vectorised inner integrals G_evan ("evan"), G_prop + G_evan ("line"),
    or the complex line integral F with G = Im F ("complex"; omega may be complex).

    Near a cavity resonance omega_n a pole of X sits at distance about
    |omega - omega_n| / c from the start of the line; passing the resonance
    list adds breakpoints on that scale.
    """
    omega = np.asarray(omega, dtype=complex if kind == "complex" else float)
    shape = omega.shape
    omega = omega.ravel()
    y_max = 25.0 / a
    base = _graded_breaks(y_max, 24 if kind == "evan" else 14)
    breaks = np.broadcast_to(base, (omega.size, base.size))
    if kind == "evan" and pol == "TM" and not isinstance(model, Plasma):
        roots = _plasmon_roots(model, omega, a, y_max)
        extra = np.where(np.isnan(roots), y_max, roots)
        breaks = np.sort(np.concatenate([breaks, extra], axis=1), axis=1)
    if kind == "line" and resonances is not None and len(resonances):
        res = np.asarray(resonances)
        d = np.min(np.abs(omega[:, None] - res[None, :]), axis=1) / C
        extra = np.clip(d[:, None] * 2.0 ** np.arange(-3, 5), 0.0, y_max)
        breaks = np.sort(np.concatenate([breaks, extra], axis=1), axis=1)
    integrand = {"evan": evanescent_integrand, "line": line_integrand, "complex": line_function}[kind]

    def f(idx, y):
        return integrand(model, pol, omega[idx], y, a)

    res = integrate_batch(f, breaks, rel_tol=rel_tol,
                          abs_tol=np.broadcast_to(abs_tol, shape).ravel(), limit=limit)
    return res.values.reshape(shape), res.errors.reshape(shape), res.converged.reshape(shape), res.evaluations


def propagating_inner_direct(model, pol, omega, a, tol=1e-12):
    """G_prop by direct quadrature over k_z in [0, omega/c] (slow; for checks)."""
    kz_max = omega / C
    n_res = int(2 * a * kz_max / (2 * math.pi)) + 2
    bps = [math.pi * n / a for n in range(1, n_res) if math.pi * n / a < kz_max]

    def f(kz):
        return -np.real(kz * kz * _x_factor(model, pol, omega, -1j * kz, a))

    return integrate_adaptive(f, 0.0, kz_max, tol, breakpoints=bps, limit=20000)


def cavity_resonances(model, a, w_lo, w_hi):
    """Frequencies where the normal-incidence round trip r^2 exp(2 i a omega / c) has phase 2 pi n."""

    def round_trip_phase(w):
        q = -1j * w / C
        q1 = branch_sqrt(-model.eps(w) * (w / C) ** 2)
        return np.angle(((q - q1) / (q + q1)) ** 2 * np.exp(2j * a * w / C))

    step = math.pi * C / (16.0 * a)
    grid = np.arange(w_lo, w_hi + step, step)
    ph = np.unwrap(round_trip_phase(grid))
    turns = np.floor(ph / (2 * math.pi))
    out = []
    for i in np.nonzero(turns[1:] > turns[:-1])[0]:
        lo, hi = grid[i], grid[i + 1]
        if np.sign(round_trip_phase(lo)) != np.sign(round_trip_phase(hi)):
            out.append(brentq(lambda w: float(round_trip_phase(w)), lo, hi, xtol=1e-15 * hi, rtol=1e-15))
    return np.array(out)


@dataclass
class _Budget:
    evaluations: int = 0
    inner_failures: int = 0

    def add(self, converged, evaluations):
        self.evaluations += evaluations
        self.inner_failures += int(np.count_nonzero(~np.asarray(converged)))


def _outer(model, pol, kind, geom, w_lo, w_hi, abs_tol, breaks, log_var, budget, limit=4000,
           resonances=None):
    """Integrate coth * G over [w_lo, w_hi] (in log omega if log_var).

    Inner integrals get 5% of abs_tol, spread evenly over the integration
    variable, so their summed error stays well inside the outer budget.
    """
    a, T = geom.a, geom.T
    length = math.log(w_hi / w_lo) if log_var else w_hi - w_lo
    density = 0.05 * abs_tol / length

    def h(_idx, s):
        w = np.exp(s) if log_var else s
        ct = coth_half(HBAR * w / (2.0 * K_B * T))
        jac = w if log_var else 1.0
        g, _, ok, ev = inner_integrals(model, pol, kind, w, a, abs_tol=density / (ct * jac),
                                       resonances=resonances)
        budget.add(ok, ev)
        return ct * g * jac

    pts = sorted({w_lo, w_hi, *[b for b in breaks if w_lo < b < w_hi]})
    grid = np.log(pts) if log_var else np.array(pts)
    res = integrate_batch(h, grid[None, :], rel_tol=0.0, abs_tol=abs_tol, limit=limit)
    return float(res.values[0]), float(res.errors[0]), bool(res.converged[0])


@dataclass(frozen=True)
class SectorIntegrals:
    """Raw omega-integrals of coth*G for one polarisation (before the -hbar/2pi^2 factor)."""

    total: float
    total_err: float
    evan: float
    evan_err: float
    converged: bool
    evaluations: int


def _coth_complex(z):
    with np.errstate(over="ignore"):
        return 1.0 + 2.0 / np.expm1(2.0 * np.minimum(z.real, 350.0) + 2j * z.imag)


def _pressure_scale(geom):
    return max(abs(ideal_pressure(geom.a)), abs(classical_limit("plasma", geom)))


def polarization_integrals(model, pol, geom, tol=DEFAULT_TOL, *, omega_cut=None) -> SectorIntegrals:
    """Frequency integrals of coth * G for the total (line) and evanescent parts of one polarisation."""
    wp = _plasma_frequency(model)
    a, T = geom.a, geom.T
    scale = _pressure_scale(geom) / PREFACTOR  # integrand units
    xi1 = matsubara_frequency(T)
    w_sw = min(xi1, 0.5 * math.pi * C / a)
    w_lo = 1e-8 * w_sw
    w_tail = 2.0 * wp
    if omega_cut is None:
        omega_cut = 10.0 * wp
    budget = _Budget()
    # error shares: each piece gets a fraction of tol*scale
    piece_tol = tol * scale / 4.0

    # total (line) integral: log region, linear region with cavity breakpoints, rotated tail
    resonances = cavity_resonances(model, a, w_sw, w_tail)
    lin_breaks = list(resonances)
    lin_breaks += [wp / math.sqrt(2.0), wp]
    n_half = int((w_tail - w_sw) / (0.5 * math.pi * C / a))
    lin_breaks += list(np.linspace(w_sw, w_tail, max(n_half, 1) + 1))
    t_log = _outer(model, pol, "line", geom, w_lo, w_sw, piece_tol, list(np.geomspace(w_lo, w_sw, 17)),
                   True, budget)
    t_lin = _outer(model, pol, "line", geom, w_sw, w_tail, piece_tol, lin_breaks, False, budget,
                   resonances=resonances)

    # Above w_tail the integrand is Im F(omega) with F analytic in the upper
    # half-plane and decaying like exp(2 i a omega / c); rotating the contour
    # to omega = w_tail + i xi turns the oscillating tail into
    # Re int_0^inf F(w_tail + i xi) d xi.
    tail_density = 0.05 * piece_tol * (2.0 * a) / (40.0 * C)  # spread over ~40 decay lengths

    def tail_f(xi):
        w = w_tail + 1j * np.asarray(xi, dtype=float)
        g, _, ok, ev = inner_integrals(model, pol, "complex", w, a, abs_tol=tail_density)
        budget.add(ok, ev)
        return np.real(_coth_complex(HBAR * w / (2.0 * K_B * T)) * g)

    tail = integrate_adaptive(tail_f, 0.0, math.inf, 0.0, abs_tol=piece_tol, decay_scale=C / (2.0 * a))

    def low_f(w):
        ct = coth_half(HBAR * w / (2.0 * K_B * T))
        return ct * inner_integrals(model, pol, "line", w, a, abs_tol=0.0)[0]

    # below w_lo the integrand vanishes like a positive power of omega
    lo_bound = abs(w_lo * float(low_f(np.array([w_lo]))[0]))

    total = t_log[0] + t_lin[0] + tail.value
    total_err = t_log[1] + t_lin[1] + tail.abs_error + lo_bound
    ok = t_log[2] and t_lin[2] and tail.converged

    # evanescent integral up to omega_cut, in log omega throughout
    e_breaks = list(np.geomspace(w_lo, omega_cut, 41)) + [wp / math.sqrt(2.0), wp]
    ev = _outer(model, pol, "evan", geom, w_lo, omega_cut, piece_tol, e_breaks, True, budget)
    ok = ok and ev[2] and budget.inner_failures == 0
    return SectorIntegrals(total, total_err, ev[0], ev[1], ok, budget.evaluations)


@dataclass(frozen=True)
class PressureBreakdown:
    tm_prop: QuadratureResult
    te_prop: QuadratureResult
    tm_evan: QuadratureResult
    te_evan: QuadratureResult
    model: object = field(default=None, compare=False)
    geometry: Optional[Geometry] = None

    def sector(self, pol: str, sector: str) -> QuadratureResult:
        return getattr(self, f"{pol.lower()}_{sector}")

    @property
    def total(self) -> float:
        return math.fsum(r.value for r in (self.tm_prop, self.te_prop, self.tm_evan, self.te_evan))

    @property
    def total_error(self) -> float:
        return math.sqrt(sum(r.abs_error**2 for r in (self.tm_prop, self.te_prop, self.tm_evan, self.te_evan)))

    @property
    def p_tm(self) -> float:
        return self.tm_prop.value + self.tm_evan.value

    @property
    def p_te(self) -> float:
        return self.te_prop.value + self.te_evan.value

    @property
    def converged(self) -> bool:
        return all(r.converged for r in (self.tm_prop, self.te_prop, self.tm_evan, self.te_evan))


def _pressure_result(raw, err, ok, evals, tol, geom):
    value = -PREFACTOR * raw + 0.0  # no negative zero
    abs_err = PREFACTOR * err
    ok = ok and abs_err <= tol * _pressure_scale(geom)
    return QuadratureResult(value, abs_err, evals, ok)


def pressure_breakdown(model, geom: Geometry, tol: float = DEFAULT_TOL, *, omega_cut=None) -> PressureBreakdown:
    """All four sector pressures (Pa, negative = attraction).

    ``tol`` is relative to the ideal-metal pressure scale at this separation;
    each sector's abs_error is reported in Pa.
    """
    out = {}
    for pol in POLARIZATIONS:
        s = polarization_integrals(model, pol, geom, tol, omega_cut=omega_cut)
        prop_raw = s.total - s.evan
        prop_err = math.hypot(s.total_err, s.evan_err)
        out[f"{pol.lower()}_prop"] = _pressure_result(prop_raw, prop_err, s.converged, s.evaluations, tol, geom)
        out[f"{pol.lower()}_evan"] = _pressure_result(s.evan, s.evan_err, s.converged, 0, tol, geom)
    return PressureBreakdown(model=model, geometry=geom, **out)


def pressure_sector(pol: str, sector: str, model, geom: Geometry, tol: float = DEFAULT_TOL,
                    *, omega_cut=None) -> QuadratureResult:
    if pol not in POLARIZATIONS or sector not in SECTORS:
        raise ValueError("pol must be TM/TE and sector prop/evan")
    s = polarization_integrals(model, pol, geom, tol, omega_cut=omega_cut)
    if sector == "evan":
        return _pressure_result(s.evan, s.evan_err, s.converged, s.evaluations, tol, geom)
    return _pressure_result(s.total - s.evan, math.hypot(s.total_err, s.evan_err), s.converged,
                            s.evaluations, tol, geom)


# --- imaginary-frequency oracle -------------------------------------------------------------

def _matsubara_x(model, xi, q, a):
    """Sum over polarisations of X at imaginary frequency; xi == 0 uses the static limit."""
    e = np.exp(-2.0 * a * q)
    if isinstance(model, IdealMetal):
        return 2.0 * e / (1.0 - e)
    xi = np.asarray(xi, dtype=float)
    zero = xi == 0
    xs = np.where(zero, 1.0, xi)
    eps = np.asarray(model.eps_imag(xs), dtype=float)
    w2 = (xs / C) ** 2
    q1 = np.sqrt(q * q + (eps - 1.0) * w2)
    r_tm = (eps * q - q1) / (eps * q + q1)
    r_te = (q - q1) / (q + q1)
    if np.any(zero):
        lim = model.static_limit()
        q10 = np.sqrt(q * q + lim / C**2)
        r_te = np.where(zero, (q - q10) / (q + q10), r_te)
        r_tm = np.where(zero, 1.0, r_tm)
    out = 0.0
    for r in (r_tm, r_te):
        x = r * r * e
        out = out + x / (1.0 - x)
    return out


def pressure_matsubara(model, geom: Geometry, tol: float = DEFAULT_TOL, *, max_terms: int = 200000,
                       return_terms: bool = False):
    """Imaginary-frequency (Matsubara) Lifshitz pressure in Pa.

    Terms are summed until the geometric bound on the remaining tail,
    term * rho / (1 - rho), drops below tol*|partial sum|/10; rho is the
    larger of exp(-2 a xi_1 / c) and the observed ratio of the last two terms.
    The bound is added to abs_error.
    """
    if not isinstance(model, (Drude, Plasma, IdealMetal)):
        raise DomainError(f"no closed-form imaginary-frequency permittivity for {type(model).__name__}")
    a, T = geom.a, geom.T
    xi1 = matsubara_frequency(T)
    rho_min = math.exp(-2.0 * a * xi1 / C)
    base = _graded_breaks(25.0 / a, 12)
    terms = []
    errs = []
    evals = 0
    converged = False
    tail = math.inf
    chunk = 8
    while not converged and len(terms) < max_terms:
        ls = np.arange(len(terms), len(terms) + chunk)
        xi = ls * xi1
        breaks = (xi / C)[:, None] + base[None, :]

        def f(idx, q):
            return q * q * _matsubara_x(model, xi[idx], q, a)

        res = integrate_batch(f, breaks, rel_tol=1e-12, abs_tol=0.0)
        evals += res.evaluations
        weights = np.where(ls == 0, 0.5, 1.0)
        terms.extend((weights * res.values).tolist())
        errs.extend((weights * res.errors).tolist())
        if not res.converged.all():
            break
        total = abs(math.fsum(terms))
        for j in range(len(terms) - chunk, len(terms)):
            if j < 2:
                continue
            ratio = abs(terms[j]) / abs(terms[j - 1]) if terms[j - 1] else 0.0
            rho = max(rho_min, ratio)
            if rho < 1.0:
                tail = abs(terms[j]) * rho / (1.0 - rho)
                if tail <= 0.1 * tol * total:
                    del terms[j + 1:], errs[j + 1:]
                    converged = True
                    break
        chunk = min(2 * chunk, 4096)
    pref = K_B * T / math.pi
    value = -pref * math.fsum(terms)
    err = pref * (math.fsum(errs) + tail)
    result = QuadratureResult(value, err, evals, converged and err <= tol * abs(value), len(terms))
    if return_terms:
        return result, [-pref * t for t in terms]
    return result
