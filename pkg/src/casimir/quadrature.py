"""Adaptive Gauss-Kronrod quadrature and lobe-summed oscillatory integrals.

All integrands are called with numpy arrays and must be vectorised
elementwise. Complex integrands are handled natively: real and imaginary parts
share one subdivision and the error estimate uses the complex modulus.

The adaptive core works on a *batch* of independent integrals at once so that
nested integrals (an inner integral per outer node) cost one numpy call per
refinement sweep rather than one per node.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .special import bessel_j1, j1_zeros

# 15-point Kronrod extension of the 7-point Gauss rule (QUADPACK qk15 table).
_XK_HALF = np.array([
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.0])
_WK_HALF = np.array([
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714])
_WG_HALF = np.array([
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327])

XK = np.concatenate([-_XK_HALF[:-1], _XK_HALF[::-1]])
WK = np.concatenate([_WK_HALF[:-1], _WK_HALF[::-1]])
_GAUSS_IDX = np.array([1, 3, 5, 7, 9, 11, 13])
WG = np.concatenate([_WG_HALF[:-1], _WG_HALF[::-1]])

_EPS = np.finfo(float).eps
_TINY = np.finfo(float).tiny


@dataclass(frozen=True)
class QuadratureResult:
    value: complex | float
    abs_error: float
    evaluations: int
    converged: bool
    subdivisions: int = 0
    acceleration_order: int = 0
    message: str = ""

    def __post_init__(self):
        if not self.abs_error >= 0:
            raise ValueError("abs_error must be non-negative")


@dataclass(frozen=True)
class OscillationSpec:
    """Describes the oscillatory factor of an integrand.

    kind is "bessel_j1" (factor J1(scale*t)) or "complex_exponential" (factor
    exp(i*scale*t)); "none" is accepted for symmetry but rejected by the
    oscillatory integrator. With ``apply_factor=False`` the integrand already
    contains the oscillation and ``scale`` is only used to place lobe
    boundaries.
    """

    kind: str
    scale: float = 0.0
    decay_scale: Optional[float] = None
    apply_factor: bool = True

    def __post_init__(self):
        if self.kind not in ("none", "bessel_j1", "complex_exponential"):
            raise ValueError(f"unknown oscillation kind {self.kind!r}")
        if self.kind != "none" and not self.scale > 0:
            raise ValueError("oscillation scale must be > 0")
        if self.decay_scale is not None and not self.decay_scale > 0:
            raise ValueError("decay_scale must be > 0")


def _panel_rule(values, half_width):
    """Kronrod value, QUADPACK-style error estimate, and whether that estimate
    is the roundoff floor (bisecting such a panel cannot help)."""
    kron = half_width * (values @ WK)
    gauss = half_width * (values[:, _GAUSS_IDX] @ WG)
    mean = kron / (2.0 * half_width)
    resabs = np.abs(half_width) * (np.abs(values) @ WK)
    resasc = np.abs(half_width) * (np.abs(values - mean[:, None]) @ WK)
    err = np.abs(kron - gauss)
    with np.errstate(divide="ignore", invalid="ignore"):
        scaled = resasc * np.minimum(1.0, (200.0 * err / resasc) ** 1.5)
    err = np.where((resasc != 0) & (err != 0), scaled, err)
    floor = 50.0 * _EPS * resabs
    floored = (resabs > _TINY / (50.0 * _EPS)) & (err <= floor)
    err = np.where(floored, floor, err)
    return kron, err, floored


@dataclass
class BatchResult:
    values: np.ndarray
    errors: np.ndarray
    converged: np.ndarray
    evaluations: int
    panels: np.ndarray = field(default_factory=lambda: np.zeros(0, int))


def integrate_batch(f, breaks, *, rel_tol=1e-10, abs_tol=0.0, limit=500):
    """Integrate M independent integrands over their own intervals.

    ``breaks`` is an (M, B) array of per-member breakpoints (ascending; equal
    consecutive entries give empty panels). ``f(idx, t)`` receives an integer
    array of member indices and a node array of the same shape. ``abs_tol`` may
    be a scalar or an (M,) array. Refinement bisects, within every unconverged
    member, the panels whose error is at least the member's mean panel error;
    the choice does not depend on the tolerance, so a tighter tolerance only
    ever continues the same refinement sequence.
    """
    breaks = np.atleast_2d(np.asarray(breaks, dtype=float))
    m, nb = breaks.shape
    abs_tol = np.broadcast_to(np.asarray(abs_tol, dtype=float), (m,))
    member = np.repeat(np.arange(m), nb - 1)
    lo = breaks[:, :-1].ravel()
    hi = breaks[:, 1:].ravel()
    keep = hi > lo
    member, lo, hi = member[keep], lo[keep], hi[keep]

    def evaluate(mem, a, b):
        if a.size == 0:
            return np.zeros(0), np.zeros(0), np.zeros(0, dtype=bool)
        c = 0.5 * (a + b)
        h = 0.5 * (b - a)
        t = c[:, None] + h[:, None] * XK[None, :]
        idx = np.broadcast_to(mem[:, None], t.shape)
        y = np.asarray(f(idx, t))
        if y.shape != t.shape:
            y = np.broadcast_to(y, t.shape)
        return _panel_rule(y, h)

    val, err, floored = evaluate(member, lo, hi)
    evals = 15 * lo.size
    dtype = np.result_type(val, float)
    frozen = np.zeros(m, dtype=bool)  # members that hit the panel limit
    while True:
        tot_err = np.bincount(member, weights=err, minlength=m)
        if np.iscomplexobj(val):
            tot_val = (np.bincount(member, weights=val.real, minlength=m)
                       + 1j * np.bincount(member, weights=val.imag, minlength=m))
        else:
            tot_val = np.bincount(member, weights=val, minlength=m)
        target = np.maximum(abs_tol, rel_tol * np.abs(tot_val))
        done = (tot_err <= target) | ~np.isfinite(tot_err)
        count = np.bincount(member, minlength=m)
        frozen |= count >= limit
        active = ~done & ~frozen
        if not active.any():
            break
        mean_err = tot_err / np.maximum(count, 1)
        width_ok = (hi - lo) > 64 * _EPS * np.maximum(np.abs(lo), np.abs(hi))
        split = active[member] & (err >= mean_err[member]) & width_ok & ~floored
        if not split.any():
            frozen |= active
            continue
        ms, ls, hs = member[split], lo[split], hi[split]
        mid = 0.5 * (ls + hs)
        new_m = np.concatenate([ms, ms])
        new_lo = np.concatenate([ls, mid])
        new_hi = np.concatenate([mid, hs])
        nv, ne, nf = evaluate(new_m, new_lo, new_hi)
        evals += 15 * new_lo.size
        rest = ~split
        member = np.concatenate([member[rest], new_m])
        lo = np.concatenate([lo[rest], new_lo])
        hi = np.concatenate([hi[rest], new_hi])
        val = np.concatenate([val[rest], nv]).astype(dtype, copy=False)
        err = np.concatenate([err[rest], ne])
        floored = np.concatenate([floored[rest], nf])
    converged = (tot_err <= target) & np.isfinite(tot_val) & np.isfinite(tot_err)
    return BatchResult(tot_val, tot_err, converged, evals, count)


def _transform(a, b, decay_scale, endpoint):
    """Map the user interval onto a finite one; returns (phi, dphi, u_a, u_b, inverse)."""
    if math.isinf(b):
        if endpoint is not None:
            raise ValueError("endpoint hints are only supported on finite intervals")
        scale = decay_scale if decay_scale is not None else max(1.0, abs(a))

        def phi(u):
            return a - scale * np.log1p(-u)

        def dphi(u):
            return scale / (1.0 - u)

        def inverse(t):
            return -np.expm1(-(np.asarray(t) - a) / scale)

        return phi, dphi, 0.0, 1.0, inverse
    width = b - a
    if endpoint is None:
        return (lambda u: u), (lambda u: np.ones_like(u)), a, b, (lambda t: np.asarray(t))
    if endpoint == "left":
        return (lambda s: a + width * s * s), (lambda s: 2.0 * width * s), 0.0, 1.0, \
            (lambda t: np.sqrt((np.asarray(t) - a) / width))
    if endpoint == "right":
        return (lambda s: b - width * (1 - s) ** 2), (lambda s: 2.0 * width * (1 - s)), 0.0, 1.0, \
            (lambda t: 1 - np.sqrt((b - np.asarray(t)) / width))
    if endpoint == "both":
        # t = a + w (3s^2 - 2s^3) flattens both ends
        def phi(s):
            return a + width * s * s * (3.0 - 2.0 * s)

        def dphi(s):
            return 6.0 * width * s * (1.0 - s)

        def inverse(t):
            z = (np.asarray(t, dtype=float) - a) / width
            return 0.5 - np.sin(np.arcsin(1.0 - 2.0 * z) / 3.0)

        return phi, dphi, 0.0, 1.0, inverse
    raise ValueError(f"unknown endpoint hint {endpoint!r}")


def integrate_adaptive(f: Callable, a: float, b: float, tol: float = 1e-10, *,
                       abs_tol: float = 0.0, decay_scale: Optional[float] = None,
                       endpoint: Optional[str] = None, breakpoints: Sequence[float] = (),
                       limit: int = 2000) -> QuadratureResult:
    """Globally adaptive G7/K15 integration of f over [a, b].

    ``b`` may be ``inf``; the tail is then mapped through
    t = a - L*log(1-u) with L = decay_scale, which makes exp(-t/L)-type
    integrands constant in u. ``endpoint`` ("left", "right", "both") applies a
    quadratic substitution that neutralises inverse-square-root endpoint
    singularities. Running out of panels returns an unconverged result rather
    than raising.
    """
    if not b > a:
        if b == a:
            return QuadratureResult(0.0, 0.0, 0, True)
        raise ValueError("integrate_adaptive requires a < b")
    phi, dphi, ua, ub, inverse = _transform(a, b, decay_scale, endpoint)
    inner = [float(inverse(x)) for x in breakpoints if a < x < b]
    grid = np.array(sorted({ua, ub, *inner}))

    def g(_idx, u):
        return f(phi(u)) * dphi(u)

    res = integrate_batch(g, grid[None, :], rel_tol=tol, abs_tol=abs_tol, limit=limit)
    value = res.values[0]
    if not np.iscomplexobj(value):
        value = float(value)
    else:
        value = complex(value)
    err = float(res.errors[0])
    ok = bool(res.converged[0])
    msg = "" if ok else "panel limit reached or roundoff prevents further refinement"
    return QuadratureResult(value, err, res.evaluations, ok, int(res.panels[0]), 0, msg)


def wynn_epsilon(partial_sums: Sequence[complex]) -> tuple[complex, float, int]:
    """Accelerate a sequence of partial sums with Wynn's epsilon algorithm.

    Returns (estimate, error estimate, order used). The error is the distance
    between the two most recent even-column diagonal estimates.
    """
    s = [complex(x) for x in partial_sums]
    n = len(s)
    if n < 3:
        last = s[-1] if s else 0j
        prev = s[-2] if n > 1 else last
        return last, abs(last - prev), 0
    prev_col = [0j] * (n + 1)
    cur_col = list(s)
    estimates = []
    order = 0
    k = 0
    while len(cur_col) > 1:
        nxt = []
        for i in range(len(cur_col) - 1):
            d = cur_col[i + 1] - cur_col[i]
            if d == 0:
                nxt = None
                break
            nxt.append(prev_col[i + 1] + 1.0 / d)
        if nxt is None:
            break
        prev_col, cur_col = cur_col, nxt
        k += 1
        if k % 2 == 0:
            estimates.append(cur_col[-1])
            order = k // 2
    if not estimates:
        return s[-1], abs(s[-1] - s[-2]), 0
    best = estimates[-1]
    ref = estimates[-2] if len(estimates) > 1 else s[-1]
    return best, abs(best - ref), order


def _lobe_edges(osc: OscillationSpec, lower: float, start_index: int, count: int) -> np.ndarray:
    if osc.kind == "bessel_j1":
        # zeros of J1(scale*t) strictly above lower
        first = max(1, int(math.floor(lower * osc.scale / math.pi - 0.25)))
        z = j1_zeros(first, count + 4) / osc.scale
        z = z[z > lower]
        return z[start_index:start_index + count] if start_index < z.size else z[:0]
    step = math.pi / osc.scale
    return lower + step * np.arange(start_index + 1, start_index + count + 1)


def integrate_oscillatory(f: Callable, osc: OscillationSpec, lower: float, tol: float = 1e-10, *,
                          abs_tol: float = 0.0, max_lobes: int = 2000, batch: int = 16) -> QuadratureResult:
    """Semi-infinite integral of an oscillating integrand by lobe summation.

    The range [lower, inf) is cut at consecutive zeros of the oscillatory factor
    (half periods for complex exponentials), each lobe is integrated
    adaptively, and the partial sums are extrapolated with the epsilon
    algorithm. When the extrapolation does not settle, the lobes are summed
    directly until they fall below tolerance and the result is flagged with a
    message noting the degraded accuracy.
    """
    if osc.kind == "none":
        raise ValueError("integrate_oscillatory needs an oscillatory factor")

    if osc.apply_factor and osc.kind == "bessel_j1":
        def g(t):
            return f(t) * bessel_j1(osc.scale * t)
    elif osc.apply_factor:
        def g(t):
            return f(t) * np.exp(1j * osc.scale * t)
    else:
        g = f

    edges = [lower]
    lobes: list[complex] = []
    lobe_errs: list[float] = []
    partial: list[complex] = []
    evals = 0
    acc_history: list[complex] = []
    is_complex = False
    while len(lobes) < max_lobes:
        if osc.kind == "bessel_j1":
            # recompute zeros in absolute numbering so edges stay consistent
            first = max(1, int(math.floor(lower * osc.scale / math.pi - 0.25)))
            z = j1_zeros(first, len(edges) + batch + 4) / osc.scale
            z = z[z > lower]
            new_edges = z[len(edges) - 1:len(edges) - 1 + batch]
        else:
            new_edges = _lobe_edges(osc, lower, len(edges) - 1, batch)
        grid = np.array(edges[-1:] + list(new_edges))
        breaks = np.stack([grid[:-1], grid[1:]], axis=1)
        res = integrate_batch(lambda _i, t: g(t), breaks, rel_tol=min(tol, 1e-8) * 0.1,
                              abs_tol=abs_tol * 1e-3 / max(batch, 1))
        evals += res.evaluations
        edges.extend(new_edges.tolist())
        is_complex = is_complex or np.iscomplexobj(res.values)
        for v, e in zip(res.values, res.errors):
            lobes.append(complex(v))
            lobe_errs.append(float(e))
            partial.append((partial[-1] if partial else 0j) + complex(v))
        direct = partial[-1]
        target = max(abs_tol, tol * abs(direct))
        quad_err = math.fsum(lobe_errs)
        # direct convergence: lobes have decayed below tolerance
        recent = max(abs(x) for x in lobes[-4:])
        if recent == 0.0 and all(x == 0 for x in lobes):
            return _osc_result(0.0, 0.0, evals, True, len(lobes), 0, "", is_complex)
        past_decay = (osc.decay_scale is not None
                      and edges[-1] - lower > 60.0 * osc.decay_scale)
        if recent <= 0.01 * target or (past_decay and recent <= target):
            err = quad_err + recent
            return _osc_result(direct, err, evals, err <= max(target, abs_tol), len(lobes), 0, "",
                               is_complex)
        est, acc_err, order = wynn_epsilon(partial)
        acc_history.append(est)
        if len(acc_history) >= 2:
            drift = abs(acc_history[-1] - acc_history[-2])
            err = quad_err + max(acc_err, drift)
            if err <= max(abs_tol, tol * abs(est)):
                return _osc_result(est, err, evals, True, len(lobes), order, "", is_complex)
    est, acc_err, order = wynn_epsilon(partial)
    err = math.fsum(lobe_errs) + max(acc_err, abs(lobes[-1]))
    return _osc_result(est, err, evals, False, len(lobes), order,
                       "extrapolation did not settle; accuracy degraded", is_complex)


def _osc_result(value, err, evals, ok, lobes, order, msg, is_complex):
    value = complex(value) if is_complex else float(complex(value).real)
    return QuadratureResult(value, float(err), evals, bool(ok), lobes, order, msg)
