"""Command-line interface: pressure and dipole sweeps as CSV, classification, verification.

Settings come from three layers. Command-line flags win over keys in a
``--config`` file, which win over the built-in defaults (copper, T = 300 K,
tol = 1e-4). The config file is flat ``key = value`` text; ``#`` starts a
comment and list-valued keys take comma-separated values. Keys:

    model, metal, omega_p, gamma, v, v_f, tol, output, workers,
    a, a_min, a_max, a_points, a_spacing, T,
    x, x_min, x_max, x_points, x_spacing, freq, m0, height, units,
    k, matsubara

Frequencies (``freq``) are in Hz; ``omega_p``, ``gamma`` are in rad/s.
Exit status: 0 on success, 1 if any row is unconverged or non-finite or a
verification criterion fails, 2 on a usage error.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from typing import Optional, Sequence

import numpy as np

from .dipole import DipoleConfig, field_sweep
from .lifshitz import Geometry, pressure_breakdown, pressure_matsubara
from .models import COPPER, Drude, GrapheneTransverse, IdealMetal, NonlocalPhenom, Plasma, zero_frequency_class

WORKERS_ENV = "CASIMIR_MAX_WORKERS"
PRESSURE_COLUMNS = ("a_m,T_K,model,tm_prop_Pa,te_prop_Pa,tm_evan_Pa,te_evan_Pa,total_Pa,total_err_Pa,"
                    "matsubara_Pa,converged")
DIPOLE_COLUMNS = "x_m,freq_hz,model,re_bx,im_bx,abs_err,units,converged"
CLASSIFY_COLUMNS = "model,k_per_m,kind,limit_re,limit_im,error"

METALS = {"cu": COPPER}
MODELS = {
    "pressure": ("drude", "plasma"),
    "dipole": ("drude", "plasma", "nonlocal", "ideal"),
    "classify": ("drude", "plasma", "nonlocal", "graphene", "ideal"),
    "verify": (),
}
LIST_KEYS = {"model", "a", "T", "x", "freq", "k"}
INT_KEYS = {"a_points", "x_points", "workers"}
FLOAT_KEYS = {"omega_p", "gamma", "v", "v_f", "tol", "a_min", "a_max", "x_min", "x_max", "m0", "height"}
STR_KEYS = {"metal", "output", "a_spacing", "x_spacing", "units", "matsubara"}
KNOWN_KEYS = LIST_KEYS | INT_KEYS | FLOAT_KEYS | STR_KEYS

DEFAULTS = {
    "model": ["drude"],
    "T": [300.0],
    "tol": 1e-4,
    "a_spacing": "log",
    "a_points": 1,
    "x": None,
    "x_min": 0.01,
    "x_max": 0.10,
    "x_points": 19,
    "x_spacing": "linear",
    "freq": [25.0],
    "m0": 2.776e-3,
    "height": 0.03,
    "units": "raw",
    "k": [0.0],
    "matsubara": "yes",
    "workers": None,
    "output": None,
}


class UsageError(ValueError):
    pass


def fmt(x: float) -> str:
    return format(float(x), ".17g")


def _flag(ok: bool) -> str:
    return "true" if ok else "false"


# --- configuration -------------------------------------------------------------------------

def parse_config_text(text: str) -> dict:
    """Parse flat ``key = value`` text into typed values."""
    out = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"config line {lineno}: expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in KNOWN_KEYS:
            raise UsageError(f"config line {lineno}: unknown key {key!r}")
        try:
            out[key] = _convert(key, value)
        except ValueError:
            raise UsageError(f"config line {lineno}: bad value {value!r} for {key}") from None
    return out


def _convert(key, value):
    if key in LIST_KEYS:
        items = [v.strip() for v in value.split(",") if v.strip()]
        return items if key == "model" else [float(v) for v in items]
    if key in INT_KEYS:
        return int(value)
    if key in FLOAT_KEYS:
        return float(value)
    return value


@dataclass(frozen=True)
class Grid:
    lo: float
    hi: float
    points: int
    spacing: str = "linear"

    def __post_init__(self):
        if self.points < 1:
            raise UsageError("grid needs at least one point")
        if self.points > 1 and not self.lo < self.hi:
            raise UsageError("grid needs min < max")
        if self.spacing not in ("linear", "log"):
            raise UsageError("spacing must be 'linear' or 'log'")
        if self.spacing == "log" and not self.lo > 0:
            raise UsageError("log spacing needs min > 0")

    def values(self) -> list[float]:
        if self.points == 1:
            return [self.lo]
        make = np.geomspace if self.spacing == "log" else np.linspace
        return [float(v) for v in make(self.lo, self.hi, self.points)]


@dataclass(frozen=True)
class RunConfig:
    command: str
    models: tuple = ()
    metal: Optional[str] = None
    omega_p: Optional[float] = None
    gamma: Optional[float] = None
    v: Optional[float] = None
    v_f: Optional[float] = None
    a: tuple = ()
    T: tuple = (300.0,)
    x: tuple = ()
    freq_hz: tuple = (25.0,)
    m0: float = 2.776e-3
    height: float = 0.03
    units: str = "raw"
    k: tuple = (0.0,)
    tol: float = 1e-4
    matsubara: bool = True
    output: Optional[str] = None
    workers: int = 1

    def __post_init__(self):
        if not (0 < self.tol <= 0.1):
            raise UsageError("tol must lie in (0, 0.1]")
        allowed = MODELS[self.command]
        for m in self.models:
            if m not in allowed:
                raise UsageError(f"model {m!r} not available for {self.command}; choose from {', '.join(allowed)}")
        if self.command in ("pressure", "dipole", "classify") and not self.models:
            raise UsageError("no model given")
        if any(not t > 0 for t in self.T):
            raise UsageError("temperatures must be > 0")
        if any(not a > 0 for a in self.a):
            raise UsageError("separations must be > 0")
        if any(not x > 0 for x in self.x):
            raise UsageError("lateral distances must be > 0")
        if any(not f > 0 for f in self.freq_hz):
            raise UsageError("frequencies must be > 0")
        if self.units not in ("raw", "si"):
            raise UsageError("units must be 'raw' or 'si'")

    def build_model(self, name: str):
        """Instantiate a dielectric model from the configured parameters."""
        if name == "ideal":
            return IdealMetal()
        if name == "graphene":
            return GrapheneTransverse() if self.v_f is None else GrapheneTransverse(v_F=self.v_f)
        if self.omega_p is None:
            raise UsageError(f"model {name} needs --omega-p (or --metal)")
        if name == "plasma":
            return Plasma(self.omega_p)
        if self.gamma is None:
            raise UsageError(f"model {name} needs --gamma (or --metal)")
        if name == "drude":
            return Drude(self.omega_p, self.gamma)
        if self.v is None:
            raise UsageError("model nonlocal needs --v")
        return NonlocalPhenom(self.omega_p, self.gamma, self.v)


def _grid(prefix, s, explicit):
    if explicit is not None:
        return tuple(float(v) for v in explicit)
    lo, hi = s.get(f"{prefix}_min"), s.get(f"{prefix}_max")
    if lo is None:
        return ()
    if hi is None:
        hi = lo
    return tuple(Grid(lo, hi, s.get(f"{prefix}_points", 1), s.get(f"{prefix}_spacing", "linear")).values())


def resolve_config(args: argparse.Namespace) -> RunConfig:
    """Merge flags over config-file keys over defaults."""
    file_keys = {}
    if getattr(args, "config", None):
        try:
            with open(args.config, encoding="utf-8") as fh:
                file_keys = parse_config_text(fh.read())
        except OSError as exc:
            raise UsageError(f"cannot read config file: {exc}") from None
    s = dict(DEFAULTS)
    if args.command == "pressure":
        s.update(x_min=None, a_points=1)
    s.update(file_keys)
    for key, value in vars(args).items():
        if key in KNOWN_KEYS and value is not None:
            s[key] = value
    if args.command == "dipole" and s.get("metal") is None and s.get("omega_p") is None:
        s["metal"] = "cu"
    metal = s.get("metal")
    if metal is not None:
        if metal not in METALS:
            raise UsageError(f"unknown metal {metal!r}; choose from {', '.join(METALS)}")
        base = METALS[metal]
        s["omega_p"] = s["omega_p"] if s.get("omega_p") is not None else base.omega_p
        s["gamma"] = s["gamma"] if s.get("gamma") is not None else base.gamma
    a = _grid("a", s, s.get("a"))
    x = _grid("x", s, s.get("x"))
    if args.command == "dipole" and not x:
        raise UsageError("no lateral distance given (--x or --x-min/--x-max)")
    if args.command == "pressure" and not a:
        raise UsageError("no separation given (--a or --a-min/--a-max)")
    cap = _worker_cap()
    workers = min(s["workers"] or cap, cap)
    if s["matsubara"] not in ("yes", "no"):
        raise UsageError("matsubara must be 'yes' or 'no'")
    models = () if args.command == "verify" else tuple(s["model"] or ())
    return RunConfig(
        command=args.command, models=models, metal=metal, omega_p=s.get("omega_p"),
        gamma=s.get("gamma"), v=s.get("v"), v_f=s.get("v_f"), a=a, T=tuple(s["T"]), x=x,
        freq_hz=tuple(s["freq"]), m0=s["m0"], height=s["height"], units=s["units"], k=tuple(s["k"]),
        tol=s["tol"], matsubara=s["matsubara"] == "yes", output=s.get("output"), workers=max(1, workers),
    )


def _worker_cap() -> int:
    raw = os.environ.get(WORKERS_ENV, "1")
    try:
        cap = int(raw)
    except ValueError:
        raise UsageError(f"{WORKERS_ENV} must be an integer, got {raw!r}") from None
    if cap < 1:
        raise UsageError(f"{WORKERS_ENV} must be >= 1")
    return cap


# --- commands ------------------------------------------------------------------------------

def _map(fn, jobs, workers):
    """Ordered map, optionally over a process pool."""
    if workers <= 1 or len(jobs) <= 1:
        return map(fn, jobs)
    pool = ProcessPoolExecutor(max_workers=min(workers, len(jobs)))
    return _drain(pool, pool.map(fn, jobs))


def _drain(pool, results):
    with pool:
        yield from results


def _pressure_row(job):
    name, model, a, T, tol, matsubara = job
    geom = Geometry(a, T)
    b = pressure_breakdown(model, geom, tol)
    values = [b.tm_prop.value, b.te_prop.value, b.tm_evan.value, b.te_evan.value, b.total, b.total_error]
    ok = b.converged
    m_field = ""
    if matsubara:
        m = pressure_matsubara(model, geom, tol)
        values.append(m.value)
        m_field = fmt(m.value)
        ok = ok and m.converged
    ok = ok and all(math.isfinite(v) for v in values)
    cells = [fmt(a), fmt(T), name] + [fmt(v) for v in values[:6]] + [m_field, _flag(ok)]
    return ",".join(cells), ok


def cmd_pressure(cfg: RunConfig, out) -> int:
    jobs = [(name, cfg.build_model(name), a, T, cfg.tol, cfg.matsubara)
            for name in cfg.models for T in cfg.T for a in cfg.a]
    out.write(PRESSURE_COLUMNS + "\n")
    ok = True
    for line, row_ok in _map(_pressure_row, jobs, cfg.workers):
        out.write(line + "\n")
        out.flush()
        ok = ok and row_ok
    return 0 if ok else 1


def _dipole_rows(job):
    name, model, f_hz, cfg, xs, tol = job
    rows = field_sweep(model, replace(cfg, omega=2 * math.pi * f_hz), xs, tol)
    lines, ok = [], True
    for r in rows:
        row_ok = r.converged and all(math.isfinite(v) for v in (r.re, r.im, r.abs_error))
        ok = ok and row_ok
        lines.append(",".join([fmt(r.x), fmt(f_hz), name, fmt(r.re), fmt(r.im), fmt(r.abs_error),
                               cfg.units, _flag(row_ok)]))
    return lines, ok


def cmd_dipole(cfg: RunConfig, out) -> int:
    xs = cfg.x
    base = DipoleConfig(m0=cfg.m0, h=cfg.height, units=cfg.units)
    # field_sweep works to an absolute tolerance on the integral; 1e-6 of the tol keeps
    # the CSV far more precise than the pressure outputs at negligible cost.
    tol = 1e-6 * cfg.tol
    jobs = [(name, cfg.build_model(name), f, base, xs, tol) for name in cfg.models for f in cfg.freq_hz]
    out.write(DIPOLE_COLUMNS + "\n")
    ok = True
    for lines, chunk_ok in _map(_dipole_rows, jobs, cfg.workers):
        out.write("".join(line + "\n" for line in lines))
        out.flush()
        ok = ok and chunk_ok
    return 0 if ok else 1


def cmd_classify(cfg: RunConfig, out) -> int:
    out.write(CLASSIFY_COLUMNS + "\n")
    ok = True
    for name in cfg.models:
        model = cfg.build_model(name)
        for k in cfg.k:
            c = zero_frequency_class(model, k)
            ok = ok and (math.isfinite(c.error))
            out.write(",".join([name, fmt(k), c.kind, fmt(c.limit.real), fmt(c.limit.imag), fmt(c.error)]) + "\n")
    return 0 if ok else 1


def cmd_verify(cfg: RunConfig, out) -> int:
    from .verify import format_table, run_all

    checks = run_all(cfg.tol)
    out.write(format_table(checks) + "\n")
    for c in checks:
        out.write(c.json() + "\n")
    failed = [c.name for c in checks if not c.passed]
    if failed:
        print("failed: " + ", ".join(failed), file=sys.stderr)
        return 1
    return 0


COMMANDS = {"pressure": cmd_pressure, "dipole": cmd_dipole, "classify": cmd_classify, "verify": cmd_verify}


# --- argument parsing ----------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="casimir", description=__doc__.split("\n\n")[0])
    sub = p.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="flat key = value settings file")
    common.add_argument("--tol", type=float, help="relative tolerance in (0, 0.1] (default 1e-4)")
    common.add_argument("-o", "--output", help="write to this file instead of stdout")
    common.add_argument("--workers", type=int, help=f"parallel workers, capped by ${WORKERS_ENV} (default 1)")

    material = argparse.ArgumentParser(add_help=False)
    material.add_argument("--model", action="append", help="dielectric model (repeatable)")
    material.add_argument("--metal", help="named parameter set supplying omega_p and gamma (cu)")
    material.add_argument("--omega-p", dest="omega_p", type=float, help="plasma frequency, rad/s")
    material.add_argument("--gamma", type=float, help="relaxation rate, rad/s")
    material.add_argument("--v", type=float, help="nonlocal velocity parameter, m/s")
    material.add_argument("--v-f", dest="v_f", type=float, help="graphene Fermi velocity, m/s")

    pr = sub.add_parser("pressure", parents=[common, material], help="Casimir pressure breakdown CSV")
    pr.add_argument("--a", action="append", type=float, help="plate separation, m (repeatable)")
    pr.add_argument("--a-min", dest="a_min", type=float)
    pr.add_argument("--a-max", dest="a_max", type=float)
    pr.add_argument("--a-points", dest="a_points", type=int)
    pr.add_argument("--a-spacing", dest="a_spacing", choices=("linear", "log"))
    pr.add_argument("--T", action="append", type=float, help="temperature, K (repeatable, default 300)")
    pr.add_argument("--no-matsubara", dest="matsubara", action="store_const", const="no",
                    help="leave the matsubara_Pa column empty")

    dp = sub.add_parser("dipole", parents=[common, material], help="lateral dipole field CSV")
    dp.add_argument("--x", action="append", type=float, help="lateral distance, m (repeatable)")
    dp.add_argument("--x-min", dest="x_min", type=float)
    dp.add_argument("--x-max", dest="x_max", type=float)
    dp.add_argument("--x-points", dest="x_points", type=int)
    dp.add_argument("--x-spacing", dest="x_spacing", choices=("linear", "log"))
    dp.add_argument("--freq", action="append", type=float, help="oscillation frequency, Hz (repeatable)")
    dp.add_argument("--m0", type=float, help="dipole amplitude, A m^2")
    dp.add_argument("--height", type=float, help="dipole height above the metal, m")
    dp.add_argument("--units", choices=("raw", "si"))

    cl = sub.add_parser("classify", parents=[common, material], help="zero-frequency class of a model")
    cl.add_argument("--k", action="append", type=float, help="wave number, 1/m (repeatable)")

    sub.add_parser("verify", parents=[common], help="run the acceptance criteria")
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = resolve_config(args)
        models = [cfg.build_model(m) for m in cfg.models]  # fail early on missing parameters
        del models
    except (UsageError, ValueError) as exc:
        parser.error(str(exc))
    out = open(cfg.output, "w", encoding="utf-8", newline="\n") if cfg.output else sys.stdout
    try:
        return COMMANDS[cfg.command](cfg, out)
    except ValueError as exc:
        print(f"casimir: error: {exc}", file=sys.stderr)
        return 1
    finally:
        if out is not sys.stdout:
            out.close()


if __name__ == "__main__":
    sys.exit(main())
