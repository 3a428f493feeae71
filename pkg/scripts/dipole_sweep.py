"""Lateral field of the oscillating dipole above copper: Drude and plasma at 15 and 25 Hz.

Writes the four curves as CSV (same columns as `casimir dipole`) and prints the
largest plasma/Drude ratio. The default range runs past x ~ 0.12 m, where the
Drude and plasma curves for Re B_x cross.

    python3 scripts/dipole_sweep.py -o dipole.csv --x-max 0.2
"""

import argparse
import math
import sys

import numpy as np

from casimir.cli import DIPOLE_COLUMNS, fmt
from casimir.dipole import DipoleConfig, field_sweep
from casimir.models import COPPER, COPPER_PLASMA


def main():
    p = argparse.ArgumentParser(description=__doc__.split("\n\n")[0])
    p.add_argument("--x-min", type=float, default=0.01)
    p.add_argument("--x-max", type=float, default=0.2)
    p.add_argument("--points", type=int, default=39)
    p.add_argument("-o", "--output")
    args = p.parse_args()

    xs = np.linspace(args.x_min, args.x_max, args.points)
    curves = {}
    lines = [DIPOLE_COLUMNS]
    for name, model in (("drude", COPPER), ("plasma", COPPER_PLASMA)):
        for f in (15.0, 25.0):
            rows = field_sweep(model, DipoleConfig(omega=2 * math.pi * f), xs)
            curves[name, f] = np.array([r.re for r in rows])
            lines += [",".join([fmt(r.x), fmt(f), name, fmt(r.re), fmt(r.im), fmt(r.abs_error), "raw",
                                "true" if r.converged else "false"]) for r in rows]
    text = "\n".join(lines) + "\n"
    if args.output:
        with open(args.output, "w", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)

    ratio = np.abs(curves["plasma", 25.0] / curves["drude", 25.0])
    cross = np.nonzero(np.diff(np.sign(curves["plasma", 25.0] - curves["drude", 25.0])))[0]
    print(f"max |Re B_plasma / Re B_drude(25 Hz)| = {ratio.max():.3f} at x = {xs[ratio.argmax()]:.3f} m",
          file=sys.stderr)
    if cross.size:
        print(f"Re B_x curves (25 Hz) cross between x = {xs[cross[0]]:.3f} and {xs[cross[0] + 1]:.3f} m",
              file=sys.stderr)


if __name__ == "__main__":
    main()
