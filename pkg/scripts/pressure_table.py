"""Sector breakdown of the Casimir pressure between copper plates at 300 K.

For each separation prints the four real-frequency sectors for the Drude and
plasma models, the Matsubara cross-check, and the relative Drude-plasma
differences of the TM and TE totals. The TM totals nearly coincide while the
TE totals differ, because the Drude TE evanescent sector is repulsive and
offsets part of the propagating TE attraction.

    python3 scripts/pressure_table.py --a 0.5e-6 1e-6 2e-6 5e-6
"""

import argparse

from casimir.lifshitz import Geometry, pressure_breakdown, pressure_matsubara
from casimir.models import COPPER, COPPER_PLASMA


def main():
    p = argparse.ArgumentParser(description=__doc__.split("\n\n")[0])
    p.add_argument("--a", type=float, nargs="+", default=[0.5e-6, 1e-6, 2e-6, 5e-6])
    p.add_argument("--T", type=float, default=300.0)
    p.add_argument("--tol", type=float, default=1e-4)
    args = p.parse_args()

    head = f"{'a (um)':>7} {'model':>6} {'TM prop':>12} {'TE prop':>12} {'TM evan':>12} {'TE evan':>12} " \
           f"{'total':>12} {'Matsubara':>12}"
    print(head + "   (Pa)")
    for a in args.a:
        g = Geometry(a, args.T)
        out = {}
        for name, model in (("drude", COPPER), ("plasma", COPPER_PLASMA)):
            b = pressure_breakdown(model, g, args.tol)
            m = pressure_matsubara(model, g, min(args.tol, 1e-6))
            out[name] = b
            flag = "" if b.converged and m.converged else "  (unconverged)"
            print(f"{a * 1e6:7.2f} {name:>6} {b.tm_prop.value:12.5g} {b.te_prop.value:12.5g} "
                  f"{b.tm_evan.value:12.5g} {b.te_evan.value:12.5g} {b.total:12.6g} {m.value:12.6g}{flag}")
        d, pl = out["drude"], out["plasma"]
        tm = abs(d.p_tm - pl.p_tm) / abs(pl.p_tm)
        te = abs(d.p_te - pl.p_te) / abs(pl.p_te)
        print(f"{'':7} {'':>6} relative Drude-plasma difference: TM {tm:.2%}, TE {te:.2%}")


if __name__ == "__main__":
    main()
