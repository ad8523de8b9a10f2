"""Fidelity deficit of the first-order pointer state and the exact flip probability.

    python scripts/approximation_order.py
"""
import argparse

import numpy as np

from absim.hilbert import SIGMA_Z, SX_PLUS
from absim.pointer import GaussianPointer, couple, fidelity, first_order_state, flip_probability


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--delta", type=float, default=1.0)
    ap.add_argument("--points", type=int, default=8)
    args = ap.parse_args()

    ptr = GaussianPointer(args.delta)
    ratios = np.geomspace(0.01, 0.5, args.points)
    deficits, flips = [], []
    print(f"{'g0/delta':>9} {'1 - F':>12} {'p_flip':>12} {'g0^2/delta^2':>13}")
    for r in ratios:
        g0 = r * args.delta
        d = 1 - fidelity(couple(SX_PLUS, SIGMA_Z, g0, ptr), first_order_state(SX_PLUS, g0, ptr))
        p = flip_probability(g0, args.delta)
        deficits.append(d)
        flips.append(p)
        print(f"{r:>9.4f} {d:>12.4e} {p:>12.4e} {r * r:>13.4e}")
    # small-ratio end only; both curves bend away from a power law near 1
    small = ratios <= 0.2
    print(f"slope of 1 - F:  {np.polyfit(np.log(ratios[small]), np.log(np.array(deficits)[small]), 1)[0]:.4f}")
    print(f"slope of p_flip: {np.polyfit(np.log(ratios[small]), np.log(np.array(flips)[small]), 1)[0]:.4f}")


if __name__ == "__main__":
    main()
