"""Approach of Morse observables to their harmonic values as nu grows.

Also compares the Morse coherent packet with the Glauber state, once at
fixed kappa and once at fixed displacement |rho|.
"""
import argparse

from morsejt.exactdiag import glauber_overlap, harmonic_limit_scan, kappa_for_rho
from morsejt.morse_core import MorseParams


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--nus", type=float, nargs="+", default=[50, 200, 800, 3200])
    ap.add_argument("--kappa", type=float, default=0.1)
    ap.add_argument("--rho", type=float, default=0.5)
    args = ap.parse_args()

    for obs in ("level_gap", "x01_element", "jt_ground_shift"):
        scan = harmonic_limit_scan(args.nus, obs)
        print(f"# {obs}  fitted order in 1/nu: {scan['order']:.4f}")
        for r in scan["rows"]:
            print(f"  nu={r['nu']:8g}  value={r['value']:.12g}  harmonic={r['harmonic']:.12g}  "
                  f"dev={r['deviation']:.4e}")
    print("# Glauber overlap")
    for nu in args.nus:
        p = MorseParams.from_reduced(nu, 0.5)
        fixed_k = glauber_overlap(p, args.kappa)
        fixed_r = glauber_overlap(p, kappa_for_rho(p, args.rho))
        print(f"  nu={nu:8g}  kappa={args.kappa:g}: {fixed_k:.6f}   |rho|={args.rho:g}: {fixed_r:.6f}")


if __name__ == "__main__":
    main()
