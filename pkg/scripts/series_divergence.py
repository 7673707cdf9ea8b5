"""Growth of the ladder-operator series for 1/y, d/dy and x with truncation.

For each nu the column factors |nu - 1 - 2n| are listed next to the
Frobenius error of the truncated x series against the quadrature matrix.
"""
import argparse

import numpy as np

from morsejt.morse_core import MorseParams
from morsejt.operator_series import (SeriesTruncation, convergence_report, radius_ok,
                                     series_operator, sigma_spectrum)


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--nus", type=float, nargs="+", default=[1.8, 2.6, 6.0, 11.3, 29.5])
    ap.add_argument("--max-inner", type=int, default=6)
    ap.add_argument("--outer", type=int, nargs="+", default=[1, 2, 3])
    args = ap.parse_args()

    for nu in args.nus:
        p = MorseParams.from_reduced(nu, 1.0)
        sig = np.abs(sigma_spectrum(p))
        print(f"# nu={nu:g}  states={p.size}  radius_ok={radius_ok(p)}  "
              f"|sigma| in [{sig.min():.3g}, {sig.max():.3g}]")
        for op in ("inverse_y", "d_dy"):
            norms = series_operator(p, op, SeriesTruncation(args.max_inner)).term_norms
            print(f"  {op:9s} term norms " + " ".join(f"{v:.2e}" for v in norms))
        truncs = [SeriesTruncation(m, l) for l in args.outer for m in range(args.max_inner + 1)]
        for row in convergence_report(p, truncs):
            print(f"  M={row.M_inner:2d} L={row.L_outer}  err={row.frobenius_error:.4e}  {row.classification}")


if __name__ == "__main__":
    main()
