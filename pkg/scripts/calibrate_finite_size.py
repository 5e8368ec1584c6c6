#!/usr/bin/env python3
"""Calibrate the finite-size allowance constant C.

The analytic moment formulas are large-dimension limits.  Comparisons
against sampled ensembles at half-dimension N get the acceptance band
``3 * MC standard error + C / N``.  This script measures the actual
deviation |empirical - predicted| for the centered moments of orders
2..4 (and the mean) on both special orthogonal ensembles at
N in {20, 40, 80}, with sample counts large enough that Monte Carlo
noise is small against the finite-size bias, then records

    C = safety * max over (group, order, N) of N * |deviation|

into src/momentbounds/data/finite_size.json.

Run once per environment refresh:

    python scripts/calibrate_finite_size.py [--samples-base 400000]
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

from momentbounds.kernels import SymmetryGroup
from momentbounds.rmt import EnsembleSpec, empirical_moments, predicted_mean, predicted_moment
from momentbounds.testfunc import make_naive

HALF_DIMS = (20, 40, 80)
ORDERS = (2, 3, 4)
SAFETY = 1.5
SEED = 20260810


def main() -> int:
    parser = argparse.ArgumentParser()
    parser.add_argument("--samples-base", type=int, default=400_000,
                        help="samples at N=20/40; N=80 runs half this")
    parser.add_argument("--out", default=None)
    args = parser.parse_args()

    out_path = (
        Path(args.out)
        if args.out
        else Path(__file__).resolve().parents[1] / "src" / "momentbounds" / "data" / "finite_size.json"
    )

    tf = make_naive(1.0 / 3.0)
    rows = []
    per_order_c = {order: 0.0 for order in ORDERS}
    mean_c = 0.0
    for group in (SymmetryGroup.SO_EVEN, SymmetryGroup.SO_ODD):
        for n in HALF_DIMS:
            samples = args.samples_base if n < 80 else args.samples_base // 2
            spec = EnsembleSpec(group, n, samples, seed=SEED + n)
            t0 = time.perf_counter()
            emp = empirical_moments(spec, tf, max(ORDERS))
            elapsed = time.perf_counter() - t0
            mean_dev = abs(emp.mean - predicted_mean(tf, group))
            mean_c = max(mean_c, n * (mean_dev + 3.0 * emp.mean_std_error))
            row = {
                "group": group.value,
                "N": n,
                "samples": samples,
                "seconds": round(elapsed, 1),
                "mean_dev": mean_dev,
            }
            for order in ORDERS:
                dev = abs(emp.centered[order] - predicted_moment(tf, group, order))
                se = emp.std_errors[order]
                per_order_c[order] = max(per_order_c[order], n * (dev + 3.0 * se))
                row[f"dev{order}"] = dev
                row[f"se{order}"] = se
            rows.append(row)
            print(row, flush=True)

    constant = SAFETY * max(per_order_c.values())
    payload = {
        "allowance_constant": round(constant, 4),
        "per_order": {str(k): round(SAFETY * v, 4) for k, v in per_order_c.items()},
        "mean_constant": round(SAFETY * mean_c, 4),
        "safety_factor": SAFETY,
        "test_function": tf.spec_string,
        "half_dims": list(HALF_DIMS),
        "seed": SEED,
        "measurements": rows,
    }
    out_path.write_text(json.dumps(payload, indent=2) + "\n")
    print(f"wrote {out_path} with allowance_constant={payload['allowance_constant']}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
