"""Last-rows against first-rows weight freezing on paired noise.

Both PAC(128, 85) variants come from the same rate tables and differ only in
which minimum-weight rows the final step freezes.
"""

import argparse
import os

from paclab.channels import ebn0_to_esn0
from paclab.cutoff import bit_channel_table, polarized_cutoff_rates
from paclab.profiler import design_from_rates
from paclab.sim import ExperimentConfig, run_sweep


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--ebn0", type=float, nargs="+", default=[2.5, 3.0])
    ap.add_argument("--frames", type=int, default=40_000)
    ap.add_argument("--design-ebn0", type=float, default=3.0)
    ap.add_argument("--seed", type=int, default=3)
    ap.add_argument("--trials", type=int, default=1_000_000, help="genie trials for the chunk-rate table")
    ap.add_argument("--bit-trials", type=int, default=100_000)
    ap.add_argument("--workers", type=int, default=os.cpu_count())
    args = ap.parse_args()

    es = ebn0_to_esn0(args.design_ebn0, 85 / 128)
    rates = polarized_cutoff_rates(7, 4, es, args.trials, seed=1)
    bits = bit_channel_table(7, es, args.bit_trials, seed=2)
    for variant in ("last", "first"):
        design = design_from_rates(128, 85, 99, rates, args.design_ebn0, bit_rates=bits, variant=variant)
        cfg = ExperimentConfig(
            design.spec,
            tuple(args.ebn0),
            min_errors=10**12,
            max_frames=args.frames,
            block_frames=1024,
            seed=args.seed,
            workers=args.workers,
        )
        print(f"# {variant}: weight-frozen rows {[i + 1 for i in design.frozen_by_weight]}")
        for p in run_sweep(cfg).points:
            lo, hi = p.fer_ci
            print(f"  {p.ebn0_db} dB: FER {p.fer:.4f} ({lo:.4f}-{hi:.4f}), ANV {p.anv:.3f}")


if __name__ == "__main__":
    main()
