"""FER/BER/ANV sweep of one code under several decoders on shared noise.

Every decoder sees the same frames (noise is keyed by seed, point and block),
so the curves are paired. One CSV plus companion JSON per decoder.
"""

import argparse
import os
from pathlib import Path

from paclab.precoder import CodeSpec
from paclab.sim import ExperimentConfig, run_sweep


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("spec", type=Path, help="CodeSpec JSON (e.g. from scripts/reproduce_profiles.py)")
    ap.add_argument("--ebn0", type=float, nargs="+", default=[2.0, 2.5, 3.0, 3.5, 4.0])
    ap.add_argument("--decoders", nargs="+", default=["fano", "scl", "sc"], choices=["fano", "scl", "sc"])
    ap.add_argument("--list-size", type=int, default=32)
    ap.add_argument("--delta", type=float, default=2.0)
    ap.add_argument("--min-errors", type=int, default=100)
    ap.add_argument("--max-frames", type=int, default=1_000_000)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--workers", type=int, default=os.cpu_count())
    ap.add_argument("--out-dir", type=Path, default=Path("results/fer"))
    args = ap.parse_args()
    args.out_dir.mkdir(parents=True, exist_ok=True)

    spec = CodeSpec.from_json(args.spec.read_text())
    for decoder in args.decoders:
        cfg = ExperimentConfig(
            spec,
            tuple(args.ebn0),
            decoder=decoder,
            delta=args.delta,
            list_size=args.list_size,
            min_errors=args.min_errors,
            max_frames=args.max_frames,
            seed=args.seed,
            workers=args.workers,
        )
        summary = run_sweep(cfg)
        path = args.out_dir / f"{args.spec.stem}_{decoder}.csv"
        summary.write(path)
        print(f"# {decoder} -> {path}")
        print(summary.to_csv(), end="")


if __name__ == "__main__":
    main()
