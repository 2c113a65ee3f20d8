#!/usr/bin/env python3
"""Train the four models on the bundled synthetic tension data and write the error table."""
import argparse
import json
import logging

from tsgp.benchmark import bundled_config, run_benchmark
from tsgp.model import FitConfig


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--config", help="generator/fit JSON (default: bundled)")
    ap.add_argument("--out-dir", default="benchmark_out")
    ap.add_argument("--ood", action="store_true", help="also score compression and shear")
    ap.add_argument("--seed", type=int, default=42)
    args = ap.parse_args()
    logging.basicConfig(level=logging.WARNING)

    cfg = bundled_config()
    if args.config:
        with open(args.config) as fh:
            cfg = json.load(fh)
    fit_cfg = FitConfig.from_dict(cfg.get("fit", {}))
    fit_cfg.seed = args.seed
    paths = ("tension", "compression", "shear") if args.ood else ("tension",)
    result = run_benchmark(cfg, paths, fit_cfg)
    result.write(args.out_dir)
    print(result.text())
    print("training seconds: " + ", ".join(f"{k} {v:.2f}" for k, v in result.timings.items()))


if __name__ == "__main__":
    main()
