"""Write the prior and posterior curves of the GP demo as CSV.

    python scripts/gp_demo_curves.py --output curves.csv --num 201
"""
import argparse
import csv
import sys
from dataclasses import dataclass, replace

import numpy as np

from kernelcat.examples import load_example
from kernelcat.gaussian import gp_curve


@dataclass(frozen=True)
class CurveConfig:
    start: float = 0.0
    stop: float = 10.0
    num: int = 101
    method: str = "batch"


def curves(config: CurveConfig):
    gp = load_example("gp-demo").objects["gp"]
    grid = np.linspace(config.start, config.stop, config.num)
    for panel, state in (("prior", replace(gp, data=())), ("posterior", gp)):
        for z, mean, lower, upper in gp_curve(state, grid, config.method):
            yield panel, z, mean, lower, upper


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--output", help="CSV path (default stdout)")
    parser.add_argument("--num", type=int, default=CurveConfig.num)
    parser.add_argument("--method", choices=("batch", "recursive"), default=CurveConfig.method)
    args = parser.parse_args(argv)
    config = CurveConfig(num=args.num, method=args.method)
    out = open(args.output, "w", newline="") if args.output else sys.stdout
    try:
        writer = csv.writer(out, lineterminator="\n")
        writer.writerow(["panel", "z", "mean", "lower", "upper"])
        for panel, *row in curves(config):
            writer.writerow([panel] + [f"{v:.12g}" for v in row])
    finally:
        if args.output:
            out.close()


if __name__ == "__main__":
    main()
