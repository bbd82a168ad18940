#!/usr/bin/env python3
# scan_discriminant.py
# Usage: ./scan_discriminant.py <beta> <lambda>
#    [--d 0.22]
#    [--r-min 1e-10]
#    [--r-max 1e-2]
#    [--points 60]
# ruff: noqa: T201
"""Print Delta(r) / r along the H_hat singularity branch as CSV."""

from __future__ import annotations

import argparse
import sys

import numpy as np

from reeftip.exceptions import ReefTipError
from reeftip.folded import critical_rate, discriminant, relevant_singularity
from reeftip.models import ModelParams


def main(argv: list[str]) -> int:
    """Scan the scaled discriminant over log-spaced ramp rates."""
    p = argparse.ArgumentParser()
    p.add_argument("beta", type=float)
    p.add_argument("lam", type=float)
    p.add_argument("--d", type=float, default=0.22)
    p.add_argument("--r-min", dest="r_min", type=float, default=1e-10)
    p.add_argument("--r-max", dest="r_max", type=float, default=1e-2)
    p.add_argument("--points", type=int, default=60)
    args = p.parse_args(argv)
    if not 0 < args.r_min < args.r_max <= 0.1:  # noqa: PLR2004
        print("need 0 < r-min < r-max <= 0.1", file=sys.stderr)
        return 2

    try:
        params = ModelParams(lam=args.lam, beta=args.beta, d=args.d)
        r_crit = critical_rate(params)
        print(f"# r_crit={r_crit if r_crit is not None else 'none'}")
        print("r,delta_over_r,kind")
        for r in np.geomspace(args.r_min, args.r_max, args.points):
            scaled = discriminant(params, float(r)) / r
            point = relevant_singularity(params, float(r))
            kind = point.kind.value if point is not None else ""
            print(f"{r:.6e},{scaled:.9e},{kind}")
    except ReefTipError as err:
        print(f"error: {err}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    raise SystemExit(main(sys.argv[1:]))
