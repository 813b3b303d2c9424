#!/usr/bin/env python3
"""Rerun every experiment at desk scale and render the figures.

Each experiment lands in <root>/<name>/ with its CSVs, a manifest, and
SVG plots. Everything is seeded, so two invocations produce identical
bytes (timestamps live only in the manifests).
"""

import argparse
import os
import sys

from inertia.cli import main as run_cli

EXPERIMENTS = [
    # (name, argv, [(csv, svg, xy), ...])
    ("conserve", ["conserve"],
     [("conserve.csv", "conserve.svg", None)]),
    ("phase", ["phase"],
     [("phase_g0.csv", "orbit.svg", "w0:v0"),
      ("phase_g0.4.csv", "spiral.svg", "w0:v0")]),
    ("sweep", ["sweep"],
     [("sweep.csv", "sweep.svg", "gamma:gamma_hat")]),
    ("traj2d", ["traj2d", "--gamma", "0"],
     [(f"traj2d_init{i}.csv", f"orbit2d_{i}.svg", "w0:w1") for i in range(3)]),
    ("traj2d-damped", ["traj2d", "--gamma", "0.4"],
     [(f"traj2d_init{i}.csv", f"spiral2d_{i}.svg", "w0:w1") for i in range(3)]),
    ("discrete", ["discrete", "--eta-halving"],
     [("discrete.csv", "discrete.svg", "step:inertia")]),
    ("stochastic-white", ["stochastic", "--members", "200"],
     [("stochastic.csv", "decay.svg", "t:mean_I")]),
    ("stochastic-corr", ["stochastic", "--members", "200", "--noise", "ou:0.5"],
     [("stochastic.csv", "decay.svg", "t:mean_I")]),
]


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--root", default="runs", help="output root directory")
    args = parser.parse_args()

    for name, argv, plots in EXPERIMENTS:
        out_dir = os.path.join(args.root, name)
        print(f"== {name}: inertia {' '.join(argv)}")
        code = run_cli(argv + ["--out-dir", out_dir])
        if code != 0:
            print(f"{name} failed with exit code {code}", file=sys.stderr)
            return code
        for csv, svg, xy in plots:
            render = ["render", "--input", os.path.join(out_dir, csv),
                      "--out", os.path.join(out_dir, svg)]
            if xy:
                render += ["--xy", xy]
            code = run_cli(render)
            if code != 0:
                print(f"rendering {csv} failed with exit code {code}", file=sys.stderr)
                return code
    print(f"all experiments written under {args.root}/")
    return 0


if __name__ == "__main__":
    sys.exit(main())
