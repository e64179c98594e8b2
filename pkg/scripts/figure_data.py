"""Write the data behind every AEP figure into one CSV per figure.

Usage: python3 scripts/figure_data.py OUTDIR [--samples N]

The classical-model identifications and the swept values are not all stated
with the figures; the sets below are representative choices.
"""

import argparse
from pathlib import Path

from kappamu_aep.cli import main

SWEEP = "0:30:2.5"

FIGURES = {
    "mpsk_weak_los": ["aep-sweep", "--scheme", "mpsk:4", "--kappa", "1", "--mu", "0.5,1,2,3", "--m", "1.3"],
    "mpsk_strong_los": ["aep-sweep", "--scheme", "mpsk:4", "--kappa", "10", "--mu", "2", "--m", "0.5,1,2,4"],
    "mpsk_nlos": ["aep-sweep", "--scheme", "mpsk:4", "--kappa", "0", "--mu", "1,2,3", "--m", "1,2,3"],
    "dqpsk_weak_los": ["aep-sweep", "--scheme", "dqpsk", "--kappa", "1", "--mu", "1,2,3", "--m", "1.3"],
    "dqpsk_strong_los": ["aep-sweep", "--scheme", "dqpsk", "--kappa", "10", "--mu", "2.3",
                         "--m", "1,2,4.7", "--max-terms", "2000"],
    "truncation": ["truncation", "--kappa", "1,5", "--mu", "2.3", "--m", "4.7", "--gamma-bar-db", "10"],
    "diversity_mpsk": ["diversity", "--scheme", "mpsk:4", "--kappa", "5", "--mu", "1,2,3", "--m", "4.7",
                       "--grid", "10:60:5"],
    "diversity_dqpsk": ["diversity", "--scheme", "dqpsk", "--kappa", "5", "--mu", "1,2,3", "--m", "4.7",
                        "--grid", "10:60:5"],
    "chi": ["chi", "--grid", "0.05:12:0.05", "--linear"],
    "relerr": ["relerr", "--grid", "0.5:12:0.25"],
}


def run() -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("outdir", type=Path)
    ap.add_argument("--samples", type=int, default=0, help="Monte Carlo samples per sweep point")
    args = ap.parse_args()
    args.outdir.mkdir(parents=True, exist_ok=True)
    for name, argv in FIGURES.items():
        argv = list(argv)
        if argv[0] == "aep-sweep":
            argv += ["--grid", SWEEP, "--samples", str(args.samples)]
        code = main(argv + ["--out", str(args.outdir / f"{name}.csv")])
        print(f"{name}: {'ok' if code == 0 else f'exit {code}'}")
        if code:
            return code
    return 0


if __name__ == "__main__":
    raise SystemExit(run())
