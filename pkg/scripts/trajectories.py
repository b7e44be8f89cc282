"""Camouflage trust trajectories under Models C and E (60 good, 40 camouflage,
3 pre-trusted, f = 0.4, eta = 0.5)."""

import csv
from collections import defaultdict

import numpy as np

from _common import overrides, parser
from trustlab.experiments import run_preset


def main():
    args = parser(__doc__, seeds=5).parse_args()
    out = f"{args.out_dir}/trajectories"
    paths = run_preset("trajectories", overrides(args.set), args.seed, out, args.seeds, args.jobs)
    series = defaultdict(lambda: defaultdict(list))
    with open(f"{out}/trajectories.csv") as fh:
        rows = csv.DictReader(line for line in fh if not line.startswith("#"))
        for r in rows:
            if r["role"] == "Camouflage":
                series[r["label"]][int(r["round"])].append(float(r["score"]))
    print(f"{'label':28s} {'round 2':>10s} {'round 10':>10s} {'final':>10s}")
    for label, by_round in series.items():
        last = max(by_round)
        print(f"{label:28s} {np.mean(by_round[2]):10.5f} {np.mean(by_round[10]):10.5f} "
              f"{np.mean(by_round[last]):10.5f}")
    for p in paths:
        print(p)


if __name__ == "__main__":
    main()
