"""Failed-transaction fraction of every reference metric across the six
threat-model sweeps.  The full sweep is 232 configurations per seed; use
--set to narrow it, e.g. --set models=C --set probs=0.4."""

from collections import defaultdict

import numpy as np

from _common import overrides, parser
from trustlab.experiments import read_csv, run_preset


def main():
    args = parser(__doc__, seeds=5).parse_args()
    out = f"{args.out_dir}/failed-fraction"
    paths = run_preset("failed-fraction", overrides(args.set), args.seed, out, args.seeds, args.jobs)
    _, rows = read_csv(paths[0])
    ff = defaultdict(list)
    for r in rows:
        ff[r["label"]].append(float(r["failed_fraction"]))
    for label in sorted(ff):
        print(f"{label:40s} {np.mean(ff[label]):.4f}")


if __name__ == "__main__":
    main()
