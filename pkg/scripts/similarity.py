"""Pairwise feedback similarity on the synthetic graph across eta."""

from _common import overrides, parser
from trustlab.experiments import read_csv, run_preset


def main():
    args = parser(__doc__, seeds=3).parse_args()
    out = f"{args.out_dir}/similarity"
    paths = run_preset("similarity-heatmap", overrides(args.set), args.seed, out, args.seeds)
    _, rows = read_csv(paths[0])
    for r in rows:
        print(f"seed={r['seed']} eta={r['eta']} good-good={float(r['mean_good_good']):.4f} "
              f"cross={float(r['mean_cross']):.4f}")


if __name__ == "__main__":
    main()
