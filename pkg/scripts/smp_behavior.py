"""Strategic malicious behaviour under Models C-F for the four comparison metrics."""

from _common import overrides, parser
from trustlab.experiments import read_csv, run_preset


def main():
    args = parser(__doc__).parse_args()
    out = f"{args.out_dir}/smp-behavior"
    paths = run_preset("smp-behavior", overrides(args.set), args.seed, out, args.seeds, args.jobs)
    _, rows = read_csv(paths[0])
    for r in rows:
        print(f"{r['label']:24s} seed={r['seed']} failed_fraction={float(r['failed_fraction']):.4f}")


if __name__ == "__main__":
    main()
