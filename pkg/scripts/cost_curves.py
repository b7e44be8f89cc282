"""Closed-form attack costs over the parameter grid, one CSV per threat model,
followed by the oracle check of every point."""

from _common import overrides, parser
from trustlab.attack_cost import grid, verify_cost_oracle
from trustlab.experiments import read_csv, run_preset


def main():
    args = parser(__doc__).parse_args()
    out = f"{args.out_dir}/cost-curves"
    for path in run_preset("cost-curves", overrides(args.set), args.seed, out):
        _, rows = read_csv(path)
        print(f"{path}: {len(rows)} rows")
    results = [verify_cost_oracle(m, p) for m, p in grid()]
    print(f"oracle: {sum(r.confirmed for r in results)}/{len(results)} confirmed")


if __name__ == "__main__":
    main()
