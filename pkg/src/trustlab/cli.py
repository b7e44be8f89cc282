"""Command-line entry point: ``trustlab <subcommand> ...`` or ``python -m trustlab``."""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace
from pathlib import Path

from .attack_cost import (
    PreconditionViolated,
    closed_form_cost,
    grid,
    verify_cost_oracle,
)
from .experiments import (
    PRESETS,
    SchemaViolation,
    SyntheticGraphSpec,
    UnknownPreset,
    group_means,
    load_config,
    run_many,
    run_preset,
    similarity_heatmap,
    write_csv,
    write_reports,
)
from .simulation import ConfigError
from .threats import Model


def _floats(s: str) -> list[float]:
    return [float(x) for x in s.split(",") if x.strip()]


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="trustlab", description=__doc__)
    p.add_argument("--seed", type=int, default=None,
                   help="base seed (default: the config's seed for simulate, else 0)")
    p.add_argument("--seeds", type=int, default=1, help="run seeds seed..seed+N-1")
    p.add_argument("--out-dir", default="out", help="directory for CSV output")
    p.add_argument("--jobs", type=int, default=1, help="worker processes for sweeps")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("simulate", help="run every section of an INI config")
    s.add_argument("config")

    c = sub.add_parser("cost", help="closed-form attack cost")
    c.add_argument("model", choices=[m.value for m in Model])
    c.add_argument("--n-h", type=int, help="honest raters (omit to sweep the table grid)")
    c.add_argument("--i-h", type=int, default=0)
    c.add_argument("--t-g", type=float, default=0.85)
    c.add_argument("--t-m", type=float, default=0.35)
    c.add_argument("--eta", type=float, default=0.2)
    c.add_argument("--gamma", type=float, default=0.2)
    c.add_argument("--n-b", type=int)

    m = sub.add_parser("similarity", help="pairwise similarity on the synthetic graph")
    m.add_argument("--etas", type=_floats, default=[0.3, 0.5, 0.7, 0.9])
    m.add_argument("--n-regular", type=int, default=100)
    m.add_argument("--n-malicious", type=int, default=30)
    m.add_argument("--zipf-s", type=float, default=1.0)

    r = sub.add_parser("preset", help="run a named experiment preset")
    r.add_argument("name", choices=sorted(PRESETS))
    r.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                   help="override a preset parameter (lists are comma separated)")

    sub.add_parser("verify", help="check every closed-form cost against the oracle")
    return p


def _cmd_simulate(args) -> int:
    cfgs, labels = [], []
    for name, cfg in load_config(args.config):
        base = cfg.seed if args.seed is None else args.seed
        for seed in range(base, base + args.seeds):
            cfgs.append(replace(cfg, seed=seed))
            labels.append(name)
    reports = run_many(cfgs, args.jobs)
    for lbl, rep in zip(labels, reports):
        print(f"{lbl}\tseed={rep.config.seed}\tfailed_fraction={rep.failed_fraction:.4f}")
    write_reports(args.out_dir, list(zip(labels, reports)), seed=cfgs[0].seed,
                  config={"file": Path(args.config).read_text(), "seeds": args.seeds})
    return 0


def _cmd_cost(args) -> int:
    if args.n_h is not None:
        rep = closed_form_cost(args.model, args.n_h, args.i_h, args.t_g, args.t_m,
                               args.eta, args.gamma, args.n_b)
        for k, v in rep.row().items():
            print(f"{k}\t{v}")
        for k, v in rep.raw.items():
            print(f"raw_{k}\t{v!r}")
        return 0
    rows = []
    for model, p in grid([args.model]):
        rows.append(closed_form_cost(model, p.n_h, p.i_h, p.t_g, args.t_m, args.eta,
                                     args.gamma, args.n_b).row())
    header = list(rows[0])
    path = write_csv(Path(args.out_dir) / f"cost_{args.model}.csv", header,
                     [[r[h] for h in header] for r in rows], seed=args.seed, config=vars(args))
    print(f"wrote {len(rows)} rows to {path}")
    return 0


def _cmd_similarity(args) -> int:
    rows = []
    for seed in range(args.seed, args.seed + args.seeds):
        for eta in args.etas:
            spec = SyntheticGraphSpec(args.n_regular, args.n_malicious, eta, args.zipf_s)
            sim = similarity_heatmap(spec, seed)
            g = group_means(sim, args.n_regular)
            rows.append([seed, eta, g["good_good"], g["cross"], g["mal_mal"]])
            write_csv(Path(args.out_dir) / f"similarity_eta{eta}_seed{seed}.csv",
                      ["row"] + [str(j) for j in range(sim.shape[0])],
                      [[i] + [repr(float(x)) for x in r] for i, r in enumerate(sim)],
                      seed=seed, config=spec)
            print(f"seed={seed}\teta={eta}\tgood_good={g['good_good']:.4f}\tcross={g['cross']:.4f}")
    write_csv(Path(args.out_dir) / "similarity_summary.csv",
              ["seed", "eta", "mean_good_good", "mean_cross", "mean_mal_mal"], rows,
              seed=args.seed, config=vars(args))
    return 0


def _cmd_preset(args) -> int:
    overrides = {}
    for item in args.set:
        key, sep, val = item.partition("=")
        if not sep:
            raise SchemaViolation(f"--set expects KEY=VALUE, got {item!r}")
        overrides[key.strip()] = val
    paths = run_preset(args.name, overrides, seed=args.seed, out_dir=args.out_dir,
                       seeds=args.seeds, jobs=args.jobs)
    for p in paths:
        print(p)
    return 0


def _cmd_verify(args) -> int:
    refuted = 0
    total = 0
    for model, p in grid():
        res = verify_cost_oracle(model, p)
        total += 1
        if not res.confirmed:
            refuted += 1
            print(f"REFUTED {model.value} {p}: {res.detail}")
    print(f"{total - refuted}/{total} grid points confirmed")
    return 1 if refuted else 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command != "simulate" and args.seed is None:
        args.seed = 0
    handlers = {"simulate": _cmd_simulate, "cost": _cmd_cost, "similarity": _cmd_similarity,
                "preset": _cmd_preset, "verify": _cmd_verify}
    try:
        return handlers[args.command](args)
    except (SchemaViolation, UnknownPreset, ConfigError, PreconditionViolated, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
