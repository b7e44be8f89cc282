import argparse

from trustlab.experiments import default_jobs


def parser(description: str, seeds: int = 1) -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(description=description)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--seeds", type=int, default=seeds)
    p.add_argument("--out-dir", default="out")
    p.add_argument("--jobs", type=int, default=default_jobs())
    p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE")
    return p


def overrides(items):
    return dict(item.split("=", 1) for item in items)
