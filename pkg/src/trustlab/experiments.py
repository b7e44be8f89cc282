"""Experiment presets, the synthetic similarity study, config files and CSV output.

Every CSV starts with ``#`` metadata lines (artifact version, preset, seed,
config digest) followed by a header row, so a file identifies the run that
produced it.
"""

from __future__ import annotations

import configparser
import csv
import hashlib
import json
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, fields, is_dataclass
from pathlib import Path

import numpy as np

from . import __version__
from .attack_cost import (
    ETA_DEFAULT,
    GAMMA_DEFAULT,
    T_M_DEFAULT,
    CostParams,
    PreconditionViolated,
    cost_for,
)
from .local_trust import similarity_matrix
from .metrics import builtin_metrics
from .simulation import ExperimentReport, SimulationConfig, run_experiment
from .threats import Model, Role, ThreatModelConfig


class UnknownPreset(KeyError):
    pass


class SchemaViolation(ValueError):
    pass


# --- CSV output ------------------------------------------------------------

def _plain(obj):
    if is_dataclass(obj):
        return {k: _plain(v) for k, v in asdict(obj).items()}
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if hasattr(obj, "value"):
        return obj.value
    return obj


def config_digest(cfg) -> str:
    blob = json.dumps(_plain(cfg), sort_keys=True, default=str)
    return hashlib.sha256(blob.encode()).hexdigest()[:16]


def write_csv(path, header, rows, *, seed, config, preset: str = "", notes=()) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        fh.write(f"# trustlab {__version__}\n")
        if preset:
            fh.write(f"# preset: {preset}\n")
        fh.write(f"# seed: {seed}\n")
        fh.write(f"# config_digest: {config_digest(config)}\n")
        for note in notes:
            fh.write(f"# {note}\n")
        w = csv.writer(fh)
        w.writerow(header)
        w.writerows(rows)
    return path


def read_csv(path) -> tuple[dict, list[dict]]:
    """Return (metadata, rows) from a file written by ``write_csv``."""
    meta, body = {}, []
    with open(path, newline="") as fh:
        for line in fh:
            if line.startswith("#"):
                key, _, val = line[1:].strip().partition(": ")
                meta[key] = val
            else:
                body.append(line)
    return meta, list(csv.DictReader(body))


# --- config files ----------------------------------------------------------

_SIM_KEYS = {f.name: f.type for f in fields(SimulationConfig) if f.name != "threat"}
_THREAT_KEYS = {"model", "f", "eta", "gamma", "n_type_b", "n_type_d", "chain"}


def _coerce(value: str, kind):
    kind = str(kind)
    if "int" in kind:
        return int(value)
    if "float" in kind:
        return float(value)
    return value.strip()


def config_from_mapping(items: dict) -> SimulationConfig:
    unknown = set(items) - set(_SIM_KEYS) - _THREAT_KEYS
    if unknown:
        raise SchemaViolation(f"unknown config keys: {sorted(unknown)}")
    sim = {k: _coerce(v, _SIM_KEYS[k]) for k, v in items.items() if k in _SIM_KEYS}
    t = {k: v for k, v in items.items() if k in _THREAT_KEYS}
    threat = ThreatModelConfig(
        Model(t.get("model", "A").strip().upper()),
        f=float(t.get("f", 0.4)), eta=float(t.get("eta", 0.0)), gamma=float(t.get("gamma", 0.0)),
        n_type_b=int(t.get("n_type_b", 0)), n_type_d=int(t.get("n_type_d", 0)),
        chain=tuple(int(x) for x in str(t.get("chain", "")).replace(",", " ").split()),
    )
    return SimulationConfig(threat=threat, **sim)


def load_config(path) -> list[tuple[str, SimulationConfig]]:
    """One experiment per INI section; keys in [DEFAULT] apply to all."""
    parser = configparser.ConfigParser()
    with open(path) as fh:
        parser.read_file(fh)
    sections = parser.sections() or ["DEFAULT"]
    return [(name, config_from_mapping(dict(parser[name]))) for name in sections]


# --- simulation outputs ----------------------------------------------------

def _run(cfg: SimulationConfig) -> ExperimentReport:
    return run_experiment(cfg)


def run_many(cfgs, jobs: int = 1) -> list[ExperimentReport]:
    """Independent engine instances, optionally across processes; results come
    back in submission order."""
    cfgs = list(cfgs)
    if jobs <= 1 or len(cfgs) <= 1:
        return [run_experiment(c) for c in cfgs]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(_run, cfgs))


def summary_row(label: str, rep: ExperimentReport) -> list:
    c = rep.config
    t = c.threat
    return [label, c.metric if isinstance(c.metric, str) else c.metric.name, t.model.value,
            c.n_good, c.n_malicious, c.n_pretrusted, t.f, t.eta, t.gamma, t.n_type_b, t.n_type_d,
            c.transactions, c.seed, repr(rep.failed_fraction), rep.rounds, all(rep.converged)]


SUMMARY_HEADER = ["label", "metric", "model", "n_good", "n_malicious", "n_pretrusted", "f", "eta",
                  "gamma", "n_type_b", "n_type_d", "transactions", "seed", "failed_fraction",
                  "rounds", "converged"]


def write_reports(out_dir, labelled, *, seed, preset: str = "", config=None) -> list[Path]:
    out = Path(out_dir)
    config = config if config is not None else [r.config for _, r in labelled]
    paths = [write_csv(out / "summary.csv", SUMMARY_HEADER,
                       [summary_row(lbl, r) for lbl, r in labelled],
                       seed=seed, config=config, preset=preset)]
    traj, serv = [], []
    for lbl, r in labelled:
        for rnd, row in enumerate(r.trajectories, start=1):
            for pid, score in enumerate(row):
                traj.append([lbl, r.config.seed, pid, r.roles[pid].value, rnd, repr(float(score))])
        for group, (auth, inauth) in r.services.items():
            serv.append([lbl, r.config.seed, group, auth, inauth])
    paths.append(write_csv(out / "trajectories.csv",
                           ["label", "seed", "participant", "role", "round", "score"], traj,
                           seed=seed, config=config, preset=preset))
    paths.append(write_csv(out / "services.csv",
                           ["label", "seed", "group", "authentic", "inauthentic"], serv,
                           seed=seed, config=config, preset=preset))
    return paths


# --- synthetic similarity study --------------------------------------------

@dataclass(frozen=True)
class SyntheticGraphSpec:
    n_regular: int = 100
    n_malicious: int = 30
    eta: float = 0.5
    zipf_s: float = 1.0
    regular_low: float = 0.85     # Zipf weights are mapped into [regular_low, 1]
    to_malicious: tuple[float, float] = (0.85, 1.0)
    spread: float = 0.05          # malicious -> regular ratings in [eta - spread, eta + spread]

    def __post_init__(self):
        if self.n_regular < 2 or self.n_malicious < 0:
            raise SchemaViolation("need >= 2 regular nodes")
        if not 0 <= self.regular_low <= 1:
            raise SchemaViolation("regular_low must lie in [0, 1]")


def synthetic_ratings(spec: SyntheticGraphSpec, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    """Rating values and edge mask for the synthetic graph (regular ids first)."""
    nr, nm = spec.n_regular, spec.n_malicious
    n = nr + nm
    vals = np.zeros((n, n))
    mask = np.zeros((n, n), dtype=bool)
    ranks = np.arange(1, nr, dtype=float)
    zipf = ranks ** -spec.zipf_s
    zipf /= zipf.max()
    for v in range(nr):
        targets = [x for x in range(nr) if x != v]
        w = zipf[rng.permutation(nr - 1)]
        vals[v, targets] = spec.regular_low + (1 - spec.regular_low) * w
        mask[v, targets] = True
    lo, hi = spec.to_malicious
    if nm:
        vals[:nr, nr:] = rng.uniform(lo, hi, size=(nr, nm))
        mask[:nr, nr:] = True
        vals[nr:, :nr] = np.clip(rng.uniform(spec.eta - spec.spread, spec.eta + spec.spread,
                                             size=(nm, nr)), 0.0, 1.0)
        mask[nr:, :nr] = True
        # colluders rate one another at 1.0
        vals[nr:, nr:] = 1.0
        mask[nr:, nr:] = True
        np.fill_diagonal(mask[nr:, nr:], False)
        np.fill_diagonal(vals[nr:, nr:], 0.0)
    return vals, mask


def similarity_heatmap(spec: SyntheticGraphSpec, seed: int) -> np.ndarray:
    rng = np.random.default_rng(np.random.SeedSequence([seed, int(round(spec.eta * 1e6))]))
    vals, mask = synthetic_ratings(spec, rng)
    return similarity_matrix(vals, mask)


def group_means(sim: np.ndarray, n_regular: int) -> dict[str, float]:
    nr = n_regular
    gg = sim[:nr, :nr]
    off = ~np.eye(nr, dtype=bool)
    mm = sim[nr:, nr:]
    return {
        "good_good": float(gg[off].mean()),
        "cross": float(sim[nr:, :nr].mean()) if sim.shape[0] > nr else float("nan"),
        "mal_mal": float(mm[~np.eye(len(mm), dtype=bool)].mean()) if len(mm) > 1 else float("nan"),
    }


# --- presets ---------------------------------------------------------------

FIG_METRICS = ["BetaTrust", "EigenTrust", "ServiceTrust", "ServiceTrust++"]
TRAJ_METRICS = ["EigenTrust", "PeerTrustTVM", "ServiceTrust", "ServiceTrust++"]
ALL_METRICS = [m.name for m in builtin_metrics()]

PRESETS = {
    "cost-curves": {"n_h": [5, 10, 15], "n_h_ab": list(range(1, 20)), "i_h_max": 19,
                    "t_g": [0.75, 0.85, 0.95], "t_m": T_M_DEFAULT, "eta": ETA_DEFAULT,
                    "gamma": GAMMA_DEFAULT},
    "smp-behavior": {"n_good": 60, "n_malicious": 40, "n_pretrusted": 3, "transactions": 1000,
                     "f": 0.4, "eta": 0.2, "gamma": 0.2, "models": ["C", "D", "E", "F"],
                     "metrics": FIG_METRICS},
    "trajectories": {"n_good": 60, "n_malicious": 40, "n_pretrusted": 3, "transactions": 1000,
                     "f": 0.4, "eta": 0.5, "models": ["C", "E"], "metrics": TRAJ_METRICS},
    "failed-fraction": {"n_total": 100, "n_pretrusted": 3, "transactions": 3000,
                        "shares": [0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6],
                        "probs": [0.2, 0.4, 0.6, 0.8], "f": 0.4,
                        "splits": ["10:30", "20:20", "30:10"],
                        "models": ["A", "B", "C", "D", "E", "F"], "metrics": ALL_METRICS},
    "similarity-heatmap": {"n_regular": 100, "n_malicious": 30, "etas": [0.3, 0.5, 0.7, 0.9],
                           "zipf_s": 1.0, "regular_low": 0.85},
}


def preset_params(preset: str, overrides: dict | None = None) -> dict:
    if preset not in PRESETS:
        raise UnknownPreset(preset)
    params = {k: (list(v) if isinstance(v, list) else v) for k, v in PRESETS[preset].items()}
    for key, raw in (overrides or {}).items():
        if key not in params:
            raise SchemaViolation(f"{preset} has no parameter {key!r}; known: {sorted(params)}")
        params[key] = _parse_override(raw, params[key], key)
    return params


def _parse_override(raw, template, key):
    if not isinstance(raw, str):
        return raw
    try:
        if isinstance(template, list):
            items = [s for s in raw.split(",") if s.strip()]
            kind = type(template[0]) if template else str
            return [kind(s.strip()) for s in items]
        return type(template)(raw)
    except ValueError:
        raise SchemaViolation(f"bad value {raw!r} for {key}") from None


def _split(s: str) -> tuple[int, int]:
    b, d = s.split(":")
    return int(b), int(d)


def failed_fraction_configs(params: dict, seed: int) -> list[tuple[str, SimulationConfig]]:
    """The six sweeps of the failed-fraction study, one config per metric."""
    n, k, tx = params["n_total"], params["n_pretrusted"], params["transactions"]
    out = []

    def add(label, n_mal, threat):
        for metric in params["metrics"]:
            cfg = SimulationConfig(n_good=n - n_mal, n_malicious=n_mal, n_pretrusted=k,
                                   transactions=tx, metric=metric, threat=threat, seed=seed)
            out.append((f"{label}|{metric}", cfg))

    for model in map(Model, params["models"]):
        if model in (Model.A, Model.B):
            for share in params["shares"]:
                add(f"{model.value}|share={share}", int(round(n * share)), ThreatModelConfig(model))
        elif model is Model.C:
            for f in params["probs"]:
                add(f"C|f={f}", 40, ThreatModelConfig(model, f=f))
        elif model is Model.D:
            for split in params["splits"]:
                b, d = _split(split)
                add(f"D|split={split}", b + d, ThreatModelConfig(model, n_type_b=b, n_type_d=d))
        elif model is Model.E:
            for eta in params["probs"]:
                add(f"E|eta={eta}", 40, ThreatModelConfig(model, f=params["f"], eta=eta))
        else:
            for gamma in params["probs"]:
                add(f"F|gamma={gamma}", 40, ThreatModelConfig(model, gamma=gamma, n_type_b=20, n_type_d=20))
    return out


def _population_threat(model: Model, params: dict) -> ThreatModelConfig:
    if model in (Model.D, Model.F):
        half = params["n_malicious"] // 2
        return ThreatModelConfig(model, gamma=params.get("gamma", 0.0) if model is Model.F else 0.0,
                                 n_type_b=params["n_malicious"] - half, n_type_d=half)
    return ThreatModelConfig(model, f=params.get("f", 0.4),
                             eta=params.get("eta", 0.0) if model is Model.E else 0.0)


def population_configs(params: dict, seed: int) -> list[tuple[str, SimulationConfig]]:
    out = []
    for model in map(Model, params["models"]):
        threat = _population_threat(model, params)
        for metric in params["metrics"]:
            out.append((f"{model.value}|{metric}", SimulationConfig(
                n_good=params["n_good"], n_malicious=params["n_malicious"],
                n_pretrusted=params["n_pretrusted"], transactions=params["transactions"],
                metric=metric, threat=threat, seed=seed)))
    return out


def _cost_rows(params: dict):
    rows = []
    for model in Model:
        if model in (Model.A, Model.B):
            pts = [CostParams(n_h, 0, t_g, params["t_m"]) for t_g in params["t_g"] for n_h in params["n_h_ab"]]
        else:
            pts = [CostParams(n_h, i_h, eta=params["eta"], gamma=params["gamma"])
                   for n_h in params["n_h"] for i_h in range(1, params["i_h_max"] + 1)]
        for p in pts:
            try:
                rows.append(cost_for(model, p).row())
            except PreconditionViolated:
                continue
    return rows


def run_preset(preset: str, overrides: dict | None = None, seed: int = 0, out_dir=".",
               seeds: int = 1, jobs: int = 1) -> list[Path]:
    params = preset_params(preset, overrides)
    out = Path(out_dir)
    cfg = {"preset": preset, "params": params, "seeds": seeds}

    if preset == "cost-curves":
        rows = _cost_rows(params)
        header = list(rows[0])
        paths = []
        for model in Model:
            sel = [[r[h] for h in header] for r in rows if r["model"] == model.value]
            notes = ["rows violating a model precondition (E: I_H > 3*N_H*eta) are omitted"] \
                if model is Model.E else ()
            paths.append(write_csv(out / f"cost_{model.value}.csv", header, sel, seed=seed,
                                   config=cfg, preset=preset, notes=notes))
        return paths

    if preset == "similarity-heatmap":
        paths, summary = [], []
        for s in range(seed, seed + seeds):
            for eta in params["etas"]:
                spec = SyntheticGraphSpec(params["n_regular"], params["n_malicious"], eta,
                                          params["zipf_s"], params["regular_low"])
                sim = similarity_heatmap(spec, s)
                g = group_means(sim, spec.n_regular)
                summary.append([s, eta, g["good_good"], g["cross"], g["mal_mal"]])
                paths.append(write_csv(
                    out / f"similarity_eta{eta}_seed{s}.csv",
                    ["row"] + [str(j) for j in range(sim.shape[0])],
                    [[i] + [repr(float(x)) for x in r] for i, r in enumerate(sim)],
                    seed=s, config={**cfg, "spec": spec}, preset=preset,
                    notes=["malicious-to-malicious edges are chain ratings at 1.0"]))
        paths.insert(0, write_csv(out / "similarity_summary.csv",
                                  ["seed", "eta", "mean_good_good", "mean_cross", "mean_mal_mal"],
                                  summary, seed=seed, config=cfg, preset=preset))
        return paths

    builder = failed_fraction_configs if preset == "failed-fraction" else population_configs
    labelled_cfgs = [(lbl, c) for s in range(seed, seed + seeds) for lbl, c in builder(params, s)]
    reports = run_many([c for _, c in labelled_cfgs], jobs)
    labelled = [(lbl, r) for (lbl, _), r in zip(labelled_cfgs, reports)]
    return write_reports(out, labelled, seed=seed, preset=preset, config=cfg)


def camouflage_mean_trajectory(rep: ExperimentReport) -> np.ndarray:
    ids = rep.ids(Role.CAMOUFLAGE)
    return rep.trajectories[:, ids].mean(axis=1)


def default_jobs() -> int:
    return max(1, min(8, (os.cpu_count() or 1)))
