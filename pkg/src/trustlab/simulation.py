"""Agent-based transaction engine.

Randomness comes from one seed, split into four independent streams so the
arrival schedule (client and responders) is identical for every metric run
with the same seed:

    arrivals   client id, then responder set
    selection  one draw per regular transaction
    service    one draw per transaction
    rating     one draw per transaction
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .ledger import InteractionLedger, Outcome, RatingEvent
from .metrics import (
    MetricState,
    TrustMetricSpec,
    UnknownMetric,
    amend_on_bad_service,
    evaluate,
    get_metric,
    initial_state,
)
from .propagation import DEFAULT_EPS
from .threats import (
    BehaviorProfile,
    DEFAULT_NOISE,
    Model,
    Role,
    ThreatModelConfig,
    decide_rating,
    decide_service,
    wiring_edges,
)


class ConfigError(ValueError):
    pass


class EmptyCandidates(ValueError):
    pass


class UnknownParticipant(KeyError):
    pass


@dataclass(frozen=True)
class SimulationConfig:
    n_good: int = 60
    n_malicious: int = 40
    n_pretrusted: int = 3
    transactions: int = 1000
    metric: str = "EigenTrust"
    threat: ThreatModelConfig = field(default_factory=lambda: ThreatModelConfig(Model.A))
    explore_p: float = 0.10
    responders_k: int = 5
    reeval_every: int = 30
    seed: int = 0
    noise: float = DEFAULT_NOISE
    eps: float = DEFAULT_EPS

    def __post_init__(self):
        if self.n_good < 0 or self.n_malicious < 0 or self.n_good + self.n_malicious < 2:
            raise ConfigError("need at least two participants")
        if not 0 <= self.n_pretrusted <= self.n_good:
            raise ConfigError("pre-trusted participants must be good participants")
        if self.transactions < 1:
            raise ConfigError("transactions must be >= 1")
        if not 0.0 <= self.explore_p <= 1.0:
            raise ConfigError("explore_p must lie in [0, 1]")
        if self.responders_k < 1 or self.reeval_every < 1:
            raise ConfigError("responders_k and reeval_every must be >= 1")

    @property
    def n(self) -> int:
        return self.n_good + self.n_malicious


@dataclass
class ExperimentReport:
    config: SimulationConfig
    roles: list[Role]
    ledger: InteractionLedger
    failed_fraction: float
    cycle_failed: list[float]
    trajectories: np.ndarray  # rounds x participants
    services: dict[str, list[int]]
    converged: list[bool]
    thresholds: list[float | None]

    @property
    def rounds(self) -> int:
        return self.trajectories.shape[0]

    def ids(self, *roles: Role) -> list[int]:
        return [i for i, r in enumerate(self.roles) if r in roles]

    def malicious_ids(self) -> list[int]:
        return [i for i, r in enumerate(self.roles) if r is not Role.GOOD]

    def final_trust(self) -> np.ndarray:
        return self.trajectories[-1]

    def recomputed_failed_fraction(self) -> float:
        bad = sum(ev.outcome is Outcome.INAUTHENTIC for ev in self.ledger.events)
        return bad / len(self.ledger.events)


def resolve_metric(metric) -> TrustMetricSpec:
    if isinstance(metric, TrustMetricSpec):
        return metric
    try:
        return get_metric(metric)
    except UnknownMetric:
        raise ConfigError(f"unknown metric {metric!r}") from None


def select_server(candidates, trust, explore_p: float, draw: float) -> int:
    """Pick a responder: uniformly with probability ``explore_p``, otherwise
    proportionally to trust (uniformly when every candidate has zero trust).
    A single draw drives both decisions."""
    cands = list(candidates)
    if not cands:
        raise EmptyCandidates("no responders")
    k = len(cands)
    if draw < explore_p:
        return cands[min(int(draw / explore_p * k), k - 1)]
    u = (draw - explore_p) / (1.0 - explore_p)
    t = np.asarray(getattr(trust, "values", trust), dtype=float)
    w = np.maximum(t[cands], 0.0)
    total = w.sum()
    if total <= 0:
        return cands[min(int(u * k), k - 1)]
    idx = int(np.searchsorted(np.cumsum(w) / total, u, side="right"))
    return cands[min(idx, k - 1)]


def _streams(seed: int):
    return [np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(4)]


def _group(role: Role) -> str:
    return "good" if role is Role.GOOD else role.value


def run_experiment(cfg: SimulationConfig) -> ExperimentReport:
    spec = resolve_metric(cfg.metric)
    n = cfg.n
    try:
        mal_roles = cfg.threat.roles(cfg.n_malicious)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    roles = [Role.GOOD] * cfg.n_good + mal_roles
    profiles = [BehaviorProfile(r, cfg.noise if r is Role.GOOD else 0.0) for r in roles]
    wiring = wiring_edges(dict(enumerate(roles)), cfg.threat)
    k = min(cfg.responders_k, n - 1)

    arrivals, selection, service, rating = _streams(cfg.seed)
    state: MetricState = initial_state(spec, n, range(cfg.n_pretrusted), cfg.eps)
    ledger = InteractionLedger(n)

    services = {_group(r): [0, 0] for r in roles}
    trajectories, converged, thresholds, cycle_failed = [], [], [], []
    failed = cycle_bad = 0

    for tx in range(cfg.transactions):
        if tx < len(wiring):
            client, server = wiring[tx]
        else:
            client = int(arrivals.integers(n))
            picks = arrivals.choice(n - 1, size=k, replace=False)
            cands = [int(c) + (c >= client) for c in picks]
            server = select_server(cands, state.trust, cfg.explore_p, float(selection.random()))
        outcome = decide_service(profiles[server], cfg.threat, float(service.random()))
        value, tag = decide_rating(profiles[client], profiles[server], outcome, cfg.threat,
                                   float(rating.random()))
        ledger.record(RatingEvent(client, server, tx, value, outcome, tag))

        bad = outcome is Outcome.INAUTHENTIC
        services[_group(roles[server])][1 if bad else 0] += 1
        failed += bad
        cycle_bad += bad
        if bad and spec.amend and roles[client] is Role.GOOD:
            state = amend_on_bad_service(state, server)

        if (tx + 1) % cfg.reeval_every == 0:
            state = evaluate(state, ledger)
            trajectories.append(state.trust.values.copy())
            converged.append(state.trust.converged)
            thresholds.append(state.threshold)
            cycle_failed.append(cycle_bad / cfg.reeval_every)
            cycle_bad = 0

    return ExperimentReport(
        config=cfg,
        roles=roles,
        ledger=ledger,
        failed_fraction=failed / cfg.transactions,
        cycle_failed=cycle_failed,
        trajectories=np.array(trajectories).reshape(len(trajectories), n),
        services=services,
        converged=converged,
        thresholds=thresholds,
    )


def trust_trajectory(report: ExperimentReport, pid: int) -> np.ndarray:
    if not 0 <= pid < report.config.n:
        raise UnknownParticipant(pid)
    return report.trajectories[:, pid].copy()
