"""Trust metrics as (local rule, credibility, kernel) triples.

The taxonomy label is derived from, and checked against, the credibility mode
and the kernel kind.  ``builtin_metrics`` lists the eight reference metrics.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field, replace

import numpy as np

from .ledger import InteractionLedger
from .local_trust import (
    DirectTrustMatrix,
    Variant,
    exp_credibility,
    ledger_similarity_matrix,
    rater_level_matrix,
    raw_direct_trust,
    third_party_matrix,
)
from .propagation import (
    COLD_START,
    DEFAULT_EPS,
    Fixed,
    MeanNonzero,
    GlobalTrustVector,
    KernelConfig,
    KernelKind,
    PreTrustVector,
    propagate,
)


class Taxonomy(str, enum.Enum):
    RNP = "RNP"
    CNP = "CNP"
    RUDP = "RUDP"
    CUDP = "CUDP"
    RTCP = "RTCP"
    CTCP = "CTCP"
    RANDOM = "Random"


class LocalRule(str, enum.Enum):
    SUCCESS_RATIO = "SuccessRatio"
    BETA = "BetaExpectation"
    DECAYED = "Decayed"


class Credibility(str, enum.Enum):
    NONE = "None"
    RATER_LEVEL = "RaterLevel"
    PAIRWISE_SIM = "PairwiseSim"
    THIRD_PARTY_SIM = "ThirdPartySim"


_KERNEL_SUFFIX = {KernelKind.NP: "NP", KernelKind.UDTP: "UDP", KernelKind.TCTP: "TCP"}


class NotSupported(RuntimeError):
    pass


class UnknownMetric(KeyError):
    pass


@dataclass(frozen=True)
class TrustMetricSpec:
    name: str
    taxonomy: Taxonomy
    local_rule: LocalRule = LocalRule.SUCCESS_RATIO
    credibility: Credibility = Credibility.NONE
    kernel: KernelConfig = field(default_factory=lambda: KernelConfig(KernelKind.NP))
    amend: bool = False
    initial_score: float | None = None
    base_rate: float = 0.5
    # success-ratio value once failures exceed theta; 0 keeps failing pairs at zero
    success_fallback: float = 0.0
    theta: float = 0.05
    decay: float = 1.0
    # common targets needed before similarity counts as evidence
    min_common: int = 1

    def __post_init__(self):
        if self.taxonomy is Taxonomy.RANDOM:
            return
        expected = ("R" if self.credibility is Credibility.NONE else "C") + _KERNEL_SUFFIX[self.kernel.kind]
        if self.taxonomy.value != expected:
            raise ValueError(
                f"{self.name}: taxonomy {self.taxonomy.value} inconsistent with "
                f"credibility={self.credibility.value}, kernel={self.kernel.kind.value} "
                f"(expected {expected})")


@dataclass(frozen=True)
class MetricState:
    spec: TrustMetricSpec
    pretrust: PreTrustVector
    trust: GlobalTrustVector
    amended: frozenset = frozenset()
    threshold: float | None = None

    @property
    def n(self) -> int:
        return len(self.trust)


def builtin_metrics() -> list[TrustMetricSpec]:
    sr = LocalRule.SUCCESS_RATIO
    udtp = KernelConfig(KernelKind.UDTP)
    return [
        TrustMetricSpec("NoneTrust", Taxonomy.RANDOM),
        TrustMetricSpec("BetaTrust", Taxonomy.RNP, LocalRule.BETA, base_rate=0.5),
        TrustMetricSpec("AdaptiveTrust", Taxonomy.RTCP, LocalRule.DECAYED,
                        kernel=KernelConfig(KernelKind.TCTP, Fixed(0.5)),
                        amend=True, initial_score=0.5, decay=0.99),
        TrustMetricSpec("EigenTrust", Taxonomy.RUDP, sr, kernel=udtp),
        TrustMetricSpec("PeerTrustTVM", Taxonomy.CUDP, sr, Credibility.RATER_LEVEL, udtp),
        TrustMetricSpec("PeerTrustPSM", Taxonomy.CNP, sr, Credibility.THIRD_PARTY_SIM),
        TrustMetricSpec("ServiceTrust", Taxonomy.CUDP, sr, Credibility.PAIRWISE_SIM, udtp,
                        min_common=2),
        # same local pipeline as ServiceTrust; only the kernel differs
        TrustMetricSpec("ServiceTrust++", Taxonomy.CTCP, sr, Credibility.PAIRWISE_SIM,
                        KernelConfig(KernelKind.TCTP, MeanNonzero()), min_common=2),
    ]


def get_metric(name: str) -> TrustMetricSpec:
    for spec in builtin_metrics():
        if spec.name.lower() == name.lower():
            return spec
    raise UnknownMetric(name)


def initial_state(spec: TrustMetricSpec, n: int, pretrusted=(), eps: float = DEFAULT_EPS) -> MetricState:
    start = spec.initial_score if spec.initial_score is not None else 1.0 / n
    return MetricState(spec, PreTrustVector.of(n, pretrusted, eps), GlobalTrustVector(np.full(n, start)))


def direct_trust(spec: TrustMetricSpec, ledger: InteractionLedger) -> DirectTrustMatrix:
    return raw_direct_trust(ledger, spec.local_rule.value, theta=spec.theta,
                            fallback=spec.success_fallback, base_rate=spec.base_rate,
                            decay=spec.decay)


def credibility_weighted(spec: TrustMetricSpec, raw: DirectTrustMatrix, ledger: InteractionLedger,
                         trust: np.ndarray) -> DirectTrustMatrix:
    cred = spec.credibility
    if cred is Credibility.NONE:
        return raw
    if cred is Credibility.RATER_LEVEL:
        vals = rater_level_matrix(raw, trust) * raw.values
    elif cred is Credibility.PAIRWISE_SIM:
        vals = exp_credibility(ledger_similarity_matrix(ledger, min_common=spec.min_common)) * raw.values
    else:
        vals = third_party_matrix(raw, ledger_similarity_matrix(ledger, min_common=spec.min_common))
        # third-party estimates exist for every evaluator, not just raters
        return DirectTrustMatrix(vals, Variant.FCW, np.ones_like(raw.rated))
    return DirectTrustMatrix(np.clip(vals, 0.0, 1.0), Variant.FCW, raw.rated)


def one_hop_scores(spec: TrustMetricSpec, raw: DirectTrustMatrix, fcw: DirectTrustMatrix,
                   pretrust: PreTrustVector) -> np.ndarray:
    """Non-propagating global scores; participants nobody has rated get the
    cold-start score."""
    n = raw.n
    has_raters = raw.rated.any(axis=0)
    if spec.credibility is Credibility.THIRD_PARTY_SIM:
        # pre-trusted participants act as the reference evaluators
        evaluators = pretrust.members()
        scores = fcw.values[evaluators].mean(axis=0)
    else:
        counts = raw.rated.sum(axis=0)
        sums = np.where(raw.rated, fcw.values, 0.0).sum(axis=0)
        scores = np.divide(sums, counts, out=np.zeros(n), where=counts > 0)
    return np.where(has_raters, scores, COLD_START)


def evaluate(state: MetricState, ledger: InteractionLedger) -> MetricState:
    spec = state.spec
    n = state.n
    tau = None
    if spec.taxonomy is Taxonomy.RANDOM:
        trust = GlobalTrustVector(np.full(n, 1.0 / n))
    else:
        raw = direct_trust(spec, ledger)
        fcw = credibility_weighted(spec, raw, ledger, state.trust.values)
        if spec.kernel.kind is KernelKind.NP:
            trust = GlobalTrustVector(one_hop_scores(spec, raw, fcw, state.pretrust))
        else:
            trust, tau = propagate(fcw, state.pretrust, spec.kernel)
    if state.amended:
        vals = trust.values.copy()
        vals[list(state.amended)] = 0.0
        trust = replace(trust, values=vals)
    return replace(state, trust=trust, threshold=tau)


def amend_on_bad_service(state: MetricState, offender: int) -> MetricState:
    if not state.spec.amend:
        raise NotSupported(f"{state.spec.name} has no amending mechanism")
    if offender in state.amended:
        return state
    vals = state.trust.values.copy()
    vals[offender] = 0.0
    return replace(state, amended=state.amended | {offender}, trust=replace(state.trust, values=vals))
