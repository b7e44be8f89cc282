"""Behavioural policies for good participants and the six adversary models.

Every decision is a pure function of the participants involved, the threat
configuration and one uniform draw supplied by the caller.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

from .ledger import Honesty, Outcome


class Model(str, enum.Enum):
    A = "A"
    B = "B"
    C = "C"
    D = "D"
    E = "E"
    F = "F"


class Role(str, enum.Enum):
    GOOD = "Good"
    INDEPENDENT = "IndependentMalicious"
    COLLUDER = "Colluder"
    CAMOUFLAGE = "Camouflage"
    TYPE_B = "TypeB"
    TYPE_D = "TypeD"


COLLUSIVE = {Role.COLLUDER, Role.CAMOUFLAGE}
DEFAULT_NOISE = 0.05


class ChainTooSmall(ValueError):
    pass


@dataclass(frozen=True)
class BehaviorProfile:
    role: Role
    noise: float = DEFAULT_NOISE

    def __post_init__(self):
        if not 0.0 <= self.noise <= 1.0:
            raise ValueError("noise must lie in [0, 1]")

    @property
    def malicious(self) -> bool:
        return self.role is not Role.GOOD


@dataclass(frozen=True)
class ThreatModelConfig:
    model: Model
    f: float = 0.4
    eta: float = 0.0
    gamma: float = 0.0
    n_type_b: int = 0
    n_type_d: int = 0
    chain: tuple[int, ...] = field(default=())

    def __post_init__(self):
        object.__setattr__(self, "model", Model(self.model))
        for name in ("f", "eta", "gamma"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {v}")
        if self.n_type_b < 0 or self.n_type_d < 0:
            raise ValueError("type counts are non-negative")

    def roles(self, n_malicious: int) -> list[Role]:
        """Role of each malicious participant, in id order."""
        m = self.model
        if m is Model.A:
            return [Role.INDEPENDENT] * n_malicious
        if m is Model.B:
            return [Role.COLLUDER] * n_malicious
        if m in (Model.C, Model.E):
            return [Role.CAMOUFLAGE] * n_malicious
        if self.n_type_b + self.n_type_d != n_malicious:
            raise ValueError(
                f"Type-B + Type-D = {self.n_type_b + self.n_type_d} must equal the "
                f"malicious population {n_malicious}")
        return [Role.TYPE_B] * self.n_type_b + [Role.TYPE_D] * self.n_type_d

    @property
    def honest_coin(self) -> float:
        """Probability a malicious rater reports truthfully."""
        if self.model is Model.E:
            return self.eta
        if self.model is Model.F:
            return self.gamma
        return 0.0


def decide_service(profile: BehaviorProfile, cfg: ThreatModelConfig, draw: float) -> Outcome:
    role = profile.role
    if role in (Role.GOOD, Role.TYPE_D):
        return Outcome.AUTHENTIC
    if role is Role.CAMOUFLAGE:
        return Outcome.AUTHENTIC if draw < cfg.f else Outcome.INAUTHENTIC
    return Outcome.INAUTHENTIC


def _favoured(rater: Role, ratee: Role) -> bool:
    if rater in COLLUSIVE:
        return ratee in COLLUSIVE
    return rater is Role.TYPE_D and ratee is Role.TYPE_B


def decide_rating(rater: BehaviorProfile, ratee: BehaviorProfile, outcome: Outcome,
                  cfg: ThreatModelConfig, draw: float) -> tuple[float, Honesty]:
    truth = 1.0 if outcome is Outcome.AUTHENTIC else 0.0
    if rater.role is Role.GOOD:
        if draw < rater.noise:
            return 1.0 - truth, Honesty.DISHONEST
        return truth, Honesty.HONEST
    if rater.role is Role.INDEPENDENT:
        return 0.0, Honesty.NON_CREDITABLE
    if draw < cfg.honest_coin:
        return truth, Honesty.HONEST
    return (1.0 if _favoured(rater.role, ratee.role) else 0.0), Honesty.DISHONEST


def build_chain(malicious_ids) -> list[tuple[int, int]]:
    ids = list(malicious_ids)
    if len(ids) < 2:
        raise ChainTooSmall("a collusion chain needs at least two members")
    return [(ids[k], ids[(k + 1) % len(ids)]) for k in range(len(ids))]


def wiring_edges(roles: dict[int, Role], cfg: ThreatModelConfig) -> list[tuple[int, int]]:
    """Collusion links the adversaries establish before regular traffic.

    Chain models get a ring (in ``cfg.chain`` order when given); spy models pair
    every Type-D with a Type-B round-robin so each side has at least one link.
    """
    if cfg.model in (Model.B, Model.C, Model.E):
        members = list(cfg.chain) or sorted(i for i, r in roles.items() if r in COLLUSIVE)
        if set(members) != {i for i, r in roles.items() if r in COLLUSIVE}:
            raise ValueError("chain must cover exactly the malicious population")
        return build_chain(members) if len(members) >= 2 else []
    if cfg.model in (Model.D, Model.F):
        bs = sorted(i for i, r in roles.items() if r is Role.TYPE_B)
        ds = sorted(i for i, r in roles.items() if r is Role.TYPE_D)
        if not bs or not ds:
            return []
        return [(ds[k % len(ds)], bs[k % len(bs)]) for k in range(max(len(bs), len(ds)))]
    return []
