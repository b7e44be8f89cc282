"""Trust/distrust ingredients, the attack success ratio, closed-form attack
costs for the six threat models, and an independent brute-force check of those
costs in the idealized one-shot setting.

Counts are computed with ``fractions.Fraction`` so floors of exact integers
(e.g. 3*15/10 = 4.5, 2*10*0.85/0.35) never suffer from binary rounding.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable

import numpy as np

from .ledger import Honesty, InteractionLedger
from .threats import Model


class PreconditionViolated(ValueError):
    pass


# --- ingredients -----------------------------------------------------------

@dataclass(frozen=True)
class IngredientBreakdown:
    target: int
    trust_ingredient: float
    distrust_ingredient: float


def _tag_shares(ledger: InteractionLedger, target: int) -> dict[int, tuple[float, float]]:
    """Per rater of ``target``: fraction of its ratings that are honest, and
    the complementary dishonest/non-creditable fraction."""
    tallies: dict[int, list[int]] = {}
    for ev in ledger.events:
        if ev.ratee != target:
            continue
        t = tallies.setdefault(ev.rater, [0, 0])
        t[0 if ev.honesty is Honesty.HONEST else 1] += 1
    return {u: (h / (h + d), d / (h + d)) for u, (h, d) in tallies.items()}


def _ingredient(ledger, trust, m, i, honest: bool) -> float:
    t = np.asarray(getattr(trust, "values", trust), dtype=float)
    mv = np.asarray(getattr(m, "values", m), dtype=float)
    total = 0.0
    for u, (h, d) in _tag_shares(ledger, i).items():
        total += (h if honest else d) * mv[u, i] * t[u]
    return total


def trust_ingredient(ledger: InteractionLedger, trust, m, i: int) -> float:
    """Sum of m[u, i] * T(u) over honest incoming ratings.  An edge carrying
    both kinds of rating is split in proportion to its tag counts."""
    return _ingredient(ledger, trust, m, i, True)


def distrust_ingredient(ledger: InteractionLedger, trust, m, i: int) -> float:
    """Same as ``trust_ingredient`` over dishonest and non-creditable ratings."""
    return _ingredient(ledger, trust, m, i, False)


def ingredients(ledger: InteractionLedger, trust, m, i: int) -> IngredientBreakdown:
    return IngredientBreakdown(i, trust_ingredient(ledger, trust, m, i),
                               distrust_ingredient(ledger, trust, m, i))


def attack_success_ratio(b: IngredientBreakdown):
    """T_di / T_ti; ``inf`` when only distrust exists, ``nan`` when neither does."""
    ti, di = b.trust_ingredient, b.distrust_ingredient
    if ti == 0:
        return math.inf if di > 0 else math.nan
    return di / ti


def attack_succeeds(b: IngredientBreakdown) -> bool:
    ratio = attack_success_ratio(b)
    return not math.isnan(ratio) and ratio > 1


# --- closed forms ----------------------------------------------------------

@dataclass(frozen=True)
class CostParams:
    n_h: int
    i_h: int = 0
    t_g: float = 0.85
    t_m: float = 0.35
    eta: float = 0.2
    gamma: float = 0.2
    n_b: int | None = None


@dataclass(frozen=True)
class AttackCostReport:
    model: Model
    n_malicious: int
    n_type_b: int = 0
    dishonest_ratings: int = 0
    honest_ratings: int = 0
    noncreditable_ratings: int = 0
    authentic_services: int = 0
    total_ratings: int = 0
    params: CostParams | None = None
    raw: dict = field(default_factory=dict)

    def row(self) -> dict:
        p = self.params
        return {
            "model": self.model.value, "n_h": p.n_h, "i_h": p.i_h, "t_g": p.t_g, "t_m": p.t_m,
            "eta": p.eta, "gamma": p.gamma, "n_b": self.n_type_b,
            "n_malicious": self.n_malicious, "dishonest_ratings": self.dishonest_ratings,
            "honest_ratings": self.honest_ratings, "noncreditable_ratings": self.noncreditable_ratings,
            "authentic_services": self.authentic_services, "total_ratings": self.total_ratings,
        }


def _q(x) -> Fraction:
    # decimal parameters are taken at their written value, not their binary one
    return x if isinstance(x, Fraction) else Fraction(str(x))


def _floor1(x: Fraction) -> int:
    return math.floor(x) + 1


def _camouflage_chain_count(n_h: int, i_h: int, eta: Fraction) -> tuple[int, float]:
    """Smallest N with (1 - eta)^N < 1 - 3 n_h eta / i_h, plus the real log."""
    rhs = 1 - Fraction(3 * n_h) * eta / i_h
    raw = math.log(rhs) / math.log(1 - eta) if rhs > 0 else math.inf
    n = math.floor(raw) + 1
    # guard the float floor against an exactly integral logarithm
    while n > 1 and (1 - eta) ** (n - 1) < rhs:
        n -= 1
    while not (1 - eta) ** n < rhs:
        n += 1
    return n, raw


def closed_form_cost(model, n_h: int, i_h: int = 0, t_g: float = 0.85, t_m: float = 0.35,
                     eta: float = 0.2, gamma: float = 0.2, n_b: int | None = None) -> AttackCostReport:
    model = Model(model)
    params = CostParams(n_h, i_h, t_g, t_m, eta, gamma, n_b)
    if n_h < 0:
        raise PreconditionViolated("N_H >= 0")

    if model in (Model.A, Model.B):
        tg, tm = _q(t_g), _q(t_m)
        if tm <= 0:
            raise PreconditionViolated("T_M > 0")
        real = 2 * n_h * tg / tm
        n = _floor1(real)
        raw = {"n_malicious": float(real)}
        if model is Model.A:
            return AttackCostReport(model, n, noncreditable_ratings=n, total_ratings=n,
                                    params=params, raw=raw)
        return AttackCostReport(model, n, dishonest_ratings=2 * n, total_ratings=2 * n,
                                params=params, raw=raw)

    if i_h <= 0:
        raise PreconditionViolated("I_H > 0")

    if model is Model.C:
        real = Fraction(3 * n_h, i_h)
        n = _floor1(real)
        return AttackCostReport(model, n, dishonest_ratings=2 * n, authentic_services=i_h,
                                total_ratings=2 * n, params=params,
                                raw={"n_malicious": float(real)})

    if model is Model.E:
        e = _q(eta)
        if not 0 < e < 1:
            raise PreconditionViolated("0 < eta < 1")
        if not i_h > 3 * n_h * e:
            raise PreconditionViolated(f"I_H > 3*N_H*eta ({i_h} <= {float(3 * n_h * e)})")
        n, log_real = _camouflage_chain_count(n_h, i_h, e)
        total_real = 2 * n / (1 - e)
        honest_real = 2 * e * n / (1 - e)
        return AttackCostReport(model, n, dishonest_ratings=2 * n, honest_ratings=_floor1(honest_real),
                                authentic_services=i_h, total_ratings=_floor1(total_real),
                                params=params,
                                raw={"n_malicious": log_real, "total_ratings": float(total_real),
                                     "honest_ratings": float(honest_real)})

    # spy models
    g = _q(gamma) if model is Model.F else Fraction(0)
    if not 0 <= g < 1:
        raise PreconditionViolated("0 <= gamma < 1")
    real = Fraction(3 * n_h) / ((2 - g) * i_h)
    n_d = _floor1(real)
    nb = n_d if n_b is None else n_b
    if nb < 1:
        raise PreconditionViolated("N_B >= 1")
    params = CostParams(n_h, i_h, t_g, t_m, eta, gamma, nb)
    dishonest = n_d * nb + n_d + nb
    raw = {"n_malicious": float(real)}
    if model is Model.D:
        return AttackCostReport(model, n_d, nb, dishonest_ratings=dishonest,
                                authentic_services=n_d * i_h, total_ratings=dishonest,
                                params=params, raw=raw)
    total_real = n_d * (1 + nb) / (1 - g)
    honest_real = n_d * (1 + nb) * g / (1 - g)
    raw.update(total_ratings=float(total_real), honest_ratings=float(honest_real))
    return AttackCostReport(model, n_d, nb, dishonest_ratings=dishonest,
                            honest_ratings=_floor1(honest_real), authentic_services=n_d * i_h,
                            total_ratings=_floor1(total_real), params=params, raw=raw)


# --- independent oracle ----------------------------------------------------

class Verdict(str, enum.Enum):
    CONFIRMED = "Confirmed"
    REFUTED = "Refuted"


@dataclass(frozen=True)
class OracleResult:
    verdict: Verdict
    count: int
    as_at_count: Fraction
    as_below: Fraction
    detail: str = ""

    @property
    def confirmed(self) -> bool:
        return self.verdict is Verdict.CONFIRMED


# one transaction per edge, binary ratings, beta expectation
_POS = Fraction(2, 3)   # (1 + 1) / (1 + 2)
_NEG = Fraction(1, 3)   # (0 + 1) / (0 + 1 + 2)


@dataclass
class _Edge:
    rater_trust: Fraction
    direct: Fraction
    honest: bool


def _as(edges: Iterable[_Edge]) -> Fraction:
    ti = sum((e.direct * e.rater_trust for e in edges if e.honest), Fraction(0))
    di = sum((e.direct * e.rater_trust for e in edges if not e.honest), Fraction(0))
    return di / ti


def _scenario(model: Model, n: int, p: CostParams) -> list[_Edge]:
    """Rating edges into the target when the adversary fields ``n`` members."""
    tg = _q(p.t_g)
    edges = [_Edge(tg, _POS, True) for _ in range(p.n_h)]
    if model in (Model.A, Model.B):
        attackers = [_q(p.t_m)] * n
    elif model in (Model.C, Model.E):
        # chain head earns I_H positive ratings; each link passes trust on
        head = sum((_POS * tg for _ in range(p.i_h)), Fraction(0))
        keep = 1 - _q(p.eta) if model is Model.E else Fraction(1)
        attackers, t = [], head
        for _ in range(n):
            attackers.append(t)
            t = t * keep
    else:
        keep = 1 - _q(p.gamma) if model is Model.F else Fraction(1)
        nb = p.n_b if p.n_b is not None else max(n, 1)
        spies = [sum((_POS * tg for _ in range(p.i_h)), Fraction(0)) for _ in range(n)]
        # every Type-D splits its trust evenly over the Type-B group
        partners = [sum((s * keep / nb for s in spies), Fraction(0)) for _ in range(nb)]
        attackers = spies + partners
    edges += [_Edge(t, _NEG, False) for t in attackers]
    return edges


def verify_cost_oracle(model, params: CostParams | None = None, count: int | None = None,
                       **kw) -> OracleResult:
    """Check that ``count`` (default: the closed form) is the smallest adversary
    size whose attack succeeds in the idealized one-shot scenario."""
    model = Model(model)
    p = params or CostParams(**kw)
    if count is None:
        count = closed_form_cost(model, p.n_h, p.i_h, p.t_g, p.t_m, p.eta, p.gamma, p.n_b).n_malicious
    if model in (Model.D, Model.F) and p.n_b is None:
        # fix N_B at the closed-form default so both evaluations share it
        p = CostParams(p.n_h, p.i_h, p.t_g, p.t_m, p.eta, p.gamma, count)
    at = _as(_scenario(model, count, p))
    below = _as(_scenario(model, count - 1, p)) if count > 0 else Fraction(0)
    ok = at > 1 and below <= 1
    detail = "" if ok else f"As({count})={float(at):.6g}, As({count - 1})={float(below):.6g}"
    return OracleResult(Verdict.CONFIRMED if ok else Verdict.REFUTED, count, at, below, detail)


# --- parameter grid --------------------------------------------------------

N_H_VALUES = (5, 10, 15)
I_H_VALUES = tuple(range(1, 20))
T_G_VALUES = (0.75, 0.85, 0.95)
T_M_DEFAULT = 0.35
ETA_DEFAULT = GAMMA_DEFAULT = 0.2


def grid(models=tuple(Model), n_h_values=N_H_VALUES, i_h_values=I_H_VALUES,
         t_g_values=T_G_VALUES, skip_infeasible: bool = True):
    """Parameter points of the cost table.  Model E points violating
    I_H > 3 N_H eta are skipped unless ``skip_infeasible`` is False."""
    for model in map(Model, models):
        if model in (Model.A, Model.B):
            for n_h in n_h_values:
                for t_g in t_g_values:
                    yield model, CostParams(n_h, 0, t_g, T_M_DEFAULT)
            continue
        for n_h in n_h_values:
            for i_h in i_h_values:
                p = CostParams(n_h, i_h, eta=ETA_DEFAULT, gamma=GAMMA_DEFAULT)
                if model is Model.E and skip_infeasible and not i_h > 3 * n_h * _q(p.eta):
                    continue
                yield model, p


def cost_for(model: Model, p: CostParams) -> AttackCostReport:
    return closed_form_cost(model, p.n_h, p.i_h, p.t_g, p.t_m, p.eta, p.gamma, p.n_b)
