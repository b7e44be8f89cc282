"""Pairwise direct trust and feedback-credibility weighting.

Scalar functions mirror the per-pair formulas; the ``*_matrix`` helpers are the
vectorised forms the metric pipeline uses.  Tests check one against the other.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from .ledger import InteractionLedger, decay_weight

DEFAULT_THETA = 0.05


class Variant(str, enum.Enum):
    RAW = "Raw"
    DECAYED = "Decayed"
    FCW = "FCW"


class CredibilityMode(str, enum.Enum):
    RATER_LEVEL = "RaterLevel"
    PAIRWISE = "PairwiseScoreLevel"
    THIRD_PARTY = "ThirdPartyScoreLevel"


class NoHistory(LookupError):
    pass


class EmptyRaterSet(ValueError):
    pass


class ModeMismatch(KeyError):
    pass


@dataclass
class DirectTrustMatrix:
    """Dense ``n x n`` direct trust.  ``rated`` marks pairs with any history,
    which matters where a zero-valued edge still counts as a rater."""

    values: np.ndarray
    variant: Variant = Variant.RAW
    rated: np.ndarray | None = None

    def __post_init__(self):
        self.values = np.array(self.values, dtype=float)
        if self.values.ndim != 2 or self.values.shape[0] != self.values.shape[1]:
            raise ValueError("direct trust must be a square matrix")
        if np.any(self.values < 0) or np.any(self.values > 1):
            raise ValueError("direct trust values must lie in [0, 1]")
        np.fill_diagonal(self.values, 0.0)
        if self.rated is None:
            self.rated = self.values > 0
        else:
            self.rated = np.asarray(self.rated, dtype=bool).copy()
            np.fill_diagonal(self.rated, False)

    @property
    def n(self) -> int:
        return self.values.shape[0]

    def edges(self) -> list[tuple[int, int]]:
        return [tuple(e) for e in np.argwhere(self.values > 0)]

    def to_csv(self, path) -> None:
        import csv
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["i", "j", "s"])
            for i, j in self.edges():
                w.writerow([i, j, repr(float(self.values[i, j]))])


@dataclass
class CredibilityWeights:
    mode: CredibilityMode
    values: Mapping = field(default_factory=dict)


# --- raw local aggregation -------------------------------------------------

def success_ratio_trust(delta: int, sigma: int, theta: float = DEFAULT_THETA,
                        fallback: float = 0.5) -> float:
    """Transaction success ratio, or ``fallback`` once failures exceed ``theta``.

    ``fallback`` defaults to the neutral 1/2.
    """
    total = delta + sigma + 1
    if sigma / total <= theta:
        return delta / total
    return fallback


def beta_expectation_trust(delta: int, sigma: int, base_rate: float = 0.5) -> float:
    """Expectation of Beta(delta + 1, sigma + 1); ``base_rate`` generalises the
    prior as (delta + 2a) / (delta + sigma + 2)."""
    return (delta + 2 * base_rate) / (delta + sigma + 2)


def decayed_direct_trust(ledger: InteractionLedger, i: int, j: int, a: float) -> float:
    hist = ledger.history(i, j)
    if not hist:
        raise NoHistory(f"participant {i} never rated {j}")
    # weights taken relative to the newest rating so long gaps cannot underflow
    latest = max(t for t, _ in hist)
    shift = ledger.now - latest
    num = den = 0.0
    for t, v in hist:
        w = decay_weight(t + shift, ledger.now, a)
        num += w * v
        den += w
    return num / den


def success_ratio_matrix(delta: np.ndarray, sigma: np.ndarray, theta: float = DEFAULT_THETA,
                         fallback: float = 0.5) -> np.ndarray:
    total = delta + sigma + 1
    return np.where(sigma / total <= theta, delta / total, fallback)


def beta_expectation_matrix(delta: np.ndarray, sigma: np.ndarray, base_rate: float = 0.5) -> np.ndarray:
    return (delta + 2 * base_rate) / (delta + sigma + 2)


def raw_direct_trust(ledger: InteractionLedger, rule: str = "SuccessRatio", *,
                     theta: float = DEFAULT_THETA, fallback: float = 0.5,
                     base_rate: float = 0.5, decay: float = 1.0) -> DirectTrustMatrix:
    """Build the direct trust matrix from ledger counts under one local rule."""
    delta, sigma = ledger.count_matrices()
    rated = (delta + sigma) > 0
    if rule == "SuccessRatio":
        vals = success_ratio_matrix(delta, sigma, theta, fallback)
        variant = Variant.RAW
    elif rule == "BetaExpectation":
        vals = beta_expectation_matrix(delta, sigma, base_rate)
        variant = Variant.RAW
    elif rule == "Decayed":
        vals = np.zeros_like(delta)
        for (i, j) in ledger.counts:
            vals[i, j] = decayed_direct_trust(ledger, i, j, decay)
        variant = Variant.DECAYED
    else:
        raise ValueError(f"unknown local rule {rule!r}")
    vals = np.where(rated, vals, 0.0)
    return DirectTrustMatrix(vals, variant, rated)


# --- feedback similarity ---------------------------------------------------

def feedback_similarity(ledger: InteractionLedger, v: int, w: int, default: float = 0.0) -> float:
    """One minus the RMS gap between the two raters' mean ratings on the
    targets both have rated.  No common target yields ``default``."""
    if v == w:
        return 1.0
    sq = []
    for x in range(ledger.n):
        mv = ledger.mean_rating(v, x)
        mw = ledger.mean_rating(w, x)
        if mv is None or mw is None:
            continue
        sq.append((mv - mw) ** 2)
    if not sq:
        return default
    return 1.0 - math.sqrt(sum(sq) / len(sq))


def similarity_matrix(means: np.ndarray, mask: np.ndarray, default: float = 0.0,
                      min_common: int = 1) -> np.ndarray:
    """All-pairs feedback similarity from per-pair mean ratings.  Pairs with
    fewer than ``min_common`` common targets get ``default``."""
    a = mask.astype(float)
    r = np.where(mask, means, 0.0)
    common = a @ a.T
    # direct broadcast rather than the expanded square: exact 0/1 results matter
    both = a[:, None, :] * a[None, :, :]
    sq = (((r[:, None, :] - r[None, :, :]) ** 2) * both).sum(axis=-1)
    with np.errstate(invalid="ignore", divide="ignore"):
        sim = 1.0 - np.sqrt(sq / common)
    sim = np.where(common >= max(min_common, 1), sim, default)
    sim = np.clip(sim, 0.0, 1.0)
    np.fill_diagonal(sim, 1.0)
    return sim


def ledger_similarity_matrix(ledger: InteractionLedger, default: float = 0.0,
                             min_common: int = 1) -> np.ndarray:
    means, mask = ledger.mean_rating_matrix()
    return similarity_matrix(means, mask, default, min_common)


# --- credibility -----------------------------------------------------------

def rater_level_credibility(trust, raters_of_j) -> CredibilityWeights:
    """Self-trust of each rater normalised over the ratee's rater set."""
    raters = sorted(raters_of_j)
    if not raters:
        raise EmptyRaterSet("ratee has no raters")
    t = np.asarray(getattr(trust, "values", trust), dtype=float)
    total = sum(t[r] for r in raters)
    if total > 0:
        vals = {r: t[r] / total for r in raters}
    else:
        vals = {r: 1.0 / len(raters) for r in raters}
    return CredibilityWeights(CredibilityMode.RATER_LEVEL, vals)


def third_party_similarity_credibility(ledger: InteractionLedger, i: int, k: int, raters_of_j,
                                       sim=None) -> float:
    """Share of ``k`` among the other raters of the ratee, by similarity to ``i``.

    ``i`` itself is never one of its own references.
    """
    sim = sim if sim is not None else (lambda a, b: feedback_similarity(ledger, a, b))
    others = [m for m in raters_of_j if m != i]
    if k == i or k not in others:
        return 0.0
    denom = sum(sim(i, m) for m in others)
    if denom <= 0:
        return 0.0
    return sim(i, k) / denom


def exp_credibility(sim):
    """exp(1 - 1/sim) with the sim -> 0 limit taken as 0; accepts arrays."""
    if np.ndim(sim) == 0:
        s = float(sim)
        if not 0.0 <= s <= 1.0:
            raise ValueError(f"similarity {s} outside [0, 1]")
        return 0.0 if s == 0.0 else math.exp(1.0 - 1.0 / s)
    s = np.asarray(sim, dtype=float)
    with np.errstate(divide="ignore"):
        out = np.exp(1.0 - 1.0 / np.where(s > 0, s, 1.0))
    return np.where(s > 0, out, 0.0)


def rater_level_matrix(raw: DirectTrustMatrix, trust: np.ndarray) -> np.ndarray:
    """Per-edge rater credibility: T(i) over the total T of the ratee's raters."""
    t = np.asarray(trust, dtype=float)
    rated = raw.rated
    per_col = rated.T @ t
    counts = rated.sum(axis=0)
    with np.errstate(invalid="ignore", divide="ignore"):
        cr = np.where(per_col > 0, t[:, None] / per_col[None, :], 1.0 / np.maximum(counts, 1)[None, :])
    return np.where(rated, cr, 0.0)


def third_party_matrix(raw: DirectTrustMatrix, sim: np.ndarray) -> np.ndarray:
    """Similarity-weighted third-party estimate for every (evaluator, ratee)."""
    w = np.array(sim, dtype=float)
    np.fill_diagonal(w, 0.0)
    r = raw.rated.astype(float)
    num = w @ (r * raw.values)
    den = w @ r
    with np.errstate(invalid="ignore", divide="ignore"):
        out = np.where(den > 0, num / den, 0.0)
    return np.clip(out, 0.0, 1.0)


def fcw_direct_trust(raw: DirectTrustMatrix, cred: CredibilityWeights) -> DirectTrustMatrix:
    """Credibility-weighted direct trust.

    RaterLevel and Pairwise multiply each edge by its weight; RaterLevel keys
    may be a rater id (one weight for all of its edges) or an edge.  ThirdParty
    values are similarities keyed by (evaluator, reference rater).
    """
    n = raw.n
    if cred.mode is CredibilityMode.THIRD_PARTY:
        sim = np.zeros((n, n))
        for (i, k), s in cred.values.items():
            sim[i, k] = s
        return DirectTrustMatrix(third_party_matrix(raw, sim), Variant.FCW)
    weights = np.zeros((n, n))
    for i, j in raw.edges():
        if cred.mode is CredibilityMode.RATER_LEVEL and i in cred.values:
            weights[i, j] = cred.values[i]
        elif (i, j) in cred.values:
            weights[i, j] = cred.values[(i, j)]
        else:
            raise ModeMismatch(f"no {cred.mode.value} weight for edge {(i, j)}")
    return DirectTrustMatrix(np.clip(weights * raw.values, 0.0, 1.0), Variant.FCW, raw.rated)
