"""Trust propagation kernels: non-propagation, uniform power iteration, and
threshold-controlled power iteration."""

from __future__ import annotations

import csv
import enum
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Union

import numpy as np

from .local_trust import CredibilityWeights, DirectTrustMatrix

DEFAULT_EPS = 0.15
COLD_START = 0.5


class KernelKind(str, enum.Enum):
    NP = "NP"
    UDTP = "UDTP"
    TCTP = "TCTP"


class EmptyMatrix(ValueError):
    pass


@dataclass(frozen=True)
class Fixed:
    value: float

    def __post_init__(self):
        if not 0.0 <= self.value <= 1.0:
            raise ValueError("fixed threshold must lie in [0, 1]")


@dataclass(frozen=True)
class Percentile:
    q: float

    def __post_init__(self):
        if not 0.0 <= self.q <= 1.0:
            raise ValueError("percentile q must lie in [0, 1]")


@dataclass(frozen=True)
class MeanNonzero:
    pass


ThresholdPolicy = Union[Fixed, Percentile, MeanNonzero]


@dataclass(frozen=True)
class KernelConfig:
    kind: KernelKind = KernelKind.UDTP
    threshold: ThresholdPolicy | None = None
    tol: float = 1e-9
    max_iter: int = 200

    def __post_init__(self):
        if self.kind is KernelKind.TCTP and self.threshold is None:
            raise ValueError("TCTP needs a threshold policy")


@dataclass
class NormalizedTrustMatrix:
    values: np.ndarray

    @property
    def n(self) -> int:
        return self.values.shape[0]

    def dangling(self) -> np.ndarray:
        return self.values.sum(axis=1) == 0


@dataclass
class PreTrustVector:
    p: np.ndarray
    eps: float = DEFAULT_EPS

    @classmethod
    def of(cls, n: int, members: Iterable[int], eps: float = DEFAULT_EPS) -> "PreTrustVector":
        """Uniform over ``members``; uniform over everyone when there are none."""
        if not 0.0 <= eps <= 1.0:
            raise ValueError("eps must lie in [0, 1]")
        members = sorted(set(members))
        p = np.zeros(n)
        if members:
            p[members] = 1.0 / len(members)
        else:
            p[:] = 1.0 / n
        return cls(p, eps)

    def members(self) -> list[int]:
        return [int(i) for i in np.flatnonzero(self.p)]


@dataclass
class GlobalTrustVector:
    values: np.ndarray
    iteration: int = 0
    converged: bool = True
    residual: float = 0.0

    def __getitem__(self, i):
        return self.values[i]

    def __len__(self):
        return len(self.values)

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["id", "score", "iteration"])
            for i, s in enumerate(self.values):
                w.writerow([i, repr(float(s)), self.iteration])


def normalize(s: DirectTrustMatrix | np.ndarray) -> NormalizedTrustMatrix:
    vals = np.asarray(getattr(s, "values", s), dtype=float)
    rows = vals.sum(axis=1, keepdims=True)
    with np.errstate(invalid="ignore", divide="ignore"):
        m = np.where(rows > 0, vals / rows, 0.0)
    return NormalizedTrustMatrix(m)


def power_iterate(m: NormalizedTrustMatrix, pre: PreTrustVector,
                  cfg: KernelConfig = KernelConfig()) -> GlobalTrustVector:
    """Iterate T <- (1 - eps) M^T T + eps p from T = p.

    Mass sitting on dangling rows is handed to the pre-trust vector each step,
    so the iterate stays a probability vector.
    """
    p, eps = pre.p, pre.eps
    # dangling redistribution folded in: one matvec per step
    step = (1.0 - eps) * (m.values.T + np.outer(p, m.dangling()))
    base = eps * p
    t = p.copy()
    residual = float("inf")
    for k in range(1, cfg.max_iter + 1):
        nxt = step @ t + base
        residual = float(np.abs(nxt - t).sum())
        t = nxt
        if residual < cfg.tol:
            return GlobalTrustVector(t, k, True, residual)
    return GlobalTrustVector(t, cfg.max_iter, False, residual)


def resolve_threshold(s: DirectTrustMatrix | np.ndarray, policy: ThresholdPolicy) -> float:
    if isinstance(policy, Fixed):
        return policy.value
    vals = np.asarray(getattr(s, "values", s), dtype=float)
    nz = vals[vals > 0]
    if nz.size == 0:
        raise EmptyMatrix("threshold policy needs at least one positive edge")
    if isinstance(policy, Percentile):
        return float(np.quantile(nz, policy.q))
    if isinstance(policy, MeanNonzero):
        return float(nz.mean())
    raise TypeError(f"unknown threshold policy {policy!r}")


def tctp_filter(s: DirectTrustMatrix, tau: float) -> DirectTrustMatrix:
    """Block every edge whose direct trust does not exceed ``tau``."""
    if not 0.0 <= tau <= 1.0:
        raise ValueError("threshold must lie in [0, 1]")
    kept = np.where(s.values > tau, s.values, 0.0)
    return DirectTrustMatrix(kept, s.variant, s.rated)


def one_hop_aggregate(s: DirectTrustMatrix, j: int, recommendations: CredibilityWeights | Mapping | None = None,
                      raters: Iterable[int] | None = None, cold_start: float = COLD_START) -> float:
    """Credibility-weighted mean of the direct trust j's raters place on it."""
    if raters is None:
        raters = np.flatnonzero(s.rated[:, j])
    raters = [int(r) for r in raters]
    if not raters:
        return cold_start
    vals = np.array([s.values[r, j] for r in raters])
    if recommendations is None:
        return float(vals.mean())
    weights = getattr(recommendations, "values", recommendations)
    w = np.array([weights.get(r, weights.get((r, j), 0.0)) for r in raters], dtype=float)
    if w.sum() <= 0:
        return float(vals.mean())
    return float((w * vals).sum() / w.sum())


def propagate(s: DirectTrustMatrix, pre: PreTrustVector, cfg: KernelConfig) -> tuple[GlobalTrustVector, float | None]:
    """Run the UDTP or TCTP kernel; returns the vector and the threshold used."""
    tau = None
    if cfg.kind is KernelKind.TCTP:
        try:
            tau = resolve_threshold(s, cfg.threshold)
        except EmptyMatrix:
            tau = 0.0
        s = tctp_filter(s, tau)
    elif cfg.kind is not KernelKind.UDTP:
        raise ValueError("propagate handles only UDTP and TCTP")
    return power_iterate(normalize(s), pre, cfg), tau
