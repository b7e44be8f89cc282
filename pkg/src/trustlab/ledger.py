"""Interaction ledger: the append-only record every trust computation reads from."""

from __future__ import annotations

import csv
import enum
from collections import defaultdict
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable

import numpy as np


class Outcome(str, enum.Enum):
    AUTHENTIC = "Authentic"
    INAUTHENTIC = "Inauthentic"


class Honesty(str, enum.Enum):
    HONEST = "Honest"
    DISHONEST = "Dishonest"
    NON_CREDITABLE = "NonCreditable"


class LedgerError(ValueError):
    pass


SATISFIED_CUTOFF = 0.5


def binary_to_unit(r: int) -> float:
    """Map a binary rating in {-1, +1} onto [0, 1]."""
    if r not in (-1, 1):
        raise LedgerError(f"binary rating must be -1 or +1, got {r}")
    return (r + 1) / 2


def multiscale_to_unit(s: int) -> float:
    """Map a multiscale rating in {-1, 0, ..., 5} onto [0, 1]."""
    if not -1 <= s <= 5:
        raise LedgerError(f"multiscale rating must lie in [-1, 5], got {s}")
    return (s + 1) / 6


@dataclass(frozen=True)
class RatingEvent:
    rater: int
    ratee: int
    time: int
    value: float
    outcome: Outcome
    honesty: Honesty

    def __post_init__(self):
        if self.rater == self.ratee:
            raise LedgerError("a participant cannot rate itself")
        if self.rater < 0 or self.ratee < 0:
            raise LedgerError("participant ids are non-negative")
        if not 0.0 <= self.value <= 1.0:
            raise LedgerError(f"rating value {self.value} outside [0, 1]")
        if self.time < 0:
            raise LedgerError("time ticks are non-negative")
        # an Honest tag must agree with the service outcome; the converse does
        # not hold because policy-driven raters may coincide with the truth
        if self.honesty is Honesty.HONEST and self.satisfied != (self.outcome is Outcome.AUTHENTIC):
            raise LedgerError("honest rating disagrees with service outcome")

    @property
    def satisfied(self) -> bool:
        return self.value >= SATISFIED_CUTOFF


class InteractionLedger:
    """Directed per-pair transaction history over ``n`` participants.

    ``counts[(i, j)]`` holds ``(delta, sigma)``: satisfied and unsatisfied
    ratings from ``i`` about ``j``.  The ledger has a single writer.
    """

    def __init__(self, n: int):
        if n < 2:
            raise LedgerError("need at least two participants")
        self.n = n
        self.events: list[RatingEvent] = []
        self.counts: dict[tuple[int, int], tuple[int, int]] = {}
        self.now = 0
        self._value_sums: dict[tuple[int, int], float] = defaultdict(float)
        self._history: dict[tuple[int, int], list[tuple[int, float]]] = defaultdict(list)
        self._raters: dict[int, set[int]] = defaultdict(set)

    def __len__(self):
        return len(self.events)

    def record(self, event: RatingEvent) -> "InteractionLedger":
        if event.rater >= self.n or event.ratee >= self.n:
            raise LedgerError(f"participant id out of range for n={self.n}")
        if event.time < self.now:
            raise LedgerError(f"time regression: {event.time} < {self.now}")
        key = (event.rater, event.ratee)
        d, s = self.counts.get(key, (0, 0))
        self.counts[key] = (d + 1, s) if event.satisfied else (d, s + 1)
        self._value_sums[key] += event.value
        self._history[key].append((event.time, event.value))
        self._raters[event.ratee].add(event.rater)
        self.events.append(event)
        self.now = event.time
        return self

    def pair_counts(self, i: int, j: int) -> tuple[int, int]:
        return self.counts.get((i, j), (0, 0))

    def history(self, i: int, j: int) -> list[tuple[int, float]]:
        return list(self._history.get((i, j), ()))

    def raters_of(self, j: int) -> set[int]:
        return set(self._raters.get(j, ()))

    def mean_rating(self, i: int, j: int) -> float | None:
        d, s = self.pair_counts(i, j)
        if d + s == 0:
            return None
        return self._value_sums[(i, j)] / (d + s)

    def count_matrices(self) -> tuple[np.ndarray, np.ndarray]:
        """Dense ``(delta, sigma)`` matrices."""
        delta = np.zeros((self.n, self.n))
        sigma = np.zeros((self.n, self.n))
        for (i, j), (d, s) in self.counts.items():
            delta[i, j] = d
            sigma[i, j] = s
        return delta, sigma

    def mean_rating_matrix(self) -> tuple[np.ndarray, np.ndarray]:
        """Per-pair mean rating and the boolean mask of rated pairs."""
        means = np.zeros((self.n, self.n))
        mask = np.zeros((self.n, self.n), dtype=bool)
        for (i, j), (d, s) in self.counts.items():
            means[i, j] = self._value_sums[(i, j)] / (d + s)
            mask[i, j] = True
        return means, mask

    @classmethod
    def replay(cls, n: int, events: Iterable[RatingEvent]) -> "InteractionLedger":
        ledger = cls(n)
        for ev in events:
            ledger.record(ev)
        return ledger

    def to_csv(self, path: str | Path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["rater", "ratee", "time", "value", "outcome", "honesty_tag"])
            for ev in self.events:
                w.writerow([ev.rater, ev.ratee, ev.time, repr(ev.value), ev.outcome.value, ev.honesty.value])

    @classmethod
    def from_csv(cls, path: str | Path, n: int) -> "InteractionLedger":
        ledger = cls(n)
        with open(path, newline="") as fh:
            for row in csv.DictReader(fh):
                ledger.record(RatingEvent(
                    rater=int(row["rater"]),
                    ratee=int(row["ratee"]),
                    time=int(row["time"]),
                    value=float(row["value"]),
                    outcome=Outcome(row["outcome"]),
                    honesty=Honesty(row["honesty_tag"]),
                ))
        return ledger


def record_transaction(ledger: InteractionLedger, event: RatingEvent) -> InteractionLedger:
    return ledger.record(event)


def pair_counts(ledger: InteractionLedger, i: int, j: int) -> tuple[int, int]:
    return ledger.pair_counts(i, j)


def decay_weight(t_i: int, t_n: int, a: float) -> float:
    """Rating weight ``a ** (t_n - t_i)``; recent ratings weigh more."""
    if not 0.0 < a <= 1.0:
        raise LedgerError(f"decay base must lie in (0, 1], got {a}")
    if t_i > t_n:
        raise LedgerError(f"rating time {t_i} is after the current tick {t_n}")
    return a ** (t_n - t_i)
