"""Outcome tables, statistical distance and Hoeffding intervals."""
from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable

import numpy as np

from ..errors import SpaceMismatch

BOTTOM = "⊥"


def outcome_key(word) -> str:
    """Bit string of a decoded word, or the rejection symbol for None."""
    if word is None:
        return BOTTOM
    return "".join(str(int(b)) for b in np.asarray(word).reshape(-1))


def message_space(k: int) -> frozenset:
    return frozenset([format(i, f"0{k}b") for i in range(1 << k)] + [BOTTOM])


@dataclass
class DistributionTable:
    """Counts over outcomes; ``exact`` tables come from full enumeration.

    ``space`` optionally declares the outcome space so that comparisons
    across different spaces are caught.
    """

    counts: Counter = field(default_factory=Counter)
    exact: bool = False
    space: frozenset | None = None

    @classmethod
    def from_outcomes(cls, outcomes: Iterable, exact: bool = False,
                      space: frozenset | None = None) -> "DistributionTable":
        return cls(Counter(outcome_key(o) if not isinstance(o, str) else o for o in outcomes), exact, space)

    def add(self, outcome, count: int = 1) -> None:
        key = outcome if isinstance(outcome, str) else outcome_key(outcome)
        if self.space is not None and key not in self.space:
            raise SpaceMismatch(f"outcome {key!r} outside the declared space")
        self.counts[key] += count

    def merge(self, other: "DistributionTable") -> "DistributionTable":
        _check_spaces(self, other)
        return DistributionTable(self.counts + other.counts, self.exact and other.exact, self.space)

    @property
    def total(self) -> int:
        return sum(self.counts.values())

    def prob(self, outcome: str) -> Fraction:
        return Fraction(self.counts.get(outcome, 0), self.total)

    def probabilities(self) -> dict[str, Fraction]:
        return {z: Fraction(c, self.total) for z, c in sorted(self.counts.items())}

    def to_json(self) -> dict:
        return {"exact": self.exact, "total": self.total,
                "counts": {z: int(c) for z, c in sorted(self.counts.items())}}


def _check_spaces(a: DistributionTable, b: DistributionTable) -> None:
    if a.space is not None and b.space is not None and a.space != b.space:
        raise SpaceMismatch("tables are over different outcome spaces")
    for tbl, other in ((a, b), (b, a)):
        if tbl.space is not None and not set(other.counts) <= tbl.space:
            raise SpaceMismatch("a table has outcomes outside the other's space")


def stat_distance(d1: DistributionTable, d2: DistributionTable) -> Fraction:
    """Half the L1 distance, as an exact fraction of the two totals."""
    _check_spaces(d1, d2)
    if d1.total == 0 or d2.total == 0:
        raise ValueError("empty distribution table")
    keys = set(d1.counts) | set(d2.counts)
    return sum((abs(d1.prob(z) - d2.prob(z)) for z in keys), Fraction(0)) / 2


def hoeffding_halfwidth(trials: int, alpha: float = 0.05) -> float:
    """Two-sided Hoeffding half-width for a mean of ``trials`` values in [0, 1]."""
    return math.sqrt(math.log(2 / alpha) / (2 * trials))


def distance_margin(space_size: int, trials1: int, trials2: int | None = None, alpha: float = 0.05) -> float:
    """Bound on |estimated - true| distance, holding with probability 1 - alpha.

    Distance is the largest gap over events, so a Hoeffding interval for
    every event (a union over 2^(K-1) of them) bounds each table's error; a
    union over the K single outcomes is used instead when that is tighter.
    With ``trials2`` None only the first table is sampled and the second is exact.
    """
    tables = [t for t in (trials1, trials2) if t is not None]
    level = alpha / len(tables)
    total = 0.0
    for t in tables:
        per_outcome = 0.5 * space_size * hoeffding_halfwidth(t, level / space_size)
        per_event = math.sqrt(((space_size - 1) * math.log(2) + math.log(2 / level)) / (2 * t))
        total += min(per_outcome, per_event)
    return total


def trial_rng(master_seed: int, index: int, *stream: int) -> np.random.Generator:
    """Stream for one trial: seeded by (master_seed, index, *stream)."""
    return np.random.default_rng([master_seed, index, *stream])
