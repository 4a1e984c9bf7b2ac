"""Hedge vocabulary: the two-way map between edge weights and verbal phrases.

Weights quantize to an adverb (magnitude bin) plus a verb (sign). Each bin's
midpoint sits at its center, so a decoded weight never deviates from the
original by more than half the bin width. The "strongly" bin is centered at
0.8, the conventional anchor for a strong causal link.
"""

import json
from dataclasses import dataclass

from .errors import ContractError


@dataclass(frozen=True)
class HedgeBin:
    """One magnitude bin: covers |w| in (low, high], decodes to ``midpoint``."""

    low: float
    high: float
    phrase: str
    midpoint: float
    aliases: tuple = ()

    def __post_init__(self):
        if not (0.0 <= self.low < self.high <= 1.0):
            raise ContractError(f"bad bin bounds ({self.low}, {self.high}]")
        if not (self.low < self.midpoint <= self.high):
            raise ContractError(
                f"midpoint {self.midpoint} outside bin ({self.low}, {self.high}]"
            )
        if not self.phrase.strip():
            raise ContractError("bin phrase must be non-empty")


@dataclass(frozen=True)
class HedgeTable:
    """Ordered magnitude bins plus the positive / negative verb sets.

    Bins must partition (0, 1] with no gaps or overlaps. The first verb in
    each set is canonical for encoding; the rest (and bin aliases) are
    accepted when decoding.
    """

    bins: tuple
    positive_verbs: tuple = ("causes", "increases", "intensifies")
    negative_verbs: tuple = ("decreases", "reduces", "suppresses")

    def __post_init__(self):
        if not self.bins:
            raise ContractError("hedge table needs at least one bin")
        if self.bins[0].low != 0.0 or self.bins[-1].high != 1.0:
            raise ContractError("bins must cover (0, 1]")
        for a, b in zip(self.bins, self.bins[1:]):
            if a.high != b.low:
                raise ContractError(
                    f"gap or overlap between bins at {a.high} vs {b.low}"
                )
        if not self.positive_verbs or not self.negative_verbs:
            raise ContractError("both verb sets must be non-empty")

    def bin_for(self, magnitude: float) -> HedgeBin:
        """The bin containing ``magnitude``, which must lie in (0, 1]."""
        if not (0.0 < magnitude <= 1.0):
            raise ContractError(f"magnitude {magnitude} outside (0, 1]")
        for b in self.bins:
            if b.low < magnitude <= b.high:
                return b
        raise ContractError(f"no bin contains {magnitude}")  # unreachable

    def bin_for_adverb(self, adverb: str):
        """The bin whose phrase or alias equals ``adverb`` (case-insensitive)."""
        key = adverb.strip().lower()
        for b in self.bins:
            if b.phrase == key or key in b.aliases:
                return b
        return None

    def adverbs(self):
        """Every accepted magnitude adverb, longest first (for greedy matching)."""
        words = []
        for b in self.bins:
            words.append(b.phrase)
            words.extend(b.aliases)
        return sorted(set(words), key=lambda w: (-len(w), w))

    def to_dict(self) -> dict:
        return {
            "bins": [
                {
                    "low": b.low,
                    "high": b.high,
                    "phrase": b.phrase,
                    "midpoint": b.midpoint,
                    "aliases": list(b.aliases),
                }
                for b in self.bins
            ],
            "positive_verbs": list(self.positive_verbs),
            "negative_verbs": list(self.negative_verbs),
        }

    @staticmethod
    def from_dict(data: dict) -> "HedgeTable":
        try:
            bins = tuple(
                HedgeBin(
                    low=float(b["low"]),
                    high=float(b["high"]),
                    phrase=str(b["phrase"]),
                    midpoint=float(b["midpoint"]),
                    aliases=tuple(b.get("aliases", ())),
                )
                for b in data["bins"]
            )
            return HedgeTable(
                bins=bins,
                positive_verbs=tuple(data.get("positive_verbs", ("causes",))),
                negative_verbs=tuple(data.get("negative_verbs", ("decreases",))),
            )
        except (KeyError, TypeError) as exc:
            raise ContractError(f"malformed hedge table document: {exc}") from exc


_DEFAULT = HedgeTable(
    bins=(
        HedgeBin(0.0, 0.2, "slightly", 0.1, aliases=("weakly", "mildly")),
        HedgeBin(0.2, 0.4, "somewhat", 0.3, aliases=("modestly",)),
        HedgeBin(0.4, 0.7, "moderately", 0.55, aliases=("noticeably",)),
        HedgeBin(0.7, 0.9, "strongly", 0.8, aliases=("significantly", "markedly")),
        HedgeBin(0.9, 1.0, "very strongly", 0.95, aliases=("overwhelmingly", "extremely")),
    )
)


def default_hedge_table() -> HedgeTable:
    return _DEFAULT


def load_hedge_table(path) -> HedgeTable:
    with open(path, encoding="utf-8") as fh:
        return HedgeTable.from_dict(json.load(fh))


def save_hedge_table(table: HedgeTable, path):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(table.to_dict(), fh, indent=2)
        fh.write("\n")


def quantize_weight(w: float, table: HedgeTable | None = None):
    """Verbal phrase for a weight: magnitude adverb plus sign verb.

    Returns e.g. "strongly causes" for 0.8 and "strongly decreases" for -0.8.
    A zero weight has no phrase (no sentence is emitted for it) and maps to
    None. The sign flips the verb set only, never the magnitude adverb.
    """
    table = table or _DEFAULT
    if abs(w) > 1.0:
        raise ContractError(f"weight {w} outside [-1, 1]")
    if w == 0.0:
        return None
    b = table.bin_for(abs(w))
    verb = table.positive_verbs[0] if w > 0 else table.negative_verbs[0]
    return f"{b.phrase} {verb}"
