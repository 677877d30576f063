"""Multi-round anonymous expert elicitation with consensus detection.

A session walks COLLECTING -> FEEDBACK -> COLLECTING ... and terminates
CONVERGED (every item's IQR within the threshold and nothing changed in the
latest round) or EXHAUSTED (round budget spent). Aggregates are medians with
IQR dispersion, computed with linear interpolation between order statistics;
that convention is fixed here because the consensus threshold depends on it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Mapping, Sequence

import numpy as np

from .dataset import CRITERIA_BY_ID, CriterionKind
from .errors import IncompleteRoundError, SchemaError, SessionStateError

RATING_MIN, RATING_MAX = 1, 5


class SessionState(str, Enum):
    COLLECTING = "collecting"
    FEEDBACK = "feedback"
    CONVERGED = "converged"
    EXHAUSTED = "exhausted"


TERMINAL_STATES = (SessionState.CONVERGED, SessionState.EXHAUSTED)


@dataclass(frozen=True)
class DelphiConfig:
    consensus_iqr_max: float = 1.0
    max_rounds: int = 5
    aggregate: str = "MEDIAN"

    def __post_init__(self):
        if self.consensus_iqr_max <= 0:
            raise SchemaError("consensus_iqr_max must be positive")
        if self.max_rounds < 1:
            raise SchemaError("max_rounds must be >= 1")
        if self.aggregate != "MEDIAN":
            raise SchemaError(f"unsupported aggregate {self.aggregate!r}")


@dataclass(frozen=True)
class RatingItem:
    """One elicitation item: how much more does `subject` cost than
    `reference` on the (qualitative) criterion, on the 1..5 scale."""

    id: str
    criterion_id: int
    subject: str
    reference: str

    def __post_init__(self):
        crit = CRITERIA_BY_ID.get(self.criterion_id)
        if crit is None or crit.kind is not CriterionKind.QUALITATIVE:
            raise SchemaError(
                f"item {self.id!r}: criterion {self.criterion_id} is not qualitative"
            )
        if self.subject == self.reference:
            raise SchemaError(f"item {self.id!r}: pair members must differ")


def make_item_id(criterion_id: int, subject: str, reference: str) -> str:
    return f"c{criterion_id}:{subject}>{reference}"


def rating_items(criterion_ids: Iterable[int], technologies: Sequence[str]) -> list[RatingItem]:
    """All unordered technology pairs for each criterion, oriented so the
    earlier-listed technology is the rated subject."""
    items = []
    for cid in criterion_ids:
        for i, subject in enumerate(technologies):
            for reference in technologies[i + 1:]:
                items.append(RatingItem(make_item_id(cid, subject, reference),
                                        cid, subject, reference))
    return items


@dataclass(frozen=True)
class ItemAggregate:
    median: float
    iqr: float
    mean: float
    count: int
    changed_from_previous: int


@dataclass(frozen=True)
class RoundSummary:
    """Anonymous per-item aggregates for one closed round. Carries no
    expert identifiers by construction."""

    round: int
    items: Mapping[str, ItemAggregate]


@dataclass(frozen=True)
class ConsensusJudgment:
    """Final per-item value, directly consumable as a pairwise rating.
    `consensus` is False when the session ended EXHAUSTED."""

    criterion_id: int
    tech_a: str
    tech_b: str
    worse: str
    value: int
    consensus: bool


def _round_half_up(x: float) -> int:
    return int(math.floor(x + 0.5))


def _aggregate(values: Sequence[int]) -> tuple[float, float, float]:
    arr = np.asarray(values, dtype=float)
    q1, q3 = np.percentile(arr, [25.0, 75.0])  # linear interpolation
    return float(np.median(arr)), float(q3 - q1), float(arr.mean())


class DelphiSession:
    """Serialized state machine for one elicitation panel.

    Not thread-safe on its own: callers must serialize mutations per
    session (the HTTP layer holds one lock per session).
    """

    def __init__(self, session_id: str, experts: Sequence[str],
                 items: Sequence[RatingItem], config: DelphiConfig = DelphiConfig()):
        experts = tuple(experts)
        if not 2 <= len(experts) <= 32:
            raise SchemaError(f"need 2..32 experts, got {len(experts)}")
        if len(set(experts)) != len(experts):
            raise SchemaError("duplicate expert ids")
        items = tuple(items)
        if not items:
            raise SchemaError("need at least one rating item")
        if len({it.id for it in items}) != len(items):
            raise SchemaError("duplicate item ids")
        self.id = session_id
        self.experts = experts
        self.items = items
        self.items_by_id = {it.id: it for it in items}
        self.config = config
        self.state = SessionState.COLLECTING
        self.round = 1
        self.history: list[RoundSummary] = []
        # round -> expert -> item id -> {"value": int, "justification": str|None}
        self._ratings: dict[int, dict[str, dict[str, dict]]] = {1: {}}

    # -- elicitation ------------------------------------------------------

    def submit_rating(self, expert: str, item_id: str, value: int,
                      justification: str | None = None) -> None:
        if self.state is not SessionState.COLLECTING:
            raise SessionStateError(
                f"session {self.id} is {self.state.value}, not collecting"
            )
        if expert not in self.experts:
            raise SchemaError(f"unknown expert {expert!r}")
        if item_id not in self.items_by_id:
            raise SchemaError(f"unknown item {item_id!r}")
        if not isinstance(value, int) or isinstance(value, bool) \
                or not RATING_MIN <= value <= RATING_MAX:
            raise SchemaError(
                f"value must be an integer within the {RATING_MIN}..{RATING_MAX} "
                f"rating scale, got {value!r}"
            )
        by_expert = self._ratings[self.round].setdefault(expert, {})
        by_expert[item_id] = {"value": value, "justification": justification}

    def ratings_of(self, expert: str) -> dict[str, int]:
        """The expert's own current-round ratings (for their screen only)."""
        if expert not in self.experts:
            raise SchemaError(f"unknown expert {expert!r}")
        by_expert = self._ratings.get(self.round, {}).get(expert, {})
        return {item_id: r["value"] for item_id, r in by_expert.items()}

    # -- round lifecycle --------------------------------------------------

    def close_round(self) -> RoundSummary:
        if self.state is not SessionState.COLLECTING:
            raise SessionStateError(
                f"session {self.id} is {self.state.value}, not collecting"
            )
        current = self._ratings[self.round]
        gaps = [(expert, it.id) for expert in self.experts for it in self.items
                if it.id not in current.get(expert, {})]
        if gaps:
            raise IncompleteRoundError(
                f"round {self.round} is missing {len(gaps)} rating(s), "
                f"first: expert {gaps[0][0]!r} item {gaps[0][1]!r}"
            )
        previous = self._ratings.get(self.round - 1)
        aggregates = {}
        for it in self.items:
            values = [current[e][it.id]["value"] for e in self.experts]
            median, iqr, mean = _aggregate(values)
            changed = 0
            if previous is not None:
                changed = sum(
                    1 for e in self.experts
                    if current[e][it.id]["value"] != previous[e][it.id]["value"]
                )
            aggregates[it.id] = ItemAggregate(median, iqr, mean, len(values), changed)
        summary = RoundSummary(self.round, aggregates)
        self.history.append(summary)
        self.state = SessionState.FEEDBACK
        return summary

    def advance(self) -> SessionState:
        if self.state is not SessionState.FEEDBACK:
            raise SessionStateError(
                f"session {self.id} is {self.state.value}, not in feedback"
            )
        latest = self.history[-1]
        settled = all(agg.iqr <= self.config.consensus_iqr_max
                      for agg in latest.items.values())
        unchanged = all(agg.changed_from_previous == 0
                        for agg in latest.items.values())
        # Round 1 is never terminal: "unchanged" is only meaningful once a
        # previous round exists to compare against.
        if settled and unchanged and self.round >= 2:
            self.state = SessionState.CONVERGED
        elif self.round >= self.config.max_rounds:
            self.state = SessionState.EXHAUSTED
        else:
            carried = {
                expert: {item_id: dict(r) for item_id, r in by_expert.items()}
                for expert, by_expert in self._ratings[self.round].items()
            }
            self.round += 1
            self._ratings[self.round] = carried
            self.state = SessionState.COLLECTING
        return self.state

    def export_consensus(self) -> list[ConsensusJudgment]:
        if self.state not in TERMINAL_STATES:
            raise SessionStateError(
                f"session {self.id} is still running ({self.state.value})"
            )
        consensus = self.state is SessionState.CONVERGED
        final = self.history[-1]
        out = []
        for it in self.items:
            value = _round_half_up(final.items[it.id].median)
            value = min(RATING_MAX, max(RATING_MIN, value))
            out.append(ConsensusJudgment(it.criterion_id, it.subject, it.reference,
                                         it.subject, value, consensus))
        return out

    # -- persistence ------------------------------------------------------

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "experts": list(self.experts),
            "items": [{"id": it.id, "criterion_id": it.criterion_id,
                       "subject": it.subject, "reference": it.reference}
                      for it in self.items],
            "config": {"consensus_iqr_max": self.config.consensus_iqr_max,
                       "max_rounds": self.config.max_rounds,
                       "aggregate": self.config.aggregate},
            "state": self.state.value,
            "round": self.round,
            "history": [
                {"round": s.round,
                 "items": {item_id: {"median": a.median, "iqr": a.iqr,
                                     "mean": a.mean, "count": a.count,
                                     "changed_from_previous": a.changed_from_previous}
                           for item_id, a in s.items.items()}}
                for s in self.history
            ],
            "ratings": {
                str(rnd): {expert: {item_id: dict(r) for item_id, r in by_expert.items()}
                           for expert, by_expert in by_round.items()}
                for rnd, by_round in self._ratings.items()
            },
        }

    @classmethod
    def from_dict(cls, doc: Mapping) -> "DelphiSession":
        config = DelphiConfig(**doc["config"])
        items = [RatingItem(d["id"], d["criterion_id"], d["subject"], d["reference"])
                 for d in doc["items"]]
        session = cls(doc["id"], doc["experts"], items, config)
        session.state = SessionState(doc["state"])
        session.round = int(doc["round"])
        session.history = [
            RoundSummary(s["round"],
                         {item_id: ItemAggregate(**a) for item_id, a in s["items"].items()})
            for s in doc["history"]
        ]
        session._ratings = {
            int(rnd): {expert: {item_id: dict(r) for item_id, r in by_expert.items()}
                       for expert, by_expert in by_round.items()}
            for rnd, by_round in doc["ratings"].items()
        }
        return session
