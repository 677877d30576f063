"""Pairwise-comparison scoring: priority vectors, consistency checking,
direct normalization of quantitative data, and weighted-score ranking.

All criteria handled here are costs, so a technology's share in a column is
the fraction of the total burden it carries: higher share means worse. The
total normalized score (TNS) of a technology is the weighted sum of its
column shares, and rank 1 goes to the lowest TNS.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Mapping, Sequence

import numpy as np

from .dataset import QuantVector
from .errors import MissingDataError, SchemaError, UnsupportedOrderError

#: Saaty random-index constants: expected consistency index of random
#: reciprocal matrices of order n. Orders above 10 are not supported.
RANDOM_INDEX = {1: 0.0, 2: 0.0, 3: 0.58, 4: 0.90, 5: 1.12, 6: 1.24,
                7: 1.32, 8: 1.41, 9: 1.45, 10: 1.49}

CR_ACCEPTABLE_MAX = 0.1

RECIPROCITY_TOL = 1e-12
WEIGHT_SUM_TOL = 1e-9


def _as_labels(labels) -> tuple[str, ...]:
    labels = tuple(labels)
    if len(set(labels)) != len(labels):
        raise SchemaError("duplicate labels")
    return labels


@dataclass(frozen=True, eq=False)
class PairwiseMatrix:
    """Positive reciprocal judgment matrix over n >= 2 alternatives."""

    labels: tuple[str, ...]
    entries: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "labels", _as_labels(self.labels))
        m = np.asarray(self.entries, dtype=float)
        object.__setattr__(self, "entries", m)
        n = len(self.labels)
        if n < 2:
            raise SchemaError(f"need at least 2 alternatives, got {n}")
        if m.shape != (n, n):
            raise SchemaError(f"expected a {n}x{n} matrix, got shape {m.shape}")
        if not np.all(np.isfinite(m)) or np.any(m <= 0):
            raise SchemaError("all entries must be finite and > 0")
        if np.any(np.abs(np.diag(m) - 1.0) > RECIPROCITY_TOL):
            raise SchemaError("diagonal entries must be 1")
        if np.any(np.abs(m * m.T - 1.0) > RECIPROCITY_TOL):
            raise SchemaError("matrix is not reciprocal: entries[j][i] != 1/entries[i][j]")
        m.setflags(write=False)

    @property
    def order(self) -> int:
        return len(self.labels)


@dataclass(frozen=True)
class PriorityVector:
    labels: tuple[str, ...]
    weights: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "labels", _as_labels(self.labels))
        object.__setattr__(self, "weights", tuple(float(w) for w in self.weights))
        if len(self.weights) != len(self.labels):
            raise SchemaError("weights/labels length mismatch")
        if any(w < 0 for w in self.weights):
            raise SchemaError("weights must be >= 0")
        if abs(sum(self.weights) - 1.0) > WEIGHT_SUM_TOL:
            raise SchemaError("weights must sum to 1")

    def as_dict(self) -> dict[str, float]:
        return dict(zip(self.labels, self.weights))


@dataclass(frozen=True)
class ConsistencyReport:
    """CR < 0.1 is acceptable; n <= 2 cannot be inconsistent, so cr is
    undefined (None) and the report is acceptable by definition."""

    order: int
    lambda_max: float
    ci: float
    ri: float
    cr: float | None
    acceptable: bool


@dataclass(frozen=True)
class PairJudgment:
    """One consensus judgment: `worse` carries `value` times the cost of the
    other pair member on the criterion under comparison (1 = equal)."""

    tech_a: str
    tech_b: str
    worse: str
    value: float

    def __post_init__(self):
        if self.tech_a == self.tech_b:
            raise SchemaError(f"self-comparison of {self.tech_a!r}")
        if self.worse not in (self.tech_a, self.tech_b):
            raise SchemaError(
                f"worse={self.worse!r} is not a member of the pair "
                f"({self.tech_a!r}, {self.tech_b!r})"
            )
        v = float(self.value)
        if not 1.0 <= v <= 5.0:
            raise SchemaError(f"rating {v} outside the 1..5 scale")

    @property
    def better(self) -> str:
        return self.tech_b if self.worse == self.tech_a else self.tech_a


def matrix_from_ratings(labels: Sequence[str], judgments: Iterable[PairJudgment]) -> PairwiseMatrix:
    """Build the reciprocal matrix from one judgment per unordered pair.

    entries[worse][better] = value and entries[better][worse] = 1/value;
    a rating of 1 (equal) puts 1 on both sides.
    """
    labels = _as_labels(labels)
    index = {name: i for i, name in enumerate(labels)}
    n = len(labels)
    entries = np.ones((n, n))
    seen: set[frozenset] = set()
    for j in judgments:
        for name in (j.tech_a, j.tech_b):
            if name not in index:
                raise SchemaError(f"judgment references unknown alternative {name!r}")
        key = frozenset((j.tech_a, j.tech_b))
        if key in seen:
            raise SchemaError(f"duplicate judgment for pair ({j.tech_a!r}, {j.tech_b!r})")
        seen.add(key)
        w, b = index[j.worse], index[j.better]
        entries[w, b] = float(j.value)
        entries[b, w] = 1.0 / float(j.value)
    missing = [(a, b) for i, a in enumerate(labels) for b in labels[i + 1:]
               if frozenset((a, b)) not in seen]
    if missing:
        raise SchemaError(f"missing judgments for pairs: {missing}")
    return PairwiseMatrix(labels, entries)


def priority_from_matrix(m: PairwiseMatrix) -> PriorityVector:
    """Column-normalize the matrix and average across rows."""
    normalized = m.entries / m.entries.sum(axis=0)
    weights = normalized.mean(axis=1)
    weights = weights / weights.sum()
    return PriorityVector(m.labels, tuple(weights))


def lambda_max(m: PairwiseMatrix, w: PriorityVector) -> float:
    """Principal-eigenvalue estimate: mean of (M w)_i / w_i."""
    wv = np.asarray(w.weights)
    return float((m.entries.dot(wv) / wv).mean())


def consistency(m: PairwiseMatrix) -> ConsistencyReport:
    n = m.order
    if n > max(RANDOM_INDEX):
        raise UnsupportedOrderError(
            f"no random-index constant for order {n} (max {max(RANDOM_INDEX)})"
        )
    w = priority_from_matrix(m)
    lam = lambda_max(m, w)
    ci = max(0.0, (lam - n) / (n - 1))
    ri = RANDOM_INDEX[n]
    if n <= 2:
        # 2x2 reciprocal matrices are consistent by construction; RI is 0.
        return ConsistencyReport(n, lam, 0.0, ri, None, True)
    cr = ci / ri
    return ConsistencyReport(n, lam, ci, ri, cr, cr < CR_ACCEPTABLE_MAX)


# ---------------------------------------------------------------------------
# Direct normalization of quantitative columns.
# ---------------------------------------------------------------------------

class ImputationPolicy(str, Enum):
    """How technologies without a reported range enter a column.

    EXCLUDE_RENORMALIZE: no share (0.0), remaining shares span the column.
    WORST_OBSERVED: impute the worst (largest) observed mid-range.
    INJECT: caller supplies, per missing technology, either a raw value that
    joins the denominator or a final share that scales the others down.
    """

    EXCLUDE_RENORMALIZE = "exclude_renormalize"
    WORST_OBSERVED = "worst_observed"
    INJECT = "inject"


@dataclass(frozen=True)
class Injection:
    """Exactly one of `raw` (same units as the column) or `share` (final
    fraction of the column) must be given."""

    raw: float | None = None
    share: float | None = None

    def __post_init__(self):
        if (self.raw is None) == (self.share is None):
            raise SchemaError("injection needs exactly one of raw or share")
        if self.raw is not None and self.raw < 0:
            raise SchemaError("injected raw value must be >= 0")
        if self.share is not None and not 0.0 <= self.share <= 1.0:
            raise SchemaError("injected share must be in [0, 1]")


#: Cell-level markers recorded next to resolved scores.
FLAG_EXCLUDED = "excluded"
FLAG_IMPUTED_WORST = "imputed-worst"
FLAG_INJECTED_RAW = "injected-raw"
FLAG_INJECTED_SHARE = "injected-share"


def normalize_direct(vector: QuantVector, policy: ImputationPolicy,
                     injections: Mapping[str, Injection] | None = None,
                     ) -> tuple[dict[str, float], dict[str, str]]:
    """Turn mid-range values into column shares v_i / sum(v), resolving
    missing technologies per the policy. Returns (scores, per-cell flags);
    the scores always sum to 1.
    """
    if injections and policy is not ImputationPolicy.INJECT:
        raise SchemaError("injections are only meaningful under the INJECT policy")
    present = dict(vector.values)
    missing = set(vector.missing)
    if len(present) < 2:
        raise MissingDataError(
            f"criterion {vector.criterion.name}: need at least two reported "
            f"values, have {len(present)}"
        )
    flags: dict[str, str] = {}

    if policy is ImputationPolicy.WORST_OBSERVED:
        worst = max(present.values())
        for tech in missing:
            present[tech] = worst
            flags[tech] = FLAG_IMPUTED_WORST
        missing = set()

    share_injected: dict[str, float] = {}
    if policy is ImputationPolicy.INJECT:
        injections = injections or {}
        for tech in injections:
            if tech not in missing:
                raise SchemaError(
                    f"criterion {vector.criterion.name}: injection for "
                    f"{tech!r}, which is not missing"
                )
        unresolved = sorted(missing - set(injections))
        if unresolved:
            raise MissingDataError(
                f"criterion {vector.criterion.name}: INJECT policy lacks "
                f"values for {unresolved}"
            )
        for tech, inj in injections.items():
            if inj.raw is not None:
                present[tech] = inj.raw
                flags[tech] = FLAG_INJECTED_RAW
            else:
                share_injected[tech] = inj.share
                flags[tech] = FLAG_INJECTED_SHARE
        missing = set()
        total_injected_share = sum(share_injected.values())
        if total_injected_share >= 1.0:
            raise SchemaError(
                f"criterion {vector.criterion.name}: injected shares sum to "
                f"{total_injected_share}, leaving nothing for the rest"
            )
    else:
        total_injected_share = 0.0

    denom = sum(present.values())
    if denom <= 0.0:
        raise MissingDataError(
            f"criterion {vector.criterion.name}: all reported values are zero"
        )
    scale = 1.0 - total_injected_share
    scores = {tech: scale * v / denom for tech, v in present.items()}
    scores.update(share_injected)
    for tech in missing:  # EXCLUDE_RENORMALIZE leftovers
        scores[tech] = 0.0
        flags[tech] = FLAG_EXCLUDED
    return scores, flags


# ---------------------------------------------------------------------------
# Score matrix assembly and TNS ranking.
# ---------------------------------------------------------------------------

#: Column-sum tolerance for computed columns.
COLUMN_SUM_TOL = 1e-9
#: Column-sum tolerance for columns transcribed from display-rounded
#: two-decimal sources, whose printed entries can drift the sum to 0.99-1.01.
ROUNDED_COLUMN_SUM_TOL = 0.011


@dataclass(frozen=True, eq=False)
class ScoreMatrix:
    """Technologies x criteria grid of column shares in [0, 1]."""

    technologies: tuple[str, ...]
    criteria: tuple[int, ...]
    values: np.ndarray
    column_tolerance: tuple[float, ...] = field(default=())

    def __post_init__(self):
        object.__setattr__(self, "technologies", _as_labels(self.technologies))
        object.__setattr__(self, "criteria", tuple(int(c) for c in self.criteria))
        if len(set(self.criteria)) != len(self.criteria):
            raise SchemaError("duplicate criterion ids")
        v = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "values", v)
        if not self.column_tolerance:
            object.__setattr__(self, "column_tolerance",
                               (COLUMN_SUM_TOL,) * len(self.criteria))
        if len(self.column_tolerance) != len(self.criteria):
            raise SchemaError("one column tolerance per criterion required")
        shape = (len(self.technologies), len(self.criteria))
        if v.shape != shape:
            raise SchemaError(f"expected shape {shape}, got {v.shape}")
        if not np.all(np.isfinite(v)) or np.any(v < -1e-12) or np.any(v > 1 + 1e-12):
            raise SchemaError("scores must be finite and within [0, 1]")
        sums = v.sum(axis=0)
        for j, (cid, tol) in enumerate(zip(self.criteria, self.column_tolerance)):
            if abs(sums[j] - 1.0) > tol:
                raise SchemaError(
                    f"criterion {cid} column sums to {sums[j]:.6f}, not 1"
                )
        v.setflags(write=False)

    def column(self, criterion_id: int) -> dict[str, float]:
        j = self.criteria.index(criterion_id)
        return {tech: float(self.values[i, j]) for i, tech in enumerate(self.technologies)}


def assemble_score_matrix(technologies: Sequence[str],
                          columns: Mapping[int, Mapping[str, float]],
                          criteria: Sequence[int],
                          column_tolerance: Mapping[int, float] | float = COLUMN_SUM_TOL,
                          ) -> ScoreMatrix:
    """Stack per-criterion share columns into a ScoreMatrix in the given
    criterion order."""
    technologies = _as_labels(technologies)
    criteria = [int(c) for c in criteria]
    if len(set(criteria)) != len(criteria):
        raise SchemaError("duplicate criterion ids in requested order")
    missing = [c for c in criteria if c not in columns]
    if missing:
        raise SchemaError(f"no column for criteria {missing}")
    values = np.empty((len(technologies), len(criteria)))
    for j, cid in enumerate(criteria):
        col = columns[cid]
        if set(col) != set(technologies):
            raise SchemaError(
                f"criterion {cid} column covers {sorted(col)}, "
                f"expected {sorted(technologies)}"
            )
        values[:, j] = [col[tech] for tech in technologies]
    if isinstance(column_tolerance, Mapping):
        tols = tuple(float(column_tolerance.get(cid, COLUMN_SUM_TOL)) for cid in criteria)
    else:
        tols = (float(column_tolerance),) * len(criteria)
    return ScoreMatrix(technologies, tuple(criteria), values, tols)


@dataclass(frozen=True)
class TnsResult:
    """Total normalized scores with ascending ranks (rank 1 = lowest TNS =
    best). Technologies with exactly equal TNS are ranked lexicographically
    and reported in `ties`."""

    technologies: tuple[str, ...]
    tns: dict[str, float]
    rank: dict[str, int]
    ties: tuple[tuple[str, ...], ...]
    weights_used: tuple[float, ...]

    @property
    def by_rank(self) -> list[str]:
        return sorted(self.technologies, key=lambda t: self.rank[t])


def aggregate_tns(scores: ScoreMatrix, weights: Sequence[float] | None = None) -> TnsResult:
    """TNS_i = sum_c weight_c * score_ic, ranked ascending."""
    k = len(scores.criteria)
    if weights is None:
        weights = (1.0 / k,) * k
    weights = tuple(float(w) for w in weights)
    if len(weights) != k:
        raise SchemaError(f"expected {k} weights, got {len(weights)}")
    if any(w < 0 for w in weights):
        raise SchemaError("weights must be >= 0")
    if abs(sum(weights) - 1.0) > WEIGHT_SUM_TOL:
        raise SchemaError(f"weights sum to {sum(weights)}, not 1")

    tns_values = scores.values.dot(np.asarray(weights))
    tns = {tech: float(v) for tech, v in zip(scores.technologies, tns_values)}
    ordered = sorted(scores.technologies, key=lambda t: (tns[t], t))
    rank = {tech: i + 1 for i, tech in enumerate(ordered)}

    groups: dict[float, list[str]] = {}
    for tech in scores.technologies:
        groups.setdefault(tns[tech], []).append(tech)
    ties = tuple(tuple(sorted(g)) for v, g in sorted(groups.items()) if len(g) > 1)
    return TnsResult(scores.technologies, tns, rank, ties, weights)
