"""End-to-end study execution: mid-ranges to normalized columns, consensus
judgments (or injected columns) to qualitative priorities, assembly, TNS
ranking, and the row-effect ANOVA, plus the deterministic report document.

The ten study criteria are fixed; the technology list comes from the
performance table. Qualitative criteria need either consensus judgments
(which pass the consistency gate) or externally supplied priority columns;
quantitative criteria are computed, with missing cells resolved by the
imputation policy.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from .ahp import (COLUMN_SUM_TOL, ROUNDED_COLUMN_SUM_TOL, ConsistencyReport,
                  ImputationPolicy, Injection, PairJudgment, ScoreMatrix,
                  TnsResult, aggregate_tns, assemble_score_matrix, consistency,
                  matrix_from_ratings, normalize_direct, priority_from_matrix)
from .anova import AnovaDecision, AnovaTable, anova_block, anova_two_factor_no_rep, decide
from .dataset import (CRITERIA_BY_ID, STUDY_CRITERIA, CriterionKind,
                      PerformanceTable, build_criterion_vector,
                      qualitative_criteria, quantitative_criteria)
from .delphi import ConsensusJudgment
from .errors import ConsistencyGateError, MissingDataError, SchemaError

#: Marks where a qualitative column came from.
SOURCE_COMPUTED = "computed"
SOURCE_JUDGMENTS = "judgments"
SOURCE_INJECTED = "injected-column"

DEFAULT_ALPHA = 0.05

_POLICY_ALIASES = {
    "exclude": ImputationPolicy.EXCLUDE_RENORMALIZE,
    "worst": ImputationPolicy.WORST_OBSERVED,
}


def parse_policy(name: str) -> ImputationPolicy:
    try:
        return ImputationPolicy(name)
    except ValueError:
        pass
    try:
        return _POLICY_ALIASES[name]
    except KeyError:
        valid = sorted({p.value for p in ImputationPolicy} | set(_POLICY_ALIASES))
        raise SchemaError(f"unknown imputation policy {name!r}; one of {valid}") from None


@dataclass(frozen=True)
class Injections:
    """External values for cells and columns the dataset cannot provide:
    whole qualitative priority columns, and per-cell values for missing
    quantitative data (used only under the INJECT policy)."""

    qualitative_columns: Mapping[int, Mapping[str, float]] = field(default_factory=dict)
    quantitative_cells: Mapping[int, Mapping[str, Injection]] = field(default_factory=dict)

    def __post_init__(self):
        for cid in self.qualitative_columns:
            crit = CRITERIA_BY_ID.get(cid)
            if crit is None or crit.kind is not CriterionKind.QUALITATIVE:
                raise SchemaError(f"criterion {cid} cannot take an injected column")
        for cid in self.quantitative_cells:
            crit = CRITERIA_BY_ID.get(cid)
            if crit is None or crit.kind is not CriterionKind.QUANTITATIVE:
                raise SchemaError(f"criterion {cid} cannot take injected cells")

    @classmethod
    def from_dict(cls, doc: Mapping) -> "Injections":
        if not isinstance(doc, Mapping):
            raise SchemaError("injection document must be a JSON object")
        unknown = set(doc) - {"qualitative_columns", "quantitative_cells"}
        if unknown:
            raise SchemaError(f"unknown injection keys: {sorted(unknown)}")
        columns = {}
        for key, col in (doc.get("qualitative_columns") or {}).items():
            cid = _criterion_id(key)
            if not isinstance(col, Mapping):
                raise SchemaError(f"criterion {cid}: injected column must map technology to share")
            columns[cid] = {tech: _number(v, f"criterion {cid} share for {tech!r}")
                            for tech, v in col.items()}
        cells = {}
        for key, per_tech in (doc.get("quantitative_cells") or {}).items():
            cid = _criterion_id(key)
            if not isinstance(per_tech, Mapping):
                raise SchemaError(f"criterion {cid}: injected cells must map technology to value")
            resolved = {}
            for tech, cell in per_tech.items():
                if not isinstance(cell, Mapping) or not set(cell) <= {"raw", "share"}:
                    raise SchemaError(
                        f"criterion {cid} cell for {tech!r} must be "
                        '{"raw": value} or {"share": value}'
                    )
                resolved[tech] = Injection(**{k: _number(v, f"{tech!r} {k}")
                                              for k, v in cell.items()})
            cells[cid] = resolved
        return cls(columns, cells)


def _criterion_id(key) -> int:
    try:
        return int(key)
    except (TypeError, ValueError):
        raise SchemaError(f"criterion id {key!r} is not an integer") from None


def _number(v, what: str) -> float:
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise SchemaError(f"{what} must be a number, got {v!r}")
    return float(v)


def judgments_from_doc(doc) -> list[ConsensusJudgment]:
    """Validate a judgment-export document (a JSON list of records)."""
    if not isinstance(doc, list):
        raise SchemaError("judgments document must be a JSON list")
    out = []
    for i, rec in enumerate(doc):
        if not isinstance(rec, Mapping):
            raise SchemaError(f"judgment {i}: expected an object")
        try:
            cid = _criterion_id(rec["criterion_id"])
            tech_a, tech_b, worse = rec["tech_a"], rec["tech_b"], rec["worse"]
            value = rec["value"]
        except KeyError as exc:
            raise SchemaError(f"judgment {i}: missing key {exc.args[0]!r}") from None
        crit = CRITERIA_BY_ID.get(cid)
        if crit is None or crit.kind is not CriterionKind.QUALITATIVE:
            raise SchemaError(f"judgment {i}: criterion {cid} is not qualitative")
        value = _number(value, f"judgment {i} value")
        if not value.is_integer() or not 1 <= value <= 5:
            raise SchemaError(f"judgment {i}: value {value} outside the 1..5 scale")
        consensus = rec.get("consensus", True)
        if not isinstance(consensus, bool):
            raise SchemaError(f"judgment {i}: consensus flag must be boolean")
        out.append(ConsensusJudgment(cid, tech_a, tech_b, worse, int(value), consensus))
    return out


@dataclass(frozen=True)
class PipelineOptions:
    weights: tuple[float, ...] | None = None
    policy: ImputationPolicy = ImputationPolicy.EXCLUDE_RENORMALIZE
    alpha: float = DEFAULT_ALPHA
    allow_inconsistent: bool = False


@dataclass(frozen=True, eq=False)
class PipelineResult:
    score_matrix: ScoreMatrix
    cell_flags: dict[int, dict[str, str]]
    column_sources: dict[int, str]
    consistency: dict[int, ConsistencyReport]
    tns: TnsResult
    anova: AnovaTable
    decision: AnovaDecision
    options: PipelineOptions
    non_consensus_criteria: tuple[int, ...]


def run_pipeline(table: PerformanceTable,
                 judgments: Iterable[ConsensusJudgment] | None = None,
                 injections: Injections | None = None,
                 options: PipelineOptions = PipelineOptions()) -> PipelineResult:
    technologies = table.technologies
    injections = injections or Injections()
    if injections.quantitative_cells and options.policy is not ImputationPolicy.INJECT:
        raise SchemaError(
            "quantitative cell injections require the inject policy, "
            f"not {options.policy.value!r}"
        )
    columns: dict[int, dict[str, float]] = {}
    tolerances: dict[int, float] = {}
    cell_flags: dict[int, dict[str, str]] = {}
    column_sources: dict[int, str] = {}

    for crit in quantitative_criteria():
        vector = build_criterion_vector(table, crit)
        cells = None
        if options.policy is ImputationPolicy.INJECT:
            cells = injections.quantitative_cells.get(crit.id)
        scores, flags = normalize_direct(vector, options.policy, cells)
        columns[crit.id] = scores
        tolerances[crit.id] = COLUMN_SUM_TOL
        column_sources[crit.id] = SOURCE_COMPUTED
        if flags:
            cell_flags[crit.id] = flags

    by_criterion: dict[int, list[ConsensusJudgment]] = {}
    non_consensus: set[int] = set()
    for j in judgments or ():
        by_criterion.setdefault(j.criterion_id, []).append(j)
        if not j.consensus:
            non_consensus.add(j.criterion_id)

    reports: dict[int, ConsistencyReport] = {}
    for crit in qualitative_criteria():
        if crit.id in by_criterion:
            ratings = [PairJudgment(j.tech_a, j.tech_b, j.worse, j.value)
                       for j in by_criterion[crit.id]]
            matrix = matrix_from_ratings(technologies, ratings)
            reports[crit.id] = consistency(matrix)
            columns[crit.id] = priority_from_matrix(matrix).as_dict()
            tolerances[crit.id] = COLUMN_SUM_TOL
            column_sources[crit.id] = SOURCE_JUDGMENTS
        elif crit.id in injections.qualitative_columns:
            col = dict(injections.qualitative_columns[crit.id])
            if set(col) != set(technologies):
                raise SchemaError(
                    f"criterion {crit.id}: injected column covers "
                    f"{sorted(col)}, expected {sorted(technologies)}"
                )
            if any(v < 0 for v in col.values()):
                raise SchemaError(f"criterion {crit.id}: negative injected share")
            columns[crit.id] = col
            tolerances[crit.id] = ROUNDED_COLUMN_SUM_TOL
            column_sources[crit.id] = SOURCE_INJECTED
        else:
            raise MissingDataError(
                f"criterion {crit.id} ({crit.name}): no consensus judgments "
                "and no injected priority column"
            )

    offending = [(cid, reports[cid].cr) for cid in sorted(reports)
                 if not reports[cid].acceptable]
    if offending and not options.allow_inconsistent:
        raise ConsistencyGateError(offending)

    score_matrix = assemble_score_matrix(
        technologies, columns, [c.id for c in STUDY_CRITERIA], tolerances)
    tns = aggregate_tns(score_matrix, options.weights)
    anova = anova_two_factor_no_rep(score_matrix.values)
    decision = decide(anova, options.alpha)
    return PipelineResult(score_matrix, cell_flags, column_sources, reports,
                          tns, anova, decision, options,
                          tuple(sorted(non_consensus)))


# ---------------------------------------------------------------------------
# Report document. Deterministic by construction: no timestamps, canonical
# key order, inputs echoed as content hashes.
# ---------------------------------------------------------------------------

REPORT_SCHEMA = "dewatselect-report/1"


def _sha256(text: str | None) -> str | None:
    if text is None:
        return None
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def report_document(result: PipelineResult, dataset_text: str,
                    judgments_text: str | None = None,
                    injections_text: str | None = None) -> dict:
    sm = result.score_matrix
    opts = result.options
    weights = list(result.tns.weights_used)
    consistency_block = {
        str(cid): {
            "order": rep.order,
            "lambda_max": rep.lambda_max,
            "ci": rep.ci,
            "ri": rep.ri,
            "cr": rep.cr,
            "acceptable": rep.acceptable,
        }
        for cid, rep in result.consistency.items()
    }
    return {
        "schema": REPORT_SCHEMA,
        "inputs": {
            "dataset_sha256": _sha256(dataset_text),
            "judgments_sha256": _sha256(judgments_text),
            "injections_sha256": _sha256(injections_text),
            "options": {
                "weights": weights,
                "policy": opts.policy.value,
                "alpha": opts.alpha,
                "allow_inconsistent": opts.allow_inconsistent,
            },
        },
        "technologies": list(sm.technologies),
        "criteria": [
            {
                "id": crit.id,
                "name": crit.name,
                "kind": crit.kind.value,
                "parameter": crit.parameter.value if crit.parameter else None,
                "source": result.column_sources[crit.id],
            }
            for crit in STUDY_CRITERIA
        ],
        "columns": {str(cid): sm.column(cid) for cid in sm.criteria},
        "cell_flags": {str(cid): dict(flags)
                       for cid, flags in sorted(result.cell_flags.items())},
        "consistency": consistency_block,
        "non_consensus_criteria": list(result.non_consensus_criteria),
        "tns": result.tns.tns,
        "rank": result.tns.rank,
        "ties": [list(group) for group in result.tns.ties],
        "anova": anova_block(result.anova, result.decision),
    }


def render_report(doc: Mapping) -> str:
    return json.dumps(doc, sort_keys=True, indent=2, allow_nan=False) + "\n"
