"""Decision support for selecting decentralized wastewater treatment
technologies: performance mid-ranges, direct cost normalization, pairwise
judgment aggregation with consistency control, Delphi-style panel sessions,
TNS ranking, and a two-factor ANOVA significance check.
"""

from .ahp import (CR_ACCEPTABLE_MAX, RANDOM_INDEX, ConsistencyReport,
                  ImputationPolicy, Injection, PairJudgment, PairwiseMatrix,
                  PriorityVector, ScoreMatrix, TnsResult, aggregate_tns,
                  assemble_score_matrix, consistency, lambda_max,
                  matrix_from_ratings, normalize_direct, priority_from_matrix)
from .anova import AnovaDecision, AnovaTable, anova_two_factor_no_rep, decide
from .dataset import (CRITERIA_BY_ID, STUDY_CRITERIA, TECHNOLOGY_NAMES,
                      Criterion, CriterionKind, Parameter, PerformanceTable,
                      QuantVector, RangeRecord, build_criterion_vector,
                      load_performance_table, midrange, parse_performance_table,
                      qualitative_criteria, quantitative_criteria,
                      serialize_performance_table)
from .delphi import (ConsensusJudgment, DelphiConfig, DelphiSession,
                     ItemAggregate, RatingItem, RoundSummary, SessionState,
                     make_item_id, rating_items)
from .errors import (ConsistencyGateError, DewatError, IncompleteRoundError,
                     MissingDataError, SchemaError, SessionStateError,
                     UnsupportedOrderError)
from .fdist import f_cdf, f_critical, f_sf, log_gamma, reg_inc_beta
from .pipeline import (Injections, PipelineOptions, PipelineResult,
                       judgments_from_doc, parse_policy, render_report,
                       report_document, run_pipeline)

__version__ = "0.1.0"


def fixture_path(name: str):
    """Path to a bundled data file (reference datasets under fixtures/)."""
    from importlib.resources import files

    return files("dewatselect").joinpath("fixtures", name)


__all__ = [
    "AnovaDecision", "AnovaTable", "CR_ACCEPTABLE_MAX", "CRITERIA_BY_ID",
    "ConsensusJudgment", "ConsistencyGateError", "ConsistencyReport",
    "Criterion", "CriterionKind", "DelphiConfig", "DelphiSession",
    "DewatError", "ImputationPolicy", "IncompleteRoundError", "Injection",
    "Injections", "ItemAggregate", "MissingDataError", "PairJudgment",
    "PairwiseMatrix", "Parameter", "PerformanceTable", "PipelineOptions",
    "PipelineResult", "PriorityVector", "QuantVector", "RANDOM_INDEX",
    "RangeRecord", "RatingItem", "RoundSummary", "STUDY_CRITERIA",
    "SchemaError", "ScoreMatrix", "SessionState", "SessionStateError",
    "TECHNOLOGY_NAMES", "TnsResult", "UnsupportedOrderError",
    "aggregate_tns", "anova_two_factor_no_rep", "assemble_score_matrix",
    "build_criterion_vector", "consistency", "decide", "f_cdf", "f_critical",
    "f_sf", "fixture_path", "judgments_from_doc", "lambda_max",
    "load_performance_table", "log_gamma", "make_item_id",
    "matrix_from_ratings", "midrange", "normalize_direct",
    "parse_performance_table", "parse_policy", "priority_from_matrix",
    "qualitative_criteria", "quantitative_criteria", "rating_items",
    "reg_inc_beta", "render_report", "report_document", "run_pipeline",
    "serialize_performance_table",
]
