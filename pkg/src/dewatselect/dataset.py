"""Dataset vocabulary and ingestion for technology performance tables.

A performance table holds, per technology and per measured parameter, the
minimum and maximum of the effluent/operating ranges reported in the source
literature. Quantitative criteria are scored from the mid-range (min+max)/2
of their parameter; qualitative criteria are elicited from an expert panel
instead and never pass through this module.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Mapping

from .errors import MissingDataError, SchemaError


class Parameter(str, Enum):
    """Measured parameter codes, fixed units per code."""

    COD_T = "COD_t"
    BOD5 = "BOD5"
    TSS = "TSS"
    NH4N = "NH4N"
    TP = "TP"
    HRT = "HRT"
    TEMP = "TEMP"
    PH = "PH"
    Q = "Q"
    HLR = "HLR"


#: Unit attached to each parameter code. Concentrations in mg/L, hydraulic
#: retention time in days; pH is dimensionless.
PARAMETER_UNITS: dict[Parameter, str] = {
    Parameter.COD_T: "mg/L",
    Parameter.BOD5: "mg/L",
    Parameter.TSS: "mg/L",
    Parameter.NH4N: "mg/L",
    Parameter.TP: "mg/L",
    Parameter.HRT: "day",
    Parameter.TEMP: "°C",
    Parameter.PH: "",
    Parameter.Q: "m³/day",
    Parameter.HLR: "m³/m²/day",
}


class CriterionKind(str, Enum):
    QUALITATIVE = "qualitative"
    QUANTITATIVE = "quantitative"


@dataclass(frozen=True)
class Criterion:
    """One decision criterion. All criteria in this study are costs:
    lower raw values are better."""

    id: int
    name: str
    kind: CriterionKind
    parameter: Parameter | None = None

    def __post_init__(self):
        if not 1 <= self.id <= 10:
            raise SchemaError(f"criterion id must be 1..10, got {self.id}")
        if self.kind is CriterionKind.QUANTITATIVE and self.parameter is None:
            raise SchemaError(f"quantitative criterion {self.id} needs a parameter")
        if self.kind is CriterionKind.QUALITATIVE and self.parameter is not None:
            raise SchemaError(f"qualitative criterion {self.id} cannot bind a parameter")


#: The ten criteria of the study, in column order. 1-4 are life-cycle cost
#: criteria assessed by the expert panel; 5-10 are effluent/operating
#: parameters scored from mid-ranges.
STUDY_CRITERIA: tuple[Criterion, ...] = (
    Criterion(1, "capital investment", CriterionKind.QUALITATIVE),
    Criterion(2, "capital replacement", CriterionKind.QUALITATIVE),
    Criterion(3, "electricity", CriterionKind.QUALITATIVE),
    Criterion(4, "operation and maintenance", CriterionKind.QUALITATIVE),
    Criterion(5, "COD_t", CriterionKind.QUANTITATIVE, Parameter.COD_T),
    Criterion(6, "BOD5", CriterionKind.QUANTITATIVE, Parameter.BOD5),
    Criterion(7, "TSS", CriterionKind.QUANTITATIVE, Parameter.TSS),
    Criterion(8, "NH4N", CriterionKind.QUANTITATIVE, Parameter.NH4N),
    Criterion(9, "TP", CriterionKind.QUANTITATIVE, Parameter.TP),
    Criterion(10, "HRT", CriterionKind.QUANTITATIVE, Parameter.HRT),
)

CRITERIA_BY_ID: dict[int, Criterion] = {c.id: c for c in STUDY_CRITERIA}

#: Parameters that feed a quantitative criterion. TEMP/PH/Q/HLR are ingested
#: and stored but never scored.
SCORED_PARAMETERS: tuple[Parameter, ...] = tuple(
    c.parameter for c in STUDY_CRITERIA if c.parameter is not None
)

#: Short codes for the seven technologies of the reference case study.
TECHNOLOGY_NAMES: dict[str, str] = {
    "CW": "Constructed wetlands",
    "Septic": "Septic tanks",
    "MSL": "Multi-soil-layering",
    "Sand": "Sand filter",
    "RBC": "Rotating biological contactors",
    "MBBR": "Moving bed biofilm reactors",
    "DHS": "Downflow hanging sponge filter",
}


@dataclass(frozen=True)
class RangeRecord:
    """Reported min/max range of one parameter for one technology.

    ``present=False`` marks a dash in the source table: the study did not
    report that parameter for that technology.
    """

    technology: str
    parameter: Parameter
    min: float = 0.0
    max: float = 0.0
    present: bool = True

    def __post_init__(self):
        if self.present:
            for bound in (self.min, self.max):
                if not isinstance(bound, (int, float)) or not math.isfinite(bound):
                    raise SchemaError(
                        f"{self.technology}/{self.parameter.value}: bounds must "
                        f"be finite numbers, got {bound!r}"
                    )
            if self.min < 0 or self.max < 0:
                raise SchemaError(
                    f"{self.technology}/{self.parameter.value}: negative bound"
                )
            if self.min > self.max:
                raise SchemaError(
                    f"{self.technology}/{self.parameter.value}: min {self.min} > max {self.max}"
                )

    @property
    def midrange(self) -> float:
        return midrange(self)


def midrange(record: RangeRecord) -> float:
    """Point estimate of a reported range: the arithmetic mean of its endpoints."""
    if not record.present:
        raise MissingDataError(
            f"no reported range for {record.technology}/{record.parameter.value}"
        )
    return (record.min + record.max) / 2.0


@dataclass(frozen=True)
class PerformanceTable:
    """Per-technology, per-parameter measurement ranges.

    Every scored parameter has a record (possibly ``present=False``) for
    every technology; unscored parameters may be sparse.
    """

    technologies: tuple[str, ...]
    records: Mapping[tuple[str, Parameter], RangeRecord] = field(default_factory=dict)

    def __post_init__(self):
        if not 2 <= len(self.technologies) <= 64:
            raise SchemaError(
                f"expected 2..64 technologies, got {len(self.technologies)}"
            )
        if len(set(self.technologies)) != len(self.technologies):
            raise SchemaError("duplicate technology names")
        known = set(self.technologies)
        for (tech, param), rec in self.records.items():
            if tech not in known:
                raise SchemaError(f"record for unknown technology {tech!r}")
            if rec.technology != tech or rec.parameter != param:
                raise SchemaError(f"record key/value mismatch for {tech}/{param.value}")
        for param in SCORED_PARAMETERS:
            for tech in self.technologies:
                if (tech, param) not in self.records:
                    raise SchemaError(
                        f"missing record for {tech}/{param.value}; "
                        "use an absent record (dashes) if unreported"
                    )

    def record(self, technology: str, parameter: Parameter) -> RangeRecord:
        return self.records[(technology, parameter)]


@dataclass(frozen=True)
class QuantVector:
    """Mid-range values of one quantitative criterion across technologies."""

    criterion: Criterion
    technologies: tuple[str, ...]
    values: Mapping[str, float]
    missing: frozenset[str]

    def __post_init__(self):
        techs = set(self.technologies)
        if set(self.values) | self.missing != techs or set(self.values) & self.missing:
            raise SchemaError("values and missing must partition the technology list")
        for tech, v in self.values.items():
            if v < 0:
                raise SchemaError(f"negative mid-range for {tech}")


def build_criterion_vector(table: PerformanceTable, criterion: Criterion) -> QuantVector:
    """Mid-range per technology for a quantitative criterion.

    Technologies whose source table shows a dash land in ``missing``;
    resolving them is the scoring stage's job, not this one's.
    """
    if criterion.kind is not CriterionKind.QUANTITATIVE:
        raise SchemaError(
            f"criterion {criterion.id} ({criterion.name}) is qualitative; "
            "qualitative criteria are scored from panel judgments"
        )
    assert criterion.parameter is not None
    values: dict[str, float] = {}
    missing: set[str] = set()
    for tech in table.technologies:
        rec = table.record(tech, criterion.parameter)
        if rec.present:
            values[tech] = midrange(rec)
        else:
            missing.add(tech)
    return QuantVector(criterion, table.technologies, values, frozenset(missing))


# ---------------------------------------------------------------------------
# CSV ingestion.  Schema: header "technology,parameter,min,max"; dash or
# empty min/max cells mark an unreported range; lines starting with '#' are
# comments.
# ---------------------------------------------------------------------------

CSV_HEADER = ("technology", "parameter", "min", "max")

_ABSENT = {"-", ""}


def _parse_bound(cell: str) -> float | None:
    cell = cell.strip()
    if cell in _ABSENT:
        return None
    try:
        return float(cell)
    except ValueError:
        raise SchemaError(f"non-numeric bound {cell!r}") from None


def parse_performance_table(text: str) -> PerformanceTable:
    """Parse the range CSV into a validated PerformanceTable.

    All row-level problems are collected and reported together, each with
    its 1-based physical line number.
    """
    technologies: list[str] = []
    records: dict[tuple[str, Parameter], RangeRecord] = {}
    problems: list[str] = []

    lines = text.splitlines()
    header_seen = False
    for lineno, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        cells = next(csv.reader([raw]))
        if not header_seen:
            if tuple(c.strip() for c in cells) != CSV_HEADER:
                raise SchemaError(
                    f"line {lineno}: expected header {','.join(CSV_HEADER)!r}"
                )
            header_seen = True
            continue
        if len(cells) != 4:
            problems.append(f"line {lineno}: expected 4 columns, got {len(cells)}")
            continue
        tech = cells[0].strip()
        code = cells[1].strip()
        if not tech:
            problems.append(f"line {lineno}: empty technology name")
            continue
        try:
            param = Parameter(code)
        except ValueError:
            problems.append(f"line {lineno}: unknown parameter code {code!r}")
            continue
        try:
            lo = _parse_bound(cells[2])
            hi = _parse_bound(cells[3])
        except SchemaError as exc:
            problems.append(f"line {lineno}: {exc}")
            continue
        if (lo is None) != (hi is None):
            problems.append(f"line {lineno}: one-sided range; use dashes for both bounds")
            continue
        if (tech, param) in records:
            problems.append(f"line {lineno}: duplicate record for {tech}/{param.value}")
            continue
        if tech not in technologies:
            technologies.append(tech)
        try:
            if lo is None:
                rec = RangeRecord(tech, param, present=False)
            else:
                rec = RangeRecord(tech, param, min=lo, max=hi)
        except SchemaError as exc:
            problems.append(f"line {lineno}: {exc}")
            continue
        records[(tech, param)] = rec

    if not header_seen:
        raise SchemaError("empty document: missing header row")
    if problems:
        raise SchemaError("; ".join(problems))

    # Dashes the source omitted entirely still need absent records for the
    # scored parameters, so downstream code can rely on full coverage.
    for param in SCORED_PARAMETERS:
        for tech in technologies:
            records.setdefault((tech, param), RangeRecord(tech, param, present=False))

    return PerformanceTable(tuple(technologies), records)


def serialize_performance_table(table: PerformanceTable) -> str:
    """Emit the range CSV; parsing it back yields an identical table."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for tech in table.technologies:
        for param in Parameter:
            rec = table.records.get((tech, param))
            if rec is None:
                continue
            if rec.present:
                writer.writerow([tech, param.value, repr(rec.min), repr(rec.max)])
            else:
                writer.writerow([tech, param.value, "-", "-"])
    return buf.getvalue()


def load_performance_table(path) -> PerformanceTable:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_performance_table(fh.read())


def quantitative_criteria(criteria: Iterable[Criterion] = STUDY_CRITERIA) -> list[Criterion]:
    return [c for c in criteria if c.kind is CriterionKind.QUANTITATIVE]


def qualitative_criteria(criteria: Iterable[Criterion] = STUDY_CRITERIA) -> list[Criterion]:
    return [c for c in criteria if c.kind is CriterionKind.QUALITATIVE]
