"""Two-factor analysis of variance without replication.

The grid carries exactly one observation per (row, column) cell; rows are
the factor under test (technologies here), columns the levels (criteria).
With no replication there is no interaction term: the residual after
removing row and column effects is the error estimate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import SchemaError
from .fdist import f_critical, f_sf

#: Sums of squares at or below this fraction of max(1, sum of squared cells)
#: are floating-point residue of an exactly flat effect and are treated as 0.
_ZERO_SS_REL = 1e-24


@dataclass(frozen=True)
class AnovaTable:
    ss_rows: float
    ss_cols: float
    ss_error: float
    ss_total: float
    df_rows: int
    df_cols: int
    df_error: int
    ms_rows: float
    ms_cols: float
    ms_error: float
    f_rows: float
    f_cols: float
    p_rows: float
    p_cols: float
    #: True when the error mean square vanished and the F/p values follow
    #: the degenerate convention (F=0, p=1 for a vanished effect; F=inf,
    #: p=0 for a real effect over zero error).
    ms_error_zero: bool


@dataclass(frozen=True)
class AnovaDecision:
    alpha: float
    reject_rows: bool
    f_critical_rows: float


def anova_two_factor_no_rep(matrix) -> AnovaTable:
    """Classical r x c decomposition with one observation per cell."""
    x = np.asarray(matrix, dtype=float)
    if x.ndim != 2:
        raise SchemaError(f"expected a 2-D grid, got {x.ndim} dimension(s)")
    r, c = x.shape
    if r < 2 or c < 2:
        raise SchemaError(f"need at least a 2x2 grid, got {r}x{c}")
    if not np.all(np.isfinite(x)):
        raise SchemaError("grid contains non-finite cells")

    # Reductions over x and x.T sum in different orders and can drift by an
    # ulp, so both orientations are mapped to one canonical working array;
    # that makes transposing the input swap the row/column outputs exactly.
    swapped = _canonical_is_transposed(x)
    w = np.ascontiguousarray(x.T if swapped else x)

    grand = w.mean()
    row_means = w.mean(axis=1)
    col_means = w.mean(axis=0)
    ss_a = float(w.shape[1] * ((row_means - grand) ** 2).sum())
    ss_b = float(w.shape[0] * ((col_means - grand) ** 2).sum())
    residual = w - row_means[:, None] - col_means[None, :] + grand
    ss_error = float((residual ** 2).sum())
    ss_total = float(((w - grand) ** 2).sum())

    tiny = _ZERO_SS_REL * max(1.0, float((w * w).sum()))
    ss_a, ss_b, ss_error, ss_total = (
        0.0 if ss <= tiny else ss for ss in (ss_a, ss_b, ss_error, ss_total)
    )
    ss_rows, ss_cols = (ss_b, ss_a) if swapped else (ss_a, ss_b)

    df_rows, df_cols = r - 1, c - 1
    df_error = df_rows * df_cols
    ms_rows = ss_rows / df_rows
    ms_cols = ss_cols / df_cols
    ms_error = ss_error / df_error

    if ms_error == 0.0:
        f_rows, p_rows = _degenerate_f(ms_rows)
        f_cols, p_cols = _degenerate_f(ms_cols)
        ms_error_zero = True
    else:
        f_rows = ms_rows / ms_error
        f_cols = ms_cols / ms_error
        p_rows = f_sf(f_rows, df_rows, df_error)
        p_cols = f_sf(f_cols, df_cols, df_error)
        ms_error_zero = False

    return AnovaTable(ss_rows, ss_cols, ss_error, ss_total,
                      df_rows, df_cols, df_error,
                      ms_rows, ms_cols, ms_error,
                      f_rows, f_cols, p_rows, p_cols, ms_error_zero)


def _canonical_is_transposed(x: np.ndarray) -> bool:
    """True when the transpose is the canonical orientation to compute on.
    Rectangular grids canonicalize to rows <= cols; square ones break the
    tie on raw bytes, which is stable across x and x.T."""
    r, c = x.shape
    if r != c:
        return r > c
    return np.ascontiguousarray(x.T).tobytes() < np.ascontiguousarray(x).tobytes()


def _degenerate_f(ms_effect: float) -> tuple[float, float]:
    if ms_effect == 0.0:
        return 0.0, 1.0
    return math.inf, 0.0


def decide(table: AnovaTable, alpha: float = 0.05) -> AnovaDecision:
    """Reject the no-row-effect null when p_rows < alpha; the critical F is
    reported so the equivalent F-comparison is visible in outputs."""
    if not 0.0 < alpha < 1.0:
        raise SchemaError(f"alpha must be in (0, 1), got {alpha}")
    return AnovaDecision(alpha, table.p_rows < alpha,
                         f_critical(alpha, table.df_rows, table.df_error))


def anova_block(table: AnovaTable, decision: AnovaDecision) -> dict:
    """JSON-safe report block (infinite F sentinels become the string
    "inf", which strict JSON cannot carry as a number)."""
    def num(x: float):
        return x if math.isfinite(x) else "inf"

    return {
        "ss_rows": table.ss_rows, "ss_cols": table.ss_cols,
        "ss_error": table.ss_error, "ss_total": table.ss_total,
        "df_rows": table.df_rows, "df_cols": table.df_cols,
        "df_error": table.df_error,
        "ms_rows": table.ms_rows, "ms_cols": table.ms_cols,
        "ms_error": table.ms_error,
        "f_rows": num(table.f_rows), "f_cols": num(table.f_cols),
        "p_rows": table.p_rows, "p_cols": table.p_cols,
        "ms_error_zero": table.ms_error_zero,
        "decision": {
            "alpha": decision.alpha,
            "reject_rows": decision.reject_rows,
            "f_critical_rows": decision.f_critical_rows,
        },
    }
