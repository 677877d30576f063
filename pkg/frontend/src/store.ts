/**
 * Pure projections from server responses to view models. No fetching, no
 * DOM, no mutable state: the server is the only authority on round state,
 * and rebuilding a view from the same responses yields the same result.
 */

import {
  ApiError,
  type ItemAggregate,
  type ReportDoc,
  type SessionItem,
  type SessionStateName,
  type SessionSummary,
} from "./api.js";
import { SCALE, criterionName } from "./scale.js";
import { seededShuffle } from "./shuffle.js";

export interface RatingChoice {
  value: number;
  label: string;
  description: string;
}

export interface ExpertItemView {
  id: string;
  criterionId: number;
  criterionName: string;
  subject: string;
  reference: string;
  myValue: number | null;
  choices: RatingChoice[];
}

export interface ExpertView {
  sessionId: string;
  state: SessionStateName;
  round: number;
  readOnly: boolean;
  banner: string | null;
  items: ExpertItemView[];
  feedback: FeedbackView | null;
}

export interface FeedbackItemView {
  id: string;
  criterionName: string;
  subject: string;
  reference: string;
  median: number;
  iqr: number;
  mean: number;
  count: number;
  changed: number;
  settled: boolean;
}

export interface FeedbackView {
  round: number;
  items: FeedbackItemView[];
  allSettled: boolean;
}

export interface FacilitatorView {
  sessionId: string;
  state: SessionStateName;
  round: number;
  maxRounds: number;
  expertCount: number;
  badge: string;
  canCloseRound: boolean;
  canAdvance: boolean;
  board: FeedbackItemView[];
  rounds: FeedbackView[];
}

export interface RankedBar {
  technology: string;
  tns: number;
  rank: number;
  /** 0..100, proportional to TNS (longer bar = worse score). */
  widthPct: number;
}

export interface ResultsView {
  ranking: RankedBar[];
  topThree: string[];
  anovaBadge: string;
  anovaRejected: boolean;
  alpha: number;
  pRows: number;
  fRows: number | "inf";
  ties: string[][];
}

const BANNERS: Record<Exclude<SessionStateName, "collecting">, string> = {
  feedback:
    "The round is closed while everyone reviews the aggregated feedback; ratings reopen when the facilitator advances the session.",
  converged: "The panel reached consensus; ratings are final.",
  exhausted: "The session ended without consensus after the last allowed round; ratings are final.",
};

function feedbackItem(
  item: SessionItem,
  agg: ItemAggregate,
  iqrMax: number,
): FeedbackItemView {
  return {
    id: item.id,
    criterionName: criterionName(item.criterion_id),
    subject: item.subject,
    reference: item.reference,
    median: agg.median,
    iqr: agg.iqr,
    mean: agg.mean,
    count: agg.count,
    changed: agg.changed_from_previous,
    settled: agg.iqr <= iqrMax,
  };
}

function projectRound(summary: SessionSummary, roundIndex: number): FeedbackView {
  const round = summary.history[roundIndex];
  const byId = new Map(summary.items.map((it) => [it.id, it]));
  const items: FeedbackItemView[] = [];
  for (const [itemId, agg] of Object.entries(round.items)) {
    const item = byId.get(itemId);
    if (!item) continue;
    items.push(feedbackItem(item, agg, summary.config.consensus_iqr_max));
  }
  items.sort((a, b) => a.id.localeCompare(b.id));
  return {
    round: round.round,
    items,
    allSettled: items.every((it) => it.settled),
  };
}

export function buildFeedbackView(summary: SessionSummary): FeedbackView | null {
  if (summary.history.length === 0) return null;
  return projectRound(summary, summary.history.length - 1);
}

export function buildExpertView(summary: SessionSummary, expertToken: string): ExpertView {
  const ordered = seededShuffle(summary.items, `${expertToken}:${summary.round}`);
  const mine = summary.my_ratings ?? {};
  const items = ordered.map((item) => {
    const name = criterionName(item.criterion_id);
    return {
      id: item.id,
      criterionId: item.criterion_id,
      criterionName: name,
      subject: item.subject,
      reference: item.reference,
      myValue: item.id in mine ? mine[item.id] : null,
      choices: SCALE.map((entry) => ({
        value: entry.value,
        label: entry.label,
        description: entry.describe(name, item.subject, item.reference),
      })),
    };
  });
  const readOnly = summary.state !== "collecting";
  return {
    sessionId: summary.session_id,
    state: summary.state,
    round: summary.round,
    readOnly,
    banner: readOnly ? BANNERS[summary.state as Exclude<SessionStateName, "collecting">] : null,
    items,
    feedback: buildFeedbackView(summary),
  };
}

const STATE_BADGES: Record<SessionStateName, string> = {
  collecting: "COLLECTING",
  feedback: "FEEDBACK",
  converged: "CONVERGED",
  exhausted: "EXHAUSTED",
};

export function buildFacilitatorView(summary: SessionSummary): FacilitatorView {
  const rounds = summary.history.map((_, i) => projectRound(summary, i));
  const latest = rounds.length > 0 ? rounds[rounds.length - 1] : null;
  return {
    sessionId: summary.session_id,
    state: summary.state,
    round: summary.round,
    maxRounds: summary.config.max_rounds,
    expertCount: summary.expert_count,
    badge: STATE_BADGES[summary.state],
    canCloseRound: summary.state === "collecting",
    canAdvance: summary.state === "feedback",
    board: latest ? latest.items : [],
    rounds,
  };
}

/** Human wording for failed requests, shown in toasts and banners. */
export function explain(error: unknown): string {
  if (error instanceof ApiError) {
    if (error.status === 401) return "Not authorized: check your token.";
    if (error.errorType === "session_state") return error.detail;
    if (error.errorType === "consistency_gate" && error.offending) {
      const list = error.offending
        .map((o) => `criterion ${o.criterion_id} (CR ${o.cr.toFixed(4)})`)
        .join(", ");
      return `Inconsistent judgments: ${list}`;
    }
    return error.detail;
  }
  return String(error);
}

export function buildResultsView(report: ReportDoc): ResultsView {
  const byRank = report.technologies
    .slice()
    .sort((a, b) => report.rank[a] - report.rank[b]);
  const maxTns = Math.max(...byRank.map((t) => report.tns[t]), 0);
  const ranking: RankedBar[] = byRank.map((tech) => ({
    technology: tech,
    tns: report.tns[tech],
    rank: report.rank[tech],
    widthPct: maxTns > 0 ? Math.round((report.tns[tech] / maxTns) * 100) : 0,
  }));
  const { decision, p_rows, f_rows } = report.anova;
  const p = p_rows.toFixed(5);
  const anovaBadge = decision.reject_rows
    ? `technologies differ at alpha ${decision.alpha} (p ${p})`
    : `no detected difference at alpha ${decision.alpha} (p ${p})`;
  return {
    ranking,
    topThree: byRank.slice(0, 3),
    anovaBadge,
    anovaRejected: decision.reject_rows,
    alpha: decision.alpha,
    pRows: p_rows,
    fRows: f_rows,
    ties: report.ties,
  };
}
