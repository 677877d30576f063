/**
 * Typed client for the dewatselect HTTP service. Every interaction with the
 * backend goes through here; nothing in the UI touches files or computes
 * scores on its own.
 */

export interface SessionItem {
  id: string;
  criterion_id: number;
  subject: string;
  reference: string;
}

export interface ItemAggregate {
  median: number;
  iqr: number;
  mean: number;
  count: number;
  changed_from_previous: number;
}

export interface RoundSummary {
  round: number;
  items: Record<string, ItemAggregate>;
}

export type SessionStateName = "collecting" | "feedback" | "converged" | "exhausted";

export interface StudyCreated {
  id: string;
  technologies: string[];
}

export interface StudyInfo {
  id: string;
  technologies: string[];
  sessions: string[];
  has_report: boolean;
  created: number;
  updated: number;
}

export interface SessionConfigBody {
  consensus_iqr_max?: number;
  max_rounds?: number;
}

export interface CreateSessionRequest {
  experts: string[];
  items?: Array<{ criterion_id: number; subject: string; reference: string }>;
  config?: SessionConfigBody;
}

export interface SessionCreated {
  session_id: string;
  state: SessionStateName;
  round: number;
  items: SessionItem[];
  expert_tokens: Record<string, string>;
}

export interface RatingAck {
  session_id: string;
  round: number;
  item_id: string;
  value: number;
}

export interface CloseRoundResponse {
  session_id: string;
  state: SessionStateName;
  summary: RoundSummary;
}

export interface AdvanceResponse {
  session_id: string;
  state: SessionStateName;
  round: number;
}

export interface SessionSummary {
  session_id: string;
  study_id: string;
  state: SessionStateName;
  round: number;
  expert_count: number;
  config: { consensus_iqr_max: number; max_rounds: number; aggregate: string };
  items: SessionItem[];
  history: RoundSummary[];
  /** Present only when the request carried an expert token. */
  my_ratings?: Record<string, number>;
}

export interface AnovaBlock {
  ss_rows: number;
  ss_cols: number;
  ss_error: number;
  ss_total: number;
  df_rows: number;
  df_cols: number;
  df_error: number;
  ms_rows: number;
  ms_cols: number;
  ms_error: number;
  f_rows: number | "inf";
  f_cols: number | "inf";
  p_rows: number;
  p_cols: number;
  ms_error_zero: boolean;
  decision: { alpha: number; reject_rows: boolean; f_critical_rows: number };
}

export interface ReportDoc {
  schema: string;
  inputs: {
    dataset_sha256: string;
    judgments_sha256: string | null;
    injections_sha256: string | null;
    options: {
      weights: number[] | null;
      policy: string;
      alpha: number;
      allow_inconsistent: boolean;
    };
  };
  technologies: string[];
  criteria: Array<{
    id: number;
    name: string;
    kind: string;
    parameter: string | null;
    source: string;
  }>;
  columns: Record<string, Record<string, number>>;
  cell_flags: Record<string, Record<string, string>>;
  consistency: Record<
    string,
    { order: number; lambda_max: number; ci: number; ri: number; cr: number | null; acceptable: boolean }
  >;
  non_consensus_criteria: number[];
  tns: Record<string, number>;
  rank: Record<string, number>;
  ties: string[][];
  anova: AnovaBlock;
}

export interface RunRequest {
  weights?: number[];
  policy?: string;
  alpha?: number;
  allow_inconsistent?: boolean;
  injections?: unknown;
  sessions?: string[];
}

/** Error envelope: always a detail, domain failures add error_type. */
export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly detail: string,
    readonly errorType?: string,
    readonly errors?: Array<{ loc: string[]; msg: string }>,
    readonly offending?: Array<{ criterion_id: number; cr: number }>,
    readonly incidentId?: string,
  ) {
    super(`${status}: ${detail}`);
    this.name = "ApiError";
  }
}

export interface ApiOptions {
  baseUrl: string;
  facilitatorToken?: string;
}

export class PanelApi {
  constructor(private readonly opts: ApiOptions) {}

  uploadStudy(csv: string): Promise<StudyCreated> {
    return this.request("POST", "/studies", {
      body: csv,
      contentType: "text/csv",
    });
  }

  getStudy(studyId: string): Promise<StudyInfo> {
    return this.request("GET", `/studies/${studyId}`, {});
  }

  createSession(studyId: string, body: CreateSessionRequest): Promise<SessionCreated> {
    return this.request("POST", `/studies/${studyId}/sessions`, {
      json: body,
      facilitator: true,
    });
  }

  submitRating(
    sessionId: string,
    expertToken: string,
    rating: { item_id: string; value: number; justification?: string },
  ): Promise<RatingAck> {
    return this.request("POST", `/sessions/${sessionId}/ratings`, {
      json: rating,
      expertToken,
    });
  }

  closeRound(sessionId: string): Promise<CloseRoundResponse> {
    return this.request("POST", `/sessions/${sessionId}/close-round`, {
      facilitator: true,
    });
  }

  advanceRound(sessionId: string): Promise<AdvanceResponse> {
    return this.request("POST", `/sessions/${sessionId}/advance`, {
      facilitator: true,
    });
  }

  getSummary(sessionId: string, expertToken?: string): Promise<SessionSummary> {
    return this.request("GET", `/sessions/${sessionId}/summary`, { expertToken });
  }

  runStudy(studyId: string, body: RunRequest = {}): Promise<ReportDoc> {
    return this.request("POST", `/studies/${studyId}/run`, {
      json: body,
      facilitator: true,
    });
  }

  getReport(studyId: string): Promise<ReportDoc> {
    return this.request("GET", `/studies/${studyId}/report`, {});
  }

  private async request<T>(
    method: string,
    path: string,
    init: {
      json?: unknown;
      body?: string;
      contentType?: string;
      facilitator?: boolean;
      expertToken?: string;
    },
  ): Promise<T> {
    const headers: Record<string, string> = {};
    let body: string | undefined;
    if (init.json !== undefined) {
      headers["Content-Type"] = "application/json";
      body = JSON.stringify(init.json);
    } else if (init.body !== undefined) {
      headers["Content-Type"] = init.contentType ?? "text/plain";
      body = init.body;
    }
    if (init.facilitator && this.opts.facilitatorToken) {
      headers["X-Facilitator-Token"] = this.opts.facilitatorToken;
    }
    if (init.expertToken) {
      headers["X-Expert-Token"] = init.expertToken;
    }

    const res = await fetch(this.opts.baseUrl + path, { method, headers, body });
    const text = await res.text();
    let doc: unknown = null;
    if (text) {
      try {
        doc = JSON.parse(text);
      } catch {
        doc = null;
      }
    }
    if (!res.ok) {
      const e = (doc ?? {}) as Record<string, unknown>;
      throw new ApiError(
        res.status,
        typeof e.detail === "string" ? e.detail : text || res.statusText,
        typeof e.error_type === "string" ? e.error_type : undefined,
        Array.isArray(e.errors) ? (e.errors as ApiError["errors"]) : undefined,
        Array.isArray(e.offending) ? (e.offending as ApiError["offending"]) : undefined,
        typeof e.incident_id === "string" ? e.incident_id : undefined,
      );
    }
    return doc as T;
  }
}
