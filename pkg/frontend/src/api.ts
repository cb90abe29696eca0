/** Typed client for the judgment service's JSON endpoints. */

export interface SessionInfo {
  session_id: string;
  feature_names: string[];
  num_rows: number;
  pairs_per_judge: number;
  pair_budget: number;
  total_responses: number;
}

export interface PairPayload {
  i: number;
  j: number;
  left: Record<string, number>;
  right: Record<string, number>;
}

export interface Judgment {
  judge_id: string;
  i: number;
  j: number;
  same: boolean;
}

export interface CurveRow {
  gamma: number;
  eta: number;
  error: number;
  max_violation: number;
  weighted_slack: number;
  fairness_loss: number;
}

export interface ResultsPayload {
  rows: CurveRow[];
  judge_counts: Record<string, { answered: number; same: number }>;
  constraints_hash: string | null;
  gamma_grid: number[] | null;
  eta_grid: number[] | null;
}

/** Non-2xx response; carries the status and the service's detail text. */
export class ApiError extends Error {
  constructor(public readonly status: number, detail: string) {
    super(detail);
    this.name = "ApiError";
  }
}

async function raiseForStatus(res: Response): Promise<void> {
  if (res.ok) return;
  let detail = `${res.status}`;
  try {
    const body = (await res.json()) as { detail?: unknown };
    if (typeof body.detail === "string") detail = body.detail;
  } catch {
    // non-JSON error body; keep the status text
  }
  throw new ApiError(res.status, detail);
}

export class ApiClient {
  /**
   * base is "" when the bundle is served by the service itself and an
   * absolute origin when developing against a separate port. fetchFn is
   * injectable so tests can observe or fault every request.
   */
  constructor(
    private readonly base: string = "",
    private readonly fetchFn: typeof fetch = fetch,
  ) {}

  private async getJson<T>(path: string): Promise<T> {
    const res = await this.fetchFn(this.base + path);
    await raiseForStatus(res);
    return (await res.json()) as T;
  }

  sessionInfo(sessionId: string): Promise<SessionInfo> {
    return this.getJson(`/api/sessions/${encodeURIComponent(sessionId)}`);
  }

  async pairs(
    sessionId: string,
    judgeId: string,
    count: number,
  ): Promise<PairPayload[]> {
    const q = `judge_id=${encodeURIComponent(judgeId)}&count=${count}`;
    const body = await this.getJson<{ pairs: PairPayload[] }>(
      `/api/sessions/${encodeURIComponent(sessionId)}/pairs?${q}`,
    );
    return body.pairs;
  }

  async submit(
    sessionId: string,
    judgment: Judgment,
  ): Promise<{ total_responses: number }> {
    const res = await this.fetchFn(
      `${this.base}/api/sessions/${encodeURIComponent(sessionId)}/judgments`,
      {
        method: "POST",
        headers: { "content-type": "application/json" },
        body: JSON.stringify(judgment),
      },
    );
    await raiseForStatus(res);
    const body = (await res.json()) as { total_responses: number };
    return { total_responses: body.total_responses };
  }

  results(sessionId: string): Promise<ResultsPayload> {
    return this.getJson(
      `/api/sessions/${encodeURIComponent(sessionId)}/results`,
    );
  }

  async health(): Promise<boolean> {
    try {
      const res = await this.fetchFn(`${this.base}/health`);
      return res.ok;
    } catch {
      return false;
    }
  }
}
