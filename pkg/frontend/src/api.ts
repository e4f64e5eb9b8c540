// Typed client over the annotation server's HTTP/JSON contract.
// The console talks to the server exclusively through this module.

export interface TaskEnvelope {
  item_id: string;
  anonymized_text: string;
  round_id: string;
  question: string;
  context: { y: number; n: number } | null;
}

export interface LabelAck {
  status: string;
  worker_id: string;
  item_id: string;
  answer: string;
  audit_length: number;
}

export interface AdjudicationAck {
  status: string;
  tweet_id: string;
  label: string;
  remaining: number;
}

export interface AgreementPayload {
  round_id: string;
  statistic: string;
  undefined: boolean;
  reason?: string;
  mean?: number;
  stdev?: number;
  band?: string;
  n_undefined_hits?: number;
  per_hit?: number[];
}

export type CorpusStats = Record<
  "topic" | "source",
  Record<"human" | "machine", Record<string, number>>
>;

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ApiError extends Error {
  constructor(readonly status: number, message: string) {
    super(message);
  }
}

export class ApiClient {
  private readonly fetchFn: FetchLike;

  constructor(
    private readonly baseUrl: string,
    private readonly token: string,
    fetchFn?: FetchLike,
  ) {
    this.fetchFn = fetchFn ?? ((input, init) => fetch(input, init));
  }

  private async request(path: string, init?: RequestInit): Promise<Response> {
    const response = await this.fetchFn(`${this.baseUrl}${path}`, {
      ...init,
      headers: {
        Authorization: `Bearer ${this.token}`,
        "Content-Type": "application/json",
        ...(init?.headers ?? {}),
      },
    });
    if (!response.ok && response.status !== 204) {
      let detail = `${response.status}`;
      try {
        const body = await response.json();
        if (body && typeof body.detail === "string") detail = body.detail;
      } catch {
        // non-JSON error body; keep the status text
      }
      throw new ApiError(response.status, detail);
    }
    return response;
  }

  /** Next unanswered item for this worker, or null when the round is done. */
  async nextTask(roundId: string): Promise<TaskEnvelope | null> {
    const response = await this.request(`/rounds/${encodeURIComponent(roundId)}/next`);
    if (response.status === 204) return null;
    return (await response.json()) as TaskEnvelope;
  }

  async submitLabel(itemId: string, answer: "Y" | "N"): Promise<LabelAck> {
    const response = await this.request("/labels", {
      method: "POST",
      body: JSON.stringify({ item_id: itemId, answer }),
    });
    return (await response.json()) as LabelAck;
  }

  async nextAdjudication(): Promise<TaskEnvelope | null> {
    const response = await this.request("/adjudication/next");
    if (response.status === 204) return null;
    return (await response.json()) as TaskEnvelope;
  }

  async submitAdjudication(
    tweetId: string,
    label: "job" | "notjob",
  ): Promise<AdjudicationAck> {
    const response = await this.request("/adjudication", {
      method: "POST",
      body: JSON.stringify({ tweet_id: tweetId, label }),
    });
    return (await response.json()) as AdjudicationAck;
  }

  async agreement(roundId: string, stat: "fleiss" | "alpha"): Promise<AgreementPayload> {
    const response = await this.request(
      `/stats/agreement/${encodeURIComponent(roundId)}?stat=${stat}`,
    );
    return (await response.json()) as AgreementPayload;
  }

  async corpusStats(): Promise<CorpusStats> {
    const response = await this.request("/stats/corpus");
    return (await response.json()) as CorpusStats;
  }
}
