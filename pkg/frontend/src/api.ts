import type {
  ArticlePayload,
  QueuePayload,
  ReviewDecision,
  ReviewResponse,
  StatsPayload,
  Suggestions,
  TaxonomyPayload,
} from "./types";

export class ApiError extends Error {
  constructor(
    public status: number,
    message: string,
  ) {
    super(message);
  }
}

async function request<T>(url: string, init?: RequestInit): Promise<T> {
  const response = await fetch(url, init);
  if (!response.ok) {
    let detail = `HTTP ${response.status}`;
    try {
      const body = await response.json();
      detail = body.error ?? body.detail ?? detail;
    } catch {
      // non-JSON error body; keep the status line
    }
    throw new ApiError(response.status, detail);
  }
  return response.json() as Promise<T>;
}

export class ApiClient {
  constructor(private base: string = "") {}

  getQueue(runId: string): Promise<QueuePayload> {
    return request(`${this.base}/v1/runs/${encodeURIComponent(runId)}/queue`);
  }

  getArticle(articleId: string): Promise<ArticlePayload> {
    return request(`${this.base}/v1/articles/${encodeURIComponent(articleId)}`);
  }

  getSuggestions(articleId: string): Promise<Suggestions> {
    return request(`${this.base}/v1/suggestions/${encodeURIComponent(articleId)}`);
  }

  submitReview(articleId: string, decision: ReviewDecision): Promise<ReviewResponse> {
    return request(`${this.base}/v1/articles/${encodeURIComponent(articleId)}/review`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(decision),
    });
  }

  getStats(): Promise<StatsPayload> {
    return request(`${this.base}/v1/stats`);
  }

  getTaxonomy(): Promise<TaxonomyPayload> {
    return request(`${this.base}/v1/taxonomy`);
  }

  mergeEvents(eventId: string, intoEventId: string): Promise<unknown> {
    return request(`${this.base}/v1/events/${encodeURIComponent(eventId)}/merge`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ into_event_id: intoEventId }),
    });
  }
}
