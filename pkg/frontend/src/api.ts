/** Typed client for the personalization service. All numbers rendered by
 * the UI come from these payloads verbatim; the client never recomputes
 * scores or distributions. */

export interface RankEntry {
  id: string;
  score: number;
  media_url: string;
}

export interface RankingPayload {
  generation: number;
  entries: RankEntry[];
}

export interface UsadPayload {
  attributes: string[];
  probs: number[];
  generation: number;
  item_count: number;
}

export interface SessionPayload {
  session_id: string;
  status: string;
  iteration: number;
  max_iterations: number;
  k: number;
  favorites: string[];
  deleted: string[];
  ranking: RankingPayload;
  usad?: UsadPayload;
  usad_preview?: UsadPayload;
}

export interface ConfigPayload {
  m: number;
  k: number;
  max_iterations: number;
  distance_metric: string;
  attribute_names: string[];
  catalog_size: number;
}

export interface SampleItem {
  id: string;
  media_url: string;
  has_media: boolean;
}

export interface ScoredItem {
  id: string;
  score: number;
  undefined_correlation: boolean;
  media_url: string;
}

export interface FeedbackBody {
  ordered_prefix: string[];
  deletions: string[];
  satisfied: boolean;
}

export class ApiError extends Error {
  constructor(
    public readonly status: number,
    message: string,
  ) {
    super(message);
  }
}

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

let keyCounter = 0;
export function freshIdempotencyKey(): string {
  keyCounter += 1;
  return `ui-${Date.now()}-${keyCounter}`;
}

export class ApiClient {
  constructor(
    private readonly baseUrl: string = "",
    private readonly fetchImpl: FetchLike = (url, init) => fetch(url, init),
  ) {}

  private async request<T>(
    path: string,
    init?: RequestInit & { idempotencyKey?: string },
  ): Promise<T> {
    const headers: Record<string, string> = {
      "Content-Type": "application/json",
      ...((init?.headers as Record<string, string>) ?? {}),
    };
    if (init?.idempotencyKey) {
      headers["Idempotency-Key"] = init.idempotencyKey;
    }
    const response = await this.fetchImpl(`${this.baseUrl}${path}`, {
      ...init,
      headers,
    });
    const body = await response.json();
    if (!response.ok) {
      throw new ApiError(response.status, body?.error ?? response.statusText);
    }
    return body as T;
  }

  getConfig(): Promise<ConfigPayload> {
    return this.request("/config");
  }

  getSample(n: number, seed: number): Promise<{ seed: number; items: SampleItem[] }> {
    return this.request(`/catalog/sample?n=${n}&seed=${seed}`);
  }

  createSession(favorites: string[], idempotencyKey: string): Promise<SessionPayload> {
    return this.request("/sessions", {
      method: "POST",
      body: JSON.stringify({ favorites }),
      idempotencyKey,
    });
  }

  getSession(sessionId: string): Promise<SessionPayload> {
    return this.request(`/sessions/${sessionId}`);
  }

  getRanking(sessionId: string, top?: number): Promise<RankingPayload> {
    const query = top ? `?top=${top}` : "";
    return this.request(`/sessions/${sessionId}/ranking${query}`);
  }

  submitFeedback(
    sessionId: string,
    body: FeedbackBody,
    idempotencyKey: string,
  ): Promise<SessionPayload> {
    return this.request(`/sessions/${sessionId}/feedback`, {
      method: "POST",
      body: JSON.stringify(body),
      idempotencyKey,
    });
  }

  finalizeSession(sessionId: string): Promise<SessionPayload> {
    return this.request(`/sessions/${sessionId}/finalize`, { method: "POST" });
  }

  getUsad(sessionId: string): Promise<UsadPayload> {
    return this.request(`/sessions/${sessionId}/usad`);
  }

  score(sessionId: string, ids: string[]): Promise<{ items: ScoredItem[] }> {
    return this.request("/score", {
      method: "POST",
      body: JSON.stringify({ session_id: sessionId, ids }),
    });
  }

  getCatalogPage(
    page: number,
    pageSize: number,
  ): Promise<{ total: number; items: SampleItem[] }> {
    return this.request(`/catalog/items?page=${page}&page_size=${pageSize}`);
  }
}
