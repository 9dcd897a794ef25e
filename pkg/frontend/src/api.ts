/**
 * Typed client for the trace-explorer JSON API.
 *
 * The client never post-processes payloads: responses are returned
 * verbatim so the views render exactly what the server computed.
 */

export interface MetaResponse {
  token_count: number;
  l: number;
  vague_token_count: number;
  format_version: string;
}

export interface TokenRecord {
  position: number;
  surface: string;
  is_vague: boolean;
  is_eos: boolean;
  vector: number[];
}

export interface TokensResponse {
  offset: number;
  token_count: number;
  tokens: TokenRecord[];
}

export type Span = [number, number];
export type QueryMode = "intersection" | "phrase_only";

export interface SelectRequest {
  phrase: Span;
  context?: Span;
  tau?: number;
  mode?: QueryMode;
}

export interface SelectResponse {
  phrase: Span;
  context: Span;
  tau: number;
  mode: string;
  s1: number[];
  s2: number[];
  query_dims: number[];
}

export interface MatchRequest {
  query_dims: number[];
  tau?: number;
  max_len?: number;
  top_k?: number;
  within_sentence?: boolean;
}

export interface MatchRecord {
  rank: number;
  start: number;
  end: number;
  length: number;
  extra_on_count: number;
  truncated: boolean;
  surfaces: string[];
  vague: boolean[];
}

export interface MatchResponse {
  query_dims: number[];
  tau: number;
  matches: MatchRecord[];
  length_histogram: [number, number][];
}

export class ApiError extends Error {
  constructor(
    message: string,
    readonly status: number,
  ) {
    super(message);
    this.name = "ApiError";
  }
}

async function parseOrThrow<T>(response: Response): Promise<T> {
  const text = await response.text();
  if (!response.ok) {
    let message = `HTTP ${response.status}`;
    try {
      const body = JSON.parse(text) as { error?: string };
      if (body.error) message = body.error;
    } catch {
      /* non-JSON error body; keep the status message */
    }
    throw new ApiError(message, response.status);
  }
  return JSON.parse(text) as T;
}

export class ApiClient {
  constructor(private readonly baseUrl: string = "") {}

  async meta(signal?: AbortSignal): Promise<MetaResponse> {
    const response = await fetch(`${this.baseUrl}/api/meta`, { signal });
    return parseOrThrow<MetaResponse>(response);
  }

  async tokens(offset: number, count: number, signal?: AbortSignal): Promise<TokensResponse> {
    const params = new URLSearchParams({ offset: String(offset), count: String(count) });
    const response = await fetch(`${this.baseUrl}/api/tokens?${params}`, { signal });
    return parseOrThrow<TokensResponse>(response);
  }

  async select(request: SelectRequest, signal?: AbortSignal): Promise<SelectResponse> {
    const response = await fetch(`${this.baseUrl}/api/select`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(request),
      signal,
    });
    return parseOrThrow<SelectResponse>(response);
  }

  async match(request: MatchRequest, signal?: AbortSignal): Promise<MatchResponse> {
    const response = await fetch(`${this.baseUrl}/api/match`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(request),
      signal,
    });
    return parseOrThrow<MatchResponse>(response);
  }
}
