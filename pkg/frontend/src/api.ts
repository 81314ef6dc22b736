/**
 * Client for the /v1 suggestion service, plus the debounced latest-wins
 * scheduler the viewfinder uses: at most one suggestion request is in
 * flight; moving the viewport cancels the pending one.
 */

import type { Suggestion, ViewBox } from "./geometry.js";

export interface SuggestResponse {
  suggestion: Suggestion;
  suggestion_probability: number;
  adjustment_distribution: number[];
}

export interface TrajectoryEntry {
  viewport: ViewBox;
  suggestion: Suggestion;
}

type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class ApiClient {
  constructor(
    private readonly baseUrl: string,
    private readonly fetchFn: FetchLike = (...args) => fetch(...args),
  ) {}

  private async post<T>(path: string, body: BodyInit, contentType: string, signal?: AbortSignal): Promise<T> {
    const resp = await this.fetchFn(this.baseUrl + path, {
      method: "POST",
      body,
      headers: { "Content-Type": contentType },
      signal,
    });
    const payload = await resp.json();
    if (!resp.ok) {
      throw new Error(payload?.error ?? `HTTP ${resp.status}`);
    }
    return payload as T;
  }

  async health(): Promise<boolean> {
    try {
      const resp = await this.fetchFn(this.baseUrl + "/v1/health");
      return resp.ok;
    } catch {
      return false;
    }
  }

  /** Upload raw image bytes; identical bytes land on the same content-hash id. */
  uploadSource(data: Blob | ArrayBuffer, contentType = "image/png"): Promise<{ source_id: string }> {
    return this.post("/v1/sources", data as BodyInit, contentType);
  }

  suggest(sourceId: string, viewport: ViewBox, signal?: AbortSignal): Promise<SuggestResponse> {
    return this.post(
      "/v1/suggest",
      JSON.stringify({ source_id: sourceId, viewport }),
      "application/json",
      signal,
    );
  }

  refine(sourceId: string, viewport: ViewBox, maxSteps = 3): Promise<{ trajectory: TrajectoryEntry[] }> {
    return this.post(
      "/v1/refine",
      JSON.stringify({ source_id: sourceId, viewport, max_steps: maxSteps }),
      "application/json",
    );
  }
}

export function debounce<A extends unknown[]>(
  fn: (...args: A) => void,
  waitMs: number,
): (...args: A) => void {
  let timer: ReturnType<typeof setTimeout> | undefined;
  return (...args: A) => {
    clearTimeout(timer);
    timer = setTimeout(() => fn(...args), waitMs);
  };
}

/**
 * Debounced suggestion fetcher with latest-wins cancellation: a new request
 * aborts the in-flight one, and responses that arrive out of order are
 * dropped by generation counting.
 */
export class SuggestScheduler {
  private generation = 0;
  private controller: AbortController | null = null;
  private readonly debounced: (sourceId: string, viewport: ViewBox) => void;

  constructor(
    private readonly client: ApiClient,
    private readonly onResult: (result: SuggestResponse, viewport: ViewBox) => void,
    private readonly onError: (error: unknown) => void,
    waitMs = 250,
  ) {
    this.debounced = debounce((sourceId: string, viewport: ViewBox) => {
      void this.fire(sourceId, viewport);
    }, waitMs);
  }

  /** Call on every viewport settle; collapses bursts into one request. */
  request(sourceId: string, viewport: ViewBox): void {
    this.debounced(sourceId, viewport);
  }

  private async fire(sourceId: string, viewport: ViewBox): Promise<void> {
    const mine = ++this.generation;
    this.controller?.abort();
    this.controller = new AbortController();
    try {
      const result = await this.client.suggest(sourceId, viewport, this.controller.signal);
      if (mine === this.generation) {
        this.onResult(result, viewport);
      }
    } catch (error) {
      if (mine === this.generation && !isAbort(error)) {
        this.onError(error);
      }
    }
  }
}

function isAbort(error: unknown): boolean {
  return error instanceof DOMException
    ? error.name === "AbortError"
    : error instanceof Error && error.name === "AbortError";
}
