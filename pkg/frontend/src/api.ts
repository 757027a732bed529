// Thin JSON client for the model service.  The base URL is configurable and
// predictions support latest-wins cancellation for rapid slider movement.

import {
  ArdEntry,
  ControlResponse,
  ModelInfo,
  PredictResponse,
  ScenarioFeatures,
  Strategy,
} from "./types.js";

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ApiError extends Error {
  constructor(
    message: string,
    readonly status: number | null = null,
  ) {
    super(message);
  }
}

export class ApiClient {
  private predictController: AbortController | null = null;

  constructor(
    readonly baseUrl: string,
    private readonly fetchImpl: FetchLike = (input, init) => fetch(input, init),
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    let response: Response;
    try {
      response = await this.fetchImpl(this.baseUrl + path, init);
    } catch (err) {
      if ((err as Error).name === "AbortError") {
        throw err;
      }
      throw new ApiError(`service unreachable: ${(err as Error).message}`);
    }
    if (!response.ok) {
      let detail = `${response.status}`;
      try {
        const body = await response.json();
        if (body && body.errors) {
          detail = body.errors
            .map((e: { field: string; message: string }) => `${e.field}: ${e.message}`)
            .join("; ");
        }
      } catch {
        // non-JSON error body; keep the status code
      }
      throw new ApiError(detail, response.status);
    }
    return (await response.json()) as T;
  }

  /** Predict with latest-wins semantics: a newer call aborts the older one. */
  async predict(features: ScenarioFeatures): Promise<PredictResponse> {
    this.predictController?.abort();
    this.predictController = new AbortController();
    return this.request<PredictResponse>("/api/predict", {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(features),
      signal: this.predictController.signal,
    });
  }

  async control(
    features: ScenarioFeatures,
    strategy: Strategy,
    threshold = 0.5,
    seed = 0,
  ): Promise<ControlResponse> {
    return this.request<ControlResponse>("/api/control", {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ ...features, strategy, threshold, seed }),
    });
  }

  async ard(): Promise<ArdEntry[]> {
    const body = await this.request<{ relevances: ArdEntry[] }>("/api/ard");
    return body.relevances;
  }

  async modelInfo(): Promise<ModelInfo> {
    return this.request<ModelInfo>("/api/model");
  }
}

/** Resolve the service location: ?api=… query param, global override, default. */
export function resolveBaseUrl(): string {
  if (typeof window !== "undefined") {
    const fromQuery = new URLSearchParams(window.location.search).get("api");
    if (fromQuery) {
      return fromQuery.replace(/\/$/, "");
    }
    const override = (window as unknown as { __API_BASE__?: string }).__API_BASE__;
    if (override) {
      return override.replace(/\/$/, "");
    }
  }
  return "http://127.0.0.1:8000";
}
