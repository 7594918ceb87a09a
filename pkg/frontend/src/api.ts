/** Typed client for the diagnosis server; every call maps onto one endpoint. */

import {
  ApiError,
  Diagnosis,
  GraphDocument,
  ModelSummary,
  ObservationIn,
  ObservationOut,
  SessionDetail,
  SessionSummary,
} from "./types.js";

type FetchLike = typeof fetch;

export class ApiClient {
  constructor(
    private readonly baseUrl: string = "",
    private readonly fetchImpl: FetchLike = fetch,
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await this.fetchImpl(`${this.baseUrl}${path}`, init);
    const body = (await response.json()) as Record<string, unknown>;
    if (!response.ok) {
      throw new ApiError(response.status, body);
    }
    return body as T;
  }

  uploadModel(dsl: string): Promise<ModelSummary> {
    return this.request<ModelSummary>("/models", {
      method: "POST",
      headers: { "content-type": "text/plain" },
      body: dsl,
    });
  }

  listModels(): Promise<ModelSummary[]> {
    return this.request<ModelSummary[]>("/models");
  }

  modelGraph(modelId: string): Promise<GraphDocument> {
    return this.request<GraphDocument>(`/models/${modelId}/graph`);
  }

  createSession(modelId: string): Promise<SessionSummary> {
    return this.request<SessionSummary>("/sessions", {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ modelId }),
    });
  }

  sessionDetail(sessionId: string): Promise<SessionDetail> {
    return this.request<SessionDetail>(`/sessions/${sessionId}`);
  }

  postObservations(sessionId: string, observations: ObservationIn[]): Promise<{ observations: ObservationOut[] }> {
    return this.request(`/sessions/${sessionId}/observations`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ observations }),
    });
  }

  diagnosis(sessionId: string, k = 1): Promise<Diagnosis> {
    return this.request<Diagnosis>(`/sessions/${sessionId}/diagnosis?k=${k}`);
  }
}
