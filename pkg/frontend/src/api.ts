// Thin client over the documented session endpoints; every method maps to
// exactly one request.

import type {
  CandidatesOut,
  DemoResponse,
  FormulaOut,
  GridSpec,
  NlResponse,
  PolicyOut,
  Question,
  TrainStatus,
} from "./types.js";

export class ApiError extends Error {
  constructor(
    public status: number,
    public detail: string,
  ) {
    super(`HTTP ${status}: ${detail}`);
  }
}

type FetchLike = typeof fetch;

export class ApiClient {
  constructor(
    private baseUrl: string,
    private fetchImpl: FetchLike = fetch,
  ) {}

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const response = await this.fetchImpl(this.baseUrl + path, {
      method,
      headers: body === undefined ? {} : { "Content-Type": "application/json" },
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    const text = await response.text();
    if (!response.ok) {
      let detail = text;
      try {
        detail = JSON.parse(text).detail ?? text;
      } catch {
        // keep raw body
      }
      throw new ApiError(response.status, String(detail));
    }
    return text ? (JSON.parse(text) as T) : (undefined as T);
  }

  world(): Promise<GridSpec> {
    return this.request("GET", "/world");
  }

  async createSession(): Promise<string> {
    const body = await this.request<{ id: string }>("POST", "/sessions");
    return body.id;
  }

  submitNl(sessionId: string, text: string): Promise<NlResponse> {
    return this.request("POST", `/sessions/${sessionId}/nl`, { text });
  }

  questions(sessionId: string): Promise<Question[]> {
    return this.request("GET", `/sessions/${sessionId}/questions`);
  }

  answer(sessionId: string, questionId: string, payload: unknown): Promise<void> {
    return this.request("POST", `/sessions/${sessionId}/answers`, {
      questionId,
      payload,
    });
  }

  uploadDemo(
    sessionId: string,
    actions: string[],
    label: string,
    initial: Record<string, unknown> = {},
  ): Promise<DemoResponse> {
    return this.request("POST", `/sessions/${sessionId}/demos`, {
      actions,
      label,
      initial,
    });
  }

  candidates(sessionId: string): Promise<CandidatesOut> {
    return this.request("GET", `/sessions/${sessionId}/candidates`);
  }

  formula(sessionId: string): Promise<FormulaOut> {
    return this.request("GET", `/sessions/${sessionId}/formula`);
  }

  startTraining(sessionId: string, episodes?: number, seed?: number): Promise<TrainStatus> {
    return this.request("POST", `/sessions/${sessionId}/train`, { episodes, seed });
  }

  trainingStatus(sessionId: string): Promise<TrainStatus> {
    return this.request("GET", `/sessions/${sessionId}/train/status`);
  }

  cancelTraining(sessionId: string): Promise<TrainStatus> {
    return this.request("DELETE", `/sessions/${sessionId}/train`);
  }

  policy(sessionId: string): Promise<PolicyOut> {
    return this.request("GET", `/sessions/${sessionId}/policy`);
  }
}
