import { SseParser } from "./sse.js";
import type { BenchRunStatus, SessionTranscript, WireFrame } from "./types.js";

export interface TurnParts {
  text?: string;
  style?: string;
  images?: File[];
  audio?: File;
}

type FetchLike = typeof fetch;

export class ApiError extends Error {
  constructor(
    message: string,
    readonly status: number,
  ) {
    super(message);
  }
}

/** Thin client over the service HTTP endpoints and its event stream. */
export class ApiClient {
  constructor(
    private readonly baseUrl: string = "",
    private readonly fetchImpl: FetchLike = fetch,
  ) {}

  private async request(path: string, init?: RequestInit): Promise<Response> {
    const resp = await this.fetchImpl(`${this.baseUrl}${path}`, init);
    if (!resp.ok) {
      let detail = resp.statusText;
      try {
        detail = ((await resp.json()) as { detail?: string }).detail ?? detail;
      } catch {
        // non-JSON error body; keep the status text
      }
      throw new ApiError(detail, resp.status);
    }
    return resp;
  }

  async createSession(budgetTokens?: number): Promise<{ id: string; budget_tokens: number }> {
    const resp = await this.request("/v1/sessions", {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(budgetTokens ? { budget_tokens: budgetTokens } : {}),
    });
    return resp.json();
  }

  async getSession(sessionId: string): Promise<SessionTranscript> {
    const resp = await this.request(`/v1/sessions/${sessionId}`);
    return resp.json();
  }

  /**
   * Send one multipart turn and invoke onFrame for every streamed frame, in
   * order, until the terminal done frame.
   */
  async postTurn(
    sessionId: string,
    parts: TurnParts,
    onFrame: (frame: WireFrame) => void,
  ): Promise<void> {
    const form = new FormData();
    if (parts.text) form.append("text", parts.text);
    if (parts.style) form.append("style", parts.style);
    for (const image of parts.images ?? []) form.append("images", image);
    if (parts.audio) form.append("audio", parts.audio);
    const resp = await this.request(`/v1/sessions/${sessionId}/turns`, {
      method: "POST",
      body: form,
    });
    const parser = new SseParser();
    if (resp.body) {
      const reader = resp.body.getReader();
      const decoder = new TextDecoder();
      for (;;) {
        const { done, value } = await reader.read();
        if (done) break;
        for (const frame of parser.feed(decoder.decode(value, { stream: true }))) {
          onFrame(frame);
        }
      }
      for (const frame of parser.feed(decoder.decode())) onFrame(frame);
    } else {
      // Test transports may deliver the body in one piece.
      for (const frame of parser.feed(await resp.text())) onFrame(frame);
    }
  }

  async startBenchRun(
    kind: "mmmb" | "msib",
    body: { items_file: string; model?: object; judge?: object; parallelism?: number; seed?: number },
  ): Promise<{ run_id: string; total_items: number }> {
    const resp = await this.request(`/v1/bench/${kind}/runs`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(body),
    });
    return resp.json();
  }

  async getBenchRun(runId: string): Promise<BenchRunStatus> {
    const resp = await this.request(`/v1/bench/runs/${runId}`);
    return resp.json();
  }
}
