import type { RankingResponse, SessionConfig, TaskDetail, Verdict } from "./types.js";

export class ApiError extends Error {
  constructor(public status: number, public detail: string) {
    super(`HTTP ${status}: ${detail}`);
  }
}

async function asJson<T>(response: Response): Promise<T> {
  if (!response.ok) {
    let detail = response.statusText;
    try {
      const body = (await response.json()) as { detail?: string };
      if (body.detail) detail = body.detail;
    } catch {
      // non-JSON error body; keep the status text
    }
    throw new ApiError(response.status, detail);
  }
  return (await response.json()) as T;
}

/** Thin typed client over the session endpoints. */
export class Api {
  constructor(
    private baseUrl: string,
    private fetchFn: typeof fetch = fetch.bind(globalThis),
  ) {}

  private url(path: string): string {
    return `${this.baseUrl}${path}`;
  }

  private post<T>(path: string, body: unknown): Promise<T> {
    return this.fetchFn(this.url(path), {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(body),
    }).then((r) => asJson<T>(r));
  }

  createSession(schemaSidecar: unknown, csvPath: string, config: SessionConfig = {}) {
    return this.post<{ session_id: string }>("/sessions", {
      schema_sidecar: schemaSidecar,
      csv_path: csvPath,
      config,
    });
  }

  run(sessionId: string): Promise<RankingResponse> {
    return this.post<RankingResponse>(`/sessions/${sessionId}/run`, {});
  }

  recommendations(sessionId: string, opts: { k?: number; lambda?: number } = {}) {
    const params = new URLSearchParams();
    if (opts.k !== undefined) params.set("k", String(opts.k));
    if (opts.lambda !== undefined) params.set("lambda", String(opts.lambda));
    const query = params.toString();
    const path = `/sessions/${sessionId}/recommendations${query ? `?${query}` : ""}`;
    return this.fetchFn(this.url(path)).then((r) => asJson<RankingResponse>(r));
  }

  feedback(sessionId: string, taskId: string, verdict: Verdict): Promise<RankingResponse> {
    return this.post<RankingResponse>(`/sessions/${sessionId}/feedback`, {
      task_id: taskId,
      verdict,
    });
  }

  taskDetail(sessionId: string, taskId: string): Promise<TaskDetail> {
    return this.fetchFn(this.url(`/sessions/${sessionId}/tasks/${taskId}`)).then((r) =>
      asJson<TaskDetail>(r),
    );
  }

  setParams(sessionId: string, params: { window?: string; lead?: string; history?: string }) {
    return this.post<{ stale: boolean }>(`/sessions/${sessionId}/params`, params);
  }

  exportModel(sessionId: string): Promise<{ blob: string }> {
    return this.fetchFn(this.url(`/sessions/${sessionId}/model/export`)).then((r) =>
      asJson<{ blob: string }>(r),
    );
  }

  importModel(sessionId: string, blob: string) {
    return this.post<{ feedback_count: number }>(`/sessions/${sessionId}/model/import`, { blob });
  }
}
