/** Orchestrates API calls against the pure state machine. One feedback
 * request in flight at a time; the response's ranking replaces the list in
 * the same round trip. */

import { Api, ApiError } from "./api.js";
import {
  AppState,
  beginSubmit,
  canSubmit,
  completeSubmit,
  failSubmit,
  initialState,
  markStale,
  setLambda,
  toggleUtility,
  withRanking,
} from "./state.js";
import type { SessionConfig, Verdict } from "./types.js";

export class Controller {
  state: AppState = initialState();

  constructor(
    private api: Api,
    private onChange: (state: AppState) => void = () => {},
  ) {}

  private update(next: AppState): void {
    this.state = next;
    this.onChange(next);
  }

  async createSession(sidecar: unknown, csvPath: string, config: SessionConfig = {}): Promise<void> {
    const { session_id } = await this.api.createSession(sidecar, csvPath, config);
    this.update({ ...initialState(), sessionId: session_id });
  }

  async run(): Promise<void> {
    if (!this.state.sessionId) throw new Error("no session");
    const response = await this.api.run(this.state.sessionId);
    this.update({ ...withRanking(this.state, response), hasRun: true });
  }

  /** Returns false when the guard blocked the submit (no request sent). */
  async submitFeedback(taskId: string, verdict: Verdict): Promise<boolean> {
    if (!this.state.sessionId) throw new Error("no session");
    if (!canSubmit(this.state, taskId, verdict)) return false;
    this.update(beginSubmit(this.state));
    try {
      const response = await this.api.feedback(this.state.sessionId, taskId, verdict);
      this.update(completeSubmit(this.state, taskId, verdict, response));
      return true;
    } catch (error) {
      if (error instanceof ApiError && error.status === 409) {
        this.update(failSubmit(this.state, "Another update is in flight; retry in a moment."));
        return false;
      }
      this.update(failSubmit(this.state, error instanceof Error ? error.message : String(error)));
      throw error;
    }
  }

  /** Diversity changes re-rank immediately through the query parameter. */
  async changeLambda(value: number): Promise<void> {
    if (!this.state.sessionId) throw new Error("no session");
    const next = setLambda(this.state, value);
    const response = await this.api.recommendations(next.sessionId as string, {
      lambda: next.lambda,
    });
    this.update(withRanking(next, response));
  }

  /** Window/lead changes only mark the session stale until the next run. */
  async changeParams(params: { window?: string; lead?: string; history?: string }): Promise<void> {
    if (!this.state.sessionId) throw new Error("no session");
    await this.api.setParams(this.state.sessionId, params);
    this.update(markStale(this.state));
  }

  toggleUtility(): void {
    this.update(toggleUtility(this.state));
  }
}
