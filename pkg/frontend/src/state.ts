/** Pure view-state transitions. The server ranking is authoritative: cards
 * always keep server order, and every displayed number comes from a
 * response payload. */

import type { Badges, RankingResponse, RecommendationDto, Verdict } from "./types.js";

export interface Card {
  rec: RecommendationDto;
  verdict: Verdict | null;
}

export interface FeedbackLogEntry {
  taskId: string;
  verdict: Verdict;
  nl: string;
}

export interface AppState {
  sessionId: string | null;
  cards: Card[];
  hasRun: boolean;
  showUtility: boolean;
  lambda: number;
  stale: boolean;
  inFlight: boolean;
  toast: string | null;
  feedbackLog: FeedbackLogEntry[];
}

export function initialState(): AppState {
  return {
    sessionId: null,
    cards: [],
    hasRun: false,
    showUtility: false,
    lambda: 1.0,
    stale: false,
    inFlight: false,
    toast: null,
    feedbackLog: [],
  };
}

/** Replace the list with a fresh server ranking, preserving verdict marks. */
export function withRanking(state: AppState, response: RankingResponse): AppState {
  const verdicts = new Map(state.cards.map((c) => [c.rec.task_id, c.verdict]));
  return {
    ...state,
    cards: response.recommendations.map((rec) => ({
      rec,
      verdict: verdicts.get(rec.task_id) ?? null,
    })),
    hasRun: state.hasRun || response.recommendations.length > 0,
    stale: response.stale,
    toast: null,
  };
}

/** A verdict may be submitted once per direction per card, one at a time. */
export function canSubmit(state: AppState, taskId: string, verdict: Verdict): boolean {
  if (state.inFlight) return false;
  const card = state.cards.find((c) => c.rec.task_id === taskId);
  if (!card) return false;
  return card.verdict !== verdict;
}

export function beginSubmit(state: AppState): AppState {
  return { ...state, inFlight: true, toast: null };
}

export function completeSubmit(
  state: AppState,
  taskId: string,
  verdict: Verdict,
  response: RankingResponse,
): AppState {
  const judged = state.cards.find((c) => c.rec.task_id === taskId);
  const marked: AppState = {
    ...state,
    inFlight: false,
    cards: state.cards.map((c) =>
      c.rec.task_id === taskId ? { ...c, verdict } : c,
    ),
    feedbackLog: [
      ...state.feedbackLog,
      { taskId, verdict, nl: judged ? judged.rec.nl : taskId },
    ],
  };
  return withRanking(marked, response);
}

export function failSubmit(state: AppState, message: string): AppState {
  return { ...state, inFlight: false, toast: message };
}

export function setLambda(state: AppState, value: number): AppState {
  return { ...state, lambda: Math.min(1, Math.max(0, value)) };
}

export function markStale(state: AppState): AppState {
  return { ...state, stale: true };
}

export function toggleUtility(state: AppState): AppState {
  return { ...state, showUtility: !state.showUtility };
}

export function badgesOf(rec: RecommendationDto): Badges {
  return {
    accuracy: rec.metrics["accuracy"] ?? 0,
    sufficiency: rec.metrics["sufficiency"] ?? 0,
    confidence: rec.metrics["confidence"] ?? 0,
    explainability: rec.metrics["explainability"] ?? 0,
  };
}
