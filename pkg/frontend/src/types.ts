/** JSON shapes of the ranking service. The UI never recomputes these numbers. */

export interface RecommendationDto {
  rank: number;
  task_id: string;
  petel: string;
  nl: string;
  utility: number;
  metrics: Record<string, number>;
}

export interface RankingResponse {
  recommendations: RecommendationDto[];
  stale: boolean;
}

export interface SessionConfig {
  m?: number;
  k?: number;
  seed?: number;
  lambda?: number;
  window?: string;
  lead?: string;
  history?: string;
}

export interface TaskDetail {
  petel: string;
  nl: string;
  metrics: Record<string, number> | null;
}

export type Verdict = "useful" | "not_useful";

/** The four score badges shown on every card. */
export interface Badges {
  accuracy: number;
  sufficiency: number;
  confidence: number;
  explainability: number;
}
