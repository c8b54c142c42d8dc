// Wire types mirroring the service JSON payloads. The UI renders these
// verbatim; it never recomputes scores or token totals.

export interface WireFrame {
  seq: number;
  kind: "text" | "audio" | "error" | "done";
  text?: string;
  audio_b64?: string;
  final?: boolean;
}

export interface MediaChip {
  kind: string;
  media_id: string;
}

export interface TurnInfo {
  index: number;
  role: "user" | "assistant";
  text: string;
  media: MediaChip[];
  category: string | null;
  referent_turns: number[];
  token_cost: number;
}

export interface SessionTranscript {
  id: string;
  budget_tokens: number;
  turns: TurnInfo[];
  total_tokens: number;
  packs: { total_tokens: number; evicted_turns: number[] }[];
}

export interface MmmbAggregates {
  scores: Record<string, number>;
  degradation: {
    acc_by_turn_distance: Record<string, number>;
    acc_by_num_images: Record<string, number>;
  };
  n_items: number;
  n_scored: number;
  n_unscored: number;
  judge_prompt_version: string;
}

export interface MsibRow {
  content: number;
  speech: number;
  average: number;
  n: number;
}

export interface MsibAggregates {
  dimensions: Record<string, MsibRow>;
  overall?: MsibRow;
  n_items: number;
  n_scored: number;
  n_unscored: number;
  judge_prompt_version: string;
}

export interface BenchReportPayload {
  run_id: string;
  kind: "mmmb" | "msib";
  status: string;
  config: Record<string, unknown>;
  aggregates: MmmbAggregates | MsibAggregates | Record<string, never>;
  verdicts: unknown[];
}

export interface BenchRunStatus {
  run_id: string;
  kind?: string;
  status: "running" | "complete" | "partial" | "failed";
  error?: string;
  progress?: { completed: number; total: number };
  report?: BenchReportPayload;
}

export const MSIB_DIMENSIONS = [
  "BasicConversation",
  "EmotionalExpression",
  "RateControl",
  "RolePlaying",
  "CreativeCapacity",
  "InstructionFollowing",
] as const;

export const MSIB_DIMENSION_LABELS: Record<string, string> = {
  BasicConversation: "Basic Conversation",
  EmotionalExpression: "Emotional Expression",
  RateControl: "Rate Control",
  RolePlaying: "Role Playing",
  CreativeCapacity: "Creative Capacity",
  InstructionFollowing: "Instruction Following",
};
