export type EnvKind = 'lights' | 'trading' | 'energy' | 'repo';

export interface TaskEntry {
  task_id: string;
  env_kind: EnvKind;
  difficulty: 'easy' | 'medium' | 'hard';
  step_budget: number;
}

export interface SessionView {
  session_id: string;
  task_id: string;
  env_kind: EnvKind;
  difficulty: string;
  status: string;
  step_index: number;
  step_budget: number;
  remaining_steps: number;
  rules_revealed: boolean;
  actor_tag: string;
  observation?: string;
}

export interface StepResponse {
  session_id: string;
  feedback: string;
  observation: string;
  reward: number | null;
  status: string;
  done: boolean;
  success: boolean;
  step_index: number;
  remaining_steps: number;
}

export interface TraceRecordWire {
  step_index: number;
  action: Record<string, unknown>;
  feedback: string;
  observation_snapshot: unknown;
  progress_flag: boolean;
  reward: number | null;
}

export interface TraceDocument {
  task_id: string;
  env_kind: EnvKind;
  status: string;
  step_budget: number;
  rules_revealed: boolean;
  records: TraceRecordWire[];
}

export interface TraceExport {
  session_id: string;
  actor_tag: string;
  created_at: number;
  last_active: number;
  trace: TraceDocument;
}

export interface ErrorBody {
  error: { code: string; message: string; [key: string]: unknown };
}
