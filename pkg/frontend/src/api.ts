import type {
  ErrorBody,
  SessionView,
  StepResponse,
  TaskEntry,
  TraceExport,
} from './types.js';
import type { WireAction } from './wire.js';

export class ServiceError extends Error {
  constructor(
    readonly status: number,
    readonly code: string,
    message: string,
  ) {
    super(message);
  }
}

export interface CreateSessionRequest {
  task_id?: string;
  env?: string;
  seed?: number;
  tier?: string;
  rules_revealed?: boolean;
  actor_tag?: string;
}

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

/** Thin JSON client for the session service. All state lives server-side;
 * this class never caches anything beyond the base URL. */
export class ServiceClient {
  constructor(
    private readonly baseUrl: string,
    private readonly fetchImpl: FetchLike = (input, init) => fetch(input, init),
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await this.fetchImpl(this.baseUrl + path, init);
    const body = (await response.json()) as T | ErrorBody;
    if (!response.ok) {
      const error = (body as ErrorBody).error;
      throw new ServiceError(
        response.status,
        error?.code ?? 'unknown',
        error?.message ?? `request failed with ${response.status}`,
      );
    }
    return body as T;
  }

  private post<T>(path: string, payload: unknown): Promise<T> {
    return this.request<T>(path, {
      method: 'POST',
      headers: { 'content-type': 'application/json' },
      body: JSON.stringify(payload),
    });
  }

  async health(): Promise<{ status: string; tasks: number; sessions: number }> {
    return this.request('/health');
  }

  async listTasks(): Promise<TaskEntry[]> {
    const body = await this.request<{ tasks: TaskEntry[] }>('/tasks');
    return body.tasks;
  }

  createSession(request: CreateSessionRequest): Promise<SessionView> {
    return this.post('/sessions', request);
  }

  step(sessionId: string, action: WireAction): Promise<StepResponse> {
    return this.post(`/sessions/${sessionId}/step`, { action });
  }

  getSession(sessionId: string): Promise<SessionView> {
    return this.request(`/sessions/${sessionId}`);
  }

  exportTrace(sessionId: string): Promise<TraceExport> {
    return this.request(`/sessions/${sessionId}/trace`);
  }
}
