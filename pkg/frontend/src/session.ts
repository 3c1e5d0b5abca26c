import type { ServiceClient } from './api.js';
import type { EnvKind, SessionView, StepResponse, TraceRecordWire } from './types.js';

export interface HistoryEntry {
  stepIndex: number;
  actionShown: string;
  feedback: string;
  observation: string;
}

function renderWireAction(action: Record<string, unknown>): string {
  switch (action.kind) {
    case 'toggle':
      return String(action.index);
    case 'shell':
      return String(action.command);
    case 'trade':
      return JSON.stringify({ buy: action.buy, sell: action.sell });
    case 'dispatch':
      return JSON.stringify({
        thermal: action.thermal,
        wind: action.wind,
        solar: action.solar,
        battery: action.battery,
      });
    default:
      return `<invalid: ${String(action.reason ?? 'unparseable input')}>`;
  }
}

/** Client-side play state: a pure projection of server responses plus the
 * not-yet-submitted form input. A browser refresh rebuilds everything from
 * the service (session view + exported trace). */
export class PlaySession {
  history: HistoryEntry[] = [];
  tutorialMode = false;

  private constructor(
    public descriptor: SessionView,
    public observation: string,
  ) {}

  static fromCreate(view: SessionView): PlaySession {
    return new PlaySession(view, view.observation ?? '');
  }

  static async restore(client: ServiceClient, sessionId: string): Promise<PlaySession> {
    const view = await client.getSession(sessionId);
    const exported = await client.exportTrace(sessionId);
    const session = new PlaySession(view, view.observation ?? '');
    session.history = exported.trace.records.map((record: TraceRecordWire) => ({
      stepIndex: record.step_index,
      actionShown: renderWireAction(record.action),
      feedback: record.feedback,
      observation: '',
    }));
    return session;
  }

  get envKind(): EnvKind {
    return this.descriptor.env_kind;
  }

  get running(): boolean {
    return this.descriptor.status === 'running';
  }

  applyStep(actionShown: string, response: StepResponse): void {
    this.history.push({
      stepIndex: response.step_index - 1,
      actionShown,
      feedback: response.feedback,
      observation: response.observation,
    });
    this.observation = response.observation;
    this.descriptor = {
      ...this.descriptor,
      status: response.status,
      step_index: response.step_index,
      remaining_steps: response.remaining_steps,
    };
  }
}
