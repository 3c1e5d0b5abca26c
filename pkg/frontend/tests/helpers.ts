import { readFileSync } from 'node:fs';
import { dirname, join } from 'node:path';
import { fileURLToPath } from 'node:url';

import type { SessionView, StepResponse, TaskEntry, TraceExport } from '../src/types.js';

export interface LightsTutorialFixture {
  tasks: { tasks: TaskEntry[] };
  create_session: SessionView;
  steps: StepResponse[];
  trace: TraceExport;
}

export function loadFixture(): LightsTutorialFixture {
  const here = dirname(fileURLToPath(import.meta.url));
  const raw = readFileSync(join(here, 'fixtures', 'lights_tutorial.json'), 'utf-8');
  return JSON.parse(raw) as LightsTutorialFixture;
}

type Responder = (init?: RequestInit) => { status: number; body: unknown };

/** Minimal fetch stand-in: exact-path routing onto canned JSON responses. */
export function stubFetch(routes: Record<string, Responder>) {
  const calls: { url: string; init?: RequestInit }[] = [];
  const impl = async (url: string, init?: RequestInit): Promise<Response> => {
    calls.push({ url, init });
    const key = `${init?.method ?? 'GET'} ${new URL(url).pathname}`;
    const responder = routes[key];
    if (!responder) {
      return new Response(
        JSON.stringify({ error: { code: 'not_found', message: `no route ${key}` } }),
        { status: 404, headers: { 'content-type': 'application/json' } },
      );
    }
    const { status, body } = responder(init);
    return new Response(JSON.stringify(body), {
      status,
      headers: { 'content-type': 'application/json' },
    });
  };
  return { impl, calls };
}
