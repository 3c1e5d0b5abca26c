import { ServiceClient, ServiceError } from './api.js';
import { PlaySession } from './session.js';
import { TUTORIALS } from './tutorial.js';
import type { EnvKind, TaskEntry } from './types.js';
import {
  energyAction,
  lightsAction,
  repoAction,
  tradingAction,
  type EnergyFormInput,
  type FormResult,
  type WireAction,
} from './wire.js';

const ENV_LABELS: Record<EnvKind, string> = {
  lights: 'Turn On Lights',
  trading: 'Trading',
  energy: 'Grid Dispatch',
  repo: 'Repo Setup',
};

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  attrs: Record<string, string> = {},
  ...children: (Node | string)[]
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  for (const [key, value] of Object.entries(attrs)) {
    node.setAttribute(key, value);
  }
  node.append(...children);
  return node;
}

export class App {
  private session: PlaySession | null = null;
  private tutorialStep = 0;
  private inFlight = false;
  private root: HTMLElement;

  constructor(
    private readonly client: ServiceClient,
    mount: HTMLElement,
  ) {
    this.root = mount;
  }

  async start(): Promise<void> {
    await this.renderMenu();
  }

  // ------------------------------------------------------------------ menu

  private async renderMenu(): Promise<void> {
    this.session = null;
    this.root.replaceChildren(el('p', {}, 'Loading tasks...'));
    let tasks: TaskEntry[] = [];
    let banner: HTMLElement | null = null;
    try {
      tasks = await this.client.listTasks();
    } catch (error) {
      banner = el(
        'div',
        { class: 'banner error' },
        `Service unreachable: ${(error as Error).message} `,
        el('button', { type: 'button' }, 'Retry'),
      );
      banner.querySelector('button')!.addEventListener('click', () => this.renderMenu());
    }

    const menu = el('div', { class: 'menu' });
    if (banner) menu.append(banner);
    menu.append(el('h1', {}, 'latentbench: human play'));

    const byEnv = new Map<EnvKind, TaskEntry[]>();
    for (const task of tasks) {
      if (task.task_id.startsWith('tutorial-')) continue;
      const group = byEnv.get(task.env_kind) ?? [];
      group.push(task);
      byEnv.set(task.env_kind, group);
    }

    for (const env of ['lights', 'trading', 'energy', 'repo'] as EnvKind[]) {
      const section = el('section', {}, el('h2', {}, ENV_LABELS[env]));
      const tutorialButton = el('button', { type: 'button' }, 'Play the walkthrough first');
      tutorialButton.addEventListener('click', () => this.startTutorial(env));
      section.append(tutorialButton);
      const group = byEnv.get(env) ?? [];
      const list = el('ul', {});
      for (const task of group) {
        const button = el('button', { type: 'button' }, `${task.task_id} (${task.difficulty}, ${task.step_budget} steps)`);
        button.addEventListener('click', () => this.startTask(task.task_id));
        list.append(el('li', {}, button));
      }
      if (!group.length) {
        list.append(el('li', {}, 'no tasks served'));
      }
      section.append(list);
      menu.append(section);
    }

    const resume = el(
      'section',
      {},
      el('h2', {}, 'Resume a session'),
      el('input', { id: 'resume-id', placeholder: 'session id' }),
    );
    const resumeButton = el('button', { type: 'button' }, 'Resume');
    resumeButton.addEventListener('click', async () => {
      const input = document.getElementById('resume-id') as HTMLInputElement;
      try {
        this.session = await PlaySession.restore(this.client, input.value.trim());
        this.tutorialStep = -1;
        this.renderPlay();
      } catch (error) {
        alert(`resume failed: ${(error as Error).message}`);
      }
    });
    resume.append(resumeButton);
    menu.append(resume);
    this.root.replaceChildren(menu);
  }

  private async startTask(taskId: string, tutorial = false): Promise<void> {
    try {
      const view = await this.client.createSession({
        task_id: taskId,
        rules_revealed: tutorial,
        actor_tag: 'human',
      });
      this.session = PlaySession.fromCreate(view);
      this.session.tutorialMode = tutorial;
      this.tutorialStep = tutorial ? 0 : -1;
      this.renderPlay();
    } catch (error) {
      alert(`could not start: ${(error as Error).message}`);
    }
  }

  private startTutorial(env: EnvKind): void {
    void this.startTask(TUTORIALS[env].taskId, true);
  }

  // ------------------------------------------------------------------ play

  private renderPlay(feedbackError?: string): void {
    const session = this.session;
    if (!session) return;
    const descriptor = session.descriptor;

    const header = el(
      'div',
      { class: 'header' },
      el('h1', {}, `${ENV_LABELS[session.envKind]} - ${descriptor.task_id}`),
      el(
        'p',
        {},
        `session ${descriptor.session_id} | status: ${descriptor.status} | ` +
          `step ${descriptor.step_index}/${descriptor.step_budget} | ` +
          `remaining: ${descriptor.remaining_steps}`,
      ),
    );

    const backButton = el('button', { type: 'button' }, 'Back to tasks');
    backButton.addEventListener('click', () => this.renderMenu());
    const exportButton = el('button', { type: 'button' }, 'Export trace');
    exportButton.addEventListener('click', () => void this.exportTrace());
    header.append(backButton, ' ', exportButton);

    const parts: HTMLElement[] = [header];

    if (session.tutorialMode) {
      parts.push(this.tutorialBanner());
    }

    parts.push(
      el('section', { class: 'observation' }, el('h2', {}, 'Current state'), el('pre', {}, session.observation)),
    );

    if (session.running) {
      parts.push(this.actionForm(feedbackError));
    } else {
      parts.push(el('p', { class: 'terminal' }, `Episode finished: ${descriptor.status}.`));
    }

    const history = el('section', { class: 'history' }, el('h2', {}, 'History'));
    const list = el('ol', {});
    for (const entry of session.history) {
      list.append(
        el(
          'li',
          {},
          el('code', {}, entry.actionShown),
          el('div', { class: 'feedback' }, entry.feedback),
        ),
      );
    }
    history.append(list);
    parts.push(history);

    this.root.replaceChildren(...parts);
  }

  private tutorialBanner(): HTMLElement {
    const session = this.session!;
    const tutorial = TUTORIALS[session.envKind];
    const banner = el('div', { class: 'banner tutorial' });
    if (this.tutorialStep === 0) {
      banner.append(el('p', {}, tutorial.intro));
    }
    const step = tutorial.steps[this.tutorialStep];
    if (step && session.running) {
      banner.append(
        el('p', {}, `Walkthrough step ${this.tutorialStep + 1}/${tutorial.steps.length}: ${step.note}`),
      );
      const useButton = el('button', { type: 'button' }, 'Use suggested action');
      useButton.addEventListener('click', () => void this.submit(this.suggestionResult(step.suggestion)));
      banner.append(useButton);
    } else if (!session.running) {
      banner.append(el('p', {}, 'Walkthrough complete. Head back and pick a real task.'));
    }
    return banner;
  }

  private suggestionResult(suggestion: WireAction): FormResult {
    const shown = typeof suggestion === 'object' ? JSON.stringify(suggestion) : String(suggestion);
    return { ok: true, payload: suggestion, shown };
  }

  // ------------------------------------------------------------------ forms

  private actionForm(feedbackError?: string): HTMLElement {
    const session = this.session!;
    const form = el('section', { class: 'action-form' }, el('h2', {}, 'Your action'));
    if (feedbackError) {
      form.append(el('p', { class: 'inline-error' }, feedbackError));
    }
    const submit = el('button', { type: 'button', id: 'submit' }, 'Execute Action');

    switch (session.envKind) {
      case 'lights': {
        form.append(el('label', {}, 'Bulb index: '), el('input', { id: 'light-index', size: '4' }));
        submit.addEventListener('click', () => {
          const input = (document.getElementById('light-index') as HTMLInputElement).value;
          const bulbs = session.observation.split('\n').pop()!.split(' ').length;
          void this.submit(lightsAction(input, bulbs));
        });
        break;
      }
      case 'trading': {
        const symbols = this.tradingSymbols();
        for (const symbol of symbols) {
          form.append(
            el('label', {}, `${symbol} (+buy / -sell): `),
            el('input', { id: `shares-${symbol}`, size: '8' }),
            el('br', {}),
          );
        }
        submit.addEventListener('click', () => {
          const entries: Record<string, string> = {};
          for (const symbol of symbols) {
            entries[symbol] = (document.getElementById(`shares-${symbol}`) as HTMLInputElement).value;
          }
          void this.submit(tradingAction(entries));
        });
        break;
      }
      case 'energy': {
        for (const key of ['thermal', 'wind', 'solar', 'battery']) {
          form.append(
            el('label', {}, `${key} (MW): `),
            el('input', { id: `mw-${key}`, size: '8', value: '0' }),
            el('br', {}),
          );
        }
        submit.addEventListener('click', () => {
          const read = (key: string) => (document.getElementById(`mw-${key}`) as HTMLInputElement).value;
          const input: EnergyFormInput = {
            thermal: read('thermal'),
            wind: read('wind'),
            solar: read('solar'),
            battery: read('battery'),
          };
          void this.submit(energyAction(input));
        });
        break;
      }
      case 'repo': {
        form.append(el('input', { id: 'command', size: '50', placeholder: 'e.g. repo tree' }));
        submit.addEventListener('click', () => {
          const command = (document.getElementById('command') as HTMLInputElement).value;
          void this.submit(repoAction(command));
        });
        break;
      }
    }
    form.append(el('br', {}), submit);
    return form;
  }

  private tradingSymbols(): string[] {
    const match = this.session!.observation.match(/Prices: ([^\n]+)/);
    if (!match) return ['S0', 'S1'];
    return match[1].split(',').map((chunk) => chunk.trim().split('=')[0]);
  }

  // ------------------------------------------------------------------ submit

  private async submit(result: FormResult): Promise<void> {
    if (this.inFlight || !this.session) return;
    if (!result.ok) {
      this.renderPlay(result.message);
      return;
    }
    this.inFlight = true;
    const submitButton = document.getElementById('submit') as HTMLButtonElement | null;
    if (submitButton) submitButton.disabled = true;
    try {
      const response = await this.client.step(this.session.descriptor.session_id, result.payload);
      this.session.applyStep(result.shown, response);
      if (this.session.tutorialMode && this.tutorialStep >= 0) {
        this.tutorialStep += 1;
      }
      this.renderPlay();
    } catch (error) {
      const message =
        error instanceof ServiceError ? `${error.code}: ${error.message}` : (error as Error).message;
      this.renderPlay(message);
    } finally {
      this.inFlight = false;
    }
  }

  private async exportTrace(): Promise<void> {
    if (!this.session) return;
    const exported = await this.client.exportTrace(this.session.descriptor.session_id);
    const blob = new Blob([JSON.stringify(exported, null, 2)], { type: 'application/json' });
    const link = document.createElement('a');
    link.href = URL.createObjectURL(blob);
    link.download = `${exported.session_id}-trace.json`;
    link.click();
    URL.revokeObjectURL(link.href);
  }
}
