/** Worked-example walkthroughs shown before the first real task of each
 * environment. Each step suggests an action against the service's tutorial
 * task and explains what the feedback teaches. */

import type { EnvKind } from './types.js';
import type { WireAction } from './wire.js';

export interface TutorialStep {
  suggestion: WireAction;
  note: string;
}

export interface Tutorial {
  taskId: string;
  intro: string;
  steps: TutorialStep[];
}

export const TUTORIALS: Record<EnvKind, Tutorial> = {
  lights: {
    taskId: 'tutorial-lights',
    intro:
      'Three bulbs, all off. B0 can always toggle; B1 needs B0 on; B2 needs B0 on ' +
      'with B1 off. In real tasks these conditions are hidden: probe, watch the ' +
      'feedback, and work out the order.',
    steps: [
      { suggestion: 1, note: 'B1 is gated by B0, which is off, so this toggle fails.' },
      { suggestion: 0, note: 'B0 has no condition; it turns on.' },
      { suggestion: 2, note: 'B0 on and B1 off satisfies B2\'s condition.' },
      { suggestion: 1, note: 'B0 is on, so B1 now toggles: all bulbs lit.' },
    ],
  },
  trading: {
    taskId: 'tutorial-trading',
    intro:
      'Two stocks over three days, 100 cash. News reports exact factor changes; ' +
      'the hidden loading matrix turns them into price moves. Enter a positive ' +
      'number of shares to buy, negative to sell.',
    steps: [
      {
        suggestion: { buy: { S0: 100 }, sell: {} },
        note: 'The news implies S0 rises ~2% tomorrow while S1 dips: go all in on S0.',
      },
      {
        suggestion: { buy: { S1: 51 }, sell: { S0: 100 } },
        note: 'Now S1 is set to jump ~4.3%: rotate the whole position (sells settle first).',
      },
      {
        suggestion: { buy: {}, sell: {} },
        note: 'Both stocks rise similarly; holding S1 is fine. Final value ~110.42.',
      },
    ],
  },
  energy: {
    taskId: 'tutorial-energy',
    intro:
      'Six days of grid dispatch. Actual output = rated command x a hidden ' +
      'efficiency; wind and solar cycle with different periods. Keep supply over ' +
      'demand and cost under budget; three consecutive violation days end the run.',
    steps: [
      {
        suggestion: { thermal: 80, wind: 20, solar: 10, battery: 0 },
        note: 'A thermal-heavy opening comfortably covers 100 MW demand within the 420 budget.',
      },
      {
        suggestion: { thermal: 75, wind: 25, solar: 10, battery: -5 },
        note: 'Shift gently toward renewables and bank a little charge; small ramps keep stability high.',
      },
      {
        suggestion: { thermal: 70, wind: 25, solar: 15, battery: 0 },
        note: 'Solar efficiency peaks every third day here; lean on it when it is high.',
      },
      {
        suggestion: { thermal: 70, wind: 25, solar: 15, battery: 0 },
        note: 'Repeating a working allocation costs nothing in stability.',
      },
      {
        suggestion: { thermal: 65, wind: 30, solar: 15, battery: 5 },
        note: 'Discharge the banked energy while renewables run efficient.',
      },
      {
        suggestion: { thermal: 65, wind: 30, solar: 15, battery: 0 },
        note: 'Survive all six days with carbon below target to pass.',
      },
    ],
  },
  repo: {
    taskId: 'tutorial-repo',
    intro:
      'Configure a simulated Python project until `python run.py` passes. Errors ' +
      'are clues: missing modules, version-range ImportErrors, ABI (major version) ' +
      'and exact-version mismatches.',
    steps: [
      { suggestion: 'pip install python==3.10', note: 'The project needs a modern interpreter first.' },
      { suggestion: 'python run.py', note: 'Run early and often: the first error names a missing package.' },
      { suggestion: 'pip install pkg1==1.0', note: 'Install what the error asked for.' },
      { suggestion: 'python run.py', note: 'Next missing package.' },
      { suggestion: 'pip install pkg2==2.0', note: 'A guess at the newest version...' },
      { suggestion: 'python run.py', note: 'ABI mismatch: pkg2\'s major version must match pkg1.' },
      { suggestion: 'pip install pkg2==1.2', note: 'Align the major version while satisfying the range.' },
      { suggestion: 'python run.py', note: 'One more missing package.' },
      { suggestion: 'pip install pkg3==0.1', note: 'The low version satisfies the range...' },
      { suggestion: 'python run.py', note: '...but pkg3 must match pkg1 exactly.' },
      { suggestion: 'pip install pkg3==1.0', note: 'Exact match with pkg1==1.0.' },
      { suggestion: 'python run.py', note: 'All constraints hold: the project runs.' },
    ],
  },
};
