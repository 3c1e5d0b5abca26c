/** Form input to wire-action mapping, mirroring the server-side grammar.
 *
 * The trading form uses the human-facing signed-number convention (positive
 * buys, negative sells); the wire keeps the buy/sell object the agents use.
 * Validation here mirrors the server so obviously bad input never costs a
 * step, while anything accepted maps to exactly the payload the server sees.
 */

export type WireAction = number | string | Record<string, unknown>;

export type FormResult =
  | { ok: true; payload: WireAction; shown: string }
  | { ok: false; message: string };

export interface TradingFormInput {
  /** symbol -> signed share count text, e.g. { S0: "+100", S1: "-50" } */
  [symbol: string]: string;
}

export interface EnergyFormInput {
  thermal: string;
  wind: string;
  solar: string;
  battery: string;
}

function fail(message: string): FormResult {
  return { ok: false, message };
}

export function lightsAction(indexText: string, nLights: number): FormResult {
  const text = indexText.trim();
  if (!/^[+-]?\d+$/.test(text)) {
    return fail(`expected a bulb index, got "${indexText}"`);
  }
  const index = parseInt(text, 10);
  if (index < 0 || index >= nLights) {
    return fail(`bulb index ${index} out of range [0, ${nLights})`);
  }
  return { ok: true, payload: index, shown: String(index) };
}

export function tradingAction(form: TradingFormInput): FormResult {
  const buy: Record<string, number> = {};
  const sell: Record<string, number> = {};
  for (const [symbol, raw] of Object.entries(form)) {
    const text = raw.trim();
    if (text === '' || text === '0') continue;
    const value = Number(text);
    if (!Number.isFinite(value)) {
      return fail(`${symbol}: "${raw}" is not a number`);
    }
    // positive buys, negative sells; fractional requests floor like the server
    const shares = Math.floor(Math.abs(value));
    if (shares === 0) continue;
    if (value > 0) {
      buy[symbol] = shares;
    } else {
      sell[symbol] = shares;
    }
  }
  const payload = { buy, sell };
  return { ok: true, payload, shown: JSON.stringify(payload) };
}

export function energyAction(form: EnergyFormInput): FormResult {
  const payload: Record<string, number> = {};
  for (const key of ['thermal', 'wind', 'solar', 'battery'] as const) {
    const text = form[key].trim();
    if (text === '') {
      return fail(`${key} is required (use 0 for none)`);
    }
    const value = Number(text);
    if (!Number.isFinite(value)) {
      return fail(`${key}: "${form[key]}" is not a number`);
    }
    if (key !== 'battery' && value < 0) {
      return fail(`${key} must be non-negative`);
    }
    payload[key] = value;
  }
  return { ok: true, payload, shown: JSON.stringify(payload) };
}

export function repoAction(commandText: string): FormResult {
  const command = commandText.trim();
  if (!command) {
    return fail('enter a command, e.g. "repo tree"');
  }
  return { ok: true, payload: command, shown: command };
}

/** Re-parse a rendered action string back into the wire payload.
 * Round-trip invariant: parseShown(shown) equals the submitted payload. */
export function parseShown(envKind: string, shown: string): WireAction {
  if (envKind === 'lights') return parseInt(shown, 10);
  if (envKind === 'repo') return shown;
  return JSON.parse(shown) as Record<string, unknown>;
}
