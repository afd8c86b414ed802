/** Exact token-amount arithmetic over wire decimal strings.
 *
 * Amounts are integers of 1e-18 tokens. Everything here is BigInt/string
 * math; floats would silently round amounts above 2^53 base units. */

export const DECIMALS = 18;

const SCALE = 10n ** BigInt(DECIMALS);

function toBigInt(raw: string): bigint {
  if (!/^-?\d+$/.test(raw)) {
    throw new Error(`not a base-unit amount: ${JSON.stringify(raw)}`);
  }
  return BigInt(raw);
}

/** Base-unit string -> human token string, losslessly ("1150000000000000000"
 * -> "1.15", "0" -> "0"). Trailing fractional zeros are trimmed. */
export function formatTokens(raw: string): string {
  let value = toBigInt(raw);
  const sign = value < 0n ? "-" : "";
  if (value < 0n) value = -value;
  const whole = value / SCALE;
  const frac = value % SCALE;
  if (frac === 0n) return `${sign}${whole}`;
  const digits = frac.toString().padStart(DECIMALS, "0").replace(/0+$/, "");
  return `${sign}${whole}.${digits}`;
}

/** Human token string -> base-unit string ("1.15" ->
 * "1150000000000000000"). Rejects more than 18 fractional digits. */
export function parseTokens(text: string): string {
  const match = /^(-?)(\d+)(?:\.(\d+))?$/.exec(text.trim());
  if (match === null) {
    throw new Error(`not a token amount: ${JSON.stringify(text)}`);
  }
  const [, sign, whole, frac = ""] = match;
  if (frac.length > DECIMALS) {
    throw new Error(`more than ${DECIMALS} fractional digits: ${text}`);
  }
  const scaled =
    BigInt(whole!) * SCALE + BigInt(frac.padEnd(DECIMALS, "0") || "0");
  return `${sign === "-" && scaled !== 0n ? "-" : ""}${scaled}`;
}

/** Max of two base-unit strings. */
export function maxTokens(a: string, b: string): string {
  return toBigInt(a) >= toBigInt(b) ? a : b;
}

/** Sum of two base-unit strings, as a base-unit string. */
export function addTokens(a: string, b: string): string {
  return (toBigInt(a) + toBigInt(b)).toString();
}

/** a >= b over base-unit strings. */
export function gteTokens(a: string, b: string): boolean {
  return toBigInt(a) >= toBigInt(b);
}
