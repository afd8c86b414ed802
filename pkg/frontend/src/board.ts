/** Auction-board logic: lot ordering, the user's outbid state, and the
 * minimum acceptable next bid. Pure functions over wire records. */

import type { ApiError, EventView, LotView } from "./types.js";
import { addTokens, maxTokens } from "./tokens.js";

export type Badge = "leading" | "outbid" | "none";

const BID_MEMO = /^lot:(\d+):bid$/;

/** Lots the account has ever bid on, recovered from the event log alone
 * (the console keeps no state beyond the session token). */
export function myBidLots(
  events: readonly EventView[],
  account: string,
): Set<number> {
  const lots = new Set<number>();
  for (const event of events) {
    if (event.category !== "EscrowLock" || event.from !== account) continue;
    const match = BID_MEMO.exec(event.memo);
    if (match !== null) lots.add(Number(match[1]));
  }
  return lots;
}

/** Badge for one lot: leading if the account holds the highest bid, outbid
 * if it bid earlier but no longer leads. */
export function badgeFor(
  lot: LotView,
  account: string | null,
  myLots: ReadonlySet<number>,
): Badge {
  if (account === null) return "none";
  if (lot.highest !== null && lot.highest.bidder === account) {
    return "leading";
  }
  return myLots.has(lot.lot_id) ? "outbid" : "none";
}

/** Floor for the next acceptable bid: max(reserve, highest + increment). */
export function minimumBid(lot: LotView): string {
  if (lot.highest === null) return lot.reserve;
  return maxTokens(lot.reserve, addTokens(lot.highest.amount, lot.min_increment));
}

/** Open lots first (soonest close first), then the rest by lot id. */
export function sortLots(lots: readonly LotView[]): LotView[] {
  const open = lots.filter((lot) => lot.state === "Open");
  const rest = lots.filter((lot) => lot.state !== "Open");
  open.sort((a, b) => a.close_time - b.close_time || a.lot_id - b.lot_id);
  rest.sort((a, b) => a.lot_id - b.lot_id);
  return [...open, ...rest];
}

/** Inline message for a rejected bid, quoting the contract error verbatim. */
export function describeError(error: ApiError): string {
  return `${error.error}: ${error.detail}`;
}
