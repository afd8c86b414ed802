/** Long-poll cursor: accumulates the event log gaplessly by sequence
 * number, tolerating overlapping or stale batches from reconnects. */

import type { EventsResponse, EventView } from "./types.js";

export interface EventFeed {
  next: number;
  events: EventView[];
}

export function emptyFeed(): EventFeed {
  return { next: 0, events: [] };
}

/** Fold one /events response into the feed; returns the feed plus only the
 * genuinely new events: the contiguous run starting at the cursor. Replayed
 * or out-of-order sequences are dropped, so the feed equals the server log
 * prefix [0, next) at all times. */
export function applyBatch(
  feed: EventFeed,
  batch: EventsResponse,
): { feed: EventFeed; fresh: EventView[] } {
  const candidates = batch.events
    .filter((event) => event.seq >= feed.next)
    .sort((a, b) => a.seq - b.seq);
  const contiguous: EventView[] = [];
  let expected = feed.next;
  for (const event of candidates) {
    if (event.seq !== expected) break;
    contiguous.push(event);
    expected += 1;
  }
  return {
    feed: { next: expected, events: [...feed.events, ...contiguous] },
    fresh: contiguous,
  };
}
