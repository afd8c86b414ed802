/** Wire types mirroring the gateway's JSON records. All token amounts are
 * integer base-unit decimal strings and must never pass through a float. */

export interface HighestBid {
  bidder: string;
  bidder_label: string | null;
  amount: string;
  time: number;
}

export type LotState = "Created" | "Open" | "Settled" | "Unsold" | "Cancelled";

export interface LotView {
  lot_id: number;
  token_id: number;
  state: LotState;
  seller: string;
  reserve: string;
  min_increment: string;
  open_time: number;
  close_time: number;
  platform_fee_bps: number;
  bid_count: number;
  highest: HighestBid | null;
}

export interface LotDetail extends LotView {
  preview_svg?: string;
  topic?: { keyword: string; glyphs: string; date: string };
  tick: number;
}

export interface AuctionsResponse {
  tick: number;
  auctions: LotView[];
}

export interface EventView {
  seq: number;
  time: number;
  from: string;
  to: string;
  amount: string;
  fee: string;
  category: string;
  memo: string;
}

export interface EventsResponse {
  events: EventView[];
  next: number;
}

export interface TimelineRow {
  time: number;
  balance: string;
  category: string;
}

export interface TimelineResponse {
  account: string;
  label: string | null;
  rows: TimelineRow[];
}

export interface SessionView {
  account: string;
  label: string | null;
  balance: string;
}

export interface StateView {
  tick: number;
  stage: string;
  finished: boolean;
  deadlocked: boolean;
  paintings_completed: number;
  target_paintings: number;
  inventory: Record<string, number>;
  robot_balance: string;
  robot_account: string;
  event_count: number;
}

export interface ApiError {
  error: string;
  detail: string;
}
