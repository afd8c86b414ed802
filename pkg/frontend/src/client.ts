/** Gateway HTTP client. The fetch implementation is injected so logic
 * tests can run against a scripted server double. */

import type {
  ApiError,
  AuctionsResponse,
  EventsResponse,
  LotDetail,
  LotView,
  SessionView,
  StateView,
  TimelineResponse,
} from "./types.js";

export type FetchLike = (
  url: string,
  init?: RequestInit,
) => Promise<Response>;

/** Network-level failure (server down, refused, aborted): the board shows
 * the disconnected banner and keeps polling. */
export class Disconnected extends Error {
  constructor(cause: unknown) {
    super(`gateway unreachable: ${String(cause)}`);
    this.name = "Disconnected";
  }
}

export type BidOutcome =
  | { accepted: true; lot: LotView }
  | { accepted: false; status: number; error: ApiError };

export class GatewayClient {
  constructor(
    private readonly base: string,
    private readonly fetchImpl: FetchLike,
    public sessionToken: string | null = null,
  ) {}

  private headers(): Record<string, string> {
    return this.sessionToken === null
      ? {}
      : { "X-Session-Token": this.sessionToken };
  }

  private async get<T>(path: string): Promise<T> {
    let response: Response;
    try {
      response = await this.fetchImpl(`${this.base}${path}`, {
        headers: this.headers(),
      });
    } catch (cause) {
      throw new Disconnected(cause);
    }
    const body: unknown = await response.json();
    if (!response.ok) {
      const error = body as ApiError;
      throw new Error(`${response.status} ${error.error}: ${error.detail}`);
    }
    return body as T;
  }

  state(): Promise<StateView> {
    return this.get("/state");
  }

  session(): Promise<SessionView> {
    return this.get("/session");
  }

  auctions(): Promise<AuctionsResponse> {
    return this.get("/auctions");
  }

  lot(lotId: number): Promise<LotDetail> {
    return this.get(`/auctions/${lotId}`);
  }

  timeline(ref: string): Promise<TimelineResponse> {
    return this.get(`/timeline/${encodeURIComponent(ref)}`);
  }

  events(since: number, timeout = 0): Promise<EventsResponse> {
    return this.get(`/events?since=${since}&timeout=${timeout}`);
  }

  /** Post a bid; contract rejections come back as a structured outcome so
   * the form can show the server's reason verbatim. */
  async bid(lotId: number, amount: string): Promise<BidOutcome> {
    let response: Response;
    try {
      response = await this.fetchImpl(`${this.base}/auctions/${lotId}/bids`, {
        method: "POST",
        headers: { "Content-Type": "application/json", ...this.headers() },
        body: JSON.stringify({ amount }),
      });
    } catch (cause) {
      throw new Disconnected(cause);
    }
    const body: unknown = await response.json();
    if (response.ok) {
      return { accepted: true, lot: (body as { lot: LotView }).lot };
    }
    return {
      accepted: false,
      status: response.status,
      error: body as ApiError,
    };
  }
}
