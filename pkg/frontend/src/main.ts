/** DOM wiring: board, bid forms, balance chart, disconnected banner.
 * All decision logic lives in the pure modules; this file only renders. */

import { badgeFor, describeError, minimumBid, myBidLots, sortLots } from "./board.js";
import { chartGeometry } from "./chart.js";
import { Disconnected, GatewayClient } from "./client.js";
import { applyBatch, emptyFeed, type EventFeed } from "./events.js";
import { formatTokens, parseTokens } from "./tokens.js";
import type { LotView, StateView } from "./types.js";

const BASE = (window as { GATEWAY_BASE?: string }).GATEWAY_BASE ??
  `${window.location.protocol}//${window.location.hostname}:8000`;

const client = new GatewayClient(BASE, (url, init) => fetch(url, init));
let feed: EventFeed = emptyFeed();
let account: string | null = null;
let robotRef: string | null = null;

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className !== undefined) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

function byId(id: string): HTMLElement {
  const node = document.getElementById(id);
  if (node === null) throw new Error(`missing #${id}`);
  return node;
}

function setBanner(disconnected: boolean): void {
  byId("banner").hidden = !disconnected;
}

function renderStatus(state: StateView): void {
  byId("status").textContent =
    `tick ${state.tick} | ${state.stage} | paintings ` +
    `${state.paintings_completed}/${state.target_paintings} | robot ` +
    `${formatTokens(state.robot_balance)} tokens` +
    (state.finished ? " | finished" : "") +
    (state.deadlocked ? " | deadlocked" : "");
}

function bidForm(lot: LotView): HTMLElement {
  const form = el("form", "bid-form");
  const input = el("input");
  input.placeholder = formatTokens(minimumBid(lot));
  input.setAttribute("aria-label", `bid on lot ${lot.lot_id}`);
  const button = el("button", undefined, "bid");
  const note = el("span", "bid-note");
  form.append(input, button, note);
  form.addEventListener("submit", (event) => {
    event.preventDefault();
    void (async () => {
      let amount: string;
      try {
        amount = parseTokens(input.value || input.placeholder);
      } catch (err) {
        note.textContent = String(err instanceof Error ? err.message : err);
        return;
      }
      try {
        const outcome = await client.bid(lot.lot_id, amount);
        note.textContent = outcome.accepted
          ? "accepted"
          : describeError(outcome.error);
      } catch (err) {
        if (err instanceof Disconnected) setBanner(true);
        else throw err;
      }
      await refresh();
    })();
  });
  return form;
}

function renderBoard(lots: LotView[], tick: number): void {
  const board = byId("board");
  board.replaceChildren();
  const mine = account === null
    ? new Set<number>()
    : myBidLots(feed.events, account);
  for (const lot of sortLots(lots)) {
    const card = el("div", `lot lot-${lot.state.toLowerCase()}`);
    const badge = badgeFor(lot, account, mine);
    const head = el("div", "lot-head",
      `lot ${lot.lot_id} [${lot.state}] closes @ ${lot.close_time}`);
    if (badge !== "none") {
      head.append(el("span", `badge badge-${badge}`, badge));
    }
    const highest = lot.highest === null
      ? `reserve ${formatTokens(lot.reserve)}`
      : `highest ${formatTokens(lot.highest.amount)} by ` +
        `${lot.highest.bidder_label ?? lot.highest.bidder}`;
    const line = el("div", "lot-line",
      `${highest} | ${lot.bid_count} bids | min next ` +
      `${formatTokens(minimumBid(lot))}`);
    line.title = lot.highest === null ? lot.reserve : lot.highest.amount;
    card.append(head, line);
    if (lot.state === "Open" && tick < lot.close_time) {
      card.append(bidForm(lot));
    }
    board.append(card);
  }
}

async function renderChart(): Promise<void> {
  if (robotRef === null) return;
  const timeline = await client.timeline(robotRef);
  const geometry = chartGeometry(timeline.rows, 720, 260);
  const svgParts = [
    `<svg viewBox="0 0 ${geometry.width} ${geometry.height}" ` +
      `width="${geometry.width}" height="${geometry.height}">`,
    geometry.path === ""
      ? ""
      : `<path d="${geometry.path}" fill="none" stroke="currentColor"/>`,
  ];
  for (const marker of geometry.markers) {
    svgParts.push(
      `<text x="${marker.x.toFixed(2)}" y="${marker.y.toFixed(2)}" ` +
        `text-anchor="middle" font-size="10">` +
        `<title>${marker.label} (${marker.balance})</title>` +
        `${marker.glyph}</text>`,
    );
  }
  svgParts.push("</svg>");
  byId("chart").innerHTML = svgParts.join("");
  byId("legend").replaceChildren(
    ...geometry.legend.map((item) =>
      el("span", "legend-item", `${item.glyph} ${item.category}`),
    ),
  );
}

async function refresh(): Promise<void> {
  try {
    const state = await client.state();
    robotRef = state.robot_account;
    renderStatus(state);
    const auctions = await client.auctions();
    renderBoard(auctions.auctions, auctions.tick);
    await renderChart();
    setBanner(false);
  } catch (err) {
    if (err instanceof Disconnected) setBanner(true);
    else throw err;
  }
}

async function pollLoop(): Promise<void> {
  for (;;) {
    try {
      const batch = await client.events(feed.next, 25);
      const applied = applyBatch(feed, batch);
      feed = applied.feed;
      if (applied.fresh.length > 0) await refresh();
      setBanner(false);
    } catch (err) {
      if (!(err instanceof Disconnected)) throw err;
      setBanner(true);
      await new Promise((resolve) => setTimeout(resolve, 2000));
    }
  }
}

function wireSession(): void {
  const input = byId("token") as HTMLInputElement;
  const saved = window.localStorage.getItem("session-token");
  if (saved !== null) input.value = saved;
  const apply = async (): Promise<void> => {
    client.sessionToken = input.value.trim() || null;
    window.localStorage.setItem("session-token", input.value.trim());
    account = null;
    if (client.sessionToken !== null) {
      try {
        account = (await client.session()).account;
      } catch (err) {
        if (err instanceof Disconnected) setBanner(true);
        account = null;
      }
    }
    await refresh();
  };
  byId("token-form").addEventListener("submit", (event) => {
    event.preventDefault();
    void apply();
  });
  void apply();
}

wireSession();
void refresh();
void pollLoop();
