/** Pure view functions: state in, HTML out. Every score, probability and
 * ordering is printed exactly as the server sent it. Interactive elements
 * carry data-action attributes picked up by the delegation layer in
 * main.ts; tiles are draggable and also reorderable with buttons. */

import { RankEntry, ScoredItem, UsadPayload } from "./api.js";
import { AppState } from "./state.js";

function esc(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

function tileMedia(id: string, mediaUrl: string, hasMedia: boolean): string {
  if (hasMedia) {
    return `<img class="thumb" src="${esc(mediaUrl)}" alt="${esc(id)}">`;
  }
  // catalogs without media files get a deterministic placeholder swatch
  let hash = 0;
  for (const ch of id) hash = (hash * 31 + ch.charCodeAt(0)) >>> 0;
  const hue = hash % 360;
  return `<div class="thumb swatch" style="background:hsl(${hue},55%,55%)">${esc(id)}</div>`;
}

export function renderChart(usad: UsadPayload): string {
  const rows = usad.attributes
    .map((name, i) => ({ name, prob: usad.probs[i] ?? 0 }))
    .map(
      ({ name, prob }) => `
      <div class="bar-row">
        <span class="bar-label">${esc(name)}</span>
        <span class="bar-track"><span class="bar-fill" style="width:${(prob * 100).toFixed(2)}%"></span></span>
        <span class="bar-value" data-prob="${prob}">${prob.toFixed(3)}</span>
      </div>`,
    );
  return `<div class="chart" data-generation="${usad.generation}">${rows.join("")}</div>`;
}

export function renderSelectScreen(state: AppState): string {
  const m = state.config?.m ?? 0;
  const tiles = state.sample
    .map((item) => {
      const selected = state.selected.includes(item.id);
      return `
      <button class="tile ${selected ? "selected" : ""}"
              data-action="toggle-favorite" data-id="${esc(item.id)}">
        ${tileMedia(item.id, item.media_url, item.has_media)}
      </button>`;
    })
    .join("");
  const ready = state.selected.length === m && m > 0;
  return `
  <section class="screen select-screen">
    <h2>Pick ${m} favorites</h2>
    <p class="hint">${state.selected.length} of ${m} selected</p>
    <div class="grid">${tiles}</div>
    <footer>
      <button data-action="resample">Show me different images</button>
      <button data-action="submit-favorites" ${ready ? "" : "disabled"}>Start ranking</button>
    </footer>
  </section>`;
}

function rerankTile(entry: RankEntry, position: number, deleted: boolean): string {
  return `
  <li class="rank-tile ${deleted ? "deleted" : ""}" draggable="true"
      data-id="${esc(entry.id)}" data-position="${position}">
    ${tileMedia(entry.id, entry.media_url, false)}
    <span class="score" data-score="${entry.score}">${entry.score.toFixed(4)}</span>
    <span class="controls">
      <button data-action="move-up" data-position="${position}" aria-label="move up">&#8593;</button>
      <button data-action="move-down" data-position="${position}" aria-label="move down">&#8595;</button>
      <button data-action="toggle-delete" data-id="${esc(entry.id)}">
        ${deleted ? "restore" : "delete"}
      </button>
    </span>
  </li>`;
}

export function renderRefineScreen(state: AppState): string {
  const session = state.session;
  if (!session) return `<section class="screen">no session</section>`;
  const byId = new Map(session.ranking.entries.map((e) => [e.id, e]));
  const pendingTiles = state.pendingOrder
    .map((id, position) => {
      const entry = byId.get(id);
      return entry ? rerankTile(entry, position, false) : "";
    })
    .join("");
  const deletedTiles = state.pendingDeletions
    .map((id) => {
      const entry = byId.get(id);
      return entry ? rerankTile(entry, -1, true) : "";
    })
    .join("");
  const rest = session.ranking.entries
    .slice(session.k)
    .map(
      (entry) => `
      <li class="rank-tile readonly" data-id="${esc(entry.id)}">
        ${tileMedia(entry.id, entry.media_url, false)}
        <span class="score" data-score="${entry.score}">${entry.score.toFixed(4)}</span>
      </li>`,
    )
    .join("");
  const chart = session.usad_preview ? renderChart(session.usad_preview) : "";
  const canRerank =
    session.status === "awaiting_feedback" &&
    session.iteration < session.max_iterations;
  return `
  <section class="screen refine-screen" data-status="${esc(session.status)}"
           data-generation="${session.ranking.generation}">
    <h2>Refine your ranking</h2>
    <p class="hint">
      iteration ${session.iteration} of ${session.max_iterations},
      status ${esc(session.status)}
    </p>
    <ol class="rank-list" data-role="rerank-area">${pendingTiles}</ol>
    ${deletedTiles ? `<p class="hint">deleted:</p><ol class="rank-list deleted-list">${deletedTiles}</ol>` : ""}
    ${rest ? `<p class="hint">rest of your pool:</p><ol class="rank-list readonly">${rest}</ol>` : ""}
    <footer>
      <button data-action="submit-rerank" ${canRerank ? "" : "disabled"}>Submit new order</button>
      <button data-action="declare-satisfied" ${session.status === "awaiting_feedback" ? "" : "disabled"}>I'm satisfied</button>
      <button data-action="finalize">Finish &amp; see results</button>
    </footer>
    <h3>Your taste profile</h3>
    ${chart}
  </section>`;
}

function resultTile(item: ScoredItem): string {
  const note = item.undefined_correlation ? " (no signal)" : "";
  return `
  <li class="rank-tile result-tile" data-id="${esc(item.id)}">
    ${tileMedia(item.id, item.media_url, false)}
    <span class="score" data-score="${item.score}">${item.score.toFixed(4)}${note}</span>
  </li>`;
}

export function renderResultsScreen(state: AppState): string {
  const session = state.session;
  const chart = session?.usad ? renderChart(session.usad) : "";
  const tiles = state.results.map(resultTile).join("");
  return `
  <section class="screen results-screen">
    <h2>Ranked for you</h2>
    ${chart}
    <ol class="rank-list results">${tiles}</ol>
    <footer>
      <button data-action="restart">Start over</button>
    </footer>
  </section>`;
}

export function renderApp(state: AppState): string {
  const banner = state.error
    ? `<div class="error" role="alert">${esc(state.error)}</div>`
    : "";
  const busy = state.busy ? `<div class="busy">working…</div>` : "";
  let screen: string;
  switch (state.screen) {
    case "select":
      screen = renderSelectScreen(state);
      break;
    case "refine":
      screen = renderRefineScreen(state);
      break;
    case "results":
      screen = renderResultsScreen(state);
      break;
  }
  return `${banner}${busy}${screen}`;
}
