// @vitest-environment jsdom
import { beforeEach, describe, expect, it } from "vitest";

import { ApiClient } from "../src/api.js";
import { mountApp } from "../src/main.js";
import { TasteRankApp } from "../src/state.js";
import { FakeService } from "./fake_service.js";

function setup() {
  const fake = new FakeService();
  const app = new TasteRankApp(new ApiClient("http://fake", fake.fetch), 8);
  const root = document.createElement("div");
  document.body.replaceChildren(root);
  mountApp(root, app);
  return { fake, app, root };
}

function click(root: HTMLElement, selector: string) {
  const el = root.querySelector<HTMLElement>(selector);
  expect(el, `missing element ${selector}`).toBeTruthy();
  el!.dispatchEvent(new MouseEvent("click", { bubbles: true }));
}

function tileIds(root: HTMLElement, listSelector: string): string[] {
  return [...root.querySelectorAll<HTMLElement>(`${listSelector} .rank-tile`)].map(
    (el) => el.dataset.id!,
  );
}

describe("select screen", () => {
  it("enforces exactly m selections and gates the submit button", async () => {
    const { app, root } = setup();
    await app.loadSelectScreen(0);
    const ids = [...root.querySelectorAll<HTMLElement>(".tile")].map(
      (t) => t.dataset.id!,
    );
    expect(ids.length).toBe(8);

    const submit = () =>
      root.querySelector<HTMLButtonElement>('[data-action="submit-favorites"]')!;
    expect(submit().disabled).toBe(true);

    click(root, `[data-id="${ids[0]}"]`);
    click(root, `[data-id="${ids[1]}"]`);
    expect(submit().disabled).toBe(true); // 2 of 3

    click(root, `[data-id="${ids[2]}"]`);
    expect(submit().disabled).toBe(false);

    // selecting m+1 is prevented: the 4th click is a no-op
    click(root, `[data-id="${ids[3]}"]`);
    expect(app.state.selected).toEqual([ids[0], ids[1], ids[2]]);
    expect(root.querySelectorAll(".tile.selected").length).toBe(3);

    // deselecting re-opens a slot
    click(root, `[data-id="${ids[0]}"]`);
    expect(app.state.selected).toEqual([ids[1], ids[2]]);
    expect(submit().disabled).toBe(true);
  });

  it("re-samples a new seeded page on refresh", async () => {
    const { fake, app, root } = setup();
    await app.loadSelectScreen(0);
    const before = [...root.querySelectorAll<HTMLElement>(".tile")].map(
      (t) => t.dataset.id,
    );
    await app.resample();
    const after = [...root.querySelectorAll<HTMLElement>(".tile")].map(
      (t) => t.dataset.id,
    );
    expect(after).not.toEqual(before);
    const sampleCalls = fake.requests.filter((r) => r.path === "/catalog/sample");
    expect(sampleCalls.length).toBe(2);
  });

  it("posts the chosen favorites with an idempotency key", async () => {
    const { fake, app } = setup();
    await app.loadSelectScreen(0);
    app.toggleFavorite("s0-4");
    app.toggleFavorite("s0-1");
    app.toggleFavorite("s0-6");
    await app.submitFavorites();
    const create = fake.requests.find(
      (r) => r.path === "/sessions" && r.method === "POST",
    )!;
    expect(create.body).toEqual({ favorites: ["s0-4", "s0-1", "s0-6"] });
    expect(create.headers["Idempotency-Key"]).toBeTruthy();
    expect(app.state.screen).toBe("refine");
  });
});

describe("refine screen", () => {
  async function toRefine() {
    const ctx = setup();
    await ctx.app.loadSelectScreen(0);
    ctx.app.toggleFavorite("s0-0");
    ctx.app.toggleFavorite("s0-1");
    ctx.app.toggleFavorite("s0-2");
    await ctx.app.submitFavorites();
    return ctx;
  }

  it("renders exactly the server's ranking order and scores", async () => {
    const { root } = await toRefine();
    // server order: img-e, img-b, img-a (top-3 shown), then img-d, img-c
    expect(tileIds(root, '[data-role="rerank-area"]')).toEqual([
      "img-e",
      "img-b",
      "img-a",
    ]);
    expect(tileIds(root, ".rank-list.readonly")).toEqual(["img-d", "img-c"]);
    const scores = [...root.querySelectorAll<HTMLElement>(".score")].map(
      (el) => el.dataset.score,
    );
    expect(scores).toEqual(["2.41", "1.9", "1.13", "0.57", "-0.33"]);
  });

  it("charts exactly the server's distribution values", async () => {
    const { root } = await toRefine();
    const probs = [...root.querySelectorAll<HTMLElement>(".bar-value")].map(
      (el) => el.dataset.prob,
    );
    expect(probs).toEqual(["0.537", "0.291", "0.172"]);
  });

  it("submits the dragged order as the feedback prefix", async () => {
    const { fake, app, root } = await toRefine();
    // move the top tile down one: [img-b, img-e, img-a]
    click(root, '[data-action="move-down"][data-position="0"]');
    expect(app.state.pendingOrder).toEqual(["img-b", "img-e", "img-a"]);
    await app.submitRerank();
    const feedback = fake.requests.find((r) =>
      r.path.endsWith("/feedback"),
    )!;
    expect(feedback.body).toEqual({
      ordered_prefix: ["img-b", "img-e", "img-a"],
      deletions: [],
      satisfied: false,
    });
    expect(feedback.headers["Idempotency-Key"]).toBeTruthy();
    // view updated to the server's new generation and order
    expect(app.state.session!.ranking.generation).toBe(1);
    expect(
      root.querySelector<HTMLElement>(".refine-screen")!.dataset.generation,
    ).toBe("1");
    expect(tileIds(root, '[data-role="rerank-area"]')).toEqual([
      "img-b",
      "img-e",
      "img-a",
    ]);
  });

  it("drag events reorder through the same path as the buttons", async () => {
    const { app, root } = await toRefine();
    const tiles = root.querySelectorAll<HTMLElement>(
      '[data-role="rerank-area"] .rank-tile',
    );
    const dataTransfer = { setData: () => {}, getData: () => "0" };
    tiles[0]!.dispatchEvent(
      Object.assign(new Event("dragstart", { bubbles: true }), { dataTransfer }),
    );
    tiles[2]!.dispatchEvent(
      Object.assign(new Event("drop", { bubbles: true }), { dataTransfer }),
    );
    expect(app.state.pendingOrder).toEqual(["img-b", "img-a", "img-e"]);
  });

  it("deletes a tile: excluded from the prefix, sent as deletion, gone after echo", async () => {
    const { fake, app, root } = await toRefine();
    click(root, '[data-action="toggle-delete"][data-id="img-b"]');
    expect(app.state.pendingOrder).toEqual(["img-e", "img-a"]);
    expect(app.state.pendingDeletions).toEqual(["img-b"]);
    await app.submitRerank();
    const feedback = fake.requests.find((r) => r.path.endsWith("/feedback"))!;
    expect(feedback.body).toEqual({
      ordered_prefix: ["img-e", "img-a"],
      deletions: ["img-b"],
      satisfied: false,
    });
    // the deleted tile never reappears in any later screen of this session
    expect(tileIds(root, ".rank-list")).not.toContain("img-b");
    await app.submitRerank();
    expect(tileIds(root, ".rank-list")).not.toContain("img-b");
  });

  it("satisfied flow: unchanged order plus the satisfied flag", async () => {
    const { fake, app, root } = await toRefine();
    await app.declareSatisfied();
    const feedback = fake.requests.find((r) => r.path.endsWith("/feedback"))!;
    expect(feedback.body).toEqual({
      ordered_prefix: ["img-e", "img-b", "img-a"],
      deletions: [],
      satisfied: true,
    });
    expect(app.state.session!.status).toBe("satisfied");
    expect(
      root.querySelector<HTMLElement>(".refine-screen")!.dataset.status,
    ).toBe("satisfied");
    // finalize still offered, further reranks disabled
    expect(
      root.querySelector<HTMLButtonElement>('[data-action="submit-rerank"]')!
        .disabled,
    ).toBe(true);
    expect(
      root.querySelector<HTMLButtonElement>('[data-action="finalize"]'),
    ).toBeTruthy();
  });

  it("surfaces a conflict with a refresh hint on stale submissions", async () => {
    const ctx = await toRefine();
    ctx.fake.conflictOnFeedback = true;
    await ctx.app.submitRerank();
    expect(ctx.app.state.error).toMatch(/refresh/);
    expect(ctx.root.querySelector(".error")!.textContent).toMatch(/refresh/);
  });
});

describe("results screen", () => {
  it("renders the scored gallery exactly in server order with server values", async () => {
    const { app, root } = setup();
    await app.loadSelectScreen(0);
    app.toggleFavorite("s0-0");
    app.toggleFavorite("s0-1");
    app.toggleFavorite("s0-2");
    await app.submitFavorites();
    await app.finalizeAndScore();
    expect(app.state.screen).toBe("results");
    expect(tileIds(root, ".rank-list.results")).toEqual([
      "img-d",
      "img-a",
      "img-e",
    ]);
    const scores = [
      ...root.querySelectorAll<HTMLElement>(".results-screen .score"),
    ].map((el) => el.dataset.score);
    expect(scores).toEqual(["0.92", "0.41", "-0.18"]);
    // final distribution comes from the server's finalized payload
    const probs = [...root.querySelectorAll<HTMLElement>(".bar-value")].map(
      (el) => el.dataset.prob,
    );
    expect(probs).toEqual(["0.537", "0.291", "0.172"]);
  });
});
