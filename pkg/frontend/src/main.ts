/** Browser bootstrap: mounts the app, wires click delegation and HTML5
 * drag-and-drop onto the rerank list. Reordering always flows through
 * store.moveTile, whether it came from a drag or the arrow buttons. */

import { ApiClient } from "./api.js";
import { renderApp } from "./render.js";
import { TasteRankApp } from "./state.js";

export function mountApp(root: HTMLElement, app: TasteRankApp): void {
  let dragFrom: number | null = null;

  app.subscribe((state) => {
    root.innerHTML = renderApp(state);
  });

  root.addEventListener("click", (event) => {
    const target = (event.target as HTMLElement).closest<HTMLElement>(
      "[data-action]",
    );
    if (!target) return;
    const action = target.dataset.action;
    const id = target.dataset.id ?? "";
    const position = Number(target.dataset.position ?? -1);
    switch (action) {
      case "toggle-favorite":
        app.toggleFavorite(id);
        break;
      case "resample":
        void app.resample();
        break;
      case "submit-favorites":
        void app.submitFavorites();
        break;
      case "move-up":
        app.moveTile(position, position - 1);
        break;
      case "move-down":
        app.moveTile(position, position + 1);
        break;
      case "toggle-delete":
        app.toggleDelete(id);
        break;
      case "submit-rerank":
        void app.submitRerank();
        break;
      case "declare-satisfied":
        void app.declareSatisfied();
        break;
      case "finalize":
        void app.finalizeAndScore();
        break;
      case "restart":
        void app.loadSelectScreen(Date.now() % 100000);
        break;
    }
  });

  root.addEventListener("dragstart", (event) => {
    const tile = (event.target as HTMLElement).closest<HTMLElement>(".rank-tile");
    if (tile?.dataset.position) {
      dragFrom = Number(tile.dataset.position);
      event.dataTransfer?.setData("text/plain", tile.dataset.position);
    }
  });

  root.addEventListener("dragover", (event) => {
    if (dragFrom !== null) event.preventDefault();
  });

  root.addEventListener("drop", (event) => {
    const tile = (event.target as HTMLElement).closest<HTMLElement>(".rank-tile");
    if (tile?.dataset.position && dragFrom !== null) {
      event.preventDefault();
      app.moveTile(dragFrom, Number(tile.dataset.position));
    }
    dragFrom = null;
  });
}

if (typeof document !== "undefined" && document.getElementById("app")) {
  const root = document.getElementById("app")!;
  const app = new TasteRankApp(new ApiClient(""));
  mountApp(root, app);
  void app.loadSelectScreen(0);
}
