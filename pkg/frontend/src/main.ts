/** Page entry: wires the queue and results views to the service. */

import { ApiClient, ApiError } from "./api.js";
import { SessionQueue } from "./queue.js";
import {
  renderCard,
  renderCompletion,
  renderIntro,
  renderMessage,
  renderResults,
} from "./view.js";

function param(name: string): string | null {
  return new URLSearchParams(window.location.search).get(name);
}

function askForIds(container: HTMLElement): void {
  renderMessage(
    container,
    "Open this page with ?session=<session id>&judge=<your id> to begin.",
  );
}

async function runQueue(
  container: HTMLElement,
  queue: SessionQueue,
): Promise<void> {
  const redraw = () => {
    if (queue.isComplete()) {
      renderCompletion(container, queue.answered, queue.sameCount);
      return;
    }
    const card = queue.current();
    if (!card) return;
    renderCard(container, card, queue.cursor, queue.total, (choice) => {
      void queue.answer(choice).then(redraw);
    });
  };
  redraw();
}

async function showResults(
  container: HTMLElement,
  api: ApiClient,
  sessionId: string,
  judgeId: string,
): Promise<void> {
  try {
    const payload = await api.results(sessionId);
    renderResults(container, payload, judgeId);
  } catch (err) {
    if (err instanceof ApiError && err.status === 404) {
      renderMessage(
        container,
        "No results yet for this session. Results appear after the " +
          "session's responses have been swept into a curve.",
      );
      return;
    }
    throw err;
  }
}

async function boot(): Promise<void> {
  const app = document.getElementById("app");
  if (!app) return;
  const sessionId = param("session");
  const judgeId = param("judge");
  if (!sessionId || !judgeId) {
    askForIds(app);
    return;
  }
  const api = new ApiClient(param("api") ?? "");
  const stage = document.createElement("div");
  const header = document.createElement("div");
  app.replaceChildren(header, stage);
  renderIntro(header);

  try {
    if (param("view") === "results") {
      await showResults(stage, api, sessionId, judgeId);
      return;
    }
    const queue = new SessionQueue(api, sessionId, judgeId);
    await queue.load();
    await runQueue(stage, queue);
  } catch (err) {
    const detail =
      err instanceof ApiError
        ? err.message
        : "could not reach the service; reload to retry";
    renderMessage(stage, detail);
  }
}

void boot();
