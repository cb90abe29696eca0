/** DOM rendering for the pair queue and the results view. */

import { PairPayload, ResultsPayload } from "./api.js";
import { renderCurveSvg } from "./chart.js";
import { Card, Choice } from "./queue.js";

/**
 * Outcome-like fields must never render even if a payload smuggles one
 * in; the service already omits them, this is the client-side backstop.
 */
export const HIDDEN_FIELDS = new Set(["label", "outcome", "two_year_recid"]);

export function visibleFeatureNames(pair: PairPayload): string[] {
  const names = new Set([
    ...Object.keys(pair.left),
    ...Object.keys(pair.right),
  ]);
  return [...names].filter((n) => !HIDDEN_FIELDS.has(n.toLowerCase())).sort();
}

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

function formatValue(v: number): string {
  return Number.isInteger(v) ? String(v) : v.toFixed(3);
}

export function renderIntro(container: HTMLElement): void {
  const p = el(
    "p",
    "intro",
    "You will see pairs of records, one pair at a time. For each pair, " +
      "choose whether the two records should receive the same prediction " +
      "or may receive different ones. Answer however seems right to you.",
  );
  container.appendChild(p);
}

export function renderCard(
  container: HTMLElement,
  card: Card,
  index: number,
  total: number,
  onChoice: (choice: Choice) => void,
): void {
  container.replaceChildren();

  const progress = el("div", "progress", `pair ${index + 1} / ${total}`);
  container.appendChild(progress);

  const table = el("table", "pair-table");
  const head = el("tr");
  head.appendChild(el("th", undefined, "feature"));
  head.appendChild(el("th", undefined, "record A"));
  head.appendChild(el("th", undefined, "record B"));
  table.appendChild(head);
  for (const name of visibleFeatureNames(card.pair)) {
    const row = el("tr");
    row.appendChild(el("td", "feature-name", name));
    row.appendChild(el("td", undefined, formatValue(card.pair.left[name] ?? NaN)));
    row.appendChild(el("td", undefined, formatValue(card.pair.right[name] ?? NaN)));
    table.appendChild(row);
  }
  container.appendChild(table);

  const buttons = el("div", "choices");
  const same = el("button", "choice", "Same");
  const different = el("button", "choice", "Different");
  const busy = card.state === "submitting";
  same.disabled = busy;
  different.disabled = busy;
  same.addEventListener("click", () => onChoice("same"));
  different.addEventListener("click", () => onChoice("different"));
  buttons.appendChild(same);
  buttons.appendChild(different);
  container.appendChild(buttons);

  if (card.state === "failed") {
    const note = el("div", "note error-note", card.note);
    const retry = el("button", "retry", "Retry");
    retry.addEventListener("click", () => {
      if (card.choice) onChoice(card.choice);
    });
    note.appendChild(retry);
    container.appendChild(note);
  } else if (card.note) {
    container.appendChild(el("div", "note", card.note));
  }
}

export function renderCompletion(
  container: HTMLElement,
  answered: number,
  sameCount: number,
): void {
  container.replaceChildren();
  container.appendChild(el("h2", undefined, "All pairs answered"));
  container.appendChild(
    el(
      "p",
      "summary",
      `You answered ${answered} pairs and marked ${sameCount} of them ` +
        `to be treated the same.`,
    ),
  );
  const link = el("button", "nav", "View results");
  link.addEventListener("click", () => {
    const url = new URL(window.location.href);
    url.searchParams.set("view", "results");
    window.location.href = url.toString();
  });
  container.appendChild(link);
}

export function renderResults(
  container: HTMLElement,
  payload: ResultsPayload,
  judgeId: string,
): void {
  container.replaceChildren();
  container.appendChild(el("h2", undefined, "Error vs allowed disparity"));
  const chart = el("div", "chart");
  chart.innerHTML = renderCurveSvg(payload.rows);
  container.appendChild(chart);

  const counts = payload.judge_counts[judgeId];
  const constraintLine = counts
    ? `Judge ${judgeId}: ${counts.answered} pairs answered, ` +
      `${counts.same} treat-the-same constraints.`
    : `No responses recorded for judge ${judgeId}.`;
  container.appendChild(el("p", "summary", constraintLine));
}

export function renderMessage(container: HTMLElement, text: string): void {
  container.replaceChildren();
  container.appendChild(el("p", "message", text));
}
