/** Pair queue state machine: one card at a time, one submission in flight. */

import {
  ApiError,
  Judgment,
  PairPayload,
  SessionInfo,
} from "./api.js";

/** The slice of the service client the queue needs; tests fake this. */
export interface QueueApi {
  sessionInfo(sessionId: string): Promise<SessionInfo>;
  pairs(
    sessionId: string,
    judgeId: string,
    count: number,
  ): Promise<PairPayload[]>;
  submit(
    sessionId: string,
    judgment: Judgment,
  ): Promise<{ total_responses: number }>;
}

export type Choice = "same" | "different";
export type CardState = "unanswered" | "submitting" | "failed" | "submitted";

export interface Card {
  pair: PairPayload;
  state: CardState;
  choice: Choice | null;
  note: string;
}

export type SubmitOutcome =
  | { kind: "recorded" }
  | { kind: "already_answered" }
  | { kind: "network_error"; message: string }
  | { kind: "rejected"; status: number; message: string }
  | { kind: "ignored" };

/**
 * Holds the judge's assigned pairs and walks them in order. All state
 * lives here or on the service; reloading the page rebuilds the same
 * queue from the service's deterministic pair assignment, and pairs the
 * judge answered before the reload come back as conflicts that mark the
 * card answered and advance.
 */
export class SessionQueue {
  cards: Card[] = [];
  cursor = 0;
  private inFlight = false;

  constructor(
    private readonly api: QueueApi,
    readonly sessionId: string,
    readonly judgeId: string,
  ) {}

  async load(): Promise<void> {
    const info = await this.api.sessionInfo(this.sessionId);
    const pairs = await this.api.pairs(
      this.sessionId,
      this.judgeId,
      info.pairs_per_judge,
    );
    this.cards = pairs.map((pair) => ({
      pair,
      state: "unanswered" as CardState,
      choice: null,
      note: "",
    }));
    this.cursor = 0;
  }

  get total(): number {
    return this.cards.length;
  }

  get answered(): number {
    return this.cards.filter((c) => c.state === "submitted").length;
  }

  get sameCount(): number {
    return this.cards.filter(
      (c) => c.state === "submitted" && c.choice === "same",
    ).length;
  }

  isComplete(): boolean {
    return this.cards.length > 0 && this.cursor >= this.cards.length;
  }

  current(): Card | null {
    return this.isComplete() ? null : (this.cards[this.cursor] ?? null);
  }

  /**
   * Submit a choice for the current card. Clicks while a submission is
   * in flight or after the card is already submitted are ignored, so a
   * double click produces exactly one stored response. A 409 conflict
   * means the service already has this judge's answer for the pair
   * (e.g. the page was reloaded mid-session); the card is marked
   * answered and the queue advances. A network failure keeps the card
   * so the same choice can be retried; the service's duplicate
   * rejection makes the retry safe.
   */
  async answer(choice: Choice): Promise<SubmitOutcome> {
    const card = this.current();
    if (!card || this.inFlight || card.state === "submitted") {
      return { kind: "ignored" };
    }
    this.inFlight = true;
    card.state = "submitting";
    card.choice = choice;
    const judgment: Judgment = {
      judge_id: this.judgeId,
      i: card.pair.i,
      j: card.pair.j,
      same: choice === "same",
    };
    try {
      await this.api.submit(this.sessionId, judgment);
      card.state = "submitted";
      this.cursor += 1;
      return { kind: "recorded" };
    } catch (err) {
      if (err instanceof ApiError && err.status === 409) {
        card.state = "submitted";
        card.choice = null;
        card.note = "answered earlier";
        this.cursor += 1;
        return { kind: "already_answered" };
      }
      if (err instanceof ApiError) {
        card.state = "failed";
        card.note = err.message;
        return { kind: "rejected", status: err.status, message: err.message };
      }
      card.state = "failed";
      card.note = "could not reach the service";
      const message = err instanceof Error ? err.message : String(err);
      return { kind: "network_error", message };
    } finally {
      this.inFlight = false;
    }
  }
}
