import { Api } from "./api.js";
import { AnnotationFormState, emptyForm, toPayload } from "./form.js";
import { CategoryDescriptor, SentencePayload } from "./types.js";

export type SessionView = "annotating" | "complete";

const BATCH_SIZE = 50;

/** One annotator's pass through a round: a queue of assigned sentences,
 * one form per screen, optimistic submission with the server as the
 * source of truth (a duplicate tap surfaces as the service's 409). */
export class AnnotationSession {
  view: SessionView = "annotating";
  form: AnnotationFormState | null = null;
  categories: CategoryDescriptor[] = [];
  submitted = 0; // personal tally for the completion screen
  private queue: SentencePayload[] = [];
  private index = 0;

  constructor(
    private readonly api: Api,
    readonly roundId: string,
    readonly annotatorId: string,
  ) {}

  async start(): Promise<void> {
    await this.refill();
    this.advance();
  }

  current(): SentencePayload | null {
    return this.form?.sentence ?? null;
  }

  /** Neighboring sentences of the same review (position ±1) from the
   * current batch, shown greyed out as reading context. */
  neighbors(): SentencePayload[] {
    const sentence = this.current();
    if (sentence === null) {
      return [];
    }
    return this.queue.filter(
      (s) =>
        s.review_id === sentence.review_id &&
        Math.abs(s.position - sentence.position) === 1,
    );
  }

  /** POST the current form. 201 advances to the next queued sentence;
   * 409/422 keep every entry and surface the error inline. */
  async submitAndAdvance(): Promise<void> {
    if (this.form === null) {
      return;
    }
    this.form = { ...this.form, status: "submitting", error: null };
    const result = await this.api.submitAnnotation(
      this.roundId,
      toPayload(this.form, this.annotatorId),
    );
    if (result.status === 201) {
      this.submitted += 1;
      if (this.index >= this.queue.length) {
        await this.refill();
      }
      this.advance();
      return;
    }
    this.form = {
      ...this.form,
      status: "error",
      error: result.detail ?? `submission failed (${result.status})`,
    };
  }

  private async refill(): Promise<void> {
    const payload = await this.api.getAssignments(
      this.roundId,
      this.annotatorId,
      BATCH_SIZE,
    );
    this.queue = payload.sentences;
    this.categories = payload.categories;
    this.index = 0;
  }

  private advance(): void {
    if (this.index >= this.queue.length) {
      this.view = "complete";
      this.form = null;
      return;
    }
    this.form = emptyForm(this.queue[this.index], this.categories);
    this.index += 1;
  }
}
