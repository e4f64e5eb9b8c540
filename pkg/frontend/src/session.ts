// Session state machines for the two labeling modes. Views render from
// these; the machines own all server interaction so a network failure never
// loses a chosen label (the pending answer is kept and retried).

import { ApiClient, TaskEnvelope } from "./api";

export type SessionPhase = "loading" | "task" | "retry" | "complete";

export interface SessionSnapshot {
  phase: SessionPhase;
  task: TaskEnvelope | null;
  answered: number;
  error: string | null;
}

type Listener = (snapshot: SessionSnapshot) => void;

abstract class BaseSession {
  protected phase: SessionPhase = "loading";
  protected task: TaskEnvelope | null = null;
  protected answered = 0;
  protected error: string | null = null;
  protected pendingAnswer: string | null = null;
  private listeners: Listener[] = [];

  subscribe(listener: Listener): void {
    this.listeners.push(listener);
    listener(this.snapshot());
  }

  snapshot(): SessionSnapshot {
    return {
      phase: this.phase,
      task: this.task,
      answered: this.answered,
      error: this.error,
    };
  }

  protected emit(): void {
    const snapshot = this.snapshot();
    for (const listener of this.listeners) listener(snapshot);
  }

  protected abstract fetchNext(): Promise<TaskEnvelope | null>;
  protected abstract send(task: TaskEnvelope, answer: string): Promise<void>;

  async start(): Promise<void> {
    this.phase = "loading";
    this.emit();
    await this.advance();
  }

  protected async advance(): Promise<void> {
    try {
      const next = await this.fetchNext();
      this.task = next;
      this.phase = next === null ? "complete" : "task";
      this.error = null;
    } catch (err) {
      this.phase = "retry";
      this.error = String(err);
    }
    this.emit();
  }

  /** Submit an answer for the current task; on failure keep it for retry.
   * Ignored while a submission is already in flight (prevents a fast second
   * click or keypress from re-submitting the stale task). */
  async answer(value: string): Promise<void> {
    if (!this.task || this.phase !== "task") return;
    this.pendingAnswer = value;
    await this.flush();
  }

  /** Retry whatever failed: a pending submission, or the next-task fetch. */
  async retry(): Promise<void> {
    if (this.pendingAnswer !== null && this.task) {
      await this.flush();
    } else {
      await this.advance();
    }
  }

  private async flush(): Promise<void> {
    const task = this.task;
    const value = this.pendingAnswer;
    if (!task || value === null) return;
    this.phase = "loading";
    this.emit();
    try {
      await this.send(task, value);
      this.pendingAnswer = null;
      this.answered += 1;
      await this.advance();
    } catch (err) {
      this.phase = "retry";
      this.error = String(err);
      this.emit();
    }
  }

  get pending(): string | null {
    return this.pendingAnswer;
  }
}

export class AnnotationSession extends BaseSession {
  constructor(
    private readonly client: ApiClient,
    readonly roundId: string,
  ) {
    super();
  }

  protected fetchNext(): Promise<TaskEnvelope | null> {
    return this.client.nextTask(this.roundId);
  }

  protected async send(task: TaskEnvelope, answer: string): Promise<void> {
    await this.client.submitLabel(task.item_id, answer as "Y" | "N");
  }
}

export class AdjudicationSession extends BaseSession {
  constructor(private readonly client: ApiClient) {
    super();
  }

  protected fetchNext(): Promise<TaskEnvelope | null> {
    return this.client.nextAdjudication();
  }

  protected async send(task: TaskEnvelope, answer: string): Promise<void> {
    await this.client.submitAdjudication(task.item_id, answer as "job" | "notjob");
  }
}
