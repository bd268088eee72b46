/**
 * Typed client for the orchestrator's annotation endpoints.
 *
 * This is the only path between the browser and the study server; every
 * payload is structurally validated on arrival so a drifting server fails
 * loudly instead of rendering garbage. The client never requests the
 * operator-side export endpoint: unblinded data has no business in an
 * annotator's browser.
 */

import { z } from "zod";

import { RubricSchema, type RubricSchemaT } from "./rubric.js";

const TaskResponse = z.object({
  response_id: z.string().min(1),
  text: z.string(),
  references: z.array(z.string()),
  submitted: z.boolean(),
});

const TaskView = z.object({
  task_id: z.string().min(1),
  post: z.object({
    text: z.string().optional(),
    images: z.array(z.string()).optional(),
  }).passthrough(),
  phase: z.string(),
  responses: z.array(TaskResponse).min(1),
});

const Progress = z.object({
  annotator: z.string(),
  assigned: z.number().int().nonnegative(),
  completed: z.number().int().nonnegative(),
});

const SubmitAck = z.object({
  stored: z.literal(true),
  task_id: z.string(),
  response_id: z.string(),
  task_complete: z.boolean(),
});

export type TaskResponseT = z.infer<typeof TaskResponse>;
export type TaskViewT = z.infer<typeof TaskView>;
export type ProgressT = z.infer<typeof Progress>;
export type SubmitAckT = z.infer<typeof SubmitAck>;

export interface SubmitPayload {
  task_id: string;
  annotator_id: string;
  response_id: string;
  values: Record<string, number | string | boolean>;
  references: Record<string, number | string | boolean>[];
  explanation: string;
}

export class ApiError extends Error {
  constructor(message: string, readonly status: number) {
    super(message);
    this.name = new.target.name;
  }
}

/** All assigned tasks are complete. The happy end state, not a failure. */
export class NoTasksRemaining extends ApiError {}

/** The server knows no tasks for this annotator id. */
export class UnknownAnnotator extends ApiError {}

/** The server rejected submitted values (its own scale check). */
export class SubmissionRejected extends ApiError {}

/** This (task, annotator, response) was already submitted. */
export class DuplicateSubmission extends ApiError {}

/** Submitting against a task not assigned to this annotator. */
export class NotAssigned extends ApiError {}

/** The server answered, but not in the agreed shape. */
export class PayloadMismatch extends Error {
  constructor(endpoint: string, detail: string) {
    super(`unexpected payload from ${endpoint}: ${detail}`);
    this.name = "PayloadMismatch";
  }
}

type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

async function errorDetail(res: Response): Promise<string> {
  try {
    const body = await res.json();
    if (body && typeof body.detail === "string") return body.detail;
  } catch {
    // fall through to the status line
  }
  return `HTTP ${res.status}`;
}

export class AnnotationApi {
  constructor(
    private readonly baseUrl: string,
    private readonly fetchFn: FetchLike = (u, i) => fetch(u, i),
  ) {}

  private async getJson(path: string): Promise<unknown> {
    const res = await this.fetchFn(this.baseUrl + path);
    if (!res.ok) {
      const detail = await errorDetail(res);
      if (res.status === 404 && detail.includes("remaining")) {
        throw new NoTasksRemaining(detail, 404);
      }
      if (res.status === 404 && detail.includes("assigned")) {
        throw new UnknownAnnotator(detail, 404);
      }
      throw new ApiError(detail, res.status);
    }
    return res.json();
  }

  async schema(): Promise<RubricSchemaT> {
    const raw = await this.getJson("/annotation/schema");
    const parsed = RubricSchema.safeParse(raw);
    if (!parsed.success) {
      throw new PayloadMismatch("/annotation/schema", parsed.error.message);
    }
    return parsed.data;
  }

  async nextTask(annotator: string): Promise<TaskViewT> {
    const raw = await this.getJson(
      `/annotation/tasks/next?annotator=${encodeURIComponent(annotator)}`,
    );
    const parsed = TaskView.safeParse(raw);
    if (!parsed.success) {
      throw new PayloadMismatch("/annotation/tasks/next", parsed.error.message);
    }
    return parsed.data;
  }

  async progress(annotator: string): Promise<ProgressT> {
    const raw = await this.getJson(
      `/annotation/progress?annotator=${encodeURIComponent(annotator)}`,
    );
    const parsed = Progress.safeParse(raw);
    if (!parsed.success) {
      throw new PayloadMismatch("/annotation/progress", parsed.error.message);
    }
    return parsed.data;
  }

  async submit(payload: SubmitPayload): Promise<SubmitAckT> {
    const res = await this.fetchFn(this.baseUrl + "/annotation/submit", {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(payload),
    });
    if (!res.ok) {
      const detail = await errorDetail(res);
      switch (res.status) {
        case 409:
          throw new DuplicateSubmission(detail, 409);
        case 403:
          throw new NotAssigned(detail, 403);
        case 422:
          throw new SubmissionRejected(detail, 422);
        default:
          throw new ApiError(detail, res.status);
      }
    }
    const parsed = SubmitAck.safeParse(await res.json());
    if (!parsed.success) {
      throw new PayloadMismatch("/annotation/submit", parsed.error.message);
    }
    return parsed.data;
  }
}
