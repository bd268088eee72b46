import { describe, expect, it } from "vitest";

import {
  AnnotationApi,
  ApiError,
  DuplicateSubmission,
  NoTasksRemaining,
  NotAssigned,
  PayloadMismatch,
  SubmissionRejected,
  UnknownAnnotator,
} from "../src/api.js";
import { SCHEMA_FIXTURE, TASK_FIXTURE, completeValues } from "./fixtures.js";

type Canned = { status: number; body: unknown };

function apiWith(routes: Record<string, Canned>) {
  const calls: { url: string; init?: RequestInit }[] = [];
  const fetchFn = async (url: string, init?: RequestInit): Promise<Response> => {
    calls.push({ url, init });
    const hit = Object.entries(routes).find(([prefix]) => url.startsWith(prefix));
    if (!hit) throw new Error(`unrouted request: ${url}`);
    const { status, body } = hit[1];
    return new Response(JSON.stringify(body), {
      status,
      headers: { "content-type": "application/json" },
    });
  };
  return { api: new AnnotationApi("", fetchFn), calls };
}

const SUBMIT = {
  task_id: "task-1",
  annotator_id: "ann-1",
  response_id: "resp-b",
  values: completeValues(),
  references: [],
  explanation: "fine",
};

describe("happy paths", () => {
  it("parses the schema", async () => {
    const { api } = apiWith({ "/annotation/schema": { status: 200, body: SCHEMA_FIXTURE } });
    expect(await api.schema()).toEqual(SCHEMA_FIXTURE);
  });

  it("parses the next task and url-encodes the annotator", async () => {
    const { api, calls } = apiWith({
      "/annotation/tasks/next": { status: 200, body: TASK_FIXTURE },
    });
    expect(await api.nextTask("ann/1 x")).toEqual(TASK_FIXTURE);
    expect(calls[0].url).toContain("annotator=ann%2F1%20x");
  });

  it("parses progress", async () => {
    const body = { annotator: "ann-1", assigned: 2, completed: 0 };
    const { api } = apiWith({ "/annotation/progress": { status: 200, body } });
    expect(await api.progress("ann-1")).toEqual(body);
  });

  it("submits as JSON and parses the acknowledgment", async () => {
    const ack = { stored: true, task_id: "task-1", response_id: "resp-b", task_complete: false };
    const { api, calls } = apiWith({ "/annotation/submit": { status: 200, body: ack } });
    expect(await api.submit(SUBMIT)).toEqual(ack);
    expect(calls[0].init?.method).toBe("POST");
    expect(JSON.parse(String(calls[0].init?.body))).toEqual(SUBMIT);
  });
});

describe("error mapping", () => {
  it("distinguishes no-tasks-remaining from unknown annotator on 404", async () => {
    const done = apiWith({
      "/annotation/tasks/next": { status: 404, body: { detail: "no tasks remaining" } },
    });
    await expect(done.api.nextTask("ann-1")).rejects.toBeInstanceOf(NoTasksRemaining);

    const unknown = apiWith({
      "/annotation/tasks/next": {
        status: 404,
        body: { detail: "no tasks assigned to annotator" },
      },
    });
    await expect(unknown.api.nextTask("nobody")).rejects.toBeInstanceOf(UnknownAnnotator);
  });

  it("maps submit rejections to typed errors", async () => {
    const rejected = apiWith({
      "/annotation/submit": { status: 422, body: { detail: "overall out of range" } },
    });
    await expect(rejected.api.submit(SUBMIT)).rejects.toBeInstanceOf(SubmissionRejected);
    await expect(rejected.api.submit(SUBMIT)).rejects.toThrow(/overall out of range/);

    const dup = apiWith({
      "/annotation/submit": { status: 409, body: { detail: "duplicate" } },
    });
    await expect(dup.api.submit(SUBMIT)).rejects.toBeInstanceOf(DuplicateSubmission);

    const forbidden = apiWith({
      "/annotation/submit": { status: 403, body: { detail: "not yours" } },
    });
    await expect(forbidden.api.submit(SUBMIT)).rejects.toBeInstanceOf(NotAssigned);
  });

  it("keeps the status code on generic failures", async () => {
    const { api } = apiWith({
      "/annotation/schema": { status: 500, body: { detail: "boom" } },
    });
    const err = await api.schema().catch((e: unknown) => e);
    expect(err).toBeInstanceOf(ApiError);
    expect((err as ApiError).status).toBe(500);
  });

  it("rejects structurally wrong payloads instead of rendering them", async () => {
    const { api } = apiWith({
      "/annotation/tasks/next": {
        status: 200,
        body: { task_id: "t", responses: "not-a-list" },
      },
    });
    await expect(api.nextTask("ann-1")).rejects.toBeInstanceOf(PayloadMismatch);
  });
});
