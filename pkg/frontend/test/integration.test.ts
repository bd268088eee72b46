/**
 * End-to-end checks against a live study server.
 *
 * A fixture script materializes a workspace (scripted world, one recorded
 * run, a dual-annotator study over two responses) and execs the real server
 * process with the workbench directory mounted at the root path. Everything
 * here goes over a real socket: the blinding sweep inspects the exact bytes
 * a browser would receive, and the stored annotations round-trip through
 * the command-line scorer at the end.
 */

import { execFile, spawn, type ChildProcess } from "node:child_process";
import { mkdtempSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join, resolve } from "node:path";
import { fileURLToPath } from "node:url";
import { promisify } from "node:util";
import { afterAll, beforeAll, describe, expect, it } from "vitest";

import {
  AnnotationApi,
  DuplicateSubmission,
  NoTasksRemaining,
  type SubmitPayload,
  type TaskViewT,
} from "../src/api.js";
import {
  buildSubmitPayload,
  newForm,
  setReferenceValue,
  setValue,
  validateForm,
  type ResponseForm,
} from "../src/form.js";
import { renderProgress, renderTask } from "../src/render.js";
import {
  SCHEMA_FIXTURE,
  completeReferenceValues,
  completeValues,
} from "./fixtures.js";

const run = promisify(execFile);
const FRONTEND = resolve(fileURLToPath(new URL(".", import.meta.url)), "..");

const APPROACH_LABELS = ["pipeline-full", "baseline-zero-shot"];
const FORBIDDEN = [...APPROACH_LABELS, "approach"];

let server: ChildProcess;
let base: string;
let storePath: string;

function expectBlinded(payload: string, label: string): void {
  for (const needle of FORBIDDEN) {
    expect(payload.toLowerCase(), `${label} leaks "${needle}"`).not.toContain(needle);
  }
}

function fillForm(
  form: ResponseForm,
  response: TaskViewT["responses"][number],
  overrides: Record<string, number | string | boolean> = {},
): void {
  for (const [name, value] of Object.entries({ ...completeValues(), ...overrides })) {
    setValue(form, name, value);
  }
  for (const url of response.references) {
    for (const [name, value] of Object.entries(completeReferenceValues())) {
      setReferenceValue(form, url, name, value);
    }
  }
  form.explanation = "Checked the claims against the cited coverage.";
}

async function waitForServer(url: string, timeoutMs: number): Promise<void> {
  const deadline = Date.now() + timeoutMs;
  let lastError = "";
  while (Date.now() < deadline) {
    try {
      const res = await fetch(url);
      if (res.ok) return;
      lastError = `HTTP ${res.status}`;
    } catch (err) {
      lastError = String(err);
    }
    await new Promise((r) => setTimeout(r, 250));
  }
  throw new Error(`server never came up at ${url}: ${lastError}`);
}

beforeAll(async () => {
  // The asset-serving checks need the compiled page modules.
  await run("npm", ["run", "build"], { cwd: FRONTEND });

  server = spawn("python3", [join(FRONTEND, "test", "serve_fixture.py")], {
    stdio: ["ignore", "pipe", "inherit"],
  });
  const settings = await new Promise<Record<string, string>>((resolvePromise, reject) => {
    let buffered = "";
    server.stdout!.on("data", (chunk: Buffer) => {
      buffered += chunk.toString();
      const found: Record<string, string> = {};
      for (const line of buffered.split("\n")) {
        const m = line.match(/^(PORT|STORE|WORKSPACE) (.+)$/);
        if (m) found[m[1]] = m[2];
      }
      if (found.PORT && found.STORE && found.WORKSPACE) resolvePromise(found);
    });
    server.on("exit", (code) => reject(new Error(`fixture exited early (${code})`)));
  });
  base = `http://127.0.0.1:${settings.PORT}`;
  storePath = settings.STORE;
  await waitForServer(`${base}/annotation/schema`, 90_000);
}, 180_000);

afterAll(() => {
  server?.kill();
});

describe("served workbench assets", () => {
  it("serves the page, its modules, and the validator package at the root path", async () => {
    const page = await fetch(`${base}/`);
    expect(page.status).toBe(200);
    const html = await page.text();
    expect(html).toContain('id="app"');
    expect(html).toContain("importmap");

    expect((await fetch(`${base}/dist/app.js`)).status).toBe(200);
    expect((await fetch(`${base}/node_modules/zod/index.js`)).status).toBe(200);
  });

  it("keeps API routes ahead of the static mount", async () => {
    const res = await fetch(`${base}/annotation/schema`);
    expect(res.headers.get("content-type")).toContain("application/json");
  });
});

describe("live study lifecycle", () => {
  const api = () => new AnnotationApi(base);

  it("serves exactly the rubric the client was built against", async () => {
    expect(await api().schema()).toEqual(SCHEMA_FIXTURE);
  });

  it("keeps every annotator-facing payload blinded, raw and rendered", async () => {
    for (const annotator of ["ann-1", "ann-2"]) {
      const paths = [
        "/annotation/schema",
        `/annotation/tasks/next?annotator=${annotator}`,
        `/annotation/progress?annotator=${annotator}`,
      ];
      for (const path of paths) {
        const res = await fetch(`${base}${path}`);
        expect(res.status).toBe(200);
        expectBlinded(await res.text(), `${annotator} ${path}`);
      }

      // What the browser would actually paint from those payloads.
      const client = api();
      const schema = await client.schema();
      const task = await client.nextTask(annotator);
      const progress = await client.progress(annotator);
      const forms = new Map(
        task.responses.map((r) => [r.response_id, newForm(r.response_id, r.references)]),
      );
      expectBlinded(renderTask(schema, task, progress, forms), `${annotator} rendered page`);
      expectBlinded(renderProgress(progress), `${annotator} rendered progress`);
    }
  });

  it("serves the same task in the same response order on refetch", async () => {
    const first = await api().nextTask("ann-1");
    const second = await api().nextTask("ann-1");
    expect(second).toEqual(first);
    expect(first.responses.map((r) => r.response_id).sort()).toEqual(["resp-a", "resp-b"]);
  });

  it("blocks an out-of-scale value client-side before any request is made", async () => {
    const client = api();
    const schema = await client.schema();
    const task = await client.nextTask("ann-1");
    const response = task.responses[0];
    const form = newForm(response.response_id, response.references);
    fillForm(form, response, { overall: 11 });

    const problems = validateForm(schema, form);
    expect(problems.some((p) => p.message.includes("overall"))).toBe(true);
    expect(() => buildSubmitPayload(task.task_id, "ann-1", schema, form)).toThrow(
      /form incomplete/,
    );
  });

  it("rejects the same out-of-scale value server-side when the client is bypassed", async () => {
    const task = await api().nextTask("ann-1");
    const response = task.responses[0];
    const payload: SubmitPayload = {
      task_id: task.task_id,
      annotator_id: "ann-1",
      response_id: response.response_id,
      values: { ...completeValues(), overall: 11 },
      references: response.references.map((url) => ({ url, ...completeReferenceValues() })),
      explanation: "raw client bypassing form validation",
    };
    const res = await fetch(`${base}/annotation/submit`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(payload),
    });
    expect(res.status).toBe(422);
    const body = await res.json();
    expect(String(body.detail)).toContain("overall");
  });

  it("rejects a submission from an annotator the task is not assigned to", async () => {
    const client = api();
    const schema = await client.schema();
    const task = await client.nextTask("ann-1");
    const response = task.responses[0];
    const form = newForm(response.response_id, response.references);
    fillForm(form, response);
    const payload = buildSubmitPayload(task.task_id, "ann-intruder", schema, form);
    await expect(client.submit(payload)).rejects.toMatchObject({ status: 403 });
  });

  it("round-trips both annotators through the form layer into the store", async () => {
    const client = api();
    const schema = await client.schema();
    const perAnnotator: Record<string, Record<string, number | string | boolean>> = {
      "ann-1": {},
      "ann-2": { overall: 6, explanation_accuracy: 3 },
    };
    let firstPayload: SubmitPayload | undefined;

    for (const [annotator, overrides] of Object.entries(perAnnotator)) {
      const task = await client.nextTask(annotator);
      for (const [index, response] of task.responses.entries()) {
        const form = newForm(response.response_id, response.references);
        fillForm(form, response, overrides);
        expect(validateForm(schema, form)).toEqual([]);
        const payload = buildSubmitPayload(task.task_id, annotator, schema, form);
        firstPayload = firstPayload ?? payload;
        const ack = await client.submit(payload);
        expect(ack.stored).toBe(true);
        expect(ack.task_complete).toBe(index === task.responses.length - 1);
      }
      const progress = await client.progress(annotator);
      expect(progress).toEqual({ annotator, assigned: 1, completed: 1 });
      await expect(client.nextTask(annotator)).rejects.toBeInstanceOf(NoTasksRemaining);
    }

    await expect(client.submit(firstPayload!)).rejects.toBeInstanceOf(DuplicateSubmission);
  });

  it("exports records the command-line scorer loads, blends, and unblinds", async () => {
    const exported = await (await fetch(`${base}/annotation/export`)).text();
    const rows = exported.trim().split("\n").map((line) => JSON.parse(line));
    expect(rows).toHaveLength(4); // 2 annotators x 2 responses
    expect(new Set(rows.map((r) => r.metadata.approach))).toEqual(new Set(APPROACH_LABELS));

    const dir = mkdtempSync(join(tmpdir(), "annotation-export-"));
    const file = join(dir, "annotations.jsonl");
    writeFileSync(file, exported);

    const { stdout } = await run("factweave", ["evaluate", file]);
    const scores = JSON.parse(stdout);
    expect(scores).toHaveLength(2);
    for (const score of scores) {
      // 8 and 6 at half weight each; 5 and 3 likewise.
      expect(score.values.overall).toBe(7);
      expect(score.values.explanation_accuracy).toBe(4);
    }
    const byResponse = Object.fromEntries(scores.map((s: any) => [s.response_id, s]));
    expect(byResponse["resp-a"].metadata.approach).toBe("pipeline-full");
    expect(byResponse["resp-b"].metadata.approach).toBe("baseline-zero-shot");
  });
});
