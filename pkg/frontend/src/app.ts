/**
 * Browser shell: wires the API client, form state, and renderers to the
 * document. State updates happen silently on input; the page re-renders
 * only on submit outcomes, so typing never loses focus.
 */

import {
  AnnotationApi,
  DuplicateSubmission,
  NoTasksRemaining,
  SubmissionRejected,
  type ProgressT,
  type TaskViewT,
} from "./api.js";
import {
  buildSubmitPayload,
  newForm,
  setReferenceValue,
  setValue,
  validateForm,
  type FieldProblem,
  type ResponseForm,
} from "./form.js";
import { coerceInput, type RubricSchemaT } from "./rubric.js";
import { renderDone, renderFatal, renderTask } from "./render.js";

interface AppState {
  schema: RubricSchemaT;
  task: TaskViewT | null;
  progress: ProgressT;
  forms: Map<string, ResponseForm>;
  problems: Map<string, FieldProblem[]>;
}

export async function bootstrap(
  root: HTMLElement,
  api: AnnotationApi,
  annotatorId: string,
): Promise<void> {
  let state: AppState;
  try {
    const schema = await api.schema();
    state = {
      schema,
      task: null,
      progress: { annotator: annotatorId, assigned: 0, completed: 0 },
      forms: new Map(),
      problems: new Map(),
    };
  } catch (err) {
    root.innerHTML = renderFatal(String(err));
    return;
  }

  const draw = () => {
    if (state.task === null) {
      root.innerHTML = renderDone(state.progress);
      return;
    }
    root.innerHTML = renderTask(
      state.schema,
      state.task,
      state.progress,
      state.forms,
      state.problems,
    );
  };

  const loadTask = async () => {
    state.progress = await api.progress(annotatorId);
    try {
      state.task = await api.nextTask(annotatorId);
    } catch (err) {
      if (err instanceof NoTasksRemaining) {
        state.task = null;
        draw();
        return;
      }
      throw err;
    }
    state.forms = new Map(
      state.task.responses.map((r) => {
        const form = newForm(r.response_id, r.references);
        form.submitted = r.submitted;
        return [r.response_id, form];
      }),
    );
    state.problems = new Map();
    draw();
  };

  root.addEventListener("change", (event) => {
    const el = event.target as HTMLElement;
    if (!el.classList?.contains("criterion")) return;
    const responseId = el.getAttribute("data-response");
    const criterion = el.getAttribute("data-criterion");
    if (!responseId || !criterion) return;
    const form = state.forms.get(responseId);
    const entry = state.schema[criterion];
    if (!form || !entry || form.submitted) return;
    const raw = (el as HTMLInputElement | HTMLSelectElement).value;
    const value = coerceInput(entry, raw);
    const refUrl = el.getAttribute("data-ref");
    if (refUrl !== null) setReferenceValue(form, refUrl, criterion, value);
    else setValue(form, criterion, value);
  });

  root.addEventListener("input", (event) => {
    const el = event.target as HTMLElement;
    if (!el.classList?.contains("explanation")) return;
    const responseId = el.getAttribute("data-response");
    const form = responseId ? state.forms.get(responseId) : undefined;
    if (form && !form.submitted) {
      form.explanation = (el as HTMLTextAreaElement).value;
    }
  });

  root.addEventListener("click", (event) => {
    const el = event.target as HTMLElement;
    const responseId = el.getAttribute?.("data-submit");
    if (!responseId || state.task === null) return;
    const form = state.forms.get(responseId);
    if (!form || form.submitted) return;

    const problems = validateForm(state.schema, form);
    if (problems.length > 0) {
      state.problems.set(responseId, problems);
      draw();
      return;
    }
    const payload = buildSubmitPayload(
      state.task.task_id,
      annotatorId,
      state.schema,
      form,
    );
    void api
      .submit(payload)
      .then(async (ack) => {
        form.submitted = true;
        state.problems.delete(responseId);
        if (ack.task_complete) {
          await loadTask();
        } else {
          draw();
        }
      })
      .catch(async (err) => {
        if (err instanceof DuplicateSubmission) {
          // Already stored server-side (a retry raced); treat as done.
          form.submitted = true;
          await loadTask();
          return;
        }
        if (err instanceof SubmissionRejected) {
          state.problems.set(responseId, [
            { where: "values", message: `server rejected: ${err.message}` },
          ]);
          draw();
          return;
        }
        root.innerHTML = renderFatal(String(err));
      });
  });

  await loadTask();
}

/** Entry point for the static page; test code calls bootstrap directly. */
export function start(): void {
  const root = document.getElementById("app");
  if (!root) throw new Error("missing #app element");
  const annotator = new URLSearchParams(window.location.search).get("annotator");
  if (!annotator) {
    root.innerHTML = renderFatal(
      "open this page with ?annotator=<your id> in the address",
    );
    return;
  }
  void bootstrap(root, new AnnotationApi(""), annotator);
}
