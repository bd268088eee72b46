/**
 * HTML renderers for the annotation workbench.
 *
 * Pure string producers: given server payloads and form state, return
 * markup. Keeping them DOM-free makes the output testable as text, which
 * is also how the blinding check audits what could reach a rater's
 * screen. app.ts owns the actual document.
 *
 * The task is one scrolling page: the post on top, then one section per
 * response in the order the server chose. Raters never see which system
 * wrote a response; payloads carry opaque response ids only.
 */

import type { ProgressT, TaskResponseT, TaskViewT } from "./api.js";
import type { ResponseForm, FieldProblem } from "./form.js";
import type { RubricSchemaT, SchemaEntryT } from "./rubric.js";
import { splitLevels } from "./rubric.js";

export function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;")
    .replace(/'/g, "&#39;");
}

/** Short what-to-judge hints shown under each criterion control. */
const HINTS: Record<string, string> = {
  explicitness: "How directly the response states its verdict on the post.",
  identification_existence:
    "Does it call out the genuinely inaccurate claims, or flag the wrong ones?",
  identification_comprehensiveness:
    "How completely it covers every inaccurate claim in the post.",
  explanation_accuracy: "Is the reasoning it gives for the verdict correct?",
  explanation_informativeness:
    "How much useful explanation it adds beyond a bare verdict.",
  text_relevance: "How much of the response is actually about this post.",
  text_factuality: "Are the response's own statements factually right?",
  text_fluency: "Grammar and wording quality.",
  text_coherence: "Does it read as one connected argument?",
  text_toxicity: "Hostile, mocking, or demeaning wording anywhere?",
  reachability: "Does the link load at all?",
  reference_relevance: "Is the page about the claim it is cited for?",
  reference_credibility: "How trustworthy is this publisher?",
  overall: "Your overall quality judgment of this response.",
};

export function labelFor(name: string): string {
  const words = name.split("_").join(" ");
  return words.charAt(0).toUpperCase() + words.slice(1);
}

function controlName(responseId: string, criterion: string, refUrl?: string): string {
  // Encodes the target so one delegated listener can route any change.
  const ref = refUrl === undefined ? "" : ` data-ref="${escapeHtml(refUrl)}"`;
  return `data-response="${escapeHtml(responseId)}" data-criterion="${escapeHtml(criterion)}"${ref}`;
}

function renderControl(
  name: string,
  entry: SchemaEntryT,
  current: unknown,
  target: string,
  disabled: boolean,
): string {
  const dis = disabled ? " disabled" : "";
  switch (entry.kind) {
    case "int_scale": {
      const value = typeof current === "number" ? ` value="${current}"` : "";
      return (
        `<input type="number" class="criterion" min="${entry.low}" max="${entry.high}"` +
        ` step="1" ${target}${value}${dis}>` +
        ` <span class="scale-note">${entry.low} to ${entry.high}</span>`
      );
    }
    case "categorical": {
      const options = entry.categories
        .map((c) => {
          const sel = current === c ? " selected" : "";
          return `<option value="${escapeHtml(c)}"${sel}>${escapeHtml(c)}</option>`;
        })
        .join("");
      return (
        `<select class="criterion" ${target}${dis}>` +
        `<option value="">choose</option>${options}</select>`
      );
    }
    case "boolean": {
      const yes = current === true ? " selected" : "";
      const no = current === false ? " selected" : "";
      return (
        `<select class="criterion" ${target}${dis}>` +
        `<option value="">choose</option>` +
        `<option value="true"${yes}>Yes</option>` +
        `<option value="false"${no}>No</option></select>`
      );
    }
  }
}

function renderCriterionRow(
  name: string,
  entry: SchemaEntryT,
  current: unknown,
  target: string,
  disabled: boolean,
): string {
  const hint = HINTS[name] ?? "";
  return (
    `<div class="criterion-row">` +
    `<label>${escapeHtml(labelFor(name))}</label>` +
    renderControl(name, entry, current, target, disabled) +
    (hint ? `<p class="hint">${escapeHtml(hint)}</p>` : "") +
    `</div>`
  );
}

function renderReference(
  schema: RubricSchemaT,
  perReference: string[],
  responseId: string,
  url: string,
  form: ResponseForm,
  disabled: boolean,
): string {
  const entry = form.referenceValues.get(url);
  const rows = perReference
    .map((name) =>
      renderCriterionRow(
        name,
        schema[name],
        entry?.get(name),
        controlName(responseId, name, url),
        disabled,
      ),
    )
    .join("");
  // New tab, no opener handle back into the workbench.
  return (
    `<li class="reference">` +
    `<a href="${escapeHtml(url)}" target="_blank" rel="noopener noreferrer">${escapeHtml(url)}</a>` +
    rows +
    `</li>`
  );
}

export function renderProblems(problems: FieldProblem[]): string {
  if (problems.length === 0) return "";
  const items = problems
    .map((p) => `<li>${escapeHtml(p.message)}</li>`)
    .join("");
  return `<ul class="problems">${items}</ul>`;
}

export function renderResponseSection(
  schema: RubricSchemaT,
  response: TaskResponseT,
  form: ResponseForm,
  index: number,
  problems: FieldProblem[] = [],
): string {
  const levels = splitLevels(schema);
  const locked = form.submitted;
  const badge = locked ? `<span class="badge">Submitted</span>` : "";
  const responseRows = levels.response
    .map((name) =>
      renderCriterionRow(
        name,
        schema[name],
        form.values.get(name),
        controlName(response.response_id, name),
        locked,
      ),
    )
    .join("");
  const references = response.references.length
    ? `<h4>References</h4><ul class="references">` +
      response.references
        .map((url) =>
          renderReference(schema, levels.perReference, response.response_id, url, form, locked),
        )
        .join("") +
      `</ul>`
    : `<p class="no-references">This response cites no references.</p>`;
  const dis = locked ? " disabled" : "";
  return (
    `<section class="response" data-section="${escapeHtml(response.response_id)}">` +
    `<h3>Response ${index + 1} ${badge}</h3>` +
    `<blockquote class="response-text">${escapeHtml(response.text)}</blockquote>` +
    references +
    `<h4>Your ratings</h4>` +
    responseRows +
    `<div class="criterion-row"><label>Explanation</label>` +
    `<textarea class="explanation" data-response="${escapeHtml(response.response_id)}"` +
    `${dis} rows="3" placeholder="Why did you rate it this way?">` +
    `${escapeHtml(form.explanation)}</textarea></div>` +
    renderProblems(problems) +
    `<button class="submit" data-submit="${escapeHtml(response.response_id)}"${dis}>` +
    (locked ? "Submitted" : "Submit ratings for this response") +
    `</button>` +
    `</section>`
  );
}

export function renderPost(post: TaskViewT["post"]): string {
  const text = typeof post.text === "string" ? post.text : "(post text unavailable)";
  const images = Array.isArray(post.images) ? post.images : [];
  const imgs = images
    .map((uri) => `<img class="post-image" src="${escapeHtml(uri)}" alt="post image">`)
    .join("");
  return (
    `<section class="post"><h2>Post under review</h2>` +
    `<blockquote class="post-text">${escapeHtml(text)}</blockquote>${imgs}</section>`
  );
}

export function renderProgress(progress: ProgressT): string {
  return (
    `<div class="progress">Task ${Math.min(progress.completed + 1, progress.assigned)}` +
    ` of ${progress.assigned} (${progress.completed} completed)</div>`
  );
}

export function renderTask(
  schema: RubricSchemaT,
  task: TaskViewT,
  progress: ProgressT,
  forms: Map<string, ResponseForm>,
  problems: Map<string, FieldProblem[]> = new Map(),
): string {
  const sections = task.responses
    .map((response, i) => {
      const form = forms.get(response.response_id);
      if (!form) throw new Error(`no form for ${response.response_id}`);
      return renderResponseSection(
        schema,
        response,
        form,
        i,
        problems.get(response.response_id) ?? [],
      );
    })
    .join("");
  return renderProgress(progress) + renderPost(task.post) + sections;
}

export function renderDone(progress: ProgressT): string {
  return (
    `<section class="done"><h2>All tasks complete</h2>` +
    `<p>You finished ${progress.completed} of ${progress.assigned} assigned tasks.` +
    ` Thank you.</p></section>`
  );
}

export function renderFatal(message: string): string {
  return `<section class="fatal"><h2>Something went wrong</h2>` +
    `<p>${escapeHtml(message)}</p></section>`;
}
