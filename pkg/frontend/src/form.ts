/**
 * Per-response form state and completeness rules.
 *
 * A response section is submittable only when every response-level
 * criterion and the overall score are answered in scale, every listed
 * reference has every per-reference criterion answered, and the free-text
 * explanation is nonempty. The same checks run again on the server; the
 * client ones exist so a rater sees the problem next to the field instead
 * of a rejected request.
 */

import type { SubmitPayload } from "./api.js";
import {
  checkValue,
  splitLevels,
  type CriterionValue,
  type RubricSchemaT,
} from "./rubric.js";

export interface ResponseForm {
  responseId: string;
  /** Response-level criterion name -> value (overall included). */
  values: Map<string, CriterionValue>;
  /** Reference url -> (per-reference criterion name -> value). */
  referenceValues: Map<string, Map<string, CriterionValue>>;
  explanation: string;
  /** Locked once the server acknowledged the submission. */
  submitted: boolean;
}

export interface FieldProblem {
  /** "values", "explanation", or the reference url the problem is on. */
  where: string;
  message: string;
}

export function newForm(responseId: string, references: string[]): ResponseForm {
  return {
    responseId,
    values: new Map(),
    referenceValues: new Map(references.map((url) => [url, new Map()])),
    explanation: "",
    submitted: false,
  };
}

export function setValue(form: ResponseForm, name: string, value: CriterionValue | undefined): void {
  if (value === undefined) form.values.delete(name);
  else form.values.set(name, value);
}

export function setReferenceValue(
  form: ResponseForm,
  url: string,
  name: string,
  value: CriterionValue | undefined,
): void {
  const entry = form.referenceValues.get(url);
  if (!entry) throw new Error(`form has no reference ${url}`);
  if (value === undefined) entry.delete(name);
  else entry.set(name, value);
}

/** Every problem keeping this form from submission; empty means ready. */
export function validateForm(schema: RubricSchemaT, form: ResponseForm): FieldProblem[] {
  const problems: FieldProblem[] = [];
  const levels = splitLevels(schema);

  for (const name of levels.response) {
    const problem = checkValue(name, schema[name], form.values.get(name));
    if (problem) problems.push({ where: "values", message: problem });
  }
  for (const [url, entry] of form.referenceValues) {
    for (const name of levels.perReference) {
      const problem = checkValue(name, schema[name], entry.get(name));
      if (problem) problems.push({ where: url, message: problem });
    }
  }
  if (!form.explanation.trim()) {
    problems.push({ where: "explanation", message: "explanation: required" });
  }
  return problems;
}

/**
 * The wire payload for a validated form. Call validateForm first; this
 * throws on an incomplete form rather than sending a half-filled record.
 */
export function buildSubmitPayload(
  taskId: string,
  annotatorId: string,
  schema: RubricSchemaT,
  form: ResponseForm,
): SubmitPayload {
  const problems = validateForm(schema, form);
  if (problems.length > 0) {
    throw new Error(`form incomplete: ${problems[0].message}`);
  }
  const references = [...form.referenceValues.entries()].map(([url, entry]) => ({
    url,
    ...Object.fromEntries(entry),
  }));
  return {
    task_id: taskId,
    annotator_id: annotatorId,
    response_id: form.responseId,
    values: Object.fromEntries(form.values),
    references,
    explanation: form.explanation,
  };
}
