/**
 * Frozen copies of server payloads for the unit suites.
 *
 * SCHEMA_FIXTURE mirrors /annotation/schema byte for byte; the
 * integration suite asserts the live server still serves exactly this,
 * so the unit tests and the wire cannot drift apart silently.
 */

import type { TaskViewT } from "../src/api.js";
import type { RubricSchemaT } from "../src/rubric.js";

export const SCHEMA_FIXTURE: RubricSchemaT = {
  explicitness: {
    kind: "categorical",
    per_reference: false,
    categories: ["Unclear", "Implicit", "Explicit"],
  },
  identification_existence: {
    kind: "categorical",
    per_reference: false,
    categories: ["NoCorrect", "CorrectWithMistakes", "CorrectOnly"],
  },
  identification_comprehensiveness: {
    kind: "int_scale",
    per_reference: false,
    low: 1,
    high: 5,
  },
  explanation_accuracy: { kind: "int_scale", per_reference: false, low: 1, high: 5 },
  explanation_informativeness: {
    kind: "int_scale",
    per_reference: false,
    low: 0,
    high: 10,
  },
  text_relevance: { kind: "int_scale", per_reference: false, low: 0, high: 10 },
  text_factuality: { kind: "int_scale", per_reference: false, low: 1, high: 5 },
  text_fluency: {
    kind: "categorical",
    per_reference: false,
    categories: ["Low", "Medium", "High"],
  },
  text_coherence: {
    kind: "categorical",
    per_reference: false,
    categories: ["Barely", "Partially", "Fully"],
  },
  text_toxicity: { kind: "boolean", per_reference: false },
  reachability: { kind: "boolean", per_reference: true },
  reference_relevance: { kind: "boolean", per_reference: true },
  reference_credibility: {
    kind: "categorical",
    per_reference: true,
    categories: ["Low", "Medium", "High", "VeryHigh"],
  },
  overall: { kind: "int_scale", per_reference: false, low: 0, high: 10 },
};

export const TASK_FIXTURE: TaskViewT = {
  task_id: "task-1",
  post: {
    id: "post-00",
    text: "Sharks don't get cancer & Big Pharma <knows>!",
    images: [],
  },
  phase: "main",
  responses: [
    {
      response_id: "resp-b",
      text: "This tweet is false. Sharks do get cancer; see the studies below.",
      references: ["https://factcheck.example/articles/0", "https://science.example/study/0"],
      submitted: false,
    },
    {
      response_id: "resp-a",
      text: "This tweet is accurate.",
      references: [],
      submitted: false,
    },
  ],
};

/** Every answer filled in scale, ready to submit. */
export function completeValues(): Record<string, number | string | boolean> {
  return {
    explicitness: "Explicit",
    identification_existence: "CorrectOnly",
    identification_comprehensiveness: 4,
    explanation_accuracy: 5,
    explanation_informativeness: 7,
    text_relevance: 9,
    text_factuality: 5,
    text_fluency: "High",
    text_coherence: "Fully",
    text_toxicity: false,
    overall: 8,
  };
}

export function completeReferenceValues(): Record<string, number | string | boolean> {
  return {
    reachability: true,
    reference_relevance: true,
    reference_credibility: "High",
  };
}
