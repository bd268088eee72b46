import { describe, expect, it } from "vitest";

import {
  RubricSchema,
  checkValue,
  coerceInput,
  splitLevels,
} from "../src/rubric.js";
import { SCHEMA_FIXTURE } from "./fixtures.js";

describe("schema payload parsing", () => {
  it("accepts the server schema", () => {
    const parsed = RubricSchema.safeParse(SCHEMA_FIXTURE);
    expect(parsed.success).toBe(true);
  });

  it("rejects an entry with an unknown kind", () => {
    const parsed = RubricSchema.safeParse({
      weird: { kind: "float_scale", per_reference: false },
    });
    expect(parsed.success).toBe(false);
  });

  it("rejects an int scale without bounds", () => {
    const parsed = RubricSchema.safeParse({
      x: { kind: "int_scale", per_reference: false },
    });
    expect(parsed.success).toBe(false);
  });

  it("rejects a categorical with fewer than two categories", () => {
    const parsed = RubricSchema.safeParse({
      x: { kind: "categorical", per_reference: false, categories: ["only"] },
    });
    expect(parsed.success).toBe(false);
  });
});

describe("level split", () => {
  it("separates per-reference criteria from response-level ones", () => {
    const levels = splitLevels(SCHEMA_FIXTURE);
    expect(levels.perReference).toEqual([
      "reachability",
      "reference_relevance",
      "reference_credibility",
    ]);
    expect(levels.response).toHaveLength(11);
    expect(levels.response).toContain("overall");
    expect(levels.response).toContain("text_toxicity");
  });
});

describe("value checking", () => {
  const overall = SCHEMA_FIXTURE.overall;
  const fluency = SCHEMA_FIXTURE.text_fluency;
  const toxicity = SCHEMA_FIXTURE.text_toxicity;

  it("accepts in-scale values", () => {
    expect(checkValue("overall", overall, 0)).toBeNull();
    expect(checkValue("overall", overall, 10)).toBeNull();
    expect(checkValue("text_fluency", fluency, "High")).toBeNull();
    expect(checkValue("text_toxicity", toxicity, false)).toBeNull();
  });

  it("rejects out-of-range integers at both ends", () => {
    expect(checkValue("overall", overall, 11)).toMatch(/between 0 and 10/);
    expect(checkValue("overall", overall, -1)).toMatch(/between 0 and 10/);
  });

  it("rejects non-integers and booleans on int scales", () => {
    expect(checkValue("overall", overall, 7.5)).toMatch(/whole number/);
    expect(checkValue("overall", overall, true)).toMatch(/whole number/);
  });

  it("matches categories case-sensitively", () => {
    expect(checkValue("text_fluency", fluency, "high")).toMatch(/one of/);
    expect(checkValue("text_fluency", fluency, "Excellent")).toMatch(/one of/);
  });

  it("requires real booleans, not strings", () => {
    expect(checkValue("text_toxicity", toxicity, "false")).toMatch(/yes or no/);
  });

  it("flags missing answers", () => {
    expect(checkValue("overall", overall, undefined)).toMatch(/required/);
    expect(checkValue("text_fluency", fluency, "")).toMatch(/required/);
  });
});

describe("input coercion", () => {
  it("parses number inputs, keeping out-of-range values for checkValue", () => {
    expect(coerceInput(SCHEMA_FIXTURE.overall, "7")).toBe(7);
    expect(coerceInput(SCHEMA_FIXTURE.overall, "11")).toBe(11);
    expect(coerceInput(SCHEMA_FIXTURE.overall, "abc")).toBeUndefined();
    expect(coerceInput(SCHEMA_FIXTURE.overall, "")).toBeUndefined();
  });

  it("maps select values for booleans", () => {
    expect(coerceInput(SCHEMA_FIXTURE.text_toxicity, "true")).toBe(true);
    expect(coerceInput(SCHEMA_FIXTURE.text_toxicity, "false")).toBe(false);
    expect(coerceInput(SCHEMA_FIXTURE.text_toxicity, "")).toBeUndefined();
  });

  it("passes categorical strings through", () => {
    expect(coerceInput(SCHEMA_FIXTURE.text_fluency, "High")).toBe("High");
  });
});
