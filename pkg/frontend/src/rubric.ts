/**
 * Rubric schema handling, shared by the form and the API boundary.
 *
 * The scoring form is data-driven: the server's /annotation/schema payload
 * defines every criterion, its scale, and whether it is answered once per
 * response or once per cited reference. Nothing here hard-codes criterion
 * names; the zod schema only pins the payload structure.
 */

import { z } from "zod";

const IntScaleEntry = z.object({
  kind: z.literal("int_scale"),
  per_reference: z.boolean(),
  low: z.number().int(),
  high: z.number().int(),
});

const CategoricalEntry = z.object({
  kind: z.literal("categorical"),
  per_reference: z.boolean(),
  categories: z.array(z.string()).min(2),
});

const BooleanEntry = z.object({
  kind: z.literal("boolean"),
  per_reference: z.boolean(),
});

export const SchemaEntry = z.discriminatedUnion("kind", [
  IntScaleEntry,
  CategoricalEntry,
  BooleanEntry,
]);

export const RubricSchema = z.record(z.string().min(1), SchemaEntry);

export type SchemaEntryT = z.infer<typeof SchemaEntry>;
export type RubricSchemaT = z.infer<typeof RubricSchema>;

/** A criterion answer as it travels to the server. */
export type CriterionValue = number | string | boolean;

export interface RubricLevels {
  /** Criteria answered once per response, in payload order, overall last. */
  response: string[];
  /** Criteria answered once per cited reference, in payload order. */
  perReference: string[];
}

export function splitLevels(schema: RubricSchemaT): RubricLevels {
  const response: string[] = [];
  const perReference: string[] = [];
  for (const [name, entry] of Object.entries(schema)) {
    (entry.per_reference ? perReference : response).push(name);
  }
  return { response, perReference };
}

/**
 * Validate one value against its criterion entry.
 * Returns a human-readable problem, or null when the value is in scale.
 * Mirrors the server's rules: integers only on int scales (booleans are
 * not integers here), categories matched case-sensitively.
 */
export function checkValue(
  name: string,
  entry: SchemaEntryT,
  value: CriterionValue | undefined,
): string | null {
  if (value === undefined || value === null || value === "") {
    return `${name}: required`;
  }
  switch (entry.kind) {
    case "int_scale": {
      if (typeof value !== "number" || !Number.isInteger(value)) {
        return `${name}: must be a whole number`;
      }
      if (value < entry.low || value > entry.high) {
        return `${name}: must be between ${entry.low} and ${entry.high}`;
      }
      return null;
    }
    case "categorical": {
      if (typeof value !== "string" || !entry.categories.includes(value)) {
        return `${name}: must be one of ${entry.categories.join(", ")}`;
      }
      return null;
    }
    case "boolean": {
      if (typeof value !== "boolean") {
        return `${name}: must be yes or no`;
      }
      return null;
    }
  }
}

/**
 * Parse a raw input-element string into the criterion's value type.
 * Returns undefined for blank input and for non-numeric text on int
 * scales; out-of-range numbers pass through so checkValue can name the
 * allowed bounds instead of the value silently vanishing.
 */
export function coerceInput(
  entry: SchemaEntryT,
  raw: string,
): CriterionValue | undefined {
  if (raw === "") return undefined;
  switch (entry.kind) {
    case "int_scale": {
      const n = Number(raw);
      return Number.isFinite(n) ? n : undefined;
    }
    case "categorical":
      return raw;
    case "boolean":
      return raw === "true" ? true : raw === "false" ? false : undefined;
  }
}
