/**
 * Length formatting. The service works in integer tenths of a millimetre;
 * operators think in millimetres, so every int is shown both ways.
 */

import type { Value } from "./api.js";

/** Millimetre rendering of a raw tenth-of-mm integer: 2970 -> "297.0". */
export function mm(raw: number): string {
  return (raw / 10).toFixed(1);
}

/** Dual display: 8 -> "8 (0.8 mm)". */
export function withMm(raw: number): string {
  return `${raw} (${mm(raw)} mm)`;
}

/** Display a leaf value of known sort. Bools have no unit. */
export function displayValue(value: Value, sort: "int" | "bool"): string {
  if (sort === "bool") {
    return value ? "true" : "false";
  }
  return withMm(value as number);
}

/**
 * Popup text for a hover query. `null` means the service could not
 * determine a value (nothing solved yet, or the leaf is not in the
 * remembered configuration).
 */
export function hoverText(
  value: Value | null,
  sort: "int" | "bool" | null,
): string {
  if (value === null || sort === null) {
    return "not determined";
  }
  return displayValue(value, sort);
}
