import { CategoryDescriptor } from "./types.js";

/** One key per category toggle, assigned in descriptor order; rounds of
 * a thousand sentences per annotator make keyboard throughput the
 * point of the UI. Enter submits, "c" cycles the rationale-context
 * judgement. */
export const CATEGORY_KEYS = [
  "1", "2", "3", "4", "5", "6", "7", "8", "9", "0", "-", "=",
] as const;

export function keyBindings(
  categories: CategoryDescriptor[],
): Map<string, string> {
  const bindings = new Map<string, string>();
  categories.slice(0, CATEGORY_KEYS.length).forEach((c, i) => {
    bindings.set(CATEGORY_KEYS[i], c.name);
  });
  return bindings;
}
