import { gateRationale } from "./gating.js";
import {
  AnnotationPayload,
  CategoryDescriptor,
  RATIONALE,
  SentencePayload,
} from "./types.js";

export type SubmissionStatus = "editing" | "submitting" | "error";

export interface AnnotationFormState {
  sentence: SentencePayload;
  labels: Record<string, 0 | 1>;
  rationaleContext: 0 | 1 | null;
  rationaleEnabled: boolean;
  status: SubmissionStatus;
  error: string | null;
}

export function emptyForm(
  sentence: SentencePayload,
  categories: CategoryDescriptor[],
): AnnotationFormState {
  const labels: Record<string, 0 | 1> = {};
  for (const c of categories) {
    labels[c.name] = 0;
  }
  return {
    sentence,
    labels,
    rationaleContext: null,
    rationaleEnabled: false,
    status: "editing",
    error: null,
  };
}

/** Flip one category toggle and re-apply the gating rule. Toggling the
 * rationale category while it is disabled is a no-op. */
export function toggleCategory(
  form: AnnotationFormState,
  name: string,
): AnnotationFormState {
  if (!(name in form.labels)) {
    return form;
  }
  if (name === RATIONALE && !form.rationaleEnabled) {
    return form;
  }
  const labels: Record<string, 0 | 1> = {
    ...form.labels,
    [name]: form.labels[name] === 1 ? 0 : 1,
  };
  const gated = gateRationale(labels);
  return {
    ...form,
    labels: gated.labels,
    rationaleEnabled: gated.rationaleEnabled,
    rationaleContext: gated.labels[RATIONALE] === 1
      ? form.rationaleContext
      : null,
    error: null,
  };
}

/** The optional context judgement only applies to rationale sentences. */
export function setRationaleContext(
  form: AnnotationFormState,
  value: 0 | 1 | null,
): AnnotationFormState {
  if (form.labels[RATIONALE] !== 1) {
    return form;
  }
  return { ...form, rationaleContext: value };
}

export function toPayload(
  form: AnnotationFormState,
  annotatorId: string,
): AnnotationPayload {
  const payload: AnnotationPayload = {
    sentence_id: form.sentence.sentence_id,
    annotator_id: annotatorId,
    labels: { ...form.labels },
  };
  if (form.rationaleContext !== null) {
    payload.rationale_context = form.rationaleContext;
  }
  return payload;
}
