/** Payload shapes of the annotation service's /api/v1 endpoints. */

export interface CategoryDescriptor {
  name: string;
  display_name: string;
  dimension: string;
  description: string;
}

export interface SentencePayload {
  sentence_id: string;
  review_id: string;
  position: number;
  text: string;
  text_box: string;
  research_domain?: string;
  language?: string;
}

export interface AssignmentsPayload {
  sentences: SentencePayload[];
  categories: CategoryDescriptor[];
}

export interface AnnotationPayload {
  sentence_id: string;
  annotator_id: string;
  labels: Record<string, 0 | 1>;
  rationale_context?: 0 | 1;
}

export interface CategoryAgreement {
  full_agreement_rate: number;
  prevalence_majority: number;
  prevalence_full: number;
}

export interface AgreementPayload {
  n_sentences: number;
  per_category: Record<string, CategoryAgreement>;
  per_round: Record<string, Record<string, number>>;
  pending_sentences: number;
}

export interface RoundProgress {
  round_id: string;
  status: string;
  n_sentences: number;
  panel: string[];
  assigned: number;
  submitted: number;
  complete_sentences: number;
}

/** Category names with special UI behavior; these are stable API
 * identifiers, not display strings. */
export const POSITIVE = "positive";
export const NEGATIVE = "negative";
export const RATIONALE = "rationale";
