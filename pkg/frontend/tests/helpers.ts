import { CategoryDescriptor, SentencePayload } from "../src/types.js";

export const CATEGORY_NAMES = [
  "criterion_track_record",
  "criterion_relevance_originality_topicality",
  "criterion_suitability",
  "criterion_feasibility",
  "candidate_other",
  "candidate_quantity",
  "proposal_general",
  "proposal_method",
  "positive",
  "negative",
  "suggestion",
  "rationale",
];

export function descriptors(): CategoryDescriptor[] {
  return CATEGORY_NAMES.map((name) => ({
    name,
    display_name: name,
    dimension: "test",
    description: `Does the sentence carry ${name}?`,
  }));
}

export function sentence(
  id: string,
  position = 0,
  reviewId = "r1",
): SentencePayload {
  return {
    sentence_id: id,
    review_id: reviewId,
    position,
    text: `sentence ${id}`,
    text_box: "overall_comment",
  };
}

export function emptyLabels(): Record<string, 0 | 1> {
  const labels: Record<string, 0 | 1> = {};
  for (const name of CATEGORY_NAMES) {
    labels[name] = 0;
  }
  return labels;
}
