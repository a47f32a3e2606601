"""The twelve sentence-level review categories and their metadata.

Categories are grouped into three dimensions (four categories each) and
carry the codebook identifier used in data files plus the codebook
question shown to annotators and used in few-shot prompts.
"""

from enum import Enum


class Dimension(Enum):
    EvaluationCriteria = "evaluation_criteria"
    Focus = "focus"
    StatementTypeReasoning = "statement_type_reasoning"


class Category(Enum):
    TrackRecord = "criterion_track_record"
    RelevanceOriginalityTopicality = "criterion_relevance_originality_topicality"
    Suitability = "criterion_suitability"
    Feasibility = "criterion_feasibility"
    Applicant = "candidate_other"
    ApplicantQuantity = "candidate_quantity"
    Proposal = "proposal_general"
    Method = "proposal_method"
    Positive = "positive"
    Negative = "negative"
    Suggestion = "suggestion"
    Rationale = "rationale"

    @property
    def codebook_name(self):
        return self.value

    @property
    def dimension(self):
        return _DIMENSIONS[self]

    @property
    def display_name(self):
        return _DISPLAY_NAMES[self]

    @property
    def description(self):
        return _DESCRIPTIONS[self]

    @classmethod
    def from_codebook_name(cls, name):
        return cls(name)


_DIMENSIONS = {
    Category.TrackRecord: Dimension.EvaluationCriteria,
    Category.RelevanceOriginalityTopicality: Dimension.EvaluationCriteria,
    Category.Suitability: Dimension.EvaluationCriteria,
    Category.Feasibility: Dimension.EvaluationCriteria,
    Category.Applicant: Dimension.Focus,
    Category.ApplicantQuantity: Dimension.Focus,
    Category.Proposal: Dimension.Focus,
    Category.Method: Dimension.Focus,
    Category.Positive: Dimension.StatementTypeReasoning,
    Category.Negative: Dimension.StatementTypeReasoning,
    Category.Suggestion: Dimension.StatementTypeReasoning,
    Category.Rationale: Dimension.StatementTypeReasoning,
}

_DISPLAY_NAMES = {
    Category.TrackRecord: "Track Record",
    Category.RelevanceOriginalityTopicality: "Relevance, Originality, and Topicality",
    Category.Suitability: "Suitability",
    Category.Feasibility: "Feasibility",
    Category.Applicant: "Applicant",
    Category.ApplicantQuantity: "Applicant: Quantity",
    Category.Proposal: "Proposal",
    Category.Method: "Method",
    Category.Positive: "Positive",
    Category.Negative: "Negative",
    Category.Suggestion: "Suggestion",
    Category.Rationale: "Rationale",
}

# Codebook question per category, shown to annotators and reused in
# few-shot prompt construction.
_DESCRIPTIONS = {
    Category.TrackRecord: (
        "Does the sentence address the scientific qualifications of the "
        "applicant(s) or team?"
    ),
    Category.RelevanceOriginalityTopicality: (
        "Does the sentence address the scientific relevance, originality or "
        "topicality of the proposed research project?"
    ),
    Category.Suitability: (
        "Does the sentence address the suitability of the methods to be used "
        "within the proposed research project?"
    ),
    Category.Feasibility: (
        "Does the sentence address the feasibility of the proposed research "
        "project?"
    ),
    Category.Applicant: (
        "Does the sentence address the applicant(s), the team or their "
        "qualifications, without mentioning quantitative indicators?"
    ),
    Category.ApplicantQuantity: (
        "Does the sentence use quantitative indicators to describe the "
        "applicant(s) or team?"
    ),
    Category.Proposal: (
        "Does the sentence address the proposal or specific parts of it, as "
        "opposed to the applicant(s) or context beyond the proposal?"
    ),
    Category.Method: (
        "Does the sentence address the methods to be used in the proposed "
        "research project?"
    ),
    Category.Positive: (
        "Is the sentence itself a positive statement or does it contain a "
        "positive statement?"
    ),
    Category.Negative: (
        "Is the sentence itself a negative statement or does it contain a "
        "negative statement?"
    ),
    Category.Suggestion: "Does the sentence suggest how to improve the proposal?",
    Category.Rationale: (
        "Does the sentence provide a rationale supporting the positive or "
        "negative statement?"
    ),
}

CATEGORIES = list(Category)
