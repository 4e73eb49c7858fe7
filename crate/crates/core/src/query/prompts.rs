//! Prompt templates shipped with the query pipeline.
//!
//! Templates carry `{name}` placeholders; [`render`] substitutes the
//! variables it is given and leaves everything else (including JSON braces
//! in the output-format blocks) untouched.

use std::collections::BTreeMap;

/// A named prompt with `{placeholder}` slots.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PromptTemplate {
    pub id: &'static str,
    pub text: &'static str,
    /// Placeholder names the template expects.
    pub variables: &'static [&'static str],
}

impl PromptTemplate {
    /// Substitute variables into the template text. Unknown variables are
    /// ignored; missing ones leave their placeholder in place.
    pub fn render(&self, variables: &BTreeMap<String, String>) -> String {
        let mut out = self.text.to_string();
        for (key, value) in variables {
            out = out.replace(&format!("{{{key}}}"), value);
        }
        out
    }
}

/// Look a template up by id.
pub fn template_by_id(id: &str) -> Option<&'static PromptTemplate> {
    [&GENERATION, &DECONTEXTUALIZATION, &VERIFICATION]
        .into_iter()
        .find(|t| t.id == id)
}

/// Asks for one abstractive, retrieval-hard question about a span of paper
/// text; the service answers `{"query": "<question or null>"}`.
pub const GENERATION: PromptTemplate = PromptTemplate {
    id: "generate-query",
    variables: &["paper_text"],
    text: r#"You are given extracted text from a scientific research paper. Your task is to generate a single, high-quality synthetic query that would meaningfully test a document retrieval system.

Instructions:

1. The query must require expert-level reasoning over implications, trends, limitations, or constraints discussed in the document, and must not be a direct restatement of any sentence from the input.
2. The query must minimize lexical overlap with the input text by avoiding distinctive phrases or terminology, relying instead on abstraction and paraphrasing rather than keyword matching.
3. The query must be answerable from the document but not trivially retrievable via keyword or phrase matching, and must not reference sections, figures, experiments, or document-specific wording.
4. The query must ask exactly one focused question, without combining multiple sub-questions or enumerating parameters or conditions.
5. The query must be realistic and concise, phrased as a single sentence that a knowledgeable researcher would plausibly ask, without verbose framing or artificial difficulty.
6. If no query satisfying these criteria can be generated, return null.

Required Output Format:

{
  "query": "<generated question or null>"
}

Here is the document content:

{paper_text}"#,
};

/// Rewrites a document-bound question into open-domain form; the service
/// answers `{"query": "<question or null>", "reasoning": "<rationale>"}`.
pub const DECONTEXTUALIZATION: PromptTemplate = PromptTemplate {
    id: "decontextualize-query",
    variables: &["question"],
    text: r#"You are a scientific question rewriter. You are given an original question that references a specific portion of a research paper. Your task is to rewrite it into a context-independent, open-domain scientific query that targets the same underlying concept, without relying on document-local or visual references.

Do not refer to any figure, plot, panel, image, document, or use deictic expressions such as "this", "that", "above", or "below".

Requirements:

1. Preserve the core scientific intent, variables, and conditions present in the original question.
2. Replace visual or deictic phrasing with concept-level wording (e.g., remove references such as "based on the graph" and ask directly about the relationship or effect).
3. If symbols (e.g., f_spec) appear without definition, retain them exactly as written and do not invent meanings. A minimal parenthetical alias may be included only if it appears in the input.
4. Remove all references to figures, plots, tables, panels, or document-local indices.
5. Ensure the rewritten query can be answered by a knowledgeable reader without access to the original document or image.
6. Retain units, ranges, and experimental or observational conditions if present.
7. Avoid unresolved pronouns or placeholders (e.g., "the parameter", "the system") unless the domain makes them unambiguous.
8. If the original question contains multiple sub-questions, keep only one and discard the rest.
9. The final query must be a single, concise sentence with no superfluous framing or background.

Required Output Format:

{
  "query": "<single rewritten question or null>",
  "reasoning": "<one-sentence rationale>"
}

If a valid context-independent query cannot be produced, set "query" to null and briefly explain why in "reasoning".

Here is the original question:

{question}"#,
};

/// Judges whether a rewritten question stands on its own; the service
/// answers a structured verdict.
pub const VERIFICATION: PromptTemplate = PromptTemplate {
    id: "verify-query",
    variables: &["payload"],
    text: r#"You are a validator that checks whether a decontextualized question is well-formed for open-domain retrieval. Judge only from the provided JSON fields. Do not assume access to the original figure, table, or paper.

What "valid decontextualized question" means:

A question is valid if and only if all of the following criteria are satisfied:

1. Context-independent: The question contains no references to local context such as "this figure," "the table above," "these results," or any indexical phrasing that requires the original document or image.
2. Answerable in principle: A knowledgeable person or external source could answer the question without access to the original paper or figure. The domain and variables must be sufficiently specified. Crucially, the question must not rely on parameters, symbols, or notations that are defined arbitrarily or only within the source paper (e.g., a tuning parameter with no standard meaning in the field).
3. Intent preserved: The question targets the same underlying information need as the original question, but generalized beyond the local figure or document context.
4. Clarity and unambiguous entities: Any entities, variables, or notations must be interpretable by an expert in the relevant field without requiring the specific paper. Unresolved pronouns or placeholders (e.g., "the parameter," "the system") are not allowed unless they are standard and unambiguous within the domain.

Guiding Principle for Ambiguity:

Requiring background domain knowledge is acceptable and expected for real search queries. However, ambiguity arising from terms that are defined only within the source document or that depend on the original figure context is not acceptable.

Common failure modes (label them if present):

- underspecified_parameter (especially if defined arbitrarily in the source paper)
- still_context_bound
- domain_missing_or_vague
- ambiguity_pronouns_placeholders
- unanswerable_generic

Required Output Format (JSON only):

{
  "is_valid": boolean,
  "score": integer,
  "decision_rationale": string,
  "confidence": integer
}

Here is the question to validate:

{payload}"#,
};
