//! Simple and complex prompt rendering.
//!
//! Both prompts share the same preamble, question line, narrative block and
//! EVIDENCE / FINAL CODING footer. The complex prompt inserts the manual's
//! definition, guidance and examples after the question line. Empty manual
//! sections render as `None provided` so the layout never changes.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::complexity::PromptStrategy;
use crate::manual::Circumstance;

pub const DEFAULT_TRUNCATION_LIMIT: usize = 3500;

pub const PREAMBLE: &str = "You are classifying death investigation narratives for the presence of specific circumstances.

Code \"Yes\" if the circumstance is mentioned, implied, or can be reasonably inferred from the narrative.
Code \"No\" if there is no mention or indication of the circumstance.

When in doubt, code \"Yes\".

---

";

pub const FOOTER: &str = "
---

EVIDENCE: [Quote relevant text, or \"None found\"]
FINAL CODING: [Yes or No]";

const NONE_PROVIDED: &str = "None provided";

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PromptError {
    #[error("circumstance name is empty")]
    EmptyName,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RenderedPrompt {
    pub circumstance_id: String,
    pub narrative_id: String,
    pub strategy: PromptStrategy,
    pub text: String,
    pub truncated: bool,
}

/// First `limit` Unicode scalar values of `text`, and whether anything was cut.
pub fn truncate_narrative(text: &str, limit: usize) -> (&str, bool) {
    match text.char_indices().nth(limit) {
        Some((byte_offset, _)) => (&text[..byte_offset], true),
        None => (text, false),
    }
}

fn question(name: &str) -> String {
    format!("Is there any mention of \"{name}\" in this narrative?\n")
}

fn narrative_block(narrative: &str) -> String {
    format!("---\nNARRATIVE: {narrative}{FOOTER}")
}

fn or_none(text: &str) -> &str {
    if text.trim().is_empty() {
        NONE_PROVIDED
    } else {
        text
    }
}

fn examples_section(header: &str, examples: &[String]) -> String {
    if examples.is_empty() {
        return format!("{header} {NONE_PROVIDED}\n");
    }
    let mut out = format!("{header}\n");
    for ex in examples {
        out.push_str("- ");
        out.push_str(ex);
        out.push('\n');
    }
    out
}

/// Name-only prompt text. `narrative` is used as given.
pub fn render_simple(name: &str, narrative: &str) -> Result<String, PromptError> {
    if name.trim().is_empty() {
        return Err(PromptError::EmptyName);
    }
    Ok(format!("{PREAMBLE}{}\n{}", question(name), narrative_block(narrative)))
}

/// Full-guideline prompt text. `narrative` is used as given.
pub fn render_complex(circumstance: &Circumstance, narrative: &str) -> Result<String, PromptError> {
    if circumstance.name.trim().is_empty() {
        return Err(PromptError::EmptyName);
    }
    let guidance_block = format!(
        "DEFINITION: {}\nCODING GUIDANCE: {}\n{}{}",
        or_none(&circumstance.definition),
        or_none(&circumstance.guidance),
        examples_section("EXAMPLES - CODE \"YES\":", &circumstance.examples_yes),
        examples_section("EXAMPLES - CODE \"NO\":", &circumstance.examples_no),
    );
    Ok(format!(
        "{PREAMBLE}{}\n{guidance_block}\n{}",
        question(&circumstance.name),
        narrative_block(narrative)
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PromptBuilder {
    pub truncation_limit: usize,
}

impl Default for PromptBuilder {
    fn default() -> Self {
        Self {
            truncation_limit: DEFAULT_TRUNCATION_LIMIT,
        }
    }
}

impl PromptBuilder {
    pub fn new(truncation_limit: usize) -> Self {
        assert!(truncation_limit >= 1, "truncation limit must be positive");
        Self { truncation_limit }
    }

    pub fn build(
        &self,
        strategy: PromptStrategy,
        circumstance: &Circumstance,
        narrative_id: &str,
        narrative: &str,
    ) -> Result<RenderedPrompt, PromptError> {
        let (narrative, truncated) = truncate_narrative(narrative, self.truncation_limit);
        let text = match strategy {
            PromptStrategy::Simple => render_simple(&circumstance.name, narrative)?,
            PromptStrategy::Complex => render_complex(circumstance, narrative)?,
        };
        Ok(RenderedPrompt {
            circumstance_id: circumstance.id.clone(),
            narrative_id: narrative_id.to_string(),
            strategy,
            text,
            truncated,
        })
    }

    pub fn simple(&self, circumstance: &Circumstance, narrative_id: &str, narrative: &str) -> Result<RenderedPrompt, PromptError> {
        self.build(PromptStrategy::Simple, circumstance, narrative_id, narrative)
    }

    pub fn complex(&self, circumstance: &Circumstance, narrative_id: &str, narrative: &str) -> Result<RenderedPrompt, PromptError> {
        self.build(PromptStrategy::Complex, circumstance, narrative_id, narrative)
    }
}
