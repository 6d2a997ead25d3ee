//! Parsing model responses into verdicts.
//!
//! The last `FINAL CODING:` line wins. Its value is read as yes/no ignoring
//! case, brackets and punctuation; an echoed `[Yes or No]` is ambiguous. With
//! no marker line at all, the last standalone yes/no word decides. Anything
//! else is `Unparseable`, which is a value and never an error.

use std::fmt;

use serde::{Deserialize, Serialize};

const FINAL_MARKER: &str = "final coding:";
const EVIDENCE_MARKER: &str = "evidence:";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Decision {
    Yes,
    No,
    Unparseable,
}

impl Decision {
    pub fn as_str(self) -> &'static str {
        match self {
            Decision::Yes => "Yes",
            Decision::No => "No",
            Decision::Unparseable => "Unparseable",
        }
    }
}

impl fmt::Display for Decision {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Verdict {
    pub decision: Decision,
    /// Quoted evidence; always a contiguous slice of `raw_response`.
    pub evidence: Option<String>,
    pub raw_response: String,
    pub attempts: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub parse_failure: Option<String>,
}

/// Byte offset of the last ASCII-case-insensitive occurrence of `needle`.
/// `needle` must be lowercase ASCII, so the offset is a char boundary.
fn rfind_ci(haystack: &str, needle: &str) -> Option<usize> {
    let h = haystack.as_bytes();
    let n = needle.as_bytes();
    if n.len() > h.len() {
        return None;
    }
    (0..=h.len() - n.len())
        .rev()
        .find(|&i| h[i..i + n.len()].eq_ignore_ascii_case(n))
}

fn find_ci(haystack: &str, needle: &str) -> Option<usize> {
    let h = haystack.as_bytes();
    let n = needle.as_bytes();
    if n.len() > h.len() {
        return None;
    }
    (0..=h.len() - n.len()).find(|&i| h[i..i + n.len()].eq_ignore_ascii_case(n))
}

fn lowered_words(text: &str) -> Vec<String> {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|w| !w.is_empty())
        .map(str::to_lowercase)
        .collect()
}

fn yes_no(word: &str) -> Option<Decision> {
    match word {
        "yes" => Some(Decision::Yes),
        "no" => Some(Decision::No),
        _ => None,
    }
}

enum MarkerValue {
    Empty,
    Decided(Decision),
    Ambiguous(&'static str),
}

fn read_marker_value(value: &str) -> MarkerValue {
    let words = lowered_words(value);
    if words.is_empty() {
        return MarkerValue::Empty;
    }
    if let Some(first) = yes_no(&words[0]) {
        let echoes_template = words.len() >= 3 && words[1] == "or" && yes_no(&words[2]).is_some();
        if echoes_template {
            return MarkerValue::Ambiguous("FINAL CODING repeats the \"Yes or No\" template");
        }
        return MarkerValue::Decided(first);
    }
    let mut found = words.iter().filter_map(|w| yes_no(w));
    match found.next() {
        None => MarkerValue::Ambiguous("FINAL CODING value has no yes/no"),
        Some(d) if found.all(|other| other == d) => MarkerValue::Decided(d),
        Some(_) => MarkerValue::Ambiguous("FINAL CODING value mixes yes and no"),
    }
}

fn parse_decision(raw: &str) -> Result<Decision, String> {
    let lines: Vec<&str> = raw.lines().collect();
    let marker_line = lines
        .iter()
        .enumerate()
        .rev()
        .find_map(|(i, line)| rfind_ci(line, FINAL_MARKER).map(|pos| (i, &line[pos + FINAL_MARKER.len()..])));

    if let Some((index, value)) = marker_line {
        let mut value = read_marker_value(value);
        if matches!(value, MarkerValue::Empty) {
            // Answer on the line following a bare marker.
            if let Some(next) = lines[index + 1..].iter().find(|l| !l.trim().is_empty()) {
                value = read_marker_value(next);
            }
        }
        return match value {
            MarkerValue::Decided(d) => Ok(d),
            MarkerValue::Ambiguous(reason) => Err(reason.to_string()),
            MarkerValue::Empty => Err("FINAL CODING marker has no value".to_string()),
        };
    }

    lowered_words(raw)
        .iter()
        .rev()
        .find_map(|w| yes_no(w))
        .ok_or_else(|| "no FINAL CODING marker and no standalone yes/no".to_string())
}

fn is_wrapper(c: char) -> bool {
    c.is_whitespace() || matches!(c, '"' | '\'' | '[' | ']' | '*' | '`' | '\u{201c}' | '\u{201d}')
}

fn parse_evidence(raw: &str) -> Option<String> {
    let line = raw.lines().rev().find(|l| find_ci(l, EVIDENCE_MARKER).is_some())?;
    let start = rfind_ci(line, EVIDENCE_MARKER)? + EVIDENCE_MARKER.len();
    let mut value = &line[start..];
    if let Some(end) = find_ci(value, FINAL_MARKER) {
        value = &value[..end];
    }
    let value = value.trim_matches(is_wrapper);
    let none = value.is_empty()
        || value.eq_ignore_ascii_case("none found")
        || value.eq_ignore_ascii_case("none found.")
        || value.eq_ignore_ascii_case("none");
    (!none).then(|| value.to_string())
}

/// Total and deterministic; never panics on any input.
pub fn parse_verdict(raw: &str) -> Verdict {
    let (decision, parse_failure) = match parse_decision(raw) {
        Ok(d) => (d, None),
        Err(reason) => (Decision::Unparseable, Some(reason)),
    };
    Verdict {
        decision,
        evidence: parse_evidence(raw),
        raw_response: raw.to_string(),
        attempts: 1,
        parse_failure,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn template_response() {
        let v = parse_verdict("EVIDENCE: None found\nFINAL CODING: No");
        assert_eq!(v.decision, Decision::No);
        assert_eq!(v.evidence, None);
        assert_eq!(v.parse_failure, None);
    }

    #[test]
    fn quoted_evidence() {
        let v = parse_verdict("EVIDENCE: \"wife had cancer\"\nFINAL CODING: Yes");
        assert_eq!(v.decision, Decision::Yes);
        assert_eq!(v.evidence.as_deref(), Some("wife had cancer"));
    }

    #[test]
    fn unparseable_records_reason() {
        let v = parse_verdict("The narrative is ambiguous.");
        assert_eq!(v.decision, Decision::Unparseable);
        assert!(v.parse_failure.is_some());
    }

    #[test]
    fn last_marker_wins() {
        let v = parse_verdict("FINAL CODING: Yes\nOn reflection...\nFINAL CODING: No");
        assert_eq!(v.decision, Decision::No);
    }

    #[test]
    fn marker_value_on_next_line() {
        assert_eq!(parse_verdict("FINAL CODING:\n\n  Yes").decision, Decision::Yes);
    }

    #[test]
    fn multibyte_around_markers() {
        let v = parse_verdict("ÉVIDENCE: é\nEVIDENCE: “naïve”\nFINAL CODING: ✓ yes");
        assert_eq!(v.decision, Decision::Yes);
        assert_eq!(v.evidence.as_deref(), Some("naïve"));
    }
}
