//! The scorer checked against a separate regex-based interpreter of the
//! rule pseudocode, plus the scorer's algebraic properties.

use manualcode::complexity::{complexity_score, score_example, select_strategy, PromptStrategy, Rule};
use manualcode::Circumstance;
use proptest::prelude::*;
use regex::Regex;

struct Interpreter {
    positive: Regex,
    but: Regex,
    starts_with_no: Regex,
}

impl Interpreter {
    fn new() -> Self {
        // A "word" boundary here is any character that is not alphabetic or numeric.
        let b = r"(?:^|[^\p{Alphabetic}\p{N}])";
        let e = r"(?:$|[^\p{Alphabetic}\p{N}])";
        Self {
            positive: Regex::new(&format!(
                "{b}(?:used|had|was|moved|argued|problems|history|mentioned|occurred|abuse|stressor){e}"
            ))
            .unwrap(),
            but: Regex::new(&format!("{b}but{e}")).unwrap(),
            starts_with_no: Regex::new(&format!(r"^[^\p{{Alphabetic}}\p{{N}}]*no{e}")).unwrap(),
        }
    }

    /// Literal walk through the pseudocode for one example.
    fn run(&self, ex: &str) -> i64 {
        let ex = ex.to_lowercase();
        let mut score = 0;
        let has_positive = self.positive.is_match(&ex);
        let has_but = self.but.is_match(&ex);
        if has_positive && has_but {
            score += 3;
        } else if has_positive {
            score += 2;
        }
        if ex.contains("use that") || ex.contains("use other") {
            score += 1;
        }
        let length = Regex::new(r"\S+").unwrap().find_iter(&ex).count();
        if self.starts_with_no.is_match(&ex) && length < 5 {
            score -= 1;
        }
        score
    }
}

fn net(text: &str) -> i64 {
    score_example(text).iter().map(|h| h.delta).sum()
}

#[test]
fn hand_traced_cases_match_interpreter() {
    let interp = Interpreter::new();
    let cases = [
        ("Argued constantly but no specific incident", 3),
        ("Victim had financial difficulties", 2),
        ("No financial difficulties.", -1),
        ("", 0),
        ("Victim had a dispute but use other category", 4),
        ("No history of abuse", 1),
        ("Wash the car but rebutted", 0),
        ("Use that code instead", 1),
        ("no", -1),
        ("  ...No, none", -1),
    ];
    for (text, expected) in cases {
        assert_eq!(interp.run(text), expected, "interpreter on {text:?}");
        assert_eq!(net(text), expected, "scorer on {text:?}");
    }
}

const VOCAB: &[&str] = &[
    "used", "had", "was", "wash", "but", "rebutted", "no", "No", "NO", "nobody", "use", "that", "other", "victim",
    "Argued", "History", "abuse", "ABUSE", "stressor", "moved", "mentioned", "occurred", "problems", "cat", "é",
    "42", "but.", "(no)", "use-other",
];
const SEPARATORS: &[&str] = &[" ", "  ", ", ", ".", "\n", "\t", "-", "", "! "];

fn example() -> impl Strategy<Value = String> {
    prop::collection::vec((prop::sample::select(VOCAB), prop::sample::select(SEPARATORS)), 0..10).prop_map(|parts| {
        parts
            .into_iter()
            .map(|(w, s)| format!("{w}{s}"))
            .collect::<String>()
    })
}

proptest! {
    #[test]
    fn scorer_agrees_with_interpreter(ex in example()) {
        let interp = Interpreter::new();
        prop_assert_eq!(net(&ex), interp.run(&ex));
    }

    #[test]
    fn positive_rules_are_exclusive(ex in example()) {
        let hits = score_example(&ex);
        let both = hits.iter().any(|h| h.rule == Rule::PositiveAndBut) && hits.iter().any(|h| h.rule == Rule::PositiveOnly);
        prop_assert!(!both);
        for h in hits {
            prop_assert_eq!(h.delta, h.rule.delta());
        }
    }

    #[test]
    fn case_insensitive(ex in example()) {
        prop_assert_eq!(score_example(&ex), score_example(&ex.to_uppercase()));
    }

    #[test]
    fn case_insensitive_ascii(ex in "[ -~]{0,40}") {
        prop_assert_eq!(score_example(&ex), score_example(&ex.to_uppercase()));
    }

    #[test]
    fn order_insensitive_and_additive(examples in prop::collection::vec(example(), 0..8), seed in any::<u64>()) {
        let mut shuffled = examples.clone();
        // deterministic rotation + reversal as a permutation
        if !shuffled.is_empty() {
            let k = (seed as usize) % shuffled.len();
            shuffled.rotate_left(k);
            shuffled.reverse();
        }
        let total = |ex: &[String]| complexity_score(&circumstance(ex.to_vec()), 2).total_score;
        prop_assert_eq!(total(&examples), total(&shuffled));
        prop_assert_eq!(total(&examples), examples.iter().map(|e| net(e)).sum::<i64>());
    }

    #[test]
    fn monotone_appends(examples in prop::collection::vec(example(), 0..8), extra in example()) {
        let before = complexity_score(&circumstance(examples.clone()), 2).total_score;
        let mut more = examples.clone();
        more.push(extra.clone());
        let after = complexity_score(&circumstance(more), 2).total_score;
        if net(&extra) > 0 {
            prop_assert!(after > before);
        }
        let mut absent = examples;
        absent.push("No stress.".to_string());
        prop_assert_eq!(complexity_score(&circumstance(absent), 2).total_score, before - 1);
    }

    #[test]
    fn report_total_is_sum_and_strategy_is_strict(examples in prop::collection::vec(example(), 0..8), threshold in -3i64..6) {
        let report = complexity_score(&circumstance(examples), threshold);
        prop_assert_eq!(report.total_score, report.hits.iter().map(|h| h.delta).sum::<i64>());
        let expected = if report.total_score > threshold { PromptStrategy::Complex } else { PromptStrategy::Simple };
        prop_assert_eq!(report.strategy, expected);
    }
}

fn circumstance(examples_no: Vec<String>) -> Circumstance {
    Circumstance {
        id: "c".into(),
        name: "C".into(),
        definition: "d".into(),
        guidance: "g".into(),
        examples_yes: vec!["Victim had problems but argued".into()],
        examples_no,
        training_positive_count: None,
    }
}

#[test]
fn default_threshold_boundary() {
    assert_eq!(select_strategy(2, 2), PromptStrategy::Simple);
    assert_eq!(select_strategy(3, 2), PromptStrategy::Complex);
}

#[test]
fn examples_yes_are_ignored() {
    let mut c = circumstance(vec![]);
    c.examples_yes = vec!["Argued but had problems".into(); 10];
    assert_eq!(complexity_score(&c, 2).total_score, 0);
}
