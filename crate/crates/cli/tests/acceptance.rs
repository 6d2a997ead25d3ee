//! Acceptance gate: one PASS/FAIL line per criterion, nonzero exit on any
//! failure.

use std::collections::{BTreeSet, HashMap};
use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use manualcode::corpus::{EvaluationSample, SampleEntry, SampleHeader};
use manualcode::eval::{
    bracket_analysis, confusion, hybrid_macro_f1, mean, metrics, oracle_macro_f1, strategy_analysis,
    wilson_interval, AnalysisFixture, UnparseablePolicy, DEFAULT_TIE_EPSILON, Z_95,
};
use manualcode::gateway::{parse_verdict, Decision};
use manualcode::prompt::{render_complex, render_simple};
use manualcode::{load_manual, score_example, select_strategy, PromptStrategy, Strictness};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[path = "../../core/tests/support/verdict_cases.rs"]
mod verdict_cases;

type Outcome = Result<String, String>;

fn core_fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/fixtures").join(name)
}

fn published() -> AnalysisFixture {
    AnalysisFixture::load(&core_fixture("published_results.csv")).expect("fixture loads")
}

fn ensure(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn rule_examples() -> Outcome {
    let cases = [
        ("Argued constantly but no specific incident", 3),
        ("Victim had financial difficulties", 2),
        ("No financial difficulties.", -1),
    ];
    let start = Instant::now();
    let got: Vec<i64> = cases
        .iter()
        .map(|(text, _)| score_example(text).iter().map(|h| h.delta).sum())
        .collect();
    let elapsed = start.elapsed();
    let expected: Vec<i64> = cases.iter().map(|c| c.1).collect();
    ensure(
        got == expected && elapsed < Duration::from_millis(1),
        format!("scores {got:?} (expected {expected:?}) in {elapsed:?}"),
    )
}

/// Predicted strategy per published score, highest score first.
const PREDICTED: &[(&str, i64, char)] = &[
    ("argument", 5, 'C'),
    ("depressed-mood", 5, 'C'),
    ("living-situation-change", 4, 'C'),
    ("disaster-exposure", 4, 'C'),
    ("other-relationship-problem", 4, 'C'),
    ("death-of-friend-or-family", 4, 'C'),
    ("family-relationship-problem", 4, 'C'),
    ("household-substance-abuse", 3, 'C'),
    ("abuse-or-neglect", 3, 'C'),
    ("childhood-abuse-history", 3, 'C'),
    ("other-addiction", 2, 'S'),
    ("family-stressor", 2, 'S'),
    ("suicide-of-friend-or-family", 2, 'S'),
    ("criminal-legal-problem", 2, 'S'),
    ("caregiver-burden", 1, 'S'),
    ("victim-of-violence", 1, 'S'),
    ("civil-legal-problem", 1, 'S'),
    ("physical-health-problem", 1, 'S'),
    ("treatment-non-adherence", 0, 'S'),
    ("school-problem", 0, 'S'),
    ("job-problem", 0, 'S'),
    ("traumatic-anniversary", -1, 'S'),
    ("physical-fight", -1, 'S'),
    ("eviction-or-housing-loss", -1, 'S'),
    ("financial-problem", -1, 'S'),
];

fn threshold_predictions() -> Outcome {
    let fixture = published();
    let mut mismatches = Vec::new();
    for (id, score, letter) in PREDICTED {
        let row = fixture.rows.iter().find(|r| r.circumstance_id == *id);
        if row.map(|r| r.score) != Some(*score) {
            mismatches.push(format!("{id}: fixture score differs"));
        }
        if select_strategy(*score, 2).letter() != *letter {
            mismatches.push(format!("{id}: predicted {}", select_strategy(*score, 2).letter()));
        }
    }
    let complex = PREDICTED.iter().filter(|p| select_strategy(p.1, 2) == PromptStrategy::Complex).count();
    ensure(
        mismatches.is_empty() && complex == 10 && fixture.rows.len() == 25,
        format!("{complex} C / {} S; mismatches: {mismatches:?}", PREDICTED.len() - complex),
    )
}

fn strategy_accuracy() -> Outcome {
    let fixture = published();
    let analysis = strategy_analysis(&fixture.strategy_inputs(), DEFAULT_TIE_EPSILON, 2);
    let ties: BTreeSet<&str> = analysis.rows.iter().filter(|r| r.tie).map(|r| r.circumstance_id.as_str()).collect();
    // Ties recomputed in integer thousandths, the precision the values are reported at.
    let thousandths = |x: f64| (x * 1000.0).round() as i64;
    let expected_ties: BTreeSet<&str> = fixture
        .rows
        .iter()
        .filter(|r| (thousandths(r.f1_complex) - thousandths(r.f1_simple)).abs() <= 20)
        .map(|r| r.circumstance_id.as_str())
        .collect();
    let all = (analysis.accuracy_all.correct, analysis.accuracy_all.total);
    let non_tie = (analysis.accuracy_non_tie.correct, analysis.accuracy_non_tie.total);
    ensure(
        all == (18, 25) && non_tie == (13, 15) && ties == expected_ties && ties.len() == 10,
        format!(
            "accuracy {}/{}, excluding ties {}/{}, {} ties match recomputation: {}",
            all.0,
            all.1,
            non_tie.0,
            non_tie.1,
            ties.len(),
            ties == expected_ties
        ),
    )
}

fn macro_figures() -> Outcome {
    let f = published();
    let rows = f.strategy_inputs();
    let figures = [
        ("complex", mean(&f.column(|r| Some(r.f1_complex))), 0.883),
        ("simple", mean(&f.column(|r| Some(r.f1_simple))), 0.855),
        ("gemini", mean(&f.column(|r| r.f1_gemini)), 0.878),
        ("llama", mean(&f.column(|r| r.f1_llama)), 0.838),
        ("roberta", mean(&f.column(|r| r.f1_roberta)), 0.800),
        ("hybrid", hybrid_macro_f1(&rows, 2).ok(), 0.893),
        ("oracle", oracle_macro_f1(&rows).ok(), 0.897),
    ];
    let mut ok = f.column(|r| r.f1_roberta).len() == 24;
    let mut parts = Vec::new();
    for (name, got, expected) in figures {
        let got = got.unwrap_or(f64::NAN);
        ok &= (got - expected).abs() <= 0.003;
        parts.push(format!("{name} {got:.4}"));
    }
    ensure(ok, parts.join(", "))
}

fn bracket_table() -> Outcome {
    let a = bracket_analysis(&published().bracket_inputs(2));
    let got: Vec<(usize, usize)> = a.rows.iter().map(|r| (r.hybrid_wins, r.baseline_wins)).collect();
    let expected = vec![(4, 0), (6, 0), (5, 0), (4, 1), (2, 3)];
    let total = (a.total.hybrid_wins, a.total.baseline_wins);
    ensure(
        got == expected && total == (21, 4),
        format!("{got:?}, total {} vs {}", total.0, total.1),
    )
}

fn wilson_oracle() -> Outcome {
    // Independent 40-digit evaluations of the Wilson score formula.
    let (lo, hi) = wilson_interval(100.0, 200.0, Z_95).map_err(|e| e.to_string())?;
    let center = (lo + hi) / 2.0;
    let half = (hi - lo) / 2.0;
    let (lo1, hi1) = wilson_interval(100.0, 100.0, Z_95).map_err(|e| e.to_string())?;
    let (lo2, hi2) = wilson_interval(2.25, 7.5, Z_95).map_err(|e| e.to_string())?;
    let ok = (center - 0.5).abs() <= 1e-9
        && (half - 0.068_639_140_927_321_744).abs() <= 1e-12
        && (half - 0.0686).abs() <= 5e-4
        && (lo1 - 0.963_006_501_231_003_73).abs() <= 1e-12
        && hi1 == 1.0
        && (lo2 - 0.092_572_953_758_212_161).abs() <= 1e-12
        && (hi2 - 0.642_910_811_478_770_55).abs() <= 1e-12;
    ensure(
        ok,
        format!("p=0.5,n=200 center {center:.9} half-width {half:.6}; p=1,n=100 lower {lo1:.6}"),
    )
}

fn metrics_enumeration() -> Outcome {
    let start = Instant::now();
    let mut checked = 0u64;
    let mut failures = Vec::new();
    for tp in 0..=4usize {
        for fp in 0..=4usize {
            for fn_ in 0..=4usize {
                for tn in 0..=4usize {
                    for unp in 0..=4usize {
                        let mut entries = Vec::new();
                        let mut decisions = Vec::new();
                        let mut push = |label: bool, d: Decision, n: usize| {
                            for _ in 0..n {
                                entries.push(SampleEntry {
                                    narrative_id: format!("n{}", entries.len()),
                                    label,
                                });
                                decisions.push(d);
                            }
                        };
                        push(true, Decision::Yes, tp);
                        push(false, Decision::Yes, fp);
                        push(true, Decision::No, fn_);
                        push(false, Decision::No, tn);
                        push(unp % 2 == 0, Decision::Unparseable, unp);
                        let sample = EvaluationSample {
                            header: SampleHeader {
                                circumstance_id: "c".into(),
                                seed: 0,
                                corpus_sha256: String::new(),
                                requested_pos: 0,
                                requested_neg: 0,
                                under_sampled: false,
                                config_hash: None,
                            },
                            entries,
                        };
                        let map: HashMap<&str, Decision> = sample
                            .entries
                            .iter()
                            .map(|e| e.narrative_id.as_str())
                            .zip(decisions.iter().copied())
                            .collect();
                        for policy in [UnparseablePolicy::AsNo, UnparseablePolicy::AsYes, UnparseablePolicy::Drop] {
                            let m = confusion(&sample, &map, policy).map_err(|e| e.to_string())?;
                            let (mut a, mut b, mut c, mut d) = (0u64, 0u64, 0u64, 0u64);
                            for (e, dec) in sample.entries.iter().zip(&decisions) {
                                let yes = match dec {
                                    Decision::Yes => Some(true),
                                    Decision::No => Some(false),
                                    Decision::Unparseable => match policy {
                                        UnparseablePolicy::AsNo => Some(false),
                                        UnparseablePolicy::AsYes => Some(true),
                                        UnparseablePolicy::Drop => None,
                                    },
                                };
                                match (yes, e.label) {
                                    (Some(true), true) => a += 1,
                                    (Some(true), false) => b += 1,
                                    (Some(false), true) => c += 1,
                                    (Some(false), false) => d += 1,
                                    (None, _) => {}
                                }
                            }
                            let r = metrics("c", m, Z_95);
                            let f1 = (a > 0 || b > 0 || c > 0).then(|| 2.0 * a as f64 / (2 * a + b + c) as f64);
                            let same_f1 = match (r.f1.map(|x| x.point), f1) {
                                (Some(x), Some(y)) => (x - y).abs() < 1e-12,
                                (None, None) => true,
                                _ => false,
                            };
                            if (m.tp, m.fp, m.fn_, m.tn) != (a, b, c, d) || !same_f1 {
                                failures.push(format!("{tp}/{fp}/{fn_}/{tn}/{unp} {policy:?}"));
                            }
                            checked += 1;
                        }
                    }
                }
            }
        }
    }
    let elapsed = start.elapsed();
    ensure(
        failures.is_empty() && elapsed < Duration::from_secs(10),
        format!("{checked} matrices in {elapsed:.2?}, {} mismatches", failures.len()),
    )
}

fn pipeline_once(out: &Path) -> Result<(), String> {
    let manual = core_fixture("synthetic_manual.json");
    let corpus = core_fixture("synthetic_corpus.jsonl");
    let script = core_fixture("synthetic_mock_script.jsonl");
    let common = [
        "--manual",
        manual.to_str().unwrap(),
        "--corpus",
        corpus.to_str().unwrap(),
        "--mock-script",
        script.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ];
    for step in [&["sample"][..], &["classify", "--strategy", "auto"], &["evaluate"]] {
        let o = Command::new(env!("CARGO_BIN_EXE_manualcode"))
            .args(common)
            .args(step)
            .output()
            .map_err(|e| e.to_string())?;
        if !o.status.success() {
            return Err(format!("{step:?} failed: {}", String::from_utf8_lossy(&o.stderr)));
        }
    }
    Ok(())
}

/// Relative path and bytes of every deterministic output.
fn snapshot(out: &Path) -> Result<Vec<(String, Vec<u8>)>, String> {
    let mut files = Vec::new();
    for sub in ["samples", "verdicts"] {
        let mut names: Vec<PathBuf> = fs::read_dir(out.join(sub))
            .map_err(|e| e.to_string())?
            .map(|e| e.unwrap().path())
            .collect();
        names.sort();
        for p in names {
            files.push((format!("{sub}/{}", p.file_name().unwrap().to_string_lossy()), fs::read(&p).unwrap()));
        }
    }
    for name in ["metrics.json", "report.md", "failures.jsonl"] {
        files.push((name.to_string(), fs::read(out.join(name)).map_err(|e| format!("{name}: {e}"))?));
    }
    Ok(files)
}

fn end_to_end() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let start = Instant::now();
    let (a, b) = (dir.path().join("run-a"), dir.path().join("run-b"));
    pipeline_once(&a)?;
    pipeline_once(&b)?;
    let elapsed = start.elapsed();
    let (sa, sb) = (snapshot(&a)?, snapshot(&b)?);
    let differing: Vec<&str> = sa
        .iter()
        .zip(&sb)
        .filter(|(x, y)| x != y)
        .map(|(x, _)| x.0.as_str())
        .collect();
    ensure(
        differing.is_empty() && sa.len() == sb.len() && sa.len() == 9 && elapsed < Duration::from_secs(30),
        format!("{} files byte-identical across two runs in {elapsed:.2?}; differing: {differing:?}", sa.len()),
    )
}

fn fuzz_input(rng: &mut ChaCha8Rng) -> String {
    const PIECES: &[&str] = &[
        "FINAL CODING:", "final coding:", "EVIDENCE:", "Yes", "yes", "NO", "no", "[", "]", "\"", "*", "\n", "\r\n",
        " ", "or", "None found", "é", "ß", "\u{201c}", "🙂", ".", ":",
    ];
    let n = rng.gen_range(0..24);
    (0..n)
        .map(|_| {
            if rng.gen_bool(0.3) {
                char::from_u32(rng.gen_range(0..0x3000)).unwrap_or('?').to_string()
            } else {
                PIECES[rng.gen_range(0..PIECES.len())].to_string()
            }
        })
        .collect()
}

fn parser_robustness() -> Outcome {
    let wrong: Vec<String> = verdict_cases::VERDICT_CASES
        .iter()
        .filter(|(raw, expected)| parse_verdict(raw).decision != *expected)
        .map(|(raw, _)| format!("{raw:?}"))
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut counts = [0usize; 3];
    let mut bad = 0;
    for _ in 0..100_000 {
        let raw = fuzz_input(&mut rng);
        let result = std::panic::catch_unwind(|| parse_verdict(&raw));
        match result {
            Ok(v) => counts[v.decision as usize] += 1,
            Err(_) => bad += 1,
        }
    }
    ensure(
        wrong.is_empty() && verdict_cases::VERDICT_CASES.len() == 50 && bad == 0,
        format!(
            "{} table cases, {} wrong {wrong:?}; fuzz 100000 inputs: {} yes / {} no / {} unparseable, {bad} panics",
            verdict_cases::VERDICT_CASES.len(),
            wrong.len(),
            counts[0],
            counts[1],
            counts[2]
        ),
    )
}

const SIMPLE_TEMPLATE: &str = r#"You are classifying death investigation narratives for the presence of specific circumstances.

Code "Yes" if the circumstance is mentioned, implied, or can be reasonably inferred from the narrative.
Code "No" if there is no mention or indication of the circumstance.

When in doubt, code "Yes".

---

Is there any mention of "{circumstance_name}" in this narrative?

---
NARRATIVE: {narrative}
---

EVIDENCE: [Quote relevant text, or "None found"]
FINAL CODING: [Yes or No]"#;

fn prompt_goldens() -> Outcome {
    let narrative = "V was found unresponsive. His wife said they had argued about money.";
    let simple = render_simple("Argument", narrative).map_err(|e| e.to_string())?;
    let expected = SIMPLE_TEMPLATE
        .replace("{circumstance_name}", "Argument")
        .replace("{narrative}", narrative);
    let manual = load_manual(&core_fixture("synthetic_manual.json"), Strictness::Strict).map_err(|e| e.to_string())?;
    let caregiver = manual.get("caregiver-burden").ok_or("caregiver-burden missing")?;
    let complex = render_complex(caregiver, "V had been caring for his mother with dementia for years.")
        .map_err(|e| e.to_string())?;
    let golden = include_str!("../../core/tests/golden/complex_caregiver_burden.txt");
    ensure(
        simple == expected && complex == golden,
        format!("simple template match {}, complex golden match {}", simple == expected, complex == golden),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("complexity rule worked examples", rule_examples),
        ("strategy threshold predictions", threshold_predictions),
        ("strategy accuracy and ties", strategy_accuracy),
        ("macro F1 figures", macro_figures),
        ("training-size bracket table", bracket_table),
        ("Wilson interval oracle", wilson_oracle),
        ("metrics exhaustive enumeration", metrics_enumeration),
        ("end-to-end determinism", end_to_end),
        ("verdict parser robustness", parser_robustness),
        ("prompt goldens", prompt_goldens),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let outcome = std::panic::catch_unwind(check).unwrap_or_else(|_| Err("panicked".into()));
        match outcome {
            Ok(detail) => println!("AC{:<2} PASS  {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("AC{:<2} FAIL  {name}: {detail}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
