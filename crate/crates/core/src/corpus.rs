//! Streaming corpus access and seeded, balanced per-circumstance sampling.
//!
//! Sampling is reservoir sampling (Algorithm R) over the corpus stream, one
//! reservoir per (circumstance, stratum). Each reservoir draws from a
//! ChaCha8 generator seeded with `SHA-256(seed_le || circumstance_id || stratum)`,
//! so a sample depends only on the corpus bytes, the seed and the
//! circumstance, never on the platform or which other circumstances were
//! sampled in the same pass.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::jsonl::{self, JsonlError};

pub const DEFAULT_SAMPLE_POSITIVES: usize = 100;
pub const DEFAULT_SAMPLE_NEGATIVES: usize = 100;

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error(transparent)]
    File(#[from] JsonlError),
    #[error("corpus line {line}: {message}")]
    MalformedLine { line: usize, message: String },
    #[error("circumstance {0:?} has no labeled records in the corpus")]
    UnknownCircumstance(String),
    #[error("circumstance {0:?} has no positive records; sample cannot be evaluated")]
    ZeroPositives(String),
    #[error("sample sizes must be positive (got {n_pos} positive, {n_neg} negative)")]
    InvalidRequest { n_pos: usize, n_neg: usize },
    #[error("sample file {}: {message}", .path.display())]
    MalformedSample { path: PathBuf, message: String },
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LabeledNarrative {
    pub narrative_id: String,
    pub text: String,
    pub labels: BTreeMap<String, bool>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MalformedPolicy {
    #[default]
    Abort,
    Skip,
}

/// Line-by-line corpus reader. Hashes every byte it reads so the corpus
/// digest is available once the stream is exhausted.
pub struct CorpusReader<R> {
    reader: R,
    buf: Vec<u8>,
    line: usize,
    policy: MalformedPolicy,
    skipped: usize,
    seen: HashSet<String>,
    hasher: Sha256,
    failed: bool,
}

pub fn load_corpus(path: &Path, policy: MalformedPolicy) -> Result<CorpusReader<BufReader<File>>, CorpusError> {
    Ok(CorpusReader::new(BufReader::new(jsonl::open(path)?), policy))
}

impl<R: BufRead> CorpusReader<R> {
    pub fn new(reader: R, policy: MalformedPolicy) -> Self {
        Self {
            reader,
            buf: Vec::new(),
            line: 0,
            policy,
            skipped: 0,
            seen: HashSet::new(),
            hasher: Sha256::new(),
            failed: false,
        }
    }

    pub fn skipped(&self) -> usize {
        self.skipped
    }

    /// Hex SHA-256 of all bytes consumed so far.
    pub fn sha256(&self) -> String {
        hex::encode(self.hasher.clone().finalize())
    }

    fn parse_line(&mut self) -> Result<LabeledNarrative, String> {
        let text = std::str::from_utf8(&self.buf).map_err(|e| format!("invalid UTF-8: {e}"))?;
        let record: LabeledNarrative = serde_json::from_str(text).map_err(|e| e.to_string())?;
        if record.narrative_id.is_empty() {
            return Err("empty narrative_id".into());
        }
        if !self.seen.insert(record.narrative_id.clone()) {
            return Err(format!("duplicate narrative_id {:?}", record.narrative_id));
        }
        Ok(record)
    }
}

impl<R: BufRead> Iterator for CorpusReader<R> {
    type Item = Result<LabeledNarrative, CorpusError>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.failed {
            return None;
        }
        loop {
            self.buf.clear();
            match self.reader.read_until(b'\n', &mut self.buf) {
                Ok(0) => return None,
                Ok(_) => {}
                Err(e) => {
                    self.failed = true;
                    return Some(Err(e.into()));
                }
            }
            self.hasher.update(&self.buf);
            self.line += 1;
            if self.buf.iter().all(u8::is_ascii_whitespace) {
                continue;
            }
            match self.parse_line() {
                Ok(record) => return Some(Ok(record)),
                Err(_) if self.policy == MalformedPolicy::Skip => self.skipped += 1,
                Err(message) => {
                    self.failed = true;
                    return Some(Err(CorpusError::MalformedLine {
                        line: self.line,
                        message,
                    }));
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SampleEntry {
    pub narrative_id: String,
    pub label: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SampleHeader {
    pub circumstance_id: String,
    pub seed: u64,
    pub corpus_sha256: String,
    pub requested_pos: usize,
    pub requested_neg: usize,
    pub under_sampled: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub config_hash: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EvaluationSample {
    pub header: SampleHeader,
    /// Positives then negatives, each in corpus order.
    pub entries: Vec<SampleEntry>,
}

impl EvaluationSample {
    pub fn circumstance_id(&self) -> &str {
        &self.header.circumstance_id
    }

    pub fn under_sampled(&self) -> bool {
        self.header.under_sampled
    }

    pub fn positive_count(&self) -> usize {
        self.entries.iter().filter(|e| e.label).count()
    }

    pub fn negative_count(&self) -> usize {
        self.entries.len() - self.positive_count()
    }

    pub fn write(&self, path: &Path) -> std::io::Result<()> {
        let mut out = serde_json::to_string(&self.header)?;
        out.push('\n');
        for e in &self.entries {
            out.push_str(&serde_json::to_string(e)?);
            out.push('\n');
        }
        File::create(path)?.write_all(out.as_bytes())
    }

    pub fn read(path: &Path) -> Result<Self, CorpusError> {
        let malformed = |message: String| CorpusError::MalformedSample {
            path: path.to_path_buf(),
            message,
        };
        let mut lines = BufReader::new(jsonl::open(path)?).lines().enumerate();
        let header_line = lines
            .next()
            .ok_or_else(|| malformed("empty sample file".into()))?
            .1?;
        let header: SampleHeader =
            serde_json::from_str(&header_line).map_err(|e| malformed(format!("line 1: {e}")))?;
        let mut entries = Vec::new();
        let mut seen = HashSet::new();
        for (index, line) in lines {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let entry: SampleEntry =
                serde_json::from_str(&line).map_err(|e| malformed(format!("line {}: {e}", index + 1)))?;
            if !seen.insert(entry.narrative_id.clone()) {
                return Err(malformed(format!("duplicate narrative_id {:?}", entry.narrative_id)));
            }
            entries.push(entry);
        }
        Ok(Self { header, entries })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SampleRequest {
    pub n_pos: usize,
    pub n_neg: usize,
    pub seed: u64,
}

impl Default for SampleRequest {
    fn default() -> Self {
        Self {
            n_pos: DEFAULT_SAMPLE_POSITIVES,
            n_neg: DEFAULT_SAMPLE_NEGATIVES,
            seed: 42,
        }
    }
}

fn stratum_rng(seed: u64, circumstance_id: &str, positive: bool) -> ChaCha8Rng {
    let mut h = Sha256::new();
    h.update(seed.to_le_bytes());
    h.update(circumstance_id.as_bytes());
    h.update([u8::from(positive)]);
    ChaCha8Rng::from_seed(h.finalize().into())
}

struct Reservoir {
    capacity: usize,
    seen: u64,
    items: Vec<(u64, String)>,
    rng: ChaCha8Rng,
}

impl Reservoir {
    fn new(capacity: usize, rng: ChaCha8Rng) -> Self {
        Self {
            capacity,
            seen: 0,
            items: Vec::with_capacity(capacity),
            rng,
        }
    }

    fn offer(&mut self, position: u64, id: &str) {
        if self.items.len() < self.capacity {
            self.items.push((position, id.to_string()));
        } else {
            let j = self.rng.gen_range(0..=self.seen);
            if (j as usize) < self.capacity {
                self.items[j as usize] = (position, id.to_string());
            }
        }
        self.seen += 1;
    }

    fn into_sorted(mut self) -> Vec<(u64, String)> {
        self.items.sort_unstable();
        self.items
    }
}

/// Reservoirs for several circumstances filled in one corpus pass.
pub struct StratifiedSampler {
    request: SampleRequest,
    strata: Vec<(String, Reservoir, Reservoir)>,
    position: u64,
}

impl StratifiedSampler {
    pub fn new<I, S>(circumstance_ids: I, request: SampleRequest) -> Result<Self, CorpusError>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        if request.n_pos == 0 || request.n_neg == 0 {
            return Err(CorpusError::InvalidRequest {
                n_pos: request.n_pos,
                n_neg: request.n_neg,
            });
        }
        let strata = circumstance_ids
            .into_iter()
            .map(|id| {
                let id = id.into();
                let pos = Reservoir::new(request.n_pos, stratum_rng(request.seed, &id, true));
                let neg = Reservoir::new(request.n_neg, stratum_rng(request.seed, &id, false));
                (id, pos, neg)
            })
            .collect();
        Ok(Self {
            request,
            strata,
            position: 0,
        })
    }

    pub fn observe(&mut self, record: &LabeledNarrative) {
        for (id, pos, neg) in &mut self.strata {
            match record.labels.get(id.as_str()) {
                Some(true) => pos.offer(self.position, &record.narrative_id),
                Some(false) => neg.offer(self.position, &record.narrative_id),
                None => {}
            }
        }
        self.position += 1;
    }

    /// One result per requested circumstance, in request order.
    pub fn finish(self, corpus_sha256: &str) -> Vec<(String, Result<EvaluationSample, CorpusError>)> {
        let request = self.request;
        self.strata
            .into_iter()
            .map(|(id, pos, neg)| {
                let result = if pos.seen == 0 && neg.seen == 0 {
                    Err(CorpusError::UnknownCircumstance(id.clone()))
                } else if pos.seen == 0 {
                    Err(CorpusError::ZeroPositives(id.clone()))
                } else {
                    let under_sampled =
                        (pos.seen as usize) < request.n_pos || (neg.seen as usize) < request.n_neg;
                    let entries = pos
                        .into_sorted()
                        .into_iter()
                        .map(|(_, narrative_id)| SampleEntry { narrative_id, label: true })
                        .chain(
                            neg.into_sorted()
                                .into_iter()
                                .map(|(_, narrative_id)| SampleEntry { narrative_id, label: false }),
                        )
                        .collect();
                    Ok(EvaluationSample {
                        header: SampleHeader {
                            circumstance_id: id.clone(),
                            seed: request.seed,
                            corpus_sha256: corpus_sha256.to_string(),
                            requested_pos: request.n_pos,
                            requested_neg: request.n_neg,
                            under_sampled,
                            config_hash: None,
                        },
                        entries,
                    })
                };
                (id, result)
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CorpusPass {
    pub records: usize,
    pub skipped: usize,
    pub corpus_sha256: String,
}

/// Samples every listed circumstance in a single streaming pass.
pub fn sample_corpus<R: BufRead>(
    reader: CorpusReader<R>,
    circumstance_ids: &[String],
    request: SampleRequest,
) -> Result<(Vec<(String, Result<EvaluationSample, CorpusError>)>, CorpusPass), CorpusError> {
    let mut sampler = StratifiedSampler::new(circumstance_ids.iter().cloned(), request)?;
    let mut reader = reader;
    let mut records = 0;
    for record in reader.by_ref() {
        sampler.observe(&record?);
        records += 1;
    }
    let pass = CorpusPass {
        records,
        skipped: reader.skipped(),
        corpus_sha256: reader.sha256(),
    };
    Ok((sampler.finish(&pass.corpus_sha256), pass))
}

pub fn balanced_sample<R: BufRead>(
    reader: CorpusReader<R>,
    circumstance_id: &str,
    request: SampleRequest,
) -> Result<EvaluationSample, CorpusError> {
    let (mut results, _) = sample_corpus(reader, &[circumstance_id.to_string()], request)?;
    results.pop().expect("one result per circumstance").1
}

/// Texts for the given narrative ids, read in one pass.
pub fn collect_texts<R: BufRead>(
    reader: CorpusReader<R>,
    wanted: &HashSet<String>,
) -> Result<HashMap<String, String>, CorpusError> {
    let mut out = HashMap::with_capacity(wanted.len());
    for record in reader {
        let record = record?;
        if wanted.contains(&record.narrative_id) {
            out.insert(record.narrative_id, record.text);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Cursor;

    fn line(id: &str, label: Option<bool>) -> String {
        let labels = match label {
            Some(l) => serde_json::json!({ "c": l }),
            None => serde_json::json!({}),
        };
        serde_json::json!({"narrative_id": id, "text": format!("text {id}"), "labels": labels}).to_string()
    }

    fn corpus(n_pos: usize, n_neg: usize) -> String {
        let mut out = String::new();
        for i in 0..n_pos.max(n_neg) {
            if i < n_pos {
                out.push_str(&line(&format!("p{i}"), Some(true)));
                out.push('\n');
            }
            if i < n_neg {
                out.push_str(&line(&format!("n{i}"), Some(false)));
                out.push('\n');
            }
        }
        out
    }

    fn reader(text: &str, policy: MalformedPolicy) -> CorpusReader<Cursor<Vec<u8>>> {
        CorpusReader::new(Cursor::new(text.as_bytes().to_vec()), policy)
    }

    fn sample(text: &str, n_pos: usize, n_neg: usize, seed: u64) -> Result<EvaluationSample, CorpusError> {
        balanced_sample(reader(text, MalformedPolicy::Abort), "c", SampleRequest { n_pos, n_neg, seed })
    }

    #[test]
    fn streams_in_order() {
        let text = format!("{}\n{}\n{}\n", line("a", None), line("b", Some(true)), line("c", Some(false)));
        let ids: Vec<String> = reader(&text, MalformedPolicy::Abort)
            .map(|r| r.unwrap().narrative_id)
            .collect();
        assert_eq!(ids, ["a", "b", "c"]);
    }

    #[test]
    fn malformed_line_strict_and_lenient() {
        let text = format!("{}\n{{oops\n{}\n", line("a", None), line("c", None));
        let results: Vec<_> = reader(&text, MalformedPolicy::Abort).collect();
        assert_eq!(results.len(), 2);
        assert!(matches!(results[1], Err(CorpusError::MalformedLine { line: 2, .. })));

        let mut r = reader(&text, MalformedPolicy::Skip);
        let ok: Vec<_> = r.by_ref().collect::<Result<_, _>>().unwrap();
        assert_eq!(ok.len(), 2);
        assert_eq!(r.skipped(), 1);
    }

    #[test]
    fn duplicate_ids_are_malformed() {
        let text = format!("{}\n{}\n", line("a", None), line("a", None));
        let results: Vec<_> = reader(&text, MalformedPolicy::Abort).collect();
        assert!(matches!(results[1], Err(CorpusError::MalformedLine { line: 2, .. })));
    }

    #[test]
    fn hash_covers_all_bytes() {
        let text = corpus(3, 3);
        let mut r = reader(&text, MalformedPolicy::Abort);
        r.by_ref().for_each(drop);
        assert_eq!(r.sha256(), crate::digest::sha256_hex(text.as_bytes()));
    }

    #[test]
    fn balanced_when_strata_suffice() {
        let s = sample(&corpus(500, 5000), 100, 100, 42).unwrap();
        assert_eq!((s.positive_count(), s.negative_count()), (100, 100));
        assert!(!s.under_sampled());
        let ids: HashSet<_> = s.entries.iter().map(|e| &e.narrative_id).collect();
        assert_eq!(ids.len(), 200);
    }

    #[test]
    fn short_stratum_is_flagged() {
        let s = sample(&corpus(18, 5000), 100, 100, 42).unwrap();
        assert_eq!((s.positive_count(), s.negative_count()), (18, 100));
        assert!(s.under_sampled());
    }

    #[test]
    fn seeds_are_deterministic_and_distinct() {
        let text = corpus(500, 5000);
        let a = sample(&text, 100, 100, 42).unwrap();
        let b = sample(&text, 100, 100, 42).unwrap();
        let c = sample(&text, 100, 100, 43).unwrap();
        assert_eq!(a, b);
        assert_ne!(a.entries, c.entries);
    }

    #[test]
    fn sampling_is_independent_of_other_circumstances() {
        let text = corpus(50, 50);
        let request = SampleRequest { n_pos: 5, n_neg: 5, seed: 7 };
        let alone = balanced_sample(reader(&text, MalformedPolicy::Abort), "c", request).unwrap();
        let (together, _) = sample_corpus(
            reader(&text, MalformedPolicy::Abort),
            &["other".to_string(), "c".to_string()],
            request,
        )
        .unwrap();
        assert_eq!(together[1].1.as_ref().unwrap(), &alone);
        assert!(matches!(together[0].1, Err(CorpusError::UnknownCircumstance(_))));
    }

    #[test]
    fn errors() {
        assert!(matches!(sample(&corpus(0, 10), 5, 5, 1), Err(CorpusError::ZeroPositives(_))));
        let text = format!("{}\n", line("a", None));
        assert!(matches!(sample(&text, 5, 5, 1), Err(CorpusError::UnknownCircumstance(_))));
        assert!(matches!(sample(&corpus(5, 5), 0, 5, 1), Err(CorpusError::InvalidRequest { .. })));
    }

    #[test]
    fn uniform_selection() {
        // 10 positives, choose 5, 1000 seeds: each ~ Binomial(1000, 0.5).
        let text = corpus(10, 10);
        let mut counts: HashMap<String, u32> = HashMap::new();
        for seed in 0..1000 {
            let s = sample(&text, 5, 5, seed).unwrap();
            for e in s.entries.iter().filter(|e| e.label) {
                *counts.entry(e.narrative_id.clone()).or_default() += 1;
            }
        }
        let sigma = (1000.0f64 * 0.25).sqrt();
        assert_eq!(counts.len(), 10);
        for (id, c) in counts {
            assert!((f64::from(c) - 500.0).abs() <= 3.0 * sigma, "{id}: {c}");
        }
    }

    #[test]
    fn sample_file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("s.jsonl");
        let s = sample(&corpus(20, 20), 5, 5, 9).unwrap();
        s.write(&path).unwrap();
        assert_eq!(EvaluationSample::read(&path).unwrap(), s);
    }
}
