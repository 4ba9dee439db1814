//! Synthetic spelling-error corpora for joint segmentation and correction.
//!
//! A fraction of the sentences in a segmented corpus get one dictionary word
//! swapped for a misspelled variant of the same length. The misspelled raw
//! text becomes the model input and the untouched segmentation the target.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::corpus::{read_lines, RawSentence, SegmentedSentence};
use crate::error::{Error, Result};

/// Correct word → misspelled variants, each with as many characters as the
/// correct word and different from it.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ConfusionDict {
    entries: BTreeMap<String, Vec<String>>,
}

impl ConfusionDict {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds a pair; repeating a known pair is a no-op.
    pub fn insert(&mut self, correct: &str, wrong: &str) -> Result<()> {
        if correct.is_empty() || wrong.is_empty() {
            return Err(Error::Data("dictionary words must be non-empty".into()));
        }
        if correct.chars().any(char::is_whitespace) || wrong.chars().any(char::is_whitespace) {
            return Err(Error::Data("dictionary words must not contain whitespace".into()));
        }
        if correct == wrong {
            return Err(Error::Data(format!("\"{correct}\" maps to itself")));
        }
        let (a, b) = (correct.chars().count(), wrong.chars().count());
        if a != b {
            return Err(Error::Data(format!(
                "\"{correct}\" has {a} characters but \"{wrong}\" has {b}"
            )));
        }
        let variants = self.entries.entry(correct.to_string()).or_default();
        if !variants.iter().any(|v| v == wrong) {
            variants.push(wrong.to_string());
        }
        Ok(())
    }

    pub fn variants(&self, correct: &str) -> Option<&[String]> {
        self.entries.get(correct).map(Vec::as_slice)
    }

    pub fn contains(&self, correct: &str) -> bool {
        self.entries.contains_key(correct)
    }

    /// Number of distinct correct words.
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &[String])> {
        self.entries.iter().map(|(k, v)| (k.as_str(), v.as_slice()))
    }
}

/// A dictionary line that parsed but broke a pair rule.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RejectedPair {
    pub line: usize,
    pub reason: String,
}

/// Parses `correct<TAB>wrong` lines. Blank lines are skipped. A line without
/// exactly two fields is an error; self-mappings and length mismatches are
/// returned as rejections and left out of the dictionary.
pub fn parse_dict(lines: &[impl AsRef<str>]) -> Result<(ConfusionDict, Vec<RejectedPair>)> {
    let mut dict = ConfusionDict::new();
    let mut rejected = Vec::new();
    for (i, line) in lines.iter().enumerate() {
        let line = line.as_ref().trim_end_matches('\r');
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').map(str::trim).collect();
        let [correct, wrong] = fields[..] else {
            return Err(Error::Data(format!(
                "line {}: expected \"correct<TAB>wrong\", found {} field(s)",
                i + 1,
                fields.len()
            )));
        };
        if correct.is_empty() || wrong.is_empty() {
            return Err(Error::Data(format!("line {}: empty field", i + 1)));
        }
        if let Err(Error::Data(reason)) = dict.insert(correct, wrong) {
            rejected.push(RejectedPair { line: i + 1, reason });
        }
    }
    Ok((dict, rejected))
}

pub fn load_dict(path: impl AsRef<Path>) -> Result<(ConfusionDict, Vec<RejectedPair>)> {
    let path = path.as_ref();
    parse_dict(&read_lines(path)?).map_err(|e| match e {
        Error::Data(msg) => Error::Data(format!("{}: {msg}", path.display())),
        other => other,
    })
}

/// One replaced word. Indices are 0-based.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CorruptionRecord {
    pub sentence: usize,
    pub word: usize,
    pub correct: String,
    pub wrong: String,
}

impl fmt::Display for CorruptionRecord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}\t{}\t{}\t{}", self.sentence, self.word, self.correct, self.wrong)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Corruption {
    /// The corpus with replacements applied, keeping the word boundaries.
    pub sentences: Vec<SegmentedSentence>,
    /// One record per modified sentence, in sentence order.
    pub records: Vec<CorruptionRecord>,
    /// `floor(rate · N)`.
    pub requested: usize,
    /// Sentences containing at least one dictionary word.
    pub eligible: usize,
}

impl Corruption {
    /// How many requested sentences could not be corrupted for lack of
    /// eligible ones.
    pub fn shortfall(&self) -> usize {
        self.requested - self.records.len()
    }
}

/// Number of sentences to corrupt. A hair of slack keeps decimal rates such
/// as 0.29 × 100 from flooring one short.
pub fn requested_count(rate: f64, n: usize) -> usize {
    ((rate * n as f64) + 1e-9).floor() as usize
}

/// Corrupts `min(floor(rate · N), eligible)` sentences.
///
/// The ChaCha8 stream seeded with `seed` is consumed in a fixed order: first
/// the choice of sentences (uniform, without replacement, among eligible
/// ones), then for each chosen sentence in ascending order a uniform word
/// among its dictionary words followed by a uniform variant of that word.
pub fn corrupt_corpus(
    corpus: &[SegmentedSentence],
    dict: &ConfusionDict,
    rate: f64,
    seed: u64,
) -> Result<Corruption> {
    if dict.is_empty() {
        return Err(Error::Config("confusion dictionary is empty".into()));
    }
    if !(0.0..=1.0).contains(&rate) {
        return Err(Error::Config(format!("corruption rate must be in [0, 1], got {rate}")));
    }
    let eligible: Vec<usize> = corpus
        .iter()
        .enumerate()
        .filter(|(_, s)| s.words().iter().any(|w| dict.contains(w)))
        .map(|(i, _)| i)
        .collect();
    let requested = requested_count(rate, corpus.len());
    let k = requested.min(eligible.len());

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut chosen: Vec<usize> = index::sample(&mut rng, eligible.len(), k)
        .into_iter()
        .map(|e| eligible[e])
        .collect();
    chosen.sort_unstable();

    let mut sentences = corpus.to_vec();
    let mut records = Vec::with_capacity(k);
    for s in chosen {
        let words = corpus[s].words();
        let slots: Vec<usize> = (0..words.len()).filter(|&w| dict.contains(&words[w])).collect();
        let word = slots[rng.random_range(0..slots.len())];
        let variants = dict.variants(&words[word]).expect("slot is a dictionary word");
        let wrong = variants[rng.random_range(0..variants.len())].clone();
        let mut new_words = words.to_vec();
        new_words[word] = wrong.clone();
        sentences[s] = SegmentedSentence::new(new_words)?;
        records.push(CorruptionRecord {
            sentence: s,
            word,
            correct: words[word].clone(),
            wrong,
        });
    }
    Ok(Corruption {
        sentences,
        records,
        requested,
        eligible: eligible.len(),
    })
}

/// Pairs each modified sentence's raw characters with the original gold
/// segmentation.
pub fn emit_training_pairs(
    modified: &[SegmentedSentence],
    original: &[SegmentedSentence],
) -> Result<Vec<(RawSentence, SegmentedSentence)>> {
    if modified.len() != original.len() {
        return Err(Error::Data(format!(
            "modified corpus has {} lines but the original has {}",
            modified.len(),
            original.len()
        )));
    }
    modified
        .iter()
        .zip(original)
        .enumerate()
        .map(|(i, (m, o))| {
            let raw = m
                .raw()
                .ok_or_else(|| Error::Data(format!("line {}: empty sentence", i + 1)))?;
            Ok((raw, o.clone()))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn seg(s: &str) -> SegmentedSentence {
        SegmentedSentence::parse(s)
    }

    const GOLD: &str = "在 这个 基础 上 ， 公安 机关 还 从 原料 采购 等 方面 加以 严格 控制 ， 统一 发放 “ 准 购 证 ” 。";

    #[test]
    fn dictionary_rules() {
        let (dict, rejected) = parse_dict(&["原料\t源料", "我\t我", "好\t不好", "", "原料\t源料", "原料\t元料"]).unwrap();
        assert_eq!(dict.len(), 1);
        assert_eq!(dict.variants("原料").unwrap(), ["源料", "元料"]);
        assert_eq!(rejected.iter().map(|r| r.line).collect::<Vec<_>>(), vec![2, 3]);
        assert!(parse_dict(&["原料"]).is_err());
        assert!(parse_dict(&["原料\t源料\t元料"]).is_err());
        assert!(matches!(
            corrupt_corpus(&[seg(GOLD)], &ConfusionDict::new(), 1.0, 1),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn replaces_the_dictionary_word() {
        let (dict, _) = parse_dict(&["原料\t源料"]).unwrap();
        let gold = seg(GOLD);
        let out = corrupt_corpus(std::slice::from_ref(&gold), &dict, 1.0, 7).unwrap();
        assert_eq!(
            out.records,
            vec![CorruptionRecord {
                sentence: 0,
                word: 9,
                correct: "原料".into(),
                wrong: "源料".into()
            }]
        );
        let pairs = emit_training_pairs(&out.sentences, std::slice::from_ref(&gold)).unwrap();
        let (src, tgt) = &pairs[0];
        assert_eq!(
            src.to_string(),
            "在这个基础上，公安机关还从源料采购等方面加以严格控制，统一发放“准购证”。"
        );
        assert_eq!(tgt, &gold);
        assert_eq!(out.records[0].to_string(), "0\t9\t原料\t源料");
    }

    fn toy() -> (Vec<SegmentedSentence>, ConfusionDict) {
        let corpus: Vec<_> = (0..40)
            .map(|i| match i % 3 {
                0 => seg("我 爱 夏天"),
                1 => seg("夏天 很 热 我 爱"),
                _ => seg("今天 下雨"),
            })
            .collect();
        let (dict, _) = parse_dict(&["夏天\t夏夭", "夏天\t下天", "爱\t受"]).unwrap();
        (corpus, dict)
    }

    #[test]
    fn counts_and_single_edits() {
        let (corpus, dict) = toy();
        let out = corrupt_corpus(&corpus, &dict, 0.5, 3).unwrap();
        assert_eq!(out.requested, 20);
        assert_eq!(out.eligible, 27);
        assert_eq!(out.records.len(), 20);
        for (i, (a, b)) in corpus.iter().zip(&out.sentences).enumerate() {
            let changed: Vec<usize> = (0..a.num_words()).filter(|&w| a.words()[w] != b.words()[w]).collect();
            match out.records.iter().find(|r| r.sentence == i) {
                Some(r) => {
                    assert_eq!(changed, vec![r.word]);
                    assert_eq!(a.char_len(), b.char_len());
                    let diff = a.chars().zip(b.chars()).filter(|(x, y)| x != y).count();
                    let pair_diff = r.correct.chars().zip(r.wrong.chars()).filter(|(x, y)| x != y).count();
                    assert_eq!(diff, pair_diff);
                }
                None => assert_eq!(a, b),
            }
        }

        let all = corrupt_corpus(&corpus, &dict, 1.0, 3).unwrap();
        assert_eq!(all.records.len(), 27);
        assert_eq!(all.shortfall(), 13);
    }

    #[test]
    fn rate_zero_and_determinism() {
        let (corpus, dict) = toy();
        let none = corrupt_corpus(&corpus, &dict, 0.0, 3).unwrap();
        assert!(none.records.is_empty());
        assert_eq!(none.sentences, corpus);
        let a = corrupt_corpus(&corpus, &dict, 0.5, 11).unwrap();
        let b = corrupt_corpus(&corpus, &dict, 0.5, 11).unwrap();
        assert_eq!(a, b);
        assert!(corrupt_corpus(&corpus, &dict, 1.5, 1).is_err());
        assert!(corrupt_corpus(&corpus, &dict, f64::NAN, 1).is_err());
    }

    #[test]
    fn decimal_rates_floor_as_written() {
        assert_eq!(requested_count(0.29, 100), 29);
        assert_eq!(requested_count(0.5, 7), 3);
        assert_eq!(requested_count(1.0, 0), 0);
    }

    #[test]
    fn pairs_need_equal_lengths() {
        assert!(emit_training_pairs(&[seg("我")], &[]).is_err());
        let p = emit_training_pairs(&[seg("我 爱")], &[seg("我 爱")]).unwrap();
        assert_eq!(p[0].0.to_string(), "我爱");
    }
}
