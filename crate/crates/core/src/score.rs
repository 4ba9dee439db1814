//! Word-level precision, recall and F1 by matching character intervals.

use std::collections::HashSet;
use std::fmt;
use std::ops::{Add, AddAssign};
use std::path::Path;

use crate::corpus::{read_lines, SegmentedSentence};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Counts {
    pub matched: usize,
    pub predicted: usize,
    pub gold: usize,
}

impl Add for Counts {
    type Output = Counts;

    fn add(self, o: Counts) -> Counts {
        Counts {
            matched: self.matched + o.matched,
            predicted: self.predicted + o.predicted,
            gold: self.gold + o.gold,
        }
    }
}

impl AddAssign for Counts {
    fn add_assign(&mut self, o: Counts) {
        *self = *self + o;
    }
}

impl Counts {
    pub fn precision(&self) -> f64 {
        ratio(self.matched, self.predicted)
    }

    pub fn recall(&self) -> f64 {
        ratio(self.matched, self.gold)
    }

    pub fn f1(&self) -> f64 {
        let (p, r) = (self.precision(), self.recall());
        if p + r > 0.0 {
            2.0 * p * r / (p + r)
        } else {
            0.0
        }
    }
}

fn ratio(a: usize, b: usize) -> f64 {
    if b == 0 {
        0.0
    } else {
        a as f64 / b as f64
    }
}

/// Micro-averaged corpus score plus the per-sentence counts it sums.
#[derive(Clone, Debug, PartialEq)]
pub struct ScoreReport {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub total: Counts,
    pub sentences: Vec<Counts>,
}

impl ScoreReport {
    pub fn from_sentences(sentences: Vec<Counts>) -> Self {
        let total = sentences.iter().copied().fold(Counts::default(), Add::add);
        ScoreReport {
            precision: total.precision(),
            recall: total.recall(),
            f1: total.f1(),
            total,
            sentences,
        }
    }
}

impl fmt::Display for ScoreReport {
    /// `P\tR\tF`, then the counts, then the (unfilled) weighted-score slots.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{:.4}\t{:.4}\t{:.4}", self.precision, self.recall, self.f1)?;
        writeln!(
            f,
            "matched={}\tpredicted={}\tgold={}",
            self.total.matched, self.total.predicted, self.total.gold
        )?;
        write!(f, "weighted\t-\t-\t-")
    }
}

/// Half-open character interval `[start, end)` of every word.
pub fn intervals(s: &SegmentedSentence) -> Vec<(usize, usize)> {
    let mut start = 0;
    s.words()
        .iter()
        .map(|w| {
            let end = start + w.chars().count();
            let iv = (start, end);
            start = end;
            iv
        })
        .collect()
}

fn check_same_chars(pred: &SegmentedSentence, gold: &SegmentedSentence) -> Result<()> {
    let mut p = pred.chars();
    let mut g = gold.chars();
    let mut offset = 0;
    loop {
        match (p.next(), g.next()) {
            (None, None) => return Ok(()),
            (a, b) if a == b => offset += 1,
            (a, b) => {
                let show = |c: Option<char>| c.map_or("end of sentence".to_string(), |c| format!("'{c}'"));
                return Err(Error::Data(format!(
                    "prediction and gold differ at character offset {offset} ({} vs {}); run post-editing against the original text first",
                    show(a),
                    show(b)
                )));
            }
        }
    }
}

pub fn score_sentence(pred: &SegmentedSentence, gold: &SegmentedSentence) -> Result<Counts> {
    check_same_chars(pred, gold)?;
    let gold_iv: HashSet<_> = intervals(gold).into_iter().collect();
    let pred_iv = intervals(pred);
    Ok(Counts {
        matched: pred_iv.iter().filter(|iv| gold_iv.contains(iv)).count(),
        predicted: pred_iv.len(),
        gold: gold_iv.len(),
    })
}

/// Scores parallel corpora line by line and micro-averages the result.
pub fn score_corpus(pred: &[SegmentedSentence], gold: &[SegmentedSentence]) -> Result<ScoreReport> {
    if pred.len() != gold.len() {
        return Err(Error::Data(format!(
            "prediction has {} lines but gold has {}",
            pred.len(),
            gold.len()
        )));
    }
    if gold.is_empty() {
        return Err(Error::Data("nothing to score: both corpora are empty".into()));
    }
    let sentences = pred
        .iter()
        .zip(gold)
        .enumerate()
        .map(|(i, (p, g))| score_sentence(p, g).map_err(|e| Error::Data(format!("line {}: {e}", i + 1))))
        .collect::<Result<Vec<_>>>()?;
    Ok(ScoreReport::from_sentences(sentences))
}

/// Reads both files (a blank line is an empty sentence) and scores them.
pub fn score_files(pred: impl AsRef<Path>, gold: impl AsRef<Path>) -> Result<ScoreReport> {
    let parse = |lines: Vec<String>| lines.iter().map(|l| SegmentedSentence::parse(l)).collect::<Vec<_>>();
    let p = parse(read_lines(pred)?);
    let g = parse(read_lines(gold)?);
    score_corpus(&p, &g)
}
