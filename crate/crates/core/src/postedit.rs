//! Repairs decoder output so that it segments exactly the input characters.
//!
//! The decoder may drop characters, invent extra ones, or emit `UNK` for
//! characters outside the vocabulary. Post-editing aligns the output with the
//! original sentence by longest common subsequence, carries the BMES labels
//! of aligned characters over to the original, labels the rest `X`, and
//! resolves every `X` by a fixed rule table.

use std::fmt;

use crate::corpus::{RawSentence, SegmentedSentence};
use crate::error::{Error, Result};
use crate::vocab::UNK_TEXT;

/// Position of a character within its word. `X` marks an original character
/// with no aligned counterpart and never survives into final output.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SegLabel {
    B,
    M,
    E,
    S,
    X,
}

impl fmt::Display for SegLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let c = match self {
            SegLabel::B => 'B',
            SegLabel::M => 'M',
            SegLabel::E => 'E',
            SegLabel::S => 'S',
            SegLabel::X => 'X',
        };
        write!(f, "{c}")
    }
}

/// One position of decoder output: a character, or an `UNK` placeholder that
/// stands for exactly one unknown character.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Symbol {
    Char(char),
    Unk,
}

impl Symbol {
    /// `UNK` matches nothing, not even another `UNK`.
    pub fn matches(self, c: char) -> bool {
        self == Symbol::Char(c)
    }
}

/// Splits a word into symbols, reading each occurrence of `UNK` as a single
/// placeholder.
pub fn parse_symbols(word: &str) -> Vec<Symbol> {
    let mut out = Vec::new();
    let mut rest = word;
    while !rest.is_empty() {
        if let Some(tail) = rest.strip_prefix(UNK_TEXT) {
            out.push(Symbol::Unk);
            rest = tail;
        } else {
            let c = rest.chars().next().expect("non-empty");
            out.push(Symbol::Char(c));
            rest = &rest[c.len_utf8()..];
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LabeledSequence {
    chars: Vec<char>,
    labels: Vec<SegLabel>,
}

impl LabeledSequence {
    pub fn new(chars: Vec<char>, labels: Vec<SegLabel>) -> Result<Self> {
        if chars.len() != labels.len() {
            return Err(Error::Contract(format!(
                "{} characters but {} labels",
                chars.len(),
                labels.len()
            )));
        }
        Ok(LabeledSequence { chars, labels })
    }

    pub fn chars(&self) -> &[char] {
        &self.chars
    }

    pub fn labels(&self) -> &[SegLabel] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.chars.len()
    }

    pub fn is_empty(&self) -> bool {
        self.chars.is_empty()
    }
}

/// Labels for words of the given lengths: `S` for a single character,
/// otherwise `B M… E`.
fn labels_for_lengths(lengths: impl IntoIterator<Item = usize>) -> Vec<SegLabel> {
    let mut labels = Vec::new();
    for n in lengths {
        match n {
            0 => {}
            1 => labels.push(SegLabel::S),
            n => {
                labels.push(SegLabel::B);
                labels.extend(std::iter::repeat_n(SegLabel::M, n - 2));
                labels.push(SegLabel::E);
            }
        }
    }
    labels
}

pub fn labels_from_words(s: &SegmentedSentence) -> LabeledSequence {
    let chars = s.chars().collect();
    let labels = labels_for_lengths(s.words().iter().map(|w| w.chars().count()));
    LabeledSequence { chars, labels }
}

/// Checks the BMES grammar: `B` and `M` continue with `M` or `E`, `E` and `S`
/// continue with `B` or `S` or end the sequence.
pub fn check_labels(labels: &[SegLabel]) -> Result<()> {
    use SegLabel::*;
    let mut inside = false;
    for (position, &l) in labels.iter().enumerate() {
        let ok = match l {
            X => {
                return Err(Error::Label {
                    position,
                    reason: "unresolved X".into(),
                })
            }
            B | S => !inside,
            M | E => inside,
        };
        if !ok {
            let prev = if position == 0 {
                "the start".to_string()
            } else {
                labels[position - 1].to_string()
            };
            return Err(Error::Label {
                position,
                reason: format!("{l} cannot follow {prev}"),
            });
        }
        inside = matches!(l, B | M);
    }
    if inside {
        return Err(Error::Label {
            position: labels.len() - 1,
            reason: "sequence ends inside a word".into(),
        });
    }
    Ok(())
}

pub fn words_from_labels(seq: &LabeledSequence) -> Result<SegmentedSentence> {
    check_labels(&seq.labels)?;
    let mut words = Vec::new();
    let mut word = String::new();
    for (&c, &l) in seq.chars.iter().zip(&seq.labels) {
        word.push(c);
        if matches!(l, SegLabel::E | SegLabel::S) {
            words.push(std::mem::take(&mut word));
        }
    }
    SegmentedSentence::new(words)
}

/// Index pairs `(i, j)` of system symbols aligned to original characters,
/// strictly increasing in both coordinates.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Alignment {
    pub pairs: Vec<(usize, usize)>,
}

impl Alignment {
    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }
}

/// Longest common subsequence alignment.
///
/// Fills the suffix table and walks it forward from the start, taking a match
/// whenever the symbols agree and otherwise advancing in the original unless
/// advancing in the system output keeps a strictly longer subsequence.
pub fn lcs_align(sys: &[Symbol], ori: &[char]) -> Alignment {
    let (n, m) = (sys.len(), ori.len());
    let w = m + 1;
    // table[i * w + j] = LCS length of sys[i..] and ori[j..]
    let mut table = vec![0u32; (n + 1) * w];
    for i in (0..n).rev() {
        for j in (0..m).rev() {
            table[i * w + j] = if sys[i].matches(ori[j]) {
                table[(i + 1) * w + j + 1] + 1
            } else {
                table[(i + 1) * w + j].max(table[i * w + j + 1])
            };
        }
    }
    let mut pairs = Vec::with_capacity(table[0] as usize);
    let (mut i, mut j) = (0, 0);
    while i < n && j < m {
        if sys[i].matches(ori[j]) {
            pairs.push((i, j));
            i += 1;
            j += 1;
        } else if table[i * w + j + 1] >= table[(i + 1) * w + j] {
            j += 1;
        } else {
            i += 1;
        }
    }
    Alignment { pairs }
}

/// Replaces every `X` left to right. With `p` the resolved label before the
/// `X` (or the start) and `n` the next non-`X` label after it (or the end):
///
/// | p          | n           | result |
/// |------------|-------------|--------|
/// | B, M       | M, E        | M      |
/// | B, M       | B, S, end   | E      |
/// | start, E, S| M, E        | B      |
/// | start, E, S| B, S, end   | S      |
pub fn resolve_x(labels: &[SegLabel]) -> Vec<SegLabel> {
    use SegLabel::*;
    let mut out = labels.to_vec();
    for k in 0..out.len() {
        if out[k] != X {
            continue;
        }
        let p_open = k > 0 && matches!(out[k - 1], B | M);
        let n_open = out[k + 1..].iter().find(|&&l| l != X).is_some_and(|&l| matches!(l, M | E));
        out[k] = match (p_open, n_open) {
            (true, true) => M,
            (true, false) => E,
            (false, true) => B,
            (false, false) => S,
        };
    }
    out
}

/// Makes an X-free label sequence well-formed. A word boundary is placed
/// after position `i` when label `i` closes a word (`E`, `S`) or label `i+1`
/// opens one (`B`, `S`); the labels are then rebuilt from those boundaries.
/// Well-formed input is returned unchanged.
pub fn repair(labels: &[SegLabel]) -> Vec<SegLabel> {
    use SegLabel::*;
    let mut lengths = Vec::new();
    let mut run = 0;
    for (i, &l) in labels.iter().enumerate() {
        run += 1;
        let closes = matches!(l, E | S);
        let next_opens = labels.get(i + 1).is_none_or(|&n| matches!(n, B | S));
        if closes || next_opens {
            lengths.push(run);
            run = 0;
        }
    }
    labels_for_lengths(lengths)
}

/// Labels every original character from the system output, as described in
/// the module documentation. The result is well-formed.
pub fn post_edit_labels(s_ori: &RawSentence, s_seg: &SegmentedSentence) -> Vec<SegLabel> {
    let ori = s_ori.chars();
    let mut sys = Vec::new();
    let mut lengths = Vec::new();
    for w in s_seg.words() {
        let symbols = parse_symbols(w);
        lengths.push(symbols.len());
        sys.extend(symbols);
    }
    let sys_labels = labels_for_lengths(lengths);

    let positional = sys.len() == ori.len()
        && sys.iter().zip(ori).all(|(s, &c)| *s == Symbol::Unk || s.matches(c));
    if positional {
        return sys_labels;
    }

    let mut labels = vec![SegLabel::X; ori.len()];
    for (i, j) in lcs_align(&sys, ori).pairs {
        labels[j] = sys_labels[i];
    }
    repair(&resolve_x(&labels))
}

/// Segments exactly the characters of `s_ori`, following `s_seg` wherever it
/// agrees with them.
pub fn post_edit(s_ori: &RawSentence, s_seg: &SegmentedSentence) -> SegmentedSentence {
    let labels = post_edit_labels(s_ori, s_seg);
    let seq = LabeledSequence {
        chars: s_ori.chars().to_vec(),
        labels,
    };
    words_from_labels(&seq).expect("post-edited labels are well-formed")
}
