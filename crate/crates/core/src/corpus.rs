//! Sentences and the one-sentence-per-line corpus format.
//!
//! Corpus files are UTF-8 with LF line endings. A segmented line holds words
//! separated by a single ASCII space; a raw line holds the unspaced
//! characters of a sentence.

use std::fmt;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};

/// An unsegmented sentence: a non-empty run of non-whitespace characters.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct RawSentence(Vec<char>);

impl RawSentence {
    pub fn new(text: &str) -> Result<Self> {
        Self::from_chars(text.chars().collect())
    }

    pub fn from_chars(chars: Vec<char>) -> Result<Self> {
        if chars.is_empty() {
            return Err(Error::Data("raw sentence is empty".into()));
        }
        if let Some(pos) = chars.iter().position(|c| c.is_whitespace()) {
            return Err(Error::Data(format!(
                "raw sentence contains whitespace at character {pos}"
            )));
        }
        Ok(RawSentence(chars))
    }

    /// Removes all whitespace from `line`, returning `None` if nothing is left.
    pub fn from_line(line: &str) -> Option<Self> {
        let chars: Vec<char> = line.chars().filter(|c| !c.is_whitespace()).collect();
        (!chars.is_empty()).then_some(RawSentence(chars))
    }

    pub fn chars(&self) -> &[char] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl fmt::Display for RawSentence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.iter().try_for_each(|c| write!(f, "{c}"))
    }
}

/// A sentence split into words.
///
/// Words are non-empty and whitespace-free. A sentence with no words is
/// allowed: it is what a degenerate model output decodes to.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct SegmentedSentence {
    words: Vec<String>,
}

impl SegmentedSentence {
    pub fn new<S: Into<String>>(words: impl IntoIterator<Item = S>) -> Result<Self> {
        let words: Vec<String> = words.into_iter().map(Into::into).collect();
        for (i, w) in words.iter().enumerate() {
            if w.is_empty() {
                return Err(Error::Data(format!("word {i} is empty")));
            }
            if w.chars().any(char::is_whitespace) {
                return Err(Error::Data(format!("word {i} ({w:?}) contains whitespace")));
            }
        }
        Ok(SegmentedSentence { words })
    }

    /// Splits on any run of whitespace.
    pub fn parse(line: &str) -> Self {
        SegmentedSentence {
            words: line.split_whitespace().map(str::to_owned).collect(),
        }
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    pub fn into_words(self) -> Vec<String> {
        self.words
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn num_words(&self) -> usize {
        self.words.len()
    }

    pub fn chars(&self) -> impl Iterator<Item = char> + '_ {
        self.words.iter().flat_map(|w| w.chars())
    }

    pub fn char_len(&self) -> usize {
        self.words.iter().map(|w| w.chars().count()).sum()
    }

    /// The concatenated characters, or `None` for an empty sentence.
    pub fn raw(&self) -> Option<RawSentence> {
        let chars: Vec<char> = self.chars().collect();
        (!chars.is_empty()).then_some(RawSentence(chars))
    }
}

impl fmt::Display for SegmentedSentence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, w) in self.words.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            f.write_str(w)?;
        }
        Ok(())
    }
}

/// A line that had to be changed or dropped while reading a corpus.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Warning {
    BlankLine { line: usize },
    Normalized { line: usize },
}

#[derive(Clone, Debug, Default)]
pub struct Corpus {
    pub sentences: Vec<SegmentedSentence>,
    pub warnings: Vec<Warning>,
}

impl Corpus {
    pub fn blank_lines(&self) -> usize {
        self.warnings
            .iter()
            .filter(|w| matches!(w, Warning::BlankLine { .. }))
            .count()
    }

    pub fn normalized_lines(&self) -> usize {
        self.warnings
            .iter()
            .filter(|w| matches!(w, Warning::Normalized { .. }))
            .count()
    }
}

/// Splits file contents into lines, failing on invalid UTF-8 with the
/// 1-based line number. A trailing newline does not produce an empty line.
pub fn split_lines(bytes: &[u8]) -> Result<Vec<&str>> {
    if bytes.is_empty() {
        return Ok(vec![]);
    }
    let body = bytes.strip_suffix(b"\n").unwrap_or(bytes);
    body.split(|&b| b == b'\n')
        .enumerate()
        .map(|(i, line)| {
            std::str::from_utf8(line)
                .map_err(|e| Error::Data(format!("line {}: invalid UTF-8 ({e})", i + 1)))
        })
        .collect()
}

pub fn read_lines(path: impl AsRef<Path>) -> Result<Vec<String>> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    let lines = split_lines(&bytes).map_err(|e| match e {
        Error::Data(msg) => Error::Data(format!("{}: {msg}", path.display())),
        other => other,
    })?;
    Ok(lines.into_iter().map(str::to_owned).collect())
}

/// Parses segmented corpus text. Blank lines are skipped and lines whose
/// separators are not single spaces are normalized; both are reported.
pub fn parse_corpus(text_lines: &[impl AsRef<str>]) -> Corpus {
    let mut corpus = Corpus::default();
    for (i, line) in text_lines.iter().enumerate() {
        let line = line.as_ref();
        let sentence = SegmentedSentence::parse(line);
        if sentence.is_empty() {
            corpus.warnings.push(Warning::BlankLine { line: i + 1 });
            continue;
        }
        if sentence.to_string() != line {
            corpus.warnings.push(Warning::Normalized { line: i + 1 });
        }
        corpus.sentences.push(sentence);
    }
    corpus
}

pub fn read_corpus(path: impl AsRef<Path>) -> Result<Corpus> {
    Ok(parse_corpus(&read_lines(path)?))
}

pub fn write_lines<I, D>(lines: I, path: impl AsRef<Path>) -> Result<()>
where
    I: IntoIterator<Item = D>,
    D: fmt::Display,
{
    let path = path.as_ref();
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    for line in lines {
        writeln!(out, "{line}").map_err(|e| Error::io(path, e))?;
    }
    out.flush().map_err(|e| Error::io(path, e))
}

pub fn write_corpus<'a>(
    sentences: impl IntoIterator<Item = &'a SegmentedSentence>,
    path: impl AsRef<Path>,
) -> Result<()> {
    write_lines(sentences, path)
}
