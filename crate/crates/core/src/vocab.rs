//! Character vocabulary and the mapping between segmented sentences and
//! the token sequences the translation model reads and writes.
//!
//! A segmented sentence `我 爱 夏天` becomes the source `我 爱 夏 天 <eos>`
//! and the target `我 </s> 爱 </s> 夏 天 <eos>`, where `</s>` marks a word
//! boundary.

use std::collections::HashMap;
use std::fmt;
use std::fs;
use std::path::Path;

use sha2::{Digest, Sha256};

use crate::corpus::{split_lines, RawSentence, SegmentedSentence};
use crate::error::{Error, Result};

pub type TokenId = usize;

pub const PAD: TokenId = 0;
pub const UNK: TokenId = 1;
pub const EOS: TokenId = 2;
pub const SEP: TokenId = 3;
pub const NUM_RESERVED: usize = 4;

/// How an unknown character is rendered in decoded output.
pub const UNK_TEXT: &str = "UNK";

const FILE_MAGIC: &str = "CWSVOCAB";
const FILE_VERSION: u32 = 1;
const RESERVED_NAMES: [&str; NUM_RESERVED] = ["<pad>", "<unk>", "<eos>", "</s>"];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Token {
    Pad,
    Unk,
    Eos,
    Sep,
    Char(char),
}

impl fmt::Display for Token {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Token::Pad => f.write_str(RESERVED_NAMES[PAD]),
            Token::Unk => f.write_str(RESERVED_NAMES[UNK]),
            Token::Eos => f.write_str(RESERVED_NAMES[EOS]),
            Token::Sep => f.write_str(RESERVED_NAMES[SEP]),
            Token::Char(c) => write!(f, "{c}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Vocabulary {
    tokens: Vec<Token>,
    index: HashMap<char, TokenId>,
}

/// Source and target token ids for one training example.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EncodedPair {
    pub source: Vec<TokenId>,
    pub target: Vec<TokenId>,
}

impl EncodedPair {
    /// Number of predicted target tokens, EOS included.
    pub fn target_len(&self) -> usize {
        self.target.len()
    }
}

/// Counts character frequencies for [`VocabBuilder::build`].
#[derive(Clone, Debug, Default)]
pub struct VocabBuilder {
    counts: HashMap<char, usize>,
    sentences: usize,
}

impl VocabBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_chars(&mut self, chars: impl IntoIterator<Item = char>) {
        self.sentences += 1;
        for c in chars {
            *self.counts.entry(c).or_default() += 1;
        }
    }

    pub fn add_sentence(&mut self, s: &SegmentedSentence) {
        self.add_chars(s.chars());
    }

    /// Keeps characters seen at least `min_count` times, most frequent
    /// first (ties by code point), up to `max_size` tokens in total.
    pub fn build(&self, min_count: usize, max_size: usize) -> Result<Vocabulary> {
        if self.sentences == 0 {
            return Err(Error::Data("cannot build a vocabulary from an empty corpus".into()));
        }
        if min_count == 0 {
            return Err(Error::Config("min_count must be at least 1".into()));
        }
        if max_size < NUM_RESERVED {
            return Err(Error::Config(format!(
                "max_size must be at least {NUM_RESERVED} (the reserved tokens), got {max_size}"
            )));
        }
        let mut kept: Vec<(char, usize)> = self
            .counts
            .iter()
            .filter(|&(_, &n)| n >= min_count)
            .map(|(&c, &n)| (c, n))
            .collect();
        kept.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
        kept.truncate(max_size - NUM_RESERVED);
        Ok(Vocabulary::from_chars(kept.into_iter().map(|(c, _)| c)))
    }
}

pub fn build_vocab<'a>(
    corpus: impl IntoIterator<Item = &'a SegmentedSentence>,
    min_count: usize,
    max_size: usize,
) -> Result<Vocabulary> {
    let mut builder = VocabBuilder::new();
    for s in corpus {
        builder.add_sentence(s);
    }
    builder.build(min_count, max_size)
}

impl Vocabulary {
    /// Reserved tokens followed by `chars` in the given order. Duplicates
    /// after the first occurrence are ignored.
    pub fn from_chars(chars: impl IntoIterator<Item = char>) -> Self {
        let mut tokens = vec![Token::Pad, Token::Unk, Token::Eos, Token::Sep];
        let mut index = HashMap::new();
        for c in chars {
            if let std::collections::hash_map::Entry::Vacant(e) = index.entry(c) {
                e.insert(tokens.len());
                tokens.push(Token::Char(c));
            }
        }
        Vocabulary { tokens, index }
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    /// Always false: the reserved tokens are present.
    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn token(&self, id: TokenId) -> Option<Token> {
        self.tokens.get(id).copied()
    }

    pub fn id(&self, token: Token) -> Option<TokenId> {
        match token {
            Token::Pad => Some(PAD),
            Token::Unk => Some(UNK),
            Token::Eos => Some(EOS),
            Token::Sep => Some(SEP),
            Token::Char(c) => self.index.get(&c).copied(),
        }
    }

    /// Character id, or [`UNK`] when the character is not in the vocabulary.
    pub fn char_id(&self, c: char) -> TokenId {
        self.index.get(&c).copied().unwrap_or(UNK)
    }

    pub fn contains(&self, c: char) -> bool {
        self.index.contains_key(&c)
    }

    pub fn tokens(&self) -> &[Token] {
        &self.tokens
    }

    pub fn encode_source(&self, raw: &RawSentence) -> Vec<TokenId> {
        raw.chars()
            .iter()
            .map(|&c| self.char_id(c))
            .chain(std::iter::once(EOS))
            .collect()
    }

    pub fn encode_target(&self, s: &SegmentedSentence) -> Vec<TokenId> {
        let mut ids = Vec::with_capacity(s.char_len() + s.num_words());
        for (i, w) in s.words().iter().enumerate() {
            if i > 0 {
                ids.push(SEP);
            }
            ids.extend(w.chars().map(|c| self.char_id(c)));
        }
        ids.push(EOS);
        ids
    }

    /// Encodes a segmented sentence as a (source, target) pair.
    pub fn encode_pair(&self, s: &SegmentedSentence) -> Result<EncodedPair> {
        let raw = s
            .raw()
            .ok_or_else(|| Error::Data("cannot encode an empty sentence".into()))?;
        Ok(EncodedPair {
            source: self.encode_source(&raw),
            target: self.encode_target(s),
        })
    }

    /// Encodes a parallel example whose source characters may differ from
    /// the target's, as in joint segmentation and spelling correction.
    pub fn encode_parallel(&self, source: &RawSentence, target: &SegmentedSentence) -> Result<EncodedPair> {
        if target.is_empty() {
            return Err(Error::Data("cannot encode an empty target sentence".into()));
        }
        Ok(EncodedPair {
            source: self.encode_source(source),
            target: self.encode_target(target),
        })
    }

    /// Turns model output back into words: stops at the first EOS, splits on
    /// SEP and drops empty words. Unknown characters render as `UNK`.
    pub fn decode_output(&self, ids: &[TokenId]) -> Result<SegmentedSentence> {
        let mut words = Vec::new();
        let mut current = String::new();
        for &id in ids {
            let token = self.token(id).ok_or(Error::Index {
                what: "vocabulary",
                index: id,
                size: self.len(),
            })?;
            match token {
                Token::Eos => break,
                Token::Sep => {
                    if !current.is_empty() {
                        words.push(std::mem::take(&mut current));
                    }
                }
                Token::Pad => {}
                Token::Unk => current.push_str(UNK_TEXT),
                Token::Char(c) => current.push(c),
            }
        }
        if !current.is_empty() {
            words.push(current);
        }
        SegmentedSentence::new(words)
    }

    pub fn to_file_string(&self) -> String {
        let mut out = format!("{FILE_MAGIC} {FILE_VERSION} {}\n", self.len());
        for t in &self.tokens {
            out.push_str(&t.to_string());
            out.push('\n');
        }
        out
    }

    pub fn parse_file(bytes: &[u8]) -> Result<Self> {
        let lines = split_lines(bytes)?;
        let header = lines
            .first()
            .ok_or_else(|| Error::Data("vocabulary file is empty".into()))?;
        let fields: Vec<&str> = header.split(' ').collect();
        let size = match fields.as_slice() {
            [magic, version, size] if *magic == FILE_MAGIC => {
                if version.parse::<u32>().ok() != Some(FILE_VERSION) {
                    return Err(Error::Data(format!("unsupported vocabulary version {version:?}")));
                }
                size.parse::<usize>()
                    .map_err(|_| Error::Data(format!("bad vocabulary size {size:?}")))?
            }
            _ => return Err(Error::Data(format!("bad vocabulary header {header:?}"))),
        };
        let body = &lines[1..];
        if body.len() != size || size < NUM_RESERVED {
            return Err(Error::Data(format!(
                "vocabulary header declares {size} tokens but the file lists {}",
                body.len()
            )));
        }
        for (i, name) in RESERVED_NAMES.iter().enumerate() {
            if body[i] != *name {
                return Err(Error::Data(format!(
                    "line {}: expected reserved token {name}, found {:?}",
                    i + 2,
                    body[i]
                )));
            }
        }
        let mut chars = Vec::with_capacity(size - NUM_RESERVED);
        for (i, line) in body.iter().enumerate().skip(NUM_RESERVED) {
            let mut it = line.chars();
            match (it.next(), it.next()) {
                (Some(c), None) if !c.is_whitespace() => chars.push(c),
                _ => {
                    return Err(Error::Data(format!(
                        "line {}: expected a single character, found {line:?}",
                        i + 2
                    )))
                }
            }
        }
        let vocab = Vocabulary::from_chars(chars);
        if vocab.len() != size {
            return Err(Error::Data("vocabulary file lists a character twice".into()));
        }
        Ok(vocab)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_file_string()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
        Self::parse_file(&bytes)
    }

    /// SHA-256 of the vocabulary file bytes; checkpoints record it.
    pub fn fingerprint(&self) -> [u8; 32] {
        let digest = Sha256::digest(self.to_file_string().as_bytes());
        let mut out = [0u8; 32];
        out.copy_from_slice(&digest);
        out
    }
}

pub fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}
