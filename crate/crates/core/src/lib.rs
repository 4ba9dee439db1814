//! Chinese word segmentation as character-to-character translation.
//!
//! An attention-based encoder-decoder reads a raw sentence one character at a
//! time and writes the same characters back with `</s>` separators between
//! words. A post-editing pass then forces the output to reproduce the input
//! characters exactly.

pub mod error;
pub mod tensor;
pub mod corpus;
pub mod vocab;
pub mod model;
pub mod decode;
pub mod postedit;
pub mod score;
pub mod csc;
pub mod segment;

pub use corpus::{Corpus, RawSentence, SegmentedSentence};
pub use csc::{ConfusionDict, Corruption, CorruptionRecord};
pub use decode::{beam_decode, greedy_decode, Hypothesis};
pub use error::{CheckpointError, Error, Result};
pub use model::{EpochLog, ModelConfig, Seq2Seq, TrainConfig};
pub use postedit::{post_edit, LabeledSequence, SegLabel};
pub use score::{Counts, ScoreReport};
pub use segment::{SegmentOptions, Segmenter};
pub use tensor::{OptimizerConfig, Tensor};
pub use vocab::{EncodedPair, Token, TokenId, Vocabulary};
