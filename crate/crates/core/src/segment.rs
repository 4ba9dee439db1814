//! Raw sentence in, segmented sentence out.

use crate::corpus::{RawSentence, SegmentedSentence};
use crate::decode::{beam_decode, greedy_decode};
use crate::error::{Error, Result};
use crate::model::Seq2Seq;
use crate::postedit::post_edit;
use crate::vocab::Vocabulary;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SegmentOptions {
    /// 1 selects greedy decoding.
    pub beam_width: usize,
    pub post_edit: bool,
    pub max_output_factor: f64,
}

impl Default for SegmentOptions {
    fn default() -> Self {
        SegmentOptions {
            beam_width: 1,
            post_edit: true,
            max_output_factor: 2.0,
        }
    }
}

/// Translates one sentence and, unless disabled, post-edits the result
/// against the input characters.
pub struct Segmenter<'a> {
    model: &'a Seq2Seq,
    vocab: &'a Vocabulary,
    options: SegmentOptions,
}

impl<'a> Segmenter<'a> {
    pub fn new(model: &'a Seq2Seq, vocab: &'a Vocabulary, options: SegmentOptions) -> Result<Self> {
        if vocab.len() != model.config().vocab_size {
            return Err(Error::Config(format!(
                "vocabulary has {} entries but the model expects {}",
                vocab.len(),
                model.config().vocab_size
            )));
        }
        if options.beam_width == 0 {
            return Err(Error::Config("beam width must be at least 1".into()));
        }
        if !(options.max_output_factor.is_finite() && options.max_output_factor > 0.0) {
            return Err(Error::Config(format!(
                "max output factor must be positive, got {}",
                options.max_output_factor
            )));
        }
        Ok(Segmenter { model, vocab, options })
    }

    /// The raw model translation, before post-editing.
    pub fn translate(&self, raw: &RawSentence) -> Result<SegmentedSentence> {
        let source = self.vocab.encode_source(raw);
        let o = &self.options;
        let ids = if o.beam_width == 1 {
            greedy_decode(self.model, &source, o.max_output_factor)?
        } else {
            beam_decode(self.model, &source, o.beam_width, o.max_output_factor)?
        };
        self.vocab.decode_output(&ids)
    }

    pub fn segment(&self, raw: &RawSentence) -> Result<SegmentedSentence> {
        let out = self.translate(raw)?;
        Ok(if self.options.post_edit {
            post_edit(raw, &out)
        } else {
            out
        })
    }
}
