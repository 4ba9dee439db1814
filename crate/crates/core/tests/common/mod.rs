#![allow(dead_code)]

use cws_core::corpus::{read_corpus, RawSentence, SegmentedSentence};
use cws_core::model::{EpochLog, Trainer};
use cws_core::score::score_corpus;
use cws_core::{EncodedPair, ModelConfig, OptimizerConfig, Result, SegmentOptions, Segmenter, Seq2Seq, Vocabulary};

pub fn toy_corpus() -> Vec<SegmentedSentence> {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/tests/data/toy.seg");
    let corpus = read_corpus(path).expect("toy corpus");
    assert_eq!(corpus.sentences.len(), 50);
    corpus.sentences
}

/// Greedy decode plus post-edit of every source, scored against `gold`.
pub fn corpus_f1(model: &Seq2Seq, vocab: &Vocabulary, sources: &[RawSentence], gold: &[SegmentedSentence]) -> f64 {
    let seg = Segmenter::new(model, vocab, SegmentOptions::default()).unwrap();
    let pred: Vec<_> = sources
        .iter()
        .zip(gold)
        .map(|(s, g)| {
            let out = seg.translate(s).unwrap();
            // Post-edit against the characters the gold segments.
            cws_core::post_edit(&g.raw().unwrap(), &out)
        })
        .collect();
    score_corpus(&pred, gold).unwrap().f1
}

pub struct Overfit {
    pub model: Seq2Seq,
    pub epochs: usize,
    pub f1: f64,
    pub log: Vec<EpochLog>,
}

/// Trains on `pairs` until the training-set F1 reaches `target` (checked
/// every `every` epochs) or `max_epochs` pass.
pub fn overfit(
    config: ModelConfig,
    optimizer: OptimizerConfig,
    pairs: &[EncodedPair],
    max_epochs: usize,
    every: usize,
    target: f64,
    eval: impl Fn(&Seq2Seq) -> f64,
) -> Result<Overfit> {
    let mut model = Seq2Seq::new(config)?;
    let mut log = Vec::new();
    let mut f1 = 0.0;
    let mut epochs = 0;
    {
        let mut trainer = Trainer::new(&mut model, optimizer, config.seed)?;
        while epochs < max_epochs {
            log.push(trainer.run_epoch(pairs)?);
            epochs += 1;
            if epochs % every == 0 || epochs == max_epochs {
                f1 = eval(trainer.model());
                if f1 >= target {
                    break;
                }
            }
        }
    }
    Ok(Overfit { model, epochs, f1, log })
}
