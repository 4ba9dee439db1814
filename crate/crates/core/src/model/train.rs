use std::fmt;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::Seq2Seq;
use crate::error::{Error, Result};
use crate::tensor::{OptimizerConfig, OptimizerState};
use crate::vocab::EncodedPair;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrainConfig {
    pub epochs: usize,
    pub optimizer: OptimizerConfig,
    /// Seeds the per-epoch shuffle of the training pairs.
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            epochs: 10,
            optimizer: OptimizerConfig::default(),
            seed: 1,
        }
    }
}

/// Summary of one pass over the training data.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EpochLog {
    /// 1-based epoch number.
    pub epoch: usize,
    /// Mean negative log-likelihood per target token, measured on each pair
    /// just before its update.
    pub mean_nll: f64,
    pub updates: usize,
}

impl fmt::Display for EpochLog {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}\t{:.6}", self.epoch, self.mean_nll)
    }
}

/// Sentence-level (batch size 1) training loop state.
pub struct Trainer<'m> {
    model: &'m mut Seq2Seq,
    optimizer: OptimizerState,
    rng: ChaCha8Rng,
    epoch: usize,
    step: usize,
}

impl<'m> Trainer<'m> {
    pub fn new(model: &'m mut Seq2Seq, optimizer: OptimizerConfig, seed: u64) -> Result<Self> {
        let optimizer = OptimizerState::new(optimizer, model.params())?;
        Ok(Trainer {
            model,
            optimizer,
            rng: ChaCha8Rng::seed_from_u64(seed),
            epoch: 0,
            step: 0,
        })
    }

    pub fn model(&self) -> &Seq2Seq {
        self.model
    }

    pub fn epochs_done(&self) -> usize {
        self.epoch
    }

    /// One gradient update on a single pair. Returns the pair's loss before
    /// the update.
    pub fn train_step(&mut self, pair: &EncodedPair) -> Result<f64> {
        self.step += 1;
        let mut graph = self.model.graph();
        let loss_var = graph.sequence_nll(pair)?;
        let tape = graph.into_tape();
        let loss = tape.value(loss_var).data()[0];
        if !loss.is_finite() {
            return Err(Error::Diverged {
                epoch: self.epoch + 1,
                step: self.step,
                loss,
            });
        }
        let store = self.model.params_mut();
        store.reset_gradients();
        tape.backward(loss_var, store)?;
        if !store.grad_norm().is_finite() {
            return Err(Error::Diverged {
                epoch: self.epoch + 1,
                step: self.step,
                loss,
            });
        }
        self.optimizer.step(store);
        Ok(loss)
    }

    /// Visits every pair once in a freshly shuffled order.
    pub fn run_epoch(&mut self, pairs: &[EncodedPair]) -> Result<EpochLog> {
        if pairs.is_empty() {
            return Err(Error::Data("training corpus is empty".into()));
        }
        let mut order: Vec<usize> = (0..pairs.len()).collect();
        order.shuffle(&mut self.rng);
        let mut total = 0.0;
        let mut tokens = 0;
        for &i in &order {
            total += self.train_step(&pairs[i])?;
            tokens += pairs[i].target_len();
        }
        self.epoch += 1;
        Ok(EpochLog {
            epoch: self.epoch,
            mean_nll: total / tokens as f64,
            updates: pairs.len(),
        })
    }
}

/// Trains for `config.epochs` epochs and returns the per-epoch log.
pub fn train(model: &mut Seq2Seq, pairs: &[EncodedPair], config: &TrainConfig) -> Result<Vec<EpochLog>> {
    let mut trainer = Trainer::new(model, config.optimizer, config.seed)?;
    (0..config.epochs).map(|_| trainer.run_epoch(pairs)).collect()
}
