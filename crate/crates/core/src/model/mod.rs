//! Attention-based encoder-decoder translating characters into characters
//! with word-boundary tokens.
//!
//! The encoder is a bidirectional GRU over character embeddings; each
//! source position gets an annotation `h_j = [forward_j; backward_j]`. The
//! decoder is a GRU whose input at step `t` is the embedding of the previous
//! output token together with a context vector `c_t`, the attention-weighted
//! sum of the annotations. Scores come from a one-hidden-layer feedforward
//! net `e_tj = vᵀ tanh(W_s s_{t-1} + W_h h_j)`. The next-token distribution
//! is a softmax over a linear readout of `[s_t; embed(y_{t-1}); c_t]`.

mod checkpoint;
mod graph;
mod train;

pub use checkpoint::{load_checkpoint, read_checkpoint, save_checkpoint, write_checkpoint};
pub use graph::{Annotations, DecoderState, Graph, StepOutput};
pub use train::{train, EpochLog, TrainConfig, Trainer};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::tensor::{ParamId, ParamStore, Tensor};

/// Range of the uniform weight initializer.
pub const INIT_SCALE: f64 = 0.08;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ModelConfig {
    pub embedding_dim: usize,
    pub hidden_dim: usize,
    pub vocab_size: usize,
    /// Output length cap is `ceil(max_output_factor * T_x) + 5` tokens.
    pub max_output_factor: f64,
    pub seed: u64,
}

impl ModelConfig {
    /// Small profile that trains on a laptop core in minutes.
    pub fn desk(vocab_size: usize) -> Self {
        ModelConfig {
            embedding_dim: 32,
            hidden_dim: 64,
            vocab_size,
            max_output_factor: 2.0,
            seed: 1,
        }
    }

    /// Full-size profile: 620-dim embeddings, 1000 hidden units.
    pub fn large(vocab_size: usize) -> Self {
        ModelConfig {
            embedding_dim: 620,
            hidden_dim: 1000,
            ..Self::desk(vocab_size)
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn attention_dim(&self) -> usize {
        self.hidden_dim
    }

    pub fn annotation_dim(&self) -> usize {
        2 * self.hidden_dim
    }

    pub fn readout_dim(&self) -> usize {
        self.hidden_dim + self.embedding_dim + self.annotation_dim()
    }

    pub fn validate(&self) -> Result<()> {
        if self.embedding_dim == 0 || self.hidden_dim == 0 {
            return Err(Error::Config("embedding and hidden sizes must be at least 1".into()));
        }
        if self.vocab_size < crate::vocab::NUM_RESERVED {
            return Err(Error::Config(format!(
                "vocabulary size {} is smaller than the reserved token count",
                self.vocab_size
            )));
        }
        if !(self.max_output_factor >= 0.0 && self.max_output_factor.is_finite()) {
            return Err(Error::Config(format!(
                "max_output_factor must be a finite non-negative number, got {}",
                self.max_output_factor
            )));
        }
        Ok(())
    }
}

/// Weights of one gated recurrent unit:
/// `z = σ(x W_z + h U_z + b_z)`, `r = σ(x W_r + h U_r + b_r)`,
/// `ñ = tanh(x W_n + (r ⊙ h) U_n + b_n)`, `h' = h + z ⊙ (ñ - h)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GruParams {
    pub w_z: ParamId,
    pub u_z: ParamId,
    pub b_z: ParamId,
    pub w_r: ParamId,
    pub u_r: ParamId,
    pub b_r: ParamId,
    pub w_n: ParamId,
    pub u_n: ParamId,
    pub b_n: ParamId,
}

impl GruParams {
    fn register(store: &mut ParamStore, prefix: &str, input: usize, hidden: usize) -> Self {
        let mut add = |name: &str, shape: &[usize]| store.add(format!("{prefix}.{name}"), Tensor::zeros(shape));
        GruParams {
            w_z: add("w_z", &[input, hidden]),
            u_z: add("u_z", &[hidden, hidden]),
            b_z: add("b_z", &[hidden]),
            w_r: add("w_r", &[input, hidden]),
            u_r: add("u_r", &[hidden, hidden]),
            b_r: add("b_r", &[hidden]),
            w_n: add("w_n", &[input, hidden]),
            u_n: add("u_n", &[hidden, hidden]),
            b_n: add("b_n", &[hidden]),
        }
    }

    pub fn ids(&self) -> [ParamId; 9] {
        [
            self.w_z, self.u_z, self.b_z, self.w_r, self.u_r, self.b_r, self.w_n, self.u_n, self.b_n,
        ]
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EncoderParams {
    pub embedding: ParamId,
    pub forward: GruParams,
    pub backward: GruParams,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct AttentionParams {
    pub w_s: ParamId,
    pub w_h: ParamId,
    pub v: ParamId,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DecoderParams {
    pub init_w: ParamId,
    pub init_b: ParamId,
    pub embedding: ParamId,
    pub attention: AttentionParams,
    pub gru: GruParams,
    pub readout_w: ParamId,
    pub readout_b: ParamId,
}

/// A complete model: configuration plus every weight.
///
/// Parameters are registered in a fixed order, which is also the order they
/// are written to checkpoints:
///
/// 1. `src_embedding` `[V, E]`
/// 2. `enc_fwd.*` and 3. `enc_bwd.*`, each `w_z u_z b_z w_r u_r b_r w_n u_n b_n`
/// 4. `dec_init.w` `[H, H]`, `dec_init.b` `[H]`
/// 5. `tgt_embedding` `[V, E]`
/// 6. `attn.w_s` `[H, A]`, `attn.w_h` `[2H, A]`, `attn.v` `[A]`
/// 7. `dec_gru.*` with input width `E + 2H`
/// 8. `readout.w` `[H + E + 2H, V]`, `readout.b` `[V]`
#[derive(Clone, Debug)]
pub struct Seq2Seq {
    config: ModelConfig,
    store: ParamStore,
    encoder: EncoderParams,
    decoder: DecoderParams,
}

impl Seq2Seq {
    /// All-zero weights. Such a model predicts the uniform distribution.
    pub fn zeros(config: ModelConfig) -> Result<Self> {
        config.validate()?;
        let (v, e, h, a) = (
            config.vocab_size,
            config.embedding_dim,
            config.hidden_dim,
            config.attention_dim(),
        );
        let mut store = ParamStore::new();
        let src_embedding = store.add("src_embedding", Tensor::zeros(&[v, e]));
        let forward = GruParams::register(&mut store, "enc_fwd", e, h);
        let backward = GruParams::register(&mut store, "enc_bwd", e, h);
        let init_w = store.add("dec_init.w", Tensor::zeros(&[h, h]));
        let init_b = store.add("dec_init.b", Tensor::zeros(&[h]));
        let tgt_embedding = store.add("tgt_embedding", Tensor::zeros(&[v, e]));
        let attention = AttentionParams {
            w_s: store.add("attn.w_s", Tensor::zeros(&[h, a])),
            w_h: store.add("attn.w_h", Tensor::zeros(&[2 * h, a])),
            v: store.add("attn.v", Tensor::zeros(&[a])),
        };
        let gru = GruParams::register(&mut store, "dec_gru", e + 2 * h, h);
        let readout_w = store.add("readout.w", Tensor::zeros(&[config.readout_dim(), v]));
        let readout_b = store.add("readout.b", Tensor::zeros(&[v]));
        Ok(Seq2Seq {
            config,
            store,
            encoder: EncoderParams {
                embedding: src_embedding,
                forward,
                backward,
            },
            decoder: DecoderParams {
                init_w,
                init_b,
                embedding: tgt_embedding,
                attention,
                gru,
                readout_w,
                readout_b,
            },
        })
    }

    /// Weights uniform in `[-INIT_SCALE, INIT_SCALE]` drawn from a PRNG
    /// seeded with `config.seed`; biases start at zero.
    pub fn new(config: ModelConfig) -> Result<Self> {
        Self::with_init_scale(config, INIT_SCALE)
    }

    pub fn with_init_scale(config: ModelConfig, scale: f64) -> Result<Self> {
        let mut model = Self::zeros(config)?;
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        for p in model.store.iter_mut() {
            if p.value.rank() == 1 && p.name.contains(".b") {
                continue;
            }
            for w in p.value.data_mut() {
                *w = rng.random_range(-scale..=scale);
            }
        }
        Ok(model)
    }

    pub fn config(&self) -> &ModelConfig {
        &self.config
    }

    pub fn params(&self) -> &ParamStore {
        &self.store
    }

    pub fn params_mut(&mut self) -> &mut ParamStore {
        &mut self.store
    }

    pub fn encoder(&self) -> &EncoderParams {
        &self.encoder
    }

    pub fn decoder(&self) -> &DecoderParams {
        &self.decoder
    }

    /// Starts a fresh computation graph over this model's weights.
    pub fn graph(&self) -> Graph<'_> {
        Graph::new(self)
    }

    /// Upper bound on generated tokens for a source of `source_len`
    /// characters.
    pub fn output_cap(&self, source_len: usize) -> usize {
        output_cap(source_len, self.config.max_output_factor)
    }
}

pub fn output_cap(source_len: usize, max_output_factor: f64) -> usize {
    (max_output_factor * source_len as f64).ceil() as usize + 5
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parameter_layout_matches_config() {
        let config = ModelConfig {
            embedding_dim: 4,
            hidden_dim: 5,
            vocab_size: 7,
            max_output_factor: 2.0,
            seed: 3,
        };
        let m = Seq2Seq::zeros(config).unwrap();
        let names: Vec<_> = m.params().iter().map(|p| p.name.as_str()).collect();
        assert_eq!(names.len(), 1 + 9 + 9 + 2 + 1 + 3 + 9 + 2);
        assert_eq!(names[0], "src_embedding");
        assert_eq!(*names.last().unwrap(), "readout.b");
        assert_eq!(m.params().value(m.decoder().readout_w).shape(), &[5 + 4 + 10, 7]);
        assert_eq!(m.params().value(m.decoder().gru.w_z).shape(), &[4 + 10, 5]);
        assert_eq!(m.params().value(m.decoder().attention.w_h).shape(), &[10, 5]);
    }

    #[test]
    fn init_is_seeded_and_bounded() {
        let config = ModelConfig::desk(20);
        let a = Seq2Seq::new(config).unwrap();
        let b = Seq2Seq::new(config).unwrap();
        let c = Seq2Seq::new(config.with_seed(2)).unwrap();
        let flat = |m: &Seq2Seq| m.params().iter().flat_map(|p| p.value.data().to_vec()).collect::<Vec<_>>();
        assert_eq!(flat(&a), flat(&b));
        assert_ne!(flat(&a), flat(&c));
        assert!(flat(&a).iter().all(|w| w.abs() <= INIT_SCALE));
        assert!(a.params().value(a.decoder().readout_b).data().iter().all(|&w| w == 0.0));
    }

    #[test]
    fn presets() {
        let p = ModelConfig::large(7190);
        assert_eq!((p.embedding_dim, p.hidden_dim), (620, 1000));
        let d = ModelConfig::desk(100);
        assert_eq!((d.embedding_dim, d.hidden_dim), (32, 64));
    }

    #[test]
    fn rejects_bad_configs() {
        let mut c = ModelConfig::desk(10);
        c.hidden_dim = 0;
        assert!(Seq2Seq::zeros(c).is_err());
        assert!(Seq2Seq::zeros(ModelConfig::desk(3)).is_err());
    }

    #[test]
    fn cap_formula() {
        assert_eq!(output_cap(4, 2.0), 13);
        assert_eq!(output_cap(3, 1.5), 10);
    }
}
