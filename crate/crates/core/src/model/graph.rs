use super::{GruParams, Seq2Seq};
use crate::error::{Error, Result};
use crate::tensor::{Tape, Tensor, Var};
use crate::vocab::{EncodedPair, TokenId, EOS};

/// Encoder output for one source sentence.
#[derive(Clone, Copy, Debug)]
pub struct Annotations {
    /// `T_x × 2H` matrix; row `j` is `[forward_j; backward_j]`.
    pub matrix: Var,
    /// `matrix · W_h`, shared by every attention step.
    pub projected: Var,
    /// Backward-RNN state at the first position, used to start the decoder.
    pub backward_first: Var,
    pub len: usize,
}

#[derive(Clone, Copy, Debug)]
pub struct DecoderState {
    pub hidden: Var,
    /// Number of tokens consumed so far.
    pub step: usize,
}

#[derive(Clone, Copy, Debug)]
pub struct StepOutput {
    pub context: Var,
    /// Attention weights over the source, length `T_x`.
    pub attention: Var,
    pub logits: Var,
    pub distribution: Var,
}

/// One forward computation over a model, recorded on its own tape.
pub struct Graph<'m> {
    model: &'m Seq2Seq,
    tape: Tape,
}

impl<'m> Graph<'m> {
    pub fn new(model: &'m Seq2Seq) -> Self {
        Graph {
            model,
            tape: Tape::new(),
        }
    }

    pub fn model(&self) -> &'m Seq2Seq {
        self.model
    }

    pub fn tape(&self) -> &Tape {
        &self.tape
    }

    pub fn into_tape(self) -> Tape {
        self.tape
    }

    pub fn value(&self, var: Var) -> &Tensor {
        self.tape.value(var)
    }

    fn check_token(&self, id: TokenId) -> Result<()> {
        let size = self.model.config.vocab_size;
        if id >= size {
            return Err(Error::Index {
                what: "vocabulary",
                index: id,
                size,
            });
        }
        Ok(())
    }

    fn param(&mut self, id: crate::tensor::ParamId) -> Var {
        self.tape.param(&self.model.store, id)
    }

    fn embed(&mut self, table: crate::tensor::ParamId, id: TokenId) -> Result<Var> {
        self.check_token(id)?;
        let table = self.param(table);
        self.tape.gather_row(table, id)
    }

    fn zero_state(&mut self) -> Var {
        self.tape.constant(Tensor::zeros(&[self.model.config.hidden_dim]))
    }

    fn gate(&mut self, x: Var, w: Var, h: Var, u: Var, b: Var) -> Result<Var> {
        let xw = self.tape.matmul(x, w)?;
        let hu = self.tape.matmul(h, u)?;
        let sum = self.tape.add(xw, hu)?;
        self.tape.add(sum, b)
    }

    fn gru_step(&mut self, cell: &GruParams, x: Var, h: Var) -> Result<Var> {
        let [w_z, u_z, b_z, w_r, u_r, b_r, w_n, u_n, b_n] = cell.ids().map(|id| self.param(id));
        let z_pre = self.gate(x, w_z, h, u_z, b_z)?;
        let z = self.tape.sigmoid(z_pre);
        let r_pre = self.gate(x, w_r, h, u_r, b_r)?;
        let r = self.tape.sigmoid(r_pre);
        let rh = self.tape.mul(r, h)?;
        let n_pre = self.gate(x, w_n, rh, u_n, b_n)?;
        let n = self.tape.tanh(n_pre);
        let delta = self.tape.sub(n, h)?;
        let step = self.tape.mul(z, delta)?;
        self.tape.add(h, step)
    }

    /// Runs the bidirectional encoder. Both directions start from a zero
    /// state.
    pub fn encode(&mut self, source: &[TokenId]) -> Result<Annotations> {
        if source.is_empty() {
            return Err(Error::Data("cannot encode an empty source sequence".into()));
        }
        let enc = self.model.encoder;
        let embedded = source
            .iter()
            .map(|&id| self.embed(enc.embedding, id))
            .collect::<Result<Vec<_>>>()?;

        let mut forward = Vec::with_capacity(source.len());
        let mut h = self.zero_state();
        for &x in &embedded {
            h = self.gru_step(&enc.forward, x, h)?;
            forward.push(h);
        }
        let mut backward = vec![h; source.len()];
        let mut h = self.zero_state();
        for (j, &x) in embedded.iter().enumerate().rev() {
            h = self.gru_step(&enc.backward, x, h)?;
            backward[j] = h;
        }

        let rows = forward
            .iter()
            .zip(&backward)
            .map(|(&f, &b)| self.tape.concat(f, b))
            .collect::<Result<Vec<_>>>()?;
        let matrix = self.tape.stack_rows(&rows)?;
        let w_h = self.param(self.model.decoder.attention.w_h);
        let projected = self.tape.matmul(matrix, w_h)?;
        Ok(Annotations {
            matrix,
            projected,
            backward_first: backward[0],
            len: source.len(),
        })
    }

    /// `s_0 = tanh(W_init · backward_1 + b_init)`.
    pub fn initial_state(&mut self, annotations: &Annotations) -> Result<DecoderState> {
        let w = self.param(self.model.decoder.init_w);
        let b = self.param(self.model.decoder.init_b);
        let pre = self.tape.matmul(annotations.backward_first, w)?;
        let pre = self.tape.add(pre, b)?;
        Ok(DecoderState {
            hidden: self.tape.tanh(pre),
            step: 0,
        })
    }

    /// Computes the attention weights `α_t` and context `c_t` for the state
    /// `s_{t-1}`. Returns `(context, weights)`.
    pub fn attend(&mut self, s_prev: &DecoderState, annotations: &Annotations) -> Result<(Var, Var)> {
        let att = self.model.decoder.attention;
        let w_s = self.param(att.w_s);
        let v = self.param(att.v);
        let query = self.tape.matmul(s_prev.hidden, w_s)?;
        let pre = self.tape.add_row(annotations.projected, query)?;
        let act = self.tape.tanh(pre);
        let scores = self.tape.matmul(act, v)?;
        let weights = self.tape.softmax(scores)?;
        let context = self.tape.matmul(weights, annotations.matrix)?;
        Ok((context, weights))
    }

    /// One decoder step: attend with `s_{t-1}`, update the recurrent state
    /// from `(embed(y_{t-1}), c_t, s_{t-1})`, and read out the distribution
    /// over the next token.
    pub fn decode_step(
        &mut self,
        y_prev: TokenId,
        s_prev: &DecoderState,
        annotations: &Annotations,
    ) -> Result<(StepOutput, DecoderState)> {
        let dec = self.model.decoder;
        let y_emb = self.embed(dec.embedding, y_prev)?;
        let (context, attention) = self.attend(s_prev, annotations)?;
        let input = self.tape.concat(y_emb, context)?;
        let hidden = self.gru_step(&dec.gru, input, s_prev.hidden)?;

        let features = self.tape.concat(hidden, y_emb)?;
        let features = self.tape.concat(features, context)?;
        let w = self.param(dec.readout_w);
        let b = self.param(dec.readout_b);
        let logits = self.tape.matmul(features, w)?;
        let logits = self.tape.add(logits, b)?;
        let distribution = self.tape.softmax(logits)?;
        Ok((
            StepOutput {
                context,
                attention,
                logits,
                distribution,
            },
            DecoderState {
                hidden,
                step: s_prev.step + 1,
            },
        ))
    }

    /// Teacher-forced negative log-likelihood of the target given the
    /// source, summed over every target token including the final EOS. The
    /// first step is fed EOS as its previous token.
    pub fn sequence_nll(&mut self, pair: &EncodedPair) -> Result<Var> {
        if pair.target.is_empty() {
            return Err(Error::Data("target sequence is empty".into()));
        }
        let annotations = self.encode(&pair.source)?;
        let mut state = self.initial_state(&annotations)?;
        let mut y_prev = EOS;
        let mut total: Option<Var> = None;
        for &y in &pair.target {
            self.check_token(y)?;
            let (out, next) = self.decode_step(y_prev, &state, &annotations)?;
            let loss = self.tape.cross_entropy(out.logits, y)?;
            total = Some(match total {
                Some(t) => self.tape.add(t, loss)?,
                None => loss,
            });
            state = next;
            y_prev = y;
        }
        Ok(total.expect("target is non-empty"))
    }
}
