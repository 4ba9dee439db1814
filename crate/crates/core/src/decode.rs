//! Greedy and beam-search generation over [`Graph::decode_step`].

use std::cmp::Ordering;

use crate::error::{Error, Result};
use crate::model::{output_cap, Annotations, DecoderState, Graph, Seq2Seq};
use crate::tensor::log_softmax;
use crate::vocab::{TokenId, EOS};

/// A (possibly partial) output sequence.
#[derive(Clone, Debug, PartialEq)]
pub struct Hypothesis {
    pub tokens: Vec<TokenId>,
    /// Sum of the per-token log-probabilities.
    pub log_prob: f64,
    /// Whether the last token is EOS.
    pub finished: bool,
}

impl Hypothesis {
    /// Length-normalized score `log_prob / len`.
    pub fn score(&self) -> f64 {
        if self.tokens.is_empty() {
            0.0
        } else {
            self.log_prob / self.tokens.len() as f64
        }
    }
}

/// Number of source characters, not counting a trailing EOS.
pub fn source_len(source: &[TokenId]) -> usize {
    match source.last() {
        Some(&EOS) => source.len() - 1,
        _ => source.len(),
    }
}

/// Step cap for a source: `ceil(factor · T_x) + 5`.
pub fn decode_cap(source: &[TokenId], max_output_factor: f64) -> usize {
    output_cap(source_len(source), max_output_factor)
}

struct Live {
    hyp: Hypothesis,
    state: DecoderState,
}

struct Search<'g, 'm> {
    graph: &'g mut Graph<'m>,
    annotations: Annotations,
}

impl Search<'_, '_> {
    fn log_probs(&mut self, y_prev: TokenId, state: &DecoderState) -> Result<(Vec<f64>, DecoderState)> {
        let (out, next) = self.graph.decode_step(y_prev, state, &self.annotations)?;
        Ok((log_softmax(self.graph.value(out.logits).data()), next))
    }
}

fn argmax(xs: &[f64]) -> TokenId {
    let mut best = 0;
    for (i, &x) in xs.iter().enumerate() {
        if x > xs[best] {
            best = i;
        }
    }
    best
}

/// Greedy search with an explicit step cap.
pub fn greedy_search(model: &Seq2Seq, source: &[TokenId], cap: usize) -> Result<Hypothesis> {
    Ok(greedy_search_traced(model, source, cap)?.0)
}

/// Greedy search that also returns the attention weights of every step.
pub fn greedy_search_traced(
    model: &Seq2Seq,
    source: &[TokenId],
    cap: usize,
) -> Result<(Hypothesis, Vec<Vec<f64>>)> {
    let mut graph = model.graph();
    let annotations = graph.encode(source)?;
    let mut state = graph.initial_state(&annotations)?;
    let mut hyp = Hypothesis {
        tokens: Vec::new(),
        log_prob: 0.0,
        finished: false,
    };
    let mut trace = Vec::new();
    let mut y_prev = EOS;
    while hyp.tokens.len() < cap {
        let (out, next) = graph.decode_step(y_prev, &state, &annotations)?;
        trace.push(graph.value(out.attention).data().to_vec());
        let lp = log_softmax(graph.value(out.logits).data());
        let y = argmax(&lp);
        hyp.tokens.push(y);
        hyp.log_prob += lp[y];
        if y == EOS {
            hyp.finished = true;
            break;
        }
        state = next;
        y_prev = y;
    }
    Ok((hyp, trace))
}

/// Greedy decoding: the argmax token at every step, lowest id on ties,
/// until EOS or the length cap.
pub fn greedy_decode(model: &Seq2Seq, source: &[TokenId], max_output_factor: f64) -> Result<Vec<TokenId>> {
    Ok(greedy_search(model, source, decode_cap(source, max_output_factor))?.tokens)
}

struct Candidate {
    parent: usize,
    token: TokenId,
    token_lp: f64,
    total: f64,
}

fn rank(a: &Candidate, b: &Candidate) -> Ordering {
    b.total
        .total_cmp(&a.total)
        .then(a.parent.cmp(&b.parent))
        .then(b.token_lp.total_cmp(&a.token_lp))
        .then(a.token.cmp(&b.token))
}

fn best_of<'a>(hyps: impl IntoIterator<Item = &'a Hypothesis>) -> Option<&'a Hypothesis> {
    // First wins on equal scores.
    hyps.into_iter()
        .fold(None, |best: Option<&Hypothesis>, h| match best {
            Some(b) if b.score() >= h.score() => Some(b),
            _ => Some(h),
        })
}

/// Beam search with an explicit step cap.
///
/// Each step expands every live hypothesis by every token and keeps the
/// `width` best expansions by total log-probability. Expansions ending in EOS
/// leave the beam and are frozen; the beam is not refilled, so width 1
/// reproduces greedy search exactly. Among all frozen hypotheses and those
/// still live at the cap, the highest length-normalized score wins.
///
/// A plain beam of width `w` can end up with a worse normalized score than a
/// narrower one, because pruning is by total log-probability. The result for
/// `width` is therefore the best over plain beams of every width up to
/// `width` (the widest wins ties), which makes the score non-decreasing in
/// the width. The cost grows quadratically with the width.
pub fn beam_search(model: &Seq2Seq, source: &[TokenId], width: usize, cap: usize) -> Result<Hypothesis> {
    if width == 0 {
        return Err(Error::Config("beam width must be at least 1".into()));
    }
    let mut best = plain_beam(model, source, width, cap)?;
    for w in (1..width).rev() {
        let h = plain_beam(model, source, w, cap)?;
        if h.score() > best.score() {
            best = h;
        }
    }
    Ok(best)
}

/// A single beam pass of fixed width.
pub fn plain_beam(model: &Seq2Seq, source: &[TokenId], width: usize, cap: usize) -> Result<Hypothesis> {
    if width == 0 {
        return Err(Error::Config("beam width must be at least 1".into()));
    }
    let mut graph = model.graph();
    let annotations = graph.encode(source)?;
    let state = graph.initial_state(&annotations)?;
    let mut search = Search {
        graph: &mut graph,
        annotations,
    };

    let mut live = vec![Live {
        hyp: Hypothesis {
            tokens: Vec::new(),
            log_prob: 0.0,
            finished: false,
        },
        state,
    }];
    let mut finished: Vec<Hypothesis> = Vec::new();
    let mut step = 0;
    while !live.is_empty() && step < cap {
        step += 1;
        let mut candidates = Vec::new();
        let mut next_states = Vec::with_capacity(live.len());
        for (parent, l) in live.iter().enumerate() {
            let y_prev = l.hyp.tokens.last().copied().unwrap_or(EOS);
            let (lp, next) = search.log_probs(y_prev, &l.state)?;
            next_states.push(next);
            candidates.extend(lp.iter().enumerate().map(|(token, &token_lp)| Candidate {
                parent,
                token,
                token_lp,
                total: l.hyp.log_prob + token_lp,
            }));
        }
        candidates.sort_by(rank);
        candidates.truncate(width);

        let mut survivors = Vec::with_capacity(candidates.len());
        for c in candidates {
            let mut tokens = live[c.parent].hyp.tokens.clone();
            tokens.push(c.token);
            let hyp = Hypothesis {
                tokens,
                log_prob: c.total,
                finished: c.token == EOS,
            };
            if hyp.finished {
                finished.push(hyp);
            } else {
                survivors.push(Live {
                    hyp,
                    state: next_states[c.parent],
                });
            }
        }
        live = survivors;
    }

    let pool = finished.iter().chain(live.iter().map(|l| &l.hyp));
    Ok(best_of(pool).cloned().unwrap_or(Hypothesis {
        tokens: Vec::new(),
        log_prob: 0.0,
        finished: false,
    }))
}

/// Beam decoding with length-normalized final selection.
pub fn beam_decode(
    model: &Seq2Seq,
    source: &[TokenId],
    width: usize,
    max_output_factor: f64,
) -> Result<Vec<TokenId>> {
    Ok(beam_search(model, source, width, decode_cap(source, max_output_factor))?.tokens)
}
