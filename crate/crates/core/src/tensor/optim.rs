use super::{ParamStore, Tensor};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Algorithm {
    Sgd,
    Adam { beta1: f64, beta2: f64, epsilon: f64 },
}

impl Algorithm {
    pub fn adam() -> Self {
        Algorithm::Adam {
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OptimizerConfig {
    pub algorithm: Algorithm,
    pub learning_rate: f64,
    /// Global gradient-norm ceiling applied before every update.
    pub clip_norm: Option<f64>,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        OptimizerConfig {
            algorithm: Algorithm::adam(),
            learning_rate: 1e-3,
            clip_norm: Some(5.0),
        }
    }
}

impl OptimizerConfig {
    pub fn sgd(learning_rate: f64) -> Self {
        OptimizerConfig {
            algorithm: Algorithm::Sgd,
            learning_rate,
            clip_norm: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::Config(format!(
                "learning rate must be positive, got {}",
                self.learning_rate
            )));
        }
        if let Some(c) = self.clip_norm {
            if c.is_nan() || c <= 0.0 {
                return Err(Error::Config(format!("clip norm must be positive, got {c}")));
            }
        }
        if let Algorithm::Adam {
            beta1,
            beta2,
            epsilon,
        } = self.algorithm
        {
            if !(0.0..1.0).contains(&beta1) || !(0.0..1.0).contains(&beta2) || epsilon.is_nan() || epsilon <= 0.0 {
                return Err(Error::Config(format!(
                    "adam needs 0 <= beta < 1 and epsilon > 0, got beta1={beta1} beta2={beta2} epsilon={epsilon}"
                )));
            }
        }
        Ok(())
    }
}

/// Per-parameter optimizer memory.
///
/// Moment buffers are laid out in the parameter registration order of the
/// store the state was created for.
#[derive(Clone, Debug)]
pub struct OptimizerState {
    config: OptimizerConfig,
    step: u64,
    first_moment: Vec<Tensor>,
    second_moment: Vec<Tensor>,
}

impl OptimizerState {
    pub fn new(config: OptimizerConfig, store: &ParamStore) -> Result<Self> {
        config.validate()?;
        let (first_moment, second_moment) = match config.algorithm {
            Algorithm::Sgd => (vec![], vec![]),
            Algorithm::Adam { .. } => {
                let zeros: Vec<Tensor> = store.iter().map(|p| Tensor::zeros(p.value.shape())).collect();
                (zeros.clone(), zeros)
            }
        };
        Ok(OptimizerState {
            config,
            step: 0,
            first_moment,
            second_moment,
        })
    }

    pub fn config(&self) -> &OptimizerConfig {
        &self.config
    }

    pub fn steps(&self) -> u64 {
        self.step
    }

    /// Applies one update using the gradients currently held by `store`.
    /// The stored gradients are not modified.
    pub fn step(&mut self, store: &mut ParamStore) {
        self.step += 1;
        let scale = match self.config.clip_norm {
            Some(max) => {
                let norm = store.grad_norm();
                if norm > max {
                    max / norm
                } else {
                    1.0
                }
            }
            None => 1.0,
        };
        let lr = self.config.learning_rate;
        match self.config.algorithm {
            Algorithm::Sgd => {
                for p in store.iter_mut() {
                    for (w, g) in p.value.data_mut().iter_mut().zip(p.grad.data()) {
                        *w -= lr * scale * g;
                    }
                }
            }
            Algorithm::Adam {
                beta1,
                beta2,
                epsilon,
            } => {
                let t = self.step as i32;
                let correction1 = 1.0 - beta1.powi(t);
                let correction2 = 1.0 - beta2.powi(t);
                for ((p, m), v) in store
                    .iter_mut()
                    .zip(&mut self.first_moment)
                    .zip(&mut self.second_moment)
                {
                    let grad = p.grad.data();
                    let weights = p.value.data_mut();
                    for (((w, &g), m), v) in weights
                        .iter_mut()
                        .zip(grad)
                        .zip(m.data_mut())
                        .zip(v.data_mut())
                    {
                        let g = g * scale;
                        *m = beta1 * *m + (1.0 - beta1) * g;
                        *v = beta2 * *v + (1.0 - beta2) * g * g;
                        let m_hat = *m / correction1;
                        let v_hat = *v / correction2;
                        *w -= lr * m_hat / (v_hat.sqrt() + epsilon);
                    }
                }
            }
        }
    }
}
