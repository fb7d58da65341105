//! Mini-batch Adam training of the pointer network on (data, label) pairs.

use serde::{Deserialize, Serialize};

use super::network::{loss_and_gradients, PointerNetParams};
use crate::error::{Error, Result};
use crate::permutation::Permutation;
use crate::rng::RngStream;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub learn_rate: f64,
    pub hidden_units: usize,
    pub embedding_dim: usize,
    pub dropout: f64,
    /// Global L2 norm above which gradients are rescaled.
    pub clip_norm: f64,
    /// Keep parameters between training calls instead of reinitialising.
    pub warm_start: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            epochs: 200,
            batch_size: 128,
            learn_rate: 0.001,
            hidden_units: 200,
            embedding_dim: 64,
            dropout: 0.05,
            clip_norm: 5.0,
            warm_start: true,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(m.to_string()));
        if self.batch_size == 0 {
            return bad("batch_size must be positive");
        }
        if self.hidden_units == 0 || self.embedding_dim == 0 {
            return bad("hidden_units and embedding_dim must be positive");
        }
        if !(self.learn_rate > 0.0 && self.learn_rate.is_finite()) {
            return bad("learn_rate must be positive");
        }
        if !(0.0..1.0).contains(&self.dropout) {
            return bad("dropout must lie in [0, 1)");
        }
        if !(self.clip_norm > 0.0) {
            return bad("clip_norm must be positive");
        }
        Ok(())
    }
}

/// Adam moment estimates, shaped like the parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    pub m: PointerNetParams,
    pub v: PointerNetParams,
    pub step: u64,
}

impl AdamState {
    pub const BETA1: f64 = 0.9;
    pub const BETA2: f64 = 0.999;
    pub const EPS: f64 = 1e-8;

    pub fn new(params: &PointerNetParams) -> Self {
        AdamState { m: params.zeros_like(), v: params.zeros_like(), step: 0 }
    }

    /// One update with gradient `g`, which is rescaled first when its global
    /// norm exceeds `clip`.
    pub fn update(&mut self, params: &mut PointerNetParams, g: &PointerNetParams, lr: f64, clip: f64) {
        let norm = g.groups().iter().map(|t| t.sum_squares()).sum::<f64>().sqrt();
        let scale = if norm > clip { clip / norm } else { 1.0 };
        self.step += 1;
        let bc1 = 1.0 - Self::BETA1.powi(self.step as i32);
        let bc2 = 1.0 - Self::BETA2.powi(self.step as i32);
        let groups = params.groups_mut().into_iter().zip(g.groups()).zip(self.m.groups_mut()).zip(self.v.groups_mut());
        for (((p, g), m), v) in groups {
            let it = p.data_mut().iter_mut().zip(g.data()).zip(m.data_mut()).zip(v.data_mut());
            for (((p, &g), m), v) in it {
                let g = g * scale;
                *m = Self::BETA1 * *m + (1.0 - Self::BETA1) * g;
                *v = Self::BETA2 * *v + (1.0 - Self::BETA2) * g * g;
                *p -= lr * (*m / bc1) / ((*v / bc2).sqrt() + Self::EPS);
            }
        }
    }
}

/// Network parameters plus optimiser state, kept across training calls.
#[derive(Debug, Clone, PartialEq)]
pub struct Trainer {
    pub config: TrainConfig,
    pub params: PointerNetParams,
    pub adam: AdamState,
}

impl Trainer {
    pub fn new(config: TrainConfig, n_max: usize, init_rng: &mut RngStream) -> Result<Self> {
        config.validate()?;
        let params = PointerNetParams::init(n_max, config.embedding_dim, config.hidden_units, init_rng)?;
        let adam = AdamState::new(&params);
        Ok(Trainer { config, params, adam })
    }

    /// Fresh parameters and optimiser state, drawn from `init_rng`.
    pub fn reinitialize(&mut self, init_rng: &mut RngStream) -> Result<()> {
        self.params =
            PointerNetParams::init(self.params.n_max(), self.config.embedding_dim, self.config.hidden_units, init_rng)?;
        self.adam = AdamState::new(&self.params);
        Ok(())
    }

    /// Trains for `config.epochs` epochs and returns the mean training loss
    /// of each epoch. `shuffle_rng` orders the pairs, `dropout_rng` draws the
    /// dropout masks.
    pub fn fit(
        &mut self,
        pairs: &[(Permutation, Permutation)],
        shuffle_rng: &mut RngStream,
        dropout_rng: &mut RngStream,
    ) -> Result<Vec<f64>> {
        self.fit_epochs(pairs, self.config.epochs, shuffle_rng, dropout_rng)
    }

    pub fn fit_epochs(
        &mut self,
        pairs: &[(Permutation, Permutation)],
        epochs: usize,
        shuffle_rng: &mut RngStream,
        dropout_rng: &mut RngStream,
    ) -> Result<Vec<f64>> {
        if pairs.is_empty() {
            return Err(Error::Empty("training set"));
        }
        let mut order: Vec<usize> = (0..pairs.len()).collect();
        let mut grads = self.params.zeros_like();
        let mut trace = Vec::with_capacity(epochs);
        for _ in 0..epochs {
            shuffle_rng.shuffle(&mut order);
            let mut epoch_loss = 0.0;
            for chunk in order.chunks(self.config.batch_size) {
                let data: Vec<&[usize]> = chunk.iter().map(|&i| pairs[i].0.as_slice()).collect();
                let labels: Vec<&[usize]> = chunk.iter().map(|&i| pairs[i].1.as_slice()).collect();
                grads.fill(0.0);
                let dropout = (self.config.dropout > 0.0).then_some((self.config.dropout, &mut *dropout_rng));
                let loss = loss_and_gradients(&self.params, &data, &labels, dropout, Some(&mut grads))?;
                self.adam.update(&mut self.params, &grads, self.config.learn_rate, self.config.clip_norm);
                if !self.params.is_finite() {
                    return Err(Error::Divergence("non-finite parameters after update".into()));
                }
                epoch_loss += loss * chunk.len() as f64;
            }
            trace.push(epoch_loss / pairs.len() as f64);
        }
        Ok(trace)
    }
}

/// Mean summed token loss over `pairs` without dropout.
pub fn evaluate_loss(params: &PointerNetParams, pairs: &[(Permutation, Permutation)]) -> Result<f64> {
    if pairs.is_empty() {
        return Err(Error::Empty("evaluation set"));
    }
    let data: Vec<&[usize]> = pairs.iter().map(|p| p.0.as_slice()).collect();
    let labels: Vec<&[usize]> = pairs.iter().map(|p| p.1.as_slice()).collect();
    loss_and_gradients(params, &data, &labels, None, None)
}

/// Fraction of label positions reproduced by greedy decoding.
pub fn token_accuracy(params: &PointerNetParams, pairs: &[(Permutation, Permutation)]) -> Result<f64> {
    if pairs.is_empty() {
        return Err(Error::Empty("evaluation set"));
    }
    let inputs: Vec<Permutation> = pairs.iter().map(|p| p.0.clone()).collect();
    let out = super::network::predict(params, &inputs)?;
    let mut hits = 0usize;
    let mut total = 0usize;
    for (o, (_, label)) in out.iter().zip(pairs) {
        hits += o.as_slice().iter().zip(label.as_slice()).filter(|(a, b)| a == b).count();
        total += label.len();
    }
    Ok(hits as f64 / total as f64)
}
