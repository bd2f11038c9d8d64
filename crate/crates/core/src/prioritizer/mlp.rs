//! 5-5-1 feedforward network: tanh hidden layer, logistic output.
//!
//! Trained by full-batch gradient descent with momentum on the mean squared
//! error. Initial weights are drawn uniformly from [-0.5, 0.5] with a seeded
//! generator, so training is deterministic.

use std::io::Read;

use nalgebra::{SMatrix, SVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;

use super::{PriorityInputs, PrioritizerError};

pub type Hidden = SVector<f64, 5>;
pub type Input = SVector<f64, 5>;

const BUILTIN_TRAINING_SET: &str = include_str!("../../data/nn_training.csv");

/// One row of the training table.
#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
pub struct TrainingRow {
    pub index: usize,
    pub position: f64,
    pub radial_velocity: f64,
    pub track_invalidity: f64,
    pub allowable_lateness: f64,
    pub original_priority: u8,
    pub tracking_task_priority: f64,
}

impl TrainingRow {
    pub fn inputs(&self) -> PriorityInputs {
        PriorityInputs::new(
            self.position,
            self.radial_velocity,
            self.track_invalidity,
            self.allowable_lateness,
            self.original_priority,
        )
    }
}

pub fn load_training_set<R: Read>(reader: R) -> Result<Vec<TrainingRow>, PrioritizerError> {
    let mut rdr = csv::Reader::from_reader(reader);
    let rows = rdr.deserialize().collect::<Result<Vec<TrainingRow>, _>>()?;
    Ok(rows)
}

/// The 70-row table shipped with the crate.
pub fn builtin_training_set() -> Vec<TrainingRow> {
    load_training_set(BUILTIN_TRAINING_SET.as_bytes()).expect("bundled training set parses")
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainingConfig {
    pub seed: u64,
    pub learning_rate: f64,
    pub momentum: f64,
    pub max_epochs: usize,
    /// Early stop once the fit is this good.
    pub stop_mse: f64,
    /// Fit required at the end of training.
    pub target_mse: f64,
}

impl Default for TrainingConfig {
    fn default() -> Self {
        Self {
            seed: 7,
            learning_rate: 0.5,
            momentum: 0.9,
            max_epochs: 200_000,
            stop_mse: 1e-5,
            target_mse: 1e-2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MlpWeights {
    pub w1: SMatrix<f64, 5, 5>,
    pub b1: Hidden,
    pub w2: Hidden,
    pub b2: f64,
}

impl MlpWeights {
    pub fn zeros() -> Self {
        Self {
            w1: SMatrix::zeros(),
            b1: Hidden::zeros(),
            w2: Hidden::zeros(),
            b2: 0.0,
        }
    }

    /// Uniform [-0.5, 0.5] draws in the order w1 (row-major), b1, w2, b2.
    pub fn seeded(seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut draw = || rng.random_range(-0.5..=0.5);
        let mut w = Self::zeros();
        for i in 0..5 {
            for j in 0..5 {
                w.w1[(i, j)] = draw();
            }
        }
        for i in 0..5 {
            w.b1[i] = draw();
        }
        for i in 0..5 {
            w.w2[i] = draw();
        }
        w.b2 = draw();
        w
    }

    fn hidden(&self, x: &Input) -> Hidden {
        (self.w1 * x + self.b1).map(f64::tanh)
    }

    fn output(&self, h: &Hidden) -> f64 {
        logistic(self.w2.dot(h) + self.b2)
    }

    pub fn forward(&self, x: &Input) -> f64 {
        self.output(&self.hidden(x))
    }
}

fn logistic(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

#[derive(Debug, Clone, PartialEq)]
pub struct MlpPrioritizer {
    weights: MlpWeights,
    trained: bool,
    /// Final training MSE; NaN for networks built from weights.
    mse: f64,
    epochs: usize,
}

impl MlpPrioritizer {
    /// Seeded initial weights, not yet usable for inference.
    pub fn untrained(seed: u64) -> Self {
        Self {
            weights: MlpWeights::seeded(seed),
            trained: false,
            mse: f64::NAN,
            epochs: 0,
        }
    }

    pub fn from_weights(weights: MlpWeights) -> Self {
        Self {
            weights,
            trained: true,
            mse: f64::NAN,
            epochs: 0,
        }
    }

    pub fn weights(&self) -> &MlpWeights {
        &self.weights
    }

    pub fn training_mse(&self) -> f64 {
        self.mse
    }

    pub fn epochs(&self) -> usize {
        self.epochs
    }

    pub fn forward(&self, inputs: &PriorityInputs) -> Result<f64, PrioritizerError> {
        if !self.trained {
            return Err(PrioritizerError::Untrained);
        }
        Ok(self.weights.forward(&Input::from(inputs.normalized())))
    }

    /// Mean squared error over `data`.
    pub fn mse_on(&self, data: &[TrainingRow]) -> f64 {
        let sum: f64 = data
            .iter()
            .map(|r| {
                let e = self.weights.forward(&Input::from(r.inputs().normalized())) - r.tracking_task_priority;
                e * e
            })
            .sum();
        sum / data.len() as f64
    }

    pub fn train(data: &[TrainingRow], cfg: &TrainingConfig) -> Result<Self, PrioritizerError> {
        if data.is_empty() {
            return Err(PrioritizerError::EmptyTrainingSet);
        }
        let samples: Vec<(Input, f64)> = data
            .iter()
            .map(|r| (Input::from(r.inputs().normalized()), r.tracking_task_priority))
            .collect();
        let n = samples.len() as f64;
        let mut w = MlpWeights::seeded(cfg.seed);
        let mut vel = MlpWeights::zeros();
        let mut mse = f64::INFINITY;
        let mut epoch = 0;
        while epoch < cfg.max_epochs {
            let mut grad = MlpWeights::zeros();
            let mut sq = 0.0;
            for (x, y) in &samples {
                let h = w.hidden(x);
                let o = w.output(&h);
                let err = o - y;
                sq += err * err;
                let d_out = 2.0 * err * o * (1.0 - o) / n;
                grad.w2 += h * d_out;
                grad.b2 += d_out;
                let d_hidden = w.w2.component_mul(&h.map(|v| 1.0 - v * v)) * d_out;
                grad.w1 += d_hidden * x.transpose();
                grad.b1 += d_hidden;
            }
            mse = sq / n;
            if mse <= cfg.stop_mse {
                break;
            }
            vel.w1 = vel.w1 * cfg.momentum - grad.w1 * cfg.learning_rate;
            vel.b1 = vel.b1 * cfg.momentum - grad.b1 * cfg.learning_rate;
            vel.w2 = vel.w2 * cfg.momentum - grad.w2 * cfg.learning_rate;
            vel.b2 = vel.b2 * cfg.momentum - grad.b2 * cfg.learning_rate;
            w.w1 += vel.w1;
            w.b1 += vel.b1;
            w.w2 += vel.w2;
            w.b2 += vel.b2;
            epoch += 1;
        }
        if !(mse <= cfg.target_mse) {
            return Err(PrioritizerError::NonConvergence {
                epochs: epoch,
                mse,
                target: cfg.target_mse,
            });
        }
        Ok(Self {
            weights: w,
            trained: true,
            mse,
            epochs: epoch,
        })
    }

    /// Network trained on the bundled table with default settings.
    pub fn pretrained() -> Result<Self, PrioritizerError> {
        Self::train(&builtin_training_set(), &TrainingConfig::default())
    }
}
