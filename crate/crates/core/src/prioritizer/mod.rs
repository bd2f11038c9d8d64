//! Learned and rule-based task prioritizers.
//!
//! Both map the same five task features to a priority in (0, 1). The
//! scheduler ranks overdue tracks by this score instead of the five-level
//! priority.

pub mod fuzzy;
pub mod mlp;

use thiserror::Error;

pub use fuzzy::{FuzzyPrioritizer, Partition, Rule, RuleBase};
pub use mlp::{MlpPrioritizer, MlpWeights, TrainingConfig, TrainingRow};

pub const MAX_RADIAL_VELOCITY: f64 = 350.0;
pub const MIN_LATENESS: f64 = 0.6;
pub const MAX_LATENESS: f64 = 3.2;
/// Range ring thickness, km.
pub const RING_WIDTH_KM: f64 = 40.0;
/// Trace scale of the invalidity squashing, m^2.
pub const INVALIDITY_SCALE: f64 = 1e6;

#[derive(Debug, Error)]
pub enum PrioritizerError {
    #[error("network has not been trained")]
    Untrained,
    #[error("training stopped at epoch {epochs} with mse {mse:.3e} above target {target:.1e}")]
    NonConvergence { epochs: usize, mse: f64, target: f64 },
    #[error("training set is empty")]
    EmptyTrainingSet,
    #[error("training data: {0}")]
    Data(#[from] csv::Error),
    #[error("rule file line {line}: {reason}")]
    RuleSyntax { line: usize, reason: String },
    #[error("no rule fires for the given inputs")]
    NoRuleFires,
    #[error("invalid partition: {0}")]
    InvalidPartition(String),
}

/// Task features, clamped to their published ranges on construction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PriorityInputs {
    position: f64,
    radial_velocity: f64,
    track_invalidity: f64,
    allowable_lateness: f64,
    original_priority: u8,
}

impl PriorityInputs {
    pub fn new(position: f64, radial_velocity: f64, track_invalidity: f64, allowable_lateness: f64, original_priority: u8) -> Self {
        Self {
            position: position.clamp(0.0, 1.0),
            radial_velocity: radial_velocity.abs().min(MAX_RADIAL_VELOCITY),
            track_invalidity: track_invalidity.clamp(0.0, 1.0 - f64::EPSILON),
            allowable_lateness: allowable_lateness.clamp(MIN_LATENESS, MAX_LATENESS),
            original_priority: original_priority.clamp(1, 5),
        }
    }

    pub fn position(&self) -> f64 {
        self.position
    }

    pub fn radial_velocity(&self) -> f64 {
        self.radial_velocity
    }

    pub fn track_invalidity(&self) -> f64 {
        self.track_invalidity
    }

    pub fn allowable_lateness(&self) -> f64 {
        self.allowable_lateness
    }

    pub fn original_priority(&self) -> u8 {
        self.original_priority
    }

    /// Network input vector: position, velocity/350, TI, scaled lateness,
    /// scaled priority, all in [0, 1].
    pub fn normalized(&self) -> [f64; 5] {
        [
            self.position,
            self.radial_velocity / MAX_RADIAL_VELOCITY,
            self.track_invalidity,
            (self.allowable_lateness - MIN_LATENESS) / (MAX_LATENESS - MIN_LATENESS),
            (f64::from(self.original_priority) - 1.0) / 4.0,
        ]
    }
}

/// Normalized position of a target inside its range ring.
pub fn ring_position(range_km: f64, ring_width_km: f64) -> f64 {
    (range_km.max(0.0) % ring_width_km) / ring_width_km
}

/// `2 / (1 + exp(-2x/1e6)) - 1`, i.e. `tanh(x/1e6)`.
pub fn tracking_invalidity(avg_error: f64) -> f64 {
    (avg_error.max(0.0) / INVALIDITY_SCALE).tanh()
}
