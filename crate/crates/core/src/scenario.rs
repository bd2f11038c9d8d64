//! Seeded scenario generation.
//!
//! A scenario is a pure function of its configuration and seed: target
//! placement, truth trajectories and every measurement noise draw come from
//! generators derived from that seed. Measurement noise is indexed by the
//! per-target measurement count, so two policies that measure a target the
//! same number of times see the same noise draws.

use std::f64::consts::TAU;

use nalgebra::Matrix2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::imm::{transition_matrix, ImmError, ImmFilter, Measurement, StateVector};
use crate::policy::{PolicyError, PolicyParams};

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("range {0} km outside the instrumented range")]
    OutOfRange(f64),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("config file: {0}")]
    Parse(#[from] toml::de::Error),
    #[error(transparent)]
    Imm(#[from] ImmError),
    #[error(transparent)]
    Policy(#[from] PolicyError),
}

/// Scenario and simulation settings. Every field has a default, so a config
/// file only lists what it changes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    /// Simulated time, s.
    pub duration: f64,
    pub n_targets: usize,
    pub bands: usize,
    pub seed: u64,
    pub instrumented_range_km: f64,
    pub ring_width_km: f64,
    /// Targets are kept outside this range, km.
    pub min_range_km: f64,
    /// Range noise standard deviation, m.
    pub sigma_range: f64,
    /// Azimuth noise standard deviation, rad.
    pub sigma_azimuth: f64,
    /// Stay probabilities of the candidate symmetric truth matrices, per
    /// truth step.
    pub truth_stay_probs: Vec<f64>,
    /// Truth trajectory grid spacing, s.
    pub truth_dt: f64,
    pub tracker_stay: f64,
    /// Interval the tracker transition matrix is defined over, s.
    pub markov_interval: f64,
    /// Low-noise model intensity, m^2/s^3.
    pub q_low: f64,
    /// High-noise to low-noise intensity ratio.
    pub q_ratio: f64,
    /// Good-track trace bound, m^2.
    pub tau: f64,
    pub alpha: f64,
    pub theta0: f64,
    pub r: f64,
    /// Lookahead for the deterioration term of the update cost, s.
    pub cost_horizon: f64,
    pub track_update_time: f64,
    pub track_dwell: f64,
    pub surveillance_update_time: f64,
    pub surveillance_dwell: f64,
    pub surveillance_fragments: usize,
    pub lateness_min: f64,
    pub lateness_max: f64,
    pub init_range_min_km: f64,
    pub init_range_max_km: f64,
    pub speed_min: f64,
    pub speed_max: f64,
    /// Initial velocity standard deviation of a new track, m/s.
    pub init_velocity_sigma: f64,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            duration: 200.0,
            n_targets: 15,
            bands: 2,
            seed: 1,
            instrumented_range_km: 200.0,
            ring_width_km: 40.0,
            min_range_km: 5.0,
            sigma_range: 80.0,
            sigma_azimuth: 0.003,
            truth_stay_probs: vec![0.99, 0.97, 0.95, 0.90, 0.80],
            truth_dt: 1.0,
            tracker_stay: 0.95,
            markov_interval: 1.0,
            q_low: 0.5,
            q_ratio: 1e4,
            tau: 2.5e5,
            alpha: 0.99,
            theta0: 0.9,
            r: 0.95,
            cost_horizon: 0.04,
            track_update_time: 1.0,
            track_dwell: 0.04,
            surveillance_update_time: 10.0,
            surveillance_dwell: 0.1,
            surveillance_fragments: 16,
            lateness_min: 0.6,
            lateness_max: 3.2,
            init_range_min_km: 20.0,
            init_range_max_km: 190.0,
            speed_min: 10.0,
            speed_max: 350.0,
            init_velocity_sigma: 200.0,
        }
    }
}

fn positive(name: &str, v: f64) -> Result<(), ScenarioError> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(ScenarioError::InvalidConfig(format!("{name} must be positive, got {v}")))
    }
}

fn ordered(name: &str, lo: f64, hi: f64) -> Result<(), ScenarioError> {
    if lo <= hi {
        Ok(())
    } else {
        Err(ScenarioError::InvalidConfig(format!("{name} range is empty: [{lo}, {hi}]")))
    }
}

impl ScenarioConfig {
    pub fn from_toml_str(text: &str) -> Result<Self, ScenarioError> {
        let cfg: Self = toml::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), ScenarioError> {
        for (name, v) in [
            ("duration", self.duration),
            ("instrumented_range_km", self.instrumented_range_km),
            ("ring_width_km", self.ring_width_km),
            ("sigma_range", self.sigma_range),
            ("sigma_azimuth", self.sigma_azimuth),
            ("truth_dt", self.truth_dt),
            ("markov_interval", self.markov_interval),
            ("q_low", self.q_low),
            ("q_ratio", self.q_ratio),
            ("tau", self.tau),
            ("cost_horizon", self.cost_horizon),
            ("track_update_time", self.track_update_time),
            ("track_dwell", self.track_dwell),
            ("surveillance_update_time", self.surveillance_update_time),
            ("surveillance_dwell", self.surveillance_dwell),
            ("init_velocity_sigma", self.init_velocity_sigma),
        ] {
            positive(name, v)?;
        }
        if self.n_targets == 0 {
            return Err(ScenarioError::InvalidConfig("n_targets must be at least 1".into()));
        }
        if self.bands == 0 {
            return Err(ScenarioError::InvalidConfig("bands must be at least 1".into()));
        }
        if self.truth_stay_probs.is_empty() || self.truth_stay_probs.iter().any(|p| !(0.5..=1.0).contains(p)) {
            return Err(ScenarioError::InvalidConfig("truth_stay_probs must be non-empty and within [0.5, 1]".into()));
        }
        ordered("lateness", self.lateness_min, self.lateness_max)?;
        ordered("init_range_km", self.init_range_min_km, self.init_range_max_km)?;
        ordered("speed", self.speed_min, self.speed_max)?;
        if !(self.min_range_km >= 0.0 && self.min_range_km < self.init_range_min_km)
            || self.init_range_max_km > self.instrumented_range_km
        {
            return Err(ScenarioError::InvalidConfig(
                "initial ranges must lie inside [min_range_km, instrumented_range_km]".into(),
            ));
        }
        self.tracker()?;
        self.policy_params()?;
        Ok(())
    }

    pub fn tracker(&self) -> Result<ImmFilter, ScenarioError> {
        Ok(ImmFilter::symmetric(self.q_low, self.q_ratio, self.tracker_stay, self.markov_interval)?)
    }

    pub fn policy_params(&self) -> Result<PolicyParams, ScenarioError> {
        Ok(PolicyParams::closed_form(self.alpha, self.theta0, self.r)?)
    }

    pub fn truth_matrices(&self) -> Vec<Matrix2<f64>> {
        self.truth_stay_probs.iter().map(|&p| Matrix2::new(p, 1.0 - p, 1.0 - p, p)).collect()
    }
}

/// Priority level 1 to 5 by 40 km range ring; exact ring boundaries belong
/// to the outer ring.
pub fn assign_priority(range_km: f64) -> Result<u8, ScenarioError> {
    assign_priority_with(range_km, 40.0, 200.0)
}

pub fn assign_priority_with(range_km: f64, ring_width_km: f64, max_range_km: f64) -> Result<u8, ScenarioError> {
    if !(0.0..=max_range_km).contains(&range_km) {
        return Err(ScenarioError::OutOfRange(range_km));
    }
    let ring = (range_km / ring_width_km).floor();
    Ok((5.0 - ring).clamp(1.0, 5.0) as u8)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ManeuverMode {
    Quiet,
    Maneuvering,
}

impl ManeuverMode {
    pub fn index(self) -> usize {
        match self {
            ManeuverMode::Quiet => 0,
            ManeuverMode::Maneuvering => 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruthTarget {
    /// `[x, vx, y, vy]`, m and m/s.
    pub state: StateVector,
    pub mode: ManeuverMode,
    pub transition: Matrix2<f64>,
}

impl TruthTarget {
    pub fn range(&self) -> f64 {
        self.state[0].hypot(self.state[2])
    }

    pub fn azimuth(&self) -> f64 {
        self.state[2].atan2(self.state[0])
    }
}

/// Process intensities of the quiet and maneuvering modes, m^2/s^3.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruthNoise {
    pub quiet: f64,
    pub maneuvering: f64,
}

/// Annulus the truth is reflected back into, m.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RangeBounds {
    pub min: f64,
    pub max: f64,
}

/// One truth step: sample the next mode, then propagate constant velocity
/// with white-acceleration noise at that mode's intensity.
pub fn step_truth<R: Rng + ?Sized>(t: &TruthTarget, dt: f64, noise: &TruthNoise, rng: &mut R) -> TruthTarget {
    let stay = t.transition[(t.mode.index(), t.mode.index())];
    let switch = rng.random::<f64>() >= stay;
    let mode = match (t.mode, switch) {
        (m, false) => m,
        (ManeuverMode::Quiet, true) => ManeuverMode::Maneuvering,
        (ManeuverMode::Maneuvering, true) => ManeuverMode::Quiet,
    };
    let q = match mode {
        ManeuverMode::Quiet => noise.quiet,
        ManeuverMode::Maneuvering => noise.maneuvering,
    };
    let mut state = transition_matrix(dt) * t.state;
    // Cholesky factor of q * [[dt^3/3, dt^2/2], [dt^2/2, dt]].
    let l11 = (q * dt.powi(3) / 3.0).sqrt();
    let l21 = (3.0 * q * dt).sqrt() / 2.0;
    let l22 = (q * dt).sqrt() / 2.0;
    for axis in 0..2 {
        let a: f64 = StandardNormal.sample(rng);
        let b: f64 = StandardNormal.sample(rng);
        state[2 * axis] += l11 * a;
        state[2 * axis + 1] += l21 * a + l22 * b;
    }
    TruthTarget {
        state,
        mode,
        transition: t.transition,
    }
}

/// Mirrors position and radial velocity at the annulus edges.
pub fn reflect_into(state: &mut StateVector, bounds: &RangeBounds) {
    let range = state[0].hypot(state[2]);
    if range == 0.0 || (range >= bounds.min && range <= bounds.max) {
        return;
    }
    let target = if range > bounds.max {
        (2.0 * bounds.max - range).max(bounds.min)
    } else {
        (2.0 * bounds.min - range).min(bounds.max)
    };
    let (ux, uy) = (state[0] / range, state[2] / range);
    state[0] = ux * target;
    state[2] = uy * target;
    let radial = state[1] * ux + state[3] * uy;
    state[1] -= 2.0 * radial * ux;
    state[3] -= 2.0 * radial * uy;
}

/// Noisy polar measurement of `t` at `time`.
pub fn generate_measurement<R: Rng + ?Sized>(
    t: &TruthTarget,
    time: f64,
    sigma_range: f64,
    sigma_azimuth: f64,
    max_range: f64,
    rng: &mut R,
) -> Result<Measurement, ScenarioError> {
    let range = t.range();
    if range > max_range || range <= 0.0 {
        return Err(ScenarioError::OutOfRange(range / 1e3));
    }
    let nr: f64 = StandardNormal.sample(rng);
    let na: f64 = StandardNormal.sample(rng);
    let noisy_range = (range + sigma_range * nr).max(f64::MIN_POSITIVE);
    Ok(Measurement::new(noisy_range, t.azimuth() + sigma_azimuth * na, time, sigma_range, sigma_azimuth)?)
}

/// Truth sampled on a uniform grid. Between grid points the target moves at
/// constant velocity, reflected at the annulus edges.
#[derive(Debug, Clone, PartialEq)]
pub struct TruthTrajectory {
    pub dt: f64,
    pub samples: Vec<TruthTarget>,
    pub bounds: RangeBounds,
}

impl TruthTrajectory {
    pub fn state_at(&self, time: f64) -> TruthTarget {
        let k = ((time / self.dt).floor().max(0.0) as usize).min(self.samples.len() - 1);
        let base = self.samples[k];
        let offset = time - k as f64 * self.dt;
        if offset <= 0.0 {
            return base;
        }
        let mut state = transition_matrix(offset) * base.state;
        reflect_into(&mut state, &self.bounds);
        TruthTarget { state, ..base }
    }
}

/// Per-target script shared by every policy run on the scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct TargetScript {
    pub trajectory: TruthTrajectory,
    pub allowable_lateness: f64,
    /// Index into the candidate truth matrices.
    pub truth_model: usize,
    /// Initial time-balance offset of the track task, s.
    pub initial_t_tb: f64,
    noise_seed: u64,
}

impl TargetScript {
    /// Noise generator of the `count`-th measurement of this target.
    pub fn noise_rng(&self, count: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.noise_seed);
        rng.set_stream(count);
        rng
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub config: ScenarioConfig,
    pub seed: u64,
    pub targets: Vec<TargetScript>,
    /// Initial time-balance offsets of the surveillance fragments, s.
    pub fragment_t_tb: Vec<f64>,
}

impl Scenario {
    pub fn generate(config: &ScenarioConfig, seed: u64) -> Result<Self, ScenarioError> {
        config.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let matrices = config.truth_matrices();
        let noise = TruthNoise {
            quiet: config.q_low,
            maneuvering: config.q_low * config.q_ratio,
        };
        let bounds = RangeBounds {
            min: config.min_range_km * 1e3,
            max: config.instrumented_range_km * 1e3,
        };
        let steps = (config.duration / config.truth_dt).ceil() as usize + 1;
        let mut targets = Vec::with_capacity(config.n_targets);
        for _ in 0..config.n_targets {
            let range = rng.random_range(config.init_range_min_km..=config.init_range_max_km) * 1e3;
            let azimuth = rng.random_range(0.0..TAU);
            let speed = rng.random_range(config.speed_min..=config.speed_max);
            let heading = rng.random_range(0.0..TAU);
            let truth_model = rng.random_range(0..matrices.len());
            let transition = matrices[truth_model];
            let mode = if rng.random::<f64>() < 0.5 {
                ManeuverMode::Quiet
            } else {
                ManeuverMode::Maneuvering
            };
            let allowable_lateness = rng.random_range(config.lateness_min..=config.lateness_max);
            let initial_t_tb = -rng.random_range(0.0..config.track_update_time);
            let noise_seed = rng.random::<u64>();
            let mut truth_rng = ChaCha8Rng::seed_from_u64(rng.random::<u64>());

            let mut current = TruthTarget {
                state: StateVector::new(
                    range * azimuth.cos(),
                    speed * heading.cos(),
                    range * azimuth.sin(),
                    speed * heading.sin(),
                ),
                mode,
                transition,
            };
            let mut samples = Vec::with_capacity(steps);
            samples.push(current);
            for _ in 1..steps {
                current = step_truth(&current, config.truth_dt, &noise, &mut truth_rng);
                reflect_into(&mut current.state, &bounds);
                samples.push(current);
            }
            targets.push(TargetScript {
                trajectory: TruthTrajectory {
                    dt: config.truth_dt,
                    samples,
                    bounds,
                },
                allowable_lateness,
                truth_model,
                initial_t_tb,
                noise_seed,
            });
        }
        let fragment_t_tb = (0..config.surveillance_fragments)
            .map(|_| -rng.random_range(0.0..config.surveillance_update_time))
            .collect();
        Ok(Self {
            config: config.clone(),
            seed,
            targets,
            fragment_t_tb,
        })
    }

    /// The `count`-th measurement of `target`, taken at `time`.
    pub fn measure(&self, target: usize, count: u64, time: f64) -> Result<Measurement, ScenarioError> {
        let script = &self.targets[target];
        let truth = script.trajectory.state_at(time);
        let mut rng = script.noise_rng(count);
        generate_measurement(
            &truth,
            time,
            self.config.sigma_range,
            self.config.sigma_azimuth,
            self.config.instrumented_range_km * 1e3 * (1.0 + 1e-9),
            &mut rng,
        )
    }
}

/// Seed of scenario `index` in a batch seeded with `base`.
pub fn scenario_seed(base: u64, index: usize) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(base);
    rng.set_stream(index as u64 + 1);
    rng.random()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn priority_rings() {
        assert_eq!(assign_priority(60.0).unwrap(), 4);
        assert_eq!(assign_priority(10.0).unwrap(), 5);
        assert_eq!(assign_priority(199.0).unwrap(), 1);
        assert_eq!(assign_priority(40.0).unwrap(), 4);
        assert_eq!(assign_priority(0.0).unwrap(), 5);
        assert_eq!(assign_priority(200.0).unwrap(), 1);
        assert!(assign_priority(200.5).is_err());
        assert!(assign_priority(-1.0).is_err());
    }

    #[test]
    fn noiseless_truth_is_straight() {
        let t = TruthTarget {
            state: StateVector::new(1e5, 100.0, 0.0, -50.0),
            mode: ManeuverMode::Quiet,
            transition: Matrix2::new(0.9, 0.1, 0.1, 0.9),
        };
        let none = TruthNoise {
            quiet: 0.0,
            maneuvering: 0.0,
        };
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut cur = t;
        for _ in 0..50 {
            cur = step_truth(&cur, 0.5, &none, &mut rng);
        }
        assert!((cur.state[0] - (1e5 + 100.0 * 25.0)).abs() < 1e-6);
        assert!((cur.state[2] + 50.0 * 25.0).abs() < 1e-6);
        assert_eq!(cur.state[1], 100.0);
    }

    #[test]
    fn noiseless_measurement_is_polar_truth() {
        let t = TruthTarget {
            state: StateVector::new(3e4, 0.0, 4e4, 0.0),
            mode: ManeuverMode::Quiet,
            transition: Matrix2::identity(),
        };
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let m = generate_measurement(&t, 2.0, 0.0, 0.0, 2e5, &mut rng);
        assert!(m.is_err(), "zero sigmas are not a valid measurement");
        let m = generate_measurement(&t, 2.0, 1e-12, 1e-15, 2e5, &mut rng).unwrap();
        assert!((m.range - 5e4).abs() < 1e-9);
        assert!((m.azimuth - (4.0f64).atan2(3.0)).abs() < 1e-12);
        let far = TruthTarget {
            state: StateVector::new(3e5, 0.0, 0.0, 0.0),
            ..t
        };
        assert!(matches!(
            generate_measurement(&far, 0.0, 80.0, 0.003, 2e5, &mut rng),
            Err(ScenarioError::OutOfRange(_))
        ));
    }

    #[test]
    fn reflection_keeps_annulus() {
        let bounds = RangeBounds { min: 5e3, max: 2e5 };
        let mut s = StateVector::new(2.1e5, 300.0, 0.0, 20.0);
        reflect_into(&mut s, &bounds);
        assert!((s[0] - 1.9e5).abs() < 1e-9);
        assert_eq!(s[1], -300.0);
        assert_eq!(s[3], 20.0);
        let mut inner = StateVector::new(0.0, 0.0, 4e3, -10.0);
        reflect_into(&mut inner, &bounds);
        assert!((inner[2] - 6e3).abs() < 1e-9);
        assert_eq!(inner[3], 10.0);
    }

    #[test]
    fn scenario_is_deterministic() {
        let cfg = ScenarioConfig {
            n_targets: 4,
            duration: 20.0,
            ..ScenarioConfig::default()
        };
        let a = Scenario::generate(&cfg, 11).unwrap();
        let b = Scenario::generate(&cfg, 11).unwrap();
        assert_eq!(a, b);
        let c = Scenario::generate(&cfg, 12).unwrap();
        assert_ne!(a, c);
        assert_eq!(a.measure(2, 5, 3.3).unwrap(), b.measure(2, 5, 3.3).unwrap());
        assert_ne!(a.measure(2, 5, 3.3).unwrap(), a.measure(2, 6, 3.3).unwrap());
        for s in &a.targets {
            for t in &s.trajectory.samples {
                let r = t.range();
                assert!((5e3..=2e5).contains(&r));
            }
            assert!((-1.0..=0.0).contains(&s.initial_t_tb));
        }
    }

    #[test]
    fn config_parsing() {
        let cfg = ScenarioConfig::from_toml_str("n_targets = 3\nbands = 1\n").unwrap();
        assert_eq!(cfg.n_targets, 3);
        assert_eq!(cfg.sigma_range, 80.0);
        assert!(ScenarioConfig::from_toml_str("n_target = 3").is_err());
        assert!(ScenarioConfig::from_toml_str("bands = 0").is_err());
        assert!(ScenarioConfig::from_toml_str("duration = -1.0").is_err());
        assert!(ScenarioConfig::from_toml_str("theta0 = 1.5").is_err());
    }

    #[test]
    fn scenario_seeds_differ() {
        let seeds: Vec<u64> = (0..50).map(|i| scenario_seed(9, i)).collect();
        let mut uniq = seeds.clone();
        uniq.sort_unstable();
        uniq.dedup();
        assert_eq!(uniq.len(), seeds.len());
        assert_eq!(scenario_seed(9, 3), seeds[3]);
    }
}
