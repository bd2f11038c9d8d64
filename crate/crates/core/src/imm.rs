//! Two-model interacting multiple model (IMM) tracker.
//!
//! Both models are 2-D constant velocity over the state `[x, vx, y, vy]`
//! (metres, m/s) and differ only in process-noise intensity: the high-noise
//! model uses `ratio` times the low-noise intensity (`100^2` by default). The
//! low-noise mode probability is the belief that the track is up-to-date, and
//! the trace of the mixed covariance is the track error.
//!
//! Polar measurements are converted to Cartesian with the multiplicative
//! debiasing of the unbiased converted-measurement filter before the linear
//! update.

use nalgebra::{Matrix2, Matrix2x4, Matrix4, Vector2, Vector4};
use thiserror::Error;

use crate::policy::{Belief, TrackObservation};

pub type StateVector = Vector4<f64>;
pub type StateCovariance = Matrix4<f64>;

/// Default low-noise white-acceleration intensity, m^2/s^3 per axis.
pub const DEFAULT_LOW_INTENSITY: f64 = 0.5;
/// High-noise / low-noise intensity ratio.
pub const DEFAULT_NOISE_RATIO: f64 = 100.0 * 100.0;
/// Default good-track bound on the mixed-covariance trace, m^2.
pub const DEFAULT_TRACE_BOUND: f64 = 2.5e5;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ImmError {
    #[error("time step must be positive and finite, got {0}")]
    InvalidStep(f64),
    #[error("transition matrix row {row} sums to {sum}, entries must be probabilities")]
    InvalidMarkov { row: usize, sum: f64 },
    #[error("invalid measurement: {0}")]
    InvalidMeasurement(&'static str),
    #[error("invalid process noise intensity {0}")]
    InvalidIntensity(f64),
    #[error("innovation covariance of the {0:?} model is not positive definite")]
    SingularInnovation(ModelLabel),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ModelLabel {
    LowNoise,
    HighNoise,
}

/// Constant-velocity model with discretised white-noise acceleration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MotionModel {
    pub label: ModelLabel,
    /// Acceleration noise intensity, m^2/s^3 per axis.
    pub intensity: f64,
}

impl MotionModel {
    pub fn new(label: ModelLabel, intensity: f64) -> Result<Self, ImmError> {
        if !(intensity.is_finite() && intensity >= 0.0) {
            return Err(ImmError::InvalidIntensity(intensity));
        }
        Ok(Self { label, intensity })
    }

    /// Low/high pair with `Q_high = ratio * Q_low`.
    pub fn pair(low_intensity: f64, ratio: f64) -> Result<[MotionModel; 2], ImmError> {
        Ok([
            Self::new(ModelLabel::LowNoise, low_intensity)?,
            Self::new(ModelLabel::HighNoise, low_intensity * ratio)?,
        ])
    }

    pub fn transition(&self, dt: f64) -> StateCovariance {
        transition_matrix(dt)
    }

    pub fn process_noise(&self, dt: f64) -> StateCovariance {
        let q = self.intensity;
        let (d1, d2, d3) = (q * dt, q * dt * dt / 2.0, q * dt * dt * dt / 3.0);
        #[rustfmt::skip]
        let m = Matrix4::new(
            d3,  d2,  0.0, 0.0,
            d2,  d1,  0.0, 0.0,
            0.0, 0.0, d3,  d2,
            0.0, 0.0, d2,  d1,
        );
        m
    }
}

pub fn transition_matrix(dt: f64) -> StateCovariance {
    #[rustfmt::skip]
    let f = Matrix4::new(
        1.0, dt,  0.0, 0.0,
        0.0, 1.0, 0.0, 0.0,
        0.0, 0.0, 1.0, dt,
        0.0, 0.0, 0.0, 1.0,
    );
    f
}

/// Position-only observation matrix.
pub fn observation_matrix() -> Matrix2x4<f64> {
    #[rustfmt::skip]
    let h = Matrix2x4::new(
        1.0, 0.0, 0.0, 0.0,
        0.0, 0.0, 1.0, 0.0,
    );
    h
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Measurement {
    /// Metres.
    pub range: f64,
    /// Radians, measured from the x axis.
    pub azimuth: f64,
    /// Seconds.
    pub timestamp: f64,
    pub sigma_range: f64,
    pub sigma_azimuth: f64,
}

impl Measurement {
    pub fn new(range: f64, azimuth: f64, timestamp: f64, sigma_range: f64, sigma_azimuth: f64) -> Result<Self, ImmError> {
        let m = Self {
            range,
            azimuth,
            timestamp,
            sigma_range,
            sigma_azimuth,
        };
        m.validate()?;
        Ok(m)
    }

    fn validate(&self) -> Result<(), ImmError> {
        if !(self.range > 0.0 && self.range.is_finite()) {
            return Err(ImmError::InvalidMeasurement("range must be positive"));
        }
        if !self.azimuth.is_finite() || !self.timestamp.is_finite() {
            return Err(ImmError::InvalidMeasurement("azimuth and timestamp must be finite"));
        }
        if !(self.sigma_range > 0.0 && self.sigma_azimuth > 0.0) {
            return Err(ImmError::InvalidMeasurement("noise sigmas must be positive"));
        }
        Ok(())
    }
}

/// Cartesian position and covariance of a converted polar measurement.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvertedMeasurement {
    pub position: Vector2<f64>,
    pub covariance: Matrix2<f64>,
}

/// Debiased polar-to-Cartesian conversion.
///
/// With `lambda = E[cos(w)] = exp(-sigma_a^2 / 2)` the position is
/// `lambda^-1 * (r cos(a), r sin(a))`, and the covariance is the
/// measurement-conditioned form of the unbiased conversion.
pub fn convert_measurement(m: &Measurement) -> ConvertedMeasurement {
    let (r, a) = (m.range, m.azimuth);
    let sa2 = m.sigma_azimuth * m.sigma_azimuth;
    let sr2 = m.sigma_range * m.sigma_range;
    let lambda = (-sa2 / 2.0).exp();
    let lambda4 = (-2.0 * sa2).exp();
    let (sin, cos) = a.sin_cos();
    let (sin2, cos2) = (2.0 * a).sin_cos();

    let position = Vector2::new(r * cos, r * sin) / lambda;

    let k = (1.0 / (lambda * lambda) - 2.0) * r * r;
    let half = 0.5 * (r * r + sr2);
    let xx = k * cos * cos + half * (1.0 + lambda4 * cos2);
    let yy = k * sin * sin + half * (1.0 - lambda4 * cos2);
    let xy = k * cos * sin + half * lambda4 * sin2;
    ConvertedMeasurement {
        position,
        covariance: Matrix2::new(xx, xy, xy, yy),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelEstimate {
    pub mean: StateVector,
    pub cov: StateCovariance,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrackState {
    pub models: [ModelEstimate; 2],
    /// `[low-noise, high-noise]`.
    pub mode_probs: [f64; 2],
    pub mixed_mean: StateVector,
    pub mixed_cov: StateCovariance,
    /// Trace of `mixed_cov` right after the last measurement update.
    pub anchor_trace: f64,
    pub last_update_time: f64,
    pub time: f64,
}

impl TrackState {
    /// Builds a state where both models share `mean` and `cov`.
    pub fn from_estimate(mean: StateVector, cov: StateCovariance, mode_probs: [f64; 2], time: f64) -> Self {
        let est = ModelEstimate { mean, cov };
        Self {
            models: [est, est],
            mode_probs,
            mixed_mean: mean,
            mixed_cov: cov,
            anchor_trace: cov.trace(),
            last_update_time: time,
            time,
        }
    }

    /// Single-point initiation: position from the converted measurement, zero
    /// velocity with standard deviation `velocity_sigma` per axis.
    pub fn initiate(meas: &Measurement, velocity_sigma: f64) -> Result<Self, ImmError> {
        meas.validate()?;
        let z = convert_measurement(meas);
        let mean = Vector4::new(z.position[0], 0.0, z.position[1], 0.0);
        let v2 = velocity_sigma * velocity_sigma;
        let r = z.covariance;
        #[rustfmt::skip]
        let cov = Matrix4::new(
            r[(0, 0)], 0.0, r[(0, 1)], 0.0,
            0.0,       v2,  0.0,       0.0,
            r[(1, 0)], 0.0, r[(1, 1)], 0.0,
            0.0,       0.0, 0.0,       v2,
        );
        let prior = Belief::INITIAL.value();
        Ok(Self::from_estimate(mean, cov, [prior, 1.0 - prior], meas.timestamp))
    }

    pub fn trace(&self) -> f64 {
        self.mixed_cov.trace()
    }

    pub fn range(&self) -> f64 {
        self.mixed_mean[0].hypot(self.mixed_mean[2])
    }

    /// Velocity component along the line of sight, m/s (positive = opening).
    pub fn radial_velocity(&self) -> f64 {
        let (x, vx, y, vy) = (self.mixed_mean[0], self.mixed_mean[1], self.mixed_mean[2], self.mixed_mean[3]);
        let range = x.hypot(y);
        if range == 0.0 {
            return vx.hypot(vy);
        }
        (x * vx + y * vy) / range
    }
}

fn check_markov(markov: &Matrix2<f64>) -> Result<(), ImmError> {
    for row in 0..2 {
        let (a, b) = (markov[(row, 0)], markov[(row, 1)]);
        let sum = a + b;
        if !(0.0..=1.0).contains(&a) || !(0.0..=1.0).contains(&b) || (sum - 1.0).abs() > 1e-9 {
            return Err(ImmError::InvalidMarkov { row, sum });
        }
    }
    Ok(())
}

fn symmetrize(m: &StateCovariance) -> StateCovariance {
    (m + m.transpose()) * 0.5
}

/// Probability-weighted moment match of a set of Gaussian estimates.
pub fn combine(weights: &[f64; 2], estimates: &[ModelEstimate; 2]) -> (StateVector, StateCovariance) {
    let mean = estimates[0].mean * weights[0] + estimates[1].mean * weights[1];
    let mut cov = StateCovariance::zeros();
    for (w, e) in weights.iter().zip(estimates) {
        let d = e.mean - mean;
        cov += (e.cov + d * d.transpose()) * *w;
    }
    (mean, symmetrize(&cov))
}

struct ModelUpdate {
    estimate: ModelEstimate,
    log_likelihood: f64,
}

fn kalman_update(
    label: ModelLabel,
    prior: &ModelEstimate,
    z: &ConvertedMeasurement,
) -> Result<ModelUpdate, ImmError> {
    let h = observation_matrix();
    let innovation = z.position - h * prior.mean;
    let s = h * prior.cov * h.transpose() + z.covariance;
    let chol = s.cholesky().ok_or(ImmError::SingularInnovation(label))?;
    let s_inv = chol.inverse();
    let gain = prior.cov * h.transpose() * s_inv;
    let mean = prior.mean + gain * innovation;
    let i_kh = StateCovariance::identity() - gain * h;
    let cov = i_kh * prior.cov * i_kh.transpose() + gain * z.covariance * gain.transpose();

    let det = s.determinant();
    let mahalanobis = (innovation.transpose() * s_inv * innovation)[(0, 0)];
    let log_likelihood = -0.5 * mahalanobis - 0.5 * (det.ln() + 2.0 * (2.0 * std::f64::consts::PI).ln());
    Ok(ModelUpdate {
        estimate: ModelEstimate {
            mean,
            cov: symmetrize(&cov),
        },
        log_likelihood,
    })
}

/// One IMM cycle with the transition matrix applied once.
///
/// Mixing, per-model prediction over `dt`, optional measurement update with
/// likelihood-weighted mode probabilities, and the combined estimate.
pub fn imm_step(
    models: &[MotionModel; 2],
    markov: &Matrix2<f64>,
    t: &TrackState,
    dt: f64,
    meas: Option<&Measurement>,
) -> Result<TrackState, ImmError> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(ImmError::InvalidStep(dt));
    }
    check_markov(markov)?;
    if let Some(m) = meas {
        m.validate()?;
    }

    // Mixing.
    let mu = t.mode_probs;
    let predicted_probs = [
        markov[(0, 0)] * mu[0] + markov[(1, 0)] * mu[1],
        markov[(0, 1)] * mu[0] + markov[(1, 1)] * mu[1],
    ];
    let mut mixed = t.models;
    for j in 0..2 {
        if predicted_probs[j] > 0.0 {
            let w = [
                markov[(0, j)] * mu[0] / predicted_probs[j],
                markov[(1, j)] * mu[1] / predicted_probs[j],
            ];
            let (mean, cov) = combine(&w, &t.models);
            mixed[j] = ModelEstimate { mean, cov };
        }
    }

    // Prediction.
    let f = transition_matrix(dt);
    let mut predicted = mixed;
    for (est, model) in predicted.iter_mut().zip(models) {
        est.mean = f * est.mean;
        est.cov = symmetrize(&(f * est.cov * f.transpose() + model.process_noise(dt)));
    }

    let time = t.time + dt;
    let (estimates, mode_probs) = match meas {
        None => (predicted, normalized(predicted_probs)),
        Some(m) => {
            let z = convert_measurement(m);
            let a = kalman_update(models[0].label, &predicted[0], &z)?;
            let b = kalman_update(models[1].label, &predicted[1], &z)?;
            let peak = a.log_likelihood.max(b.log_likelihood);
            let w = [
                predicted_probs[0] * (a.log_likelihood - peak).exp(),
                predicted_probs[1] * (b.log_likelihood - peak).exp(),
            ];
            ([a.estimate, b.estimate], normalized(w))
        }
    };

    let (mixed_mean, mixed_cov) = combine(&mode_probs, &estimates);
    let (anchor_trace, last_update_time) = match meas {
        Some(_) => (mixed_cov.trace(), time),
        None => (t.anchor_trace, t.last_update_time),
    };
    Ok(TrackState {
        models: estimates,
        mode_probs,
        mixed_mean,
        mixed_cov,
        anchor_trace,
        last_update_time,
        time,
    })
}

fn normalized(w: [f64; 2]) -> [f64; 2] {
    let total = w[0] + w[1];
    if total > 0.0 && total.is_finite() {
        let a = (w[0] / total).clamp(0.0, 1.0);
        [a, 1.0 - a]
    } else {
        [0.5, 0.5]
    }
}

/// IMM tracker configuration: the model pair, the tracker transition matrix
/// and the interval that matrix is defined over.
///
/// [`ImmFilter::step`] rescales the transition matrix to the actual step
/// length so the mode dynamics do not depend on how often the filter is
/// cycled.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ImmFilter {
    pub models: [MotionModel; 2],
    pub markov: Matrix2<f64>,
    pub markov_interval: f64,
}

impl ImmFilter {
    pub fn new(models: [MotionModel; 2], markov: Matrix2<f64>, markov_interval: f64) -> Result<Self, ImmError> {
        check_markov(&markov)?;
        if !(markov_interval > 0.0 && markov_interval.is_finite()) {
            return Err(ImmError::InvalidStep(markov_interval));
        }
        if 1.0 - markov[(0, 1)] - markov[(1, 0)] < 0.0 {
            // A negative second eigenvalue has no real fractional power.
            return Err(ImmError::InvalidMarkov { row: 0, sum: markov[(0, 0)] + markov[(0, 1)] });
        }
        Ok(Self {
            models,
            markov,
            markov_interval,
        })
    }

    /// Symmetric transition matrix with stay probability `stay`.
    pub fn symmetric(low_intensity: f64, ratio: f64, stay: f64, markov_interval: f64) -> Result<Self, ImmError> {
        let markov = Matrix2::new(stay, 1.0 - stay, 1.0 - stay, stay);
        Self::new(MotionModel::pair(low_intensity, ratio)?, markov, markov_interval)
    }

    /// Transition matrix over `dt`: `Pi + lambda^(dt / interval) (I - Pi)`,
    /// where `Pi` is the stationary projector and `lambda` the second
    /// eigenvalue.
    pub fn transition_over(&self, dt: f64) -> Matrix2<f64> {
        let (a, b) = (self.markov[(0, 1)], self.markov[(1, 0)]);
        let leave = a + b;
        if leave == 0.0 {
            return Matrix2::identity();
        }
        if dt == self.markov_interval {
            return self.markov;
        }
        let pi = [b / leave, a / leave];
        let decay = (1.0 - leave).powf(dt / self.markov_interval);
        let mut m = Matrix2::zeros();
        for i in 0..2 {
            for j in 0..2 {
                let delta = if i == j { 1.0 } else { 0.0 };
                m[(i, j)] = pi[j] + decay * (delta - pi[j]);
            }
        }
        m
    }

    pub fn step(&self, t: &TrackState, dt: f64, meas: Option<&Measurement>) -> Result<TrackState, ImmError> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(ImmError::InvalidStep(dt));
        }
        imm_step(&self.models, &self.transition_over(dt), t, dt, meas)
    }

    /// Prediction to absolute time `time`; returns `t` unchanged if `time`
    /// is not ahead of it.
    pub fn predict_to(&self, t: &TrackState, time: f64) -> Result<TrackState, ImmError> {
        let dt = time - t.time;
        if dt <= 0.0 {
            return Ok(*t);
        }
        self.step(t, dt, None)
    }

    /// Measurement update at the measurement timestamp.
    pub fn update(&self, t: &TrackState, meas: &Measurement) -> Result<TrackState, ImmError> {
        self.step(t, meas.timestamp - t.time, Some(meas))
    }

    /// Stationary mode distribution of the transition matrix.
    pub fn stationary(&self) -> [f64; 2] {
        let (a, b) = (self.markov[(0, 1)], self.markov[(1, 0)]);
        if a + b == 0.0 {
            return [0.5, 0.5];
        }
        [b / (a + b), a / (a + b)]
    }
}

pub fn up_to_date_probability(t: &TrackState) -> Belief {
    Belief::new(t.mode_probs[0].clamp(0.0, 1.0)).expect("clamped")
}

/// Good track iff the mixed-covariance trace is within `tau`.
pub fn track_quality_observation(t: &TrackState, tau: f64) -> TrackObservation {
    if t.trace() <= tau {
        TrackObservation::GoodTrack
    } else {
        TrackObservation::BadTrack
    }
}
