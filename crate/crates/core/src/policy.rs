//! Machine-replacement threshold policy for a single track.
//!
//! Each track is a two-state hidden Markov chain: *up-to-date* (the track is
//! predictable) or *stale*. Without an update an up-to-date track stays
//! up-to-date with probability `r` and the stale state is absorbing. An update
//! restores the up-to-date state with probability `q`, and this crate fixes
//! `q = r`. The filter reports a noisy *good track* / *bad track* observation
//! with
//!
//! ```text
//! P(good | up-to-date) = theta0
//! P(good | stale)      = theta1
//! ```
//!
//! The belief `mu` is the probability of the up-to-date state. With
//! `theta1 = 0` the infinite-horizon value function of the no-update action is
//! piecewise linear and convex, and the optimal rule is a control limit: update
//! iff `mu < mu_th`. [`compute_threshold`] finds `mu_th` by growing the segment
//! count `M` until the bracketing condition `H_bt^M(r) < mu_th` holds.

use thiserror::Error;

/// Maximum number of value-function segments searched by [`compute_threshold`].
pub const MAX_SEGMENTS: usize = 64;

/// Below this the update-value denominator is treated as singular.
pub const DENOMINATOR_GUARD: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PolicyError {
    #[error("invalid policy parameter {name} = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },
    #[error("belief {0} is outside [0, 1]")]
    InvalidBelief(f64),
    #[error("observation {obs:?} has zero probability at belief {mu}")]
    DegenerateEvidence { obs: TrackObservation, mu: f64 },
    #[error("inverse of H_bt is defined on (0, r) = (0, {r}); got {x}")]
    Domain { x: f64, r: f64 },
    #[error("no interior fixed point: r*theta0 = {r_theta0} <= theta1 = {theta1}")]
    NoFixedPoint { r_theta0: f64, theta1: f64 },
    #[error("closed-form threshold requires theta1 = 0, got {0}")]
    UnsupportedParameters(f64),
    #[error("segment count must be at least 1")]
    ZeroSegments,
    #[error("update cost must be finite and non-negative, got {0}")]
    NegativeCost(f64),
    #[error("update-value denominator {denominator:e} is singular for M = {segments}")]
    SingularDenominator { denominator: f64, segments: usize },
    #[error("threshold search did not bracket within {0} segments")]
    NonConvergence(usize),
}

/// Constants of the machine-replacement model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolicyParams {
    alpha: f64,
    theta0: f64,
    theta1: f64,
    r: f64,
    q: f64,
    informative: bool,
}

impl PolicyParams {
    /// Validates and builds the parameter set; `q` is set equal to `r`.
    pub fn new(alpha: f64, theta0: f64, theta1: f64, r: f64) -> Result<Self, PolicyError> {
        let bad = |name, value, reason| Err(PolicyError::InvalidParameter { name, value, reason });
        if !(alpha > 0.0 && alpha < 1.0) {
            return bad("alpha", alpha, "must lie in (0, 1)");
        }
        if !(theta0 > 0.0 && theta0 <= 1.0) {
            return bad("theta0", theta0, "must lie in (0, 1]");
        }
        if !(theta1 >= 0.0 && theta1 < theta0) {
            return bad("theta1", theta1, "must satisfy 0 <= theta1 < theta0");
        }
        if !(r > 0.0 && r < 1.0) {
            return bad("r", r, "must lie in (0, 1)");
        }
        Ok(Self {
            alpha,
            theta0,
            theta1,
            r,
            q: r,
            informative: r * theta0 > theta1,
        })
    }

    /// Parameters for the closed-form threshold path (`theta1 = 0`).
    pub fn closed_form(alpha: f64, theta0: f64, r: f64) -> Result<Self, PolicyError> {
        Self::new(alpha, theta0, 0.0, r)
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn theta0(&self) -> f64 {
        self.theta0
    }

    pub fn theta1(&self) -> f64 {
        self.theta1
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    /// `r * theta0 > theta1`: observations can push the belief upward.
    pub fn is_informative(&self) -> bool {
        self.informative
    }

    /// Cost above which the no-update action is always optimal, `r / (1 - alpha r)`.
    pub fn degenerate_cost_bound(&self) -> f64 {
        self.r / (1.0 - self.alpha * self.r)
    }

    fn require_closed_form(&self) -> Result<(), PolicyError> {
        if self.theta1 != 0.0 {
            return Err(PolicyError::UnsupportedParameters(self.theta1));
        }
        Ok(())
    }
}

/// Probability that a track is in the up-to-date state.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Belief(f64);

impl Belief {
    /// Prior belief of a freshly initiated track.
    pub const INITIAL: Belief = Belief(0.5);

    pub fn new(mu: f64) -> Result<Self, PolicyError> {
        if (0.0..=1.0).contains(&mu) {
            Ok(Self(mu))
        } else {
            Err(PolicyError::InvalidBelief(mu))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

impl Default for Belief {
    fn default() -> Self {
        Self::INITIAL
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TrackObservation {
    GoodTrack,
    BadTrack,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum UpdateAction {
    Update,
    NotUpdate,
}

/// Output of [`compute_threshold`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThresholdResult {
    pub mu_th: f64,
    /// Number of linear segments `M`; zero for the degenerate policy.
    pub segments: usize,
    pub v_upd: f64,
    pub degenerate: bool,
}

impl ThresholdResult {
    fn degenerate() -> Self {
        Self {
            mu_th: 0.0,
            segments: 0,
            v_upd: f64::NAN,
            degenerate: true,
        }
    }
}

pub fn prob_good_track(p: &PolicyParams, mu: Belief) -> f64 {
    (p.theta0 - p.theta1) * mu.0 + p.theta1
}

pub fn prob_bad_track(p: &PolicyParams, mu: Belief) -> f64 {
    1.0 - prob_good_track(p, mu)
}

fn likelihood_up(p: &PolicyParams, obs: TrackObservation) -> f64 {
    match obs {
        TrackObservation::GoodTrack => p.theta0,
        TrackObservation::BadTrack => 1.0 - p.theta0,
    }
}

fn evidence(p: &PolicyParams, mu: Belief, obs: TrackObservation) -> Result<f64, PolicyError> {
    let e = match obs {
        TrackObservation::GoodTrack => prob_good_track(p, mu),
        TrackObservation::BadTrack => prob_bad_track(p, mu),
    };
    if e > 0.0 {
        Ok(e)
    } else {
        Err(PolicyError::DegenerateEvidence { obs, mu: mu.0 })
    }
}

/// Bayes posterior of the up-to-date state after observing `obs`.
pub fn posterior_up(p: &PolicyParams, mu: Belief, obs: TrackObservation) -> Result<f64, PolicyError> {
    let e = evidence(p, mu, obs)?;
    Ok(likelihood_up(p, obs) * mu.0 / e)
}

/// One-step belief under the no-update action: `H_gt` or `H_bt`.
pub fn propagate_up(p: &PolicyParams, mu: Belief, obs: TrackObservation) -> Result<Belief, PolicyError> {
    let post = posterior_up(p, mu, obs)?;
    // r * post with post in [0, 1]; the min guards the last ulp.
    Ok(Belief((p.r * post).min(p.r)))
}

/// `H_bt` on a raw probability. The closed-form path only evaluates it on
/// `(0, r]`, where the denominator is strictly positive.
fn h_bt(p: &PolicyParams, x: f64) -> f64 {
    p.r * (1.0 - p.theta0) * x / (1.0 - (p.theta0 - p.theta1) * x - p.theta1)
}

/// Inverse of `H_bt` on `(0, r)`.
pub fn h_bt_inverse(p: &PolicyParams, x: f64) -> Result<f64, PolicyError> {
    if p.theta0 >= 1.0 || !(x > 0.0 && x < p.r) {
        return Err(PolicyError::Domain { x, r: p.r });
    }
    Ok((1.0 - p.theta1) * x / ((p.theta0 - p.theta1) * x + (1.0 - p.theta0) * p.r))
}

/// Interior fixed point of `H_gt`.
pub fn mu_star(p: &PolicyParams) -> Result<f64, PolicyError> {
    if !p.informative {
        return Err(PolicyError::NoFixedPoint {
            r_theta0: p.r * p.theta0,
            theta1: p.theta1,
        });
    }
    Ok((p.r * p.theta0 - p.theta1) / (p.theta0 - p.theta1))
}

/// `[r, H_bt(r), ..., H_bt^n(r)]`.
fn bad_track_orbit(p: &PolicyParams, n: usize) -> Vec<f64> {
    let mut orbit = Vec::with_capacity(n + 1);
    let mut x = p.r;
    orbit.push(x);
    for _ in 0..n {
        x = h_bt(p, x);
        orbit.push(x);
    }
    orbit
}

fn check_segments(p: &PolicyParams, segments: usize) -> Result<(), PolicyError> {
    p.require_closed_form()?;
    if segments == 0 {
        return Err(PolicyError::ZeroSegments);
    }
    Ok(())
}

fn a_m_from_orbit(p: &PolicyParams, orbit: &[f64], segments: usize) -> f64 {
    let mut total = p.r;
    let mut survive = 1.0;
    let mut discount = 1.0;
    for i in 1..segments {
        survive *= 1.0 - p.theta0 * orbit[i - 1];
        discount *= p.alpha;
        total += discount * orbit[i] * survive;
    }
    total
}

fn b_m_from_orbit(p: &PolicyParams, orbit: &[f64], segments: usize) -> f64 {
    orbit[..segments]
        .iter()
        .map(|h| p.alpha * (1.0 - p.theta0 * h))
        .product()
}

/// `A_M(r)`, the accumulated reward term of an `M`-segment value function.
pub fn a_m(p: &PolicyParams, segments: usize) -> Result<f64, PolicyError> {
    check_segments(p, segments)?;
    let orbit = bad_track_orbit(p, segments);
    Ok(a_m_from_orbit(p, &orbit, segments))
}

/// `B_M(r)`, the discounted probability of `M` consecutive bad tracks.
pub fn b_m(p: &PolicyParams, segments: usize) -> Result<f64, PolicyError> {
    check_segments(p, segments)?;
    let orbit = bad_track_orbit(p, segments);
    Ok(b_m_from_orbit(p, &orbit, segments))
}

fn check_cost(cost_k: f64) -> Result<(), PolicyError> {
    if cost_k.is_finite() && cost_k >= 0.0 {
        Ok(())
    } else {
        Err(PolicyError::NegativeCost(cost_k))
    }
}

fn v_upd_from_parts(p: &PolicyParams, cost_k: f64, a: f64, b: f64, segments: usize) -> Result<f64, PolicyError> {
    let denominator = 1.0 - p.alpha * p.theta0 * a - b;
    if denominator <= DENOMINATOR_GUARD {
        return Err(PolicyError::SingularDenominator { denominator, segments });
    }
    Ok((a * (1.0 + p.alpha * p.theta0 * cost_k) - cost_k) / denominator)
}

/// Value of the update action assuming an `M`-segment no-update value function.
pub fn v_upd(p: &PolicyParams, cost_k: f64, segments: usize) -> Result<f64, PolicyError> {
    check_segments(p, segments)?;
    check_cost(cost_k)?;
    let orbit = bad_track_orbit(p, segments);
    let a = a_m_from_orbit(p, &orbit, segments);
    let b = b_m_from_orbit(p, &orbit, segments);
    v_upd_from_parts(p, cost_k, a, b, segments)
}

/// Control limit for update cost `cost_k`.
///
/// Degenerate (`mu_th = 0`, never update) when `cost_k > r / (1 - alpha r)`.
/// At the bound itself the threshold has already reached 0, so it is
/// reported as degenerate too. Otherwise `M` grows from 1 until `H_bt^M(r) < mu_th`, bounded by
/// [`MAX_SEGMENTS`].
pub fn compute_threshold(p: &PolicyParams, cost_k: f64) -> Result<ThresholdResult, PolicyError> {
    p.require_closed_form()?;
    check_cost(cost_k)?;
    if cost_k >= p.degenerate_cost_bound() {
        return Ok(ThresholdResult::degenerate());
    }

    let scale = (1.0 - p.alpha) / (1.0 + p.alpha * p.theta0 * cost_k);
    let orbit = bad_track_orbit(p, MAX_SEGMENTS);
    // A_M and B_M are extended one term at a time as M grows.
    let mut a = p.r;
    let mut b = 1.0;
    let mut survive = 1.0;
    let mut discount = 1.0;
    for m in 1..=MAX_SEGMENTS {
        if m > 1 {
            survive *= 1.0 - p.theta0 * orbit[m - 2];
            discount *= p.alpha;
            a += discount * orbit[m - 1] * survive;
        }
        b *= p.alpha * (1.0 - p.theta0 * orbit[m - 1]);

        let v = v_upd_from_parts(p, cost_k, a, b, m)?;
        let mu_th = scale * v;
        if orbit[m] < mu_th {
            return Ok(ThresholdResult {
                mu_th,
                segments: m,
                v_upd: v,
                degenerate: false,
            });
        }
    }
    Err(PolicyError::NonConvergence(MAX_SEGMENTS))
}

/// Control-limit rule: keep (`NotUpdate`) while `mu >= mu_th`.
pub fn decide_action(mu: Belief, mu_th: f64) -> UpdateAction {
    if mu.0 >= mu_th {
        UpdateAction::NotUpdate
    } else {
        UpdateAction::Update
    }
}

/// `H_bt^n(r)`.
pub fn h_bt_power_at_r(p: &PolicyParams, n: usize) -> f64 {
    (0..n).fold(p.r, |x, _| h_bt(p, x))
}
