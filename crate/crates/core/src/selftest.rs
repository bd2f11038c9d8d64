//! Built-in property checks run by `tbsched selftest`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::harness::metrics::{occupancy, BusyInterval};
use crate::harness::output::threshold_table;
use crate::imm::{ImmFilter, Measurement, TrackState};
use crate::policy::{compute_threshold, decide_action, mu_star, propagate_up, Belief, PolicyParams, TrackObservation, UpdateAction};
use crate::prioritizer::{tracking_invalidity, FuzzyPrioritizer};

/// Reference thresholds `(K, r, theta0, mu_th, M)` at `alpha = 0.99`.
pub const REFERENCE_THRESHOLDS: [(f64, f64, f64, f64, usize); 18] = [
    (0.1, 0.90, 0.75, 0.8069, 1),
    (0.1, 0.90, 0.80, 0.8073, 1),
    (0.1, 0.90, 0.90, 0.8082, 1),
    (0.1, 0.95, 0.75, 0.8569, 1),
    (0.1, 0.95, 0.80, 0.8573, 1),
    (0.1, 0.95, 0.90, 0.8582, 1),
    (1.0, 0.90, 0.75, 0.3984, 2),
    (1.0, 0.90, 0.80, 0.3933, 2),
    (1.0, 0.90, 0.90, 0.3799, 2),
    (1.0, 0.95, 0.75, 0.4667, 2),
    (1.0, 0.95, 0.80, 0.4611, 2),
    (1.0, 0.95, 0.90, 0.4464, 2),
    (2.5, 0.90, 0.75, 0.1809, 3),
    (2.5, 0.90, 0.80, 0.1755, 3),
    (2.5, 0.90, 0.90, 0.1730, 2),
    (2.5, 0.95, 0.75, 0.2503, 3),
    (2.5, 0.95, 0.80, 0.2429, 3),
    (2.5, 0.95, 0.90, 0.2315, 2),
];

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn new(name: &'static str, passed: bool, detail: impl Into<String>) -> Self {
        Self {
            name,
            passed,
            detail: detail.into(),
        }
    }

    pub fn detail_suffix(&self) -> String {
        if self.detail.is_empty() {
            String::new()
        } else {
            format!(": {}", self.detail)
        }
    }
}

pub fn threshold_table_check() -> Check {
    let rows = match threshold_table() {
        Ok(r) => r,
        Err(e) => return Check::new("threshold table", false, e.to_string()),
    };
    let mut worst = 0.0f64;
    let mut segments_ok = true;
    for (row, &(k, r, th, mu, m)) in rows.iter().zip(&REFERENCE_THRESHOLDS) {
        debug_assert!(row.cost_k == k && row.r == r && row.theta0 == th);
        worst = worst.max((row.mu_th - mu).abs());
        segments_ok &= row.segments == m;
    }
    Check::new(
        "threshold table",
        worst <= 5e-4 && segments_ok,
        format!("max |dmu_th| = {worst:.2e}, segments match = {segments_ok}"),
    )
}

pub fn degenerate_check() -> Check {
    let p = PolicyParams::closed_form(0.99, 0.75, 0.9).expect("valid");
    let t = compute_threshold(&p, 9.0).expect("valid");
    let all_keep = (0..=1000).all(|i| {
        let mu = Belief::new(i as f64 / 1000.0).expect("grid in [0,1]");
        decide_action(mu, t.mu_th) == UpdateAction::NotUpdate
    });
    Check::new("degenerate policy", t.degenerate && t.mu_th == 0.0 && all_keep, "")
}

/// Monotonicity, curvature, inverse and fixed-point checks of the belief
/// maps over 20 seeded parameter sets.
pub fn belief_map_check(seed: u64) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut failures = Vec::new();
    let mut sets = 0;
    while sets < 20 {
        let theta0 = rng.random_range(0.55..0.99);
        let theta1 = if sets % 4 == 0 { 0.0 } else { rng.random_range(0.0..theta0 * 0.8) };
        let r = rng.random_range(0.6..0.99);
        if r * theta0 <= theta1 {
            continue;
        }
        sets += 1;
        let p = PolicyParams::new(0.99, theta0, theta1, r).expect("valid");
        let hgt = |x: f64| propagate_up(&p, Belief::new(x).unwrap(), TrackObservation::GoodTrack).unwrap().value();
        let hbt = |x: f64| propagate_up(&p, Belief::new(x).unwrap(), TrackObservation::BadTrack).unwrap().value();
        let h = 1e-3;
        for i in 1..1000 {
            let x = i as f64 / 1000.0;
            // With theta1 = 0 the good-track map is the constant r.
            let gt_ok = if theta1 == 0.0 { hgt(x + h) >= hgt(x) } else { hgt(x + h) > hgt(x) };
            if i < 999 && (!gt_ok || hbt(x + h) <= hbt(x)) {
                failures.push(format!("monotone at {x}"));
            }
            if i > 1 && i < 999 {
                let dg = hgt(x + h) - 2.0 * hgt(x) + hgt(x - h);
                let db = hbt(x + h) - 2.0 * hbt(x) + hbt(x - h);
                if dg > 1e-9 || db < -1e-9 {
                    failures.push(format!("curvature at {x}"));
                }
            }
        }
        for i in 1..100 {
            let x = r * i as f64 / 100.0;
            let inv = crate::policy::h_bt_inverse(&p, x).unwrap();
            if (hbt(inv) - x).abs() > 1e-12 {
                failures.push(format!("inverse at {x}"));
            }
        }
        let fixed = mu_star(&p).unwrap();
        if (hgt(fixed) - fixed).abs() > 1e-12 {
            failures.push("fixed point".into());
        }
        if theta1 == 0.0 && (fixed - r).abs() > 1e-15 {
            failures.push("theta1 = 0 fixed point".into());
        }
    }
    Check::new("belief maps", failures.is_empty(), failures.into_iter().take(3).collect::<Vec<_>>().join("; "))
}

pub fn mode_normalization_check(steps: usize) -> Check {
    let filter = ImmFilter::symmetric(0.5, 1e4, 0.95, 1.0).expect("valid");
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let meas = Measurement::new(5e4, 0.3, 0.0, 80.0, 0.003).expect("valid");
    let mut t = TrackState::initiate(&meas, 100.0).expect("valid");
    let mut worst = 0.0f64;
    for k in 1..=steps {
        let time = k as f64 * 0.5;
        let m = if k % 3 == 0 {
            Measurement::new(5e4 + rng.random_range(-200.0..200.0), 0.3 + rng.random_range(-0.005..0.005), time, 80.0, 0.003).ok()
        } else {
            None
        };
        t = match filter.step(&t, 0.5, m.as_ref()) {
            Ok(s) => s,
            Err(e) => return Check::new("mode normalization", false, e.to_string()),
        };
        worst = worst.max((t.mode_probs[0] + t.mode_probs[1] - 1.0).abs());
    }
    Check::new("mode normalization", worst <= 1e-12, format!("max drift {worst:.1e} over {steps} steps"))
}

pub fn invalidity_check() -> Check {
    let err = (tracking_invalidity(1e6) - 1f64.tanh()).abs();
    Check::new("track invalidity", err <= 1e-9, format!("|TI(1e6) - tanh 1| = {err:.1e}"))
}

pub fn fuzzy_coverage_check() -> Check {
    let f = FuzzyPrioritizer::standard();
    let covered = f.inputs.iter().chain(std::iter::once(&f.output)).all(|p| {
        (0..=500).all(|i| {
            let x = p.lo() + (p.hi() - p.lo()) * i as f64 / 500.0;
            p.memberships(x).iter().sum::<f64>() >= 1.0 - 1e-12
        })
    });
    Check::new("fuzzy coverage", covered, "")
}

pub fn occupancy_check() -> Check {
    let busy = [BusyInterval { band: 0, start: 0.0, end: 10.0 }];
    let ok = occupancy(&[], 1, 10.0) == 0.0 && occupancy(&busy, 1, 10.0) == 1.0 && occupancy(&busy, 2, 10.0) == 0.5;
    Check::new("occupancy", ok, "")
}

pub fn run_all() -> Vec<Check> {
    vec![
        threshold_table_check(),
        degenerate_check(),
        belief_map_check(2024),
        mode_normalization_check(10_000),
        invalidity_check(),
        fuzzy_coverage_check(),
        occupancy_check(),
    ]
}

#[cfg(test)]
mod tests {
    #[test]
    fn all_checks_pass() {
        for c in super::run_all() {
            assert!(c.passed, "{}{}", c.name, c.detail_suffix());
        }
    }
}
