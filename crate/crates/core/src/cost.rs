//! Coupled update cost.
//!
//! Updating one track delays every other requesting track, so the cost of an
//! update is the worst deterioration among the other requesters divided by
//! the improvement this update buys:
//!
//! ```text
//! K_n = max_{l != n} ( m0_l * x_l ) / m1_n * x_n
//! m0 = trace(P_{k+1}) - trace(P_{k0})      deterioration if not updated
//! m1 = trace(P_k)     - trace(P_{k0})      improvement from an update
//! ```
//!
//! `P_{k0}` is the mixed covariance right after the last measurement update.

use thiserror::Error;

/// Lower clamp on the improvement `m1`, m^2.
pub const MIN_IMPROVEMENT: f64 = 1.0;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CostError {
    #[error("target {0} is not requesting an update")]
    NotRequesting(usize),
    #[error("target index {index} out of range for {len} targets")]
    IndexOutOfRange { index: usize, len: usize },
}

/// Trace bookkeeping of one target at a decision epoch, all in m^2.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CostInputs {
    pub requesting: bool,
    pub trace_now: f64,
    pub trace_predicted: f64,
    pub trace_anchor: f64,
}

impl CostInputs {
    /// `m0`.
    pub fn deterioration(&self) -> f64 {
        self.trace_predicted - self.trace_anchor
    }

    /// `m1`.
    pub fn improvement(&self) -> f64 {
        self.trace_now - self.trace_anchor
    }
}

pub fn deterioration(c: &CostInputs) -> f64 {
    c.deterioration()
}

pub fn improvement(c: &CostInputs) -> f64 {
    c.improvement()
}

/// Update cost `K` of target `n`.
///
/// Non-requesting competitors contribute zero, negative deteriorations are
/// floored at zero, and an empty competitor set gives `K = 0`.
pub fn update_cost(all: &[CostInputs], n: usize) -> Result<f64, CostError> {
    let own = all.get(n).ok_or(CostError::IndexOutOfRange { index: n, len: all.len() })?;
    if !own.requesting {
        return Err(CostError::NotRequesting(n));
    }
    let worst = all
        .iter()
        .enumerate()
        .filter(|&(l, _)| l != n)
        .map(|(_, c)| if c.requesting { c.deterioration().max(0.0) } else { 0.0 })
        .fold(0.0, f64::max);
    Ok(worst / own.improvement().max(MIN_IMPROVEMENT))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn req(now: f64, pred: f64, anchor: f64) -> CostInputs {
        CostInputs {
            requesting: true,
            trace_now: now,
            trace_predicted: pred,
            trace_anchor: anchor,
        }
    }

    #[test]
    fn metrics() {
        let c = req(4e5, 5e5, 2e5);
        assert_eq!(deterioration(&c), 3e5);
        assert_eq!(improvement(&c), 2e5);
        let fresh = req(2e5, 2e5, 2e5);
        assert_eq!(deterioration(&fresh), 0.0);
        assert_eq!(improvement(&fresh), 0.0);
    }

    #[test]
    fn lone_requester_is_free() {
        let idle = CostInputs { requesting: false, ..req(9e5, 9e9, 0.0) };
        assert_eq!(update_cost(&[req(4e5, 5e5, 2e5), idle], 0).unwrap(), 0.0);
    }

    #[test]
    fn two_requesters() {
        let all = [req(4e5, 5e5, 2e5), req(3e5, 6e5, 2e5)];
        assert!((update_cost(&all, 0).unwrap() - 2.0).abs() < 1e-15);
    }

    #[test]
    fn clamps_and_errors() {
        let all = [req(2e5, 2e5, 2e5), req(3e5, 3e5 + 10.0, 3e5)];
        assert_eq!(update_cost(&all, 0).unwrap(), 10.0);
        let shrunk = [req(3e5, 3e5, 2e5), req(1e5, 1e5, 2e5)];
        assert_eq!(update_cost(&shrunk, 0).unwrap(), 0.0);
        let idle = CostInputs { requesting: false, ..req(1.0, 1.0, 0.0) };
        assert_eq!(update_cost(&[idle], 0), Err(CostError::NotRequesting(0)));
        assert!(matches!(update_cost(&[idle], 3), Err(CostError::IndexOutOfRange { .. })));
    }
}
