//! Time-balance scheduling for a multifunction radar.
//!
//! Tracking tasks compete for radar time with surveillance. Selection
//! policies range from the plain time-balance rule to a belief threshold
//! driven by an IMM tracker, and to learned and fuzzy prioritizers. The
//! [`harness`] runs them on seeded Monte Carlo scenarios.
//!
//! ```
//! use tbsched::policy::{compute_threshold, PolicyParams};
//!
//! let p = PolicyParams::closed_form(0.99, 0.9, 0.95)?;
//! let t = compute_threshold(&p, 0.1)?;
//! assert_eq!(t.segments, 1);
//! # Ok::<(), tbsched::policy::PolicyError>(())
//! ```

pub mod cost;
pub mod harness;
pub mod imm;
pub mod policy;
pub mod prioritizer;
pub mod scenario;
pub mod scheduler;
pub mod selftest;

// README and book chapters run as doc-tests.
#[cfg(doctest)]
#[doc = include_str!("../../../README.md")]
mod readme {}

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/threshold.md")]
    mod threshold {}
    #[doc = include_str!("../../../book/src/belief.md")]
    mod belief {}
    #[doc = include_str!("../../../book/src/cost.md")]
    mod cost {}
    #[doc = include_str!("../../../book/src/scheduling.md")]
    mod scheduling {}
    #[doc = include_str!("../../../book/src/prioritizers.md")]
    mod prioritizers {}
    #[doc = include_str!("../../../book/src/experiments.md")]
    mod experiments {}
}
