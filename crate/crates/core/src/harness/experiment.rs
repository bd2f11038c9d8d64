//! Monte Carlo comparison of selection policies.
//!
//! Every scenario is generated once and simulated under each policy, so all
//! policies see the same targets and the same measurement noise. Scenarios
//! run in parallel; results are collected in scenario order.

use rayon::prelude::*;

use crate::harness::metrics::{rank_scenario, RunMetrics, StandingCounts};
use crate::harness::sim::{simulate, Prioritizers, SimError, SimOptions};
use crate::scenario::{scenario_seed, Scenario, ScenarioConfig, ScenarioError};
use crate::scheduler::SelectionPolicy;

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentResult {
    pub policies: Vec<SelectionPolicy>,
    /// Mean metrics per policy.
    pub means: Vec<RunMetrics>,
    pub standings: Vec<StandingCounts>,
    /// `per_scenario[s][p]`.
    pub per_scenario: Vec<Vec<RunMetrics>>,
}

/// Simulates `n_scenarios` scenarios under every policy in `policies`.
/// Scenario `i` uses `scenario_seed(cfg.seed, i)`.
pub fn run_experiment(
    cfg: &ScenarioConfig,
    policies: &[SelectionPolicy],
    n_scenarios: usize,
) -> Result<ExperimentResult, SimError> {
    cfg.validate()?;
    if policies.is_empty() {
        return Err(ScenarioError::InvalidConfig("no policies listed".into()).into());
    }
    if n_scenarios == 0 {
        return Err(ScenarioError::InvalidConfig("at least one scenario is required".into()).into());
    }
    let prioritizers = Prioritizers::for_policies(policies)?;
    run_with(cfg, policies, n_scenarios, &prioritizers)
}

pub fn run_with(
    cfg: &ScenarioConfig,
    policies: &[SelectionPolicy],
    n_scenarios: usize,
    prioritizers: &Prioritizers,
) -> Result<ExperimentResult, SimError> {
    let per_scenario = (0..n_scenarios)
        .into_par_iter()
        .map(|i| {
            let scenario = Scenario::generate(cfg, scenario_seed(cfg.seed, i))?;
            policies
                .iter()
                .map(|&p| simulate(&scenario, p, prioritizers, SimOptions::default(), None).map(|o| o.metrics))
                .collect::<Result<Vec<_>, _>>()
        })
        .collect::<Result<Vec<_>, SimError>>()?;

    let mut standings = vec![StandingCounts::default(); policies.len()];
    for runs in &per_scenario {
        let errors: Vec<f64> = runs.iter().map(|m| m.avg_error).collect();
        for (p, s) in rank_scenario(&errors).into_iter().enumerate() {
            standings[p].add(s);
        }
    }
    let means = (0..policies.len())
        .map(|p| {
            let runs: Vec<RunMetrics> = per_scenario.iter().map(|r| r[p]).collect();
            RunMetrics::mean(&runs)
        })
        .collect();
    Ok(ExperimentResult {
        policies: policies.to_vec(),
        means,
        standings,
        per_scenario,
    })
}
