//! Single-scenario simulation: scheduler, trackers and measurements.
//!
//! At every decision instant all tracks are predicted to the clock. Those
//! predictions feed the selection policy, the priority rings and the epoch
//! metrics. A track task that starts produces a measurement at the end of
//! its dwell, which updates that target's filter.

use thiserror::Error;

use crate::harness::metrics::{
    average_error, lateness_cost, occupancy, probable_drop_count, BusyInterval, EpochRecord, RunMetrics, TaskUpdateLog,
    TrackSnapshot,
};
use crate::imm::{up_to_date_probability, ImmError, ImmFilter, TrackState};
use crate::cost::CostInputs;
use crate::policy::Belief;
use crate::prioritizer::{
    ring_position, tracking_invalidity, FuzzyPrioritizer, MlpPrioritizer, PrioritizerError, PriorityInputs,
};
use crate::scenario::{assign_priority_with, Scenario, ScenarioError};
use crate::scheduler::{
    Assignment, AssignmentAction, RadarTask, SchedError, SchedulerState, SelectionPolicy, StepOutcome, TaskId, TaskKind,
    TrackInfoSource,
};

#[derive(Debug, Error)]
pub enum SimError {
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error(transparent)]
    Imm(#[from] ImmError),
    #[error(transparent)]
    Sched(#[from] SchedError),
    #[error(transparent)]
    Prioritizer(#[from] PrioritizerError),
    #[error("policy '{0}' needs a prioritizer that was not provided")]
    MissingPrioritizer(SelectionPolicy),
}

/// Prioritizers available to the prioritizer-driven policies.
#[derive(Debug, Clone, Default)]
pub struct Prioritizers {
    pub mlp: Option<MlpPrioritizer>,
    pub fuzzy: Option<FuzzyPrioritizer>,
}

impl Prioritizers {
    /// Builds what `policies` need: trains the network and loads the
    /// bundled rule base.
    pub fn for_policies(policies: &[SelectionPolicy]) -> Result<Self, PrioritizerError> {
        let mlp = if policies.contains(&SelectionPolicy::NeuralNet) {
            Some(MlpPrioritizer::pretrained()?)
        } else {
            None
        };
        let fuzzy = policies
            .contains(&SelectionPolicy::FuzzyLogic)
            .then(FuzzyPrioritizer::standard);
        Ok(Self { mlp, fuzzy })
    }

    fn check(&self, policy: SelectionPolicy) -> Result<(), SimError> {
        let ok = match policy {
            SelectionPolicy::NeuralNet => self.mlp.is_some(),
            SelectionPolicy::FuzzyLogic => self.fuzzy.is_some(),
            _ => true,
        };
        if ok {
            Ok(())
        } else {
            Err(SimError::MissingPrioritizer(policy))
        }
    }
}

/// Hook called after every scheduling step.
pub trait SimObserver {
    fn on_step(&mut self, before: &SchedulerState, outcome: &StepOutcome, after: &SchedulerState);
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SimOptions {
    /// Keep every assignment in the output.
    pub record_assignments: bool,
    /// Keep the epoch records and logs in the output.
    pub record_logs: bool,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SimOutput {
    pub metrics: RunMetrics,
    pub assignments: Vec<Assignment>,
    pub epochs: Vec<EpochRecord>,
    pub update_logs: Vec<TaskUpdateLog>,
    pub busy: Vec<BusyInterval>,
}

/// Filter state at one decision instant, as seen by the selection policies.
struct EpochView<'a> {
    predicted: &'a [TrackState],
    /// Traces predicted one cost horizon ahead; empty unless needed.
    ahead: &'a [f64],
    ring_width_km: f64,
    prioritizers: &'a Prioritizers,
}

impl EpochView<'_> {
    fn target(task: &RadarTask) -> usize {
        task.target().expect("selection policies only query tracks")
    }

    fn inputs(&self, task: &RadarTask) -> PriorityInputs {
        let est = &self.predicted[Self::target(task)];
        PriorityInputs::new(
            ring_position(est.range() / 1e3, self.ring_width_km),
            est.radial_velocity().abs(),
            tracking_invalidity(est.trace()),
            task.allowable_lateness,
            task.priority,
        )
    }
}

impl TrackInfoSource for EpochView<'_> {
    fn belief(&self, task: &RadarTask) -> Belief {
        up_to_date_probability(&self.predicted[Self::target(task)])
    }

    fn trace(&self, task: &RadarTask) -> f64 {
        self.predicted[Self::target(task)].trace()
    }

    fn cost_inputs(&self, task: &RadarTask) -> CostInputs {
        let n = Self::target(task);
        let est = &self.predicted[n];
        CostInputs {
            requesting: true,
            trace_now: est.trace(),
            trace_predicted: self.ahead.get(n).copied().unwrap_or(est.trace()),
            trace_anchor: est.anchor_trace,
        }
    }

    fn score(&self, task: &RadarTask, policy: SelectionPolicy) -> Result<f64, SchedError> {
        let x = self.inputs(task);
        let out = match policy {
            SelectionPolicy::NeuralNet => self.prioritizers.mlp.as_ref().map(|m| m.forward(&x)),
            SelectionPolicy::FuzzyLogic => self.prioritizers.fuzzy.as_ref().map(|f| f.infer(&x)),
            _ => None,
        };
        match out {
            Some(r) => r.map_err(|e| SchedError::Score(e.to_string())),
            None => Err(SchedError::Score(format!("no prioritizer for policy '{policy}'"))),
        }
    }
}

/// Task list of a scenario: one track task per target, then the
/// surveillance fragments.
pub fn build_tasks(scenario: &Scenario, tracks: &[TrackState]) -> Result<Vec<RadarTask>, SimError> {
    let cfg = &scenario.config;
    let mut tasks = Vec::with_capacity(tracks.len() + scenario.fragment_t_tb.len());
    for (n, (script, track)) in scenario.targets.iter().zip(tracks).enumerate() {
        tasks.push(RadarTask {
            id: TaskId(n),
            kind: TaskKind::Track { target: n },
            priority: estimated_priority(track, cfg.ring_width_km, cfg.instrumented_range_km)?,
            t_tb: script.initial_t_tb,
            update_time: cfg.track_update_time,
            dwell: cfg.track_dwell,
            allowable_lateness: script.allowable_lateness,
            arrival_seq: 0,
        });
    }
    for (f, &t_tb) in scenario.fragment_t_tb.iter().enumerate() {
        tasks.push(RadarTask {
            id: TaskId(tracks.len() + f),
            kind: TaskKind::Surveillance { fragment: f },
            priority: 1,
            t_tb,
            update_time: cfg.surveillance_update_time,
            dwell: cfg.surveillance_dwell,
            allowable_lateness: 0.0,
            arrival_seq: 0,
        });
    }
    Ok(tasks)
}

/// Range-ring priority of the estimated position, clamped to the
/// instrumented range.
pub fn estimated_priority(track: &TrackState, ring_width_km: f64, max_range_km: f64) -> Result<u8, SimError> {
    let km = (track.range() / 1e3).clamp(0.0, max_range_km);
    Ok(assign_priority_with(km, ring_width_km, max_range_km)?)
}

pub fn simulate(
    scenario: &Scenario,
    policy: SelectionPolicy,
    prioritizers: &Prioritizers,
    options: SimOptions,
    mut observer: Option<&mut dyn SimObserver>,
) -> Result<SimOutput, SimError> {
    prioritizers.check(policy)?;
    let cfg = &scenario.config;
    let tracker: ImmFilter = cfg.tracker()?;
    let params = cfg.policy_params()?;
    let n = scenario.targets.len();

    let mut tracks = Vec::with_capacity(n);
    for target in 0..n {
        let meas = scenario.measure(target, 0, 0.0)?;
        tracks.push(TrackState::initiate(&meas, cfg.init_velocity_sigma)?);
    }
    let mut counts = vec![1u64; n];
    let mut state = SchedulerState::new(build_tasks(scenario, &tracks)?, cfg.bands)?;

    let mut update_logs: Vec<TaskUpdateLog> = scenario
        .targets
        .iter()
        .map(|s| TaskUpdateLog {
            update_time: cfg.track_update_time,
            allowable_lateness: s.allowable_lateness,
            times: vec![0.0],
            horizon: Some(cfg.duration),
        })
        .collect();
    let mut epochs = Vec::new();
    let mut busy = Vec::new();
    let mut assignments = Vec::new();
    let mut n_track = 0usize;
    let mut n_surv = 0usize;
    let mut predicted = Vec::with_capacity(n);
    let mut ahead = Vec::with_capacity(n);

    while state.clock < cfg.duration {
        let now = state.clock;
        predicted.clear();
        for t in &tracks {
            predicted.push(tracker.predict_to(t, now)?);
        }
        ahead.clear();
        if policy == SelectionPolicy::DecP {
            for p in &predicted {
                ahead.push(tracker.predict_to(p, now + cfg.cost_horizon)?.trace());
            }
        }
        for (task, est) in state.tasks.iter_mut().zip(&predicted) {
            task.priority = estimated_priority(est, cfg.ring_width_km, cfg.instrumented_range_km)?;
        }
        epochs.push(EpochRecord {
            time: now,
            tracks: state.tasks[..n]
                .iter()
                .zip(&predicted)
                .map(|(task, est)| TrackSnapshot {
                    priority: task.priority,
                    t_tb: task.t_tb,
                    trace: est.trace(),
                })
                .collect(),
        });

        let view = EpochView {
            predicted: &predicted,
            ahead: &ahead,
            ring_width_km: cfg.ring_width_km,
            prioritizers,
        };
        let before = observer.is_some().then(|| state.clone());
        let outcome = state.schedule_step(policy, &params, &view)?;
        if let (Some(obs), Some(before)) = (observer.as_deref_mut(), before.as_ref()) {
            obs.on_step(before, &outcome, &state);
        }

        for a in &outcome.assignments {
            if a.action == AssignmentAction::Idle {
                continue;
            }
            busy.push(BusyInterval {
                band: a.band,
                start: a.start,
                end: a.start + a.duration,
            });
            let idx = a.task.expect("non-idle assignment has a task");
            match state.tasks[idx].kind {
                TaskKind::Track { target } => {
                    n_track += 1;
                    update_logs[target].times.push(a.start);
                    let when = a.start + a.duration;
                    let meas = scenario.measure(target, counts[target], when)?;
                    counts[target] += 1;
                    tracks[target] = tracker.update(&tracks[target], &meas)?;
                }
                TaskKind::Surveillance { .. } => n_surv += 1,
            }
        }
        if options.record_assignments {
            assignments.extend(outcome.assignments);
        }
    }

    let metrics = RunMetrics {
        n_tracking_tasks: n_track as f64,
        n_surveillances: n_surv as f64,
        probable_drops: probable_drop_count(&update_logs) as f64,
        occupancy: occupancy(&busy, cfg.bands, cfg.duration),
        cost: lateness_cost(&epochs),
        avg_error: average_error(&epochs),
    };
    if !options.record_logs {
        epochs.clear();
        update_logs.clear();
        busy.clear();
    }
    Ok(SimOutput {
        metrics,
        assignments,
        epochs,
        update_logs,
        busy,
    })
}
