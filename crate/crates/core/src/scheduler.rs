//! Time-balance (TB) scheduling with pluggable target selection.
//!
//! Every task carries a time balance `t_tb`: positive means overdue, negative
//! means early. When a task starts, its balance drops by its update time;
//! every other task accrues the wall-clock time that elapses until the next
//! band frees up (on one band that is exactly the executed dwell).
//!
//! At each decision instant every free band takes one task. Tracks are
//! eligible when `t_tb >= 0`, and only those at the highest priority level
//! present compete. A [`SelectionPolicy`] picks among them; if nothing is
//! picked the most overdue surveillance fragment runs instead, provided
//! one is due. Otherwise the band idles for the shortest dwell.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::cost::{update_cost, CostError, CostInputs};
use crate::policy::{compute_threshold, Belief, PolicyError, PolicyParams};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SchedError {
    #[error("no eligible task to select from")]
    EmptyEligible,
    #[error("scheduler configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Policy(#[from] PolicyError),
    #[error(transparent)]
    Cost(#[from] CostError),
    #[error("prioritizer: {0}")]
    Score(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TaskId(pub usize);

impl fmt::Display for TaskId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TaskKind {
    Track { target: usize },
    Surveillance { fragment: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct RadarTask {
    pub id: TaskId,
    pub kind: TaskKind,
    /// 1 (lowest) to 5 (highest).
    pub priority: u8,
    /// Time balance, s.
    pub t_tb: f64,
    /// Revisit interval, s.
    pub update_time: f64,
    /// Execution time, s.
    pub dwell: f64,
    pub allowable_lateness: f64,
    /// FCFS order; refreshed each time the task runs.
    pub arrival_seq: u64,
}

impl RadarTask {
    pub fn is_track(&self) -> bool {
        matches!(self.kind, TaskKind::Track { .. })
    }

    pub fn target(&self) -> Option<usize> {
        match self.kind {
            TaskKind::Track { target } => Some(target),
            TaskKind::Surveillance { .. } => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SelectionPolicy {
    Conventional,
    DecP,
    MinTE,
    PurMM,
    NeuralNet,
    FuzzyLogic,
}

impl SelectionPolicy {
    pub const ALL: [SelectionPolicy; 6] = [
        SelectionPolicy::Conventional,
        SelectionPolicy::DecP,
        SelectionPolicy::MinTE,
        SelectionPolicy::PurMM,
        SelectionPolicy::NeuralNet,
        SelectionPolicy::FuzzyLogic,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SelectionPolicy::Conventional => "conventional",
            SelectionPolicy::DecP => "decp",
            SelectionPolicy::MinTE => "minte",
            SelectionPolicy::PurMM => "purmm",
            SelectionPolicy::NeuralNet => "neural",
            SelectionPolicy::FuzzyLogic => "fuzzy",
        }
    }

    /// Prioritizer-driven policies rank all overdue tracks by score and
    /// ignore the priority-level filter.
    pub fn uses_prioritizer(self) -> bool {
        matches!(self, SelectionPolicy::NeuralNet | SelectionPolicy::FuzzyLogic)
    }
}

impl fmt::Display for SelectionPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SelectionPolicy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let lower = s.trim().to_ascii_lowercase();
        match lower.as_str() {
            "conventional" | "conv" | "fcfs" => Ok(SelectionPolicy::Conventional),
            "decp" => Ok(SelectionPolicy::DecP),
            "minte" => Ok(SelectionPolicy::MinTE),
            "purmm" => Ok(SelectionPolicy::PurMM),
            "neural" | "nn" | "neuralnet" => Ok(SelectionPolicy::NeuralNet),
            "fuzzy" | "fuzzylogic" => Ok(SelectionPolicy::FuzzyLogic),
            _ => Err(format!("unknown policy '{s}'")),
        }
    }
}

/// Filter state the selection policies read. Implemented by the simulator.
pub trait TrackInfoSource {
    fn belief(&self, task: &RadarTask) -> Belief;
    /// Current mixed-covariance trace, m^2.
    fn trace(&self, task: &RadarTask) -> f64;
    /// Trace bookkeeping for the update cost; `requesting` is set by the
    /// scheduler.
    fn cost_inputs(&self, task: &RadarTask) -> CostInputs;
    /// Prioritizer output in (0, 1) for the prioritizer-driven policies.
    fn score(&self, task: &RadarTask, policy: SelectionPolicy) -> Result<f64, SchedError>;
}

/// Source for policies that read no filter state.
pub struct NoTrackInfo;

impl TrackInfoSource for NoTrackInfo {
    fn belief(&self, _: &RadarTask) -> Belief {
        Belief::INITIAL
    }

    fn trace(&self, _: &RadarTask) -> f64 {
        0.0
    }

    fn cost_inputs(&self, _: &RadarTask) -> CostInputs {
        CostInputs {
            requesting: false,
            trace_now: 0.0,
            trace_predicted: 0.0,
            trace_anchor: 0.0,
        }
    }

    fn score(&self, _: &RadarTask, _: SelectionPolicy) -> Result<f64, SchedError> {
        Ok(0.0)
    }
}

/// Overdue tracks at the highest priority level present among them.
pub fn eligible_tracks<'a, I>(tasks: I) -> Vec<&'a RadarTask>
where
    I: IntoIterator<Item = &'a RadarTask>,
{
    let overdue: Vec<&RadarTask> = tasks.into_iter().filter(|t| t.is_track() && t.t_tb >= 0.0).collect();
    let Some(top) = overdue.iter().map(|t| t.priority).max() else {
        return Vec::new();
    };
    overdue.into_iter().filter(|t| t.priority == top).collect()
}

/// Index of the maximum score; ties go to the earliest arrival.
fn argmax_fcfs(tasks: &[&RadarTask], scores: impl Iterator<Item = f64>) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (i, s) in scores.enumerate() {
        best = match best {
            None => Some((i, s)),
            Some((j, b)) if s > b || (s == b && tasks[i].arrival_seq < tasks[j].arrival_seq) => Some((i, s)),
            keep => keep,
        };
    }
    best.map(|(i, _)| i)
}

/// Highest `t_tb`, FCFS on ties.
pub fn select_conventional<'a>(eligible: &[&'a RadarTask]) -> Result<&'a RadarTask, SchedError> {
    argmax_fcfs(eligible, eligible.iter().map(|t| t.t_tb))
        .map(|i| eligible[i])
        .ok_or(SchedError::EmptyEligible)
}

/// Largest gap below threshold among tracks with `mu < mu_th`; `None` when
/// no track is degraded enough.
pub fn select_decp<'a>(eligible: &[&'a RadarTask], beliefs: &[Belief], thresholds: &[f64]) -> Option<&'a RadarTask> {
    let qualifying: Vec<(usize, f64)> = eligible
        .iter()
        .enumerate()
        .filter(|&(i, _)| beliefs[i].value() < thresholds[i])
        .map(|(i, _)| (i, beliefs[i].value() - thresholds[i]))
        .collect();
    let subset: Vec<&RadarTask> = qualifying.iter().map(|&(i, _)| eligible[i]).collect();
    argmax_fcfs(&subset, qualifying.iter().map(|&(_, gap)| -gap)).map(|k| subset[k])
}

/// Worst tracking error.
pub fn select_minte<'a>(eligible: &[&'a RadarTask], traces: &[f64]) -> Result<&'a RadarTask, SchedError> {
    argmax_fcfs(eligible, traces.iter().copied())
        .map(|i| eligible[i])
        .ok_or(SchedError::EmptyEligible)
}

/// Largest stale-probability-weighted error `(1 - mu) * trace`.
pub fn select_purmm<'a>(eligible: &[&'a RadarTask], beliefs: &[Belief], traces: &[f64]) -> Result<&'a RadarTask, SchedError> {
    let scores = beliefs.iter().zip(traces).map(|(b, t)| (1.0 - b.value()) * t);
    argmax_fcfs(eligible, scores)
        .map(|i| eligible[i])
        .ok_or(SchedError::EmptyEligible)
}

/// Highest prioritizer score.
pub fn select_by_score<'a>(eligible: &[&'a RadarTask], scores: &[f64]) -> Result<&'a RadarTask, SchedError> {
    argmax_fcfs(eligible, scores.iter().copied())
        .map(|i| eligible[i])
        .ok_or(SchedError::EmptyEligible)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AssignmentAction {
    Track,
    Surveillance,
    Idle,
}

impl AssignmentAction {
    pub fn name(self) -> &'static str {
        match self {
            AssignmentAction::Track => "track",
            AssignmentAction::Surveillance => "surveillance",
            AssignmentAction::Idle => "idle",
        }
    }
}

/// What one band started at a decision instant.
#[derive(Debug, Clone, PartialEq)]
pub struct Assignment {
    pub band: usize,
    pub action: AssignmentAction,
    /// Index into [`SchedulerState::tasks`]; `None` when idle.
    pub task: Option<usize>,
    pub task_id: Option<TaskId>,
    pub start: f64,
    pub duration: f64,
    /// Balance of the selected task at selection time.
    pub t_tb: f64,
    /// Filter state of the selected track; NaN for other actions.
    pub trace: f64,
    pub mu: f64,
    /// Threshold of the selected track under DecP; NaN otherwise.
    pub mu_th: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepOutcome {
    pub start: f64,
    pub elapsed: f64,
    pub assignments: Vec<Assignment>,
}

#[derive(Debug, Clone)]
pub struct SchedulerState {
    pub tasks: Vec<RadarTask>,
    pub bands: usize,
    pub clock: f64,
    pub busy_until: Vec<f64>,
    /// Task running on each band.
    pub running: Vec<Option<usize>>,
    /// Idle time taken by a band that finds nothing to run, s.
    pub idle_step: f64,
    next_seq: u64,
}

impl SchedulerState {
    pub fn new(mut tasks: Vec<RadarTask>, bands: usize) -> Result<Self, SchedError> {
        if bands == 0 {
            return Err(SchedError::InvalidConfig("at least one band is required".into()));
        }
        for t in &tasks {
            if !(t.dwell > 0.0 && t.update_time > 0.0) {
                return Err(SchedError::InvalidConfig(format!("task {} needs positive dwell and update time", t.id)));
            }
            if !(1..=5).contains(&t.priority) {
                return Err(SchedError::InvalidConfig(format!("task {} priority {} outside 1..=5", t.id, t.priority)));
            }
        }
        for (i, t) in tasks.iter_mut().enumerate() {
            t.arrival_seq = i as u64;
        }
        let next_seq = tasks.len() as u64;
        let idle_step = tasks.iter().map(|t| t.dwell).fold(f64::INFINITY, f64::min);
        Ok(Self {
            tasks,
            bands,
            clock: 0.0,
            busy_until: vec![0.0; bands],
            running: vec![None; bands],
            idle_step: if idle_step.is_finite() { idle_step } else { 0.01 },
            next_seq,
        })
    }

    pub fn executing_count(&self) -> usize {
        self.running.iter().filter(|r| r.is_some()).count()
    }

    fn is_running(&self, idx: usize) -> bool {
        self.running.contains(&Some(idx))
    }

    /// Eligible tracks among tasks that are not currently running, as indices.
    pub fn eligible_tracks(&self) -> Vec<usize> {
        let idle = self.tasks.iter().enumerate().filter(|&(i, _)| !self.is_running(i)).map(|(_, t)| t);
        eligible_tracks(idle).into_iter().map(|t| self.index_of(t)).collect()
    }

    fn index_of(&self, task: &RadarTask) -> usize {
        self.tasks.iter().position(|t| t.id == task.id).expect("task belongs to this state")
    }

    /// Chooses a track for one band, or `None` to fall back to surveillance.
    fn select_track(
        &self,
        policy: SelectionPolicy,
        params: &PolicyParams,
        source: &dyn TrackInfoSource,
    ) -> Result<Option<(usize, f64)>, SchedError> {
        let idle = self.tasks.iter().enumerate().filter(|&(i, _)| !self.is_running(i)).map(|(_, t)| t);
        let eligible: Vec<&RadarTask> = if policy.uses_prioritizer() {
            idle.filter(|t| t.is_track() && t.t_tb >= 0.0).collect()
        } else {
            eligible_tracks(idle)
        };
        if eligible.is_empty() {
            return Ok(None);
        }
        let picked = match policy {
            SelectionPolicy::Conventional => (select_conventional(&eligible)?, f64::NAN),
            SelectionPolicy::MinTE => {
                let traces: Vec<f64> = eligible.iter().map(|t| source.trace(t)).collect();
                (select_minte(&eligible, &traces)?, f64::NAN)
            }
            SelectionPolicy::PurMM => {
                let beliefs: Vec<Belief> = eligible.iter().map(|t| source.belief(t)).collect();
                let traces: Vec<f64> = eligible.iter().map(|t| source.trace(t)).collect();
                (select_purmm(&eligible, &beliefs, &traces)?, f64::NAN)
            }
            SelectionPolicy::NeuralNet | SelectionPolicy::FuzzyLogic => {
                let scores = eligible
                    .iter()
                    .map(|t| source.score(t, policy))
                    .collect::<Result<Vec<f64>, _>>()?;
                (select_by_score(&eligible, &scores)?, f64::NAN)
            }
            SelectionPolicy::DecP => {
                let costs: Vec<CostInputs> = eligible
                    .iter()
                    .map(|t| CostInputs {
                        requesting: true,
                        ..source.cost_inputs(t)
                    })
                    .collect();
                let beliefs: Vec<Belief> = eligible.iter().map(|t| source.belief(t)).collect();
                let mut thresholds = Vec::with_capacity(eligible.len());
                for n in 0..eligible.len() {
                    let k = update_cost(&costs, n)?;
                    thresholds.push(compute_threshold(params, k)?.mu_th);
                }
                match select_decp(&eligible, &beliefs, &thresholds) {
                    None => return Ok(None),
                    Some(t) => {
                        let i = eligible.iter().position(|e| e.id == t.id).expect("selected from eligible");
                        (t, thresholds[i])
                    }
                }
            }
        };
        Ok(Some((self.index_of(picked.0), picked.1)))
    }

    /// Most overdue idle surveillance fragment with `t_tb >= 0`, FCFS on ties.
    fn select_surveillance(&self) -> Option<usize> {
        let idle: Vec<&RadarTask> = self
            .tasks
            .iter()
            .enumerate()
            .filter(|&(i, t)| !t.is_track() && t.t_tb >= 0.0 && !self.is_running(i))
            .map(|(_, t)| t)
            .collect();
        argmax_fcfs(&idle, idle.iter().map(|t| t.t_tb)).map(|i| self.index_of(idle[i]))
    }

    /// Fills every free band, applies the time-balance bookkeeping and
    /// advances the clock to the next instant a band frees up.
    pub fn schedule_step(
        &mut self,
        policy: SelectionPolicy,
        params: &PolicyParams,
        source: &dyn TrackInfoSource,
    ) -> Result<StepOutcome, SchedError> {
        let start = self.clock;
        let mut assignments = Vec::new();
        let mut started = Vec::new();
        for band in 0..self.bands {
            if self.running[band].is_some() {
                continue;
            }
            let chosen = match self.select_track(policy, params, source)? {
                Some((idx, mu_th)) => Some((idx, AssignmentAction::Track, mu_th)),
                None => self.select_surveillance().map(|idx| (idx, AssignmentAction::Surveillance, f64::NAN)),
            };
            let assignment = match chosen {
                Some((idx, action, mu_th)) => {
                    let task = &self.tasks[idx];
                    let (trace, mu) = if task.is_track() && !matches!(policy, SelectionPolicy::Conventional) {
                        (source.trace(task), source.belief(task).value())
                    } else {
                        (f64::NAN, f64::NAN)
                    };
                    let a = Assignment {
                        band,
                        action,
                        task: Some(idx),
                        task_id: Some(task.id),
                        start,
                        duration: task.dwell,
                        t_tb: task.t_tb,
                        trace,
                        mu,
                        mu_th,
                    };
                    self.running[band] = Some(idx);
                    self.busy_until[band] = start + task.dwell;
                    self.tasks[idx].arrival_seq = self.next_seq;
                    self.next_seq += 1;
                    started.push(idx);
                    a
                }
                None => {
                    self.busy_until[band] = start + self.idle_step;
                    Assignment {
                        band,
                        action: AssignmentAction::Idle,
                        task: None,
                        task_id: None,
                        start,
                        duration: self.idle_step,
                        t_tb: f64::NAN,
                        trace: f64::NAN,
                        mu: f64::NAN,
                        mu_th: f64::NAN,
                    }
                }
            };
            assignments.push(assignment);
        }

        let next = self.busy_until.iter().copied().fold(f64::INFINITY, f64::min);
        let elapsed = next - start;
        for (i, task) in self.tasks.iter_mut().enumerate() {
            if started.contains(&i) {
                task.t_tb -= task.update_time;
            } else {
                task.t_tb += elapsed;
            }
        }
        self.clock = next;
        for band in 0..self.bands {
            if self.busy_until[band] <= self.clock {
                self.running[band] = None;
            }
        }
        Ok(StepOutcome {
            start,
            elapsed,
            assignments,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn track(id: usize, priority: u8, t_tb: f64, seq: u64) -> RadarTask {
        RadarTask {
            id: TaskId(id),
            kind: TaskKind::Track { target: id },
            priority,
            t_tb,
            update_time: 1.0,
            dwell: 0.04,
            allowable_lateness: 1.0,
            arrival_seq: seq,
        }
    }

    fn fragment(id: usize, t_tb: f64) -> RadarTask {
        RadarTask {
            id: TaskId(id),
            kind: TaskKind::Surveillance { fragment: id },
            priority: 1,
            t_tb,
            update_time: 10.0,
            dwell: 0.1,
            allowable_lateness: 0.0,
            arrival_seq: id as u64,
        }
    }

    fn ids(v: &[&RadarTask]) -> Vec<usize> {
        v.iter().map(|t| t.id.0).collect()
    }

    #[test]
    fn eligibility() {
        let tasks = [track(0, 5, 0.1, 0), track(1, 5, 0.2, 1), track(2, 3, 0.5, 2)];
        assert_eq!(ids(&eligible_tracks(&tasks)), vec![0, 1]);
        let early = [track(0, 5, -0.1, 0), track(1, 3, -0.2, 1)];
        assert!(eligible_tracks(&early).is_empty());
        let mixed = [
            track(0, 4, 0.0, 0),
            track(1, 4, -0.3, 1),
            track(2, 4, 1.5, 2),
            track(3, 2, 2.0, 3),
            track(4, 4, -1e-9, 4),
            fragment(5, 9.0),
        ];
        // t_tb >= 0 at priority 4: tasks 0 and 2.
        assert_eq!(ids(&eligible_tracks(&mixed)), vec![0, 2]);
    }

    #[test]
    fn conventional_selection() {
        let tasks = [track(0, 5, 2.0, 0), track(1, 5, 3.5, 1), track(2, 5, 1.0, 2)];
        let refs: Vec<&RadarTask> = tasks.iter().collect();
        assert_eq!(select_conventional(&refs).unwrap().id, TaskId(1));
        let tie = [track(0, 5, 2.0, 7), track(1, 5, 2.0, 3)];
        let refs: Vec<&RadarTask> = tie.iter().collect();
        assert_eq!(select_conventional(&refs).unwrap().arrival_seq, 3);
        assert_eq!(select_conventional(&[]), Err(SchedError::EmptyEligible));
    }

    #[test]
    fn decp_selection() {
        let tasks = [track(0, 5, 0.0, 0), track(1, 5, 0.0, 1), track(2, 5, 0.0, 2)];
        let refs: Vec<&RadarTask> = tasks.iter().collect();
        let th = [0.8, 0.8, 0.8];
        let beliefs: Vec<Belief> = [0.7, 0.5, 1.0].iter().map(|&m| Belief::new(m).unwrap()).collect();
        assert_eq!(select_decp(&refs, &beliefs, &th).unwrap().id, TaskId(1));
        let high: Vec<Belief> = [0.8, 0.9, 1.0].iter().map(|&m| Belief::new(m).unwrap()).collect();
        assert!(select_decp(&refs, &high, &th).is_none());
        let one: Vec<Belief> = [0.79, 0.9, 1.0].iter().map(|&m| Belief::new(m).unwrap()).collect();
        assert_eq!(select_decp(&refs, &one, &th).unwrap().id, TaskId(0));
    }

    #[test]
    fn error_based_selection() {
        let tasks = [track(0, 5, 0.0, 0), track(1, 5, 0.0, 1), track(2, 5, 0.0, 2)];
        let refs: Vec<&RadarTask> = tasks.iter().collect();
        assert_eq!(select_minte(&refs, &[1e5, 9e5, 3e5]).unwrap().id, TaskId(1));
        let scaled: Vec<f64> = [1e5, 9e5, 3e5].iter().map(|t| t * 7.5).collect();
        assert_eq!(select_minte(&refs, &scaled).unwrap().id, TaskId(1));
        let tie = [track(0, 5, 0.0, 9), track(1, 5, 0.0, 4)];
        let tie_refs: Vec<&RadarTask> = tie.iter().collect();
        assert_eq!(select_minte(&tie_refs, &[2e5, 2e5]).unwrap().id, TaskId(1));

        let two = [track(0, 5, 0.0, 0), track(1, 5, 0.0, 1)];
        let two_refs: Vec<&RadarTask> = two.iter().collect();
        let beliefs = [Belief::new(0.9).unwrap(), Belief::new(0.2).unwrap()];
        assert_eq!(select_purmm(&two_refs, &beliefs, &[5e5, 2e5]).unwrap().id, TaskId(1));
        let certain = [Belief::new(1.0).unwrap(), Belief::new(0.99).unwrap()];
        assert_eq!(select_purmm(&two_refs, &certain, &[9e9, 1.0]).unwrap().id, TaskId(1));
        let zero = [Belief::new(1.0).unwrap(), Belief::new(1.0).unwrap()];
        assert_eq!(select_purmm(&tie_refs, &zero, &[5.0, 9.0]).unwrap().id, TaskId(1));
    }

    #[test]
    fn policy_names_round_trip() {
        for p in SelectionPolicy::ALL {
            assert_eq!(p.name().parse::<SelectionPolicy>().unwrap(), p);
        }
        assert!("bogus".parse::<SelectionPolicy>().is_err());
    }

    #[test]
    fn single_band_bookkeeping() {
        let tasks = vec![track(0, 5, 0.5, 0), track(1, 5, -0.5, 0), fragment(2, -3.0)];
        let mut s = SchedulerState::new(tasks, 1).unwrap();
        let params = PolicyParams::closed_form(0.99, 0.9, 0.9).unwrap();
        let out = s.schedule_step(SelectionPolicy::Conventional, &params, &NoTrackInfo).unwrap();
        assert_eq!(out.assignments.len(), 1);
        assert_eq!(out.assignments[0].task, Some(0));
        assert!((out.elapsed - 0.04).abs() < 1e-15);
        assert!((s.tasks[0].t_tb - (0.5 - 1.0)).abs() < 1e-15);
        assert!((s.tasks[1].t_tb - (-0.5 + 0.04)).abs() < 1e-15);
        assert!((s.tasks[2].t_tb - (-3.0 + 0.04)).abs() < 1e-15);
        assert_eq!(s.executing_count(), 0);
    }

    #[test]
    fn falls_back_to_surveillance() {
        let tasks = vec![track(0, 5, -0.5, 0), fragment(1, 0.5), fragment(2, 2.0), fragment(3, -1.0)];
        let mut s = SchedulerState::new(tasks, 1).unwrap();
        let params = PolicyParams::closed_form(0.99, 0.9, 0.9).unwrap();
        let out = s.schedule_step(SelectionPolicy::DecP, &params, &NoTrackInfo).unwrap();
        assert_eq!(out.assignments[0].action, AssignmentAction::Surveillance);
        assert_eq!(out.assignments[0].task, Some(2));
    }

    #[test]
    fn idles_when_nothing_is_due() {
        let tasks = vec![track(0, 5, -0.5, 0), fragment(1, -3.0)];
        let mut s = SchedulerState::new(tasks, 1).unwrap();
        let params = PolicyParams::closed_form(0.99, 0.9, 0.9).unwrap();
        let out = s.schedule_step(SelectionPolicy::Conventional, &params, &NoTrackInfo).unwrap();
        assert_eq!(out.assignments[0].action, AssignmentAction::Idle);
        assert!((s.tasks[1].t_tb - (-3.0 + s.idle_step)).abs() < 1e-15);
    }

    struct Confident;

    impl TrackInfoSource for Confident {
        fn belief(&self, _: &RadarTask) -> Belief {
            Belief::new(1.0).unwrap()
        }
        fn trace(&self, _: &RadarTask) -> f64 {
            1e4
        }
        fn cost_inputs(&self, _: &RadarTask) -> CostInputs {
            CostInputs {
                requesting: true,
                trace_now: 2e4,
                trace_predicted: 3e4,
                trace_anchor: 1e4,
            }
        }
        fn score(&self, _: &RadarTask, _: SelectionPolicy) -> Result<f64, SchedError> {
            Ok(0.5)
        }
    }

    #[test]
    fn decp_abstains_to_surveillance() {
        let tasks = vec![track(0, 5, 0.5, 0), fragment(1, 3.0)];
        let mut s = SchedulerState::new(tasks, 1).unwrap();
        let params = PolicyParams::closed_form(0.99, 0.9, 0.9).unwrap();
        let out = s.schedule_step(SelectionPolicy::DecP, &params, &Confident).unwrap();
        assert_eq!(out.assignments[0].action, AssignmentAction::Surveillance);
    }

    #[test]
    fn band_capacity() {
        let tasks = vec![track(0, 5, 0.5, 0), track(1, 5, 0.7, 0), track(2, 5, 0.1, 0)];
        let mut s = SchedulerState::new(tasks, 2).unwrap();
        let params = PolicyParams::closed_form(0.99, 0.9, 0.9).unwrap();
        let out = s.schedule_step(SelectionPolicy::Conventional, &params, &NoTrackInfo).unwrap();
        let executed: Vec<_> = out.assignments.iter().filter_map(|a| a.task).collect();
        assert_eq!(executed, vec![1, 0]);
        assert!(s.tasks[2].t_tb > 0.1);
    }

    #[test]
    fn rejects_bad_configuration() {
        assert!(SchedulerState::new(vec![], 0).is_err());
        let mut t = track(0, 5, 0.0, 0);
        t.dwell = 0.0;
        assert!(SchedulerState::new(vec![t], 1).is_err());
        assert!(SchedulerState::new(vec![track(0, 6, 0.0, 0)], 1).is_err());
    }
}
