//! Run metrics computed from simulation logs.

/// Chronological execution times of one task.
#[derive(Debug, Clone, PartialEq)]
pub struct TaskUpdateLog {
    pub update_time: f64,
    pub allowable_lateness: f64,
    pub times: Vec<f64>,
    /// End of the observation window. The open interval from the last
    /// update to this point counts like any other interval.
    pub horizon: Option<f64>,
}

impl TaskUpdateLog {
    pub fn limit(&self) -> f64 {
        self.update_time + self.allowable_lateness
    }

    /// Intervals between consecutive updates, then the trailing open one.
    pub fn intervals(&self) -> impl Iterator<Item = f64> + '_ {
        let closed = self.times.windows(2).map(|w| w[1] - w[0]);
        let tail = match (self.horizon, self.times.last()) {
            (Some(h), Some(&last)) if h > last => Some(h - last),
            _ => None,
        };
        closed.chain(tail)
    }
}

/// Updates whose interval strictly exceeds update time plus lateness.
pub fn probable_drop_count(logs: &[TaskUpdateLog]) -> usize {
    logs.iter()
        .map(|log| {
            let limit = log.limit();
            log.intervals().filter(|&dt| dt > limit).count()
        })
        .sum()
}

/// Track state captured at one decision epoch.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrackSnapshot {
    pub priority: u8,
    pub t_tb: f64,
    /// Mixed-covariance trace, m^2.
    pub trace: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpochRecord {
    pub time: f64,
    pub tracks: Vec<TrackSnapshot>,
}

/// Sum over epochs and tracks of `priority * max(t_tb, 0)^2`, s^2.
pub fn lateness_cost(epochs: &[EpochRecord]) -> f64 {
    epochs
        .iter()
        .flat_map(|e| e.tracks.iter())
        .map(|s| {
            let late = s.t_tb.max(0.0);
            f64::from(s.priority) * late * late
        })
        .sum()
}

/// Mean trace over every (epoch, track) sample, m^2.
pub fn average_error(epochs: &[EpochRecord]) -> f64 {
    let (sum, n) = epochs
        .iter()
        .flat_map(|e| e.tracks.iter())
        .fold((0.0, 0usize), |(s, n), t| (s + t.trace, n + 1));
    if n == 0 {
        0.0
    } else {
        sum / n as f64
    }
}

/// One execution on one band.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BusyInterval {
    pub band: usize,
    pub start: f64,
    pub end: f64,
}

/// Busy time clipped to `[0, duration]` over `bands * duration`.
pub fn occupancy(busy: &[BusyInterval], bands: usize, duration: f64) -> f64 {
    if bands == 0 || duration <= 0.0 {
        return 0.0;
    }
    let used: f64 = busy
        .iter()
        .map(|b| (b.end.min(duration) - b.start.max(0.0)).max(0.0))
        .sum();
    (used / (bands as f64 * duration)).clamp(0.0, 1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct RunMetrics {
    pub n_tracking_tasks: f64,
    pub n_surveillances: f64,
    pub probable_drops: f64,
    pub occupancy: f64,
    /// Weighted lateness cost, s^2.
    pub cost: f64,
    /// Average trace, m^2.
    pub avg_error: f64,
}

impl RunMetrics {
    /// Field-wise mean.
    pub fn mean(runs: &[RunMetrics]) -> RunMetrics {
        if runs.is_empty() {
            return RunMetrics::default();
        }
        let n = runs.len() as f64;
        let mut m = RunMetrics::default();
        for r in runs {
            m.n_tracking_tasks += r.n_tracking_tasks;
            m.n_surveillances += r.n_surveillances;
            m.probable_drops += r.probable_drops;
            m.occupancy += r.occupancy;
            m.cost += r.cost;
            m.avg_error += r.avg_error;
        }
        RunMetrics {
            n_tracking_tasks: m.n_tracking_tasks / n,
            n_surveillances: m.n_surveillances / n,
            probable_drops: m.probable_drops / n,
            occupancy: m.occupancy / n,
            cost: m.cost / n,
            avg_error: m.avg_error / n,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Standing {
    Best,
    RunnerUp,
    HonorableMention,
    Last,
}

/// Per-policy standing counts, in policy list order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct StandingCounts {
    pub best: usize,
    pub runner_up: usize,
    pub honorable_mention: usize,
    pub last: usize,
}

impl StandingCounts {
    pub fn total(&self) -> usize {
        self.best + self.runner_up + self.honorable_mention + self.last
    }

    pub fn add(&mut self, s: Standing) {
        match s {
            Standing::Best => self.best += 1,
            Standing::RunnerUp => self.runner_up += 1,
            Standing::HonorableMention => self.honorable_mention += 1,
            Standing::Last => self.last += 1,
        }
    }
}

/// Standings of one scenario from per-policy errors (lower is better).
/// Ties keep list order.
pub fn rank_scenario(errors: &[f64]) -> Vec<Standing> {
    let mut order: Vec<usize> = (0..errors.len()).collect();
    order.sort_by(|&a, &b| errors[a].total_cmp(&errors[b]));
    let n = errors.len();
    let mut out = vec![Standing::HonorableMention; n];
    for (rank, &i) in order.iter().enumerate() {
        out[i] = if rank == 0 {
            Standing::Best
        } else if rank == n - 1 {
            Standing::Last
        } else if rank == 1 {
            Standing::RunnerUp
        } else {
            Standing::HonorableMention
        };
    }
    out
}
