use proptest::prelude::*;

use tbsched::cost::{update_cost, CostInputs};
use tbsched::policy::{compute_threshold, Belief, PolicyParams};
use tbsched::scheduler::{
    select_conventional, select_minte, select_purmm, AssignmentAction, RadarTask, SchedError, SchedulerState,
    SelectionPolicy, TaskId, TaskKind, TrackInfoSource,
};

/// Fixed per-task filter readings.
#[derive(Debug, Clone)]
struct Readings {
    beliefs: Vec<f64>,
    traces: Vec<f64>,
    growth: Vec<f64>,
}

impl TrackInfoSource for Readings {
    fn belief(&self, task: &RadarTask) -> Belief {
        Belief::new(self.beliefs[task.id.0]).unwrap()
    }

    fn trace(&self, task: &RadarTask) -> f64 {
        self.traces[task.id.0]
    }

    fn cost_inputs(&self, task: &RadarTask) -> CostInputs {
        let i = task.id.0;
        CostInputs {
            requesting: true,
            trace_now: self.traces[i],
            trace_predicted: self.traces[i] + self.growth[i],
            trace_anchor: 1e4,
        }
    }

    fn score(&self, task: &RadarTask, _: SelectionPolicy) -> Result<f64, SchedError> {
        Ok(1.0 - self.beliefs[task.id.0])
    }
}

fn task(i: usize, is_track: bool, priority: u8, t_tb: f64, update_time: f64, dwell: f64) -> RadarTask {
    RadarTask {
        id: TaskId(i),
        kind: if is_track { TaskKind::Track { target: i } } else { TaskKind::Surveillance { fragment: i } },
        priority,
        t_tb,
        update_time,
        dwell,
        allowable_lateness: 1.0,
        arrival_seq: 0,
    }
}

fn workload() -> impl Strategy<Value = (Vec<RadarTask>, Readings, usize)> {
    let one = (any::<bool>(), 1u8..=5, -3.0f64..3.0, 0.5f64..4.0, 0.01f64..0.3, 0.0f64..=1.0, 1.1e4f64..1e6, 0.0f64..5e4);
    (prop::collection::vec(one, 1..12), 1usize..4).prop_map(|(rows, bands)| {
        let mut tasks = Vec::new();
        let mut readings = Readings {
            beliefs: Vec::new(),
            traces: Vec::new(),
            growth: Vec::new(),
        };
        for (i, (is_track, pri, t_tb, u, d, mu, tr, g)) in rows.into_iter().enumerate() {
            // Coarse time balances make exact ties common.
            tasks.push(task(i, is_track, if is_track { pri } else { 1 }, (t_tb * 4.0).round() / 4.0, u, d));
            readings.beliefs.push((mu * 8.0).round() / 8.0);
            readings.traces.push(tr);
            readings.growth.push(g);
        }
        (tasks, readings, bands)
    })
}

/// Reference selection written from the rules: overdue idle tracks at the
/// top priority, then the policy score, then earliest arrival.
fn reference_pick(
    s: &SchedulerState,
    taken: &[usize],
    policy: SelectionPolicy,
    r: &Readings,
    params: &PolicyParams,
) -> Option<usize> {
    let idle = |i: usize| !taken.contains(&i) && !s.running.contains(&Some(i));
    let overdue: Vec<usize> = (0..s.tasks.len()).filter(|&i| idle(i) && s.tasks[i].is_track() && s.tasks[i].t_tb >= 0.0).collect();
    let top = overdue.iter().map(|&i| s.tasks[i].priority).max();
    let pool: Vec<usize> = overdue.into_iter().filter(|&i| Some(s.tasks[i].priority) == top).collect();
    let score = |i: usize| -> Option<f64> {
        let id = s.tasks[i].id.0;
        match policy {
            SelectionPolicy::Conventional => Some(s.tasks[i].t_tb),
            SelectionPolicy::MinTE => Some(r.traces[id]),
            SelectionPolicy::PurMM => Some((1.0 - r.beliefs[id]) * r.traces[id]),
            SelectionPolicy::DecP => {
                let costs: Vec<CostInputs> = pool.iter().map(|&j| r.cost_inputs(&s.tasks[j])).collect();
                let n = pool.iter().position(|&j| j == i).unwrap();
                let th = compute_threshold(params, update_cost(&costs, n).unwrap()).unwrap().mu_th;
                (r.beliefs[id] < th).then_some(th - r.beliefs[id])
            }
            _ => unreachable!(),
        }
    };
    let mut best: Option<(usize, f64)> = None;
    for &i in &pool {
        let Some(v) = score(i) else { continue };
        let better = match best {
            None => true,
            Some((j, b)) => v > b || (v == b && s.tasks[i].arrival_seq < s.tasks[j].arrival_seq),
        };
        if better {
            best = Some((i, v));
        }
    }
    best.map(|(i, _)| i)
}

const POLICIES: [SelectionPolicy; 5] = [
    SelectionPolicy::Conventional,
    SelectionPolicy::DecP,
    SelectionPolicy::MinTE,
    SelectionPolicy::PurMM,
    SelectionPolicy::NeuralNet,
];

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn stepping_preserves_invariants((tasks, readings, bands) in workload(), policy_idx in 0usize..5) {
        let policy = POLICIES[policy_idx];
        let params = PolicyParams::closed_form(0.99, 0.9, 0.95).unwrap();
        let mut s = SchedulerState::new(tasks, bands).unwrap();
        for _ in 0..60 {
            let before = s.clone();
            let out = s.schedule_step(policy, &params, &readings).unwrap();

            // Capacity: only free bands are assigned, one task per band.
            let free: Vec<usize> = (0..bands).filter(|&b| before.running[b].is_none()).collect();
            let assigned: Vec<usize> = out.assignments.iter().map(|a| a.band).collect();
            prop_assert_eq!(&assigned, &free);
            prop_assert!(s.executing_count() <= bands);
            let mut started: Vec<usize> = out.assignments.iter().filter_map(|a| a.task).collect();
            let n_started = started.len();
            started.sort_unstable();
            started.dedup();
            prop_assert_eq!(started.len(), n_started);

            // Selection matches the reference, band by band.
            if policy != SelectionPolicy::NeuralNet {
                let mut taken = Vec::new();
                for a in &out.assignments {
                    let expect = reference_pick(&before, &taken, policy, &readings, &params);
                    match a.action {
                        AssignmentAction::Track => prop_assert_eq!(a.task, expect),
                        _ => prop_assert_eq!(expect, None),
                    }
                    if let Some(i) = a.task {
                        taken.push(i);
                    }
                }
            }
            for a in &out.assignments {
                if a.action == AssignmentAction::Track {
                    let t = &before.tasks[a.task.unwrap()];
                    prop_assert!(t.t_tb >= 0.0);
                    if policy == SelectionPolicy::DecP {
                        prop_assert!(a.mu < a.mu_th);
                    }
                }
                if a.action == AssignmentAction::Surveillance {
                    prop_assert!(before.tasks[a.task.unwrap()].t_tb >= 0.0);
                }
            }

            // Bookkeeping: starters pay their update time, the rest accrue
            // the elapsed time.
            prop_assert!(out.elapsed > 0.0);
            prop_assert!((s.clock - before.clock - out.elapsed).abs() < 1e-12);
            for (i, (b, a)) in before.tasks.iter().zip(&s.tasks).enumerate() {
                let expect = if started.contains(&i) { b.t_tb - b.update_time } else { b.t_tb + out.elapsed };
                prop_assert!((a.t_tb - expect).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn selection_ignores_list_order((tasks, readings, _) in workload(), seed in any::<u64>()) {
        let mut tasks = tasks;
        for (i, t) in tasks.iter_mut().enumerate() {
            t.arrival_seq = (i as u64).wrapping_mul(2654435761) % 97;
        }
        let refs: Vec<&RadarTask> = tasks.iter().collect();
        let beliefs = |v: &[&RadarTask]| v.iter().map(|t| Belief::new(readings.beliefs[t.id.0]).unwrap()).collect::<Vec<_>>();
        let traces = |v: &[&RadarTask]| v.iter().map(|t| readings.traces[t.id.0]).collect::<Vec<_>>();
        let a = (
            select_conventional(&refs).unwrap().id,
            select_minte(&refs, &traces(&refs)).unwrap().id,
            select_purmm(&refs, &beliefs(&refs), &traces(&refs)).unwrap().id,
        );
        let mut shuffled = refs.clone();
        let n = shuffled.len();
        let mut x = seed;
        for i in (1..n).rev() {
            x = x.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            shuffled.swap(i, (x >> 33) as usize % (i + 1));
        }
        let b = (
            select_conventional(&shuffled).unwrap().id,
            select_minte(&shuffled, &traces(&shuffled)).unwrap().id,
            select_purmm(&shuffled, &beliefs(&shuffled), &traces(&shuffled)).unwrap().id,
        );
        prop_assert_eq!(a, b);
    }
}

#[test]
fn one_band_accrues_executed_dwell() {
    let tasks = vec![
        task(0, true, 3, 0.0, 1.0, 0.04),
        task(1, true, 3, -0.3, 1.0, 0.04),
        task(2, false, 1, 0.5, 10.0, 0.1),
    ];
    let readings = Readings {
        beliefs: vec![0.5; 3],
        traces: vec![1e5; 3],
        growth: vec![0.0; 3],
    };
    let params = PolicyParams::closed_form(0.99, 0.9, 0.95).unwrap();
    let mut s = SchedulerState::new(tasks, 1).unwrap();
    let mut executed = 0.0;
    let t0: Vec<f64> = s.tasks.iter().map(|t| t.t_tb).collect();
    let mut runs = [0usize; 3];
    for _ in 0..500 {
        let out = s.schedule_step(SelectionPolicy::Conventional, &params, &readings).unwrap();
        let a = &out.assignments[0];
        if let Some(i) = a.task {
            runs[i] += 1;
        }
        executed += a.duration;
    }
    // Over a window, a task's balance moves by the wall-clock time minus
    // what each of its own runs cost it.
    for i in 0..3 {
        let t = &s.tasks[i];
        let own: f64 = runs[i] as f64 * t.update_time;
        let own_dwell = if runs[i] > 0 { runs[i] as f64 * t.dwell } else { 0.0 };
        let expect = t0[i] + executed - own - own_dwell;
        assert!((t.t_tb - expect).abs() < 1e-9, "task {i}: {} vs {expect}", t.t_tb);
    }
    assert!((s.clock - executed).abs() < 1e-9);
}
