use proptest::prelude::*;

use tbsched::prioritizer::fuzzy::OUTPUT_TERMS;
use tbsched::prioritizer::mlp::builtin_training_set;
use tbsched::prioritizer::{
    FuzzyPrioritizer, MlpPrioritizer, MlpWeights, PrioritizerError, PriorityInputs, RuleBase, TrainingConfig,
    TrainingRow,
};

fn hand_forward(w: &MlpWeights, x: [f64; 5]) -> f64 {
    let mut z = w.b2;
    for i in 0..5 {
        let mut a = w.b1[i];
        for (j, xj) in x.iter().enumerate() {
            a += w.w1[(i, j)] * xj;
        }
        let e = (2.0 * a).exp();
        z += w.w2[i] * (e - 1.0) / (e + 1.0);
    }
    1.0 / (1.0 + (-z).exp())
}

fn short_training() -> TrainingConfig {
    TrainingConfig {
        max_epochs: 3000,
        target_mse: 1.0,
        ..TrainingConfig::default()
    }
}

fn inputs() -> impl Strategy<Value = PriorityInputs> {
    (0.0f64..=1.0, 0.0f64..350.0, 0.0f64..0.99, 0.6f64..=3.2, 1u8..=5)
        .prop_map(|(p, v, ti, lat, pri)| PriorityInputs::new(p, v, ti, lat, pri))
}

proptest! {
    #[test]
    fn network_matches_hand_evaluation(seed in any::<u64>(), x in inputs()) {
        let w = MlpWeights::seeded(seed);
        let net = MlpPrioritizer::from_weights(w);
        let y = net.forward(&x).unwrap();
        prop_assert!((y - hand_forward(&w, x.normalized())).abs() < 1e-13);
        prop_assert!(y > 0.0 && y < 1.0);
    }

    #[test]
    fn fuzzy_output_in_unit_interval(x in inputs()) {
        let f = FuzzyPrioritizer::standard();
        let y = f.infer(&x).unwrap();
        prop_assert!((0.0..=1.0).contains(&y));
        let act = f.activations(&x);
        prop_assert_eq!(act.len(), OUTPUT_TERMS.len());
        prop_assert!(act.iter().any(|&a| a > 0.0));
    }

    #[test]
    fn fuzzy_priority_never_lowers_urgency(x in inputs()) {
        let f = FuzzyPrioritizer::standard();
        let at = |pri: u8| {
            let y = PriorityInputs::new(x.position(), x.radial_velocity(), x.track_invalidity(), x.allowable_lateness(), pri);
            f.infer(&y).unwrap()
        };
        for pri in 1..5 {
            prop_assert!(at(pri + 1) >= at(pri) - 1e-12);
        }
    }
}

#[test]
fn untrained_network_refuses() {
    let net = MlpPrioritizer::untrained(1);
    let x = PriorityInputs::new(0.5, 100.0, 0.2, 1.0, 3);
    assert!(matches!(net.forward(&x), Err(PrioritizerError::Untrained)));
}

#[test]
fn duplicating_the_training_set_changes_nothing() {
    let data = builtin_training_set();
    let doubled: Vec<TrainingRow> = data.iter().chain(data.iter()).copied().collect();
    let a = MlpPrioritizer::train(&data, &short_training()).unwrap();
    let b = MlpPrioritizer::train(&doubled, &short_training()).unwrap();
    assert_eq!(a.epochs(), b.epochs());
    assert!((a.mse_on(&data) - b.mse_on(&doubled)).abs() < 1e-12);
    let wa = a.weights();
    let wb = b.weights();
    assert!((wa.w1 - wb.w1).abs().max() < 1e-9 && (wa.w2 - wb.w2).abs().max() < 1e-9);
}

#[test]
fn row_order_does_not_matter() {
    let data = builtin_training_set();
    let mut shuffled = data.clone();
    shuffled.reverse();
    shuffled.rotate_left(17);
    let a = MlpPrioritizer::train(&data, &short_training()).unwrap();
    let b = MlpPrioritizer::train(&shuffled, &short_training()).unwrap();
    assert!((a.mse_on(&data) - b.mse_on(&data)).abs() < 1e-9);
    for row in &data {
        let x = row.inputs();
        assert!((a.forward(&x).unwrap() - b.forward(&x).unwrap()).abs() < 1e-8);
    }
}

#[test]
fn empty_training_set_is_rejected() {
    assert!(matches!(
        MlpPrioritizer::train(&[], &TrainingConfig::default()),
        Err(PrioritizerError::EmptyTrainingSet)
    ));
}

#[test]
fn impossible_target_reports_non_convergence() {
    let cfg = TrainingConfig {
        max_epochs: 10,
        stop_mse: 0.0,
        target_mse: 1e-12,
        ..TrainingConfig::default()
    };
    let err = MlpPrioritizer::train(&builtin_training_set(), &cfg).unwrap_err();
    assert!(matches!(err, PrioritizerError::NonConvergence { epochs: 10, .. }));
}

#[test]
fn trained_network_tracks_the_table() {
    let data = builtin_training_set();
    let net = MlpPrioritizer::pretrained().unwrap();
    let worst = data
        .iter()
        .map(|r| (net.forward(&r.inputs()).unwrap() - r.tracking_task_priority).abs())
        .fold(0.0, f64::max);
    assert!(worst < 0.05, "worst residual {worst}");
}

#[test]
fn fuzzy_extremes() {
    let f = FuzzyPrioritizer::standard();
    let calm = f.infer(&PriorityInputs::new(1.0, 0.0, 0.0, 3.2, 1)).unwrap();
    let urgent = f.infer(&PriorityInputs::new(0.0, 350.0, 0.99, 0.6, 5)).unwrap();
    assert!(calm < 0.1 && urgent > 0.9, "calm {calm}, urgent {urgent}");
    assert!(f.infer(&PriorityInputs::new(0.5, 175.0, 0.5, 1.9, 3)).unwrap() > calm);
}

#[test]
fn rule_file_round_trips() {
    let rules = RuleBase::generate();
    assert_eq!(rules.rules.len(), 405);
    assert_eq!(RuleBase::parse(&rules.render()).unwrap(), rules);
    assert!(matches!(
        RuleBase::parse("IF pos=nowhere THEN out=high"),
        Err(PrioritizerError::RuleSyntax { line: 1, .. })
    ));
}
