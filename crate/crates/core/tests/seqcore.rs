use weightlab::seqcore::{
    check_lc, check_mg, gevrey, log_convex_minorant, pointwise_product, pointwise_quotient, preceq_constant,
    relation, thilliez_gamma, SeqRelation,
};
use weightlab::{Policy, State, WeightSequence};

fn policy() -> Policy {
    Policy::default()
}

fn from_fn(p_max: usize, f: impl Fn(f64) -> f64) -> WeightSequence {
    WeightSequence::from_log((0..=p_max).map(|p| f(p as f64)).collect()).unwrap()
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

#[test]
fn gevrey_flags_and_quotients() {
    let g = gevrey(1.0, 5).unwrap();
    assert!(g.is_normalized() && g.is_log_convex());
    let mu: Vec<f64> = g.log_mu().iter().map(|x| x.exp()).collect();
    assert!(max_abs_diff(&mu, &[1.0, 1.0, 2.0, 3.0, 4.0, 5.0]) < 1e-12);
}

#[test]
fn log_gamma_oracle_matches_gevrey() {
    use statrs::function::gamma::ln_gamma;
    for alpha in [0.5, 1.0, 2.5] {
        let g = gevrey(alpha, 1000).unwrap();
        for p in [0usize, 1, 7, 170, 171, 999, 1000] {
            let want = alpha * ln_gamma(p as f64 + 1.0);
            assert!((g.log_m()[p] - want).abs() <= 1e-9 * want.abs().max(1.0), "alpha {alpha}, p {p}");
        }
    }
}

#[test]
fn check_lc_examples() {
    assert_eq!(check_lc(&gevrey(1.0, 200).unwrap(), &policy()).state, State::Holds);

    let ones = WeightSequence::constant(200);
    let v = check_lc(&ones, &policy());
    assert_eq!(v.state, State::Fails);
    assert!((v.witness.unwrap().value - 1.0).abs() < 1e-12);

    let m = WeightSequence::from_values(&[1.0, 2.0, 3.0, 4.0]).unwrap();
    let v = check_lc(&m, &policy());
    assert_eq!(v.state, State::Fails);
    assert_eq!(v.witness.unwrap().at, 2.0);
}

#[test]
fn check_mg_examples() {
    assert_eq!(check_mg(&gevrey(1.0, 100).unwrap(), &policy()).state, State::Holds);
    assert_eq!(check_mg(&from_fn(100, |p| p * p), &policy()).state, State::Fails);
    let v = check_mg(&WeightSequence::constant(100), &policy());
    assert_eq!(v.state, State::Holds);
    assert!(v.witness.unwrap().value.abs() < 1e-12, "C = 1 expected");
}

#[test]
fn relation_examples() {
    let g1 = gevrey(1.0, 400).unwrap();
    let g2 = gevrey(2.0, 400).unwrap();
    assert_eq!(relation(&g1, &g2, SeqRelation::Triangle, &policy()).state, State::Holds);
    assert_eq!(relation(&g1, &g1, SeqRelation::Triangle, &policy()).state, State::Fails);
    let scaled = g1.scale_geometric(2.0);
    assert_eq!(relation(&g1, &scaled, SeqRelation::Equiv, &policy()).state, State::Holds);
    assert_eq!(relation(&g2, &g1, SeqRelation::Preceq, &policy()).state, State::Fails);
}

#[test]
fn relation_truncates_unequal_lengths() {
    let a = gevrey(1.0, 400).unwrap();
    let b = gevrey(2.0, 300).unwrap();
    let v = relation(&a, &b, SeqRelation::Triangle, &policy());
    assert_eq!(v.state, State::Holds);
    assert!(v.notes.iter().any(|n| n.contains("truncat")), "{:?}", v.notes);
}

#[test]
fn preceq_constant_examples() {
    let g1 = gevrey(1.0, 300).unwrap();
    let g2 = gevrey(2.0, 300).unwrap();
    assert!((preceq_constant(&g1, &g1, &policy()).unwrap() - 1.0).abs() < 1e-12);
    assert!((preceq_constant(&g1.scale_geometric(2.0), &g1, &policy()).unwrap() - 2.0).abs() < 1e-12);
    assert!((preceq_constant(&g1, &g2, &policy()).unwrap() - 1.0).abs() < 1e-12);
    assert!(preceq_constant(&g2, &g1, &policy()).is_err());
}

#[test]
fn pointwise_algebra() {
    let g1 = gevrey(1.0, 60).unwrap();
    let g2 = gevrey(2.0, 60).unwrap();
    let g3 = gevrey(3.0, 60).unwrap();
    assert!(max_abs_diff(pointwise_product(&g1, &g1).unwrap().log_m(), g2.log_m()) < 1e-9);
    assert!(max_abs_diff(pointwise_quotient(&g3, &g1).unwrap().log_m(), g2.log_m()) < 1e-9);
    let ones = pointwise_quotient(&g3, &g3).unwrap();
    assert!(ones.log_m().iter().all(|v| *v == 0.0));
    assert!(pointwise_product(&g1, &gevrey(1.0, 50).unwrap()).is_err());
}

#[test]
fn pointwise_flags_are_recomputed() {
    let g = gevrey(1.0, 20).unwrap();
    let q = pointwise_quotient(&WeightSequence::constant(20), &g).unwrap();
    assert!(!q.is_log_convex());
    assert!(g.is_log_convex());
}

#[test]
fn minorant_of_four_points() {
    let m = WeightSequence::from_log(vec![1.0, 4.0, 2.0, 8.0]).unwrap();
    let l = log_convex_minorant(&m);
    assert!((l.log_m()[1] - 1.5).abs() < 1e-12);
    assert_eq!(l.log_m()[0], 1.0);
    assert_eq!(l.log_m()[2], 2.0);
    assert_eq!(l.log_m()[3], 8.0);
    assert!(l.is_log_convex());
    assert_eq!(log_convex_minorant(&l), l);
}

#[test]
fn thilliez_examples() {
    let b = thilliez_gamma(&gevrey(1.5, 2000).unwrap(), 4);
    assert!(b.contains(1.5) && b.width() <= 0.05, "{b:?}");

    let b = thilliez_gamma(&from_fn(400, |p| p), 4);
    assert!(b.contains(0.0), "{b:?}");

    let b = thilliez_gamma(&gevrey(1.0, 400).unwrap(), 2);
    let w = &b.witnesses[0];
    assert_eq!(w.param, 2.0);
    assert!((w.achieved - 2.0).abs() < 1e-9);
}

#[test]
fn thilliez_short_prefix_is_flagged_wide() {
    let b = thilliez_gamma(&gevrey(1.0, 30).unwrap(), 4);
    assert_eq!(b.lower, 0.0);
    assert!(b.upper.is_infinite());
}

#[test]
fn sequence_file_round_trip() {
    let g = gevrey(1.25, 40).unwrap();
    let text = serde_json::to_string(&g).unwrap();
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["p_max"], 40);
    assert!(v["flags"]["log_convex"].as_bool().unwrap());
    let back: WeightSequence = serde_json::from_str(&text).unwrap();
    assert_eq!(back, g);

    let bad = r#"{"p_max": 3, "logM": [0.0, 1.0]}"#;
    assert!(serde_json::from_str::<WeightSequence>(bad).is_err());
}

#[test]
fn mg_rejects_logarithmic_defect_growth() {
    let m = from_fn(400, |p| if p < 1.0 { 0.0 } else { p * p.ln() * p.ln() });
    assert_eq!(check_mg(&m, &policy()).state, State::Fails);
}
