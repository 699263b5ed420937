use weightlab::config::default_ells;
use weightlab::matrixcalc::{
    assoc_matrix, constancy_criterion, gevrey_quotient, is_constant, matrix_l, matrix_mg, matrix_product,
    matrix_quotient, matrix_relation, quotient_sequence_identity, regularization_check, sandwich, sharp_mg,
    Flavor, MatrixRelation, Provenance,
};
use weightlab::seqcore::{gevrey, relation, SeqRelation};
use weightlab::{Policy, RunConfig, State, WeightFunction, WeightMatrix, WeightSequence};

fn g(alpha: f64) -> WeightFunction {
    WeightFunction::assoc(&gevrey(alpha, 4000).unwrap()).unwrap()
}

fn assoc(w: &WeightFunction, p_max: usize) -> WeightMatrix {
    assoc_matrix(w, &default_ells(), p_max).unwrap()
}

#[test]
fn rows_start_at_one() {
    for w in [g(1.0), WeightFunction::normalized_id_power(0.5).unwrap()] {
        let m = assoc(&w, 60);
        for row in m.rows() {
            assert!(row.log_m()[0].abs() < 1e-12);
        }
    }
}

#[test]
fn associated_rows_are_ordered() {
    let m = assoc(&g(1.5), 150);
    assert_eq!(m.check_order().state, State::Holds);
    for pair in m.rows().windows(2) {
        let n = pair[0].p_max().min(pair[1].p_max());
        for p in 1..=n {
            assert!(pair[0].log_mu()[p] <= pair[1].log_mu()[p] + 1e-9);
        }
    }
}

#[test]
fn gevrey_rows_are_equivalent_to_gevrey() {
    let m = assoc(&g(2.0), 200);
    for row in m.rows() {
        let target = gevrey(2.0, row.p_max()).unwrap();
        assert_eq!(relation(row, &target, SeqRelation::Equiv, &Policy::default()).state, State::Holds);
    }
}

#[test]
fn sandwich_has_no_violations() {
    let m = assoc(&g(1.0), 400);
    let cfg = RunConfig::default();
    for ell in [0.5, 1.0, 2.0] {
        let r = sandwich(&m, ell, &cfg).unwrap();
        assert_eq!(r.violations, 0, "ell = {ell}");
        assert!(r.d_fit.is_finite());
        assert_eq!(r.upper_bounded.state, State::Holds, "ell = {ell}");
    }
}

#[test]
fn sharp_moderate_growth_of_associated_matrices() {
    for w in [g(1.0), g(2.0), WeightFunction::normalized_id_power(0.5).unwrap()] {
        let m = assoc(&w, 200);
        let v = sharp_mg(&m, 200);
        assert_eq!(v.state, State::Holds, "{}", v.summary());
        assert_eq!(matrix_mg(&m, Flavor::Roumieu).state, State::Holds);
        assert_eq!(matrix_mg(&m, Flavor::Beurling).state, State::Holds);
    }
}

#[test]
fn product_keeps_sharp_moderate_growth() {
    let a = assoc(&g(1.0), 150);
    let b = assoc(&WeightFunction::normalized_id_power(0.5).unwrap(), 150);
    let p = matrix_product(&a, &b).unwrap();
    assert_eq!(sharp_mg(&p, 150).state, State::Holds);
    assert_eq!(matrix_mg(&p, Flavor::Roumieu).state, State::Holds);
}

#[test]
fn quadratic_single_row_fails_moderate_growth() {
    let m = WeightSequence::from_log((0..=200).map(|p| (p * p) as f64).collect()).unwrap();
    let mat = WeightMatrix::from_rows(vec![1.0], vec![m]).unwrap();
    assert_eq!(matrix_mg(&mat, Flavor::Roumieu).state, State::Fails);
}

#[test]
fn l_condition_examples() {
    let m = assoc(&g(1.0), 200);
    assert_eq!(matrix_l(&m, Flavor::Roumieu).state, State::Holds);
    assert_eq!(matrix_l(&m, Flavor::Beurling).state, State::Holds);

    let c = WeightMatrix::constant(&gevrey(1.0, 200).unwrap(), default_ells()).unwrap();
    assert_eq!(matrix_l(&c, Flavor::Roumieu).state, State::Fails);

    let q = gevrey_quotient(&assoc(&g(3.0), 200), 1.0).unwrap();
    assert_eq!(matrix_l(&q, Flavor::Roumieu).state, State::Holds);
}

#[test]
fn matrix_relation_examples() {
    let m1 = assoc(&g(1.0), 200);
    let m2 = assoc(&g(2.0), 200);
    assert_eq!(matrix_relation(&m1, &m2, MatrixRelation::Triangle).state, State::Holds);
    assert_eq!(matrix_relation(&m1, &m1, MatrixRelation::Triangle).state, State::Fails);
    assert_eq!(matrix_relation(&m1, &m2, MatrixRelation::RoumieuPreceq).state, State::Holds);
    assert_eq!(matrix_relation(&m2, &m1, MatrixRelation::BeurlingPreceq).state, State::Fails);

    let row = gevrey(2.0, 200).unwrap();
    let n = WeightMatrix::constant(&row, vec![1.0]).unwrap();
    let mixed = matrix_relation(&m1, &n, MatrixRelation::Mixed).state;
    let single = relation(m1.row(0.125).unwrap(), &row.truncate(m1.row(0.125).unwrap().p_max()), SeqRelation::Preceq, &Policy::default()).state;
    assert_eq!(mixed, State::Holds);
    assert_eq!(single, State::Holds);
}

#[test]
fn constancy_examples() {
    let m = assoc(&g(1.0), 200);
    assert_eq!(is_constant(&m).state, State::Holds);
    assert_eq!(constancy_criterion(&m).state, State::Holds);

    let slow = assoc(&WeightFunction::log_power(2.0).unwrap(), 200);
    assert_eq!(is_constant(&slow).state, State::Fails);

    let single = WeightMatrix::from_rows(vec![1.0], vec![gevrey(1.0, 50).unwrap()]).unwrap();
    assert_eq!(is_constant(&single).state, State::Holds);
}

#[test]
fn quotient_examples() {
    let m = assoc(&g(3.0), 200);
    let q = gevrey_quotient(&m, 1.0).unwrap();
    assert!(matches!(q.provenance(), Provenance::GevreyQuotient { .. }));
    assert!(!q.is_degenerate());
    for row in q.rows() {
        let target = gevrey(2.0, row.p_max()).unwrap();
        assert_eq!(relation(row, &target, SeqRelation::Equiv, &Policy::default()).state, State::Holds);
    }
    for row in q.regularized().unwrap() {
        assert!(row.is_log_convex());
        assert!(row.log_m()[0].abs() < 1e-12);
    }
    assert_eq!(regularization_check(&q).state, State::Holds);

    let ones = matrix_quotient(&m, &m).unwrap();
    assert!(ones.is_degenerate());
    assert!(ones.rows().iter().all(|r| r.log_m().iter().all(|v| *v == 0.0)));

    assert!(matrix_product(&m, &assoc(&g(1.0), 100)).is_err());
}

#[test]
fn quotient_sequence_identity_examples() {
    let m = assoc(&g(1.0), 200);
    let v = quotient_sequence_identity(&m, 1.0, 2).unwrap();
    assert_eq!(v.state, State::Holds, "{}", v.summary());
    assert!(v.witness.unwrap().value <= 1e-9);
    assert_eq!(quotient_sequence_identity(&m, 1.0, 1).unwrap().state, State::Holds);
    assert!(quotient_sequence_identity(&m, 8.0, 2).is_err());

    let row = m.row(2.0).unwrap();
    let mut log_m = row.log_m().to_vec();
    for v in log_m.iter_mut().skip(30) {
        *v += 1e-3;
    }
    let bad = m.with_row(2.0, WeightSequence::from_log(log_m).unwrap()).unwrap();
    let v = quotient_sequence_identity(&bad, 1.0, 2).unwrap();
    assert_eq!(v.state, State::Fails);
    assert_eq!(v.witness.unwrap().at, 30.0);
}

#[test]
fn matrix_json_round_trip() {
    let m = assoc(&g(1.0), 40);
    let text = serde_json::to_string(&m.to_json()).unwrap();
    let back = WeightMatrix::from_json(&serde_json::from_str(&text).unwrap()).unwrap();
    assert_eq!(back.ells(), m.ells());
    assert_eq!(back.rows(), m.rows());
    assert_eq!(back.provenance(), m.provenance());
    assert_eq!(back.p_max(), 40);
}
