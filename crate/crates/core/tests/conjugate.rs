use weightlab::conjugate::{
    guard_prongs, lower_conj, lower_envelope, upper_conj, upper_envelope, well_defined_guard,
};
use weightlab::seqcore::gevrey;
use weightlab::tail::{log_grid, rel_dev};
use weightlab::{ConjOptions, Error, GridSpec, RunConfig, State, WeightFunction};

fn g(alpha: f64) -> WeightFunction {
    WeightFunction::assoc(&gevrey(alpha, 4000).unwrap()).unwrap()
}

fn grid(t_max: f64, n: usize) -> GridSpec {
    GridSpec { t_min: 1.0, t_max, n }
}

fn opts() -> ConjOptions {
    ConjOptions::default()
}

#[test]
fn gevrey_lower_identity() {
    let r = lower_conj(&g(1.0), &g(0.5), &grid(1e5, 60), opts()).unwrap();
    let want = g(1.5);
    for p in &r.trace {
        assert!(rel_dev(p.value, want.eval(p.t).unwrap()) < 1e-6, "t = {}", p.t);
    }
}

#[test]
fn lower_with_zero_is_sigma_at_zero() {
    let sigma = WeightFunction::normalized_id_power(0.5).unwrap();
    let r = lower_conj(&sigma, &WeightFunction::zero(), &grid(1e4, 20), opts()).unwrap();
    assert!(r.trace.iter().all(|p| p.value.abs() < 1e-12));
}

#[test]
fn lower_with_identity_is_classical_envelope() {
    let sigma = g(2.0);
    let id = WeightFunction::id_power(1.0).unwrap();
    let r = lower_conj(&sigma, &id, &grid(1e4, 25), opts()).unwrap();
    let h = sigma.invert();
    for p in &r.trace {
        let e = lower_envelope(&h, p.t, &opts()).unwrap();
        assert!(rel_dev(p.value, e.value) < 1e-6, "t = {}: {} vs {}", p.t, p.value, e.value);
    }
}

#[test]
fn lower_power_identity() {
    let sigma = g(1.0);
    let alpha = 2.0;
    let tau = WeightFunction::id_power(1.0 / alpha).unwrap();
    let r = lower_conj(&sigma, &tau, &grid(1e6, 30), opts()).unwrap();
    let h = sigma.invert().power_substitute(1.0 / alpha).unwrap();
    for p in &r.trace {
        let e = lower_envelope(&h, p.t.powf(1.0 / alpha), &opts()).unwrap();
        assert!(rel_dev(p.value, e.value) < 1e-6, "t = {}", p.t);
    }
}

#[test]
fn gevrey_upper_identity() {
    let cfg = RunConfig::default();
    let r = upper_conj(&g(3.0), &g(1.0), &grid(1e5, 60), opts(), &cfg).unwrap();
    assert_eq!(r.guard.as_ref().unwrap().state, State::Holds);
    let want = g(2.0);
    for p in &r.trace {
        assert!(rel_dev(p.value, want.eval(p.t).unwrap()) < 1e-6, "t = {}", p.t);
    }
}

#[test]
fn upper_refuses_equal_weights() {
    let cfg = RunConfig::default();
    match upper_conj(&g(1.0), &g(1.0), &grid(1e4, 10), opts(), &cfg) {
        Err(Error::WellDefinedness(v)) => {
            assert_eq!(v.state, State::Fails);
            assert!(v.witness.is_some());
        }
        other => panic!("expected a well-definedness error, got {:?}", other.map(|r| r.guard)),
    }
}

#[test]
fn upper_with_identity_is_classical_envelope() {
    let cfg = RunConfig::default();
    let sigma = g(2.0);
    let id = WeightFunction::id_power(1.0).unwrap();
    let r = upper_conj(&sigma, &id, &grid(1e4, 25), opts(), &cfg).unwrap();
    for p in r.trace.iter().filter(|p| !p.horizon_uncertain) {
        let e = upper_envelope(&sigma, 1.0 / p.t, &opts()).unwrap();
        assert!(rel_dev(p.value, e.value) < 1e-6, "t = {}", p.t);
    }
}

#[test]
fn upper_at_zero_follows_convention() {
    let sigma = g(3.0).affine(1.0, 2.0).unwrap();
    let tau = g(1.0).affine(1.0, 0.5).unwrap();
    let r = upper_conj(&sigma, &tau, &grid(1e3, 10), opts(), &RunConfig::default()).unwrap();
    assert_eq!(r.result.eval(0.0).unwrap(), 1.5);
}

#[test]
fn guard_examples() {
    let cfg = RunConfig::default();
    let p = guard_prongs(&g(2.0), &g(1.0), &cfg);
    assert_eq!(p.a.as_ref().unwrap().state, State::Holds);
    assert_eq!(p.combined().state, State::Holds);

    let p = guard_prongs(&g(1.0), &g(1.0), &cfg);
    assert_eq!(p.states(), vec![State::Fails; 3]);

    let half = WeightFunction::id_power(0.5).unwrap();
    assert!(guard_prongs(&half, &half, &cfg).a.is_none());
    let id = WeightFunction::id_power(1.0).unwrap();
    assert_eq!(well_defined_guard(&half, &id, &cfg).state, State::Holds);
    assert_eq!(well_defined_guard(&id, &id, &cfg).state, State::Fails);
}

#[test]
fn classical_envelope_examples() {
    let lin = WeightFunction::id_power(1.0).unwrap();
    let e = lower_envelope(&lin, 3.0, &opts()).unwrap();
    assert!(e.value.abs() < 1e-12 && e.at_edge);

    let h = WeightFunction::id_power(0.5).unwrap().affine(2.0, 0.0).unwrap();
    for t in [0.1, 0.5, 1.0, 4.0] {
        let e = upper_envelope(&h, t, &opts()).unwrap();
        assert!((e.value - 1.0 / t).abs() < 1e-9 * (1.0 / t), "t = {t}: {}", e.value);
        assert!((e.arg - 1.0 / (t * t)).abs() < 1e-4 / (t * t));
    }
}

#[test]
fn feasible_points_bound_both_conjugates() {
    let (sigma, tau) = (g(3.0), g(1.0));
    let lo = lower_conj(&sigma, &tau, &grid(1e5, 30), opts()).unwrap();
    let up = upper_conj(&sigma, &tau, &grid(1e5, 30), opts(), &RunConfig::default()).unwrap();
    for (a, b) in lo.trace.iter().zip(&up.trace) {
        for s0 in log_grid(1.0, 3000.0, 15) {
            let t = a.t;
            if let (Ok(x), Ok(y)) = (sigma.eval(s0), tau.eval(t / s0)) {
                assert!(a.value <= x + y + 1e-9);
            }
            if let (Ok(x), Ok(y)) = (sigma.eval(s0), tau.eval(s0 / b.t)) {
                assert!(b.value >= x - y - 1e-9);
            }
        }
    }
}

#[test]
fn lower_is_symmetric() {
    let (a, b) = (g(1.0), g(2.0));
    let x = lower_conj(&a, &b, &grid(1e6, 40), opts()).unwrap();
    let y = lower_conj(&b, &a, &grid(1e6, 40), opts()).unwrap();
    for (p, q) in x.trace.iter().zip(&y.trace) {
        assert!(rel_dev(p.value, q.value) < 1e-9, "t = {}", p.t);
    }
}

#[test]
fn traces_are_nondecreasing_and_serialize() {
    let r = lower_conj(&g(1.0), &g(1.0), &grid(1e6, 50), opts()).unwrap();
    assert!(r.trace.windows(2).all(|w| w[1].value >= w[0].value));
    let j = r.to_json();
    assert_eq!(j["trace"].as_array().unwrap().len(), 50);
    assert!(j["trace"][0].get("s_opt").is_some());
    assert_eq!(j["kind"]["kind"], "lower");
}
