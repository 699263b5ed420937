//! Acceptance suite: one PASS/FAIL line per criterion on stdout, tolerances pinned below.
//!
//! Lines are written straight to the process stdout so they show up without `--nocapture`.

use std::io::Write;
use std::time::{Duration, Instant};

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use weightlab::conjugate::{guard_prongs, lower_conj, upper_conj};
use weightlab::matrixcalc::{assoc_matrix, quotient_sequence_identity, sandwich, sharp_mg};
use weightlab::seqcore::{gevrey, relation, thilliez_gamma, SeqRelation};
use weightlab::tail::rel_dev;
use weightlab::theoremlab::{
    obstruction_demo, suite_division, suite_index_transport, suite_lower_product, suite_upper_welldef,
    ClaimState, SuiteOptions,
};
use weightlab::weightfn::{assoc_brute_force, gamma_bar_index, gamma_index, IndexOptions};
use weightlab::{
    ConjOptions, Error, GridSpec, Policy, RunConfig, State, SuiteReport, WeightFunction, WeightMatrix, WeightSequence,
};

const IDENTITY_REL: f64 = 1e-4;
const IDENTITY_SECS: f64 = 10.0;
const SHARP_MG_DEFECT: f64 = 1e-9;
const SHARP_MG_N: usize = 200;
const QUOTIENT_ABS: f64 = 1e-9;
const QUOTIENT_P: usize = 100;
const POWER_INDEX_WIDTH: f64 = 0.2;
const THILLIEZ_WIDTH: f64 = 0.1;
const INDEX_SECS: f64 = 30.0;
const OBSTRUCTION_ORACLE_SCAN: usize = 200;
const ORACLE_ABS: f64 = 1e-10;

fn line(n: u32, ok: bool, title: &str, detail: &str) {
    let tag = if ok { "PASS" } else { "FAIL" };
    let mut out = std::io::stdout().lock();
    writeln!(out, "{tag} criterion {n:>2}: {title}: {detail}").unwrap();
    out.flush().unwrap();
}

fn secs(d: Duration) -> f64 {
    d.as_secs_f64()
}

fn g(alpha: f64, prefix: usize) -> WeightFunction {
    WeightFunction::assoc(&gevrey(alpha, prefix).unwrap()).unwrap()
}

fn acceptance_grid() -> GridSpec {
    GridSpec { t_min: 1.0, t_max: 1e6, n: 200 }
}

#[test]
fn criterion_01_gevrey_lower_identity() {
    let start = Instant::now();
    let r = lower_conj(&g(1.0, 4000), &g(1.0, 4000), &acceptance_grid(), ConjOptions::default()).unwrap();
    let elapsed = secs(start.elapsed());
    let want = g(2.0, 4000);
    let dev = r.trace.iter().map(|p| rel_dev(p.value, want.eval(p.t).unwrap())).fold(0.0, f64::max);
    let ok = r.trace.len() == 200 && dev <= IDENTITY_REL && elapsed < IDENTITY_SECS;
    line(1, ok, "lower(G1, G1) = G2", &format!("max rel dev {dev:.3e} on {} points, {elapsed:.2} s", r.trace.len()));
    assert!(ok);
}

#[test]
fn criterion_02_gevrey_upper_identity() {
    let start = Instant::now();
    let cfg = RunConfig::default();
    let r = upper_conj(&g(3.0, 4000), &g(1.0, 4000), &acceptance_grid(), ConjOptions::default(), &cfg).unwrap();
    let elapsed = secs(start.elapsed());
    let want = g(2.0, 4000);
    let dev = r.trace.iter().map(|p| rel_dev(p.value, want.eval(p.t).unwrap())).fold(0.0, f64::max);
    let guard = r.guard.as_ref().map(|v| v.state);
    let ok = r.trace.len() == 200 && dev <= IDENTITY_REL && guard == Some(State::Holds) && elapsed < IDENTITY_SECS;
    line(2, ok, "upper(G3, G1) = G2", &format!("max rel dev {dev:.3e}, guard {guard:?}, {elapsed:.2} s"));
    assert!(ok);
}

#[test]
fn criterion_03_well_definedness_iff() {
    let cfg = RunConfig::default();
    let (g1, g2) = (g(1.0, 4000), g(2.0, 4000));
    let refused = matches!(
        upper_conj(&g1, &g1, &acceptance_grid(), ConjOptions::default(), &cfg),
        Err(Error::WellDefinedness(_))
    );
    let bad = guard_prongs(&g1, &g1, &cfg).states();
    let good = guard_prongs(&g2, &g1, &cfg).states();
    let ok = refused
        && bad == vec![State::Fails; 3]
        && good == vec![State::Holds; 3];
    line(3, ok, "upper conjugate well-defined iff", &format!("(G1, G1) refused {refused}, prongs {bad:?}; (G2, G1) prongs {good:?}"));
    assert!(ok);
}

#[test]
fn criterion_04_sandwich() {
    let cfg = RunConfig::default();
    let m = assoc_matrix(&g(1.0, 4000), &cfg.ells, cfg.p_max).unwrap();
    let mut ok = true;
    let mut parts = Vec::new();
    for ell in [0.5, 1.0, 2.0] {
        let r = sandwich(&m, ell, &cfg).unwrap();
        ok &= r.violations == 0 && r.d_fit.is_finite() && r.points > 0;
        parts.push(format!("ell {ell}: {} violations / {} points, D = {:.4}", r.violations, r.points, r.d_fit));
    }
    line(4, ok, "sandwich estimate", &parts.join("; "));
    assert!(ok);
}

/// Direct `max_{p+q ≤ n} logW^{(ℓ)}_{p+q} − logW^{(2ℓ)}_p − logW^{(2ℓ)}_q` over the grid.
fn sharp_defect(m: &WeightMatrix, n: usize) -> (f64, usize) {
    let mut worst = f64::NEG_INFINITY;
    let mut pairs = 0;
    for (i, &ell) in m.ells().iter().enumerate() {
        let Some(j) = m.ells().iter().position(|&l| (l - 2.0 * ell).abs() < 1e-12) else { continue };
        let (a, b) = (m.rows()[i].log_m(), m.rows()[j].log_m());
        let top = n.min(a.len() - 1);
        for s in 0..=top {
            for p in 0..=s {
                let q = s - p;
                if p < b.len() && q < b.len() {
                    worst = worst.max(a[s] - b[p] - b[q]);
                    pairs += 1;
                }
            }
        }
    }
    (worst, pairs)
}

#[test]
fn criterion_05_sharp_matrix_moderate_growth() {
    let ells = RunConfig::default().ells;
    let weights = [
        ("G1", g(1.0, 4000)),
        ("G2", g(2.0, 4000)),
        ("normalized_id_power(1/2)", WeightFunction::normalized_id_power(0.5).unwrap()),
    ];
    let mut ok = true;
    let mut parts = Vec::new();
    for (name, w) in &weights {
        let m = assoc_matrix(w, &ells, SHARP_MG_N).unwrap();
        let v = sharp_mg(&m, SHARP_MG_N);
        let (d, pairs) = sharp_defect(&m, SHARP_MG_N);
        ok &= v.state == State::Holds && d <= SHARP_MG_DEFECT && pairs > 0;
        parts.push(format!("{name}: {} max defect {d:.2e} over {pairs} pairs", v.state));
    }
    line(5, ok, "sharp matrix (mg)", &parts.join("; "));
    assert!(ok);
}

#[test]
fn criterion_06_quotient_sequence_identity() {
    let ells = RunConfig::default().ells;
    let m = assoc_matrix(&g(1.0, 4000), &ells, QUOTIENT_P).unwrap();
    let v = quotient_sequence_identity(&m, 1.0, 2).unwrap();
    let dev = v.witness.as_ref().map_or(f64::INFINITY, |w| w.value);
    let ok = v.state == State::Holds && dev <= QUOTIENT_ABS && m.p_max() == QUOTIENT_P;
    line(6, ok, "quotient-sequence identity (ell 1, c 2)", &format!("{}, max log deviation {dev:.2e} for p <= {QUOTIENT_P}", v.state));
    assert!(ok);
}

#[test]
fn criterion_07_index_brackets() {
    let cfg = RunConfig::default();
    let o = IndexOptions::default();
    let w = WeightFunction::id_power(0.5).unwrap();

    let start = Instant::now();
    let lo = gamma_index(&w, &cfg, &o);
    let t_lo = secs(start.elapsed());
    let start = Instant::now();
    let hi = gamma_bar_index(&w, &cfg, &o);
    let t_hi = secs(start.elapsed());
    let start = Instant::now();
    let th = thilliez_gamma(&gevrey(1.5, 2000).unwrap(), 4);
    let t_th = secs(start.elapsed());

    let ok = lo.contains(2.0)
        && lo.width() <= POWER_INDEX_WIDTH
        && hi.contains(2.0)
        && hi.width() <= POWER_INDEX_WIDTH
        && th.contains(1.5)
        && th.width() <= THILLIEZ_WIDTH
        && [t_lo, t_hi, t_th].iter().all(|&t| t < INDEX_SECS);
    line(
        7,
        ok,
        "index brackets",
        &format!(
            "gamma [{:.4}, {:.4}] {t_lo:.2} s; gamma_bar [{:.4}, {:.4}] {t_hi:.2} s; thilliez(G1.5) [{:.4}, {:.4}] {t_th:.2} s",
            lo.lower, lo.upper, hi.lower, hi.upper, th.lower, th.upper
        ),
    );
    assert!(ok);
}

#[test]
fn criterion_08_index_transport() {
    let r = lower_conj(&g(1.0, 4000), &g(0.5, 1_000_000), &GridSpec { t_min: 1.0, t_max: 1e3, n: 8 }, ConjOptions::default())
        .unwrap();
    let b = gamma_index(&r.result, &RunConfig::default(), &IndexOptions::default());
    let gap = if b.contains(1.5) { 0.0 } else { (b.lower - 1.5).abs().min((b.upper - 1.5).abs()) };
    let ok = b.upper.is_finite() && gap <= b.width();
    line(8, ok, "gamma of lower(G1, G1/2) near 3/2", &format!("bracket [{:.4}, {:.4}], distance from 1.5 = {gap:.4}", b.lower, b.upper));
    assert!(ok);
}

#[test]
fn criterion_09_division_desk_check() {
    let r = suite_division(&g(3.0, 4000), 1.0, &SuiteOptions::default()).unwrap();
    let all_hold = r.aborted.is_none() && r.claims.iter().all(|c| c.state == ClaimState::Holds);
    let rows = r.artifacts.as_ref().and_then(|a| a["logQ"].as_object()).cloned().unwrap_or_default();
    let mut equiv = !rows.is_empty();
    for row in rows.values() {
        let log_q: Vec<f64> = serde_json::from_value(row.clone()).unwrap();
        let q = WeightSequence::from_log(log_q).unwrap();
        let target = gevrey(2.0, q.p_max()).unwrap();
        equiv &= relation(&q, &target, SeqRelation::Equiv, &Policy::default()).state == State::Holds;
    }
    let ok = all_hold && equiv;
    let states: Vec<String> = r.claims.iter().map(|c| format!("{}={}", c.id, c.state.as_str())).collect();
    line(9, ok, "division theorem (G3, alpha 1)", &format!("{}; {} quotient rows equiv G2: {equiv}", states.join(" "), rows.len()));
    assert!(ok);
}

/// Smallest `n` from which `n > 8 ln n` holds on the whole scan.
fn obstruction_oracle(n_max: usize) -> usize {
    let holds = |n: usize| n as f64 > 8.0 * (n as f64).ln();
    (2..=n_max).rev().take_while(|&n| holds(n)).last().expect("inequality holds at n_max")
}

#[test]
fn criterion_10_obstruction_demo() {
    let oracle = obstruction_oracle(OBSTRUCTION_ORACLE_SCAN);
    let tr = obstruction_demo(1.0, 2.0, 1.0, 200).unwrap();
    let n_star = tr.crossing;
    let positive = n_star.is_some_and(|n| tr.margins.iter().filter(|m| m.n >= n).all(|m| m.margin > 0.0));
    let ok = n_star == Some(oracle) && positive && tr.increasing_after_crossing;
    let around: Vec<String> = [oracle - 1, oracle, 28, 29]
        .iter()
        .filter_map(|&n| tr.margin_at(n).map(|m| format!("m({n}) = {m:.4}")))
        .collect();
    line(
        10,
        ok,
        "obstruction crossing",
        &format!(
            "expected n* = {oracle}, observed {n_star:?}; positive after crossing {positive}, increasing {}; {}",
            tr.increasing_after_crossing,
            around.join(", ")
        ),
    );
    assert_eq!(n_star, Some(oracle));
    assert!(ok);
}

#[test]
fn criterion_11_oracle_equivalence() {
    let mut rng = StdRng::seed_from_u64(0x5eed_0011);
    let mut worst: f64 = 0.0;
    let mut evals = 0;
    for _ in 0..50 {
        let len = rng.gen_range(20..200);
        let mut mu = rng.gen_range(0.0..2.0);
        let mut log_m = vec![0.0];
        for _ in 0..len {
            log_m.push(log_m[log_m.len() - 1] + mu);
            mu += rng.gen_range(0.0..0.5);
        }
        let m = WeightSequence::from_log(log_m).unwrap();
        let w = WeightFunction::assoc(&m).unwrap();
        let top = w.horizon().min(1e12);
        for _ in 0..50 {
            let t = rng.gen_range(0.0..top.ln()).exp();
            worst = worst.max((w.eval(t).unwrap() - assoc_brute_force(&m, t)).abs());
            evals += 1;
        }
    }
    let ok = evals == 2500 && worst <= ORACLE_ABS;
    line(11, ok, "closed form vs brute-force sup", &format!("{evals} evaluations, max abs error {worst:.2e}"));
    assert!(ok);
}

#[test]
fn criterion_12_negative_controls() {
    let opts = SuiteOptions::default().perturbed();
    let runs: Vec<(&str, SuiteReport)> = vec![
        ("lower-product", suite_lower_product(&g(1.0, 4000), &g(1.0, 4000), &opts).unwrap()),
        ("index-transport", suite_index_transport(&g(3.0, 4000), &g(1.0, 4000), &opts).unwrap()),
        ("upper-welldef", suite_upper_welldef(&g(2.0, 4000), &g(1.0, 4000), &opts).unwrap()),
        ("division", suite_division(&g(3.0, 4000), 1.0, &opts).unwrap()),
    ];
    let mut ok = true;
    let mut parts = Vec::new();
    for (name, r) in &runs {
        let flipped: Vec<&str> = r.claims.iter().filter(|c| c.state == ClaimState::Fails).map(|c| c.id.as_str()).collect();
        ok &= !flipped.is_empty() && r.exit_code() == 1;
        parts.push(format!("{name}: fails [{}]", flipped.join(", ")));
    }
    let control = obstruction_demo(2.0 - 1e-3, 2.0, 1.0, 200).unwrap();
    ok &= control.crossing.is_none();
    parts.push(format!("obstruction with 2 - alpha shrunk 1000x: crossing {:?}", control.crossing));
    line(12, ok, "negative controls flip", &parts.join("; "));
    assert!(ok);
}

#[test]
fn oracle_agrees_with_a_direct_scan() {
    let direct = (2..=OBSTRUCTION_ORACLE_SCAN)
        .find(|&n| (n..=OBSTRUCTION_ORACLE_SCAN).all(|k| k as f64 > 8.0 * (k as f64).ln()))
        .unwrap();
    assert_eq!(obstruction_oracle(OBSTRUCTION_ORACLE_SCAN), direct);
    assert_eq!(direct, 27);
}
