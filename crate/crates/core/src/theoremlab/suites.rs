use serde_json::{json, Value};

use crate::conjugate::{
    guard_prongs, lower_conj, lower_fn, upper_conj, upper_envelope, upper_fn, well_defined_guard, ConjOptions,
    GridSpec,
};
use crate::error::{invalid, Error, Result};
use crate::matrixcalc::{
    assoc_matrix_unchecked, constancy_criterion, matrix_l, matrix_product, matrix_relation, regularize, sharp_mg,
    Flavor, MatrixRelation,
};
use crate::seqcore::{gevrey, pointwise_product, pointwise_quotient, relation, thilliez_gamma, SeqRelation, WeightSequence};
use crate::tail::rel_dev;
use crate::verdict::{all_of, GrowthIndexEstimate, State, Verdict, Window, Witness};
use crate::weightfn::{
    check_conditions, fn_relation, gamma_bar_index, gamma_index, ConditionReport, FnRelation, IndexOptions,
    WeightFunction,
};

use super::{bracket_json, bracket_leq, Claim, SuiteOptions, SuiteReport};

/// Prefix length of Gevrey sequences behind `ω_{G^α}` relative to `p_max`.
const GEVREY_PREFIX: usize = 10;
/// Scale of the perturbed product row in the lower-product control.
const PERTURB_SCALE: f64 = 2.0;
/// Extra Gevrey exponent used by the division control.
const PERTURB_ALPHA: f64 = 0.5;

fn gevrey_weight(alpha: f64, p_max: usize) -> Result<WeightFunction> {
    WeightFunction::assoc(&gevrey(alpha, GEVREY_PREFIX * p_max)?)
}

fn conditions_or_abort(
    report: &mut SuiteReport,
    named: &[(&str, &WeightFunction)],
    opts: &SuiteOptions,
) -> Result<Option<Vec<ConditionReport>>> {
    let mut out = Vec::new();
    let mut failed = None;
    for (name, w) in named {
        let c = check_conditions(w, &opts.cfg)?;
        for (cond, v) in [("omega0", &c.omega0), ("omega3", &c.omega3), ("omega4", &c.omega4)] {
            if v.is_fails() {
                report.verdict(&format!("precondition:{name}:{cond}"), v.clone());
                failed.get_or_insert(format!("{name} fails {cond}"));
            }
        }
        out.push(c);
    }
    Ok(match failed {
        Some(_) => None,
        None => Some(out),
    })
}

/// Largest argument below `hi` at which a conjugate trace can be computed, found by halving.
fn lower_trace(
    sigma: &WeightFunction,
    tau: &WeightFunction,
    t_min: f64,
    hi: f64,
    n: usize,
) -> Result<Vec<(f64, f64)>> {
    let mut top = hi;
    loop {
        if !(top > t_min * 10.0) {
            return Err(Error::Horizon("no t-window left for the conjugate trace".into()));
        }
        match lower_conj(sigma, tau, &GridSpec { t_min, t_max: top, n }, ConjOptions::default()) {
            Ok(r) => return Ok(r.trace.iter().map(|p| (p.t, p.value)).collect()),
            Err(Error::Horizon(_)) | Err(Error::Domain { .. }) => top /= 2.0,
            Err(e) => return Err(e),
        }
    }
}

fn max_deviation(trace: &[(f64, f64)], w: &WeightFunction) -> Result<(f64, f64)> {
    let mut worst = (0.0, trace.first().map_or(0.0, |p| p.0));
    for &(t, v) in trace {
        let d = rel_dev(v, w.eval(t)?);
        if d > worst.0 {
            worst = (d, t);
        }
    }
    Ok(worst)
}

fn tolerance_verdict(label: &str, dev: f64, at: f64, tol: f64, lo: f64, hi: f64) -> Verdict {
    let state = if dev <= tol { State::Holds } else { State::Fails };
    Verdict::decided(state, Witness::new(label, at, dev), Window::new("t", lo, hi), tol - dev)
}

fn ell_pairs(ells: &[f64]) -> Vec<(f64, f64)> {
    let on = |x: f64| ells.iter().any(|&l| (l - x).abs() <= 1e-12 * x);
    let mut out: Vec<(f64, f64)> =
        [(1.0, 1.0), (0.5, 2.0), (2.0, 0.5)].into_iter().filter(|&(a, b)| on(a) && on(b)).collect();
    'fill: for &a in ells {
        for &b in ells {
            if out.len() >= 3 {
                break 'fill;
            }
            if !out.contains(&(a, b)) {
                out.push((a, b));
            }
        }
    }
    out
}

fn common(a: &WeightSequence, b: &WeightSequence) -> (WeightSequence, WeightSequence) {
    let n = a.p_max().min(b.p_max());
    (a.truncate(n), b.truncate(n))
}

/// Associated functions of rows, keeping only those with a usable t-window.
fn usable(seq: &WeightSequence, t_min: f64) -> Option<WeightFunction> {
    let w = WeightFunction::assoc(seq).ok()?;
    (w.horizon() >= t_min * 1e3).then_some(w)
}

fn reference_ell(ells: &[f64]) -> f64 {
    ells.iter().copied().min_by(|a, b| a.ln().abs().total_cmp(&b.ln().abs())).expect("non-empty")
}

/// Product matrices and `ω_{S·T} = ω_S ⋆̌ ω_T`.
///
/// Perturbation: the first product row is multiplied by `2^p` before the identity check.
pub fn suite_lower_product(sigma: &WeightFunction, tau: &WeightFunction, opts: &SuiteOptions) -> Result<SuiteReport> {
    let cfg = &opts.cfg;
    let pairs = ell_pairs(&cfg.ells);
    let mut report = SuiteReport::new(
        "lower-product",
        json!({
            "sigma": sigma.describe(),
            "tau": tau.describe(),
            "pairs": pairs,
            "perturb": opts.perturb,
            "perturbation": "first product row scaled by 2^p",
            "config": cfg,
        }),
    );
    let Some(conds) = conditions_or_abort(&mut report, &[("sigma", sigma), ("tau", tau)], opts)? else {
        return Ok(report.abort("catalog preconditions failed"));
    };
    let s = assoc_matrix_unchecked(sigma, &cfg.ells, cfg.p_max)?;
    let t = assoc_matrix_unchecked(tau, &cfg.ells, cfg.p_max)?;

    let mut exact = Vec::new();
    for (k, &(l, l1)) in pairs.iter().enumerate() {
        let (a, b) = common(s.row(l).expect("grid"), t.row(l1).expect("grid"));
        let mut prod = pointwise_product(&a, &b)?;
        if opts.perturb && k == 0 {
            prod = prod.scale_geometric(PERTURB_SCALE);
        }
        let wp = WeightFunction::assoc(&prod)?;
        let (ws, wt) = (WeightFunction::assoc(&a)?, WeightFunction::assoc(&b)?);
        let hi = cfg.t_max.min(wp.horizon());
        let trace = lower_trace(&ws, &wt, cfg.t_min, hi, cfg.t_points)?;
        let (dev, at) = max_deviation(&trace, &wp)?;
        let top = trace.last().map_or(hi, |p| p.0);
        exact.push(tolerance_verdict(&format!("max rel deviation (ell = {l}, ell1 = {l1})"), dev, at, cfg.tol_rel, cfg.t_min, top));
    }
    report.verdict("exact_identity", all_of(exact, Window::new("pair", 0.0, pairs.len() as f64)));

    let prod = matrix_product(&s, &t)?;
    let l0 = reference_ell(prod.ells());
    let mut eq = Vec::new();
    let mut skipped = Vec::new();
    if let Some(w0) = usable(prod.row(l0).expect("grid"), cfg.t_min) {
        for (&l, row) in prod.ells().iter().zip(prod.rows()) {
            if l == l0 {
                continue;
            }
            match usable(row, cfg.t_min) {
                Some(w) => {
                    let mut v = fn_relation(&w0, &w, FnRelation::Equiv, cfg)?;
                    if let Some(x) = v.witness.as_mut() {
                        x.label = format!("{} (ell = {l} vs {l0})", x.label);
                    }
                    eq.push(v);
                }
                None => skipped.push(l),
            }
        }
    }
    let mut v = all_of(eq, Window::new("ell", prod.ells()[0], prod.ells()[prod.ells().len() - 1]));
    if !skipped.is_empty() {
        v.notes.push(format!("rows with too short a validity horizon: {skipped:?}"));
    }
    report.verdict("equivalence_across_ell", v);

    report.verdict("sharp_mg", sharp_mg(&prod, prod.effective_p_max()));

    let om1: Vec<bool> = conds.iter().map(|c| c.omega1.is_holds()).collect();
    if om1.iter().any(|&b| b) {
        report.verdict("matrix_l", matrix_l(&prod, Flavor::Roumieu));
    } else {
        report.push(Claim::skipped("matrix_l", "neither factor satisfies omega1"));
    }
    Ok(report)
}

/// Growth-index transport under `⋆̌` and, when the guard passes, `⋆̂`.
///
/// Perturbation: the lower conjugate is replaced by `t ↦ (σ⋆̌τ)(t²)`.
pub fn suite_index_transport(sigma: &WeightFunction, tau: &WeightFunction, opts: &SuiteOptions) -> Result<SuiteReport> {
    let cfg = &opts.cfg;
    let io = IndexOptions::default();
    let mut lower = lower_fn(sigma, tau, ConjOptions::default());
    if opts.perturb {
        lower = lower.power_substitute(0.5)?;
    }
    let gs = gamma_index(sigma, cfg, &io);
    let gt = gamma_index(tau, cfg, &io);
    let gbs = gamma_bar_index(sigma, cfg, &io);
    let gbt = gamma_bar_index(tau, cfg, &io);
    let gl = gamma_index(&lower, cfg, &io);
    let gbl = gamma_bar_index(&lower, cfg, &io);
    let mut brackets = json!({
        "gamma_sigma": bracket_json(&gs),
        "gamma_tau": bracket_json(&gt),
        "gamma_bar_sigma": bracket_json(&gbs),
        "gamma_bar_tau": bracket_json(&gbt),
        "gamma_lower": bracket_json(&gl),
        "gamma_bar_lower": bracket_json(&gbl),
    });
    let mut report = SuiteReport::new(
        "index-transport",
        json!({
            "sigma": sigma.describe(),
            "tau": tau.describe(),
            "perturb": opts.perturb,
            "perturbation": "lower conjugate composed with t -> t^2",
            "index_options": { "gamma_max": io.gamma_max, "resolution": io.resolution, "pad": io.pad, "eta": io.eta },
            "config": cfg,
        }),
    );
    report.verdict("gamma_lower", bracket_leq("gamma(sigma)+gamma(tau) <= gamma(lower)", &[&gs, &gt], &[&gl]));
    report.verdict(
        "gamma_bar_lower",
        bracket_leq("gamma_bar(lower) <= gamma_bar(sigma)+gamma_bar(tau)", &[&gbl], &[&gbs, &gbt]),
    );

    let ids = ["gamma_upper", "gamma_upper_chain", "gamma_bar_upper"];
    let guard = well_defined_guard(sigma, tau, cfg);
    if !guard.is_holds() {
        for id in ids {
            report.push(Claim::skipped(id, format!("upper conjugate guard: {}", guard.summary())));
        }
        report.artifacts = Some(json!({ "brackets": brackets }));
        return Ok(report);
    }
    let separated = gt.lower > 0.0 && overlap(&gt, &gbt) && gbt.upper < gs.lower && gbs.upper.is_finite();
    if !separated {
        for id in ids {
            let v = Verdict::inconclusive(Window::new("bracket", 0.0, f64::INFINITY), 0.0)
                .with_note("index configuration 0 < gamma(tau) = gamma_bar(tau) < gamma(sigma) <= gamma_bar(sigma) < inf is not bracket-separated");
            report.verdict(id, v);
        }
        report.artifacts = Some(json!({ "brackets": brackets }));
        return Ok(report);
    }
    let upper = upper_fn(sigma, tau, ConjOptions::default());
    let gu = gamma_index(&upper, cfg, &io);
    let gbu = gamma_bar_index(&upper, cfg, &io);
    brackets["gamma_upper"] = bracket_json(&gu);
    brackets["gamma_bar_upper"] = bracket_json(&gbu);
    report.verdict("gamma_upper", bracket_leq("gamma(sigma) <= gamma(upper)+gamma_bar(tau)", &[&gs], &[&gu, &gbt]));
    report.verdict(
        "gamma_upper_chain",
        bracket_leq("gamma(upper)+gamma_bar(tau) <= gamma_bar(upper)+gamma(tau)", &[&gu, &gbt], &[&gbu, &gt]),
    );
    report.verdict(
        "gamma_bar_upper",
        bracket_leq("gamma_bar(upper)+gamma(tau) <= gamma_bar(sigma)", &[&gbu, &gt], &[&gbs]),
    );
    report.artifacts = Some(json!({ "brackets": brackets }));
    Ok(report)
}

fn overlap(a: &GrowthIndexEstimate, b: &GrowthIndexEstimate) -> bool {
    a.lower <= b.upper && b.lower <= a.upper
}

fn prongs_agree(states: &[State]) -> Option<State> {
    let decided: Vec<State> = states.iter().copied().filter(|s| *s != State::Inconclusive).collect();
    match decided.first() {
        None => None,
        Some(&s) if decided.iter().all(|&x| x == s) => Some(s),
        Some(_) => Some(State::Inconclusive),
    }
}

fn agreement_verdict(label: &str, states: &[State], expected: Option<State>) -> Verdict {
    let window = Window::new("prong", 0.0, 2.0);
    let names: Vec<&str> = states.iter().map(|s| s.as_str()).collect();
    let code = |s: State| match s {
        State::Holds => 1.0,
        State::Fails => -1.0,
        State::Inconclusive => 0.0,
    };
    let codes: Vec<f64> = states.iter().map(|&s| code(s)).collect();
    let wit = Witness::new(format!("{label}: prong states {}", names.join("/")), codes[0], codes[1..].iter().sum());
    match prongs_agree(states) {
        None => Verdict::inconclusive(window, 0.0).with_note(format!("{label}: no prong decided")),
        Some(State::Inconclusive) => Verdict::fails(wit, window, 1.0).with_note("prongs disagree"),
        Some(s) => match expected {
            Some(e) if e != s => Verdict::fails(wit, window, 1.0).with_note(format!("expected {e}, prongs agree on {s}")),
            _ => Verdict::holds(wit, window, 0.0),
        },
    }
}

/// Cross-validation of the well-definedness prongs, the triangle implication and the constancy criterion.
///
/// Perturbation: prong (a) of the pair `(G¹, G¹)` sees `τ`'s sequence divided by `p^p`.
pub fn suite_upper_welldef(sigma: &WeightFunction, tau: &WeightFunction, opts: &SuiteOptions) -> Result<SuiteReport> {
    let cfg = &opts.cfg;
    let battery = [(2.0, 1.0, State::Holds), (1.0, 1.0, State::Fails), (1.0, 2.0, State::Fails)];
    let mut report = SuiteReport::new(
        "upper-welldef",
        json!({
            "sigma": sigma.describe(),
            "tau": tau.describe(),
            "battery": battery.iter().map(|(a, b, e)| json!({"sigma": format!("gevrey({a})"), "tau": format!("gevrey({b})"), "expected": e})).collect::<Vec<Value>>(),
            "perturb": opts.perturb,
            "perturbation": "prong a of (gevrey(1), gevrey(1)) uses N_p / p^p",
            "config": cfg,
        }),
    );
    let pr = guard_prongs(sigma, tau, cfg);
    report.verdict("prongs_agree:input", agreement_verdict("input", &pr.states(), None));

    for (a, b, expected) in battery {
        let (ws, wt) = (gevrey_weight(a, cfg.p_max)?, gevrey_weight(b, cfg.p_max)?);
        let mut pr = guard_prongs(&ws, &wt, cfg);
        if opts.perturb && a == 1.0 && b == 1.0 {
            let n = wt.assoc_sequence().expect("assoc");
            let m = ws.assoc_sequence().expect("assoc");
            let shifted: Vec<f64> =
                n.log_m().iter().enumerate().map(|(p, v)| if p == 0 { *v } else { v - p as f64 * (p as f64).ln() }).collect();
            pr.a = Some(relation(&WeightSequence::from_log(shifted)?, m, SeqRelation::Triangle, &cfg.policy()));
        }
        let id = format!("battery:gevrey({a})/gevrey({b})");
        report.verdict(&id, agreement_verdict(&id, &pr.states(), Some(expected)));
    }

    let premise_rel = fn_relation(tau, sigma, FnRelation::OSmall, cfg)?;
    let om1 = check_conditions(sigma, cfg)?.omega1;
    if premise_rel.is_holds() && om1.is_holds() {
        let ms = assoc_matrix_unchecked(sigma, &cfg.ells, cfg.p_max)?;
        let mt = assoc_matrix_unchecked(tau, &cfg.ells, cfg.p_max)?;
        let v = matrix_relation(&mt, &ms, MatrixRelation::Triangle)
            .with_note("premise: tau triangle sigma (sigma = o(tau)) and omega1 for sigma");
        report.verdict("triangle_implication", v);
    } else {
        report.push(Claim::skipped(
            "triangle_implication",
            format!("premise not established: sigma = o(tau) {}, omega1 {}", premise_rel.state, om1.state),
        ));
    }

    let extra = WeightFunction::log_power(2.0)?;
    for (name, w) in [("sigma", sigma), ("tau", tau), ("log_power(2)", &extra)] {
        let m = assoc_matrix_unchecked(w, &cfg.ells, cfg.p_max)?;
        let crit = constancy_criterion(&m);
        let om6 = check_conditions(w, cfg)?.omega6;
        let window = Window::new("ell", cfg.ells[0], cfg.ells[cfg.ells.len() - 1]);
        let wit = Witness::new(format!("criterion {} vs omega6 {}", crit.state, om6.state), 0.0, 0.0);
        let v = if crit.state == State::Inconclusive || om6.state == State::Inconclusive {
            Verdict::inconclusive(window, 0.0).with_note(wit.label)
        } else if crit.state == om6.state {
            Verdict::holds(wit, window, 0.0)
        } else {
            Verdict::fails(wit, window, 0.0)
        };
        report.verdict(&format!("constancy:{name}"), v);
    }
    Ok(report)
}

fn thilliez_hypothesis(g: &GrowthIndexEstimate, alpha: f64) -> Verdict {
    let window = Window::new("gamma", g.lower, g.upper);
    let wit = Witness::new("thilliez bracket of row ell0 = 1 vs alpha", alpha, g.lower);
    if g.lower > alpha {
        Verdict::holds(wit, window, g.lower - alpha)
    } else if g.upper <= alpha {
        Verdict::fails(wit, window, g.upper - alpha)
    } else {
        Verdict::decided(State::Inconclusive, wit, window, 0.0).with_note("alpha lies inside the bracket")
    }
}

/// Division of `𝓜_ω` by `G^α` and the upper-conjugate description of the result.
///
/// Perturbation: the pointwise identity uses `ω_{G^{α+1/2}}` instead of `ω_{G^α}`.
pub fn suite_division(omega: &WeightFunction, alpha: f64, opts: &SuiteOptions) -> Result<SuiteReport> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(invalid(format!("alpha must be positive, got {alpha}")));
    }
    let cfg = &opts.cfg;
    let l0 = 1.0;
    let cs: Vec<f64> = cfg.ells.iter().copied().filter(|&c| c >= 1.0).collect();
    let mut report = SuiteReport::new(
        "division",
        json!({
            "omega": omega.describe(),
            "alpha": alpha,
            "ell0": l0,
            "c": cs,
            "thilliez_q_max": 4,
            "perturb": opts.perturb,
            "perturbation": format!("identity checked against gevrey(alpha + {PERTURB_ALPHA})"),
            "config": cfg,
        }),
    );
    if cfg.ells.iter().all(|&l| l != l0) {
        return Err(invalid("the ell-grid must contain 1"));
    }
    let m = assoc_matrix_unchecked(omega, &cfg.ells, cfg.p_max)?;
    let th = thilliez_gamma(m.row(l0).expect("grid"), 4);
    let h1 = thilliez_hypothesis(&th, alpha);
    let h2 = fn_relation(&WeightFunction::id_power(1.0 / alpha)?, omega, FnRelation::OSmall, cfg)?;
    let ok = h1.is_holds() && h2.is_holds();
    let failed: Vec<&str> = [("thilliez", &h1), ("o_small", &h2)]
        .iter()
        .filter(|(_, v)| !v.is_holds())
        .map(|(n, _)| *n)
        .collect();
    report.verdict("hypothesis:thilliez", h1);
    report.verdict("hypothesis:o_small", h2);
    if !ok {
        return Ok(report.abort(format!("hypothesis not established: {}", failed.join(", "))));
    }

    let g = gevrey(alpha, cfg.p_max)?;
    let mut raw = Vec::new();
    let mut q = Vec::new();
    let mut wt = Vec::new();
    for &c in &cs {
        let (w, gg) = common(m.row(c * l0).expect("grid"), &g);
        let r = pointwise_quotient(&w, &gg)?;
        let reg = regularize(&r);
        wt.push(pointwise_product(&gg, &reg)?);
        q.push(reg);
        raw.push(r);
    }

    let alpha_id = if opts.perturb { alpha + PERTURB_ALPHA } else { alpha };
    let tau = gevrey_weight(alpha_id, cfg.p_max)?;
    let mut ident = Vec::new();
    for (k, &c) in cs.iter().enumerate().take(2) {
        let wq = WeightFunction::assoc(&q[k])?;
        let ww = WeightFunction::assoc(&wt[k])?;
        let hi = cfg.t_max.min(wq.horizon());
        let grid = GridSpec { t_min: cfg.t_min, t_max: hi, n: cfg.t_points };
        match upper_conj(&ww, &tau, &grid, ConjOptions::default(), cfg) {
            Ok(r) => {
                let pts: Vec<(f64, f64)> = r.trace.iter().filter(|p| !p.horizon_uncertain).map(|p| (p.t, p.value)).collect();
                let (dev, at) = max_deviation(&pts, &wq)?;
                let mut v = tolerance_verdict(&format!("max rel deviation (c = {c})"), dev, at, cfg.tol_rel, cfg.t_min, hi);
                let dropped = r.trace.len() - pts.len();
                if dropped > 0 {
                    v.notes.push(format!("{dropped} trace points with an unresolved sup were left out"));
                }
                ident.push(v);
            }
            Err(Error::WellDefinedness(guard)) => {
                ident.push(Verdict { state: State::Fails, ..*guard }.with_note("upper conjugate not well defined"))
            }
            Err(e) => return Err(e),
        }
    }
    report.verdict("upper_identity", all_of(ident, Window::new("c", cs[0], cs[cs.len().min(2) - 1])));

    let w1 = WeightFunction::assoc(&q[0])?;
    let mut eq = Vec::new();
    for (k, &c) in cs.iter().enumerate().skip(1) {
        if let Some(w) = usable(&q[k], cfg.t_min) {
            let mut v = fn_relation(&w1, &w, FnRelation::Equiv, cfg)?;
            if let Some(x) = v.witness.as_mut() {
                x.label = format!("{} (c = {c} vs {})", x.label, cs[0]);
            }
            eq.push(v);
        }
    }
    report.verdict("equivalence_across_c", all_of(eq, Window::new("c", cs[0], cs[cs.len() - 1])));

    let target = upper_fn(omega, &WeightFunction::id_power(1.0 / alpha)?, ConjOptions::default());
    let equiv = fn_relation(&w1, &target, FnRelation::Equiv, cfg)?;
    let h = omega.power_substitute(1.0 / alpha)?;
    let mut pdev: (f64, f64) = (0.0, 0.0);
    for t in crate::tail::log_grid(cfg.t_min.max(1.0), cfg.t_max.min(1e4), 12) {
        let (Ok(a), Ok(b)) = (target.eval(t), upper_envelope(&h, t.powf(-1.0 / alpha), &ConjOptions::default())) else {
            continue;
        };
        let d = rel_dev(a, b.value);
        if d > pdev.0 {
            pdev = (d, t);
        }
    }
    let power = tolerance_verdict("power identity rel deviation", pdev.0, pdev.1, cfg.tol_rel, cfg.t_min, cfg.t_max.min(1e4));
    report.verdict("power_identity", all_of(vec![equiv, power], Window::new("t", cfg.t_min, cfg.t_max)));

    let brackets: Vec<GrowthIndexEstimate> = m.rows().iter().map(|r| thilliez_gamma(r, 4)).collect();
    let lo = brackets.iter().map(|b| b.lower).fold(f64::NEG_INFINITY, f64::max);
    let hi = brackets.iter().map(|b| b.upper).fold(f64::INFINITY, f64::min);
    let width = brackets.iter().map(|b| b.width()).fold(0.0, f64::max);
    let margin = hi + width - lo;
    let uni = Verdict::decided(
        if margin >= 0.0 { State::Holds } else { State::Fails },
        Witness::new("max lower vs min upper of thilliez brackets", lo, hi),
        Window::new("ell", cfg.ells[0], cfg.ells[cfg.ells.len() - 1]),
        margin,
    );
    report.verdict("thilliez_uniformity", uni);

    let policy = cfg.policy();
    let reg = raw
        .iter()
        .zip(&q)
        .zip(&cs)
        .map(|((r, qq), c)| {
            let mut v = relation(r, qq, SeqRelation::Equiv, &policy);
            if let Some(x) = v.witness.as_mut() {
                x.label = format!("{} (c = {c})", x.label);
            }
            v
        })
        .collect();
    report.verdict("regularized_vs_raw", all_of(reg, Window::new("c", cs[0], cs[cs.len() - 1])));

    let mut rows = serde_json::Map::new();
    for (c, qq) in cs.iter().zip(&q) {
        rows.insert(c.to_string(), json!(qq.log_m()));
    }
    report.artifacts = Some(json!({
        "thilliez": brackets.iter().map(bracket_json).collect::<Vec<Value>>(),
        "logQ": rows,
    }));
    Ok(report)
}
