use std::path::Path;

use serde_json::{json, Value};
use weightlab::conjugate::{lower_conj, upper_conj};
use weightlab::matrixcalc::{
    assoc_matrix, is_constant, matrix_l, matrix_mg, matrix_relation, sharp_mg, Flavor, MatrixRelation,
};
use weightlab::seqcore::{check_lc, check_mg, gevrey, relation, SeqRelation};
use weightlab::tail::log_grid;
use weightlab::theoremlab::{
    obstruction_demo, suite_division, suite_index_transport, suite_lower_product, suite_upper_welldef,
    ClaimState, SuiteOptions,
};
use weightlab::weightfn::{check_conditions, gamma_bar_index, gamma_index, IndexOptions};
use weightlab::{
    ConjOptions, Error, GridSpec, RunConfig, State, Verdict, WeightFunction, WeightMatrix, WeightSequence,
};

use crate::args::{
    Cli, Command, ConjCmd, FnCmd, Format, MatRel, MatrixCmd, ReportCmd, SeqCmd, SeqRel, Suite, VerifyArgs, Which,
};
use crate::expr::{parse_expr, read_sequence, WeightExpr};
use crate::render::to_csv;
use crate::{resolve_config, CliError, CliResult, EXIT_FAILS, EXIT_INCONCLUSIVE, EXIT_OK};

/// Exit code and report text for a parsed invocation.
pub fn execute(cli: &Cli) -> CliResult<(i32, String)> {
    let cfg = resolve_config(cli.config.as_deref(), &cli.flags)?;
    let (code, report) = match &cli.command {
        Command::Seq(c) => seq(c, &cfg)?,
        Command::Fn(c) => function(c, &cfg)?,
        Command::Conj(c) => conj(c, &cfg)?,
        Command::Matrix(c) => matrix(c, &cfg)?,
        Command::Verify(a) => verify(a, &cfg)?,
        Command::Report(ReportCmd::Render { report }) => (EXIT_OK, read_json(report)?),
    };
    let text = match cli.format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(&report).expect("serializable");
            s.push('\n');
            s
        }
        Format::Csv => to_csv(&report)?,
    };
    Ok((code, text))
}

fn read_json(path: &Path) -> CliResult<Value> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn parse(text: &str) -> CliResult<WeightExpr> {
    parse_expr(text).map_err(|error| CliError::Parse { input: text.to_string(), error })
}

fn weight(text: &str, cfg: &RunConfig) -> CliResult<WeightFunction> {
    Ok(parse(text)?.build(cfg.p_max, Path::new("."))?)
}

/// A sequence file, or `gevrey(α)` truncated at `p_max`.
fn sequence(text: &str, cfg: &RunConfig) -> CliResult<WeightSequence> {
    if text.trim_start().starts_with("gevrey") {
        return match parse(text)? {
            WeightExpr::Gevrey(a) => Ok(gevrey(a, cfg.p_max)?),
            other => Err(CliError::Usage(format!("expected gevrey(α) or a sequence file, got {other}"))),
        };
    }
    Ok(read_sequence(Path::new(text))?)
}

/// A matrix JSON file, or the associated matrix of an expression.
fn weight_matrix(text: &str, cfg: &RunConfig) -> CliResult<WeightMatrix> {
    let path = Path::new(text);
    if path.is_file() {
        return Ok(WeightMatrix::from_json(&read_json(path)?)?);
    }
    Ok(assoc_matrix(&weight(text, cfg)?, &cfg.ells, cfg.p_max)?)
}

fn header(command: &str, cfg: &RunConfig) -> Value {
    json!({"command": command, "config": cfg})
}

fn worst<'a>(verdicts: impl IntoIterator<Item = &'a Verdict>) -> i32 {
    code_of(verdicts.into_iter().map(|v| v.state))
}

fn code_of(states: impl IntoIterator<Item = State>) -> i32 {
    let mut code = EXIT_OK;
    for s in states {
        match s {
            State::Fails => return EXIT_FAILS,
            State::Inconclusive => code = EXIT_INCONCLUSIVE,
            State::Holds => {}
        }
    }
    code
}

fn check_entry(id: &str, v: &Verdict) -> Value {
    json!({"id": id, "state": v.state, "margin": v.margin, "witness": v.witness, "notes": v.notes})
}

fn seq(c: &SeqCmd, cfg: &RunConfig) -> CliResult<(i32, Value)> {
    let policy = cfg.policy();
    match c {
        SeqCmd::Gen { alpha } => {
            let s = gevrey(*alpha, cfg.p_max)?;
            let mut v = serde_json::to_value(&s).expect("serializable");
            v["command"] = json!("seq gen");
            v["config"] = json!(cfg);
            Ok((EXIT_OK, v))
        }
        SeqCmd::Check { seq } => {
            let s = sequence(seq, cfg)?;
            let lc = check_lc(&s, &policy);
            let mg = check_mg(&s, &policy);
            let mut v = header("seq check", cfg);
            v["p_max"] = json!(s.p_max());
            v["normalized"] = json!(s.is_normalized());
            v["checks"] = json!([check_entry("lc", &lc), check_entry("mg", &mg)]);
            Ok((worst([&lc, &mg]), v))
        }
        SeqCmd::Rel { left, right, kind } => {
            let kind = match kind {
                SeqRel::Preceq => SeqRelation::Preceq,
                SeqRel::Triangle => SeqRelation::Triangle,
                SeqRel::Equiv => SeqRelation::Equiv,
            };
            let r = relation(&sequence(left, cfg)?, &sequence(right, cfg)?, kind, &policy);
            let mut v = header("seq rel", cfg);
            v["checks"] = json!([check_entry(&format!("{kind:?}").to_lowercase(), &r)]);
            Ok((worst([&r]), v))
        }
    }
}

/// Config t-grid clipped to the validity horizon of `w`.
fn clipped_grid(w: &WeightFunction, cfg: &RunConfig) -> CliResult<Vec<f64>> {
    let hi = cfg.t_max.min(w.horizon());
    if !(hi > cfg.t_min) {
        return Err(Error::Domain { t: cfg.t_min, lo: 0.0, hi: w.horizon() }.into());
    }
    Ok(log_grid(cfg.t_min, hi, cfg.t_points))
}

fn function(c: &FnCmd, cfg: &RunConfig) -> CliResult<(i32, Value)> {
    match c {
        FnCmd::Eval { expr } => {
            let e = parse(expr)?;
            let w = e.build(cfg.p_max, Path::new("."))?;
            let ts = clipped_grid(&w, cfg)?;
            let values = w.eval_many(&ts)?;
            let mut v = header("fn eval", cfg);
            v["expr"] = json!(e.to_string());
            v["kind"] = json!(w.kind());
            v["grid"] = json!({"t_min": ts[0], "t_max": ts[ts.len() - 1], "t_points": ts.len()});
            v["points"] = ts.iter().zip(&values).map(|(t, x)| json!({"t": t, "value": x})).collect();
            Ok((EXIT_OK, v))
        }
        FnCmd::Check { expr } => {
            let e = parse(expr)?;
            let w = e.build(cfg.p_max, Path::new("."))?;
            let r = check_conditions(&w, cfg)?;
            let named = [
                ("omega0", &r.omega0),
                ("omega1", &r.omega1),
                ("omega3", &r.omega3),
                ("omega4", &r.omega4),
                ("omega5", &r.omega5),
                ("omega6", &r.omega6),
                ("strong_nq", &r.strong_nq),
            ];
            let mut v = header("fn check", cfg);
            v["expr"] = json!(e.to_string());
            v["constants"] = json!({"l": r.l, "h": r.h, "c": r.c});
            v["checks"] = named.iter().map(|(id, x)| check_entry(id, x)).collect();
            Ok((worst(named.iter().map(|(_, x)| *x)), v))
        }
        FnCmd::Index { expr, which } => {
            let e = parse(expr)?;
            let w = e.build(cfg.p_max, Path::new("."))?;
            let opts = IndexOptions::default();
            let mut brackets = serde_json::Map::new();
            let mut wide = false;
            if *which != Which::GammaBar {
                let b = gamma_index(&w, cfg, &opts);
                wide |= b.flagged || !b.upper.is_finite();
                brackets.insert("gamma".into(), serde_json::to_value(&b).expect("serializable"));
            }
            if *which != Which::Gamma {
                let b = gamma_bar_index(&w, cfg, &opts);
                wide |= b.flagged || !b.upper.is_finite();
                brackets.insert("gamma_bar".into(), serde_json::to_value(&b).expect("serializable"));
            }
            let mut v = header("fn index", cfg);
            v["expr"] = json!(e.to_string());
            v["brackets"] = Value::Object(brackets);
            Ok((if wide { EXIT_INCONCLUSIVE } else { EXIT_OK }, v))
        }
    }
}

fn conj(c: &ConjCmd, cfg: &RunConfig) -> CliResult<(i32, Value)> {
    let (name, a, upper) = match c {
        ConjCmd::Lower(a) => ("conj lower", a, false),
        ConjCmd::Upper(a) => ("conj upper", a, true),
    };
    let (sigma, tau) = (weight(&a.sigma, cfg)?, weight(&a.tau, cfg)?);
    let grid = GridSpec::from_config(cfg);
    let r = if upper {
        upper_conj(&sigma, &tau, &grid, ConjOptions::default(), cfg)?
    } else {
        lower_conj(&sigma, &tau, &grid, ConjOptions::default())?
    };
    let code = r.guard.as_ref().map_or(EXIT_OK, |g| worst([g]));
    let mut v = header(name, cfg);
    v["sigma"] = json!(parse(&a.sigma)?.to_string());
    v["tau"] = json!(parse(&a.tau)?.to_string());
    if let Value::Object(m) = r.to_json() {
        for (k, x) in m {
            v[k.as_str()] = x;
        }
    }
    Ok((code, v))
}

fn matrix(c: &MatrixCmd, cfg: &RunConfig) -> CliResult<(i32, Value)> {
    match c {
        MatrixCmd::Build { expr } => {
            let m = assoc_matrix(&weight(expr, cfg)?, &cfg.ells, cfg.p_max)?;
            let mut v = m.to_json();
            v["command"] = json!("matrix build");
            v["config"] = json!(cfg);
            v["expr"] = json!(parse(expr)?.to_string());
            Ok((EXIT_OK, v))
        }
        MatrixCmd::Check { matrix } => {
            let m = weight_matrix(matrix, cfg)?;
            let checks = [
                ("order", m.check_order()),
                ("mg_roumieu", matrix_mg(&m, Flavor::Roumieu)),
                ("mg_beurling", matrix_mg(&m, Flavor::Beurling)),
                ("sharp_mg", sharp_mg(&m, m.p_max())),
                ("l_roumieu", matrix_l(&m, Flavor::Roumieu)),
                ("l_beurling", matrix_l(&m, Flavor::Beurling)),
            ];
            let constant = is_constant(&m);
            let mut v = header("matrix check", cfg);
            v["checks"] = checks.iter().map(|(id, x)| check_entry(id, x)).collect();
            v["constant"] = check_entry("constant", &constant);
            Ok((worst(checks.iter().map(|(_, x)| x)), v))
        }
        MatrixCmd::Rel { left, right, kind } => {
            let kind = match kind {
                MatRel::Roumieu => MatrixRelation::RoumieuPreceq,
                MatRel::Beurling => MatrixRelation::BeurlingPreceq,
                MatRel::Triangle => MatrixRelation::Triangle,
                MatRel::Mixed => MatrixRelation::Mixed,
            };
            let r = matrix_relation(&weight_matrix(left, cfg)?, &weight_matrix(right, cfg)?, kind);
            let mut v = header("matrix rel", cfg);
            v["checks"] = json!([check_entry(&format!("{kind:?}").to_lowercase(), &r)]);
            Ok((worst([&r]), v))
        }
    }
}

fn verify(a: &VerifyArgs, cfg: &RunConfig) -> CliResult<(i32, Value)> {
    let opts = SuiteOptions { cfg: cfg.clone(), perturb: a.perturb };
    let pick = |given: &Option<String>, default: &str| weight(given.as_deref().unwrap_or(default), cfg);
    let report = match a.suite {
        Suite::LowerProduct => {
            suite_lower_product(&pick(&a.sigma, "gevrey(1)")?, &pick(&a.tau, "gevrey(1)")?, &opts)?
        }
        Suite::IndexTransport => {
            suite_index_transport(&pick(&a.sigma, "gevrey(3)")?, &pick(&a.tau, "gevrey(1)")?, &opts)?
        }
        Suite::UpperWelldef => {
            suite_upper_welldef(&pick(&a.sigma, "gevrey(2)")?, &pick(&a.tau, "gevrey(1)")?, &opts)?
        }
        Suite::Division => suite_division(&pick(&a.omega, "gevrey(3)")?, a.alpha.unwrap_or(1.0), &opts)?,
        Suite::Obstruction => return obstruction(a, cfg),
    };
    Ok((report.exit_code(), report.to_json()))
}

/// Perturbation: the exponent gap `2 − α` is shrunk by this factor, which pushes the crossing past `n_max`.
pub const OBSTRUCTION_SHRINK: f64 = 1e-3;

fn obstruction(a: &VerifyArgs, cfg: &RunConfig) -> CliResult<(i32, Value)> {
    let alpha = a.alpha.unwrap_or(1.0);
    let used = if a.perturb { 2.0 - (2.0 - alpha) * OBSTRUCTION_SHRINK } else { alpha };
    let tr = obstruction_demo(used, a.mu, a.c, a.n_max)?;
    let claim = |id: &str, ok: bool, margin: f64| {
        let state = if ok { ClaimState::Holds } else { ClaimState::Fails };
        json!({"id": id, "state": state, "witness": null, "margin": margin})
    };
    let (crossing_margin, witness) = match tr.crossing {
        Some(n) => (tr.margin_at(n).unwrap_or(0.0), json!({"label": "n*", "at": n, "value": tr.margin_at(n)})),
        None => (0.0, Value::Null),
    };
    let mut crossing = claim("crossing", tr.crossing.is_some(), crossing_margin);
    crossing["witness"] = witness;
    let claims = vec![crossing, claim("increasing_after_crossing", tr.increasing_after_crossing, 0.0)];
    let fails = claims.iter().filter(|c| c["state"] == "fails").count();
    let v = json!({
        "suite": "obstruction",
        "params": {"alpha": alpha, "alpha_used": used, "perturbed": a.perturb, "mu_abs": a.mu, "c": a.c, "n_max": a.n_max, "config": cfg},
        "claims": claims,
        "summary": {"holds": claims.len() - fails, "fails": fails, "inconclusive": 0, "skipped": 0},
        "artifacts": {"crossing": tr.crossing, "margins": tr.margins},
    });
    Ok((if fails > 0 { EXIT_FAILS } else { EXIT_OK }, v))
}
