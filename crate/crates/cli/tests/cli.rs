use std::process::Command;

use serde_json::Value;
use weightlab_cli::expr::{parse_expr, ParseErrorKind, WeightExpr};
use weightlab_cli::run;

fn weightlab(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_weightlab")).args(args).output().expect("binary runs");
    (
        out.status.code().expect("exit code"),
        String::from_utf8(out.stdout).unwrap(),
        String::from_utf8(out.stderr).unwrap(),
    )
}

fn json(text: &str) -> Value {
    serde_json::from_str(text).unwrap_or_else(|e| panic!("{e}: {text}"))
}

#[test]
fn verify_lower_product_holds() {
    let (code, out, _) = weightlab(&["verify", "lower-product", "--sigma", "gevrey(1)", "--tau", "gevrey(1)"]);
    assert_eq!(code, 0);
    let v = json(&out);
    assert_eq!(v["suite"], "lower-product");
    assert!(v["claims"].as_array().unwrap().iter().all(|c| c["state"] == "holds"));
    assert_eq!(v["params"]["config"]["p_max"], 400);
}

#[test]
fn every_suite_flips_under_perturbation() {
    for suite in ["lower-product", "index-transport", "upper-welldef", "division", "obstruction"] {
        assert_eq!(weightlab(&["verify", suite]).0, 0, "{suite}");
        let (code, out, _) = weightlab(&["verify", suite, "--perturb"]);
        assert_eq!(code, 1, "{suite}");
        assert!(json(&out)["summary"]["fails"].as_u64().unwrap() > 0);
    }
}

#[test]
fn gamma_index_of_square_root_contains_two() {
    let (code, out, _) = weightlab(&["fn", "index", "--expr", "idpow(0.5)", "--which", "gamma"]);
    assert_eq!(code, 0);
    let b = &json(&out)["brackets"]["gamma"];
    let (lo, hi) = (b["lower"].as_f64().unwrap(), b["upper"].as_f64().unwrap());
    assert!(lo <= 2.0 && 2.0 <= hi, "[{lo}, {hi}]");
    assert!(json(&out)["brackets"].get("gamma_bar").is_none());
}

#[test]
fn upper_conjugate_of_equal_gevrey_weights_is_refused() {
    let (code, out, err) = weightlab(&["conj", "upper", "--sigma", "gevrey(1)", "--tau", "gevrey(1)"]);
    assert_eq!(code, 65);
    assert!(out.is_empty());
    let d = json(err.trim());
    assert_eq!(d["error"], "well_definedness");
    assert_eq!(d["guard"]["state"], "fails");
}

#[test]
fn upper_conjugate_trace_as_csv() {
    let (code, out, _) =
        weightlab(&["conj", "upper", "--sigma", "gevrey(3)", "--tau", "gevrey(1)", "--t-points", "12", "--t-max", "1e5", "--format", "csv"]);
    assert_eq!(code, 0);
    let lines: Vec<&str> = out.lines().collect();
    assert!(lines[0].starts_with("# weightlab conj upper"));
    assert!(lines[1].starts_with("# grid: t_min=1.0 t_max=100000.0 t_points=12"));
    assert!(lines[2].starts_with("# tolerance: tol_rel="));
    assert_eq!(lines[3], "t,value,s_opt");
    assert_eq!(lines.len(), 4 + 12);
    assert!(lines[4..].iter().all(|l| l.split(',').count() == 3));
}

#[test]
fn fn_eval_csv_and_horizon_clipping() {
    let (code, out, _) = weightlab(&["fn", "eval", "--expr", "idpow(0.5)", "--t-points", "5", "--format", "csv"]);
    assert_eq!(code, 0);
    let rows: Vec<&str> = out.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(rows[0], "t,value");
    assert_eq!(rows[1], "1.0,1.0");
    assert_eq!(rows.len(), 6);

    let v = json(&weightlab(&["fn", "eval", "--expr", "gevrey(1)", "--p-max", "20"]).1);
    let top = v["grid"]["t_max"].as_f64().unwrap();
    assert!(top < 1e8 && top > 100.0, "{top}");
}

#[test]
fn parse_errors_are_usage_errors_with_offsets() {
    let (code, _, err) = weightlab(&["fn", "eval", "--expr", "gevrey(-1)"]);
    assert_eq!(code, 64);
    let d = json(err.trim());
    assert_eq!(d["offset"], 7);
    assert_eq!(d["kind"], "NonPositive");
    assert_eq!(weightlab(&["fn", "eval", "--expr", "sqrt(2)"]).0, 64);
    assert_eq!(weightlab(&["frobnicate"]).0, 64);
    assert_eq!(weightlab(&["seq", "gen", "--alpha", "1", "--p-max", "0"]).0, 64);
    assert_eq!(weightlab(&["--help"]).0, 0);
    assert_eq!(weightlab(&["--version"]).0, 0);
}

#[test]
fn documented_parse_examples() {
    use WeightExpr::*;
    assert_eq!(
        parse_expr("lower(gevrey(1), gevrey(0.5))").unwrap(),
        Lower(Box::new(Gevrey(1.0)), Box::new(Gevrey(0.5)))
    );
    assert_eq!(
        parse_expr("upper(idpow(0.5), idpow(1))").unwrap(),
        Upper(Box::new(IdPow(0.5)), Box::new(IdPow(1.0)))
    );
    let e = parse_expr("gevrey(-1)").unwrap_err();
    assert_eq!((e.kind, e.offset), (ParseErrorKind::NonPositive, 7));
    assert_eq!(parse_expr("gevrey(1").unwrap_err().offset, 8);
    assert_eq!(parse_expr("inv(idpow(1), idpow(2))").unwrap_err().offset, 12);
    assert_eq!(parse_expr("gevrey(1) x").unwrap_err().offset, 10);
}

#[test]
fn print_then_parse_is_the_identity() {
    for text in [
        "gevrey(1)",
        " lower ( gevrey(1.5) ,idpow( 0.25 ) ) ",
        "upper(pow(gevrey(3), 2), inv(idpow(0.5)))",
        "pow(assoc(data/m.json), 1e-3)",
        "inv(lower(idpow(0.333), upper(gevrey(2), gevrey(1))))",
    ] {
        let e = parse_expr(text).unwrap();
        let printed = e.to_string();
        assert_eq!(parse_expr(&printed).unwrap(), e, "{printed}");
        assert_eq!(parse_expr(&printed).unwrap().to_string(), printed);
    }
}

#[test]
fn config_file_is_merged_and_flags_win() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "# local run\np_max = 30\nells = 1/2, 1, 2\nt_points = 7\n").unwrap();
    let cfg = cfg.to_str().unwrap();

    let v = json(&weightlab(&["--config", cfg, "seq", "gen", "--alpha", "1"]).1);
    assert_eq!(v["p_max"], 30);
    assert_eq!(v["config"]["ells"], serde_json::json!([0.5, 1.0, 2.0]));

    let v = json(&weightlab(&["seq", "gen", "--alpha", "1", "--config", cfg, "--p-max", "12"]).1);
    assert_eq!(v["p_max"], 12);
    assert_eq!(v["config"]["p_max"], 12);
    assert_eq!(v["config"]["t_points"], 7);

    std::fs::write(dir.path().join("bad.cfg"), "colour = red\n").unwrap();
    assert_eq!(weightlab(&["--config", dir.path().join("bad.cfg").to_str().unwrap(), "seq", "gen", "--alpha", "1"]).0, 64);
}

#[test]
fn sequence_and_matrix_files_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let seq = dir.path().join("g.json");
    let seq_s = seq.to_str().unwrap();
    assert_eq!(weightlab(&["seq", "gen", "--alpha", "2", "--p-max", "120", "--output", seq_s]).0, 0);
    assert_eq!(weightlab(&["seq", "check", seq_s]).0, 0);
    assert_eq!(weightlab(&["seq", "rel", seq_s, "gevrey(2)", "--kind", "equiv", "--p-max", "120"]).0, 0);
    assert_eq!(weightlab(&["seq", "rel", "gevrey(2)", "gevrey(1)", "--kind", "preceq"]).0, 1);

    let expr = format!("assoc({seq_s})");
    let (code, out, _) = weightlab(&["fn", "eval", "--expr", &expr, "--t-points", "4", "--format", "csv"]);
    assert_eq!(code, 0);
    assert_eq!(out.lines().filter(|l| !l.starts_with('#')).count(), 5);

    let mat = dir.path().join("m.json");
    let mat_s = mat.to_str().unwrap();
    assert_eq!(weightlab(&["matrix", "build", "--expr", "gevrey(1)", "--p-max", "80", "--output", mat_s]).0, 0);
    let (code, out, _) = weightlab(&["matrix", "check", mat_s, "--format", "csv"]);
    assert_eq!(code, 0, "{out}");
    assert!(out.contains("\nsharp_mg,holds,"));
    assert_eq!(weightlab(&["matrix", "rel", mat_s, "gevrey(2)", "--kind", "triangle", "--p-max", "80"]).0, 0);
    assert_eq!(weightlab(&["matrix", "rel", mat_s, mat_s, "--kind", "triangle"]).0, 1);
    let (_, out, _) = weightlab(&["report", "render", mat_s, "--format", "csv"]);
    assert!(out.lines().any(|l| l == "ell,p,logM"));
}

#[test]
fn suite_report_renders_as_csv() {
    let dir = tempfile::tempdir().unwrap();
    let rep = dir.path().join("r.json");
    assert_eq!(weightlab(&["verify", "division", "--output", rep.to_str().unwrap()]).0, 0);
    let (code, out, _) = weightlab(&["report", "render", rep.to_str().unwrap(), "--format", "csv"]);
    assert_eq!(code, 0);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines[0], "# weightlab division");
    assert!(lines[1].starts_with("# grid:") && lines[2].starts_with("# tolerance:"));
    assert_eq!(lines[3], "id,state,margin,witness_label,witness_at,witness_value");
    assert!(lines[4..].iter().any(|l| l.starts_with("upper_identity,holds,")));
}

#[test]
fn reports_are_byte_identical() {
    for args in [
        &["verify", "upper-welldef"][..],
        &["conj", "lower", "--sigma", "gevrey(1)", "--tau", "idpow(0.5)", "--t-points", "30"][..],
        &["fn", "check", "--expr", "pow(gevrey(2), 0.5)"][..],
    ] {
        let a = weightlab(args);
        let b = weightlab(args);
        assert_eq!(a, b, "{args:?}");
        let argv: Vec<&str> = std::iter::once("weightlab").chain(args.iter().copied()).collect();
        let c = run(argv);
        assert_eq!((c.code, c.stdout), (a.0, a.1));
    }
}
