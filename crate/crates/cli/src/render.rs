//! CSV rendering of JSON reports.
//!
//! Every table starts with `#` comment lines naming the command, the grid and the
//! tolerances it was computed with.

use serde_json::Value;

use crate::{CliError, CliResult};

fn cell(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::String(s) => s.clone(),
        Value::Number(n) => n.to_string(),
        Value::Bool(b) => b.to_string(),
        other => other.to_string(),
    }
}

fn config_of(report: &Value) -> &Value {
    match report.get("config") {
        Some(c) => c,
        None => report.pointer("/params/config").unwrap_or(&Value::Null),
    }
}

fn header_lines(report: &Value) -> String {
    let cfg = config_of(report);
    let grid = report.get("grid").unwrap_or(cfg);
    let name = report.get("command").or_else(|| report.get("suite")).map(cell).unwrap_or_default();
    let ells: Vec<String> = cfg["ells"].as_array().map(|a| a.iter().map(cell).collect()).unwrap_or_default();
    format!(
        "# weightlab {name}\n# grid: t_min={} t_max={} t_points={} p_max={} ells={}\n# tolerance: tol_rel={} verdict_margin={}\n",
        cell(&grid["t_min"]),
        cell(&grid["t_max"]),
        cell(&grid["t_points"]),
        cell(&cfg["p_max"]),
        ells.join(";"),
        cell(&cfg["tol_rel"]),
        cell(&cfg["verdict_margin"]),
    )
}

fn table(out: &mut String, columns: &[&str], rows: impl IntoIterator<Item = Vec<String>>) {
    out.push_str(&columns.join(","));
    out.push('\n');
    for r in rows {
        let escaped: Vec<String> = r
            .into_iter()
            .map(|c| if c.contains([',', '"', '\n']) { format!("\"{}\"", c.replace('"', "\"\"")) } else { c })
            .collect();
        out.push_str(&escaped.join(","));
        out.push('\n');
    }
}

fn verdict_rows(items: &[Value]) -> Vec<Vec<String>> {
    items
        .iter()
        .map(|c| {
            vec![
                cell(&c["id"]),
                cell(&c["state"]),
                cell(&c["margin"]),
                cell(&c["witness"]["label"]),
                cell(&c["witness"]["at"]),
                cell(&c["witness"]["value"]),
            ]
        })
        .collect()
}

pub fn to_csv(report: &Value) -> CliResult<String> {
    let mut out = header_lines(report);
    let columns_verdict = ["id", "state", "margin", "witness_label", "witness_at", "witness_value"];
    if let Some(trace) = report["trace"].as_array() {
        table(&mut out, &["t", "value", "s_opt"], trace.iter().map(|p| vec![cell(&p["t"]), cell(&p["value"]), cell(&p["s_opt"])]));
    } else if let Some(points) = report["points"].as_array() {
        table(&mut out, &["t", "value"], points.iter().map(|p| vec![cell(&p["t"]), cell(&p["value"])]));
    } else if let Some(claims) = report["claims"].as_array().or_else(|| report["checks"].as_array()) {
        table(&mut out, &columns_verdict, verdict_rows(claims));
    } else if let Some(b) = report["brackets"].as_object() {
        table(
            &mut out,
            &["index", "lower", "upper", "flagged"],
            b.iter().map(|(k, x)| vec![k.clone(), cell(&x["lower"]), cell(&x["upper"]), cell(&x["flagged"])]),
        );
    } else if let Some(log_m) = report["logM"].as_array() {
        table(&mut out, &["p", "logM"], log_m.iter().enumerate().map(|(p, x)| vec![p.to_string(), cell(x)]));
    } else if let (Some(ells), Some(rows)) = (report["ells"].as_array(), report["rows"].as_object()) {
        let mut lines = Vec::new();
        for ell in ells {
            let key = cell(ell);
            let row = rows.iter().find(|(k, _)| k.parse::<f64>().ok() == ell.as_f64()).map(|(_, r)| r);
            if let Some(Value::Array(r)) = row {
                lines.extend(r.iter().enumerate().map(|(p, x)| vec![key.clone(), p.to_string(), cell(x)]));
            }
        }
        table(&mut out, &["ell", "p", "logM"], lines);
    } else {
        return Err(CliError::Usage("report has no tabular content".into()));
    }
    Ok(out)
}
