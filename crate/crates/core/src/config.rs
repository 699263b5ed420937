use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::tail::{log_grid, Policy};

/// Resolved run parameters shared by the library entry points and the CLI.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub p_max: usize,
    pub t_min: f64,
    pub t_max: f64,
    pub t_points: usize,
    pub ells: Vec<f64>,
    pub tol_rel: f64,
    pub verdict_margin: f64,
}

pub const KEYS: [&str; 7] =
    ["p_max", "t_min", "t_max", "t_points", "ells", "tol_rel", "verdict_margin"];

pub fn default_ells() -> Vec<f64> {
    vec![0.125, 0.25, 0.5, 1.0, 2.0, 4.0, 8.0]
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            p_max: 400,
            t_min: 1.0,
            t_max: 1e8,
            t_points: 400,
            ells: default_ells(),
            tol_rel: 1e-6,
            verdict_margin: 1e-3,
        }
    }
}

impl RunConfig {
    pub fn policy(&self) -> Policy {
        Policy { margin: self.verdict_margin, ..Policy::default() }
    }

    pub fn t_grid(&self) -> Vec<f64> {
        log_grid(self.t_min, self.t_max, self.t_points)
    }

    pub fn validate(&self) -> Result<()> {
        if self.p_max < 1 {
            return Err(invalid("p_max must be at least 1"));
        }
        if !(self.t_min > 0.0 && self.t_min < self.t_max && self.t_max.is_finite()) {
            return Err(invalid("need 0 < t_min < t_max < inf"));
        }
        if self.t_points < 2 {
            return Err(invalid("t_points must be at least 2"));
        }
        if self.ells.is_empty() || self.ells.iter().any(|&l| !(l > 0.0 && l.is_finite())) {
            return Err(invalid("ells must be a nonempty list of positive reals"));
        }
        if !(self.tol_rel > 0.0) || !(self.verdict_margin > 0.0) {
            return Err(invalid("tolerances must be positive"));
        }
        Ok(())
    }

    /// Applies one `key = value` assignment.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let v = value.trim();
        let num = |v: &str| -> Result<f64> {
            v.parse::<f64>().map_err(|_| invalid(format!("{key}: not a number: {v}")))
        };
        match key.trim() {
            "p_max" => {
                self.p_max = v.parse().map_err(|_| invalid(format!("p_max: not an integer: {v}")))?
            }
            "t_min" => self.t_min = num(v)?,
            "t_max" => self.t_max = num(v)?,
            "t_points" => {
                self.t_points =
                    v.parse().map_err(|_| invalid(format!("t_points: not an integer: {v}")))?
            }
            "ells" => {
                let mut ells = v
                    .split(',')
                    .map(|s| parse_ratio(s.trim()))
                    .collect::<Result<Vec<f64>>>()?;
                ells.sort_by(f64::total_cmp);
                ells.dedup();
                self.ells = ells;
            }
            "tol_rel" => self.tol_rel = num(v)?,
            "verdict_margin" => self.verdict_margin = num(v)?,
            other => return Err(invalid(format!("unknown config key: {other}"))),
        }
        Ok(())
    }

    /// Merges a `key = value` text file (`#` starts a comment) into `self`.
    pub fn merge_text(&mut self, text: &str) -> Result<()> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| invalid(format!("config line {}: expected key = value", i + 1)))?;
            self.set(k, v)?;
        }
        Ok(())
    }

    pub fn to_text(&self) -> String {
        let ells: Vec<String> = self.ells.iter().map(|l| l.to_string()).collect();
        format!(
            "p_max = {}\nt_min = {}\nt_max = {}\nt_points = {}\nells = {}\ntol_rel = {}\nverdict_margin = {}\n",
            self.p_max,
            self.t_min,
            self.t_max,
            self.t_points,
            ells.join(","),
            self.tol_rel,
            self.verdict_margin
        )
    }
}

/// Parses `0.25` or `1/4`.
pub fn parse_ratio(s: &str) -> Result<f64> {
    let bad = || invalid(format!("not a positive number: {s}"));
    let x = match s.split_once('/') {
        Some((a, b)) => {
            let a: f64 = a.trim().parse().map_err(|_| bad())?;
            let b: f64 = b.trim().parse().map_err(|_| bad())?;
            a / b
        }
        None => s.parse().map_err(|_| bad())?,
    };
    if x > 0.0 && x.is_finite() {
        Ok(x)
    } else {
        Err(bad())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn text_round_trip() {
        let mut c = RunConfig::default();
        c.merge_text("p_max = 50 # small\nells = 1/2, 1, 2\n\nt_max=1e6").unwrap();
        assert_eq!(c.p_max, 50);
        assert_eq!(c.ells, vec![0.5, 1.0, 2.0]);
        let mut d = RunConfig::default();
        d.merge_text(&c.to_text()).unwrap();
        assert_eq!(c, d);
    }

    #[test]
    fn unknown_key_rejected() {
        assert!(RunConfig::default().merge_text("colour = red").is_err());
    }
}
