use crate::error::{Error, Result};
use crate::optim::golden_max;

use super::WeightFunction;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PhiStarOptions {
    pub y_points: usize,
    pub golden_steps: usize,
    /// Upper end of the y-window when the weight has no finite horizon.
    pub y_cap: f64,
}

impl Default for PhiStarOptions {
    fn default() -> Self {
        PhiStarOptions { y_points: 257, golden_steps: 80, y_cap: 700.0 }
    }
}

/// `φ*_ω(x) = sup_{y ≥ 0} (x·y − ω(e^y))`.
pub fn phi_star(w: &WeightFunction, x: f64) -> Result<f64> {
    phi_star_with(w, x, &PhiStarOptions::default())
}

pub fn phi_star_with(w: &WeightFunction, x: f64, opts: &PhiStarOptions) -> Result<f64> {
    if !(x >= 0.0) || !x.is_finite() {
        return Err(Error::InvalidArgument(format!("phi_star needs x >= 0, got {x}")));
    }
    let top = if w.horizon().is_finite() { w.horizon().ln().min(opts.y_cap) } else { opts.y_cap };
    if !(top > 0.0) {
        return Err(Error::Horizon("weight horizon leaves no room for y >= 0".into()));
    }
    let n = opts.y_points.max(3);
    let ys: Vec<f64> = (0..n).map(|i| top * i as f64 / (n - 1) as f64).collect();
    let f = |y: f64| -> Result<f64> { Ok(x * y - w.phi(y)?) };
    let vals = ys.iter().map(|&y| f(y)).collect::<Result<Vec<f64>>>()?;
    let b = argmax(&vals);
    if b == n - 1 && vals[n - 1] > vals[n - 2] {
        return Err(Error::Horizon(format!(
            "phi_star({x}) still increasing at y = {top}; the sup lies beyond the window"
        )));
    }
    let lo = ys[b.saturating_sub(1)];
    let hi = ys[(b + 1).min(n - 1)];
    let g = |y: f64| f(y).unwrap_or(f64::NEG_INFINITY);
    let (_, refined) = golden_max(g, lo, hi, opts.golden_steps);
    Ok(refined.max(vals[b]))
}

fn argmax(v: &[f64]) -> usize {
    let mut b = 0;
    for (i, &x) in v.iter().enumerate() {
        if x > v[b] {
            b = i;
        }
    }
    b
}
