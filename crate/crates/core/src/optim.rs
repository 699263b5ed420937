//! One-dimensional search helpers.

const INV_PHI: f64 = 0.618_033_988_749_894_8;

/// Golden-section search for a maximum of `f` on `[a, b]`. Returns `(x, f(x))`.
pub fn golden_max(f: impl Fn(f64) -> f64, a: f64, b: f64, steps: usize) -> (f64, f64) {
    let (x, v) = golden_min(|x| -f(x), a, b, steps);
    (x, -v)
}

/// Golden-section search for a minimum of `f` on `[a, b]`. Returns `(x, f(x))`.
pub fn golden_min(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, steps: usize) -> (f64, f64) {
    if b < a {
        std::mem::swap(&mut a, &mut b);
    }
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    for _ in 0..steps {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    if fc <= fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_parabola_minimum() {
        let (x, v) = golden_min(|x| (x - 0.3) * (x - 0.3) + 1.0, -2.0, 5.0, 80);
        assert!((x - 0.3).abs() < 1e-7);
        assert!((v - 1.0).abs() < 1e-12);
    }

    #[test]
    fn finds_concave_maximum() {
        let (x, _) = golden_max(|x| -(x - 2.0).abs(), 0.0, 10.0, 80);
        assert!((x - 2.0).abs() < 1e-9);
    }
}
