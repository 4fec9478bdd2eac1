//! Chebyshev interpolation on an interval.

use std::f64::consts::PI;

#[derive(Debug, Clone)]
pub struct Chebyshev {
    a: f64,
    b: f64,
    coeffs: Vec<f64>,
}

impl Chebyshev {
    /// Interpolate `f` at the `n` Chebyshev points of the first kind on `[a, b]`.
    pub fn fit<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, n: usize) -> Self {
        assert!(n > 0 && b > a);
        let vals: Vec<f64> = (0..n)
            .map(|k| {
                let t = (PI * (k as f64 + 0.5) / n as f64).cos();
                f(0.5 * (a + b) + 0.5 * (b - a) * t)
            })
            .collect();
        Self::from_values(&vals, a, b)
    }

    /// Values at the first-kind nodes, ordered as in [`Chebyshev::fit`].
    pub fn from_values(vals: &[f64], a: f64, b: f64) -> Self {
        let n = vals.len();
        let coeffs = (0..n)
            .map(|j| {
                let s: f64 = vals
                    .iter()
                    .enumerate()
                    .map(|(k, v)| v * (PI * j as f64 * (k as f64 + 0.5) / n as f64).cos())
                    .sum();
                let c = 2.0 * s / n as f64;
                if j == 0 {
                    0.5 * c
                } else {
                    c
                }
            })
            .collect();
        Self { a, b, coeffs }
    }

    pub fn nodes(a: f64, b: f64, n: usize) -> Vec<f64> {
        (0..n)
            .map(|k| 0.5 * (a + b) + 0.5 * (b - a) * (PI * (k as f64 + 0.5) / n as f64).cos())
            .collect()
    }

    pub fn eval(&self, x: f64) -> f64 {
        let t = (2.0 * x - self.a - self.b) / (self.b - self.a);
        let mut b1 = 0.0;
        let mut b2 = 0.0;
        for &c in self.coeffs.iter().skip(1).rev() {
            let b0 = 2.0 * t * b1 - b2 + c;
            b2 = b1;
            b1 = b0;
        }
        t * b1 - b2 + self.coeffs[0]
    }

    /// Magnitude of the trailing coefficients, a cheap truncation error proxy.
    pub fn tail(&self) -> f64 {
        let n = self.coeffs.len();
        self.coeffs[n.saturating_sub(3)..].iter().map(|c| c.abs()).sum()
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.a, self.b)
    }
}
