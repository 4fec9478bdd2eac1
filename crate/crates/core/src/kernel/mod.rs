//! The reproducing kernel `B^ω_z(ζ) = Σ_n (z̄ζ)^n / (2 ω_{2n+1})` of the
//! weighted Bergman space, its `z`-derivative, and integral means over circles.

mod means;

use std::sync::OnceLock;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::weights::{MomentTable, WeightSpec};

pub use means::{MeanKind, MeanTable};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelOptions {
    /// Multiplier on the geometric remainder estimate.
    pub safety: f64,
    pub max_terms: usize,
    /// Largest admissible `|z̄ζ|` for pointwise evaluation.
    pub r_max: f64,
    /// Consecutive terms with ratio below `q_max` before stopping.
    pub run: usize,
    /// Ratio cap; `None` uses `(1 + |t|)/2`.
    pub q_max: Option<f64>,
}

impl Default for KernelOptions {
    fn default() -> Self {
        Self {
            safety: 10.0,
            max_terms: 2_000_000,
            r_max: 0.9999,
            run: 10,
            q_max: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KernelValue {
    pub value: Complex64,
    /// Bound on the truncated remainder.
    pub error: f64,
    pub terms: usize,
}

const CHUNK: usize = 1024;
// Moments are tabulated up to this exponent; beyond it they are integrated directly.
const TABLE_X_MAX: f64 = 1e15;

/// Kernel evaluation for one weight. Coefficients `ln c_n = -ln(2 ω_{2n+1})`
/// are cached in chunks on first use; the evaluator is `Sync`.
#[derive(Debug)]
pub struct KernelEvaluator {
    spec: WeightSpec,
    table: MomentTable,
    opts: KernelOptions,
    chunks: Vec<OnceLock<Result<Vec<f64>>>>,
}

impl KernelEvaluator {
    pub fn new(spec: &WeightSpec, opts: KernelOptions) -> Result<Self> {
        spec.validate()?;
        let n_chunks = opts.max_terms.div_ceil(CHUNK) + 1;
        Ok(Self {
            spec: spec.clone(),
            table: MomentTable::new(spec.clone(), TABLE_X_MAX),
            opts,
            chunks: (0..n_chunks).map(|_| OnceLock::new()).collect(),
        })
    }

    pub fn spec(&self) -> &WeightSpec {
        &self.spec
    }

    pub fn options(&self) -> &KernelOptions {
        &self.opts
    }

    pub fn moment_table(&self) -> &MomentTable {
        &self.table
    }

    /// `ln c_n` for real `n >= 0`, uncached.
    pub fn ln_coeff(&self, n: f64) -> Result<f64> {
        Ok(-std::f64::consts::LN_2 - self.table.ln_moment(2.0 * n + 1.0)?)
    }

    /// `ln c_n`, cached.
    pub fn ln_c(&self, n: usize) -> Result<f64> {
        let k = n / CHUNK;
        if k >= self.chunks.len() {
            return self.ln_coeff(n as f64);
        }
        let chunk = self.chunks[k]
            .get_or_init(|| {
                (k * CHUNK..(k + 1) * CHUNK)
                    .map(|i| self.ln_coeff(i as f64))
                    .collect::<Result<Vec<_>>>()
            })
            .as_ref()
            .map_err(Clone::clone)?;
        Ok(chunk[n % CHUNK])
    }

    /// `B^ω_z(ζ)`.
    pub fn eval(&self, z: Complex64, zeta: Complex64, tol: f64) -> Result<KernelValue> {
        let t = z.conj() * zeta;
        self.series(t, 0, tol)
    }

    /// `∂_z B^ω_ζ(z) = Σ_{n≥1} n c_n ζ̄^n z^{n-1}`.
    pub fn deriv(&self, z: Complex64, zeta: Complex64, tol: f64) -> Result<KernelValue> {
        let w = z * zeta.conj();
        let s = self.series(w, 1, tol)?;
        Ok(KernelValue {
            value: s.value * zeta.conj(),
            error: s.error * zeta.norm(),
            terms: s.terms,
        })
    }

    // Σ_m (m+shift)!/m! ... concretely: shift 0 gives Σ c_m t^m,
    // shift 1 gives Σ (m+1) c_{m+1} t^m.
    fn series(&self, t: Complex64, shift: usize, tol: f64) -> Result<KernelValue> {
        let modulus = t.norm();
        if modulus > self.opts.r_max {
            return Err(Error::Parameter(format!(
                "|z̄ζ| = {modulus} exceeds the pointwise cap {}",
                self.opts.r_max
            )));
        }
        let tol = tol.max(1e-15);
        let coeff = |m: usize| -> Result<f64> {
            let n = m + shift;
            let lc = self.ln_c(n)?;
            Ok(if shift == 1 { lc + (n as f64).ln() } else { lc })
        };
        if modulus == 0.0 {
            return Ok(KernelValue {
                value: Complex64::new(coeff(0)?.exp(), 0.0),
                error: 0.0,
                terms: 1,
            });
        }
        let q_max = self.opts.q_max.unwrap_or(0.5 * (1.0 + modulus));
        let ln_t = modulus.ln();
        let theta = t.arg();
        let mut sum = Complex64::new(0.0, 0.0);
        let mut comp = Complex64::new(0.0, 0.0);
        let mut prev_ln = f64::NAN;
        let mut run = 0usize;
        for m in 0..self.opts.max_terms {
            let ln_term = coeff(m)? + m as f64 * ln_t;
            let (s, c) = (m as f64 * theta).sin_cos();
            let term = Complex64::new(c, s) * ln_term.exp();
            // Kahan-compensated accumulation
            let y = term - comp;
            let next = sum + y;
            comp = (next - sum) - y;
            sum = next;
            if m > 0 {
                let q = (ln_term - prev_ln).exp();
                if q < q_max {
                    run += 1;
                } else {
                    run = 0;
                }
            }
            prev_ln = ln_term;
            if run >= self.opts.run {
                let bound = self.opts.safety * ln_term.exp() * q_max / (1.0 - q_max);
                if bound <= tol * sum.norm() {
                    return Ok(KernelValue {
                        value: sum,
                        error: bound,
                        terms: m + 1,
                    });
                }
            }
        }
        Err(Error::NonConvergence {
            terms: self.opts.max_terms,
            modulus,
        })
    }

    /// `M_1(B^ω_a, s)`, the mean of `|B^ω_a|` over the circle of radius `s`.
    pub fn integral_mean_m1(&self, a: Complex64, s: f64, tol: f64) -> Result<f64> {
        if !(0.0..1.0).contains(&s) {
            return Err(Error::Domain(s));
        }
        Ok(self.ln_circle_mean(a.norm() * s, MeanKind::Kernel, tol)?.exp())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn std0() -> KernelEvaluator {
        KernelEvaluator::new(&WeightSpec::standard(0.0), KernelOptions::default()).unwrap()
    }

    #[test]
    fn closed_form_oracles() {
        let k = std0();
        let h = Complex64::new(0.5, 0.0);
        let v = k.eval(h, h, 1e-12).unwrap();
        assert!((v.value.re - 16.0 / 9.0).abs() < 1e-11);
        let d = k.deriv(h, h, 1e-12).unwrap();
        assert!((d.value.re - 1.0 / 0.75f64.powi(3)).abs() < 1e-10);
    }

    #[test]
    fn origin_values() {
        let s = WeightSpec::exponential(1.0, 1.0, 1.0);
        let k = KernelEvaluator::new(&s, KernelOptions::default()).unwrap();
        let zeta = Complex64::new(0.3, -0.4);
        let v = k.eval(Complex64::new(0.0, 0.0), zeta, 1e-12).unwrap();
        assert!((v.value.re - 0.5 / s.moment(1.0).unwrap()).abs() < 1e-12 * v.value.re);
        let d = k.deriv(Complex64::new(0.0, 0.0), zeta, 1e-12).unwrap();
        let expect = zeta.conj() * (0.5 / s.moment(3.0).unwrap());
        assert!((d.value - expect).norm() < 1e-10 * expect.norm());
    }

    #[test]
    fn standard_one_against_brute_force() {
        let k = KernelEvaluator::new(&WeightSpec::standard(1.0), KernelOptions::default()).unwrap();
        let (z, zeta) = (Complex64::new(0.6, 0.0), Complex64::new(0.7, 0.0));
        let v = k.eval(z, zeta, 1e-13).unwrap();
        // c_n = (n+1)(2n+3) for ω = 1-r
        let t: f64 = 0.42;
        let mut s = 0.0;
        let mut p = 1.0;
        for n in 0..1_000_000u64 {
            let c = ((n + 1) * (2 * n + 3)) as f64;
            s += c * p;
            p *= t;
            if p == 0.0 {
                break;
            }
        }
        assert!((v.value.re - s).abs() < 1e-10 * s);
    }

    #[test]
    fn finite_difference_matches_derivative() {
        let k = std0();
        let z = Complex64::new(0.3, 0.2);
        let zeta = Complex64::new(-0.1, 0.6);
        let h = 1e-5;
        // B_ζ(z) = kernel with roles swapped: B^ω_ζ(z) = Σ (ζ̄ z)^n c_n
        let f = |x: Complex64| k.eval(zeta, x, 1e-14).unwrap().value;
        let fd = (f(z + h) - f(z - h)) / (2.0 * h);
        let d = k.deriv(z, zeta, 1e-14).unwrap().value;
        assert!((fd - d).norm() < 1e-8 * d.norm());
    }

    #[test]
    fn nonconvergence_is_reported() {
        let opts = KernelOptions {
            max_terms: 50,
            ..Default::default()
        };
        let k = KernelEvaluator::new(&WeightSpec::standard(0.0), opts).unwrap();
        let z = Complex64::new(0.99, 0.0);
        assert!(matches!(k.eval(z, z, 1e-12), Err(Error::NonConvergence { .. })));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn conjugate_symmetry_and_rotation(r1 in 0.0f64..0.95, r2 in 0.0f64..0.95, a1 in 0.0f64..6.3, a2 in 0.0f64..6.3, phi in 0.0f64..6.3) {
            let k = std0();
            let z = Complex64::from_polar(r1, a1);
            let zeta = Complex64::from_polar(r2, a2);
            let b = k.eval(z, zeta, 1e-13).unwrap().value;
            let b_swapped = k.eval(zeta, z, 1e-13).unwrap().value;
            prop_assert!((b - b_swapped.conj()).norm() <= 1e-12 * b.norm());
            let rot = Complex64::from_polar(1.0, phi);
            let b_rot = k.eval(rot * z, rot * zeta, 1e-13).unwrap().value;
            prop_assert!((b - b_rot).norm() <= 1e-11 * b.norm());
            // z·∂_z B_ζ(z) equals the conjugate of ζ·∂_ζ B_z(ζ)
            let lhs = z * k.deriv(z, zeta, 1e-13).unwrap().value;
            let rhs = (zeta * k.deriv(zeta, z, 1e-13).unwrap().value).conj();
            prop_assert!((lhs - rhs).norm() <= 1e-10 * (1.0 + lhs.norm()));
        }
    }
}
