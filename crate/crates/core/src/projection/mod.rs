//! The Bergman projection `P_ω f(z) = ∫ f(ζ) conj(B^ω_z(ζ)) ω(ζ) dA(ζ)` on
//! harmonic polynomials and on functions sampled over a polar mesh, and the
//! Szegő projection `R` that keeps the non-negative Fourier modes.

mod sample;

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::{KernelEvaluator, KernelOptions};
use crate::par::{self, Execution};
use crate::weights::WeightSpec;

pub use sample::{PolarFunctionSample, PolarMesh, ProjectedSample};

/// `f(re^{iθ}) = Σ f_m r^{|m|} e^{imθ}` with finitely many `f_m`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct HarmonicPolynomial {
    pub coeffs: BTreeMap<i32, Complex64>,
}

impl HarmonicPolynomial {
    pub fn new(coeffs: impl IntoIterator<Item = (i32, Complex64)>) -> Self {
        let mut p = Self::default();
        for (m, c) in coeffs {
            *p.coeffs.entry(m).or_default() += c;
        }
        p
    }

    /// `r^{|m|} e^{imθ}`.
    pub fn monomial(m: i32) -> Self {
        Self::new([(m, Complex64::new(1.0, 0.0))])
    }

    pub fn degree(&self) -> u32 {
        self.coeffs.keys().map(|m| m.unsigned_abs()).max().unwrap_or(0)
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        self.coeffs
            .iter()
            .map(|(&m, &c)| {
                let k = m.unsigned_abs() as i32;
                if m >= 0 {
                    c * z.powi(k)
                } else {
                    c * z.conj().powi(k)
                }
            })
            .sum()
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self::new(self.coeffs.iter().map(|(&m, &c)| (m, s * c)))
    }

    pub fn add(&self, other: &Self) -> Self {
        Self::new(self.coeffs.iter().chain(&other.coeffs).map(|(&m, &c)| (m, c)))
    }
}

/// `R f`: drops the negative modes.
pub fn szego_project(f: &HarmonicPolynomial) -> HarmonicPolynomial {
    HarmonicPolynomial::new(f.coeffs.iter().filter(|(&m, _)| m >= 0).map(|(&m, &c)| (m, c)))
}

pub enum ProjectionInput<'a> {
    Harmonic(&'a HarmonicPolynomial),
    Sample(&'a PolarFunctionSample),
}

/// `P_ω` for one weight; kernel coefficients are shared across calls.
#[derive(Debug)]
pub struct Projector {
    kernel: KernelEvaluator,
    tol: f64,
}

impl Projector {
    pub fn new(omega: &WeightSpec, tol: f64) -> Result<Self> {
        if !(tol > 0.0) {
            return Err(Error::Parameter(format!("tolerance must be > 0, got {tol}")));
        }
        Ok(Self {
            kernel: KernelEvaluator::new(omega, KernelOptions::default())?,
            tol,
        })
    }

    pub fn kernel(&self) -> &KernelEvaluator {
        &self.kernel
    }

    /// `ω̃_{2m+1} / ω_{2m+1}`: the mode-`m` gain, with the numerator from a
    /// fresh radial quadrature and the denominator from the kernel
    /// coefficients. Exactly one for exact arithmetic.
    pub fn mode_gain(&self, m: u32) -> Result<f64> {
        let x = 2.0 * m as f64 + 1.0;
        let (num, _) = self.kernel.spec().quadrature_ln_moment(x, self.tol)?;
        Ok((num + std::f64::consts::LN_2 + self.kernel.ln_c(m as usize)?).exp())
    }

    /// Orthogonality leaves `Σ_{m≥0} f_m z^m ω̃_{2m+1}/ω_{2m+1}`.
    pub fn harmonic(&self, f: &HarmonicPolynomial) -> Result<HarmonicPolynomial> {
        let mut out = HarmonicPolynomial::default();
        for (&m, &c) in f.coeffs.range(0..) {
            out.coeffs.insert(m, c * self.mode_gain(m as u32)?);
        }
        Ok(out)
    }

    pub fn sample(&self, f: &PolarFunctionSample) -> Result<ProjectedSample> {
        f.project(&self.kernel)
    }

    pub fn eval(&self, f: &ProjectionInput<'_>, z: Complex64) -> Result<Complex64> {
        if !(z.norm() < 1.0) {
            return Err(Error::Domain(z.norm()));
        }
        match f {
            ProjectionInput::Harmonic(h) => Ok(self.harmonic(h)?.eval(z)),
            ProjectionInput::Sample(s) => Ok(self.sample(s)?.eval(z)),
        }
    }
}

/// `P_ω f(z)`.
pub fn project(omega: &WeightSpec, f: &ProjectionInput<'_>, z: Complex64, tol: f64) -> Result<Complex64> {
    Projector::new(omega, tol)?.eval(f, z)
}

/// How the harmonic monomials are pushed through `P_ω`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "method")]
pub enum SzegoMethod {
    /// Angular orthogonality with radial quadrature per mode.
    #[default]
    Modes,
    /// Full polar-mesh quadrature of the sampled monomials.
    Sampled { mesh: PolarMesh },
}

#[derive(Debug, Clone, Serialize)]
pub struct SzegoCheck {
    pub omega: String,
    pub method: SzegoMethod,
    pub modes: Vec<i32>,
    pub points: Vec<Complex64>,
    /// `|P_ω f_m(z) - R f_m(z)|`, one row per mode.
    pub deviation: Vec<Vec<f64>>,
    pub max_deviation: f64,
}

/// Default evaluation points: radii up to 0.99 at scattered angles.
pub fn szego_points() -> Vec<Complex64> {
    [0.0, 0.25, 0.5, 0.75, 0.9, 0.95, 0.99]
        .iter()
        .enumerate()
        .map(|(k, &r)| Complex64::from_polar(r, 0.5 + 1.3 * k as f64))
        .collect()
}

/// Compares `P_ω` with `R` on `r^{|m|} e^{imθ}`, `|m| <= max_degree`.
pub fn szego_agreement_check(omega: &WeightSpec, max_degree: u32, tol: f64) -> Result<SzegoCheck> {
    szego_check_with(omega, max_degree, tol, SzegoMethod::Modes, &szego_points(), Execution::default())
}

pub fn szego_check_with(
    omega: &WeightSpec,
    max_degree: u32,
    tol: f64,
    method: SzegoMethod,
    points: &[Complex64],
    exec: Execution,
) -> Result<SzegoCheck> {
    if let Some(z) = points.iter().find(|z| !(z.norm() < 1.0)) {
        return Err(Error::Domain(z.norm()));
    }
    let m = max_degree as i32;
    if let SzegoMethod::Sampled { mesh } = &method {
        if 2 * max_degree as usize > mesh.n_theta {
            return Err(Error::Parameter(format!(
                "degree {max_degree} exceeds half the angular node count {}",
                mesh.n_theta
            )));
        }
    }
    let projector = Projector::new(omega, tol)?;
    let modes: Vec<i32> = (-m..=m).collect();
    let rows = par::map(exec, &modes, |&k| -> Result<Vec<f64>> {
        let f = HarmonicPolynomial::monomial(k);
        let exact = szego_project(&f);
        let projected: Box<dyn Fn(Complex64) -> Complex64> = match &method {
            SzegoMethod::Modes => {
                let p = projector.harmonic(&f)?;
                Box::new(move |z| p.eval(z))
            }
            SzegoMethod::Sampled { mesh } => {
                let p = projector.sample(&PolarFunctionSample::from_fn(mesh, |z| f.eval(z))?)?;
                Box::new(move |z| p.eval(z))
            }
        };
        Ok(points.iter().map(|&z| (projected(z) - exact.eval(z)).norm()).collect())
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let max_deviation = rows.iter().flatten().copied().fold(0.0, f64::max);
    Ok(SzegoCheck {
        omega: omega.label(),
        method,
        modes,
        points: points.to_vec(),
        deviation: rows,
        max_deviation,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn szego_examples() {
        assert!(szego_project(&HarmonicPolynomial::monomial(-3)).coeffs.is_empty());
        let f = HarmonicPolynomial::new([(0, c(2.0, 0.0)), (1, c(1.0, 0.0)), (-1, c(1.0, 0.0))]);
        let rf = szego_project(&f);
        assert_eq!(rf, HarmonicPolynomial::new([(0, c(2.0, 0.0)), (1, c(1.0, 0.0))]));
        assert_eq!(szego_project(&rf), rf);
    }

    #[test]
    fn eval_uses_conjugates_for_negative_modes() {
        let z = c(0.3, 0.4);
        let f = HarmonicPolynomial::new([(2, c(1.0, 0.0)), (-3, c(0.0, 2.0))]);
        let want = z * z + c(0.0, 2.0) * z.conj().powi(3);
        assert!((f.eval(z) - want).norm() < 1e-15);
    }

    #[test]
    fn monomials_and_constants_reproduce() {
        for w in [WeightSpec::standard(0.0), WeightSpec::exponential(1.0, 1.0, 1.0)] {
            let p = Projector::new(&w, 1e-12).unwrap();
            let z = c(0.6, -0.5);
            let one = p.eval(&ProjectionInput::Harmonic(&HarmonicPolynomial::monomial(0)), z).unwrap();
            assert!((one - 1.0).norm() < 1e-10);
            let sq = p.eval(&ProjectionInput::Harmonic(&HarmonicPolynomial::monomial(2)), z).unwrap();
            assert!((sq - z * z).norm() < 1e-10);
            let neg = p.eval(&ProjectionInput::Harmonic(&HarmonicPolynomial::monomial(-3)), z).unwrap();
            assert_eq!(neg, c(0.0, 0.0));
        }
    }

    #[test]
    fn agreement_on_unweighted_disk() {
        let chk = szego_agreement_check(&WeightSpec::standard(0.0), 8, 1e-12).unwrap();
        assert!(chk.max_deviation <= 1e-10, "{}", chk.max_deviation);
        assert_eq!(chk.deviation.len(), 17);
        // m = 0 row
        assert!(chk.deviation[8].iter().all(|d| *d < 1e-14));
    }

    #[test]
    fn sampled_agreement_needs_enough_angles() {
        let mesh = PolarMesh {
            n_theta: 8,
            ..Default::default()
        };
        let err = szego_check_with(
            &WeightSpec::standard(0.0),
            5,
            1e-10,
            SzegoMethod::Sampled { mesh },
            &szego_points(),
            Execution::Sequential,
        );
        assert!(matches!(err, Err(Error::Parameter(_))));
    }
}
