use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::KernelEvaluator;
use crate::numeric::legendre::gauss_legendre_on;
use crate::weights::Radius;

/// Polar quadrature mesh: Gauss-Legendre panels in `u = -ln(1-r)` on
/// `[u_min, u_max]`, `n_theta` equispaced angles per ring.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PolarMesh {
    pub u_min: f64,
    pub u_max: f64,
    pub panel_width: f64,
    pub order: usize,
    /// Power of two.
    pub n_theta: usize,
}

impl Default for PolarMesh {
    fn default() -> Self {
        Self {
            u_min: 0.0,
            u_max: 36.0,
            panel_width: 0.5,
            order: 20,
            n_theta: 64,
        }
    }
}

impl PolarMesh {
    pub fn validate(&self) -> Result<()> {
        if !self.n_theta.is_power_of_two() || self.n_theta < 2 {
            return Err(Error::Parameter(format!(
                "angular node count must be a power of two >= 2, got {}",
                self.n_theta
            )));
        }
        if !(self.u_min >= 0.0 && self.u_max > self.u_min && self.panel_width > 0.0 && self.order > 0) {
            return Err(Error::Parameter(format!("invalid polar mesh {self:?}")));
        }
        Ok(())
    }

    /// `(r, radial weight)` with `Σ w g(r) ≈ ∫ 2r g(r) dr`.
    fn radial_nodes(&self) -> Vec<(Radius, f64)> {
        let panels = ((self.u_max - self.u_min) / self.panel_width).ceil() as usize;
        let h = (self.u_max - self.u_min) / panels as f64;
        (0..panels)
            .flat_map(|k| {
                let a = self.u_min + k as f64 * h;
                let (x, w) = gauss_legendre_on(self.order, a, a + h);
                x.into_iter().zip(w).map(|(u, w)| {
                    let p = Radius::from_u(u);
                    (p, 2.0 * p.r * p.delta * w)
                })
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Ring {
    /// `-ln(1-r)`.
    pub u: f64,
    /// `∫ 2r dr` share of the ring.
    pub radial_weight: f64,
    /// Values at `θ_j = 2πj/N`.
    pub values: Vec<Complex64>,
}

/// A function sampled on a [`PolarMesh`]. Area weights are normalized so the
/// disk has measure one.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PolarFunctionSample {
    pub mesh: PolarMesh,
    pub rings: Vec<Ring>,
}

impl PolarFunctionSample {
    pub fn from_fn(mesh: &PolarMesh, f: impl Fn(Complex64) -> Complex64) -> Result<Self> {
        mesh.validate()?;
        let n = mesh.n_theta;
        let rings = mesh
            .radial_nodes()
            .into_iter()
            .map(|(p, w)| Ring {
                u: p.u(),
                radial_weight: w,
                values: (0..n)
                    .map(|j| f(Complex64::from_polar(p.r, std::f64::consts::TAU * j as f64 / n as f64)))
                    .collect(),
            })
            .collect();
        Ok(Self { mesh: *mesh, rings })
    }

    /// Node weights `(radial weight)/N`, row by row.
    pub fn node_weights(&self) -> impl Iterator<Item = f64> + '_ {
        self.rings
            .iter()
            .flat_map(|g| std::iter::repeat_n(g.radial_weight / g.values.len() as f64, g.values.len()))
    }

    /// `Σ w f`, the normalized area integral.
    pub fn integral(&self) -> Complex64 {
        self.rings
            .iter()
            .map(|g| g.values.iter().sum::<Complex64>() * (g.radial_weight / g.values.len() as f64))
            .sum()
    }

    /// Rings hold `F_n(r) = N^{-1} Σ_j f_j e^{-inθ_j}`; `P_ω f(z)` then is
    /// `Σ_{n < N/2} c_n z^n Σ_rings w r^n ω(r) F_n(r)`.
    pub(super) fn project(&self, kernel: &KernelEvaluator) -> Result<ProjectedSample> {
        let n = self.mesh.n_theta;
        let modes = n / 2;
        let fft = FftPlanner::new().plan_fft_forward(n);
        let ln_c = (0..modes).map(|k| kernel.ln_c(k)).collect::<Result<Vec<_>>>()?;
        let mut acc = vec![Complex64::new(0.0, 0.0); modes];
        let mut buf = Vec::with_capacity(n);
        for g in &self.rings {
            if g.values.len() != n {
                return Err(Error::Parameter("ring sizes differ from the mesh".into()));
            }
            buf.clear();
            buf.extend_from_slice(&g.values);
            fft.process(&mut buf);
            let p = Radius::from_u(g.u);
            let ln_base = kernel.spec().ln_density(p) + (g.radial_weight / n as f64).ln();
            let ln_r = (-p.delta).ln_1p();
            for (k, a) in acc.iter_mut().enumerate() {
                let s = ln_c[k] + ln_base + k as f64 * ln_r;
                if s > f64::NEG_INFINITY {
                    *a += buf[k] * s.exp();
                }
            }
        }
        Ok(ProjectedSample { coeffs: acc })
    }
}

/// `P_ω f` as the analytic polynomial `Σ a_n z^n`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProjectedSample {
    pub coeffs: Vec<Complex64>,
}

impl ProjectedSample {
    pub fn eval(&self, z: Complex64) -> Complex64 {
        self.coeffs.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, &a| acc * z + a)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::projection::Projector;
    use crate::weights::WeightSpec;
    use proptest::prelude::*;

    #[test]
    fn weights_cover_the_disk() {
        let s = PolarFunctionSample::from_fn(&PolarMesh::default(), |_| Complex64::new(1.0, 0.0)).unwrap();
        let total: f64 = s.node_weights().sum();
        assert!((total - 1.0).abs() < 1e-10, "{total}");
        let annulus = PolarMesh {
            u_min: 0.5,
            u_max: 2.0,
            ..Default::default()
        };
        let s = PolarFunctionSample::from_fn(&annulus, |_| Complex64::new(1.0, 0.0)).unwrap();
        let (a, b) = (Radius::from_u(0.5).r, Radius::from_u(2.0).r);
        assert!((s.integral().re - (b * b - a * a)).abs() < 1e-10);
    }

    #[test]
    fn rejects_non_power_of_two() {
        let m = PolarMesh {
            n_theta: 48,
            ..Default::default()
        };
        assert!(PolarFunctionSample::from_fn(&m, |z| z).is_err());
    }

    #[test]
    fn radial_factors_match_moment_ratios() {
        // ω ≡ 1: P(|ζ|²) = ω_3/ω_1 = 1/2, P(|ζ|²ζ) = z ω_5/ω_3 = 2z/3
        let p = Projector::new(&WeightSpec::standard(0.0), 1e-12).unwrap();
        let mesh = PolarMesh::default();
        let z = Complex64::new(0.2, 0.7);
        let f = PolarFunctionSample::from_fn(&mesh, |w| Complex64::new(w.norm_sqr(), 0.0)).unwrap();
        assert!((p.sample(&f).unwrap().eval(z) - 0.5).norm() < 1e-10);
        let g = PolarFunctionSample::from_fn(&mesh, |w| w * w.norm_sqr()).unwrap();
        assert!((p.sample(&g).unwrap().eval(z) - z * (2.0 / 3.0)).norm() < 1e-10);
    }

    #[test]
    fn analytic_polynomials_reproduce() {
        for w in [WeightSpec::standard(1.0), WeightSpec::exponential(1.0, 1.0, 1.0)] {
            let p = Projector::new(&w, 1e-12).unwrap();
            for n in 0..6 {
                let f = PolarFunctionSample::from_fn(&PolarMesh::default(), |z| z.powi(n)).unwrap();
                let pf = p.sample(&f).unwrap();
                let z0 = Complex64::new(-0.45, 0.55);
                assert!((pf.eval(z0) - z0.powi(n)).norm() < 1e-9, "{} n={n}", w.label());
            }
        }
    }

    fn coarse() -> PolarMesh {
        PolarMesh {
            u_max: 12.0,
            n_theta: 32,
            ..Default::default()
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn projection_is_linear(a in -2.0..2.0f64, b in -2.0..2.0f64, x in -0.6..0.6f64, y in -0.6..0.6f64) {
            let p = Projector::new(&WeightSpec::standard(0.5), 1e-10).unwrap();
            let f = |z: Complex64| z.conj() * z + z.powi(3);
            let g = |z: Complex64| (z * 2.0).exp() * z.conj();
            let z = Complex64::new(x, y);
            let sf = p.sample(&PolarFunctionSample::from_fn(&coarse(), f).unwrap()).unwrap().eval(z);
            let sg = p.sample(&PolarFunctionSample::from_fn(&coarse(), g).unwrap()).unwrap().eval(z);
            let h = PolarFunctionSample::from_fn(&coarse(), |z| f(z) * a + g(z) * b).unwrap();
            let sh = p.sample(&h).unwrap().eval(z);
            prop_assert!((sh - (sf * a + sg * b)).norm() < 1e-10 * (1.0 + sh.norm()));
        }

        #[test]
        fn projection_commutes_with_rotation(phi in 0.0..std::f64::consts::TAU, x in -0.6..0.6f64, y in -0.6..0.6f64) {
            let p = Projector::new(&WeightSpec::standard(1.0), 1e-10).unwrap();
            let rot = Complex64::from_polar(1.0, phi);
            let f = |z: Complex64| z.powi(2) + z.conj() * 0.5 + z.norm_sqr() * z;
            let z = Complex64::new(x, y);
            let pf = p.sample(&PolarFunctionSample::from_fn(&coarse(), f).unwrap()).unwrap();
            let pr = p.sample(&PolarFunctionSample::from_fn(&coarse(), |w| f(w / rot)).unwrap()).unwrap();
            prop_assert!((pr.eval(z) - pf.eval(z / rot)).norm() < 1e-9);
        }
    }
}
