//! Exponentially decreasing weights `w = e^{-φ}` with a slowly varying
//! `ρ ≍ (Δφ)^{-1/2}`, the distance `d_ρ`, kernel decay bounds and the
//! perturbed-weight families whose projections are scanned for boundedness.

mod bound;
mod drho;
mod families;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::weights::{Radius, WeightSpec};

pub use bound::{kernel_bound_fit, sample_pairs, BoundFit, DiagonalRow, KernelBoundOptions, PairRow, PowerBound};
pub use drho::{d_rho, straight_segment_bound, DRho, DistanceField, Mesh, MeshSpec};
pub use families::{hinf_split_scan, damped_family_scan, tail_power_family_scan, FamilyScan, RegionSplit};

/// Radial phase.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "phase", rename_all = "snake_case", deny_unknown_fields)]
pub enum Phase {
    /// `φ(r) = α/(1-r^ℓ)^β`.
    Power {
        alpha: f64,
        beta: f64,
        #[serde(default = "one")]
        ell: f64,
    },
    /// `ψ(r) = α/(1-r²)^β - σ ln(1-r²)`.
    LogPerturbed { alpha: f64, beta: f64, sigma: f64 },
}

fn one() -> f64 {
    1.0
}

/// `ρ(r) = (1-r)^exponent`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rho {
    pub exponent: f64,
}

impl Rho {
    pub fn ln_eval(&self, p: Radius) -> f64 {
        self.exponent * p.ln_delta
    }

    pub fn eval(&self, r: f64) -> f64 {
        (1.0 - r).powf(self.exponent)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassESpec {
    #[serde(flatten)]
    pub phase: Phase,
    /// Exponent of `ρ = (1-r)^e`; defaults to `1 + β/2`.
    #[serde(default)]
    pub rho_exponent: Option<f64>,
}

impl ClassESpec {
    pub fn power(alpha: f64, beta: f64, ell: f64) -> Self {
        Self {
            phase: Phase::Power { alpha, beta, ell },
            rho_exponent: None,
        }
    }

    pub fn log_perturbed(alpha: f64, beta: f64, sigma: f64) -> Self {
        Self {
            phase: Phase::LogPerturbed { alpha, beta, sigma },
            rho_exponent: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let (alpha, beta, ell, _) = self.parts();
        if !(alpha > 0.0 && beta > 0.0 && ell > 0.0) {
            return Err(Error::Parameter(format!(
                "class E phase needs α, β, ℓ > 0 (got {alpha}, {beta}, {ell})"
            )));
        }
        if let Some(e) = self.rho_exponent {
            if !(e > 0.0) {
                return Err(Error::Parameter(format!("ρ exponent must be > 0, got {e}")));
            }
        }
        Ok(())
    }

    // φ = α g^{-β} - σ ln g with g = 1 - r^ℓ
    fn parts(&self) -> (f64, f64, f64, f64) {
        match self.phase {
            Phase::Power { alpha, beta, ell } => (alpha, beta, ell, 0.0),
            Phase::LogPerturbed { alpha, beta, sigma } => (alpha, beta, 2.0, sigma),
        }
    }

    pub fn rho(&self) -> Rho {
        let (_, beta, _, _) = self.parts();
        Rho {
            exponent: self.rho_exponent.unwrap_or(1.0 + 0.5 * beta),
        }
    }

    pub fn phi(&self, p: Radius) -> f64 {
        let (alpha, beta, ell, sigma) = self.parts();
        let ln_g = p.ln_one_minus_r_pow(ell);
        alpha * (-beta * ln_g).exp() - sigma * ln_g
    }

    /// `(φ', φ'')` at `r > 0`.
    pub fn phi_derivatives(&self, p: Radius) -> (f64, f64) {
        let (alpha, beta, ell, sigma) = self.parts();
        let r = p.r;
        let g = p.ln_one_minus_r_pow(ell).exp();
        let g1 = -ell * r.powf(ell - 1.0);
        let g2 = -ell * (ell - 1.0) * r.powf(ell - 2.0);
        let d1 = -alpha * beta * g.powf(-beta - 1.0) * g1 - sigma * g1 / g;
        let d2 = alpha * beta * (beta + 1.0) * g.powf(-beta - 2.0) * g1 * g1
            - alpha * beta * g.powf(-beta - 1.0) * g2
            - sigma * (g2 / g - g1 * g1 / (g * g));
        (d1, d2)
    }

    /// `Δφ = φ'' + φ'/r`, with the limit `2φ''(0)` at the origin when
    /// `φ'(0) = 0` and `+∞` otherwise.
    pub fn laplacian(&self, p: Radius) -> f64 {
        let (_, _, ell, _) = self.parts();
        if p.r == 0.0 {
            return if ell > 1.0 {
                let eps = Radius::new(1e-6).expect("radius");
                2.0 * self.phi_derivatives(eps).1
            } else {
                f64::INFINITY
            };
        }
        let (d1, d2) = self.phi_derivatives(p);
        d2 + d1 / p.r
    }

    /// `w = e^{-φ}`.
    pub fn w(&self) -> WeightSpec {
        let (alpha, beta, ell, sigma) = self.parts();
        let base = WeightSpec::exponential(alpha, beta, ell);
        if sigma == 0.0 {
            base
        } else {
            WeightSpec::product(WeightSpec::standard_r2(sigma), base)
        }
    }

    /// `ω = w² = e^{-2φ}`.
    pub fn omega(&self) -> WeightSpec {
        let (alpha, beta, ell, sigma) = self.parts();
        let base = WeightSpec::exponential(2.0 * alpha, beta, ell);
        if sigma == 0.0 {
            base
        } else {
            WeightSpec::product(WeightSpec::standard_r2(2.0 * sigma), base)
        }
    }

    /// `ρ^s` as a radial weight factor.
    pub fn rho_power(&self, s: f64) -> WeightSpec {
        WeightSpec::standard(s * self.rho().exponent)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WzeroRow {
    pub r: f64,
    pub laplacian: f64,
    /// `(Δφ)^{-1/2} / ρ`.
    pub ratio: f64,
    /// `ρ / (1-r)`.
    pub rho_over_delta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WzeroReport {
    pub spec: ClassESpec,
    pub rows: Vec<WzeroRow>,
    pub ratio_min: f64,
    pub ratio_max: f64,
    /// Band constant `c` with `ratio ∈ [1/c, c]` after centering:
    /// `sqrt(ratio_max / ratio_min)`.
    pub band: f64,
    pub rho_over_delta_max: f64,
    pub within_band: bool,
}

/// Evidence for `(Δφ)^{-1/2} ≍ ρ` and `ρ ≤ C(1-r)` on `r = 1 - 2^{-k}`,
/// `k = 1..=depth`, plus the origin when `Δφ(0)` is finite (for `ℓ = 1`
/// the phase has a conical point there).
pub fn wzero_check(spec: &ClassESpec, depth: u32, max_band: f64) -> Result<WzeroReport> {
    spec.validate()?;
    let rho = spec.rho();
    let origin = Radius::new(0.0)?;
    let grid = std::iter::once(origin)
        .filter(|p| spec.laplacian(*p).is_finite())
        .chain((1..=depth).map(|k| Radius::dyadic(k as f64)));
    let rows: Vec<WzeroRow> = grid
        .map(|p| {
            let lap = spec.laplacian(p);
            WzeroRow {
                r: p.r,
                laplacian: lap,
                ratio: (-0.5 * lap.ln() - rho.ln_eval(p)).exp(),
                rho_over_delta: ((rho.exponent - 1.0) * p.ln_delta).exp(),
            }
        })
        .collect();
    let ratio_min = rows.iter().map(|r| r.ratio).fold(f64::INFINITY, f64::min);
    let ratio_max = rows.iter().map(|r| r.ratio).fold(0.0, f64::max);
    let band = (ratio_max / ratio_min).sqrt();
    Ok(WzeroReport {
        spec: *spec,
        rho_over_delta_max: rows.iter().map(|r| r.rho_over_delta).fold(0.0, f64::max),
        within_band: band <= max_band,
        rows,
        ratio_min,
        ratio_max,
        band,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derivatives_match_finite_differences() {
        for spec in [ClassESpec::power(1.0, 1.0, 1.0), ClassESpec::log_perturbed(1.0, 2.0, 1.5)] {
            for r in [0.2, 0.5, 0.9] {
                let h = 1e-5;
                let f = |x: f64| spec.phi(Radius::new(x).unwrap());
                let fd1 = (f(r + h) - f(r - h)) / (2.0 * h);
                let fd2 = (f(r + h) - 2.0 * f(r) + f(r - h)) / (h * h);
                let (d1, d2) = spec.phi_derivatives(Radius::new(r).unwrap());
                assert!((d1 - fd1).abs() < 1e-6 * d1.abs().max(1.0));
                assert!((d2 - fd2).abs() < 1e-3 * d2.abs().max(1.0), "{r}: {d2} vs {fd2}");
            }
        }
    }

    #[test]
    fn weights_match_phase() {
        let spec = ClassESpec::log_perturbed(1.0, 1.0, 2.0);
        let p = Radius::new(0.7).unwrap();
        assert!((spec.w().ln_density(p) + spec.phi(p)).abs() < 1e-12);
        assert!((spec.omega().ln_density(p) + 2.0 * spec.phi(p)).abs() < 1e-12);
    }

    #[test]
    fn standard_family_is_in_band() {
        let rep = wzero_check(&ClassESpec::power(1.0, 1.0, 1.0), 20, 4.0).unwrap();
        assert!(rep.within_band, "band {}", rep.band);
        assert!(rep.rho_over_delta_max <= 1.0);
        // near the rim Δφ ≈ 2/(1-r)^3, so the ratio tends to 1/√2
        let last = rep.rows.last().unwrap();
        assert!((last.ratio - 0.5f64.sqrt()).abs() < 1e-3);
    }

    #[test]
    fn smooth_phase_has_finite_laplacian_at_origin() {
        let s = ClassESpec::log_perturbed(1.0, 1.0, 0.0);
        // ψ = 1/(1-r²) = 1 + r² + ..., so Δψ(0) = 4
        assert!((s.laplacian(Radius::new(0.0).unwrap()) - 4.0).abs() < 1e-4);
        assert!(ClassESpec::power(1.0, 1.0, 1.0).laplacian(Radius::new(0.0).unwrap()).is_infinite());
    }
}
