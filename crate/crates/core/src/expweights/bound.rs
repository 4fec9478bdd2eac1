//! Empirical decay of the kernel of `ω = e^{-2φ}` against `d_ρ`.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::drho::{Mesh, MeshSpec};
use super::ClassESpec;
use crate::error::{Error, Result};
use crate::kernel::{KernelEvaluator, KernelOptions};
use crate::numeric::fit::linear_fit;
use crate::par::{self, Execution};
use crate::weights::Radius;

#[derive(Debug, Clone, Serialize)]
pub struct KernelBoundOptions {
    /// Radii of the source points `z` (placed on the positive axis).
    pub source_radii: Vec<f64>,
    /// Target `ζ` radii are drawn uniformly from `[0, target_max]`.
    pub target_max: f64,
    pub pairs: usize,
    pub seed: u64,
    pub n_theta: usize,
    pub powers: Vec<u32>,
    /// Radii of the diagonal trace.
    pub diagonal: Vec<f64>,
    /// Relative kernel accuracy; pairs evaluated worse than 10% are dropped.
    pub tol: f64,
    #[serde(skip)]
    pub exec: Execution,
}

impl Default for KernelBoundOptions {
    fn default() -> Self {
        Self {
            source_radii: vec![0.0, 0.3, 0.5, 0.7, 0.8, 0.9],
            target_max: 0.9,
            pairs: 120,
            seed: 7,
            n_theta: 256,
            powers: vec![2, 4, 8],
            diagonal: vec![0.0, 0.2, 0.4, 0.6, 0.8, 0.9, 0.95, 0.97, 0.98, 0.99],
            tol: 1e-10,
            exec: Execution::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PairRow {
    pub z: Complex64,
    pub zeta: Complex64,
    pub d_rho: f64,
    /// `ln|B_z(ζ)| + ln ρ(z) + ln ρ(ζ) - φ(z) - φ(ζ)`.
    pub ln_ratio: f64,
    /// `ln(min(ρ(z), ρ(ζ)) / |z - ζ|)`.
    pub ln_separation: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PowerBound {
    pub power: u32,
    /// `max (ln_ratio - M·ln_separation)` over the off-diagonal pairs.
    pub ln_constant: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DiagonalRow {
    pub r: f64,
    /// `|B_z(z)| ρ(z)² e^{-2φ(z)}`.
    pub ratio: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct BoundFit {
    pub spec: ClassESpec,
    pub rows: Vec<PairRow>,
    pub dropped: usize,
    /// Fitted decay rate in `ratio ≈ C e^{-α d_ρ}`.
    pub alpha: f64,
    /// `ln C` of the least-squares line.
    pub ln_c: f64,
    /// `ln C` of the upper envelope with the fitted slope.
    pub ln_c_envelope: f64,
    pub r2: f64,
    pub residual_max: f64,
    pub powers: Vec<PowerBound>,
    pub diagonal: Vec<DiagonalRow>,
    /// `max/min` of the diagonal ratios.
    pub diagonal_spread: f64,
}

/// Pairs `(z, ζ)` with `z` cycling through the source radii on the positive
/// axis and `ζ` uniform in radius and angle. Kernels and `d_ρ` are rotation
/// invariant, so one distance field per source radius serves every pair.
pub fn sample_pairs(n: usize, source_radii: &[f64], target_max: f64, seed: u64) -> Vec<(Complex64, Complex64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|i| {
            let z = Complex64::new(source_radii[i % source_radii.len()], 0.0);
            let r = rng.gen_range(0.0..=target_max);
            let t = rng.gen_range(0.0..std::f64::consts::TAU);
            (z, Complex64::from_polar(r, t))
        })
        .collect()
}

pub fn kernel_bound_fit(spec: &ClassESpec, opts: &KernelBoundOptions) -> Result<BoundFit> {
    spec.validate()?;
    if opts.source_radii.is_empty() || opts.pairs < 3 {
        return Err(Error::Parameter("kernel bound fit needs source radii and at least 3 pairs".into()));
    }
    let rho = spec.rho();
    let kernel = KernelEvaluator::new(&spec.omega(), KernelOptions::default())?;
    let cover = opts
        .source_radii
        .iter()
        .copied()
        .fold(opts.target_max, f64::max);
    let mesh = Mesh::new(rho, MeshSpec::new(opts.n_theta, cover))?;
    let sources: Vec<f64> = opts.source_radii.clone();
    let fields = par::map(opts.exec, &sources, |&r| mesh.field(Complex64::new(r, 0.0)))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;

    let ln_weight = |z: Complex64| -> Result<(f64, f64)> {
        let p = Radius::new(z.norm())?;
        Ok((rho.ln_eval(p), spec.phi(p)))
    };
    let pairs = sample_pairs(opts.pairs, &opts.source_radii, opts.target_max, opts.seed);
    let evaluated = par::map_range(opts.exec, pairs.len(), |i| -> Result<Option<PairRow>> {
        let (z, zeta) = pairs[i];
        let k = kernel.eval(z, zeta, opts.tol)?;
        let modulus = k.value.norm();
        if !(k.error < 0.1 * modulus) {
            return Ok(None);
        }
        let (lrz, pz) = ln_weight(z)?;
        let (lrw, pw) = ln_weight(zeta)?;
        Ok(Some(PairRow {
            z,
            zeta,
            d_rho: fields[i % fields.len()].to(zeta)?,
            ln_ratio: modulus.ln() + lrz + lrw - pz - pw,
            ln_separation: lrz.min(lrw) - (z - zeta).norm().ln(),
        }))
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let dropped = evaluated.iter().filter(|r| r.is_none()).count();
    let rows: Vec<PairRow> = evaluated.into_iter().flatten().collect();

    let xs: Vec<f64> = rows.iter().map(|r| r.d_rho).collect();
    let ys: Vec<f64> = rows.iter().map(|r| r.ln_ratio).collect();
    let fit = linear_fit(&xs, &ys)
        .ok_or_else(|| Error::Parameter("too few usable pairs for the decay fit".into()))?;
    let residual_max = rows
        .iter()
        .map(|r| r.ln_ratio - fit.intercept - fit.slope * r.d_rho)
        .fold(f64::NEG_INFINITY, f64::max);

    let powers = opts
        .powers
        .iter()
        .map(|&m| PowerBound {
            power: m,
            ln_constant: rows
                .iter()
                .filter(|r| r.ln_separation.is_finite())
                .map(|r| r.ln_ratio - m as f64 * r.ln_separation)
                .fold(f64::NEG_INFINITY, f64::max),
        })
        .collect();

    let diagonal = opts
        .diagonal
        .iter()
        .map(|&r| -> Result<DiagonalRow> {
            let z = Complex64::new(r, 0.0);
            let k = kernel.eval(z, z, opts.tol)?;
            let (lr, p) = ln_weight(z)?;
            Ok(DiagonalRow {
                r,
                ratio: (k.value.re.ln() + 2.0 * lr - 2.0 * p).exp(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let dmax = diagonal.iter().map(|d| d.ratio).fold(0.0, f64::max);
    let dmin = diagonal.iter().map(|d| d.ratio).fold(f64::INFINITY, f64::min);

    Ok(BoundFit {
        spec: *spec,
        rows,
        dropped,
        alpha: -fit.slope,
        ln_c: fit.intercept,
        ln_c_envelope: fit.intercept + residual_max,
        r2: fit.r2,
        residual_max,
        powers,
        diagonal,
        diagonal_spread: dmax / dmin,
    })
}
