//! Operator-norm functionals of `P_ω` on `L^∞_v`.
//!
//! Both functionals reduce to radial integrals of circle means, since
//! `|B_a|` and `|∂_z B_ζ(a)|` on `|ζ| = s` depend on `|a|s` only:
//!
//! * H∞: `v(a) ∫_D |B_a| ω/v dA = 2 v(a) ∫ s (ω/v)(s) m(as) ds`;
//! * Bloch: `(1-a) v(a) ∫_D |∂_z B_ζ(a)| ω/v dA = 2 (1-a) v(a) ∫ s² (ω/v)(s) m'(as) ds`,
//!
//! where `m'(t)` is the derivative mean divided by `t`. The outer integral
//! runs in `u = -ln(1-s)` over `(0, ∞)`, so no kernel is ever evaluated at a
//! point where `|z̄ζ|` reaches 1.

use std::sync::OnceLock;

use super::{ln_or_infinite, CriterionId, CriterionReport, GridKind, ScanOptions, SecondRole};
use crate::error::Result;
use crate::kernel::{KernelEvaluator, KernelOptions, MeanKind, MeanTable};
use crate::numeric::{integrate_ln_fallback, LnQuadOptions};
use crate::par;
use crate::weights::{Family, Radius, WeightSpec};

/// Shared state for norm scans of one `ω`: the kernel coefficients and the
/// circle-mean tables, built on first use.
pub struct NormScanner {
    kernel: KernelEvaluator,
    opts: ScanOptions,
    u_max: f64,
    tables: [OnceLock<Result<MeanTable>>; 2],
}

impl NormScanner {
    pub fn new(omega: &WeightSpec, opts: &ScanOptions) -> Result<Self> {
        Ok(Self {
            kernel: KernelEvaluator::new(omega, KernelOptions::default())?,
            opts: opts.clone(),
            u_max: opts.norm_depth as f64 * std::f64::consts::LN_2 + 0.25,
            tables: [OnceLock::new(), OnceLock::new()],
        })
    }

    pub fn omega(&self) -> &WeightSpec {
        self.kernel.spec()
    }

    pub fn kernel(&self) -> &KernelEvaluator {
        &self.kernel
    }

    pub fn table(&self, kind: MeanKind) -> Result<&MeanTable> {
        let slot = match kind {
            MeanKind::Kernel => &self.tables[0],
            MeanKind::Derivative => &self.tables[1],
        };
        slot.get_or_init(|| {
            self.kernel
                .mean_table(kind, self.u_max, self.opts.table_step, 1e-2 * self.opts.tol, self.opts.exec)
        })
        .as_ref()
        .map_err(Clone::clone)
    }

    /// `ln 2∫_0^1 s^p (ω/v)(s) M(as) ds` with `p = 1` for the kernel mean and
    /// `p = 2` for the derivative mean; `v = None` means `v ≡ 1`. A
    /// non-integrable `ω/v` gives `+∞`.
    pub fn ln_radial_integral(&self, v: Option<&WeightSpec>, a: f64, kind: MeanKind) -> Result<f64> {
        self.ln_radial_integral_on(v, a, kind, 0.0, f64::INFINITY)
    }

    /// As [`Self::ln_radial_integral`], restricted to `u_s ∈ [lo, hi]`.
    pub fn ln_radial_integral_on(&self, v: Option<&WeightSpec>, a: f64, kind: MeanKind, lo: f64, hi: f64) -> Result<f64> {
        let table = self.table(kind)?;
        let omega = self.kernel.spec();
        let pa = Radius::new(a)?;
        let power = match kind {
            MeanKind::Kernel => 1.0,
            MeanKind::Derivative => 2.0,
        };
        let failure = std::cell::RefCell::new(None);
        let f = |u: f64| {
            let ps = Radius::from_u(u);
            let ratio = match v {
                Some(v) => omega.ln_density(ps) - v.ln_density(ps),
                None => omega.ln_density(ps),
            };
            // 1 - as = δ_a + δ_s - δ_a δ_s
            let one_minus_t = pa.delta + ps.delta - pa.delta * ps.delta;
            let ln_m = match table.ln_mean_u(&self.kernel, -one_minus_t.ln()) {
                Ok(v) => v,
                Err(e) => {
                    failure.borrow_mut().get_or_insert(e);
                    f64::NAN
                }
            };
            power * ps.r.ln() + ratio + ln_m - u
        };
        let opts = LnQuadOptions {
            rel_tol: 0.1 * self.opts.tol,
            ..Default::default()
        };
        // |ln ω| reaches 1e8 for steep exponential weights, and the rounding
        // noise it leaves in the integrand can sit above 0.1·tol
        let ln = integrate_ln_fallback(&f, lo, hi, &opts, 10.0 * self.opts.tol).map(|r| r.ln_value);
        if let Some(e) = failure.into_inner() {
            return Err(e);
        }
        let ln = ln_or_infinite(ln)?;
        Ok(std::f64::consts::LN_2 + ln)
    }

    /// `ln` of the H∞ functional at `a`.
    pub fn ln_hinf(&self, v: &WeightSpec, a: f64) -> Result<f64> {
        Ok(v.ln_density(Radius::new(a)?) + self.ln_radial_integral(Some(v), a, MeanKind::Kernel)?)
    }

    /// `ln` of the H∞ functional at `a` split at `|ζ| = (1+a)/2`: the
    /// inner disk first, then the outer annulus.
    pub fn ln_hinf_split(&self, v: &WeightSpec, a: f64) -> Result<(f64, f64)> {
        let p = Radius::new(a)?;
        let cut = p.u() + std::f64::consts::LN_2;
        let lv = v.ln_density(p);
        let inner = self.ln_radial_integral_on(Some(v), a, MeanKind::Kernel, 0.0, cut)?;
        let outer = self.ln_radial_integral_on(Some(v), a, MeanKind::Kernel, cut, f64::INFINITY)?;
        Ok((lv + inner, lv + outer))
    }

    /// `ln` of the Bloch functional at `a`.
    pub fn ln_bloch(&self, v: &WeightSpec, a: f64) -> Result<f64> {
        let p = Radius::new(a)?;
        Ok(p.ln_delta + v.ln_density(p) + self.ln_radial_integral(Some(v), a, MeanKind::Derivative)?)
    }

    fn scan(&self, v: &WeightSpec, criterion: CriterionId) -> Result<CriterionReport> {
        v.validate()?;
        // force table construction outside the parallel map
        let kind = if criterion == CriterionId::Bloch {
            MeanKind::Derivative
        } else {
            MeanKind::Kernel
        };
        self.table(kind)?;
        let levels: Vec<u32> = (0..=self.opts.norm_depth).collect();
        let ln_trace = par::map(self.opts.exec, &levels, |&k| {
            let a = 1.0 - 2f64.powi(-(k as i32));
            match criterion {
                CriterionId::Bloch => self.ln_bloch(v, a),
                _ => self.ln_hinf(v, a),
            }
        })
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
        let mut rep = CriterionReport::from_ln(
            criterion,
            self.omega(),
            v,
            SecondRole::V,
            GridKind::DyadicRadius,
            levels,
            &ln_trace,
            &self.opts.rules,
        );
        if !matches!(v.family, Family::TailOf { power, .. } if power == 1.0) {
            rep.notes.push("v is not a tail ν̂; the test-function argument is applied to a general decreasing v".into());
        }
        Ok(rep)
    }

    pub fn hinf_scan(&self, v: &WeightSpec) -> Result<CriterionReport> {
        self.scan(v, CriterionId::Hinf)
    }

    pub fn bloch_scan(&self, v: &WeightSpec) -> Result<CriterionReport> {
        self.scan(v, CriterionId::Bloch)
    }
}

/// `t(a) = v(a) ∫_D |B^ω_a| ω/v dA` on `a = 1 - 2^{-k}`, `k = 0..=norm_depth`.
pub fn hinf_norm_scan(omega: &WeightSpec, v: &WeightSpec, opts: &ScanOptions) -> Result<CriterionReport> {
    NormScanner::new(omega, opts)?.hinf_scan(v)
}

/// `t(a) = (1-a) v(a) ∫_D |∂_z B^ω_ζ(a)| ω(ζ)/v(ζ) dA(ζ)` on the same grid.
pub fn bloch_norm_scan(omega: &WeightSpec, v: &WeightSpec, opts: &ScanOptions) -> Result<CriterionReport> {
    NormScanner::new(omega, opts)?.bloch_scan(v)
}
