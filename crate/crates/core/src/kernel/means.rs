//! Circle means of `|Σ T_n e^{inθ}|` for positive coefficient sequences.
//!
//! On the circle `|ζ| = s` the kernel `B_a` has coefficients `c_n t^n` with
//! `t = |a| s`, and its modulus depends on `t` only. The sequence `ln T_n` is
//! concave, so it is a single bump. Two routes compute the mean:
//!
//! * exact: the coefficients are folded modulo `N`, an FFT gives the exact
//!   values at `N` equispaced angles, and the trapezoid rule is refined by
//!   doubling `N`;
//! * stride: for wide bumps away from `n = 0` the mean is invariant under
//!   subsampling the (smooth) bump with stride `D`, as long as the aliases of
//!   its Fourier transform do not overlap. The result is checked against
//!   stride `D/2`.

use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use super::KernelEvaluator;
use crate::error::{Error, Result};
use crate::numeric::interp::UniformCubic;
use crate::numeric::Neumaier;
use crate::par::{self, Execution};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MeanKind {
    /// `mean |Σ c_n t^n e^{inθ}|`.
    Kernel,
    /// `mean |Σ (n+1) c_{n+1} t^n e^{inθ}|`, i.e. the derivative mean over `t`.
    Derivative,
}

// Coefficients this far below the peak (in ln) are dropped.
const DROP: f64 = 40.0;
const EXACT_MAX_WIDTH: u64 = 1 << 13;
const MAX_FFT: usize = 1 << 24;
const STRIDE_SAMPLES: u64 = 160;

// forced routes are used by the cross-checks in tests
#[cfg_attr(not(test), allow(dead_code))]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Route {
    Auto,
    Exact,
    Stride,
}

struct Bump<'a> {
    k: &'a KernelEvaluator,
    kind: MeanKind,
    ln_t: f64,
}

impl Bump<'_> {
    fn ln_coeff(&self, n: u64) -> Result<f64> {
        let ln_c = |m: u64| {
            if m < self.k.opts.max_terms as u64 {
                self.k.ln_c(m as usize)
            } else {
                self.k.ln_coeff(m as f64)
            }
        };
        Ok(match self.kind {
            MeanKind::Kernel => ln_c(n)?,
            MeanKind::Derivative => ((n + 1) as f64).ln() + ln_c(n + 1)?,
        })
    }

    fn l(&self, n: u64) -> Result<f64> {
        Ok(self.ln_coeff(n)? + n as f64 * self.ln_t)
    }

    fn peak(&self) -> Result<(u64, f64)> {
        let l0 = self.l(0)?;
        if self.l(1)? <= l0 {
            return Ok((0, l0));
        }
        let mut hi = 1u64;
        while self.l(2 * hi)? > self.l(hi)? {
            hi *= 2;
            if hi > 1 << 50 {
                return Err(Error::Resolution("coefficient peak beyond 2^50".into()));
            }
        }
        // ternary search on [hi/2, 4hi]: neighbor comparisons drown in the
        // rounding noise of L near wide peaks, thirds stay well separated
        // until both candidates are within noise of the maximum
        let (mut lo, mut up) = (hi / 2, 4 * hi);
        while up - lo > 2 {
            let m1 = lo + (up - lo) / 3;
            let m2 = up - (up - lo) / 3;
            if self.l(m1)? < self.l(m2)? {
                lo = m1 + 1;
            } else {
                up = m2 - 1;
            }
        }
        let mut best = (lo, self.l(lo)?);
        for n in lo + 1..=up {
            let v = self.l(n)?;
            if v > best.1 {
                best = (n, v);
            }
        }
        Ok(best)
    }

    /// `(peak, L*, n_lo, n_hi)`.
    fn locate(&self) -> Result<(u64, f64, u64, u64)> {
        let (peak, l_star) = self.peak()?;
        let (n_lo, n_hi) = self.range(peak, l_star)?;
        Ok((peak, l_star, n_lo, n_hi))
    }

    fn range(&self, peak: u64, l_star: f64) -> Result<(u64, u64)> {
        let floor = l_star - DROP;
        let n_lo = if self.l(0)? >= floor {
            0
        } else {
            let (mut a, mut b) = (0u64, peak);
            // L(a) < floor <= L(b)
            while b - a > 1 {
                let mid = a + (b - a) / 2;
                if self.l(mid)? < floor {
                    a = mid;
                } else {
                    b = mid;
                }
            }
            b
        };
        let mut d = 1u64;
        while self.l(peak + d)? >= floor {
            d *= 2;
        }
        let (mut a, mut b) = (peak + d / 2, peak + d);
        while b - a > 1 {
            let mid = a + (b - a) / 2;
            if self.l(mid)? < floor {
                b = mid;
            } else {
                a = mid;
            }
        }
        Ok((n_lo, a))
    }
}

struct Plans {
    planner: FftPlanner<f64>,
}

impl Plans {
    fn new() -> Self {
        Self {
            planner: FftPlanner::new(),
        }
    }

    fn plan(&mut self, n: usize) -> Arc<dyn Fft<f64>> {
        self.planner.plan_fft_forward(n)
    }

    /// Trapezoid mean of `|Σ g_k e^{ikθ}|` on `n` angles.
    fn mean(&mut self, g: &[f64], n: usize) -> f64 {
        let mut buf = vec![Complex64::new(0.0, 0.0); n];
        for (k, v) in g.iter().enumerate() {
            buf[k % n].re += v;
        }
        self.plan(n).process(&mut buf);
        buf.iter().map(|c| c.norm()).sum::<f64>() / n as f64
    }

    /// Mean refined by doubling until two successive doublings agree.
    fn converged_mean(&mut self, g: &[f64], tol: f64) -> Result<f64> {
        let mut n = (g.len() / 16).next_power_of_two().max(64);
        let mut prev = self.mean(g, n);
        let mut agreed = 0;
        while n < MAX_FFT {
            n *= 2;
            let cur = self.mean(g, n);
            if (cur - prev).abs() <= tol * cur {
                agreed += 1;
                if agreed == 2 {
                    return Ok(cur);
                }
            } else {
                agreed = 0;
            }
            prev = cur;
        }
        Err(Error::Resolution(format!(
            "circle mean unresolved with {MAX_FFT} angles"
        )))
    }
}

impl KernelEvaluator {
    /// Logarithm of the circle mean of the given kind at modulus `t`.
    pub fn ln_circle_mean(&self, t: f64, kind: MeanKind, tol: f64) -> Result<f64> {
        self.ln_circle_mean_route(t, kind, tol, Route::Auto)
    }

    pub(crate) fn ln_circle_mean_route(&self, t: f64, kind: MeanKind, tol: f64, route: Route) -> Result<f64> {
        if !(0.0..1.0).contains(&t) {
            return Err(Error::Domain(t));
        }
        let tol = tol.max(1e-14);
        let bump = Bump { k: self, kind, ln_t: t.ln() };
        if t == 0.0 {
            return bump.ln_coeff(0);
        }
        let (peak, l_star, n_lo, n_hi) = bump.locate()?;
        let width = n_hi - n_lo + 1;
        // ln T_n carries rounding noise of a few ulps of |ln c_n| + |n ln t|;
        // a sum of m noisy terms cannot be resolved below this floor
        let noise = 8.0 * f64::EPSILON * (bump.ln_coeff(peak)?.abs() + peak as f64 * bump.ln_t.abs());
        let tol_for = |m: usize| tol.max(noise * (m as f64).sqrt());
        let stride = match route {
            Route::Auto => n_lo > 0 && width > EXACT_MAX_WIDTH,
            Route::Exact => false,
            Route::Stride => true,
        };
        let mut plans = Plans::new();
        let sample = |d: u64| -> Result<Vec<f64>> {
            (0..=(n_hi - n_lo) / d)
                .map(|j| Ok((bump.l(n_lo + j * d)? - l_star).exp()))
                .collect()
        };
        if !stride {
            if width as usize > MAX_FFT {
                return Err(Error::Resolution(format!("coefficient bump of width {width}")));
            }
            let g = sample(1)?;
            return Ok(l_star + plans.converged_mean(&g, tol_for(g.len()))?.ln());
        }
        let mut d = (width / STRIDE_SAMPLES).max(1);
        let g = sample(d)?;
        let mut prev = plans.converged_mean(&g, tol_for(g.len()))?;
        while d > 1 {
            d /= 2;
            let g = sample(d)?;
            let tol = tol_for(g.len());
            let cur = plans.converged_mean(&g, tol)?;
            if (cur - prev).abs() <= tol * cur {
                return Ok(l_star + cur.ln());
            }
            prev = cur;
            if width / d > MAX_FFT as u64 {
                break;
            }
        }
        if d == 1 {
            return Ok(l_star + prev.ln());
        }
        Err(Error::Resolution("stride refinement did not settle".into()))
    }

    /// `ln Σ T_n`, the value of the series at `θ = 0`.
    pub fn ln_coefficient_sum(&self, t: f64, kind: MeanKind) -> Result<f64> {
        if !(0.0..1.0).contains(&t) {
            return Err(Error::Domain(t));
        }
        let bump = Bump { k: self, kind, ln_t: t.ln() };
        if t == 0.0 {
            return bump.ln_coeff(0);
        }
        let (peak, l_star, n_lo, n_hi) = bump.locate()?;
        let width = n_hi - n_lo + 1;
        let noise = 8.0 * f64::EPSILON * (bump.ln_coeff(peak)?.abs() + peak as f64 * bump.ln_t.abs());
        let sum = |d: u64| -> Result<f64> {
            let mut acc = Neumaier::new();
            for j in 0..=(n_hi - n_lo) / d {
                acc.add((bump.l(n_lo + j * d)? - l_star).exp());
            }
            Ok(d as f64 * acc.value())
        };
        if n_lo == 0 || width <= EXACT_MAX_WIDTH {
            if width > MAX_FFT as u64 {
                return Err(Error::Resolution(format!("coefficient bump of width {width}")));
            }
            return Ok(l_star + sum(1)?.ln());
        }
        // the bump is smooth and detached from n = 0, so the stride sum is
        // exact up to aliasing; confirm against half the stride
        let mut d = (width / STRIDE_SAMPLES).max(1);
        let mut prev = sum(d)?;
        while d > 1 && width / d <= MAX_FFT as u64 {
            d /= 2;
            let cur = sum(d)?;
            let tol = 1e-13f64.max(noise * ((width / d) as f64).sqrt());
            if (cur - prev).abs() <= tol * cur {
                return Ok(l_star + cur.ln());
            }
            prev = cur;
        }
        if d == 1 {
            return Ok(l_star + prev.ln());
        }
        Err(Error::Resolution("stride sum did not settle".into()))
    }

    fn detached(&self, t: f64, kind: MeanKind) -> Result<bool> {
        if t == 0.0 {
            return Ok(false);
        }
        let (_, _, n_lo, _) = Bump { k: self, kind, ln_t: t.ln() }.locate()?;
        Ok(n_lo > 0)
    }

    /// Tabulate a circle mean on the grid `u = -ln(1-t) = 0, h, 2h, ...` up to `u_max`.
    ///
    /// When the coefficient bump at `u_max` has left `n = 0`, `ln m` grows
    /// too fast in `u` to interpolate; the table then stores `ln(m/K)` with
    /// `K = Σ T_n`, which varies slowly, and `K` is summed afresh on lookup.
    pub fn mean_table(&self, kind: MeanKind, u_max: f64, h: f64, tol: f64, exec: Execution) -> Result<MeanTable> {
        if !(u_max > 0.0 && h > 0.0) {
            return Err(Error::Parameter(format!("mean table needs u_max, h > 0 (got {u_max}, {h})")));
        }
        // two extra nodes keep the interpolation stencil inside the grid
        let n = ((u_max / h).ceil() as usize + 3).max(4);
        let t_of = |i: usize| -(-(i as f64) * h).exp_m1();
        let relative = self.detached(t_of(n - 1), kind)?;
        let values = par::map_range(exec, n, |i| {
            let t = t_of(i);
            let m = self.ln_circle_mean(t, kind, tol)?;
            Ok(if relative { m - self.ln_coefficient_sum(t, kind)? } else { m })
        })
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
        Ok(MeanTable {
            kind,
            relative,
            interp: UniformCubic::new(0.0, h, values),
        })
    }
}

/// A circle mean tabulated in `u = -ln(1-t)`.
#[derive(Debug, Clone)]
pub struct MeanTable {
    kind: MeanKind,
    relative: bool,
    interp: UniformCubic,
}

impl MeanTable {
    pub fn kind(&self) -> MeanKind {
        self.kind
    }

    /// True when the table holds `ln(m/K)` rather than `ln m`.
    pub fn is_relative(&self) -> bool {
        self.relative
    }

    pub fn u_max(&self) -> f64 {
        self.interp.x_max()
    }

    /// `ln m` at `u`, for the evaluator the table was built from; `u` is
    /// clamped to the tabulated range.
    pub fn ln_mean_u(&self, k: &KernelEvaluator, u: f64) -> Result<f64> {
        let u = u.clamp(0.0, self.u_max());
        let v = self.interp.eval(u);
        if self.relative {
            Ok(v + k.ln_coefficient_sum(-(-u).exp_m1(), self.kind)?)
        } else {
            Ok(v)
        }
    }

    pub fn ln_mean(&self, k: &KernelEvaluator, t: f64) -> Result<f64> {
        self.ln_mean_u(k, -(-t).ln_1p())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::KernelOptions;
    use crate::weights::WeightSpec;

    fn eval(spec: WeightSpec) -> KernelEvaluator {
        KernelEvaluator::new(&spec, KernelOptions::default()).unwrap()
    }

    fn trapezoid_mean(f: impl Fn(f64) -> f64, n: usize) -> f64 {
        (0..n)
            .map(|j| f(2.0 * std::f64::consts::PI * j as f64 / n as f64))
            .sum::<f64>()
            / n as f64
    }

    #[test]
    fn unweighted_kernel_mean_is_closed_form() {
        // |1/(1-te^{iθ})^2| averages to 1/(1-t^2)
        let k = eval(WeightSpec::standard(0.0));
        for t in [0.0, 0.25, 0.7, 0.99, 1.0 - 1e-4] {
            let m = k.ln_circle_mean(t, MeanKind::Kernel, 1e-11).unwrap().exp();
            let expect = 1.0 / (1.0 - t * t);
            assert!((m - expect).abs() < 1e-9 * expect, "t={t}: {m} vs {expect}");
        }
    }

    #[test]
    fn m1_matches_direct_quadrature() {
        let k = eval(WeightSpec::standard(0.0));
        let a = Complex64::new(0.5, 0.0);
        let m = k.integral_mean_m1(a, 0.5, 1e-12).unwrap();
        let direct = trapezoid_mean(
            |th| {
                let zeta = Complex64::from_polar(0.5, th);
                k.eval(a, zeta, 1e-14).unwrap().value.norm()
            },
            256,
        );
        assert!((m - direct).abs() < 1e-10 * direct);
    }

    #[test]
    fn derivative_mean_for_unweighted_kernel() {
        // Σ (n+1)(n+2) t^n e^{inθ} = 2/(1-te^{iθ})^3
        let k = eval(WeightSpec::standard(0.0));
        let t: f64 = 0.8;
        let m = k.ln_circle_mean(t, MeanKind::Derivative, 1e-11).unwrap().exp();
        let direct = trapezoid_mean(|th| 2.0 / (1.0 - 2.0 * t * th.cos() + t * t).powf(1.5), 4096);
        assert!((m - direct).abs() < 1e-9 * direct);
    }

    #[test]
    fn stride_route_agrees_with_exact_route() {
        let k = eval(WeightSpec::exponential(2.0, 1.0, 1.0));
        let t = 1.0 - 0.02;
        let exact = k.ln_circle_mean_route(t, MeanKind::Kernel, 1e-11, Route::Exact).unwrap();
        let stride = k.ln_circle_mean_route(t, MeanKind::Kernel, 1e-11, Route::Stride).unwrap();
        assert!((exact - stride).abs() < 1e-8, "{exact} vs {stride}");
    }

    #[test]
    fn deep_exponential_mean_is_finite() {
        let k = eval(WeightSpec::exponential(2.0, 1.0, 1.0));
        let t = 1.0 - 2f64.powi(-12);
        let v = k.ln_circle_mean(t, MeanKind::Kernel, 1e-10).unwrap();
        assert!(v.is_finite() && v > 0.0);
    }

    #[test]
    fn table_interpolates_closed_form() {
        let k = eval(WeightSpec::standard(0.0));
        let tab = k.mean_table(MeanKind::Kernel, 6.0, 1.0 / 32.0, 1e-11, Execution::Parallel).unwrap();
        assert!(!tab.is_relative());
        for t in [0.1f64, 0.55, 0.9, 0.997] {
            let expect = -(1.0 - t * t).ln();
            let got = tab.ln_mean(&k, t).unwrap();
            assert!((got - expect).abs() < 1e-6, "t={t}: {got} vs {expect}");
        }
    }

    #[test]
    fn coefficient_sum_is_the_diagonal_kernel() {
        // Σ c_n t^n = B(√t, √t)
        let k = eval(WeightSpec::exponential(1.0, 1.0, 1.0));
        for t in [0.3f64, 0.9, 0.99] {
            let z = Complex64::new(t.sqrt(), 0.0);
            let direct = k.eval(z, z, 1e-14).unwrap().value.re.ln();
            let sum = k.ln_coefficient_sum(t, MeanKind::Kernel).unwrap();
            assert!((direct - sum).abs() < 1e-12 * direct.abs().max(1.0), "t={t}: {direct} vs {sum}");
        }
    }

    #[test]
    fn steep_table_is_relative_and_accurate() {
        // ln m grows like e^{2u} for this weight
        let w = WeightSpec::exponential(2.0, 2.0, 2.0);
        let k = eval(w);
        let tab = k.mean_table(MeanKind::Kernel, 7.0, 1.0 / 32.0, 1e-9, Execution::Parallel).unwrap();
        assert!(tab.is_relative());
        for u in [3.3f64, 5.01, 6.77] {
            let t = -(-u).exp_m1();
            let direct = k.ln_circle_mean(t, MeanKind::Kernel, 1e-9).unwrap();
            let got = tab.ln_mean(&k, t).unwrap();
            assert!((got - direct).abs() < 1e-6, "u={u}: {got} vs {direct}");
        }
    }
}
