//! Integration of `exp(f(w))` for log-integrands whose values span many
//! orders of magnitude. The peak is located first, the integrand is rescaled
//! by it, and the domain is split into geometrically growing panels on each
//! side, so both sharp peaks and slowly decaying tails are resolved.

use super::quad::{adaptive, QuadOptions, QuadResult};
use crate::error::{Error, Result};

// Growth over doubling panels narrower than this is treated as a shoulder of
// the peak, not as divergence.
const MIN_DIVERGENT_WIDTH: f64 = 1e3;

#[derive(Debug, Clone, Copy)]
pub struct LnQuadOptions {
    pub rel_tol: f64,
    pub max_evals: usize,
    /// Panels per side before a tail is declared unresolved.
    pub max_panels: usize,
    /// Accept a panel estimate that missed the tolerance (its error estimate
    /// is still reported). For integrands whose own rounding noise exceeds
    /// the tolerance.
    pub lenient: bool,
}

impl Default for LnQuadOptions {
    fn default() -> Self {
        Self {
            rel_tol: 1e-10,
            max_evals: 400_000,
            max_panels: 160,
            lenient: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LnIntegral {
    pub ln_value: f64,
    pub rel_err: f64,
    /// Location of the integrand maximum.
    pub peak: f64,
    pub evals: usize,
}

impl LnIntegral {
    pub fn value(&self) -> f64 {
        self.ln_value.exp()
    }
}

/// [`integrate_ln`], retried leniently after a budget failure; the lenient
/// result is accepted when its relative error is at most `accept`.
pub fn integrate_ln_fallback<F: Fn(f64) -> f64>(
    f: &F,
    lo: f64,
    hi: f64,
    opts: &LnQuadOptions,
    accept: f64,
) -> Result<LnIntegral> {
    match integrate_ln(f, lo, hi, opts) {
        Err(e @ Error::QuadratureFailure { .. }) => {
            let lenient = LnQuadOptions { lenient: true, ..*opts };
            match integrate_ln(f, lo, hi, &lenient) {
                Ok(r) if r.rel_err <= accept => Ok(r),
                _ => Err(e),
            }
        }
        r => r,
    }
}

/// `ln ∫_lo^hi exp(f(w)) dw`. Either bound may be infinite.
pub fn integrate_ln<F: Fn(f64) -> f64>(f: &F, lo: f64, hi: f64, opts: &LnQuadOptions) -> Result<LnIntegral> {
    if !(hi > lo) {
        return Ok(LnIntegral {
            ln_value: f64::NEG_INFINITY,
            rel_err: 0.0,
            peak: lo,
            evals: 0,
        });
    }
    let g = |w: f64| {
        let v = f(w);
        if v.is_nan() {
            f64::NEG_INFINITY
        } else {
            v
        }
    };
    let (peak, fmax, mut evals) = locate_peak(&g, lo, hi);
    if fmax == f64::INFINITY {
        return Err(Error::Divergent(format!("integrand overflows near w = {peak}")));
    }
    if fmax == f64::NEG_INFINITY {
        return Ok(LnIntegral {
            ln_value: f64::NEG_INFINITY,
            rel_err: 0.0,
            peak,
            evals,
        });
    }
    let scale = {
        let (sr, er) = drop_scale(&g, peak, fmax, hi, 1.0);
        let (sl, el) = drop_scale(&g, peak, fmax, lo, -1.0);
        evals += er + el;
        match (sr, sl) {
            (Some(a), Some(b)) => a.min(b),
            (Some(a), None) | (None, Some(a)) => a,
            (None, None) => ((hi - lo).min(1.0)).max(f64::EPSILON * peak.abs()),
        }
    };
    let h = |w: f64| (g(w) - fmax).exp();
    let mut total = 0.0;
    let mut err = 0.0;
    for dir in [1.0, -1.0] {
        let end = if dir > 0.0 { hi } else { lo };
        let (t, e, n) = integrate_side(&h, peak, end, dir, scale, total, opts, evals)?;
        total += t;
        err += e;
        evals = n;
    }
    if !(total > 0.0) {
        return Ok(LnIntegral {
            ln_value: f64::NEG_INFINITY,
            rel_err: 0.0,
            peak,
            evals,
        });
    }
    Ok(LnIntegral {
        ln_value: fmax + total.ln(),
        rel_err: err / total,
        peak,
        evals,
    })
}

fn locate_peak<G: Fn(f64) -> f64>(g: &G, lo: f64, hi: f64) -> (f64, f64, usize) {
    let mut cand: Vec<f64> = Vec::with_capacity(128);
    let width = hi - lo;
    if lo.is_finite() {
        cand.push(lo);
        for k in -40..=60 {
            let w = lo + 2f64.powi(k);
            if w < hi && (k <= 12 || !hi.is_finite()) {
                cand.push(w);
            }
        }
    }
    if hi.is_finite() {
        cand.push(hi);
        for k in -40..=60 {
            let w = hi - 2f64.powi(k);
            if w > lo && (k <= 12 || !lo.is_finite()) {
                cand.push(w);
            }
        }
    }
    if !lo.is_finite() && !hi.is_finite() {
        cand.push(0.0);
        for k in -10..=60 {
            cand.push(2f64.powi(k));
            cand.push(-(2f64.powi(k)));
        }
    }
    if width.is_finite() {
        for i in 1..64 {
            cand.push(lo + width * i as f64 / 64.0);
        }
    }
    cand.sort_by(f64::total_cmp);
    cand.dedup();
    let vals: Vec<f64> = cand.iter().map(|&w| g(w)).collect();
    let mut evals = vals.len();
    let vmax = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    // on a plateau the arg max is rounding noise, which grows like eps·|w|;
    // take the first near-maximal candidate instead
    let ib = if vmax.is_finite() {
        let at = cand[vals.iter().position(|&v| v == vmax).unwrap_or(0)];
        let near = vmax - 16.0 * f64::EPSILON * (1.0 + vmax.abs()) - 1e-12 * at.abs();
        vals.iter().position(|&v| v >= near).unwrap_or(0)
    } else {
        vals.iter().position(|&v| v == vmax).unwrap_or(0)
    };
    if vals[ib] == f64::NEG_INFINITY || vals[ib] == f64::INFINITY {
        return (cand[ib], vals[ib], evals);
    }
    // golden section between the bracketing candidates
    let mut a = cand[ib.saturating_sub(1)];
    let mut b = cand[(ib + 1).min(cand.len() - 1)];
    let mut best = (cand[ib], vals[ib]);
    let phi = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = b - phi * (b - a);
    let mut x2 = a + phi * (b - a);
    let mut f1 = g(x1);
    let mut f2 = g(x2);
    evals += 2;
    for _ in 0..200 {
        if (b - a).abs() <= 1e-12 * (1.0 + best.0.abs()) {
            break;
        }
        if f1 > f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - phi * (b - a);
            f1 = g(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + phi * (b - a);
            f2 = g(x2);
        }
        evals += 1;
        for (x, v) in [(x1, f1), (x2, f2)] {
            if v > best.1 {
                best = (x, v);
            }
        }
    }
    // normalize by the largest value seen so the rescaled integrand stays <= 1
    (best.0, best.1.max(vmax), evals)
}

// Smallest power-of-two offset from the peak at which g drops by one unit
// beyond its rounding noise.
fn drop_scale<G: Fn(f64) -> f64>(g: &G, peak: f64, fmax: f64, end: f64, dir: f64) -> (Option<f64>, usize) {
    if (end - peak) * dir <= 0.0 {
        return (None, 0);
    }
    let mut evals = 0;
    let floor = f64::EPSILON * 4.0 * (1.0 + peak.abs());
    for k in -52..=62 {
        let s = 2f64.powi(k);
        if s < floor {
            continue;
        }
        let w = peak + dir * s;
        if (w - end) * dir >= 0.0 {
            return (Some((end - peak).abs()), evals);
        }
        evals += 1;
        if g(w) < fmax - 1.0 - 1e-12 * w.abs() {
            return (Some(s), evals);
        }
    }
    // no drop anywhere: a plateau, left to the unit-scale fallback
    (None, evals)
}

#[allow(clippy::too_many_arguments)]
fn integrate_side<H: Fn(f64) -> f64>(
    h: &H,
    peak: f64,
    end: f64,
    dir: f64,
    scale: f64,
    prior: f64,
    opts: &LnQuadOptions,
    mut evals: usize,
) -> Result<(f64, f64, usize)> {
    if (end - peak) * dir <= 0.0 {
        return Ok((0.0, 0.0, evals));
    }
    let mut total = 0.0;
    let mut err = 0.0;
    let mut contrib: Vec<f64> = Vec::new();
    let mut a = peak;
    let mut width = scale;
    for panel in 0..opts.max_panels {
        let mut b = a + dir * width;
        let last = (b - end) * dir >= 0.0;
        if last {
            b = end;
        }
        let (lo, hi) = if dir > 0.0 { (a, b) } else { (b, a) };
        let q = QuadOptions {
            rel_tol: opts.rel_tol,
            abs_tol: 0.1 * opts.rel_tol * (prior + total),
            max_evals: if opts.lenient {
                1_500
            } else {
                opts.max_evals.saturating_sub(evals).max(60)
            },
        };
        let r = match adaptive(h, &[lo, hi], &q) {
            Err(Error::QuadratureFailure {
                estimate, error, evals, ..
            }) if opts.lenient => QuadResult {
                value: estimate,
                error,
                evals,
            },
            r => r?,
        };
        evals += r.evals;
        total += r.value;
        err += r.error;
        contrib.push(r.value);
        if last {
            return Ok((total, err, evals));
        }
        let grand = prior + total;
        if r.value <= 1e-3 * opts.rel_tol * grand && h(b) <= 1e-3 * opts.rel_tol {
            return Ok((total, err, evals));
        }
        if panel >= 8 && end.is_infinite() {
            let n = contrib.len();
            let ratios: Vec<f64> = (n - 8..n).map(|i| contrib[i] / contrib[i - 1]).collect();
            if width >= MIN_DIVERGENT_WIDTH && ratios.iter().all(|&q| q >= 1.0 - 1e-9) {
                return Err(Error::Divergent(format!(
                    "panel contributions do not decay (ratio {:.4})",
                    ratios[7]
                )));
            }
            let qmin = ratios.iter().cloned().fold(f64::INFINITY, f64::min);
            let qmax = ratios.iter().cloned().fold(0.0, f64::max);
            if qmax < 1.0 && qmax - qmin <= 0.02 * qmax {
                let q = ratios[7];
                let rest = r.value * q / (1.0 - q);
                if rest <= opts.rel_tol * grand || panel + 1 == opts.max_panels {
                    total += rest;
                    err += rest * (qmax - qmin) / (1.0 - qmax);
                    return Ok((total, err, evals));
                }
            }
        }
        if evals >= opts.max_evals {
            break;
        }
        a = b;
        if panel >= 1 {
            width *= 2.0;
        }
    }
    Err(Error::QuadratureFailure {
        tol: opts.rel_tol,
        estimate: total,
        error: err,
        evals,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn opts() -> LnQuadOptions {
        LnQuadOptions::default()
    }

    #[test]
    fn gaussian_far_from_origin() {
        // ∫ exp(-(w-500)^2 / 2) dw = sqrt(2π)
        let r = integrate_ln(&|w: f64| -0.5 * (w - 500.0).powi(2), 0.0, f64::INFINITY, &opts()).unwrap();
        assert!((r.ln_value - (2.0 * std::f64::consts::PI).sqrt().ln()).abs() < 1e-10);
        assert!((r.peak - 500.0).abs() < 1e-5);
    }

    #[test]
    fn huge_log_scale() {
        // ∫_0^∞ w^x e^{-w} dw = Γ(x+1), x = 2000
        let x = 2000.0;
        let r = integrate_ln(&|w: f64| x * w.ln() - w, 0.0, f64::INFINITY, &opts()).unwrap();
        let exact = statrs::function::gamma::ln_gamma(x + 1.0);
        assert!((r.ln_value - exact).abs() < 1e-9 * exact);
    }

    #[test]
    fn slow_power_tail() {
        // ∫_1^∞ w^{-1.05} dw = 20
        let r = integrate_ln(&|w: f64| -1.05 * w.ln(), 1.0, f64::INFINITY, &opts()).unwrap();
        assert!((r.value() - 20.0).abs() < 1e-6 * 20.0, "{}", r.value());
    }

    #[test]
    fn flat_tail_diverges() {
        let r = integrate_ln(&|w: f64| -1.0 / (1.0 + w), 0.0, f64::INFINITY, &opts());
        assert!(matches!(r, Err(Error::Divergent(_))));
    }

    #[test]
    fn growing_panels_on_finite_side_are_not_divergence() {
        // sharp drop near 0 followed by a long plateau: ∫_0^1 w^{0.02} dw
        let r = integrate_ln(&|w: f64| 0.02 * w.ln(), 0.0, 1.0, &opts()).unwrap();
        assert!((r.value() - 1.0 / 1.02).abs() < 1e-10);
    }

    #[test]
    fn finite_interval_with_endpoint_peak() {
        // ∫_0^1 e^{-50 w} dw
        let r = integrate_ln(&|w: f64| -50.0 * w, 0.0, 1.0, &opts()).unwrap();
        let exact = (1.0 - (-50f64).exp()) / 50.0;
        assert!((r.value() - exact).abs() < 1e-12);
    }
}
