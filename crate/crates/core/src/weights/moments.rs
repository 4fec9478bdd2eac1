use std::sync::OnceLock;

use serde::Serialize;
use statrs::function::gamma::ln_gamma;

use super::radius::Radius;
use super::spec::{Family, StandardForm, WeightSpec};
use super::tail::{Method, FALLBACK_TOL, TAIL_TOL};
use crate::error::{Error, Result};
use crate::numeric::cheb::Chebyshev;
use crate::numeric::{integrate_ln_fallback, LnQuadOptions};

impl WeightSpec {
    /// `ln ω_x`, `x >= 0`.
    pub fn ln_moment(&self, x: f64) -> Result<f64> {
        if !(x >= 0.0) {
            return Err(Error::Parameter(format!("moment exponent must be >= 0, got {x}")));
        }
        match self.closed_ln_moment(x)? {
            Some(v) => Ok(v),
            None => self.quadrature_ln_moment(x, TAIL_TOL).map(|(v, _)| v),
        }
    }

    /// `ω_x`; an error instead of a silent zero when it leaves the f64 range.
    pub fn moment(&self, x: f64) -> Result<f64> {
        let l = self.ln_moment(x)?;
        let v = l.exp();
        if v == 0.0 || !v.is_normal() && v < 1.0 {
            return Err(Error::Underflow(l));
        }
        if v.is_infinite() {
            return Err(Error::Overflow(l));
        }
        Ok(v)
    }

    pub fn has_closed_moment(&self) -> bool {
        matches!(self.family, Family::Standard { .. })
    }

    fn closed_ln_moment(&self, x: f64) -> Result<Option<f64>> {
        let Family::Standard { a, form } = &self.family else {
            return Ok(None);
        };
        if *a <= -1.0 {
            return Err(Error::Divergent(format!("(1-r)^{a} is not integrable at r = 1")));
        }
        // B(y+c, a+1) = Γ(a+1) Γ(y+c) / Γ(y+c+a+1)
        let v = match form {
            StandardForm::OneMinusR => ln_gamma(a + 1.0) + ln_gamma_ratio(x, 1.0, a + 2.0),
            StandardForm::OneMinusR2 => {
                ln_gamma(a + 1.0) + ln_gamma_ratio(0.5 * x, 0.5, a + 1.5) - std::f64::consts::LN_2
            }
        };
        Ok(Some(self.scale.ln() + v))
    }

    /// `(ln ω_x, relative error)` by quadrature in `u = -ln(1-r)`.
    pub fn quadrature_ln_moment(&self, x: f64, tol: f64) -> Result<(f64, f64)> {
        let f = |u: f64| {
            let p = Radius::from_u(u);
            let lr = if x == 0.0 { 0.0 } else { x * (-p.delta).ln_1p() };
            lr + self.ln_density(p) - u
        };
        let opts = LnQuadOptions {
            rel_tol: tol,
            ..Default::default()
        };
        let u0 = coarse_peak(&f);
        let p0 = Radius::from_u(u0);
        let x_part = x * (-p0.delta).ln_1p();
        if x_part.abs() > 1e3 {
            // both x ln r and ln ω are huge at the peak; integrate relative to it
            let g = |w: f64| {
                let gain = -p0.delta * (-w).exp_m1() / (1.0 - p0.delta);
                x * gain.ln_1p() + self.ln_density_rel(p0, w) - w
            };
            let r = integrate_ln_fallback(&g, -u0, f64::INFINITY, &opts, FALLBACK_TOL)?;
            return Ok((x_part + self.ln_density(p0) - u0 + r.ln_value, r.rel_err));
        }
        let r = integrate_ln_fallback(&f, 0.0, f64::INFINITY, &opts, FALLBACK_TOL)?;
        if r.ln_value == f64::NEG_INFINITY {
            return Err(Error::Underflow(f64::NEG_INFINITY));
        }
        Ok((r.ln_value, r.rel_err))
    }
}

/// Approximate maximizer of `f` on `[0, 200]`.
fn coarse_peak<F: Fn(f64) -> f64>(f: &F) -> f64 {
    let (mut best, mut fb) = (0.0, f(0.0));
    let mut u = 0.25;
    while u <= 200.0 {
        let v = f(u);
        if v > fb {
            (best, fb) = (u, v);
        }
        u += 0.25;
    }
    // golden-section refinement inside the neighboring cells
    let (mut a, mut b) = ((best - 0.25f64).max(0.0), best + 0.25);
    let g = 0.5 * (5f64.sqrt() - 1.0);
    for _ in 0..40 {
        let (c, d) = (b - g * (b - a), a + g * (b - a));
        if f(c) > f(d) {
            b = d;
        } else {
            a = c;
        }
    }
    0.5 * (a + b)
}

/// `ln Γ(y+c) - ln Γ(y+d)` without cancellation for large `y`.
pub(crate) fn ln_gamma_ratio(y: f64, c: f64, d: f64) -> f64 {
    let (zc, zd) = (y + c, y + d);
    if zc.min(zd) < 12.0 {
        return ln_gamma(zc) - ln_gamma(zd);
    }
    // Stirling: ln Γ(z) = (z-½)ln z - z + ½ln 2π + Σ B_2k / (2k(2k-1) z^{2k-1})
    const S: [f64; 6] = [
        1.0 / 12.0,
        -1.0 / 360.0,
        1.0 / 1260.0,
        -1.0 / 1680.0,
        1.0 / 1188.0,
        -691.0 / 360360.0,
    ];
    let series = |z: f64| {
        let z2 = 1.0 / (z * z);
        let mut p = 1.0 / z;
        let mut s = 0.0;
        for c in S {
            s += c * p;
            p *= z2;
        }
        s
    };
    (zc - 0.5) * ((c - d) / zd).ln_1p() + (c - d) * zd.ln() - (c - d) + series(zc) - series(zd)
}

const SEGMENT_DEGREE: usize = 24;

/// Cached `ln ω_x` over `x ∈ [0, x_max]`. Closed-form families are evaluated
/// directly; the others through piecewise Chebyshev interpolants in
/// `y = ln(1 + x)` on unit segments, each built on first use.
#[derive(Debug)]
pub struct MomentTable {
    spec: WeightSpec,
    x_max: f64,
    segments: Vec<OnceLock<Result<Segment>>>,
}

#[derive(Debug, Clone)]
struct Segment {
    cheb: Chebyshev,
    // |interpolant - quadrature| at the segment midpoint, in ln units
    check: f64,
}

/// Accuracy metadata for one table segment.
#[derive(Debug, Clone, Serialize)]
pub struct SegmentInfo {
    pub x_lo: f64,
    pub x_hi: f64,
    pub ln_error: f64,
}

impl MomentTable {
    pub fn new(spec: WeightSpec, x_max: f64) -> Self {
        let n = (x_max.ln_1p().ceil() as usize).max(1);
        Self {
            spec,
            x_max,
            segments: (0..n).map(|_| OnceLock::new()).collect(),
        }
    }

    pub fn spec(&self) -> &WeightSpec {
        &self.spec
    }

    pub fn x_max(&self) -> f64 {
        self.x_max
    }

    pub fn method(&self) -> Method {
        if self.spec.has_closed_moment() {
            Method::ClosedForm
        } else {
            Method::Quadrature
        }
    }

    pub fn ln_moment(&self, x: f64) -> Result<f64> {
        if self.spec.has_closed_moment() || x > self.x_max {
            return self.spec.ln_moment(x);
        }
        if !(x >= 0.0) {
            return Err(Error::Parameter(format!("moment exponent must be >= 0, got {x}")));
        }
        let y = x.ln_1p();
        let k = (y.floor() as usize).min(self.segments.len() - 1);
        let seg = self.segments[k].get_or_init(|| self.build(k)).as_ref().map_err(Clone::clone)?;
        Ok(seg.cheb.eval(y))
    }

    fn build(&self, k: usize) -> Result<Segment> {
        let (a, b) = (k as f64, k as f64 + 1.0);
        let nodes = Chebyshev::nodes(a, b, SEGMENT_DEGREE);
        let vals = nodes
            .iter()
            .map(|y| self.spec.quadrature_ln_moment(y.exp_m1(), TAIL_TOL).map(|(v, _)| v))
            .collect::<Result<Vec<_>>>()?;
        let cheb = Chebyshev::from_values(&vals, a, b);
        let mid = (k as f64 + 0.5).exp_m1();
        let (exact, _) = self.spec.quadrature_ln_moment(mid, TAIL_TOL)?;
        Ok(Segment {
            check: (cheb.eval(mid.ln_1p()) - exact).abs(),
            cheb,
        })
    }

    /// Accuracy of the segments built so far.
    pub fn segment_info(&self) -> Vec<SegmentInfo> {
        self.segments
            .iter()
            .enumerate()
            .filter_map(|(k, s)| {
                let seg = s.get()?.as_ref().ok()?;
                Some(SegmentInfo {
                    x_lo: (k as f64).exp_m1(),
                    x_hi: (k as f64 + 1.0).exp_m1(),
                    ln_error: seg.check,
                })
            })
            .collect()
    }
}
