use statrs::function::beta::{beta_reg, ln_beta};

use super::radius::Radius;
use super::spec::{Family, StandardForm, WeightSpec};
use crate::error::{Error, Result};
use crate::numeric::{integrate_ln_fallback, LnQuadOptions};

/// Relative tolerance for single-layer tail and moment quadratures.
pub const TAIL_TOL: f64 = 1e-12;

/// Accuracy accepted when [`TAIL_TOL`] is below the integrand's own rounding
/// noise (phases with `|ln ω|` in the 1e10 range).
pub const FALLBACK_TOL: f64 = 1e-8;

/// How a tail value was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    ClosedForm,
    Quadrature,
}

/// `ω̂(r)` in logarithmic form, with its provenance and error estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailEstimate {
    pub ln_value: f64,
    pub rel_err: f64,
    pub method: Method,
}

impl WeightSpec {
    /// `ln ω̂(r)`.
    pub fn ln_tail(&self, p: Radius) -> Result<f64> {
        self.tail_estimate(p).map(|t| t.ln_value)
    }

    pub fn tail_estimate(&self, p: Radius) -> Result<TailEstimate> {
        if let Some(v) = self.closed_ln_tail(p)? {
            return Ok(TailEstimate {
                ln_value: v,
                rel_err: 1e-15 * (1.0 + v.abs()),
                method: Method::ClosedForm,
            });
        }
        self.quadrature_ln_tail(p, TAIL_TOL)
    }

    /// `ln ω̂(r)` by quadrature regardless of closed forms.
    pub fn quadrature_ln_tail(&self, p: Radius, tol: f64) -> Result<TailEstimate> {
        // s = 1 - δ e^{-w}, ds = δ e^{-w} dw
        let base = self.ln_density(p);
        let rel = base.is_finite();
        let f = |w: f64| {
            if rel {
                self.ln_density_rel(p, w) - w
            } else {
                self.ln_density(Radius::from_ln_delta(p.ln_delta - w)) - w
            }
        };
        let opts = LnQuadOptions {
            rel_tol: tol,
            ..Default::default()
        };
        let r = integrate_ln_fallback(&f, 0.0, f64::INFINITY, &opts, FALLBACK_TOL)?;
        if r.ln_value == f64::NEG_INFINITY {
            return Err(Error::Underflow(p.r));
        }
        Ok(TailEstimate {
            ln_value: p.ln_delta + r.ln_value + if rel { base } else { 0.0 },
            rel_err: r.rel_err,
            method: Method::Quadrature,
        })
    }

    fn closed_ln_tail(&self, p: Radius) -> Result<Option<f64>> {
        let ls = self.scale.ln();
        let v = match &self.family {
            Family::Standard { a, form } => {
                if *a <= -1.0 {
                    return Err(Error::Divergent(format!("(1-r)^{a} is not integrable at r = 1")));
                }
                match form {
                    StandardForm::OneMinusR => (a + 1.0) * p.ln_delta - (a + 1.0).ln(),
                    StandardForm::OneMinusR2 => ln_tail_one_minus_r2(*a, p),
                }
            }
            Family::LogPerturbed { p: pw, q } if *pw == -1.0 => {
                if *q >= -1.0 {
                    return Err(Error::Divergent(format!("log-perturbed weight with q = {q} has infinite mass")));
                }
                // ∫_{1+u}^∞ v^q dv
                (q + 1.0) * p.u().ln_1p() - (-q - 1.0).ln()
            }
            Family::OmegaNu { base } => 2.0 * base.ln_tail(p)? - std::f64::consts::LN_2,
            Family::NuOmega { base } => 0.5 * base.ln_tail(p)?,
            Family::Tabulated { table } => table.tail(p.r).ln(),
            _ => return Ok(None),
        };
        Ok(Some(ls + v))
    }

    /// `ω̂(r)`.
    pub fn tail(&self, r: f64) -> Result<f64> {
        Ok(self.ln_tail(Radius::new(r)?)?.exp())
    }
}

// ∫_r^1 (1-s^2)^a ds = ½ B(a+1, ½) I_{1-r²}(a+1, ½)
fn ln_tail_one_minus_r2(a: f64, p: Radius) -> f64 {
    let x = p.delta * (2.0 - p.delta);
    let lb = ln_beta(a + 1.0, 0.5);
    let ln_reg = if x > 0.5 {
        // complement avoids cancellation in I near 1
        (-beta_reg(0.5, a + 1.0, p.r * p.r)).ln_1p()
    } else {
        beta_reg(a + 1.0, 0.5, x).ln()
    };
    if ln_reg.is_finite() {
        lb + ln_reg - std::f64::consts::LN_2
    } else {
        // below the incomplete-beta range: leading term of the series in x
        (a + 1.0) * p.ln_one_minus_r2() - (a + 1.0).ln() - std::f64::consts::LN_2
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_forms_match_quadrature() {
        let specs = [
            WeightSpec::standard(0.0),
            WeightSpec::standard(1.0),
            WeightSpec::standard(-0.5),
            WeightSpec::standard_r2(2.0),
            WeightSpec::standard_r2(-0.3),
            WeightSpec::log_perturbed(-1.0, -2.0),
            WeightSpec::log_perturbed(-1.0, -3.5).scaled(2.0),
        ];
        for s in &specs {
            for n in [0.0, 0.5, 3.0, 17.0, 38.0] {
                let p = Radius::dyadic(n);
                let c = s.ln_tail(p).unwrap();
                let q = s.quadrature_ln_tail(p, 1e-12).unwrap().ln_value;
                assert!((c - q).abs() < 1e-9 * (1.0 + c.abs()), "{} at n={n}: {c} vs {q}", s.label());
            }
        }
    }

    #[test]
    fn oracle_values() {
        assert!((WeightSpec::standard(0.0).tail(0.5).unwrap() - 0.5).abs() < 1e-15);
        assert!((WeightSpec::standard(1.0).tail(0.5).unwrap() - 0.125).abs() < 1e-15);
        let t = WeightSpec::log_perturbed(-1.0, -2.0).ln_tail(Radius::dyadic(3.0)).unwrap().exp();
        assert!((t - 1.0 / (1.0 + 3.0 * 2f64.ln())).abs() < 1e-14);
    }

    #[test]
    fn non_integrable_is_reported() {
        assert!(matches!(
            WeightSpec::standard(-1.0).tail(0.2),
            Err(Error::Divergent(_))
        ));
    }
}
