use std::cell::RefCell;

use super::radius::Radius;
use super::spec::{Family, WeightSpec};
use super::tail::TAIL_TOL;
use crate::error::{Error, Result};
use crate::numeric::{integrate_ln, LnQuadOptions};

/// `ω_ν = ν ν̂`, whose tail is `ν̂²/2`.
pub fn make_omega_nu(nu: &WeightSpec) -> WeightSpec {
    Family::OmegaNu { base: Box::new(nu.clone()) }.into()
}

/// The weight with tail `ω̂^{1/2}`; its density is `ω / (2 ω̂^{1/2})`.
pub fn make_nu_omega(omega: &WeightSpec) -> WeightSpec {
    Family::NuOmega {
        base: Box::new(omega.clone()),
    }
    .into()
}

/// The weight `ω/ν̂`, simplified when `ω = c·ν ν̂`.
pub fn omega_over_nu_hat(omega: &WeightSpec, nu: &WeightSpec) -> WeightSpec {
    if let Family::OmegaNu { base } = &omega.family {
        if base.family == nu.family {
            return nu.clone().scaled(omega.scale * base.scale * base.scale / (nu.scale * nu.scale));
        }
    }
    WeightSpec::product(omega.clone(), WeightSpec::tail_of(nu.clone(), -1.0))
}

/// `ln ∫_r^1 ω/ν̂`. A non-integrable quotient yields [`Error::Divergent`].
pub fn ln_mixed_tail(omega: &WeightSpec, nu: &WeightSpec, p: Radius) -> Result<f64> {
    if let Family::OmegaNu { base } = &omega.family {
        if base.family == nu.family {
            let c = omega.scale * base.scale / nu.scale;
            return Ok(c.ln() + base.ln_tail(p)?);
        }
    }
    mixed_integral(omega, nu, p, f64::INFINITY)
}

pub fn mixed_tail(omega: &WeightSpec, nu: &WeightSpec, r: f64) -> Result<f64> {
    Ok(ln_mixed_tail(omega, nu, Radius::new(r)?)?.exp())
}

/// Partial integrals `∫_r^{1-2^{-k}} ω/ν̂` for each `k` in `levels`
/// (levels with `1-2^{-k} <= r` give zero).
pub fn mixed_tail_profile(omega: &WeightSpec, nu: &WeightSpec, p: Radius, levels: &[u32]) -> Result<Vec<f64>> {
    levels
        .iter()
        .map(|&k| {
            let w_max = k as f64 * std::f64::consts::LN_2 + p.ln_delta;
            if w_max <= 0.0 {
                return Ok(0.0);
            }
            mixed_integral(omega, nu, p, w_max).map(f64::exp)
        })
        .collect()
}

// s = 1 - δ e^{-w}
fn mixed_integral(omega: &WeightSpec, nu: &WeightSpec, p: Radius, w_max: f64) -> Result<f64> {
    let failure: RefCell<Option<Error>> = RefCell::new(None);
    let f = |w: f64| {
        let s = Radius::from_ln_delta(p.ln_delta - w);
        match nu.ln_tail(s) {
            Ok(t) => omega.ln_density(s) - t - w,
            Err(e) => {
                failure.borrow_mut().get_or_insert(e);
                f64::NEG_INFINITY
            }
        }
    };
    let opts = LnQuadOptions {
        rel_tol: TAIL_TOL,
        ..Default::default()
    };
    let r = integrate_ln(&f, 0.0, w_max, &opts);
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    Ok(p.ln_delta + r?.ln_value)
}
