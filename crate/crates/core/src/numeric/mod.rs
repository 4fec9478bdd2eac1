//! Numerical building blocks: quadrature, log-domain integration, Gauss
//! rules, compensated sums, Chebyshev and monotone interpolation, and small
//! regression helpers.

pub mod cheb;
pub mod fit;
pub mod interp;
pub mod legendre;
pub mod lnint;
pub mod quad;
pub mod sum;

pub use lnint::{integrate_ln, integrate_ln_fallback, LnIntegral, LnQuadOptions};
pub use quad::{QuadOptions, QuadResult};
pub use sum::Neumaier;

/// `ln(exp(a) + exp(b))` without overflow.
pub fn ln_add(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a > b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}
