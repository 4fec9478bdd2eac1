use crate::error::{Error, Result};

/// A point of `[0, 1)` carried together with `1 - r` and `ln(1 - r)`, so that
/// radii within `1e-300` of the boundary keep full relative precision.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Radius {
    pub r: f64,
    pub delta: f64,
    pub ln_delta: f64,
}

impl Radius {
    pub fn new(r: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&r) {
            return Err(Error::Domain(r));
        }
        Ok(Self {
            r,
            delta: 1.0 - r,
            ln_delta: (-r).ln_1p(),
        })
    }

    /// The radius `1 - delta`, `delta ∈ (0, 1]`.
    pub fn from_delta(delta: f64) -> Result<Self> {
        if !(delta > 0.0 && delta <= 1.0) {
            return Err(Error::Domain(1.0 - delta));
        }
        Ok(Self {
            r: 1.0 - delta,
            delta,
            ln_delta: delta.ln(),
        })
    }

    /// The radius with `ln(1 - r) = l`, `l <= 0`.
    pub fn from_ln_delta(l: f64) -> Self {
        debug_assert!(l <= 0.0);
        Self {
            r: -l.exp_m1(),
            delta: l.exp(),
            ln_delta: l,
        }
    }

    /// `u = -ln(1 - r)`.
    pub fn from_u(u: f64) -> Self {
        Self::from_ln_delta(-u)
    }

    /// `r = 1 - 2^{-n}`.
    pub fn dyadic(n: f64) -> Self {
        Self::from_ln_delta(-n * std::f64::consts::LN_2)
    }

    pub fn u(&self) -> f64 {
        -self.ln_delta
    }

    /// `ln(1 - r^2)`.
    pub fn ln_one_minus_r2(&self) -> f64 {
        self.ln_delta + (2.0 - self.delta).ln()
    }

    /// `ln(1 - r^ell)`, accurate near both ends.
    pub fn ln_one_minus_r_pow(&self, ell: f64) -> f64 {
        if ell == 1.0 {
            return self.ln_delta;
        }
        if self.r == 0.0 {
            return 0.0;
        }
        let x = (ell * (-self.delta).ln_1p()).exp_m1();
        (-x).ln()
    }

    /// `(1 + r) / 2`.
    pub fn midpoint_to_rim(&self) -> Self {
        Self::from_ln_delta(self.ln_delta - std::f64::consts::LN_2)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn near_boundary_keeps_delta() {
        let p = Radius::dyadic(60.0);
        assert_eq!(p.r, 1.0);
        assert!((p.delta - 2f64.powi(-60)).abs() < 1e-30);
        assert!((p.ln_one_minus_r_pow(2.0) - (p.ln_delta + 2f64.ln())).abs() < 1e-12);
    }

    #[test]
    fn rejects_outside_unit_interval() {
        assert!(Radius::new(1.0).is_err());
        assert!(Radius::new(-0.1).is_err());
        assert!((Radius::new(0.25).unwrap().u() - (4.0f64 / 3.0).ln()).abs() < 1e-15);
    }
}
