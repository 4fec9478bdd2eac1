use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use super::radius::Radius;
use crate::error::{Error, Result};
use crate::numeric::interp::Pchip;

/// Which of the two standard profiles `(1-r)^a` or `(1-r^2)^a` is meant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StandardForm {
    #[default]
    OneMinusR,
    OneMinusR2,
}

/// Radial weight families.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum Family {
    /// `(1-r)^a` or `(1-r^2)^a`.
    Standard {
        a: f64,
        #[serde(default)]
        form: StandardForm,
    },
    /// `(1-r)^p (log(e/(1-r)))^q`.
    LogPerturbed { p: f64, q: f64 },
    /// `exp(-alpha / (1-r^ell)^beta)`.
    Exponential {
        alpha: f64,
        beta: f64,
        #[serde(default = "one")]
        ell: f64,
    },
    Product {
        left: Box<WeightSpec>,
        right: Box<WeightSpec>,
    },
    /// `r -> base_hat(r)^power`.
    TailOf {
        base: Box<WeightSpec>,
        #[serde(default = "one")]
        power: f64,
    },
    /// `base(r) * base_hat(r)`.
    OmegaNu { base: Box<WeightSpec> },
    /// The weight whose tail is `base_hat^{1/2}`.
    NuOmega { base: Box<WeightSpec> },
    Tabulated { table: Table },
}

fn one() -> f64 {
    1.0
}

/// A radial weight: a family and a positive scale factor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightSpec {
    #[serde(flatten)]
    pub family: Family,
    #[serde(default = "one", skip_serializing_if = "is_one")]
    pub scale: f64,
}

fn is_one(x: &f64) -> bool {
    *x == 1.0
}

impl From<Family> for WeightSpec {
    fn from(family: Family) -> Self {
        Self { family, scale: 1.0 }
    }
}

impl WeightSpec {
    pub fn standard(a: f64) -> Self {
        Family::Standard {
            a,
            form: StandardForm::OneMinusR,
        }
        .into()
    }

    pub fn standard_r2(a: f64) -> Self {
        Family::Standard {
            a,
            form: StandardForm::OneMinusR2,
        }
        .into()
    }

    pub fn log_perturbed(p: f64, q: f64) -> Self {
        Family::LogPerturbed { p, q }.into()
    }

    pub fn exponential(alpha: f64, beta: f64, ell: f64) -> Self {
        Family::Exponential { alpha, beta, ell }.into()
    }

    pub fn product(left: WeightSpec, right: WeightSpec) -> Self {
        Family::Product {
            left: Box::new(left),
            right: Box::new(right),
        }
        .into()
    }

    pub fn tail_of(base: WeightSpec, power: f64) -> Self {
        Family::TailOf {
            base: Box::new(base),
            power,
        }
        .into()
    }

    pub fn tabulated(r: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        let spec: Self = Family::Tabulated {
            table: Table::new(r, values),
        }
        .into();
        spec.validate()?;
        Ok(spec)
    }

    pub fn scaled(mut self, c: f64) -> Self {
        self.scale *= c;
        self
    }

    /// Check that every parameter is admissible for its family.
    pub fn validate(&self) -> Result<()> {
        if !(self.scale > 0.0 && self.scale.is_finite()) {
            return Err(Error::Parameter(format!("scale must be positive, got {}", self.scale)));
        }
        match &self.family {
            Family::Standard { a, .. } => finite("a", *a),
            Family::LogPerturbed { p, q } => finite("p", *p).and(finite("q", *q)),
            Family::Exponential { alpha, beta, ell } => {
                positive("alpha", *alpha)?;
                positive("beta", *beta)?;
                positive("ell", *ell)
            }
            Family::Product { left, right } => left.validate().and(right.validate()),
            Family::TailOf { base, power } => {
                finite("power", *power)?;
                base.validate()
            }
            Family::OmegaNu { base } | Family::NuOmega { base } => base.validate(),
            Family::Tabulated { table } => table.validate(),
        }
    }

    /// `ln ω(r)` (`-inf` where the weight vanishes).
    pub fn ln_density(&self, p: Radius) -> f64 {
        self.scale.ln() + self.family_ln_density(p)
    }

    fn family_ln_density(&self, p: Radius) -> f64 {
        match &self.family {
            Family::Standard { a, form } => {
                if *a == 0.0 {
                    return 0.0;
                }
                match form {
                    StandardForm::OneMinusR => a * p.ln_delta,
                    StandardForm::OneMinusR2 => a * p.ln_one_minus_r2(),
                }
            }
            Family::LogPerturbed { p: pw, q } => {
                let mut v = 0.0;
                if *pw != 0.0 {
                    v += pw * p.ln_delta;
                }
                if *q != 0.0 {
                    v += q * p.u().ln_1p();
                }
                v
            }
            Family::Exponential { alpha, beta, ell } => -alpha * (-beta * p.ln_one_minus_r_pow(*ell)).exp(),
            Family::Product { left, right } => left.ln_density(p) + right.ln_density(p),
            Family::TailOf { base, power } => {
                if *power == 0.0 {
                    return 0.0;
                }
                power * base.ln_tail(p).unwrap_or(f64::NAN)
            }
            Family::OmegaNu { base } => base.ln_density(p) + base.ln_tail(p).unwrap_or(f64::NAN),
            Family::NuOmega { base } => {
                base.ln_density(p) - std::f64::consts::LN_2 - 0.5 * base.ln_tail(p).unwrap_or(f64::NAN)
            }
            Family::Tabulated { table } => table.eval(p.r).ln(),
        }
    }

    /// `ln ω(s) - ln ω(r)` for `1 - s = (1 - r) e^{-w}`, evaluated without the
    /// cancellation a plain difference suffers when `|ln ω|` is huge.
    pub fn ln_density_rel(&self, p0: Radius, w: f64) -> f64 {
        let p = Radius::from_ln_delta(p0.ln_delta - w);
        match &self.family {
            Family::Standard {
                a,
                form: StandardForm::OneMinusR,
            } => {
                if *a == 0.0 {
                    0.0
                } else {
                    -a * w
                }
            }
            Family::LogPerturbed { p: pw, q } => {
                let mut v = 0.0;
                if *pw != 0.0 {
                    v -= pw * w;
                }
                if *q != 0.0 {
                    v += q * (w / (1.0 + p0.u())).ln_1p();
                }
                v
            }
            Family::Exponential { alpha, beta, ell } => {
                // ln(1 - r^ell) = ln δ + ln(g/δ); the second part is O(1) and smooth
                let excess = |q: Radius| {
                    if *ell == 1.0 {
                        0.0
                    } else {
                        q.ln_one_minus_r_pow(*ell) - q.ln_delta
                    }
                };
                let d = if *ell == 2.0 {
                    // ln((2-δ)/(2-δ0)) with δ0 - δ = -δ0 expm1(-w)
                    -w + (-p0.delta * (-w).exp_m1() / (2.0 - p0.delta)).ln_1p()
                } else {
                    -w + excess(p) - excess(p0)
                };
                let phi0 = alpha * (-beta * p0.ln_one_minus_r_pow(*ell)).exp();
                -phi0 * (-beta * d).exp_m1()
            }
            Family::Product { left, right } => left.ln_density_rel(p0, w) + right.ln_density_rel(p0, w),
            _ => self.family_ln_density(p) - self.family_ln_density(p0),
        }
    }

    /// True when tails are available without quadrature.
    pub fn has_closed_tail(&self) -> bool {
        match &self.family {
            Family::Standard { .. } => true,
            Family::LogPerturbed { p, q } => *p == -1.0 && *q < -1.0,
            Family::OmegaNu { base } | Family::NuOmega { base } => base.has_closed_tail(),
            Family::Tabulated { .. } => true,
            _ => false,
        }
    }

    /// Short human-readable label.
    pub fn label(&self) -> String {
        let s = match &self.family {
            Family::Standard { a, form } => match form {
                StandardForm::OneMinusR => format!("(1-r)^{a}"),
                StandardForm::OneMinusR2 => format!("(1-r^2)^{a}"),
            },
            Family::LogPerturbed { p, q } => format!("(1-r)^{p}log(e/(1-r))^{q}"),
            Family::Exponential { alpha, beta, ell } => format!("exp(-{alpha}/(1-r^{ell})^{beta})"),
            Family::Product { left, right } => format!("{}*{}", left.label(), right.label()),
            Family::TailOf { base, power } => format!("hat[{}]^{power}", base.label()),
            Family::OmegaNu { base } => format!("omega_nu[{}]", base.label()),
            Family::NuOmega { base } => format!("nu_omega[{}]", base.label()),
            Family::Tabulated { table } => format!("tabulated[{}]", table.r.len()),
        };
        if self.scale == 1.0 {
            s
        } else {
            format!("{}*{}", self.scale, s)
        }
    }
}

fn finite(name: &str, x: f64) -> Result<()> {
    if x.is_finite() {
        Ok(())
    } else {
        Err(Error::Parameter(format!("{name} must be finite, got {x}")))
    }
}

fn positive(name: &str, x: f64) -> Result<()> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(Error::Parameter(format!("{name} must be positive, got {x}")))
    }
}

/// Sampled weight, interpolated by a monotone cubic and held constant
/// outside the sampled range.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Table {
    pub r: Vec<f64>,
    pub values: Vec<f64>,
    #[serde(skip)]
    prepared: OnceLock<Prepared>,
}

#[derive(Debug, Clone)]
struct Prepared {
    interp: Pchip,
    // cum[i] = ∫_{r_i}^1 ω
    cum: Vec<f64>,
}

impl PartialEq for Table {
    fn eq(&self, other: &Self) -> bool {
        self.r == other.r && self.values == other.values
    }
}

const GL4_X: [f64; 4] = [
    -0.861_136_311_594_052_6,
    -0.339_981_043_584_856_3,
    0.339_981_043_584_856_3,
    0.861_136_311_594_052_6,
];
const GL4_W: [f64; 4] = [
    0.347_854_845_137_453_9,
    0.652_145_154_862_546_1,
    0.652_145_154_862_546_1,
    0.347_854_845_137_453_9,
];

impl Table {
    pub fn new(r: Vec<f64>, values: Vec<f64>) -> Self {
        Self {
            r,
            values,
            prepared: OnceLock::new(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.r.len() < 2 || self.r.len() != self.values.len() {
            return Err(Error::Parameter("tabulated weight needs at least two (r, value) rows".into()));
        }
        if self.r[0] < 0.0 || *self.r.last().unwrap() >= 1.0 {
            return Err(Error::Parameter("tabulated radii must lie in [0, 1)".into()));
        }
        if self.r.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Parameter("tabulated radii must be strictly increasing".into()));
        }
        if self.values.iter().any(|v| !(*v > 0.0 && v.is_finite())) {
            return Err(Error::Parameter("tabulated values must be positive and finite".into()));
        }
        Ok(())
    }

    fn prepared(&self) -> &Prepared {
        self.prepared.get_or_init(|| {
            let interp = Pchip::new(self.r.clone(), self.values.clone()).expect("validated table");
            let n = self.r.len();
            let mut cum = vec![0.0; n];
            cum[n - 1] = self.values[n - 1] * (1.0 - self.r[n - 1]);
            for i in (0..n - 1).rev() {
                cum[i] = cum[i + 1] + gl4(&interp, self.r[i], self.r[i + 1]);
            }
            Prepared { interp, cum }
        })
    }

    pub fn eval(&self, r: f64) -> f64 {
        let n = self.r.len();
        if r <= self.r[0] {
            return self.values[0];
        }
        if r >= self.r[n - 1] {
            return self.values[n - 1];
        }
        self.prepared().interp.eval(r)
    }

    pub fn tail(&self, r: f64) -> f64 {
        let prep = self.prepared();
        let n = self.r.len();
        if r >= self.r[n - 1] {
            return self.values[n - 1] * (1.0 - r);
        }
        if r < self.r[0] {
            return prep.cum[0] + self.values[0] * (self.r[0] - r);
        }
        let i = self.r.partition_point(|&x| x <= r) - 1;
        prep.cum[i + 1] + gl4(&prep.interp, r, self.r[i + 1])
    }
}

// exact for the cubic pieces
fn gl4(p: &Pchip, a: f64, b: f64) -> f64 {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    GL4_X.iter().zip(GL4_W).map(|(x, w)| w * p.eval(c + h * x)).sum::<f64>() * h
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_round_trip() {
        let s: WeightSpec = serde_json::from_str(r#"{"family":"standard","a":1.0,"form":"one_minus_r"}"#).unwrap();
        assert_eq!(s, WeightSpec::standard(1.0));
        let nested: WeightSpec =
            serde_json::from_str(r#"{"family":"omega_nu","base":{"family":"log_perturbed","p":-1,"q":-2}}"#).unwrap();
        let back: WeightSpec = serde_json::from_str(&serde_json::to_string(&nested).unwrap()).unwrap();
        assert_eq!(nested, back);
    }

    #[test]
    fn unknown_family_is_rejected() {
        assert!(serde_json::from_str::<WeightSpec>(r#"{"family":"gaussian","a":1}"#).is_err());
    }

    #[test]
    fn parameter_validation() {
        assert!(WeightSpec::exponential(-1.0, 1.0, 1.0).validate().is_err());
        assert!(WeightSpec::standard(0.5).scaled(0.0).validate().is_err());
        assert!(WeightSpec::tabulated(vec![0.0, 0.5, 0.4], vec![1.0; 3]).is_err());
    }

    #[test]
    fn relative_density_matches_difference() {
        let specs = [
            WeightSpec::standard(1.5),
            WeightSpec::standard_r2(-0.5),
            WeightSpec::log_perturbed(-1.0, -2.0),
            WeightSpec::exponential(1.0, 0.5, 1.0),
            WeightSpec::exponential(2.0, 1.0, 2.0),
            WeightSpec::product(WeightSpec::exponential(1.0, 1.0, 1.0), WeightSpec::standard(2.0)),
        ];
        for s in &specs {
            for l0 in [0.0, -0.3, -4.0] {
                let p0 = Radius::from_ln_delta(l0);
                for w in [0.0, 1e-3, 0.7, 3.0] {
                    let d = s.ln_density(Radius::from_ln_delta(l0 - w)) - s.ln_density(p0);
                    let r = s.ln_density_rel(p0, w);
                    assert!((d - r).abs() < 1e-11 * (1.0 + d.abs()), "{}: {d} vs {r}", s.label());
                }
            }
        }
    }

    #[test]
    fn tabulated_linear_tail_is_exact() {
        // ω = 1 - r sampled exactly; Pchip reproduces linear data.
        let r: Vec<f64> = (0..10).map(|i| i as f64 * 0.1).collect();
        let v: Vec<f64> = r.iter().map(|x| 1.0 - x).collect();
        let t = Table::new(r, v);
        t.validate().unwrap();
        // held constant 0.1 beyond r = 0.9
        let exact = |x: f64| (0.9 - x).powi(2) / 2.0 + 0.1 * (0.9 - x) + 0.01;
        for x in [0.0, 0.33, 0.71] {
            assert!((t.tail(x) - exact(x)).abs() < 1e-14);
        }
    }
}
