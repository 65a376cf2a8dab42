//! Nonlinearities f for the right-hand side `lambda(x) f(u) + h(x)`.
//!
//! A [`Nonlinearity`] bundles the evaluator with the analytic metadata the
//! iteration schemes and hypothesis checks consume: an optional derivative,
//! the continuity class, monotonicity and sign flags, and growth data
//! `f(s) <= K s^p` when available.
//!
//! The built-in catalog covers the exponential (Bratu), the squared
//! exponential (conformal deformation), powers `u^p`, and the staircase
//! step function `x -> l^p` on `l/10 < x <= (l+1)/10`.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

pub type Evaluator = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Continuity class of a nonlinearity, as used by the scheme preconditions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ContinuityClass {
    Differentiable,
    /// Hoelder continuous with exponent `alpha` in (0,1) and seminorm bound
    /// `[f]_alpha`, i.e. |f(x) - f(y)| <= seminorm * |x - y|^alpha.
    Holder { alpha: f64, seminorm: f64 },
    LowerSemicontinuous,
}

/// Growth bound `f(s) <= coefficient * s^exponent` for s >= 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GrowthData {
    pub coefficient: f64,
    pub exponent: f64,
}

/// Which end of an interval attains sup |f'|; set for catalog entries with
/// monotone derivative so hypothesis constants are exact rather than sampled.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DerivativeEnd {
    Lower,
    Upper,
}

#[derive(Clone)]
pub struct Nonlinearity {
    value: Evaluator,
    derivative: Option<Evaluator>,
    continuity: ContinuityClass,
    monotone_nondecreasing: bool,
    nonnegative: bool,
    growth: Option<GrowthData>,
    derivative_sup_end: Option<DerivativeEnd>,
    catalog_id: Option<String>,
}

impl fmt::Debug for Nonlinearity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Nonlinearity")
            .field("catalog_id", &self.catalog_id)
            .field("continuity", &self.continuity)
            .field("monotone_nondecreasing", &self.monotone_nondecreasing)
            .field("nonnegative", &self.nonnegative)
            .field("growth", &self.growth)
            .finish()
    }
}

impl Nonlinearity {
    /// A differentiable nonlinearity from value and derivative closures.
    pub fn differentiable<F, G>(value: F, derivative: G) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
        G: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Nonlinearity {
            value: Arc::new(value),
            derivative: Some(Arc::new(derivative)),
            continuity: ContinuityClass::Differentiable,
            monotone_nondecreasing: false,
            nonnegative: false,
            growth: None,
            derivative_sup_end: None,
            catalog_id: None,
        }
    }

    /// A nonlinearity from a value closure only (no derivative evaluator).
    pub fn from_value<F>(value: F, continuity: ContinuityClass) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Nonlinearity {
            value: Arc::new(value),
            derivative: None,
            continuity,
            monotone_nondecreasing: false,
            nonnegative: false,
            growth: None,
            derivative_sup_end: None,
            catalog_id: None,
        }
    }

    pub fn with_flags(mut self, monotone_nondecreasing: bool, nonnegative: bool) -> Self {
        self.monotone_nondecreasing = monotone_nondecreasing;
        self.nonnegative = nonnegative;
        self
    }

    pub fn with_growth(mut self, coefficient: f64, exponent: f64) -> Self {
        self.growth = Some(GrowthData {
            coefficient,
            exponent,
        });
        self
    }

    pub fn value(&self, x: f64) -> f64 {
        (self.value)(x)
    }

    pub fn derivative(&self, x: f64) -> Option<f64> {
        self.derivative.as_ref().map(|d| d(x))
    }

    pub fn has_derivative(&self) -> bool {
        self.derivative.is_some()
    }

    pub fn continuity(&self) -> ContinuityClass {
        self.continuity
    }

    pub fn is_monotone_nondecreasing(&self) -> bool {
        self.monotone_nondecreasing
    }

    pub fn is_nonnegative(&self) -> bool {
        self.nonnegative
    }

    pub fn growth(&self) -> Option<GrowthData> {
        self.growth
    }

    pub fn derivative_sup_end(&self) -> Option<DerivativeEnd> {
        self.derivative_sup_end
    }

    pub fn catalog_id(&self) -> Option<&str> {
        self.catalog_id.as_deref()
    }

    /// max |f| over [lo, hi]: exact endpoint evaluation for nonnegative
    /// nondecreasing entries, dense sampling otherwise.
    pub fn max_abs_value(&self, lo: f64, hi: f64) -> f64 {
        if self.monotone_nondecreasing && self.nonnegative {
            return self.value(hi);
        }
        sample_max(lo, hi, |x| self.value(x).abs())
    }

    /// max f over [lo, hi] (signed).
    pub fn max_value(&self, lo: f64, hi: f64) -> f64 {
        if self.monotone_nondecreasing {
            return self.value(hi);
        }
        sample_max(lo, hi, |x| self.value(x))
    }

    /// sup |f'| over [lo, hi]; None if there is no derivative evaluator.
    pub fn sup_abs_derivative(&self, lo: f64, hi: f64) -> Option<f64> {
        let d = self.derivative.as_ref()?;
        Some(match self.derivative_sup_end {
            Some(DerivativeEnd::Upper) => d(hi).abs(),
            Some(DerivativeEnd::Lower) => d(lo).abs(),
            None => sample_max(lo, hi, |x| d(x).abs()),
        })
    }

    /// sup f' over [lo, hi] (signed); None if there is no derivative.
    pub fn sup_derivative(&self, lo: f64, hi: f64) -> Option<f64> {
        let d = self.derivative.as_ref()?;
        Some(match self.derivative_sup_end {
            Some(DerivativeEnd::Upper) => d(hi),
            Some(DerivativeEnd::Lower) => d(lo),
            None => sample_max(lo, hi, |x| d(x)),
        })
    }
}

const SAMPLE_POINTS: usize = 4096;

fn sample_max<F: Fn(f64) -> f64>(lo: f64, hi: f64, f: F) -> f64 {
    if hi <= lo {
        return f(lo);
    }
    let step = (hi - lo) / (SAMPLE_POINTS - 1) as f64;
    (0..SAMPLE_POINTS)
        .map(|i| f(lo + i as f64 * step))
        .fold(f64::NEG_INFINITY, f64::max)
}

/// f(u) = e^u (Bratu nonlinearity).
pub fn exp() -> Nonlinearity {
    let mut f = Nonlinearity::differentiable(f64::exp, f64::exp).with_flags(true, true);
    f.derivative_sup_end = Some(DerivativeEnd::Upper);
    f.catalog_id = Some("exp".into());
    f
}

/// f(u) = e^{2u} (conformal deformation nonlinearity).
pub fn exp_two() -> Nonlinearity {
    let mut f = Nonlinearity::differentiable(|x: f64| (2.0 * x).exp(), |x: f64| {
        2.0 * (2.0 * x).exp()
    })
    .with_flags(true, true);
    f.derivative_sup_end = Some(DerivativeEnd::Upper);
    f.catalog_id = Some("exp2".into());
    f
}

/// f(u) = u^p on [0, inf), extended by 0 to the left. For p < 1 this is
/// Hoelder of exponent p with seminorm 1 and carries growth data (K=1, p).
pub fn power(p: f64) -> Result<Nonlinearity> {
    if !(p > 0.0 && p <= 1.0) {
        return Err(Error::ArgumentOutOfDomain {
            function: "power",
            argument: p,
            requirement: "0 < p <= 1",
        });
    }
    let value = move |x: f64| if x > 0.0 { x.powf(p) } else { 0.0 };
    let deriv = move |x: f64| {
        if x > 0.0 {
            p * x.powf(p - 1.0)
        } else if p < 1.0 {
            f64::INFINITY
        } else {
            1.0
        }
    };
    let continuity = if p < 1.0 {
        ContinuityClass::Holder {
            alpha: p,
            seminorm: 1.0,
        }
    } else {
        ContinuityClass::Differentiable
    };
    let mut f = Nonlinearity {
        value: Arc::new(value),
        derivative: Some(Arc::new(deriv)),
        continuity,
        monotone_nondecreasing: true,
        nonnegative: true,
        growth: Some(GrowthData {
            coefficient: 1.0,
            exponent: p,
        }),
        derivative_sup_end: Some(DerivativeEnd::Lower),
        catalog_id: Some(format!("power({p})")),
    };
    if p == 1.0 {
        f.derivative_sup_end = Some(DerivativeEnd::Upper);
    }
    Ok(f)
}

/// Step index of the staircase: l such that l/10 < x <= (l+1)/10, with 0 on
/// [0, 1/10] and for nonpositive x. Left-open right-closed as stated.
fn staircase_level(x: f64) -> f64 {
    if x <= 0.1 {
        0.0
    } else {
        ((10.0 * x).ceil() - 1.0).max(0.0)
    }
}

/// Staircase nonlinearity `x -> l^p` where l is the step index of x.
/// Nondecreasing, lower semicontinuous, with growth bound `f(x) <= 10^p x^p`.
pub fn staircase(p: f64) -> Result<Nonlinearity> {
    if !(p > 0.0) {
        return Err(Error::ArgumentOutOfDomain {
            function: "staircase",
            argument: p,
            requirement: "p > 0",
        });
    }
    let value = move |x: f64| staircase_level(x).powf(p);
    Ok(Nonlinearity {
        value: Arc::new(value),
        derivative: None,
        continuity: ContinuityClass::LowerSemicontinuous,
        monotone_nondecreasing: true,
        nonnegative: true,
        growth: Some(GrowthData {
            coefficient: 10f64.powf(p),
            exponent: p,
        }),
        derivative_sup_end: None,
        catalog_id: Some(format!("staircase({p})")),
    })
}

/// Look up a catalog entry by name: `exp`, `exp2`, `power` (with parameter p)
/// or `staircase` (with parameter p).
pub fn catalog(name: &str, param: Option<f64>) -> Result<Nonlinearity> {
    match name {
        "exp" => Ok(exp()),
        "exp2" => Ok(exp_two()),
        "power" => power(param.ok_or_else(|| {
            Error::Config("catalog entry `power` needs a parameter p".into())
        })?),
        "staircase" => staircase(param.ok_or_else(|| {
            Error::Config("catalog entry `staircase` needs a parameter p".into())
        })?),
        other => Err(Error::Config(format!("unknown nonlinearity `{other}`"))),
    }
}
