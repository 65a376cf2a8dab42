//! Explicit subsolutions used to seed the monotone schemes.
//!
//! [`radial_w`] is the closed-form solution of the radial problem
//! `-(r^{n-1} w')' = eps r^{n-1} (1 - r^2)`, `w(1) = 0`:
//!
//! ```text
//! w(r) = eps (n+4) / (4n(n+2)) * [ n/(n+4) r^4 - 2(n+2)/(n+4) r^2 + 1 ]
//! ```
//!
//! For `eps` up to [`epsilon_max`] it satisfies `-Lap w <= w^p`, which makes
//! it a subsolution of `-Lap u = u^p` on the unit ball. [`glued_z`] extends
//! it by a quintic spline to a compactly supported profile on wider domains:
//! `w` up to radius `1 - eta`, a C^2 glue down to zero at `1 + eta_prime`,
//! and zero outside. Admissibility of the glue is verified on the grid, not
//! proven: [`verify_subsolution`] evaluates `-Lap_h z - z^p` at every
//! interior node.

use std::sync::Arc;

use crate::domain::{DomainSpec, Field, Grid};
use crate::error::{Error, Result};
use crate::poisson::neg_laplacian_of;

/// Absolute tolerance for the discrete subsolution check.
pub const SUBSOLUTION_TOL: f64 = 1e-8;

/// The radial profile w on [0, 1].
#[derive(Debug, Clone, Copy)]
pub struct RadialProfile {
    pub dimension: usize,
    pub epsilon: f64,
}

impl RadialProfile {
    /// Leading coefficient eps (n+4) / (4n(n+2)) = w(0).
    pub fn coefficient(&self) -> f64 {
        let n = self.dimension as f64;
        self.epsilon * (n + 4.0) / (4.0 * n * (n + 2.0))
    }

    pub fn value(&self, r: f64) -> f64 {
        let n = self.dimension as f64;
        self.coefficient() * (n / (n + 4.0) * r.powi(4) - 2.0 * (n + 2.0) / (n + 4.0) * r * r + 1.0)
    }

    pub fn derivative(&self, r: f64) -> f64 {
        let n = self.dimension as f64;
        self.coefficient() * (4.0 * n / (n + 4.0) * r.powi(3) - 4.0 * (n + 2.0) / (n + 4.0) * r)
    }

    pub fn second_derivative(&self, r: f64) -> f64 {
        let n = self.dimension as f64;
        self.coefficient() * (12.0 * n / (n + 4.0) * r * r - 4.0 * (n + 2.0) / (n + 4.0))
    }

    /// -Lap w at radius r, which the closed form makes eps (1 - r^2).
    pub fn neg_laplacian(&self, r: f64) -> f64 {
        self.epsilon * (1.0 - r * r)
    }

    /// The profile as a field on a grid (first coordinate = radius for
    /// radial grids, euclidean norm otherwise), zero outside [0, 1].
    pub fn as_field(&self, grid: &Arc<Grid>) -> Field {
        grid.evaluate(|x| {
            let r = norm(x);
            if r <= 1.0 {
                self.value(r)
            } else {
                0.0
            }
        })
    }
}

fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// The explicit radial subsolution profile.
pub fn radial_w(dimension: usize, epsilon: f64) -> RadialProfile {
    assert!(dimension >= 1, "dimension must be >= 1");
    assert!(epsilon > 0.0, "epsilon must be positive");
    RadialProfile { dimension, epsilon }
}

/// Largest eps for which `-Lap w = eps (1 - r^2) <= w^p` holds on the unit
/// ball: `((n+4)/(4n(n+2)))^{p/(1-p)}`.
pub fn epsilon_max(dimension: usize, p: f64) -> Result<f64> {
    assert!(dimension >= 1, "dimension must be >= 1");
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::ArgumentOutOfDomain {
            function: "epsilon_max",
            argument: p,
            requirement: "0 < p < 1",
        });
    }
    let n = dimension as f64;
    let base = (n + 4.0) / (4.0 * n * (n + 2.0));
    Ok(base.powf(p / (1.0 - p)))
}

/// Quintic spline on [r_in, r_out] matching value, first and second
/// derivative of w at r_in and vanishing to second order at r_out.
#[derive(Debug, Clone, Copy)]
struct AnnulusSpline {
    r_in: f64,
    length: f64,
    value_in: f64,
    slope_in: f64,
    curvature_in: f64,
}

impl AnnulusSpline {
    // Quintic Hermite basis on [0, 1] with (value, slope, curvature) data at
    // t = 0 and zero data at t = 1:
    //   H0 = 1 - 10 t^3 + 15 t^4 - 6 t^5
    //   H1 = t - 6 t^3 + 8 t^4 - 3 t^5
    //   H2 = (t^2 - 3 t^3 + 3 t^4 - t^5) / 2
    fn value(&self, r: f64) -> f64 {
        let t = (r - self.r_in) / self.length;
        let (t2, t3, t4, t5) = (t * t, t * t * t, t * t * t * t, t * t * t * t * t);
        let h0 = 1.0 - 10.0 * t3 + 15.0 * t4 - 6.0 * t5;
        let h1 = t - 6.0 * t3 + 8.0 * t4 - 3.0 * t5;
        let h2 = 0.5 * (t2 - 3.0 * t3 + 3.0 * t4 - t5);
        self.value_in * h0
            + self.length * self.slope_in * h1
            + self.length * self.length * self.curvature_in * h2
    }

    fn derivative(&self, r: f64) -> f64 {
        let t = (r - self.r_in) / self.length;
        let (t2, t3, t4) = (t * t, t * t * t, t * t * t * t);
        let h0 = -30.0 * t2 + 60.0 * t3 - 30.0 * t4;
        let h1 = 1.0 - 18.0 * t2 + 32.0 * t3 - 15.0 * t4;
        let h2 = 0.5 * (2.0 * t - 9.0 * t2 + 12.0 * t3 - 5.0 * t4);
        (self.value_in * h0
            + self.length * self.slope_in * h1
            + self.length * self.length * self.curvature_in * h2)
            / self.length
    }
}

/// Compactly supported profile: w inside radius `1 - eta`, a quintic glue on
/// the annulus up to `1 + eta_prime`, zero outside.
#[derive(Debug, Clone)]
pub struct GluedProfile {
    pub inner_radius: f64,
    pub outer_radius: f64,
    pub inner: RadialProfile,
    pub exponent: f64,
    spline: AnnulusSpline,
}

impl GluedProfile {
    pub fn value_radial(&self, r: f64) -> f64 {
        if r <= self.inner_radius {
            self.inner.value(r)
        } else if r < self.outer_radius {
            self.spline.value(r)
        } else {
            0.0
        }
    }

    pub fn value_at(&self, x: &[f64]) -> f64 {
        self.value_radial(norm(x))
    }

    pub fn as_field(&self, grid: &Arc<Grid>) -> Field {
        grid.evaluate(|x| self.value_at(x))
    }
}

/// Result of the discrete subsolution check `-Lap_h z <= z^p`.
#[derive(Debug, Clone)]
pub struct SubsolutionReport {
    pub pass: bool,
    /// max over interior nodes of (-Lap_h z - z^p); negative values are the
    /// certification margin.
    pub worst: f64,
    pub worst_node: usize,
    pub worst_coords: Vec<f64>,
    pub tol: f64,
}

/// Evaluate `-Lap_h z - z^p` at every interior node of the grid; pass iff
/// the maximum stays below [`SUBSOLUTION_TOL`].
pub fn verify_subsolution<F>(profile: F, p: f64, grid: &Grid) -> SubsolutionReport
where
    F: Fn(&[f64]) -> f64,
{
    let lap = neg_laplacian_of(grid, &profile);
    let mut worst = f64::NEG_INFINITY;
    let mut worst_node = 0;
    for (k, l) in lap.iter().enumerate() {
        let z = profile(&grid.interior_coords(k)).max(0.0);
        let violation = l - z.powf(p);
        if violation > worst {
            worst = violation;
            worst_node = k;
        }
    }
    SubsolutionReport {
        pass: worst <= SUBSOLUTION_TOL,
        worst,
        worst_node,
        worst_coords: grid.interior_coords(worst_node),
        tol: SUBSOLUTION_TOL,
    }
}

/// Whether the closed ball of the given radius fits strictly inside the
/// domain of the grid.
fn contains_ball(spec: &DomainSpec, radius: f64) -> bool {
    match spec {
        DomainSpec::Interval { width } => width / 2.0 > radius,
        DomainSpec::Box { widths } => widths.iter().all(|w| w / 2.0 > radius),
        DomainSpec::RadialBall { radius: r, .. } => *r > radius,
        DomainSpec::SlabTruncation {
            width, truncation, ..
        } => width / 2.0 > radius && *truncation as f64 + 2.0 > radius,
    }
}

/// Build and certify the glued profile on a grid. `eps` is fixed at 3/4 of
/// [`epsilon_max`], leaving margin for the glue. Fails with the worst node
/// if the discrete check does not certify; callers then shrink eta or
/// refine the grid.
pub fn glued_z(
    dimension: usize,
    p: f64,
    eta: f64,
    eta_prime: f64,
    grid: &Arc<Grid>,
) -> Result<GluedProfile> {
    if !(p > 0.0 && p <= 0.5) {
        return Err(Error::ArgumentOutOfDomain {
            function: "glued_z",
            argument: p,
            requirement: "0 < p <= 1/2",
        });
    }
    for (name, v) in [("eta", eta), ("eta_prime", eta_prime)] {
        if !(v > 0.0 && v <= 0.2) {
            return Err(Error::InvalidDomain(format!(
                "{name} must lie in (0, 0.2], got {v}"
            )));
        }
    }
    if !contains_ball(grid.domain(), 1.0 + eta_prime) {
        return Err(Error::InvalidDomain(format!(
            "domain must strictly contain the ball of radius {}",
            1.0 + eta_prime
        )));
    }
    let epsilon = 0.75 * epsilon_max(dimension, p)?;
    let inner = radial_w(dimension, epsilon);
    let r_in = 1.0 - eta;
    let r_out = 1.0 + eta_prime;
    let spline = AnnulusSpline {
        r_in,
        length: r_out - r_in,
        value_in: inner.value(r_in),
        slope_in: inner.derivative(r_in),
        curvature_in: inner.second_derivative(r_in),
    };
    let profile = GluedProfile {
        inner_radius: r_in,
        outer_radius: r_out,
        inner,
        exponent: p,
        spline,
    };

    // annulus admissibility: nonnegative and nonincreasing, sampled densely
    let samples = 2000;
    for i in 0..=samples {
        let r = r_in + (r_out - r_in) * i as f64 / samples as f64;
        let v = profile.spline.value(r);
        if v < -1e-12 {
            return Err(Error::InvalidDomain(format!(
                "glue dips negative at r = {r}: {v}"
            )));
        }
        if profile.spline.derivative(r) > 1e-10 {
            return Err(Error::InvalidDomain(format!(
                "glue increases at r = {r}"
            )));
        }
    }

    let report = verify_subsolution(|x| profile.value_at(x), p, grid);
    if !report.pass {
        return Err(Error::SubsolutionCheckFailed {
            worst: report.worst,
            tol: report.tol,
            node: report.worst_node,
            radius: norm(&report.worst_coords),
        });
    }
    Ok(profile)
}
