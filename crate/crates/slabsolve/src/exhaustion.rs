//! Solving on the unbounded slab through its exhaustion by truncations.
//!
//! The slab of width d is exhausted by the nested family
//! `Omega_m = Pi_d ∩ [-(m+2), m+2]^2`. Each member is solved independently
//! with the requested scheme; nonnegative nondecreasing data make the
//! solutions increase with m, and the limit is estimated on the fixed
//! observation window `Omega_0`, where the per-m differences decay
//! geometrically as the artificial boundary recedes.
//!
//! Grids of the whole family share the transverse axis and the longitudinal
//! spacing 1/resolution, so a solution on `Omega_m` embeds into
//! `Omega_{m+1}` by pure index arithmetic and the monotonicity check is an
//! exact pointwise comparison.

use std::sync::Arc;

use crate::bounds::sublinear_feasible;
use crate::domain::{discretize, exhaustion_family, Field, Grid, GridGeometry};
use crate::error::{Error, Result};
use crate::iterate::{
    iterate_contraction, iterate_monotone, iterate_system, ratio_fit, Coefficient,
    ContractionParams, IterationReport, MonotoneParams, Problem,
};
use crate::nonlinearity::Nonlinearity;
use crate::poisson::{assemble_laplacian, poisson_solve, DEFAULT_SOLVE_TOL};
use crate::subsolution::glued_z;

/// Data of the slab problem, shared by every truncation: constant lambda
/// and h plus the nonlinearity (a second nonlinearity for system runs).
#[derive(Debug, Clone)]
pub struct SlabProblem {
    pub lambda: f64,
    pub h: f64,
    pub nonlinearity: Nonlinearity,
    /// Second component for system runs: `-Lap v = lambda f_v(u) + h`.
    pub nonlinearity_v: Option<Nonlinearity>,
}

/// Which scheme solves each truncation.
#[derive(Debug, Clone, Copy)]
pub enum SlabScheme {
    Contraction { theta: f64, force: bool },
    Monotone,
    System,
}

/// Seed for monotone and system runs.
#[derive(Debug, Clone, Copy)]
pub enum SeedKind {
    /// u_0 = solve(h).
    ZeroStart,
    /// The glued compactly supported subsolution, certified on the grid.
    Glued { p: f64, eta: f64, eta_prime: f64 },
}

/// Results of an exhaustion run.
#[derive(Debug, Clone)]
pub struct ExhaustionRun {
    pub d: f64,
    pub m_max: usize,
    pub resolution: u32,
    /// Solution on each truncation, m = 0..=m_max.
    pub solutions: Vec<Field>,
    /// Second components for system runs.
    pub secondary: Option<Vec<Field>>,
    pub sup_norms: Vec<f64>,
    /// ||u_{m+1} - u_m|| restricted to the window, one entry per step.
    pub window_differences: Vec<f64>,
    /// Min over m and shared nodes of (u_{m+1} - u_m).
    pub monotone_min: f64,
    /// Uniform theorem bound on all sup norms, when the scheme supplies one.
    pub uniform_bound: Option<f64>,
    pub bound_respected: Option<bool>,
    /// Largest-m solution restricted to the window grid.
    pub window_field: Field,
    /// Window field plus the fitted geometric tail.
    pub extrapolated_window: Field,
    /// Largest spread of the window field along the longitudinal axis.
    pub longitudinal_variation: f64,
    /// Per-m scheme diagnostics (primary component).
    pub reports: Vec<IterationReport>,
}

fn transverse_interior(grid: &Grid) -> usize {
    match grid.geometry() {
        GridGeometry::Tensor { axes } => axes[1].interior_count(),
        _ => unreachable!("slab grids are 2-D tensor grids"),
    }
}

/// Values of a solution on `Omega_m` at the interior nodes of the window
/// grid (`Omega_0`), by index arithmetic on the aligned longitudinal axis.
fn restrict_to_window(u: &Field, m: usize, resolution: u32, window: &Arc<Grid>) -> Field {
    let n_t = transverse_interior(u.grid());
    let shape = window.interior_shape();
    let offset = m * resolution as usize;
    let mut values = Vec::with_capacity(shape[0] * shape[1]);
    for j_long in 0..shape[0] {
        let row = (j_long + offset) * n_t;
        values.extend_from_slice(&u.values()[row..row + n_t]);
    }
    Field::new(Arc::clone(window), values).expect("window shape matches")
}

/// Min over the interior nodes of `Omega_m` of (u_{m+1} - u_m).
fn min_difference_on_shared(u_next: &Field, u: &Field, resolution: u32) -> f64 {
    let n_t = transverse_interior(u.grid());
    let shape = u.grid().interior_shape();
    let offset = resolution as usize;
    let mut min = f64::INFINITY;
    for j_long in 0..shape[0] {
        let row_next = (j_long + offset) * n_t;
        let row = j_long * n_t;
        for j_t in 0..n_t {
            min = min.min(u_next.values()[row_next + j_t] - u.values()[row + j_t]);
        }
    }
    min
}

fn longitudinal_variation(window_field: &Field) -> f64 {
    let shape = window_field.grid().interior_shape();
    let n_t = shape[1];
    let mut worst = 0.0f64;
    for j_t in 0..n_t {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for j_long in 0..shape[0] {
            let v = window_field.values()[j_long * n_t + j_t];
            lo = lo.min(v);
            hi = hi.max(v);
        }
        worst = worst.max(hi - lo);
    }
    worst
}

/// Solve the slab problem on every truncation m = 0..=m_max and assemble
/// the exhaustion diagnostics. Data must be nonnegative (lambda >= 0,
/// h >= 0) so the comparison structure applies; a monotonicity-in-m
/// violation is reported as an error, since the discrete comparison
/// argument allows none.
pub fn solve_on_slab(
    template: &SlabProblem,
    d: f64,
    m_max: usize,
    resolution: u32,
    scheme: SlabScheme,
    seed: SeedKind,
    tol: f64,
) -> Result<ExhaustionRun> {
    if template.lambda < 0.0 || template.h < 0.0 {
        return Err(Error::HypothesisNotSatisfied(
            "slab runs need lambda >= 0 and h >= 0".into(),
        ));
    }
    let family = exhaustion_family(d, 2, m_max)?;
    let grids: Vec<Arc<Grid>> = family
        .iter()
        .map(|spec| discretize(spec, resolution).map(Arc::new))
        .collect::<Result<_>>()?;

    // the glued seed is certified once on the window grid; the support lies
    // inside Omega_0 and the family's grids agree there node for node
    let glued = match seed {
        SeedKind::Glued { p, eta, eta_prime } => {
            Some(glued_z(2, p, eta, eta_prime, &grids[0])?)
        }
        SeedKind::ZeroStart => None,
    };

    let mut solutions: Vec<Field> = Vec::with_capacity(m_max + 1);
    let mut secondary: Vec<Field> = Vec::new();
    let mut reports = Vec::with_capacity(m_max + 1);
    for grid in &grids {
        let problem = Problem::new(
            Arc::clone(grid),
            Coefficient::Constant(template.lambda),
            Coefficient::Constant(template.h),
            template.nonlinearity.clone(),
        )?;
        let seed_field = match &glued {
            Some(z) => z.as_field(grid),
            None => {
                let op = assemble_laplacian(grid);
                let (u0, _) = poisson_solve(
                    &op,
                    &problem.h_field(),
                    tol.min(DEFAULT_SOLVE_TOL),
                )?;
                u0
            }
        };
        match scheme {
            SlabScheme::Contraction { theta, force } => {
                let params = ContractionParams {
                    theta,
                    tol,
                    max_iter: 2000,
                    force,
                };
                let (u, report) = iterate_contraction(&problem, &params)?;
                solutions.push(u);
                reports.push(report);
            }
            SlabScheme::Monotone => {
                let params = MonotoneParams {
                    tol,
                    max_iter: 2000,
                };
                let (u, report) = iterate_monotone(&problem, &seed_field, &params)?;
                solutions.push(u);
                reports.push(report);
            }
            SlabScheme::System => {
                let f_v = template.nonlinearity_v.clone().ok_or_else(|| {
                    Error::Config("system slab run needs the second nonlinearity".into())
                })?;
                let problem_v = Problem::new(
                    Arc::clone(grid),
                    Coefficient::Constant(template.lambda),
                    Coefficient::Constant(template.h),
                    f_v,
                )?;
                let params = MonotoneParams {
                    tol,
                    max_iter: 2000,
                };
                let (u, v, (report_u, _)) =
                    iterate_system(&problem, &problem_v, &seed_field, &seed_field, &params)?;
                solutions.push(u);
                secondary.push(v);
                reports.push(report_u);
            }
        }
    }

    let sup_norms: Vec<f64> = solutions.iter().map(Field::sup_norm).collect();

    let mut monotone_min = f64::INFINITY;
    for m in 0..m_max {
        let min_diff = min_difference_on_shared(&solutions[m + 1], &solutions[m], resolution);
        monotone_min = monotone_min.min(min_diff);
        if min_diff < -10.0 * tol {
            return Err(Error::MonotonicityViolated {
                iteration: m + 1,
                worst: min_diff,
                tol,
            });
        }
    }

    let window_grid = &grids[0];
    let windows: Vec<Field> = solutions
        .iter()
        .enumerate()
        .map(|(m, u)| restrict_to_window(u, m, resolution, window_grid))
        .collect();
    let window_differences: Vec<f64> = (0..m_max)
        .map(|m| windows[m + 1].sup_difference(&windows[m]).unwrap())
        .collect();

    let uniform_bound = match scheme {
        SlabScheme::Contraction { .. } => reports.first().and_then(|r| r.a_priori_bound),
        SlabScheme::Monotone | SlabScheme::System => {
            template.nonlinearity.growth().and_then(|g| {
                let c = d * d / 8.0;
                let hyp =
                    sublinear_feasible(c, template.lambda, g.coefficient, g.exponent, template.h);
                match hyp.bound {
                    Some(b) if hyp.satisfied => Some(b),
                    _ => None,
                }
            })
        }
    };
    let bound_respected = uniform_bound
        .map(|b| sup_norms.iter().all(|s| *s <= b * (1.0 + 1e-6)));

    let window_field = windows[m_max].clone();
    let extrapolated_window = extrapolate_window(&windows, &window_differences);
    let variation = longitudinal_variation(&window_field);

    Ok(ExhaustionRun {
        d,
        m_max,
        resolution,
        solutions,
        secondary: (!secondary.is_empty()).then_some(secondary),
        sup_norms,
        window_differences,
        monotone_min,
        uniform_bound,
        bound_respected,
        window_field,
        extrapolated_window,
        longitudinal_variation: variation,
        reports,
    })
}

/// Largest-m window values plus the geometric tail fitted from the last
/// two window differences: u + (u_M - u_{M-1}) * rho / (1 - rho).
fn extrapolate_window(windows: &[Field], diffs: &[f64]) -> Field {
    let last = windows.len() - 1;
    if last == 0 || diffs.len() < 2 {
        return windows[last].clone();
    }
    let (d_prev, d_last) = (diffs[diffs.len() - 2], diffs[diffs.len() - 1]);
    if d_prev <= 0.0 || d_last <= 0.0 {
        return windows[last].clone();
    }
    let rho = (d_last / d_prev).min(0.99);
    let factor = rho / (1.0 - rho);
    let tail: Vec<f64> = windows[last]
        .values()
        .iter()
        .zip(windows[last - 1].values())
        .map(|(a, b)| a + (a - b) * factor)
        .collect();
    Field::new(Arc::clone(windows[last].grid()), tail).expect("same grid")
}

/// Window convergence summary: per-m differences, a geometric-decay fit,
/// and a non-decay flag.
#[derive(Debug, Clone)]
pub struct WindowReport {
    pub differences: Vec<f64>,
    pub fitted_ratio: Option<f64>,
    pub decaying: bool,
}

pub fn window_convergence_report(run: &ExhaustionRun) -> WindowReport {
    let fitted_ratio = ratio_fit(&run.window_differences);
    let decaying = match fitted_ratio {
        Some(r) => r < 1.0,
        None => run.window_differences.len() <= 1,
    };
    WindowReport {
        differences: run.window_differences.clone(),
        fitted_ratio,
        decaying,
    }
}
