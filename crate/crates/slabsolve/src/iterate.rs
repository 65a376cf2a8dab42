//! The iteration schemes.
//!
//! All three schemes run the same loop: start from `u_0` and repeatedly
//! solve `-Lap u_{k+1} = lambda f(u_k) + h` with zero boundary values.
//! What differs is the hypothesis that certifies convergence and the seed:
//!
//! * [`iterate_contraction`]: f differentiable with
//!   `c * Lambda * M <= 1 - theta`; successive differences decay
//!   geometrically with ratio at most `1 - theta` and the limit obeys the
//!   a priori bound `c ||h|| + c Lambda L / theta`. Starts from solve(h).
//! * [`iterate_monotone`]: f nonnegative nondecreasing, data nonnegative;
//!   iterates increase pointwise towards the minimal solution above the
//!   seed (zero-start or a certified subsolution).
//! * [`iterate_system`]: componentwise monotone iteration for the coupled
//!   pair `-Lap u = v^p`, `-Lap v = u^q`, seeded with a common subsolution.

use std::sync::Arc;

use crate::bounds::{contraction_hypothesis, max_principle_constant, sublinear_feasible};
use crate::bounds::ContractionHypothesis;
use crate::domain::{Field, Grid};
use crate::error::{Error, Result};
use crate::nonlinearity::Nonlinearity;
use crate::poisson::{assemble_laplacian, poisson_solve, DiscreteLaplacian, DEFAULT_SOLVE_TOL};

/// A coefficient of the problem: a constant or a grid function.
#[derive(Debug, Clone)]
pub enum Coefficient {
    Constant(f64),
    Field(Field),
}

impl Coefficient {
    pub fn at(&self, node: usize) -> f64 {
        match self {
            Coefficient::Constant(c) => *c,
            Coefficient::Field(f) => f.values()[node],
        }
    }

    pub fn sup_norm(&self) -> f64 {
        match self {
            Coefficient::Constant(c) => c.abs(),
            Coefficient::Field(f) => f.sup_norm(),
        }
    }

    pub fn min_value(&self) -> f64 {
        match self {
            Coefficient::Constant(c) => *c,
            Coefficient::Field(f) => f.min_value(),
        }
    }

    fn matches(&self, grid: &Arc<Grid>) -> bool {
        match self {
            Coefficient::Constant(_) => true,
            Coefficient::Field(f) => f.len() == grid.interior_count(),
        }
    }
}

/// The boundary value problem `-Lap u = lambda(x) f(u) + h(x)`, u = 0 on the
/// boundary, discretized on a grid.
#[derive(Debug, Clone)]
pub struct Problem {
    grid: Arc<Grid>,
    lambda: Coefficient,
    h: Coefficient,
    nonlinearity: Nonlinearity,
}

impl Problem {
    pub fn new(
        grid: Arc<Grid>,
        lambda: Coefficient,
        h: Coefficient,
        nonlinearity: Nonlinearity,
    ) -> Result<Self> {
        if !lambda.matches(&grid) || !h.matches(&grid) {
            return Err(Error::GridMismatch);
        }
        Ok(Problem {
            grid,
            lambda,
            h,
            nonlinearity,
        })
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn lambda(&self) -> &Coefficient {
        &self.lambda
    }

    pub fn h(&self) -> &Coefficient {
        &self.h
    }

    pub fn nonlinearity(&self) -> &Nonlinearity {
        &self.nonlinearity
    }

    /// Improved maximum-principle constant of the underlying domain.
    pub fn constant(&self) -> f64 {
        max_principle_constant(self.grid.domain(), true).value
    }

    /// The rigid right-hand side h as a field.
    pub fn h_field(&self) -> Field {
        match &self.h {
            Coefficient::Constant(c) => Field::constant(Arc::clone(&self.grid), *c),
            Coefficient::Field(f) => f.clone(),
        }
    }

    /// Source `lambda f(arg) + h` for a given argument field.
    pub fn source_for(&self, arg: &Field) -> Field {
        let values = arg
            .values()
            .iter()
            .enumerate()
            .map(|(k, &v)| self.lambda.at(k) * self.nonlinearity.value(v) + self.h.at(k))
            .collect();
        Field::new(Arc::clone(&self.grid), values).expect("argument lives on the problem grid")
    }
}

/// Per-iterate diagnostics of a scheme run.
#[derive(Debug, Clone)]
pub struct IterationReport {
    /// Sup norm of each iterate, starting with the seed u_0.
    pub sup_norms: Vec<f64>,
    /// Successive sup-norm differences ||u_{k+1} - u_k||; one per iteration.
    pub successive_differences: Vec<f64>,
    /// Sup norm of the discrete residual at the final iterate.
    pub final_residual: f64,
    /// Min over all nodes and iterations of (u_{k+1} - u_k).
    pub monotone_min: f64,
    pub converged: bool,
    pub iterations: usize,
    /// Largest ratio d_k / d_{k-1} between consecutive differences (k >= 2).
    pub max_ratio: Option<f64>,
    /// exp of the least-squares slope of ln d_k: the fitted decay ratio.
    pub fitted_ratio: Option<f64>,
    /// Predicted sup-norm bound, when the relevant hypothesis supplies one.
    pub a_priori_bound: Option<f64>,
    /// Whether the final sup norm stayed below the predicted bound.
    pub bound_respected: Option<bool>,
    /// Contraction hypothesis evaluation, when the scheme computed one.
    pub hypothesis: Option<ContractionHypothesis>,
}

impl IterationReport {
    fn from_run(
        sup_norms: Vec<f64>,
        diffs: Vec<f64>,
        final_residual: f64,
        monotone_min: f64,
        converged: bool,
    ) -> Self {
        let max_ratio = ratio_max(&diffs);
        let fitted_ratio = ratio_fit(&diffs);
        IterationReport {
            iterations: diffs.len(),
            sup_norms,
            successive_differences: diffs,
            final_residual,
            monotone_min,
            converged,
            max_ratio,
            fitted_ratio,
            a_priori_bound: None,
            bound_respected: None,
            hypothesis: None,
        }
    }

    fn with_bound(mut self, bound: Option<f64>, final_sup: f64) -> Self {
        self.a_priori_bound = bound;
        self.bound_respected = bound.map(|b| final_sup <= b * (1.0 + 1e-6));
        self
    }
}

/// Differences at or below this fraction of the initial difference are
/// treated as rounding noise when fitting decay ratios.
const RATIO_FLOOR: f64 = 1e-13;

fn significant(diffs: &[f64]) -> Vec<f64> {
    let scale = diffs.iter().cloned().fold(0.0f64, f64::max).max(1e-300);
    diffs
        .iter()
        .cloned()
        .filter(|d| *d > RATIO_FLOOR * scale)
        .collect()
}

pub(crate) fn ratio_max(diffs: &[f64]) -> Option<f64> {
    let d = significant(diffs);
    if d.len() < 2 {
        return None;
    }
    Some(
        d.windows(2)
            .map(|w| w[1] / w[0])
            .fold(f64::NEG_INFINITY, f64::max),
    )
}

pub(crate) fn ratio_fit(diffs: &[f64]) -> Option<f64> {
    let d = significant(diffs);
    if d.len() < 2 {
        return None;
    }
    let n = d.len() as f64;
    let (mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0);
    for (k, dk) in d.iter().enumerate() {
        let x = k as f64;
        let y = dk.ln();
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    let slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    Some(slope.exp())
}

/// Options for the contraction scheme.
#[derive(Debug, Clone, Copy)]
pub struct ContractionParams {
    pub theta: f64,
    /// Stop when the successive sup-norm difference drops below this.
    pub tol: f64,
    pub max_iter: usize,
    /// Run even if the contraction hypothesis fails (exploration mode).
    pub force: bool,
}

impl Default for ContractionParams {
    fn default() -> Self {
        ContractionParams {
            theta: 0.5,
            tol: 1e-8,
            max_iter: 500,
            force: false,
        }
    }
}

/// Options for the monotone schemes.
#[derive(Debug, Clone, Copy)]
pub struct MonotoneParams {
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for MonotoneParams {
    fn default() -> Self {
        MonotoneParams {
            tol: 1e-8,
            max_iter: 500,
        }
    }
}

fn solve_step(op: &DiscreteLaplacian, source: &Field, tol: f64) -> Result<Field> {
    let (u, _) = poisson_solve(op, source, tol)?;
    Ok(u)
}

/// Banach iteration for differentiable f under `c Lambda M <= 1 - theta`.
/// Starts from u_0 = solve(h) and stops when successive differences fall
/// below `params.tol`.
pub fn iterate_contraction(
    problem: &Problem,
    params: &ContractionParams,
) -> Result<(Field, IterationReport)> {
    let c = problem.constant();
    let lambda_sup = problem.lambda.sup_norm();
    let h_norm = problem.h.sup_norm();
    let hyp = contraction_hypothesis(
        problem.nonlinearity(),
        lambda_sup,
        h_norm,
        c,
        params.theta,
    )?;
    if !hyp.satisfied && !params.force {
        return Err(Error::HypothesisNotSatisfied(format!(
            "c*Lambda*M = {:.6} > 1 - theta = {:.6}",
            hyp.c * hyp.lambda_sup * hyp.m,
            1.0 - hyp.theta
        )));
    }
    let op = assemble_laplacian(problem.grid());
    let solve_tol = params.tol.min(DEFAULT_SOLVE_TOL);
    let mut u = solve_step(&op, &problem.h_field(), solve_tol)?;
    let mut sup_norms = vec![u.sup_norm()];
    let mut diffs = Vec::new();
    let mut monotone_min = f64::INFINITY;
    let mut converged = false;
    for _ in 0..params.max_iter {
        let next = solve_step(&op, &problem.source_for(&u), solve_tol)?;
        monotone_min = monotone_min.min(next.min_difference(&u)?);
        let d = next.sup_difference(&u)?;
        diffs.push(d);
        sup_norms.push(next.sup_norm());
        u = next;
        if d <= params.tol {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::MaxIterationsExceeded {
            max_iter: params.max_iter,
            last_difference: diffs.last().copied().unwrap_or(f64::NAN),
        });
    }
    let final_residual = op.equation_residual_sup(&u, &problem.source_for(&u));
    let final_sup = u.sup_norm();
    let mut report = IterationReport::from_run(
        sup_norms,
        diffs,
        final_residual,
        monotone_min,
        converged,
    )
    .with_bound(hyp.satisfied.then_some(hyp.a_priori_bound), final_sup);
    report.hypothesis = Some(hyp);
    Ok((u, report))
}

fn require_monotone_data(problem: &Problem) -> Result<()> {
    let f = problem.nonlinearity();
    if !(f.is_nonnegative() && f.is_monotone_nondecreasing()) {
        return Err(Error::HypothesisNotSatisfied(
            "monotone scheme needs a nonnegative nondecreasing nonlinearity".into(),
        ));
    }
    if problem.lambda.min_value() < 0.0 {
        return Err(Error::HypothesisNotSatisfied(
            "monotone scheme needs lambda >= 0".into(),
        ));
    }
    if problem.h.min_value() < 0.0 {
        return Err(Error::HypothesisNotSatisfied(
            "monotone scheme needs h >= 0".into(),
        ));
    }
    Ok(())
}

/// Monotone iteration from a seed: either the zero-start u_0 = solve(h) or a
/// certified discrete subsolution. Iterates must be pointwise nondecreasing
/// (up to 10 * tol); a violation aborts the run, since it signals a solver
/// or hypothesis bug rather than slow convergence.
pub fn iterate_monotone(
    problem: &Problem,
    seed: &Field,
    params: &MonotoneParams,
) -> Result<(Field, IterationReport)> {
    require_monotone_data(problem)?;
    let op = assemble_laplacian(problem.grid());
    let solve_tol = params.tol.min(DEFAULT_SOLVE_TOL);
    let mut u = seed.clone();
    let mut sup_norms = vec![u.sup_norm()];
    let mut diffs = Vec::new();
    let mut monotone_min = f64::INFINITY;
    let mut converged = false;
    for iteration in 1..=params.max_iter {
        let next = solve_step(&op, &problem.source_for(&u), solve_tol)?;
        let min_diff = next.min_difference(&u)?;
        monotone_min = monotone_min.min(min_diff);
        if min_diff < -10.0 * params.tol {
            return Err(Error::MonotonicityViolated {
                iteration,
                worst: min_diff,
                tol: params.tol,
            });
        }
        let d = next.sup_difference(&u)?;
        diffs.push(d);
        sup_norms.push(next.sup_norm());
        u = next;
        if d <= params.tol {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::MaxIterationsExceeded {
            max_iter: params.max_iter,
            last_difference: diffs.last().copied().unwrap_or(f64::NAN),
        });
    }
    let final_residual = op.equation_residual_sup(&u, &problem.source_for(&u));
    let final_sup = u.sup_norm();

    // predicted bound from the growth data, when the chain actually caps the
    // run: the seed itself must start below the fixed-point radius
    let bound = problem.nonlinearity().growth().and_then(|g| {
        let hyp = sublinear_feasible(
            problem.constant(),
            problem.lambda.sup_norm(),
            g.coefficient,
            g.exponent,
            problem.h.sup_norm(),
        );
        match hyp.bound {
            Some(b) if hyp.satisfied && seed.sup_norm() <= b => Some(b),
            _ => None,
        }
    });
    let report = IterationReport::from_run(
        sup_norms,
        diffs,
        final_residual,
        monotone_min,
        converged,
    )
    .with_bound(bound, final_sup);
    Ok((u, report))
}

/// Componentwise monotone iteration for the coupled system
/// `-Lap u = lambda_u f_u(v) + h_u`, `-Lap v = lambda_v f_v(u) + h_v`
/// (Jacobi coupling: each step uses the previous value of the partner).
/// Both nonlinearities need growth exponent <= 1/2 and the seeds must be
/// common subsolutions (w on balls, the glued profile on wider domains).
pub fn iterate_system(
    problem_u: &Problem,
    problem_v: &Problem,
    seed_u: &Field,
    seed_v: &Field,
    params: &MonotoneParams,
) -> Result<(Field, Field, (IterationReport, IterationReport))> {
    require_monotone_data(problem_u)?;
    require_monotone_data(problem_v)?;
    if !std::ptr::eq(
        Arc::as_ptr(problem_u.grid()),
        Arc::as_ptr(problem_v.grid()),
    ) && problem_u.grid() != problem_v.grid()
    {
        return Err(Error::GridMismatch);
    }
    for problem in [problem_u, problem_v] {
        match problem.nonlinearity().growth() {
            Some(g) if g.exponent <= 0.5 => {}
            _ => {
                return Err(Error::HypothesisNotSatisfied(
                    "system scheme needs growth exponent <= 1/2".into(),
                ))
            }
        }
    }
    let op = assemble_laplacian(problem_u.grid());
    let solve_tol = params.tol.min(DEFAULT_SOLVE_TOL);
    let mut u = seed_u.clone();
    let mut v = seed_v.clone();
    let mut sup_u = vec![u.sup_norm()];
    let mut sup_v = vec![v.sup_norm()];
    let mut diffs_u = Vec::new();
    let mut diffs_v = Vec::new();
    let mut mono_u = f64::INFINITY;
    let mut mono_v = f64::INFINITY;
    let mut converged = false;
    for iteration in 1..=params.max_iter {
        let next_u = solve_step(&op, &problem_u.source_for(&v), solve_tol)?;
        let next_v = solve_step(&op, &problem_v.source_for(&u), solve_tol)?;
        for (next, prev, mono) in [(&next_u, &u, &mut mono_u), (&next_v, &v, &mut mono_v)] {
            let min_diff = next.min_difference(prev)?;
            *mono = mono.min(min_diff);
            if min_diff < -10.0 * params.tol {
                return Err(Error::MonotonicityViolated {
                    iteration,
                    worst: min_diff,
                    tol: params.tol,
                });
            }
        }
        let du = next_u.sup_difference(&u)?;
        let dv = next_v.sup_difference(&v)?;
        diffs_u.push(du);
        diffs_v.push(dv);
        sup_u.push(next_u.sup_norm());
        sup_v.push(next_v.sup_norm());
        u = next_u;
        v = next_v;
        if du.max(dv) <= params.tol {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::MaxIterationsExceeded {
            max_iter: params.max_iter,
            last_difference: diffs_u
                .last()
                .copied()
                .unwrap_or(f64::NAN)
                .max(diffs_v.last().copied().unwrap_or(f64::NAN)),
        });
    }
    let res_u = op.equation_residual_sup(&u, &problem_u.source_for(&v));
    let res_v = op.equation_residual_sup(&v, &problem_v.source_for(&u));
    let report_u = IterationReport::from_run(sup_u, diffs_u, res_u, mono_u, converged);
    let report_v = IterationReport::from_run(sup_v, diffs_v, res_v, mono_v, converged);
    Ok((u, v, (report_u, report_v)))
}

/// Sup norm of the discrete residual `-Lap_h u - lambda f(u) - h` over the
/// interior nodes: the computable check that a limit actually solves the
/// discrete problem.
pub fn residual(problem: &Problem, u: &Field) -> Result<f64> {
    if u.len() != problem.grid().interior_count() {
        return Err(Error::GridMismatch);
    }
    let op = assemble_laplacian(problem.grid());
    Ok(op.equation_residual_sup(u, &problem.source_for(u)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{discretize, DomainSpec};
    use crate::nonlinearity;

    fn ball_grid(n: usize, res: u32) -> Arc<Grid> {
        Arc::new(discretize(&DomainSpec::radial_ball(1.0, n).unwrap(), res).unwrap())
    }

    /// Closed form for -(r^{n-1} w')' = eps r^{n-1}(1 - r^2), w(1) = 0.
    fn w_exact(n: f64, eps: f64, r: f64) -> f64 {
        eps * (n + 4.0) / (4.0 * n * (n + 2.0))
            * (n / (n + 4.0) * r.powi(4) - 2.0 * (n + 2.0) / (n + 4.0) * r * r + 1.0)
    }

    #[test]
    fn bratu_contraction_on_unit_ball() {
        let grid = ball_grid(2, 400);
        let problem = Problem::new(
            grid,
            Coefficient::Constant(1.0),
            Coefficient::Constant(0.0),
            nonlinearity::exp(),
        )
        .unwrap();
        let (u, report) = iterate_contraction(&problem, &ContractionParams::default()).unwrap();
        assert!(report.converged);
        // a priori bound with improved c = 1/4, L = 1, theta = 1/2: 1/2
        assert!((report.a_priori_bound.unwrap() - 0.5).abs() < 1e-12);
        assert_eq!(report.bound_respected, Some(true));
        assert!(u.sup_norm() <= 0.5);
        assert!(report.final_residual < 1e-6);
        assert!(report.max_ratio.unwrap() <= 0.55);
        assert!(u.min_value() >= 0.0, "Bratu solution is positive");
    }

    #[test]
    fn hypothesis_refusal_and_force() {
        let grid = ball_grid(2, 100);
        let problem = Problem::new(
            grid,
            Coefficient::Constant(1.2), // above the theta = 1/2 threshold 1.13429
            Coefficient::Constant(0.0),
            nonlinearity::exp(),
        )
        .unwrap();
        assert!(matches!(
            iterate_contraction(&problem, &ContractionParams::default()),
            Err(Error::HypothesisNotSatisfied(_))
        ));
        // forcing runs anyway; lambda = 1.2 is still below the true critical
        // value 2 on the disk, so the iteration converges regardless
        let params = ContractionParams {
            force: true,
            ..ContractionParams::default()
        };
        let (_, report) = iterate_contraction(&problem, &params).unwrap();
        assert!(report.converged);
        assert!(report.hypothesis.map(|h| !h.satisfied).unwrap());
    }

    #[test]
    fn zero_lambda_is_a_single_poisson_solve() {
        let grid = ball_grid(3, 50);
        let problem = Problem::new(
            Arc::clone(&grid),
            Coefficient::Constant(0.0),
            Coefficient::Constant(1.0),
            nonlinearity::exp(),
        )
        .unwrap();
        let (u, report) = iterate_contraction(&problem, &ContractionParams::default()).unwrap();
        assert_eq!(report.iterations, 1);
        assert!((u.sup_norm() - 1.0 / 6.0).abs() < 1e-3);
    }

    #[test]
    fn monotone_power_run_seeded_with_w() {
        let n = 2usize;
        let p = 0.5;
        let grid = ball_grid(n, 200);
        let eps = 0.75 * 0.1875; // 3/4 of the admissible maximum at n = 2, p = 1/2
        let seed = grid.evaluate(|x| w_exact(n as f64, eps, x[0]));
        let problem = Problem::new(
            Arc::clone(&grid),
            Coefficient::Constant(1.0),
            Coefficient::Constant(0.0),
            nonlinearity::power(p).unwrap(),
        )
        .unwrap();
        let (u, report) = iterate_monotone(&problem, &seed, &MonotoneParams::default()).unwrap();
        assert!(report.converged);
        assert!(report.monotone_min >= -1e-7, "iterates must not decrease");
        assert!(u.min_difference(&seed).unwrap() >= -1e-12, "limit >= seed");
        assert!(u.sup_norm() > seed.sup_norm(), "limit is nontrivial");
        // fixed-point radius for h = 0: (c Lambda K)^{1/(1-p)} = (1/4)^2
        assert!((report.a_priori_bound.unwrap() - 0.0625).abs() < 1e-9);
        assert_eq!(report.bound_respected, Some(true));
        assert!(report.final_residual < 1e-6);
    }

    #[test]
    fn monotone_trivial_fixed_point() {
        let grid = ball_grid(2, 50);
        let problem = Problem::new(
            Arc::clone(&grid),
            Coefficient::Constant(1.0),
            Coefficient::Constant(0.0),
            nonlinearity::power(0.5).unwrap(),
        )
        .unwrap();
        let seed = Field::zeros(Arc::clone(&grid));
        let (u, report) = iterate_monotone(&problem, &seed, &MonotoneParams::default()).unwrap();
        assert_eq!(u.sup_norm(), 0.0, "zero seed stays at the trivial solution");
        assert_eq!(report.iterations, 1);
    }

    #[test]
    fn monotone_rejects_sign_changing_data() {
        let grid = ball_grid(2, 50);
        let problem = Problem::new(
            Arc::clone(&grid),
            Coefficient::Constant(1.0),
            Coefficient::Constant(-1.0),
            nonlinearity::power(0.5).unwrap(),
        )
        .unwrap();
        let seed = Field::zeros(Arc::clone(&grid));
        assert!(matches!(
            iterate_monotone(&problem, &seed, &MonotoneParams::default()),
            Err(Error::HypothesisNotSatisfied(_))
        ));
    }

    #[test]
    fn staircase_monotone_run_stays_below_one() {
        // -Lap u = f(u)^p + 1 on the unit disk with the staircase f and
        // p <= log10(2): feasibility gives sup <= 1
        let p = 0.3;
        let grid = ball_grid(2, 150);
        let problem = Problem::new(
            Arc::clone(&grid),
            Coefficient::Constant(1.0),
            Coefficient::Constant(1.0),
            nonlinearity::staircase(p).unwrap(),
        )
        .unwrap();
        let h_field = problem.h_field();
        let op = assemble_laplacian(&grid);
        let (seed, _) = poisson_solve(&op, &h_field, 1e-10).unwrap();
        let (u, report) = iterate_monotone(&problem, &seed, &MonotoneParams::default()).unwrap();
        assert!(report.converged);
        assert!(report.monotone_min >= -1e-7);
        assert!(u.sup_norm() <= 1.0);
        // p < 1: the fixed-point radius applies and is sharper than 1
        let bound = report.a_priori_bound.unwrap();
        assert!(bound <= 1.0);
        assert_eq!(report.bound_respected, Some(true));
    }

    #[test]
    fn system_run_is_symmetric_for_equal_exponents() {
        let n = 2usize;
        let grid = ball_grid(n, 150);
        let eps = 0.75 * 0.1875;
        let seed = grid.evaluate(|x| w_exact(n as f64, eps, x[0]));
        let make = || {
            Problem::new(
                Arc::clone(&grid),
                Coefficient::Constant(1.0),
                Coefficient::Constant(0.0),
                nonlinearity::power(0.5).unwrap(),
            )
            .unwrap()
        };
        let (u, v, (ru, rv)) =
            iterate_system(&make(), &make(), &seed, &seed, &MonotoneParams::default()).unwrap();
        assert!(ru.converged && rv.converged);
        // equal exponents and equal seeds: the two recursions coincide
        assert!(u.sup_difference(&v).unwrap() == 0.0);
        assert!(u.min_difference(&seed).unwrap() >= -1e-12);
        assert!(ru.final_residual < 1e-6 && rv.final_residual < 1e-6);
    }

    #[test]
    fn system_zero_seed_degenerates() {
        let grid = ball_grid(2, 60);
        let make = || {
            Problem::new(
                Arc::clone(&grid),
                Coefficient::Constant(1.0),
                Coefficient::Constant(0.0),
                nonlinearity::power(0.5).unwrap(),
            )
            .unwrap()
        };
        let zero = Field::zeros(Arc::clone(&grid));
        let (u, v, _) =
            iterate_system(&make(), &make(), &zero, &zero, &MonotoneParams::default()).unwrap();
        assert_eq!(u.sup_norm(), 0.0);
        assert_eq!(v.sup_norm(), 0.0);
    }

    #[test]
    fn system_rejects_supercritical_exponents() {
        let grid = ball_grid(2, 60);
        let make = |p: f64| {
            Problem::new(
                Arc::clone(&grid),
                Coefficient::Constant(1.0),
                Coefficient::Constant(0.0),
                nonlinearity::power(p).unwrap(),
            )
            .unwrap()
        };
        let zero = Field::zeros(Arc::clone(&grid));
        assert!(matches!(
            iterate_system(
                &make(0.8),
                &make(0.5),
                &zero,
                &zero,
                &MonotoneParams::default()
            ),
            Err(Error::HypothesisNotSatisfied(_))
        ));
    }

    #[test]
    fn grid_refinement_shrinks_the_solution_difference_quadratically() {
        // Bratu at lambda = 0.8: compare limits across resolutions at the
        // nodes the coarse grid shares with the finer ones
        let solve_at = |res: u32| {
            let grid = ball_grid(2, res);
            let problem = Problem::new(
                grid,
                Coefficient::Constant(0.8),
                Coefficient::Constant(0.0),
                nonlinearity::exp(),
            )
            .unwrap();
            iterate_contraction(&problem, &ContractionParams::default())
                .unwrap()
                .0
        };
        let coarse = solve_at(50);
        let mid = solve_at(100);
        let fine = solve_at(200);
        let diff_against = |u_c: &Field, u_f: &Field, factor: usize| {
            let mut worst = 0.0f64;
            for k in 0..u_c.len() {
                // coarse interior node i+1 sits at fine index factor*(i+1)-1
                let kf = factor * (k + 1) - 1;
                worst = worst.max((u_c.values()[k] - u_f.values()[kf]).abs());
            }
            worst
        };
        let d1 = diff_against(&coarse, &mid, 2);
        let d2 = diff_against(&mid, &fine, 2);
        assert!(d2 > 0.0 && d1 > 0.0);
        assert!(
            d2 <= d1 / 3.0,
            "halving h must shrink the inter-grid difference ~4x: {d1} -> {d2}"
        );
    }

    #[test]
    fn residual_of_poisson_solution_is_small_and_grows_with_perturbation() {
        let grid = ball_grid(2, 100);
        let problem = Problem::new(
            Arc::clone(&grid),
            Coefficient::Constant(0.0),
            Coefficient::Constant(1.0),
            nonlinearity::exp(),
        )
        .unwrap();
        let op = assemble_laplacian(&grid);
        let (u, _) = poisson_solve(&op, &problem.h_field(), 1e-10).unwrap();
        let base = residual(&problem, &u).unwrap();
        assert!(base <= 1e-9);
        let bumped_small = u.map(|v| v + 1e-4 * v.abs().sqrt());
        let bumped_large = u.map(|v| v + 1e-2 * v.abs().sqrt());
        let r_small = residual(&problem, &bumped_small).unwrap();
        let r_large = residual(&problem, &bumped_large).unwrap();
        assert!(r_small > base);
        assert!(r_large > r_small);
    }

    #[test]
    fn residual_of_exact_profile_is_truncation_sized() {
        let n = 3usize;
        let eps = 1.0;
        let grid = ball_grid(n, 100);
        // -Lap w = eps (1 - r^2) as a problem with lambda = 0
        let h = grid.evaluate(|x| eps * (1.0 - x[0] * x[0]));
        let problem = Problem::new(
            Arc::clone(&grid),
            Coefficient::Constant(0.0),
            Coefficient::Field(h),
            nonlinearity::exp(),
        )
        .unwrap();
        let w = grid.evaluate(|x| w_exact(n as f64, eps, x[0]));
        let r = residual(&problem, &w).unwrap();
        let h_grid = grid.min_spacing();
        assert!(r > 1e-8, "truncation is genuinely nonzero");
        assert!(r < 10.0 * h_grid * h_grid, "and it is O(h^2)");
    }
}
