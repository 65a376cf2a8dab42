//! Named experiments behind the CLI.
//!
//! Each experiment reproduces one worked example: it validates its config,
//! runs the relevant scheme, records labeled values and pass/fail checks,
//! and writes plot-ready data files. `verify` runs the whole invariant
//! suite against the expectations table.

use std::path::Path;
use std::sync::Arc;

use crate::bounds::{
    bratu_lambda_star, conformal_threshold, lambert_w, max_principle_constant, optimize_theta,
    staircase_max_exponent, sublinear_feasible, sublinear_norm_bound,
};
use crate::config::ExperimentConfig;
use crate::domain::{discretize, DomainSpec, Field, Grid};
use crate::error::{Error, Result};
use crate::exhaustion::{
    solve_on_slab, window_convergence_report, ExhaustionRun, SeedKind, SlabProblem, SlabScheme,
};
use crate::iterate::{
    iterate_contraction, iterate_monotone, iterate_system, residual, Coefficient,
    ContractionParams, MonotoneParams, Problem,
};
use crate::nonlinearity;
use crate::poisson::{assemble_laplacian, check_discrete_max_principle, poisson_solve};
use crate::report::{write_plot_data, Provenance, ResultRecord};
use crate::subsolution::{epsilon_max, glued_z, radial_w, verify_subsolution};

pub const EXPERIMENTS: &[&str] = &[
    "bratu-threshold",
    "conformal",
    "bratu-solve",
    "sublinear-scaling",
    "lane-emden",
    "staircase",
    "slab",
    "verify",
];

/// Worker count for parameter sweeps, from SLABSOLVE_WORKERS (default 1).
pub fn worker_count() -> usize {
    std::env::var("SLABSOLVE_WORKERS")
        .ok()
        .and_then(|v| v.parse().ok())
        .filter(|&n| n >= 1)
        .unwrap_or(1)
}

/// Run the experiment named in the config; plot files land in `out_dir`.
pub fn run(config: &ExperimentConfig, out_dir: &Path) -> Result<ResultRecord> {
    match config.experiment.as_str() {
        "bratu-threshold" => bratu_threshold(config, out_dir),
        "conformal" => conformal(config, out_dir),
        "bratu-solve" => bratu_solve(config, out_dir),
        "sublinear-scaling" => sublinear_scaling(config, out_dir),
        "lane-emden" => lane_emden(config, out_dir),
        "staircase" => staircase_run(config, out_dir),
        "slab" => slab_run(config, out_dir),
        "verify" => verify(config, out_dir),
        other => Err(Error::Config(format!(
            "unknown experiment `{other}` (available: {})",
            EXPERIMENTS.join(", ")
        ))),
    }
}

fn ball_grid(n: usize, resolution: u32) -> Result<Arc<Grid>> {
    Ok(Arc::new(discretize(
        &DomainSpec::radial_ball(1.0, n)?,
        resolution,
    )?))
}

fn radial_rows(u: &Field) -> Vec<Vec<f64>> {
    (0..u.len())
        .map(|k| vec![u.grid().interior_coords(k)[0], u.values()[k]])
        .collect()
}

const SLAB_WIDTH: f64 = 2.0 * std::f64::consts::SQRT_2;

fn bratu_threshold(config: &ExperimentConfig, out_dir: &Path) -> Result<ResultRecord> {
    config.check_keys(&["n", "theta"])?;
    let n = config.usize_or("n", 2)?;
    let theta = config.f64_or("theta", 0.5)?;
    let mut record = ResultRecord::new(config);

    let star = bratu_lambda_star(n, theta)?;
    record.value("lambda_star", star, Provenance::Formula);
    let (theta_opt, star_opt) = optimize_theta(|t| bratu_lambda_star(n, t).unwrap());
    record.value("theta_optimal", theta_opt, Provenance::Run);
    record.value("lambda_star_optimal", star_opt, Provenance::Run);
    record.value_note(
        "lambda_star_per_dimension",
        star_opt / n as f64,
        Provenance::Run,
        "optimized threshold divided by n; the threshold is linear in n",
    );

    if n == 2 && (theta - 0.5).abs() < 1e-12 {
        record.check_expectation("bratu_lambda_star_n2_theta_half", star);
    }
    let linear = bratu_lambda_star(1, theta)? * n as f64;
    record.check(
        "linear_in_dimension",
        (star - linear).abs() <= 1e-12 * star.max(1.0),
        format!("lambda_star(n, theta) = n * lambda_star(1, theta): {star} vs {linear}"),
    );

    let rows: Vec<Vec<f64>> = (1..100)
        .map(|i| {
            let t = i as f64 / 100.0;
            vec![t, bratu_lambda_star(n, t).unwrap()]
        })
        .collect();
    let path = write_plot_data(out_dir, "bratu-threshold_curve.dat", config, &["theta", "lambda_star"], &rows)?;
    record.artifacts.push((
        path.file_name().unwrap().to_string_lossy().into_owned(),
        format!("feasibility threshold over theta at n = {n}"),
    ));
    Ok(record)
}

fn conformal(config: &ExperimentConfig, out_dir: &Path) -> Result<ResultRecord> {
    config.check_keys(&["lambda", "m_max", "resolution", "tol", "strip", "theta"])?;
    let lambda = config.f64_or("lambda", 0.14)?;
    let m_max = config.usize_or("m_max", 6)?;
    let resolution = config.u32_or("resolution", 16)?;
    let tol = config.f64_or("tol", 1e-8)?;
    let strip = config.bool_or("strip", true)?;
    let mut record = ResultRecord::new(config);

    let (theta_star, threshold) = conformal_threshold();
    record.value("threshold", threshold, Provenance::Formula);
    record.value("theta_argmax", theta_star, Provenance::Run);
    record.check_expectation("conformal_threshold", threshold);
    record.check_expectation("conformal_argmax_theta", theta_star);
    record.check(
        "lambda_below_threshold",
        lambda <= threshold,
        format!("lambda = {lambda} vs threshold = {threshold}"),
    );

    if strip {
        let theta = config.f64_or("theta", theta_star)?;
        let template = SlabProblem {
            lambda,
            h: 0.0,
            nonlinearity: nonlinearity::exp_two(),
            nonlinearity_v: None,
        };
        let run = solve_on_slab(
            &template,
            SLAB_WIDTH,
            m_max,
            resolution,
            SlabScheme::Contraction {
                theta,
                force: false,
            },
            SeedKind::ZeroStart,
            tol,
        )?;
        record_exhaustion(&mut record, &run, config, out_dir, "conformal")?;
        record.check(
            "longitudinal_symmetry",
            run.longitudinal_variation <= 1e-3,
            format!(
                "variation {} on the window at m = {m_max} (x-independent data)",
                run.longitudinal_variation
            ),
        );
    }
    Ok(record)
}

/// Shared reporting for exhaustion runs: sup norms, window decay, bounds.
fn record_exhaustion(
    record: &mut ResultRecord,
    run: &ExhaustionRun,
    config: &ExperimentConfig,
    out_dir: &Path,
    stem: &str,
) -> Result<()> {
    record.value("monotone_in_m_min", run.monotone_min, Provenance::Run);
    record.check(
        "monotone_in_m",
        run.monotone_min >= -1e-7,
        format!("min over shared nodes of u_(m+1) - u_m = {}", run.monotone_min),
    );
    record.value(
        "sup_norm_final",
        *run.sup_norms.last().unwrap(),
        Provenance::Run,
    );
    if let Some(bound) = run.uniform_bound {
        record.value("uniform_bound", bound, Provenance::Formula);
        record.check(
            "uniform_bound_respected",
            run.bound_respected == Some(true),
            format!(
                "max sup norm {} vs bound {bound}",
                run.sup_norms.iter().cloned().fold(0.0, f64::max)
            ),
        );
    }
    let window = window_convergence_report(run);
    if let Some(ratio) = window.fitted_ratio {
        record.value("window_decay_ratio", ratio, Provenance::Run);
        record.check(
            "window_decay",
            ratio < 1.0,
            format!("fitted window-difference decay ratio {ratio}"),
        );
    }
    record.value(
        "longitudinal_variation",
        run.longitudinal_variation,
        Provenance::Run,
    );

    let mut rows = Vec::new();
    for m in 0..=run.m_max {
        rows.push(vec![
            m as f64,
            run.sup_norms[m],
            if m == 0 {
                f64::NAN
            } else {
                run.window_differences[m - 1]
            },
        ]);
    }
    let rows: Vec<Vec<f64>> = rows
        .into_iter()
        .map(|r| if r[2].is_nan() { vec![r[0], r[1], 0.0] } else { r })
        .collect();
    let path = write_plot_data(
        out_dir,
        &format!("{stem}_exhaustion.dat"),
        config,
        &["m", "sup_norm", "window_difference"],
        &rows,
    )?;
    record.artifacts.push((
        path.file_name().unwrap().to_string_lossy().into_owned(),
        "per-truncation sup norms and window differences".into(),
    ));

    // transverse profile of the window field at the longitudinal center
    let shape = run.window_field.grid().interior_shape();
    let mid = shape[0] / 2;
    let profile: Vec<Vec<f64>> = (0..shape[1])
        .map(|j| {
            let k = mid * shape[1] + j;
            let x = run.window_field.grid().interior_coords(k);
            vec![x[1], run.window_field.values()[k], run.extrapolated_window.values()[k]]
        })
        .collect();
    let path = write_plot_data(
        out_dir,
        &format!("{stem}_profile.dat"),
        config,
        &["x_transverse", "u", "u_extrapolated"],
        &profile,
    )?;
    record.artifacts.push((
        path.file_name().unwrap().to_string_lossy().into_owned(),
        "transverse profile at the window center, largest truncation".into(),
    ));

    // full grid dump of the window field
    let dump: Vec<Vec<f64>> = (0..run.window_field.len())
        .map(|k| {
            let x = run.window_field.grid().interior_coords(k);
            vec![x[0], x[1], run.window_field.values()[k]]
        })
        .collect();
    let path = write_plot_data(
        out_dir,
        &format!("{stem}_window.dat"),
        config,
        &["x", "y", "u"],
        &dump,
    )?;
    record.artifacts.push((
        path.file_name().unwrap().to_string_lossy().into_owned(),
        "window field on the observation grid".into(),
    ));
    Ok(())
}

/// Export a radial profile as (r, value) rows for plotting.
fn profile_rows<F: Fn(f64) -> f64>(r_max: f64, samples: usize, f: F) -> Vec<Vec<f64>> {
    (0..=samples)
        .map(|i| {
            let r = r_max * i as f64 / samples as f64;
            vec![r, f(r)]
        })
        .collect()
}

fn bratu_solve(config: &ExperimentConfig, out_dir: &Path) -> Result<ResultRecord> {
    config.check_keys(&["n", "lambda", "theta", "resolution", "tol", "force", "max_iter"])?;
    let n = config.usize_or("n", 2)?;
    let lambda = config.f64_or("lambda", 1.0)?;
    let theta = config.f64_or("theta", 0.5)?;
    let resolution = config.u32_or("resolution", 2000)?;
    let tol = config.f64_or("tol", 1e-8)?;
    let force = config.bool_or("force", false)?;
    let max_iter = config.usize_or("max_iter", 500)?;
    let mut record = ResultRecord::new(config);

    let grid = ball_grid(n, resolution)?;
    let problem = Problem::new(
        grid,
        Coefficient::Constant(lambda),
        Coefficient::Constant(0.0),
        nonlinearity::exp(),
    )?;
    let params = ContractionParams {
        theta,
        tol,
        max_iter,
        force,
    };
    let (u, report) = iterate_contraction(&problem, &params)?;

    let star = bratu_lambda_star(n, theta)?;
    record.value("lambda_star", star, Provenance::Formula);
    record.value("sup_norm", u.sup_norm(), Provenance::Run);
    record.value("iterations", report.iterations as f64, Provenance::Run);
    record.value("residual", report.final_residual, Provenance::Run);
    if let Some(r) = report.fitted_ratio {
        record.value("fitted_contraction_ratio", r, Provenance::Run);
    }
    if let Some(r) = report.max_ratio {
        record.value("max_contraction_ratio", r, Provenance::Run);
    }
    record.check(
        "converged",
        report.converged,
        format!("{} iterations", report.iterations),
    );
    record.check(
        "residual_small",
        report.final_residual <= 1e-6,
        format!("residual {}", report.final_residual),
    );
    let hyp = report.hypothesis.unwrap();
    record.value("c_lambda_m", hyp.c * hyp.lambda_sup * hyp.m, Provenance::Formula);
    if hyp.satisfied {
        record.value("a_priori_bound", hyp.a_priori_bound, Provenance::Formula);
        record.check(
            "a_priori_bound_respected",
            report.bound_respected == Some(true),
            format!("sup {} vs bound {}", u.sup_norm(), hyp.a_priori_bound),
        );
        record.check(
            "contraction_ratio_within_theory",
            report.max_ratio.is_none_or(|r| r <= (1.0 - theta) + 0.05),
            format!("max ratio {:?} vs 1 - theta + 0.05", report.max_ratio),
        );
    } else {
        record.value_note(
            "a_priori_bound",
            f64::NAN,
            Provenance::Formula,
            "hypothesis not satisfied; exploratory run",
        );
    }

    // regression oracle for the canonical run
    if n == 2 && lambda == 1.0 && theta == 0.5 && resolution == 2000 {
        record.check_expectation("bratu_solve_sup_default", u.sup_norm());
    }

    let path = write_plot_data(
        out_dir,
        "bratu-solve_profile.dat",
        config,
        &["r", "u"],
        &radial_rows(&u),
    )?;
    record.artifacts.push((
        path.file_name().unwrap().to_string_lossy().into_owned(),
        format!("radial solution profile at lambda = {lambda}, n = {n}"),
    ));
    Ok(record)
}

fn sublinear_scaling(config: &ExperimentConfig, out_dir: &Path) -> Result<ResultRecord> {
    config.check_keys(&["p", "dims", "resolution", "tol"])?;
    let p = config.f64_or("p", 0.5)?;
    let dims = config.usize_list_or("dims", &[2, 3, 4, 5, 6, 8, 10, 12, 16])?;
    let resolution = config.u32_or("resolution", 400)?;
    let tol = config.f64_or("tol", 1e-8)?;
    let mut record = ResultRecord::new(config);
    if !(p > 0.0 && p <= 0.5) {
        return Err(Error::Config(format!("p must lie in (0, 1/2], got {p}")));
    }

    // independent runs across dimensions; fan out over the worker pool
    let mut slots: Vec<Option<Result<(f64, f64, f64)>>> =
        (0..dims.len()).map(|_| None).collect();
    let workers = worker_count().min(dims.len().max(1));
    std::thread::scope(|scope| {
        let chunks: Vec<Vec<usize>> = (0..workers)
            .map(|w| (w..dims.len()).step_by(workers).collect())
            .collect();
        let mut handles = Vec::new();
        for chunk in chunks {
            let dims = &dims;
            handles.push(scope.spawn(move || {
                chunk
                    .into_iter()
                    .map(|idx| {
                        let n = dims[idx];
                        let out = run_seeded_power(n, p, resolution, tol);
                        (idx, out)
                    })
                    .collect::<Vec<_>>()
            }));
        }
        for handle in handles {
            for (idx, out) in handle.join().expect("worker panicked") {
                slots[idx] = Some(out);
            }
        }
    });

    let mut rows = Vec::new();
    let mut products = Vec::new();
    let exponent = 1.0 / (1.0 - p);
    for (idx, slot) in slots.into_iter().enumerate() {
        let n = dims[idx];
        let (sup, bound, monotone_min) = slot.expect("all slots filled")?;
        record.check(
            &format!("monotone_n{n}"),
            monotone_min >= -1e-7,
            format!("min iterate increment {monotone_min}"),
        );
        record.check(
            &format!("bound_n{n}"),
            sup <= bound,
            format!("sup {sup} vs three-term bound {bound}"),
        );
        products.push(sup * (n as f64).powf(exponent));
        rows.push(vec![n as f64, sup, bound]);
    }
    let spread = products.iter().cloned().fold(0.0f64, f64::max)
        / products.iter().cloned().fold(f64::INFINITY, f64::min);
    record.value("scaling_spread", spread, Provenance::Run);
    record.check(
        "scaling_within_band",
        spread <= 4.0,
        format!("sup * n^(1/(1-p)) spread {spread} over n in {dims:?}"),
    );
    if (p - 0.5).abs() < 1e-12 {
        record.check_expectation(
            "sublinear_norm_bound_n2_p_half",
            sublinear_norm_bound(2, 0.5)?,
        );
    }

    let path = write_plot_data(
        out_dir,
        "sublinear-scaling.dat",
        config,
        &["n", "sup_norm", "bound"],
        &rows,
    )?;
    record.artifacts.push((
        path.file_name().unwrap().to_string_lossy().into_owned(),
        format!("sup norms against the three-term bound, p = {p}"),
    ));
    Ok(record)
}

/// Monotone run of `-Lap u = u^p` on the unit ball in dimension n, seeded
/// with the w profile at 3/4 of the admissible coefficient. Returns
/// (sup norm, three-term bound, monotone min).
fn run_seeded_power(n: usize, p: f64, resolution: u32, tol: f64) -> Result<(f64, f64, f64)> {
    let grid = ball_grid(n, resolution)?;
    let eps = 0.75 * epsilon_max(n, p)?;
    let w = radial_w(n, eps);
    let seed = grid.evaluate(|x| w.value(x[0]));
    let problem = Problem::new(
        grid,
        Coefficient::Constant(1.0),
        Coefficient::Constant(0.0),
        nonlinearity::power(p)?,
    )?;
    let params = MonotoneParams { tol, max_iter: 2000 };
    let (u, report) = iterate_monotone(&problem, &seed, &params)?;
    Ok((
        u.sup_norm(),
        sublinear_norm_bound(n, p)?,
        report.monotone_min,
    ))
}

fn lane_emden(config: &ExperimentConfig, out_dir: &Path) -> Result<ResultRecord> {
    config.check_keys(&[
        "domain", "n", "p", "q", "resolution", "tol", "m_max", "eta", "eta_prime", "d",
    ])?;
    let domain = config.str_or("domain", "ball");
    let p = config.f64_or("p", 0.5)?;
    let q = config.f64_or("q", 0.5)?;
    let tol = config.f64_or("tol", 1e-8)?;
    let mut record = ResultRecord::new(config);
    if !(p > 0.0 && p <= 0.5 && q > 0.0 && q <= 0.5) {
        return Err(Error::Config(format!(
            "exponents must lie in (0, 1/2], got p = {p}, q = {q}"
        )));
    }

    match domain {
        "ball" => {
            let n = config.usize_or("n", 2)?;
            let resolution = config.u32_or("resolution", 512)?;
            let grid = ball_grid(n, resolution)?;
            // the seed must be a subsolution for both exponents
            let eps = 0.75 * epsilon_max(n, p)?.min(epsilon_max(n, q)?);
            let w = radial_w(n, eps);
            let seed = grid.evaluate(|x| w.value(x[0]));
            let make = |e: f64| -> Result<Problem> {
                Problem::new(
                    Arc::clone(&grid),
                    Coefficient::Constant(1.0),
                    Coefficient::Constant(0.0),
                    nonlinearity::power(e)?,
                )
            };
            let problem_u = make(p)?;
            let problem_v = make(q)?;
            let params = MonotoneParams { tol, max_iter: 2000 };
            let (u, v, (report_u, report_v)) =
                iterate_system(&problem_u, &problem_v, &seed, &seed, &params)?;
            record.value("sup_u", u.sup_norm(), Provenance::Run);
            record.value("sup_v", v.sup_norm(), Provenance::Run);
            record.value("residual_u", report_u.final_residual, Provenance::Run);
            record.value("residual_v", report_v.final_residual, Provenance::Run);
            record.check(
                "converged",
                report_u.converged && report_v.converged,
                format!("{} iterations", report_u.iterations),
            );
            record.check(
                "monotone",
                report_u.monotone_min >= -1e-7 && report_v.monotone_min >= -1e-7,
                format!(
                    "min increments {} / {}",
                    report_u.monotone_min, report_v.monotone_min
                ),
            );
            record.check(
                "nontrivial_above_seed",
                u.min_difference(&seed)? >= -1e-9 && u.sup_norm() > 0.0,
                format!("min(u - w) = {}", u.min_difference(&seed)?),
            );
            record.check(
                "residuals_small",
                report_u.final_residual <= 1e-6 && report_v.final_residual <= 1e-6,
                format!("{} / {}", report_u.final_residual, report_v.final_residual),
            );
            if (p - q).abs() < 1e-15 {
                let diff = u.sup_difference(&v)?;
                record.check(
                    "symmetry_u_equals_v",
                    diff <= 10.0 * tol,
                    format!("sup|u - v| = {diff} (equal exponents, equal seeds)"),
                );
            }
            if n == 2 && p == 0.5 && q == 0.5 && resolution == 512 {
                record.check_expectation("lane_emden_ball_sup_default", u.sup_norm());
            }
            let rows: Vec<Vec<f64>> = (0..u.len())
                .map(|k| {
                    vec![
                        grid.interior_coords(k)[0],
                        u.values()[k],
                        v.values()[k],
                        seed.values()[k],
                    ]
                })
                .collect();
            let path = write_plot_data(
                out_dir,
                "lane-emden_profile.dat",
                config,
                &["r", "u", "v", "seed_w"],
                &rows,
            )?;
            record.artifacts.push((
                path.file_name().unwrap().to_string_lossy().into_owned(),
                format!("system solution on the ball, p = {p}, q = {q}"),
            ));
        }
        "slab" => {
            let resolution = config.u32_or("resolution", 64)?;
            let m_max = config.usize_or("m_max", 3)?;
            let eta = config.f64_or("eta", 0.1)?;
            let eta_prime = config.f64_or("eta_prime", 0.1)?;
            let d = config.f64_or("d", SLAB_WIDTH)?;
            let template = SlabProblem {
                lambda: 1.0,
                h: 0.0,
                nonlinearity: nonlinearity::power(p)?,
                nonlinearity_v: Some(nonlinearity::power(q)?),
            };
            let run = solve_on_slab(
                &template,
                d,
                m_max,
                resolution,
                SlabScheme::System,
                SeedKind::Glued { p: p.max(q), eta, eta_prime },
                tol,
            )?;
            record_exhaustion(&mut record, &run, config, out_dir, "lane-emden")?;
            record.check(
                "nontrivial",
                run.sup_norms.iter().all(|s| *s > 0.0),
                format!("sup norms {:?}", run.sup_norms),
            );
            // the seed profile itself, for figure-style plots of z
            let z = glued_z(
                2,
                p.max(q),
                eta,
                eta_prime,
                &Arc::new(discretize(
                    &DomainSpec::slab_truncation(d, 0, 2)?,
                    resolution,
                )?),
            )?;
            let rows = profile_rows(1.0 + eta_prime + 0.2, 600, |r| z.value_radial(r));
            let path = write_plot_data(
                out_dir,
                "lane-emden_seed_profile.dat",
                config,
                &["r", "z"],
                &rows,
            )?;
            record.artifacts.push((
                path.file_name().unwrap().to_string_lossy().into_owned(),
                "glued subsolution profile used to seed the slab system".into(),
            ));
        }
        other => {
            return Err(Error::Config(format!(
                "domain must be `ball` or `slab`, got `{other}`"
            )))
        }
    }
    Ok(record)
}

fn staircase_run(config: &ExperimentConfig, out_dir: &Path) -> Result<ResultRecord> {
    config.check_keys(&["n", "p", "resolution", "tol"])?;
    let n = config.usize_or("n", 2)?;
    let max_p = staircase_max_exponent(n);
    let p = config.f64_or("p", max_p)?;
    let resolution = config.u32_or("resolution", 256)?;
    let tol = config.f64_or("tol", 1e-8)?;
    let mut record = ResultRecord::new(config);

    record.value("max_exponent", max_p, Provenance::Formula);
    record.check(
        "exponent_feasible",
        p <= max_p + 1e-12,
        format!("p = {p} vs log10(n) = {max_p}"),
    );
    // the comparison made at n = 18: the staircase exponent ceiling
    // overtakes (n+2)/(n-2) from dimension 18 on
    record.check_expectation("staircase_max_exponent_n18", staircase_max_exponent(18));
    record.check(
        "faster_growth_from_n18",
        staircase_max_exponent(18) >= (18.0 + 2.0) / (18.0 - 2.0),
        format!(
            "log10(18) = {} vs (n+2)/(n-2) = 1.25",
            staircase_max_exponent(18)
        ),
    );

    let grid = ball_grid(n, resolution)?;
    let problem = Problem::new(
        Arc::clone(&grid),
        Coefficient::Constant(1.0),
        Coefficient::Constant(1.0),
        nonlinearity::staircase(p)?,
    )?;
    let op = assemble_laplacian(&grid);
    let (seed, _) = poisson_solve(&op, &problem.h_field(), tol.min(1e-10))?;
    let params = MonotoneParams { tol, max_iter: 2000 };
    let (u, report) = iterate_monotone(&problem, &seed, &params)?;
    record.value("sup_norm", u.sup_norm(), Provenance::Run);
    record.value("iterations", report.iterations as f64, Provenance::Run);
    let g = problem.nonlinearity().growth().unwrap();
    let feasibility = sublinear_feasible(
        problem.constant(),
        1.0,
        g.coefficient,
        g.exponent,
        1.0,
    );
    record.value(
        "c_k_lambda",
        problem.constant() * g.coefficient,
        Provenance::Formula,
    );
    if let Some(bound) = feasibility.bound {
        record.value("predicted_bound", bound, Provenance::Formula);
    }
    record.check(
        "monotone",
        report.monotone_min >= -1e-7,
        format!("min increment {}", report.monotone_min),
    );
    record.check(
        "sup_below_one",
        u.sup_norm() <= 1.0,
        format!("sup {}", u.sup_norm()),
    );
    record.check("converged", report.converged, format!("{} iterations", report.iterations));
    if n == 2 && resolution == 256 && (p - max_p).abs() < 1e-15 {
        record.check_expectation("staircase_sup_default", u.sup_norm());
    }

    let path = write_plot_data(
        out_dir,
        "staircase_profile.dat",
        config,
        &["r", "u"],
        &radial_rows(&u),
    )?;
    record.artifacts.push((
        path.file_name().unwrap().to_string_lossy().into_owned(),
        format!("staircase solution on the ball, n = {n}, p = {p}"),
    ));
    Ok(record)
}

fn slab_run(config: &ExperimentConfig, out_dir: &Path) -> Result<ResultRecord> {
    config.check_keys(&[
        "scheme",
        "nonlinearity",
        "param",
        "q",
        "lambda",
        "h",
        "d",
        "m_max",
        "resolution",
        "tol",
        "theta",
        "seed",
        "eta",
        "eta_prime",
        "force",
    ])?;
    let scheme_name = config.str_or("scheme", "monotone");
    let nl_name = config.str_or("nonlinearity", "staircase");
    let param = config.f64_or("param", 0.25)?;
    let lambda = config.f64_or("lambda", 0.25)?;
    let h = config.f64_or("h", 0.4)?;
    let d = config.f64_or("d", SLAB_WIDTH)?;
    let m_max = config.usize_or("m_max", 4)?;
    let resolution = config.u32_or("resolution", 8)?;
    let tol = config.f64_or("tol", 1e-8)?;
    let force = config.bool_or("force", false)?;
    let mut record = ResultRecord::new(config);

    let f = nonlinearity::catalog(nl_name, Some(param))?;
    let scheme = match scheme_name {
        "contraction" => SlabScheme::Contraction {
            theta: config.f64_or("theta", 0.5)?,
            force,
        },
        "monotone" => SlabScheme::Monotone,
        "system" => SlabScheme::System,
        other => {
            return Err(Error::Config(format!(
                "scheme must be contraction|monotone|system, got `{other}`"
            )))
        }
    };
    let nonlinearity_v = match scheme {
        SlabScheme::System => Some(nonlinearity::power(config.f64_or("q", param)?)?),
        _ => None,
    };
    let seed = match config.str_or("seed", "zero") {
        "zero" => SeedKind::ZeroStart,
        "glued" => SeedKind::Glued {
            p: param,
            eta: config.f64_or("eta", 0.1)?,
            eta_prime: config.f64_or("eta_prime", 0.1)?,
        },
        other => {
            return Err(Error::Config(format!(
                "seed must be zero|glued, got `{other}`"
            )))
        }
    };
    let template = SlabProblem {
        lambda,
        h,
        nonlinearity: f,
        nonlinearity_v,
    };
    let run = solve_on_slab(&template, d, m_max, resolution, scheme, seed, tol)?;
    record_exhaustion(&mut record, &run, config, out_dir, "slab")?;

    // conditions of the growth-bounded regime, recorded for the default
    // staircase demonstration (c = d^2/8)
    if let Some(g) = template.nonlinearity.growth() {
        let c = d * d / 8.0;
        record.value("c_k_lambda", c * g.coefficient * lambda, Provenance::Formula);
        record.value("lambda_k", lambda * g.coefficient, Provenance::Formula);
    }
    Ok(record)
}

/// Small deterministic generator for the randomized positivity and
/// comparison checks; keeps `verify` reproducible without an RNG crate.
struct Lcg(u64);

impl Lcg {
    fn next_f64(&mut self) -> f64 {
        self.0 = self
            .0
            .wrapping_mul(6364136223846793005)
            .wrapping_add(1442695040888963407);
        (self.0 >> 11) as f64 / (1u64 << 53) as f64
    }
}

fn verify(config: &ExperimentConfig, _out_dir: &Path) -> Result<ResultRecord> {
    config.check_keys(&[])?;
    let mut record = ResultRecord::new(config);

    // Lambert W back-substitution across the principal-branch range
    let mut worst = 0.0f64;
    let inv_e = 1.0 / std::f64::consts::E;
    let mut xs = vec![-inv_e + 1e-9, -0.25, -1e-8, 1e-8, 0.5, 1.0, std::f64::consts::E];
    let mut x = 10.0;
    while x <= 1e6 {
        xs.push(x);
        x *= 10.0;
    }
    for &x in &xs {
        let w = lambert_w(x)?;
        worst = worst.max((w * w.exp() - x).abs() / x.abs().max(1.0));
    }
    record.value("lambert_back_substitution_worst", worst, Provenance::Run);
    record.check(
        "lambert_back_substitution",
        worst <= 1e-12,
        format!("worst relative defect {worst}"),
    );
    record.check_expectation("lambert_w_one", lambert_w(1.0)?);

    // thresholds
    record.check_expectation("bratu_lambda_star_n2_theta_half", bratu_lambda_star(2, 0.5)?);
    let (theta_star, threshold) = conformal_threshold();
    record.check_expectation("conformal_threshold", threshold);
    record.check_expectation("conformal_argmax_theta", theta_star);

    // the per-dimension coefficient audit: the displayed formula evaluates
    // to half the reported figure; assert only internal consistency and
    // surface both numbers
    let theta_report = 0.412962;
    let coeff = 2.0 * theta_report * lambert_w((1.0 - theta_report) / theta_report)?;
    record.check_expectation("lambda_star_coefficient_computed", coeff);
    record.value_note(
        "lambda_star_coefficient_reported",
        1.162022,
        Provenance::Literature,
        "reported coefficient; direct evaluation of the displayed formula \
         gives half this value, flagged for the reader",
    );
    let consistent = (coeff - bratu_lambda_star(1, theta_report)?).abs() <= 1e-9;
    record.check(
        "lambda_star_coefficient_internal_consistency",
        consistent,
        format!("2 theta W((1-theta)/theta) = {coeff} vs bratu_lambda_star(1, theta)"),
    );
    record.check(
        "lambda_star_coefficient_flagged",
        (coeff * 2.0 - 1.162022).abs() <= 1e-4,
        format!(
            "computed {coeff} is half the reported 1.162022 (factor {})",
            1.162022 / coeff
        ),
    );

    // exact maximum-principle values on intervals and balls
    let mut max_exact = true;
    let mut detail = String::new();
    for d in [1.0, 2.0, SLAB_WIDTH] {
        let grid = Arc::new(discretize(&DomainSpec::interval(d)?, 128)?);
        let op = assemble_laplacian(&grid);
        let one = Field::constant(Arc::clone(&grid), 1.0);
        let (u, _) = poisson_solve(&op, &one, 1e-10)?;
        let err = (u.sup_norm() - d * d / 8.0).abs();
        let ok = err <= 2.0 * grid.min_spacing().powi(2);
        max_exact &= ok;
        detail.push_str(&format!("interval d={d}: err {err:.2e}; "));
    }
    for n in [2usize, 3, 5] {
        let grid = ball_grid(n, 128)?;
        let op = assemble_laplacian(&grid);
        let one = Field::constant(Arc::clone(&grid), 1.0);
        let (u, _) = poisson_solve(&op, &one, 1e-10)?;
        let err = (u.sup_norm() - 1.0 / (2.0 * n as f64)).abs();
        let ok = err <= 2.0 * grid.min_spacing().powi(2);
        max_exact &= ok;
        detail.push_str(&format!("ball n={n}: err {err:.2e}; "));
    }
    record.check("max_principle_exact_cases", max_exact, detail);

    // radial oracle refinement study
    let mut orders_ok = true;
    let mut order_detail = String::new();
    for n in [2usize, 3, 5] {
        let mut errs = Vec::new();
        for res in [50u32, 100, 200] {
            let grid = ball_grid(n, res)?;
            let op = assemble_laplacian(&grid);
            let eps = 0.9;
            let src = grid.evaluate(|x| eps * (1.0 - x[0] * x[0]));
            let (u, _) = poisson_solve(&op, &src, 1e-11)?;
            let w = radial_w(n, eps);
            let mut err = 0.0f64;
            for (k, v) in u.values().iter().enumerate() {
                err = err.max((v - w.value(grid.interior_coords(k)[0])).abs());
            }
            errs.push(err);
        }
        let order = (errs[0] / errs[2]).log2() / 2.0;
        orders_ok &= order >= 1.9;
        order_detail.push_str(&format!("n={n}: order {order:.3}; "));
    }
    record.check("radial_oracle_second_order", orders_ok, order_detail);

    // inverse positivity, comparison and linearity with seeded pseudo-random
    // sources on a box grid
    let grid = Arc::new(discretize(&DomainSpec::boxed(vec![2.0, 1.0])?, 16)?);
    let op = assemble_laplacian(&grid);
    let mut rng = Lcg(0x5eed_cafe_f00d_0001);
    let mut positivity_ok = true;
    let mut comparison_ok = true;
    let mut linearity_ok = true;
    for _ in 0..5 {
        let g1: Vec<f64> = (0..grid.interior_count()).map(|_| rng.next_f64()).collect();
        let g2: Vec<f64> = (0..grid.interior_count())
            .map(|k| g1[k] + rng.next_f64())
            .collect();
        let f1 = Field::new(Arc::clone(&grid), g1)?;
        let f2 = Field::new(Arc::clone(&grid), g2)?;
        let (u1, d1) = poisson_solve(&op, &f1, 1e-10)?;
        let (u2, _) = poisson_solve(&op, &f2, 1e-10)?;
        positivity_ok &= d1.positivity == Some(true);
        comparison_ok &= u2.min_difference(&u1)? >= -1e-9;
        let combo = Field::new(
            Arc::clone(&grid),
            f1.values()
                .iter()
                .zip(f2.values())
                .map(|(a, b)| 1.5 * a - 0.5 * b)
                .collect(),
        )?;
        let (uc, _) = poisson_solve(&op, &combo, 1e-10)?;
        let mut lin_err = 0.0f64;
        for k in 0..uc.len() {
            lin_err = lin_err.max((uc.values()[k] - (1.5 * u1.values()[k] - 0.5 * u2.values()[k])).abs());
        }
        linearity_ok &= lin_err <= 1e-9;
    }
    record.check("inverse_positivity", positivity_ok, "random nonnegative sources".into());
    record.check("comparison", comparison_ok, "ordered sources give ordered solutions".into());
    record.check("linearity", linearity_ok, "solve is linear in the source".into());

    // M-matrix structure on every grid kind
    let mut m_ok = true;
    for spec in [
        DomainSpec::interval(1.5)?,
        DomainSpec::boxed(vec![2.0, 1.0])?,
        DomainSpec::radial_ball(1.0, 3)?,
        DomainSpec::slab_truncation(SLAB_WIDTH, 0, 2)?,
    ] {
        let grid = Arc::new(discretize(&spec, 12)?);
        m_ok &= assemble_laplacian(&grid).is_m_matrix();
    }
    record.check("m_matrix_structure", m_ok, "diagonal dominance and sign pattern".into());

    // subsolution certification
    record.check_expectation("epsilon_max_n2_p_half", epsilon_max(2, 0.5)?);
    record.check_expectation("w_center_n2", radial_w(2, 1.0).value(0.0));
    let grid = ball_grid(2, 200)?;
    let eps = 0.75 * epsilon_max(2, 0.5)?;
    let w = radial_w(2, eps);
    let report = verify_subsolution(|x| w.value(x[0]), 0.5, &grid);
    record.check(
        "w_certifies_at_three_quarters",
        report.pass,
        format!("worst violation {}", report.worst),
    );
    let w_big = radial_w(2, 10.0 * epsilon_max(2, 0.5)?);
    let report_big = verify_subsolution(|x| w_big.value(x[0]), 0.5, &grid);
    record.check(
        "oversized_epsilon_fails",
        !report_big.pass,
        format!("worst violation {}", report_big.worst),
    );
    let box_grid = Arc::new(discretize(&DomainSpec::boxed(vec![4.0, 4.0])?, 64)?);
    let z_ok = glued_z(2, 0.5, 0.1, 0.1, &box_grid).is_ok();
    record.check("glued_profile_certifies", z_ok, "quintic glue on the 4x4 box at resolution 64".into());

    // improved constants
    let ball = DomainSpec::radial_ball(1.0, 4)?;
    record.check(
        "improved_constant_balls",
        (max_principle_constant(&ball, true).value - 1.0 / 8.0).abs() < 1e-15,
        "d^2/(8n) on the ball".into(),
    );

    // staircase structure: nondecreasing, left-open right-closed steps
    let f = nonlinearity::staircase(1.0)?;
    let mut stair_ok = f.value(0.25) == 2.0 && f.value(0.1) == 0.0;
    let mut prev = -1.0;
    for i in 0..4000 {
        let x = i as f64 * 5e-4;
        let v = f.value(x);
        stair_ok &= v >= prev;
        prev = v;
    }
    record.check("staircase_structure", stair_ok, "steps l on (l/10, (l+1)/10]".into());
    record.check_expectation("staircase_max_exponent_n18", staircase_max_exponent(18));

    // a small contraction run plus scheme agreement with the monotone path
    let grid = ball_grid(2, 200)?;
    let problem = Problem::new(
        Arc::clone(&grid),
        Coefficient::Constant(0.5),
        Coefficient::Constant(0.1),
        nonlinearity::exp(),
    )?;
    let (u_contr, rep) = iterate_contraction(&problem, &ContractionParams::default())?;
    record.check(
        "contraction_run",
        rep.converged
            && rep.bound_respected == Some(true)
            && rep.final_residual <= 1e-6
            && rep.max_ratio.is_none_or(|r| r <= 0.55),
        format!(
            "ratio {:?}, residual {}",
            rep.max_ratio, rep.final_residual
        ),
    );
    let op = assemble_laplacian(&grid);
    let (seed, _) = poisson_solve(&op, &problem.h_field(), 1e-10)?;
    let (u_mono, rep_mono) = iterate_monotone(&problem, &seed, &MonotoneParams::default())?;
    let agreement = u_contr.sup_difference(&u_mono)?;
    record.check(
        "scheme_agreement",
        rep_mono.converged && agreement <= 10.0 * (1e-8 + grid.min_spacing().powi(2)),
        format!("sup difference {agreement}"),
    );
    let r = residual(&problem, &u_contr)?;
    record.check("residual_check", r <= 1e-6, format!("residual {r}"));

    // discrete maximum principle report on the contraction solution
    let mp = check_discrete_max_principle(&u_contr, &problem.source_for(&u_contr), problem.constant());
    record.check(
        "max_principle_on_run",
        mp.pass,
        format!("sup {} vs c*||source|| = {}", mp.solution_sup, mp.bound),
    );

    // fixed-point radius solves its equation
    let hyp = sublinear_feasible(0.25, 1.0, 1.0, 0.5, 0.3);
    let radius = hyp.bound.unwrap();
    let defect = (0.25 * radius.sqrt() + 0.25 * 0.3 - radius).abs();
    record.check(
        "fixed_point_radius",
        defect <= 1e-9,
        format!("defect {defect}"),
    );

    // config round-trip and determinism
    let mut cfg = ExperimentConfig::new("bratu-solve");
    cfg.set("lambda", 1.0).set("resolution", 100);
    let round = ExperimentConfig::parse(&cfg.emit())?;
    record.check(
        "config_round_trip",
        round == cfg && round.emit() == cfg.emit(),
        "parse(emit(config)) = config".into(),
    );

    Ok(record)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::path::PathBuf;

    fn tmp_dir(name: &str) -> PathBuf {
        let dir = std::env::temp_dir().join(format!("slabsolve-test-{name}-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        dir
    }

    #[test]
    fn bratu_threshold_record() {
        let config = ExperimentConfig::new("bratu-threshold");
        let out = tmp_dir("bt");
        let record = run(&config, &out).unwrap();
        assert!(record.pass(), "checks: {:?}", record.checks);
        let star = record.values.get("lambda_star").unwrap().value;
        assert!((star - 1.13429).abs() < 1e-4);
    }

    #[test]
    fn unknown_experiment_is_config_error() {
        let config = ExperimentConfig::new("nope");
        assert!(matches!(
            run(&config, &tmp_dir("unknown")),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn unknown_key_is_rejected_before_compute() {
        let mut config = ExperimentConfig::new("bratu-threshold");
        config.set("bogus", 1);
        assert!(matches!(
            run(&config, &tmp_dir("key")),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn bratu_solve_small_run() {
        let mut config = ExperimentConfig::new("bratu-solve");
        config.set("resolution", 200);
        let out = tmp_dir("bs");
        let record = run(&config, &out).unwrap();
        assert!(record.pass(), "checks: {:?}", record.checks);
        assert!(out.join("bratu-solve_profile.dat").exists());
    }

    #[test]
    fn bratu_solve_refusal_exit_path() {
        let mut config = ExperimentConfig::new("bratu-solve");
        config.set("resolution", 100).set("lambda", 1.5);
        assert!(matches!(
            run(&config, &tmp_dir("refuse")),
            Err(Error::HypothesisNotSatisfied(_))
        ));
    }

    #[test]
    fn staircase_record_passes() {
        let mut config = ExperimentConfig::new("staircase");
        config.set("resolution", 100);
        let record = run(&config, &tmp_dir("st")).unwrap();
        assert!(record.pass(), "checks: {:?}", record.checks);
    }
}
