//! Property tests for the module invariants.

use std::sync::Arc;

use proptest::prelude::*;

use slabsolve::bounds::{
    bratu_lambda_star, holder_bound, lambert_w, sublinear_feasible,
};
use slabsolve::domain::{discretize, slab_diameter, DomainSpec, Field};
use slabsolve::nonlinearity;
use slabsolve::poisson::{assemble_laplacian, poisson_solve};
use slabsolve::subsolution::radial_w;

const INV_E: f64 = 1.0 / std::f64::consts::E;

proptest! {
    // |W(x) e^{W(x)} - x| <= 1e-12 max(1, |x|) across the principal branch
    #[test]
    fn lambert_back_substitution_small(x in (-INV_E + 1e-9)..3.0) {
        let w = lambert_w(x).unwrap();
        prop_assert!((w * w.exp() - x).abs() <= 1e-12 * x.abs().max(1.0));
    }

    #[test]
    fn lambert_back_substitution_large(exp in 0.5f64..6.0) {
        let x = 10f64.powf(exp);
        let w = lambert_w(x).unwrap();
        prop_assert!((w * w.exp() - x).abs() <= 1e-12 * x);
    }

    // the threshold is linear in the dimension
    #[test]
    fn bratu_threshold_linear_in_n(theta in 0.01f64..0.99, n in 1usize..12) {
        let unit = bratu_lambda_star(1, theta).unwrap();
        let full = bratu_lambda_star(n, theta).unwrap();
        prop_assert!((full - n as f64 * unit).abs() <= 1e-12 * full.max(1.0));
    }

    // staircase: nondecreasing, left-open right-closed steps, growth bound
    #[test]
    fn staircase_monotone_and_bounded(a in 0.0f64..3.0, b in 0.0f64..3.0, p in 0.1f64..1.5) {
        let f = nonlinearity::staircase(p).unwrap();
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        prop_assert!(f.value(lo) <= f.value(hi));
        let g = f.growth().unwrap();
        prop_assert!(f.value(hi) <= g.coefficient * hi.powf(g.exponent) + 1e-12);
    }

    // power nonlinearities carry a sharp Hoelder seminorm of 1
    #[test]
    fn power_holder_seminorm(x in 0.0f64..10.0, y in 0.0f64..10.0, p in 0.05f64..0.95) {
        let f = nonlinearity::power(p).unwrap();
        let lhs = (f.value(x) - f.value(y)).abs();
        prop_assert!(lhs <= (x - y).abs().powf(p) + 1e-12);
    }

    // holder_bound is monotone nondecreasing in Lambda, ||h|| and [f]_alpha
    #[test]
    fn holder_bound_monotone(
        lam in 0.0f64..3.0,
        dlam in 0.0f64..2.0,
        h in 0.0f64..3.0,
        dh in 0.0f64..2.0,
    ) {
        let f = nonlinearity::power(0.5).unwrap();
        let base = holder_bound(0.5, lam, &f, h).unwrap();
        prop_assert!(holder_bound(0.5, lam + dlam, &f, h).unwrap() >= base - 1e-12);
        prop_assert!(holder_bound(0.5, lam, &f, h + dh).unwrap() >= base - 1e-12);
    }

    // fixed-point radius solves its defining equation to 1e-9
    #[test]
    fn sublinear_radius_solves_equation(
        c in 0.01f64..2.0,
        lam in 0.0f64..3.0,
        k in 0.0f64..3.0,
        p in 0.0f64..0.95,
        h in 0.0f64..2.0,
    ) {
        let hyp = sublinear_feasible(c, lam, k, p, h);
        let r = hyp.bound.unwrap();
        prop_assert!((c * lam * k * r.powf(p) + c * h - r).abs() <= 1e-9 * r.max(1.0));
    }

    // w dominates its squared-parabola lower bound on [0, 1]
    #[test]
    fn w_lower_bound(n in 1usize..9, eps in 0.01f64..3.0, r in 0.0f64..1.0) {
        let w = radial_w(n, eps);
        let lower = w.coefficient() * (1.0 - r * r) * (1.0 - r * r);
        prop_assert!(w.value(r) >= lower - 1e-13);
    }

    // slab diameter of a box is its least width, monotone under widening
    #[test]
    fn box_slab_diameter(w0 in 0.1f64..5.0, w1 in 0.1f64..5.0, grow in 0.0f64..2.0) {
        let base = DomainSpec::boxed(vec![w0, w1]).unwrap();
        let wider = DomainSpec::boxed(vec![w0 + grow, w1 + grow]).unwrap();
        prop_assert!((slab_diameter(&base) - w0.min(w1)).abs() < 1e-15);
        prop_assert!(slab_diameter(&wider) >= slab_diameter(&base));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    // inverse positivity and comparison for random sources on an interval
    #[test]
    fn solve_positivity_and_comparison(values in proptest::collection::vec(0.0f64..2.0, 31)) {
        let grid = Arc::new(discretize(&DomainSpec::interval(1.0).unwrap(), 32).unwrap());
        let op = assemble_laplacian(&grid);
        let g1 = Field::new(Arc::clone(&grid), values.clone()).unwrap();
        let (u1, diag) = poisson_solve(&op, &g1, 1e-10).unwrap();
        prop_assert_eq!(diag.positivity, Some(true));
        prop_assert!(u1.min_value() >= -1e-9);

        let bumped: Vec<f64> = values.iter().map(|v| v + 0.5).collect();
        let g2 = Field::new(Arc::clone(&grid), bumped).unwrap();
        let (u2, _) = poisson_solve(&op, &g2, 1e-10).unwrap();
        prop_assert!(u2.min_difference(&u1).unwrap() >= -1e-9);
    }

    // the solve respects the maximum principle for signed sources too
    #[test]
    fn solve_max_principle_signed(values in proptest::collection::vec(-1.0f64..1.0, 31)) {
        let grid = Arc::new(discretize(&DomainSpec::interval(1.0).unwrap(), 32).unwrap());
        let op = assemble_laplacian(&grid);
        let g = Field::new(Arc::clone(&grid), values).unwrap();
        let (u, diag) = poisson_solve(&op, &g, 1e-10).unwrap();
        prop_assert!(diag.max_principle.pass, "sup {} vs bound {}", u.sup_norm(), diag.max_principle.bound);
    }
}
