//! Explicit constants, thresholds and hypothesis checks.
//!
//! Everything here is closed-form arithmetic on top of the maximum-principle
//! constant `c`: the Bratu feasibility threshold expressed through Lambert's
//! W function, the conformal-curvature threshold, the contraction-scheme
//! condition `c*Lambda*M <= 1 - theta` with its a priori bound, the Hoelder
//! sup-norm bound, and the feasibility conditions for sublinear and
//! growth-bounded nonlinearities.

use crate::domain::{slab_diameter, DomainSpec};
use crate::error::{Error, Result};
use crate::nonlinearity::{ContinuityClass, Nonlinearity};

/// How a maximum-principle constant was derived.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConstantDerivation {
    /// c = d^2/8 from the slab of width d.
    Generic,
    /// c = d^2/(8(n-k)) from containment in a ball times a complement:
    /// valid with n-k = n for balls; coincides with the generic constant
    /// (n-k = 1) for every other supported variant.
    Improved { codimension: usize },
}

/// The constant c with `||u||_inf <= c ||h||_inf` for the Dirichlet Poisson
/// problem on the domain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaxPrincipleConstant {
    pub value: f64,
    pub derivation: ConstantDerivation,
}

/// Maximum-principle constant of a domain. The generic value is d^2/8 with d
/// the slab diameter. With `improved` set, balls get d^2/(8n) (they are
/// contained in a ball of their own diameter in all n axes); boxes and slab
/// truncations keep the slab bound, since a box of minimal width d is not
/// contained in a ball of radius d/2.
pub fn max_principle_constant(spec: &DomainSpec, improved: bool) -> MaxPrincipleConstant {
    let d = slab_diameter(spec);
    let generic = d * d / 8.0;
    if improved {
        let codim = match spec {
            DomainSpec::RadialBall { ambient_dim, .. } => *ambient_dim,
            _ => 1,
        };
        MaxPrincipleConstant {
            value: generic / codim as f64,
            derivation: ConstantDerivation::Improved { codimension: codim },
        }
    } else {
        MaxPrincipleConstant {
            value: generic,
            derivation: ConstantDerivation::Generic,
        }
    }
}

const INV_E: f64 = 1.0 / std::f64::consts::E;

/// Principal branch of Lambert's W function: the solution of w e^w = x for
/// x >= -1/e, with W(x) >= -1. Halley iteration from a regime-dependent
/// initial guess; back-substitution error below 1e-12 * max(1, |x|).
pub fn lambert_w(x: f64) -> Result<f64> {
    if x.is_nan() || x < -INV_E * (1.0 + 1e-12) {
        return Err(Error::ArgumentOutOfDomain {
            function: "lambert_w",
            argument: x,
            requirement: "x >= -1/e on the principal branch",
        });
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    let x = x.max(-INV_E);

    let mut w = if x < -0.25 {
        // series around the branch point x = -1/e
        let p = (2.0 * (std::f64::consts::E * x + 1.0)).max(0.0).sqrt();
        -1.0 + p - p * p / 3.0 + 11.0 * p * p * p / 72.0
    } else if x < 3.0 {
        x.ln_1p() // crude but inside Halley's basin here
    } else {
        let l1 = x.ln();
        let l2 = l1.ln();
        l1 - l2 + l2 / l1
    };

    let target = 0.25e-12 * x.abs().max(1.0);
    for _ in 0..60 {
        let ew = w.exp();
        let f = w * ew - x;
        if f.abs() <= target {
            return Ok(w);
        }
        let wp1 = w + 1.0;
        let denom = ew * wp1 - (w + 2.0) * f / (2.0 * wp1);
        if denom == 0.0 || !denom.is_finite() {
            break;
        }
        w -= f / denom;
        if w < -1.0 {
            w = -1.0 + f64::EPSILON; // stay on the principal branch
        }
    }
    let f = (w * w.exp() - x).abs();
    if f <= 1e-12 * x.abs().max(1.0) {
        Ok(w)
    } else {
        Err(Error::SolveFailed {
            best_residual: f,
            tol: target,
        })
    }
}

/// Feasibility threshold for the Bratu problem `-Lap u = lambda e^u` on the
/// unit ball in dimension n: the scheme converges for
/// `lambda <= 2 n theta W((1-theta)/theta)`. Linear in n.
pub fn bratu_lambda_star(n: usize, theta: f64) -> Result<f64> {
    assert!(n >= 1, "dimension must be >= 1");
    if !(theta > 0.0 && theta < 1.0) {
        return Err(Error::ArgumentOutOfDomain {
            function: "bratu_lambda_star",
            argument: theta,
            requirement: "0 < theta < 1",
        });
    }
    Ok(2.0 * n as f64 * theta * lambert_w((1.0 - theta) / theta)?)
}

/// Golden-section maximization of a unimodal objective on (0, 1).
/// Returns (argmax, value). Unimodality is assumed, not verified.
pub fn optimize_theta<F: Fn(f64) -> f64>(objective: F) -> (f64, f64) {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut a = 1e-6;
    let mut b = 1.0 - 1e-6;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = objective(c);
    let mut fd = objective(d);
    for _ in 0..200 {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = objective(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = objective(d);
        }
    }
    let theta = 0.5 * (a + b);
    (theta, objective(theta))
}

/// Largest constant curvature admitting a conformal factor on a domain of
/// slab diameter 2*sqrt(2) (c = 1): the maximum over theta of
/// `(theta/2) W((1-theta)/theta)`, approximately 0.1452.
pub fn conformal_threshold() -> (f64, f64) {
    optimize_theta(|theta| theta / 2.0 * lambert_w((1.0 - theta) / theta).unwrap())
}

/// Evaluated contraction-scheme hypothesis.
///
/// `l` and `m` are max |f| and sup |f'| over the intervals the scheme
/// certifies the iterates to stay in; the signed variants record plain
/// max f / sup f' (they coincide for the nonnegative nondecreasing catalog).
#[derive(Debug, Clone, Copy)]
pub struct ContractionHypothesis {
    pub theta: f64,
    pub lambda_sup: f64,
    pub h_norm: f64,
    pub c: f64,
    pub l: f64,
    pub l_signed: f64,
    pub m: f64,
    pub m_signed: f64,
    pub satisfied: bool,
    pub a_priori_bound: f64,
}

/// Evaluate the contraction-scheme hypothesis `c * Lambda * M <= 1 - theta`
/// with L = max |f| on [-c||h||, c||h||] and M = sup |f'| on the interval
/// widened by Lambda*c*L/theta on both sides; the a priori bound is
/// `c||h|| + c*Lambda*L/theta`.
pub fn contraction_hypothesis(
    f: &Nonlinearity,
    lambda_sup: f64,
    h_norm: f64,
    c: f64,
    theta: f64,
) -> Result<ContractionHypothesis> {
    if !(theta > 0.0 && theta < 1.0) {
        return Err(Error::ArgumentOutOfDomain {
            function: "contraction_hypothesis",
            argument: theta,
            requirement: "0 < theta < 1",
        });
    }
    if !f.has_derivative() {
        return Err(Error::MissingDerivative);
    }
    let a = c * h_norm;
    let l = f.max_abs_value(-a, a);
    let l_signed = f.max_value(-a, a);
    let reach = a + lambda_sup * c * l / theta;
    let m = f.sup_abs_derivative(-reach, reach).unwrap();
    let m_signed = f.sup_derivative(-reach, reach).unwrap();
    let satisfied = c * lambda_sup * m <= 1.0 - theta;
    Ok(ContractionHypothesis {
        theta,
        lambda_sup,
        h_norm,
        c,
        l,
        l_signed,
        m,
        m_signed,
        satisfied,
        a_priori_bound: a + c * lambda_sup * l / theta,
    })
}

/// Sup-norm bound for the monotone scheme with a Hoelder nonlinearity:
/// `c*Lambda*|f(c||h||)| + (c*Lambda*[f]_alpha)^{1/(1-alpha)} + c*||h||`.
pub fn holder_bound(c: f64, lambda_sup: f64, f: &Nonlinearity, h_norm: f64) -> Result<f64> {
    let (alpha, seminorm) = match f.continuity() {
        ContinuityClass::Holder { alpha, seminorm } => (alpha, seminorm),
        ContinuityClass::Differentiable => return Err(Error::HolderExponentOutOfRange(1.0)),
        ContinuityClass::LowerSemicontinuous => {
            return Err(Error::HolderExponentOutOfRange(f64::NAN))
        }
    };
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::HolderExponentOutOfRange(alpha));
    }
    Ok(c * lambda_sup * f.value(c * h_norm).abs()
        + (c * lambda_sup * seminorm).powf(1.0 / (1.0 - alpha))
        + c * h_norm)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SublinearRegime {
    /// p < 1: a solution always exists; the bound is the largest fixed point
    /// of r -> c*Lambda*K*r^p + c*||h||.
    AlwaysFeasible,
    /// p >= 1: feasible iff c*K*Lambda <= 1/2 and ||h|| <= Lambda*K, with
    /// bound 1.
    Conditional,
}

/// Evaluated feasibility of the growth-bounded monotone scheme
/// (`f(s) <= K s^p`, f nondecreasing, lower semicontinuous allowed).
#[derive(Debug, Clone, Copy)]
pub struct SublinearHypothesis {
    pub coefficient: f64,
    pub exponent: f64,
    pub lambda_sup: f64,
    pub h_norm: f64,
    pub c: f64,
    pub regime: SublinearRegime,
    pub satisfied: bool,
    /// Predicted sup-norm bound on the iterates when satisfied.
    pub bound: Option<f64>,
}

pub fn sublinear_feasible(
    c: f64,
    lambda_sup: f64,
    coefficient: f64,
    exponent: f64,
    h_norm: f64,
) -> SublinearHypothesis {
    assert!(coefficient >= 0.0 && exponent >= 0.0);
    if exponent < 1.0 {
        let radius = fixed_point_radius(c * lambda_sup * coefficient, exponent, c * h_norm);
        SublinearHypothesis {
            coefficient,
            exponent,
            lambda_sup,
            h_norm,
            c,
            regime: SublinearRegime::AlwaysFeasible,
            satisfied: true,
            bound: Some(radius),
        }
    } else {
        let satisfied = c * coefficient * lambda_sup <= 0.5 && h_norm <= lambda_sup * coefficient;
        SublinearHypothesis {
            coefficient,
            exponent,
            lambda_sup,
            h_norm,
            c,
            regime: SublinearRegime::Conditional,
            satisfied,
            bound: satisfied.then_some(1.0),
        }
    }
}

/// Largest fixed point of phi(r) = a r^p + b with 0 <= p < 1, found by
/// bisection (phi is concave, so the largest crossing is unique and
/// phi(r) < r beyond it).
fn fixed_point_radius(a: f64, p: f64, b: f64) -> f64 {
    if a == 0.0 {
        return b;
    }
    let phi = |r: f64| a * r.powf(p) + b;
    // lower end with phi(lo) >= lo
    let lo0 = if b > 0.0 {
        0.0
    } else {
        0.5 * a.powf(1.0 / (1.0 - p))
    };
    let mut hi = (2.0 * a).powf(1.0 / (1.0 - p)).max(2.0 * b).max(1.0);
    while phi(hi) >= hi {
        hi *= 2.0;
    }
    let mut lo = lo0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        if phi(mid) >= mid {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Largest exponent p for which the staircase problem on the unit ball in
/// dimension n satisfies the feasibility condition `10^p/(2n) <= 1/2`,
/// i.e. log10(n).
pub fn staircase_max_exponent(n: usize) -> f64 {
    assert!(n >= 1, "dimension must be >= 1");
    (n as f64).log10()
}

/// Three-term sup-norm bound for the seeded sublinear problem
/// `-Lap u = u^p` on the unit ball in dimension n, 0 < p <= 1/2, with the
/// improved constant c = 1/(2n) and the seed coefficient
/// eps = (3/4) * ((n+4)/(4n(n+2)))^{p/(1-p)}. Scales as n^{-1/(1-p)}.
pub fn sublinear_norm_bound(n: usize, p: f64) -> Result<f64> {
    assert!(n >= 1, "dimension must be >= 1");
    if !(p > 0.0 && p <= 0.5) {
        return Err(Error::ArgumentOutOfDomain {
            function: "sublinear_norm_bound",
            argument: p,
            requirement: "0 < p <= 1/2",
        });
    }
    let nf = n as f64;
    let c = 1.0 / (2.0 * nf);
    let base = (nf + 4.0) / (4.0 * nf * (nf + 2.0));
    let e = p / (1.0 - p);
    let term1 = c * (c * (0.75 * base).powf(e)).powf(p);
    let term2 = c.powf(1.0 / (1.0 - p));
    let term3 = c * 0.75 * base.powf(e);
    Ok(term1 + term2 + term3)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nonlinearity;

    #[test]
    fn constants_for_each_variant() {
        let ball = DomainSpec::radial_ball(1.0, 3).unwrap();
        let c = max_principle_constant(&ball, true);
        assert!((c.value - 1.0 / 6.0).abs() < 1e-15);
        assert_eq!(c.derivation, ConstantDerivation::Improved { codimension: 3 });

        let d = 2.0 * 2f64.sqrt();
        let interval = DomainSpec::interval(d).unwrap();
        assert!((max_principle_constant(&interval, false).value - 1.0).abs() < 1e-15);

        let wide = DomainSpec::boxed(vec![4.0, 100.0]).unwrap();
        assert!((max_principle_constant(&wide, false).value - 2.0).abs() < 1e-15);

        // improved never exceeds generic
        for spec in [ball, interval, wide] {
            assert!(
                max_principle_constant(&spec, true).value
                    <= max_principle_constant(&spec, false).value + 1e-15
            );
        }
    }

    #[test]
    fn lambert_w_special_values() {
        assert_eq!(lambert_w(0.0).unwrap(), 0.0);
        assert!((lambert_w(std::f64::consts::E).unwrap() - 1.0).abs() < 1e-13);
        // frozen from Newton iteration on w e^w = 1, checked by back-substitution below
        assert!((lambert_w(1.0).unwrap() - 0.5671432904097838).abs() < 1e-12);
        let w = lambert_w(1.0).unwrap();
        assert!((w * w.exp() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn lambert_w_domain_error() {
        assert!(lambert_w(-1.0).is_err());
        assert!(lambert_w(-INV_E).is_ok());
    }

    #[test]
    fn lambert_w_back_substitution_across_range() {
        let xs = [
            -INV_E + 1e-9,
            -0.3,
            -0.1,
            -1e-6,
            1e-6,
            0.5,
            1.0,
            5.0,
            100.0,
            1e4,
            1e6,
        ];
        for &x in &xs {
            let w = lambert_w(x).unwrap();
            assert!(
                (w * w.exp() - x).abs() <= 1e-12 * x.abs().max(1.0),
                "back-substitution off at x = {x}"
            );
        }
    }

    #[test]
    fn bratu_threshold_matches_lambert_value() {
        // 2 * 2 * 0.5 * W(1) = 2 W(1)
        let v = bratu_lambda_star(2, 0.5).unwrap();
        assert!((v - 2.0 * 0.5671432904097838).abs() < 1e-12);
        // vanishes as theta -> 1
        assert!(bratu_lambda_star(2, 1.0 - 1e-9).unwrap() < 1e-8);
        // linear in n
        let base = bratu_lambda_star(1, 0.37).unwrap();
        for n in 2..6 {
            assert!((bratu_lambda_star(n, 0.37).unwrap() - n as f64 * base).abs() < 1e-12);
        }
    }

    #[test]
    fn optimize_theta_on_parabola() {
        let (theta, value) = optimize_theta(|t| -(t - 0.5) * (t - 0.5));
        assert!((theta - 0.5).abs() < 1e-6);
        assert!(value.abs() < 1e-12);
    }

    #[test]
    fn conformal_threshold_value() {
        let (theta, value) = conformal_threshold();
        assert!((value - 0.1452).abs() < 1e-3);
        assert!((theta - 0.413).abs() < 5e-3);
        // fixed theta = 1/2 is a lower bound for the optimum
        let at_half = 0.25 * lambert_w(1.0).unwrap();
        assert!((at_half - 0.14179).abs() < 1e-4);
        assert!(value >= at_half);
        // same objective as the Bratu coefficient, scaled by 1/4 per unit n
        let (_, bratu_coeff) = optimize_theta(|t| t * lambert_w((1.0 - t) / t).unwrap());
        assert!((2.0 * value - bratu_coeff).abs() < 1e-9);
    }

    #[test]
    fn contraction_hypothesis_bratu_threshold() {
        let f = nonlinearity::exp();
        let c = 0.25; // improved constant, unit ball in dimension 2
        let h1 = contraction_hypothesis(&f, 1.0, 0.0, c, 0.5).unwrap();
        assert!(h1.satisfied, "lambda = 1.0 < 1.13429 must satisfy");
        assert!((h1.l - 1.0).abs() < 1e-15);
        let h2 = contraction_hypothesis(&f, 1.2, 0.0, c, 0.5).unwrap();
        assert!(!h2.satisfied, "lambda = 1.2 > 1.13429 must fail");
    }

    #[test]
    fn contraction_boundary_matches_bratu_lambda_star() {
        // bisect the satisfied predicate in lambda; boundary = lambda_star
        let f = nonlinearity::exp();
        for n in [1usize, 2, 3] {
            for theta in [0.3, 0.5, 0.7] {
                let c = 1.0 / (2.0 * n as f64);
                let mut lo = 0.0;
                let mut hi = 4.0 * n as f64;
                for _ in 0..200 {
                    let mid = 0.5 * (lo + hi);
                    if contraction_hypothesis(&f, mid, 0.0, c, theta)
                        .unwrap()
                        .satisfied
                    {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                let star = bratu_lambda_star(n, theta).unwrap();
                assert!(
                    (0.5 * (lo + hi) - star).abs() < 1e-9,
                    "boundary mismatch at n={n}, theta={theta}"
                );
            }
        }
    }

    #[test]
    fn contraction_with_zero_lambda() {
        let f = nonlinearity::exp();
        let h = contraction_hypothesis(&f, 0.0, 2.0, 0.125, 0.9).unwrap();
        assert!(h.satisfied);
        assert!((h.a_priori_bound - 0.125 * 2.0).abs() < 1e-15);
    }

    #[test]
    fn holder_bound_examples() {
        let f = nonlinearity::power(0.5).unwrap();
        // c = 1, Lambda = 1, ||h|| = 1: 1*1*|f(1)| + 1^2 + 1 = 3
        assert!((holder_bound(1.0, 1.0, &f, 1.0).unwrap() - 3.0).abs() < 1e-14);
        // Lambda = 0 leaves c*||h||
        assert!((holder_bound(1.0, 0.0, &f, 1.0).unwrap() - 1.0).abs() < 1e-14);
        // h = 0, f(0) = 0 leaves the seminorm term
        let b = holder_bound(0.25, 2.0, &f, 0.0).unwrap();
        assert!((b - (0.25f64 * 2.0).powi(2)).abs() < 1e-14);
        // differentiable entries must take the contraction path
        assert!(holder_bound(1.0, 1.0, &nonlinearity::exp(), 1.0).is_err());
    }

    #[test]
    fn holder_bound_monotone_in_inputs() {
        let f = nonlinearity::power(0.4).unwrap();
        let b = |lam: f64, h: f64| holder_bound(0.5, lam, &f, h).unwrap();
        assert!(b(1.0, 1.0) <= b(2.0, 1.0));
        assert!(b(1.0, 1.0) <= b(1.0, 2.0));
    }

    #[test]
    fn sublinear_feasibility() {
        // p = 1/2, c = Lambda = K = 1, h = 0: R = sqrt(R) so R = 1
        let h = sublinear_feasible(1.0, 1.0, 1.0, 0.5, 0.0);
        assert!(h.satisfied);
        assert!((h.bound.unwrap() - 1.0).abs() < 1e-9);

        // p = 2 conditional regime
        let ok = sublinear_feasible(0.2, 2.0, 1.0, 2.0, 0.1);
        assert!(ok.satisfied && ok.bound == Some(1.0));
        let bad = sublinear_feasible(0.3, 2.0, 1.0, 2.0, 0.1);
        assert!(!bad.satisfied && bad.bound.is_none());
    }

    #[test]
    fn fixed_point_radius_solves_equation() {
        for (c, lam, k, p, h) in [
            (0.25, 1.0, 1.0, 0.5, 0.0),
            (0.25, 1.0, 1.0, 0.5, 0.3),
            (1.0, 0.7, 2.0, 0.25, 1.5),
            (0.05, 3.0, 0.5, 0.9, 0.0),
        ] {
            let hyp = sublinear_feasible(c, lam, k, p, h);
            let r = hyp.bound.unwrap();
            assert!(
                (c * lam * k * r.powf(p) + c * h - r).abs() <= 1e-9 * r.max(1.0),
                "fixed point residual too large for ({c},{lam},{k},{p},{h})"
            );
        }
    }

    #[test]
    fn staircase_exponent_values() {
        assert!((staircase_max_exponent(10) - 1.0).abs() < 1e-15);
        assert!((staircase_max_exponent(100) - 2.0).abs() < 1e-15);
        // comparison point at n = 18: log10(18) = 1.2553 > 20/16
        let ours = staircase_max_exponent(18);
        assert!((ours - 1.2553).abs() < 1e-4);
        assert!(ours > (18.0 + 2.0) / (18.0 - 2.0));
    }

    #[test]
    fn sublinear_norm_bound_frozen_value() {
        // term-by-term at n = 2, p = 1/2: c = 1/4, base = 6/32,
        // eps = 3/4 * 3/16 = 0.140625;
        // 0.25*sqrt(0.25*0.140625) + 0.25^2 + 0.25*0.140625 = 0.14453125
        let b = sublinear_norm_bound(2, 0.5).unwrap();
        assert!((b - 0.14453125).abs() < 1e-12);
        assert!(sublinear_norm_bound(2, 0.75).is_err());
    }

    #[test]
    fn sublinear_norm_bound_scaling() {
        // bound(n, p) * n^{1/(1-p)} stays within a 4x band
        let p = 0.5;
        let e = 1.0 / (1.0 - p);
        let products: Vec<f64> = (1..=6)
            .map(|k| {
                let n = 2usize << k.min(5); // 4..64
                sublinear_norm_bound(n, p).unwrap() * (n as f64).powf(e)
            })
            .collect();
        let max = products.iter().cloned().fold(0.0, f64::max);
        let min = products.iter().cloned().fold(f64::INFINITY, f64::min);
        assert!(max / min <= 4.0, "spread {} too wide", max / min);
    }
}
