//! Iteration schemes for the semilinear Dirichlet problem
//! `-Lap u = lambda(x) f(u) + h(x)` on domains bounded in one direction.
//!
//! The toolbox is built around the slab-diameter maximum principle
//! `||u|| <= (d^2/8) ||g||` and its exact discrete counterpart: contraction
//! and monotone iteration schemes with evaluated hypotheses and a priori
//! bounds, closed-form feasibility thresholds through Lambert's W function,
//! explicit subsolution profiles for seeding, and exhaustion of unbounded
//! slabs by nested truncations.
//!
//! ```
//! use std::sync::Arc;
//! use slabsolve::domain::{discretize, DomainSpec};
//! use slabsolve::iterate::{iterate_contraction, Coefficient, ContractionParams, Problem};
//! use slabsolve::nonlinearity;
//!
//! // -Lap u = e^u on the unit disk, certified by c*Lambda*M <= 1 - theta
//! let grid = Arc::new(discretize(&DomainSpec::radial_ball(1.0, 2)?, 200)?);
//! let problem = Problem::new(
//!     grid,
//!     Coefficient::Constant(1.0),
//!     Coefficient::Constant(0.0),
//!     nonlinearity::exp(),
//! )?;
//! let (u, report) = iterate_contraction(&problem, &ContractionParams::default())?;
//! assert!(report.converged && u.sup_norm() <= 0.5);
//! # Ok::<(), slabsolve::Error>(())
//! ```
//!
//! The accompanying guide under `book/` walks through the concepts; its
//! code blocks compile and run as part of `cargo test`.

pub mod bounds;
pub mod config;
pub mod domain;
pub mod error;
pub mod exhaustion;
pub mod experiments;
pub mod iterate;
mod linalg;
pub mod nonlinearity;
pub mod poisson;
pub mod report;
pub mod subsolution;

pub use domain::{discretize, exhaustion_family, slab_diameter, DomainSpec, Field, Grid};
pub use error::{Error, Result};
pub use iterate::{Coefficient, IterationReport, Problem};
pub use nonlinearity::{catalog, Nonlinearity};

// The book chapters double as integration tests: every fenced Rust block
// below runs under `cargo test --doc`.
#[cfg(doctest)]
mod book {
    macro_rules! chapter {
        ($name:ident, $path:literal) => {
            #[doc = include_str!($path)]
            mod $name {}
        };
    }

    chapter!(introduction, "../../../book/src/introduction.md");
    chapter!(maximum_principle, "../../../book/src/maximum-principle.md");
    chapter!(iteration_schemes, "../../../book/src/iteration-schemes.md");
    chapter!(thresholds, "../../../book/src/thresholds.md");
    chapter!(subsolutions, "../../../book/src/subsolutions.md");
    chapter!(unbounded_domains, "../../../book/src/unbounded-domains.md");
    chapter!(cli, "../../../book/src/cli.md");
}
