//! Constructive solver for `div u = f`, `u = 0` on the boundary of a planar
//! analytic star-shaped domain, together with the machinery used to audit the
//! analyticity of the constructed solution.
//!
//! The solution is built in three closed-form stages:
//!
//! 1. `φ` with `-Δφ = f` on an enlarged domain ([`poisson`]),
//! 2. a Stokes pair `(v, q)` with `v = ∇φ` on the boundary ([`stokes`]),
//! 3. `u = v - ∇φ` and `p = q + f` ([`pipeline`]).
//!
//! Every stage is an exact polynomial or a finite sum of fundamental
//! solutions centred outside the closure of the domain, so derivatives of any
//! order are available through [`jet::Jet`]s. [`fields`] supplies the
//! tangential vector fields, [`norms`] the derivative tables and weighted
//! analytic norms, and [`lemmas`] the inequality audits.

// Negated comparisons are used on purpose: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod domain;
pub mod error;
pub mod eval;
pub mod fields;
pub mod jet;
pub mod lemmas;
pub mod lstsq;
pub mod norms;
pub mod pipeline;
pub mod poisson;
pub mod poly;
pub mod stokes;

/// A point in the plane.
pub type Point = [f64; 2];

/// Version of this crate, recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub use domain::{AnalyticDomain, DomainSpec, QuadratureKind, QuadratureSet};
pub use error::{Error, Result};
pub use eval::JetField;
pub use fields::{KomatsuFamily, VectorField, Word};
pub use jet::{Axis, Jet, KernelId};

pub use pipeline::{DivergenceSolution, FullReport, ReportOptions, SolverOptions};
pub use poisson::PoissonSolution;
pub use poly::Poly;
pub use stokes::StokesSolution;
pub use norms::{DerivativeTable, NormWeights, TableLimits};
