//! The TOML run configuration and its validation.

use std::path::PathBuf;

use divlab_core::lemmas::SweepLimits;
use divlab_core::norms::{CertificationGrid, EpsilonPairing};
use divlab_core::poisson::MfsOptions;
use divlab_core::stokes::StokesOptions;
use divlab_core::{DomainSpec, Poly, ReportOptions, SolverOptions};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub domain: DomainSpec,
    pub source: Source,
    /// Dilation factor of the domain on which the potential is solved.
    #[serde(default = "default_enlargement")]
    pub enlargement: f64,
    #[serde(default)]
    pub charges: Charges,
    #[serde(default)]
    pub quadrature: Quadrature,
    #[serde(default)]
    pub orders: Orders,
    #[serde(default)]
    pub weights: Weights,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub output: Output,
    /// Seeds the interior spot-check points.
    #[serde(default)]
    pub seed: u64,
}

fn default_enlargement() -> f64 {
    1.2
}

/// `f = Σ c x^i y^j`, given as `[i, j, c]` triples.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Source {
    pub terms: Vec<(usize, usize, f64)>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Charges {
    pub poisson: usize,
    pub stokes: usize,
}

impl Default for Charges {
    fn default() -> Self {
        Self {
            poisson: 96,
            stokes: 96,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Quadrature {
    /// Volume rule for the derivative tables.
    pub radial: usize,
    pub angular: usize,
    /// Boundary points for the trace check.
    pub boundary: usize,
}

impl Default for Quadrature {
    fn default() -> Self {
        Self {
            radial: 12,
            angular: 48,
            boundary: 512,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Orders {
    /// Highest normal order in the reduction audits.
    pub i_max: usize,
    /// Longest word in the reduction audits.
    pub j_max: usize,
    /// Highest normal order in the commutator audits.
    pub leibniz_i_max: usize,
    /// Truncation order of the norms.
    pub m: usize,
}

impl Default for Orders {
    fn default() -> Self {
        Self {
            i_max: 3,
            j_max: 3,
            leibniz_i_max: 2,
            m: 6,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Weights {
    /// Weights at which the norms are reported.
    pub eps1: f64,
    pub eps2: f64,
    /// Certification grid in `ε₂`.
    pub certify_eps2: Vec<f64>,
    /// `ε₁ = ε₂ / tie_ratio` on the certification grid.
    pub tie_ratio: f64,
    /// Admissible tail ratio.
    pub threshold: f64,
    /// `ε₂` values for the absorption sweep.
    pub bootstrap_eps2: Vec<f64>,
}

impl Default for Weights {
    fn default() -> Self {
        let r = ReportOptions::default();
        let tie_ratio = match r.grid.pairing {
            EpsilonPairing::Tied { ratio } => ratio,
            EpsilonPairing::Free { .. } => 100.0,
        };
        Self {
            eps1: r.eps1,
            eps2: r.eps2,
            certify_eps2: r.grid.eps2,
            tie_ratio,
            threshold: r.grid.threshold,
            bootstrap_eps2: r.bootstrap_eps2,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    pub mean: f64,
    pub divergence: f64,
    pub boundary: f64,
    pub poisson_fit: f64,
    pub stokes_fit: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        let s = SolverOptions::default();
        Self {
            mean: s.mean_tolerance,
            divergence: s.divergence_tolerance,
            boundary: s.boundary_tolerance,
            poisson_fit: s.poisson.tolerance,
            stokes_fit: s.stokes.tolerance,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Output {
    pub dir: Option<PathBuf>,
}

fn field_error(field: &str, msg: impl std::fmt::Display) -> CliError {
    CliError::Config(format!("field `{field}`: {msg}"))
}

impl RunConfig {
    /// Parses and validates; errors carry the TOML position or field path.
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let positive = [
            ("charges.poisson", self.charges.poisson),
            ("charges.stokes", self.charges.stokes),
            ("quadrature.radial", self.quadrature.radial),
            ("quadrature.angular", self.quadrature.angular),
            ("quadrature.boundary", self.quadrature.boundary),
            ("orders.m", self.orders.m),
        ];
        for (name, v) in positive {
            if v == 0 {
                return Err(field_error(name, "must be positive"));
            }
        }
        let t = &self.tolerances;
        for (name, v) in [
            ("tolerances.mean", t.mean),
            ("tolerances.divergence", t.divergence),
            ("tolerances.boundary", t.boundary),
            ("tolerances.poisson_fit", t.poisson_fit),
            ("tolerances.stokes_fit", t.stokes_fit),
        ] {
            if !(v > 0.0 && v < 1.0) {
                return Err(field_error(name, format!("{v} is not in (0, 1)")));
            }
        }
        if !(self.enlargement > 1.0 && self.enlargement.is_finite()) {
            return Err(field_error("enlargement", "must exceed 1"));
        }
        let w = &self.weights;
        for (name, v) in [("weights.eps1", w.eps1), ("weights.eps2", w.eps2)] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(field_error(name, "must be finite and non-negative"));
            }
        }
        for (name, grid) in [("weights.certify_eps2", &w.certify_eps2), ("weights.bootstrap_eps2", &w.bootstrap_eps2)] {
            if grid.is_empty() || grid.iter().any(|&e| !(e > 0.0 && e.is_finite())) {
                return Err(field_error(name, "must be a non-empty list of positive numbers"));
            }
        }
        if !(w.tie_ratio > 0.0) {
            return Err(field_error("weights.tie_ratio", "must be positive"));
        }
        if !(w.threshold > 0.0 && w.threshold < 1.0) {
            return Err(field_error("weights.threshold", "must lie in (0, 1)"));
        }
        let o = &self.orders;
        if o.i_max < 2 {
            return Err(field_error("orders.i_max", "must be at least 2"));
        }
        if o.m < 5 {
            return Err(field_error("orders.m", "certification needs at least 5"));
        }
        let need = o.i_max.max(o.leibniz_i_max + 2) + o.j_max + 1;
        if need > o.m + 2 {
            return Err(field_error(
                "orders.m",
                format!("{} is too small for i_max = {}, j_max = {}; need at least {}", o.m, o.i_max, o.j_max, need - 2),
            ));
        }
        if self.source.terms.iter().any(|t| !t.2.is_finite()) {
            return Err(field_error("source.terms", "coefficients must be finite"));
        }
        Ok(())
    }

    pub fn source_poly(&self) -> Poly {
        Poly::from_terms(self.source.terms.iter().copied())
    }

    /// Longest word any table walks.
    pub fn longest_word(&self) -> usize {
        self.orders.m.max(self.orders.j_max)
    }

    pub fn solver_options(&self) -> SolverOptions {
        let d = SolverOptions::default();
        SolverOptions {
            enlargement: self.enlargement,
            poisson: MfsOptions {
                n_charges: self.charges.poisson,
                tolerance: self.tolerances.poisson_fit,
                ..d.poisson
            },
            stokes: StokesOptions {
                n_sources: self.charges.stokes,
                tolerance: self.tolerances.stokes_fit,
                ..d.stokes
            },
            mean_tolerance: self.tolerances.mean,
            divergence_tolerance: self.tolerances.divergence,
            boundary_tolerance: self.tolerances.boundary,
            check_boundary: self.quadrature.boundary,
            ..d
        }
    }

    pub fn report_options(&self) -> ReportOptions {
        let w = &self.weights;
        ReportOptions {
            m: self.orders.m,
            eps1: w.eps1,
            eps2: w.eps2,
            grid: CertificationGrid {
                eps2: w.certify_eps2.clone(),
                pairing: EpsilonPairing::Tied { ratio: w.tie_ratio },
                threshold: w.threshold,
            },
            bootstrap_eps2: w.bootstrap_eps2.clone(),
            sweep: SweepLimits {
                i_max: self.orders.i_max,
                j_max: self.orders.j_max,
                leibniz_i_max: self.orders.leibniz_i_max,
            },
            quad_radial: self.quadrature.radial,
            quad_angular: self.quadrature.angular,
            alphabet: None,
        }
    }
}
