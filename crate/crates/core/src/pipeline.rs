//! End-to-end construction of `u` with `div u = f` in Ω and `u = 0` on ∂Ω.
//!
//! `φ` solves `-Δφ = f` on an enlarged domain, `(v, q)` is the Stokes flow
//! with boundary values `∇φ`, and `u = v - ∇φ`, `p = q + f`. Since
//! `div v = 0` and `Δφ = -f` hold exactly, the only numerical error in `u` is
//! the boundary misfit of the Stokes fit.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::domain::{AnalyticDomain, QuadratureSet};
use crate::error::{Error, Result};
use crate::eval::{divergence, Gradient, JetField, PolyVector};
use crate::fields::KomatsuFamily;
use crate::jet::{Axis, Jet};
use crate::lemmas::{
    audit_all, bootstrap_sweep, check_bootstrap, check_h2_stokes, fit_constants, AuditTables, BootstrapReport,
    BootstrapSweep, FittedConstant, InequalityReport, LemmaId, SweepLimits,
};
use crate::norms::{
    certify_radius, psi_norm, rho_norm, Certification, CertificationGrid, DerivativeTable, NormWeights, PsiNorm,
    RhoNorm, TableBuilder, TableKind, TableLimits,
};
use crate::poisson::{solve_poisson, BoundaryResidual, MfsOptions, PoissonSolution};
use crate::poly::Poly;
use crate::stokes::{check_compatibility, solve_stokes_bvp, StokesOptions, StokesSolution};
use crate::Point;

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverOptions {
    /// Dilation factor of the domain on which `φ` is solved.
    pub enlargement: f64,
    pub poisson: MfsOptions,
    pub stokes: StokesOptions,
    /// Admissible `|∫f|` relative to `max(1, ∫|f|)`.
    pub mean_tolerance: f64,
    /// Admissible `‖div u - f‖` relative to `‖f‖`.
    pub divergence_tolerance: f64,
    /// Admissible `max |u|` on ∂Ω relative to `max |∇φ|` there.
    pub boundary_tolerance: f64,
    /// Volume rule for the mean and divergence checks.
    pub check_radial: usize,
    pub check_angular: usize,
    /// Boundary points for the trace check.
    pub check_boundary: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            enlargement: crate::domain::DEFAULT_ENLARGEMENT,
            poisson: MfsOptions::default(),
            stokes: StokesOptions::default(),
            mean_tolerance: 1e-9,
            divergence_tolerance: 1e-6,
            boundary_tolerance: 1e-6,
            check_radial: 24,
            check_angular: 128,
            check_boundary: 512,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ResidualSummary {
    /// `∫_Ω f`.
    pub mean_f: f64,
    /// `‖f‖_{L²(Ω)}`.
    pub f_norm: f64,
    /// `‖div u - f‖_{L²(Ω)}`.
    pub divergence: f64,
    /// `max_{∂Ω} |u|`.
    pub boundary_max: f64,
    /// `max_{∂Ω} |∇φ|`, the scale of the Stokes data.
    pub data_scale: f64,
    /// `∮ ∇φ · n`.
    pub flux: f64,
    pub poisson: BoundaryResidual,
    pub stokes: BoundaryResidual,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DivergenceSolution {
    pub f: Poly,
    pub phi: PoissonSolution,
    pub stokes: StokesSolution,
    pub residuals: ResidualSummary,
}

impl DivergenceSolution {
    /// `u = v - ∇φ`.
    pub fn velocity(&self) -> SolutionVelocity<'_> {
        SolutionVelocity(self)
    }

    /// `p = q + f`.
    pub fn pressure(&self) -> SolutionPressure<'_> {
        SolutionPressure(self)
    }

    pub fn velocity_at(&self, p: Point) -> Result<Point> {
        let v = self.stokes.velocity_at(p)?;
        let g = self.phi.gradient(p)?;
        Ok([v[0] - g[0], v[1] - g[1]])
    }
}

pub struct SolutionVelocity<'a>(pub &'a DivergenceSolution);

impl JetField for SolutionVelocity<'_> {
    fn n_components(&self) -> usize {
        2
    }

    fn jets(&self, p: Point, order: usize) -> Result<Vec<Jet>> {
        let v = self.0.stokes.jets(p, order)?.velocity;
        let phi = self.0.phi.jet(p, order + 1)?;
        Axis::BOTH
            .iter()
            .map(|&a| v[a.index()].try_sub(&phi.diff(a)?))
            .collect()
    }
}

pub struct SolutionPressure<'a>(pub &'a DivergenceSolution);

impl JetField for SolutionPressure<'_> {
    fn n_components(&self) -> usize {
        1
    }

    fn jets(&self, p: Point, order: usize) -> Result<Vec<Jet>> {
        let q = self.0.stokes.jets(p, order)?.pressure;
        Ok(vec![q.try_add(&self.0.f.jet(p, order))?])
    }
}

/// `∫_Ω f` and `∫_Ω |f|`.
fn mean_of(f: &Poly, quad: &QuadratureSet) -> (f64, f64) {
    let mut s = 0.0;
    let mut a = 0.0;
    for (&p, w) in quad.points.iter().zip(&quad.weights) {
        let v = f.eval(p);
        s += w * v;
        a += w * v.abs();
    }
    (s, a)
}

/// Solves `div u = f`, `u|∂Ω = 0` and checks both conditions numerically.
pub fn solve_divergence(domain: &AnalyticDomain, f: &Poly, opts: &SolverOptions) -> Result<DivergenceSolution> {
    let vol = domain.volume_quadrature(opts.check_radial, opts.check_angular)?;
    let (mean_f, abs_f) = mean_of(f, &vol);
    if !(mean_f.abs() <= opts.mean_tolerance * abs_f.max(1.0)) {
        // Green's identity: the flux of ∇φ through ∂Ω is -∫f.
        return Err(Error::NonzeroMean {
            integral: mean_f,
            flux: -mean_f,
        });
    }
    let prime = domain.dilated(opts.enlargement)?;
    let phi = solve_poisson(&prime, f, &opts.poisson)?;
    let flux = check_compatibility(domain, &phi)?;
    let stokes = solve_stokes_bvp(domain, |p| phi.gradient(p), &opts.stokes)?;
    let mut sol = DivergenceSolution {
        f: f.clone(),
        phi,
        stokes,
        residuals: ResidualSummary {
            mean_f,
            flux,
            ..Default::default()
        },
    };

    let defects: Vec<(f64, f64)> = vol
        .points
        .par_iter()
        .map(|&p| {
            let fv = f.eval(p);
            let div = divergence(&sol.velocity().jets(p, 1)?)?.value();
            Ok((div - fv, fv))
        })
        .collect::<Result<_>>()?;
    let (mut d2, mut f2) = (0.0, 0.0);
    for ((d, fv), w) in defects.iter().zip(&vol.weights) {
        d2 += w * d * d;
        f2 += w * fv * fv;
    }
    let trace = domain.boundary_trace(opts.check_boundary)?;
    let edge: Vec<(f64, f64)> = trace
        .points
        .par_iter()
        .map(|&p| {
            let u = sol.velocity_at(p)?;
            let g = sol.phi.gradient(p)?;
            Ok((u[0].hypot(u[1]), g[0].hypot(g[1])))
        })
        .collect::<Result<_>>()?;
    let r = &mut sol.residuals;
    r.divergence = d2.sqrt();
    r.f_norm = f2.sqrt();
    r.boundary_max = edge.iter().map(|e| e.0).fold(0.0, f64::max);
    r.data_scale = edge.iter().map(|e| e.1).fold(0.0, f64::max);
    r.poisson = sol.phi.boundary_residual();
    r.stokes = sol.stokes.residual;

    let div_tol = opts.divergence_tolerance * r.f_norm;
    if !(r.divergence <= div_tol) {
        return Err(Error::ToleranceViolation {
            quantity: "divergence residual".into(),
            value: r.divergence,
            tol: div_tol,
        });
    }
    let edge_tol = opts.boundary_tolerance * r.data_scale;
    if !(r.boundary_max <= edge_tol) {
        return Err(Error::ToleranceViolation {
            quantity: "boundary residual".into(),
            value: r.boundary_max,
            tol: edge_tol,
        });
    }
    Ok(sol)
}

/// `J∇(ρ²) = (∂_y ρ², -∂_x ρ²)`: divergence free and zero on ∂Ω, so it can be
/// added to any solution.
pub fn nonuniqueness_witness(domain: &AnalyticDomain) -> PolyVector {
    let rho = domain.defining_poly();
    let sq = rho * rho;
    PolyVector(vec![sq.diff_y(), -&sq.diff_x()])
}

/// Settings for [`full_report`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ReportOptions {
    /// Truncation order `M` of the norms.
    pub m: usize,
    /// Weights at which `ρ`, `ψ` and the absorption sums are reported.
    pub eps1: f64,
    pub eps2: f64,
    pub grid: CertificationGrid,
    /// `ε₂` values for the absorption sweep.
    pub bootstrap_eps2: Vec<f64>,
    pub sweep: SweepLimits,
    pub quad_radial: usize,
    pub quad_angular: usize,
    /// Letters used in the words; `None` means the whole family.
    pub alphabet: Option<Vec<u8>>,
}

impl Default for ReportOptions {
    fn default() -> Self {
        Self {
            m: 6,
            eps1: 0.005,
            eps2: 0.5,
            grid: CertificationGrid::default(),
            bootstrap_eps2: (1..=10).map(|k| 0.5f64.powi(k)).collect(),
            sweep: SweepLimits::default(),
            quad_radial: 12,
            quad_angular: 48,
            alphabet: None,
        }
    }
}

/// Every table a report is computed from.
#[derive(Clone, Debug, PartialEq)]
pub struct ReportTables {
    pub u: DerivativeTable,
    pub v: DerivativeTable,
    pub q: DerivativeTable,
    pub grad_phi: DerivativeTable,
    pub f: DerivativeTable,
    pub laplace_commutator: DerivativeTable,
    pub gradient_commutator: DerivativeTable,
}

impl ReportTables {
    pub fn all(&self) -> [&DerivativeTable; 7] {
        [
            &self.u,
            &self.v,
            &self.q,
            &self.grad_phi,
            &self.f,
            &self.laplace_commutator,
            &self.gradient_commutator,
        ]
    }

    pub fn audit(&self) -> AuditTables<'_> {
        AuditTables {
            v: &self.v,
            q: &self.q,
            f: &self.f,
            laplace_commutator: &self.laplace_commutator,
            gradient_commutator: &self.gradient_commutator,
        }
    }
}

/// Serializes without the tables, which are exported as CSV.
#[derive(Clone, Debug, Serialize)]
pub struct FullReport {
    pub options: ReportOptions,
    pub residuals: ResidualSummary,
    #[serde(skip)]
    pub tables: ReportTables,
    pub rho_u: RhoNorm,
    pub rho_f: RhoNorm,
    pub psi: PsiNorm,
    /// `ρ(u) / ρ(f)`; absent when `ρ(f) = 0`.
    pub ratio: Option<f64>,
    pub certification: Certification,
    pub audits: Vec<InequalityReport>,
    pub constants: Vec<FittedConstant>,
    /// Absorption at the configured weights.
    pub bootstrap: BootstrapReport,
    pub bootstrap_sweep: BootstrapSweep,
}

impl FullReport {
    /// Largest fitted constant of the reduction estimates.
    pub fn c_star(&self) -> f64 {
        self.constants
            .iter()
            .filter(|c| c.k_star.is_none())
            .filter_map(|c| c.c_star)
            .fold(0.0, f64::max)
    }

    /// Largest fitted commutator growth constant.
    pub fn k_star(&self) -> f64 {
        self.constants.iter().filter_map(|c| c.k_star).fold(0.0, f64::max)
    }
}

/// Builds all tables for a solved problem.
pub fn build_report_tables(
    sol: &DivergenceSolution,
    family: &KomatsuFamily,
    quad: &QuadratureSet,
    opts: &ReportOptions,
) -> Result<ReportTables> {
    let m = opts.m;
    let u = sol.velocity();
    let v = sol.stokes.velocity();
    let q = sol.stokes.pressure();
    let grad_phi = Gradient(&sol.phi);
    let sweep = &opts.sweep;
    // Reductions read A_v up to normal order i + 2 and A_q up to i + 1; word
    // lengths never exceed M.
    let v_limits = TableLimits {
        i_max: m + 2,
        j_max: m,
        max_total: m + 2,
    };
    let q_limits = TableLimits {
        i_max: m + 1,
        j_max: m,
        max_total: m + 1,
    };
    let need = sweep.i_max.max(sweep.leibniz_i_max + 2) + sweep.j_max + 1;
    if need > m + 2 {
        return Err(Error::TruncationTooSmall { have: m + 2, need });
    }
    let mut builder = TableBuilder::new(family, quad);
    if let Some(a) = &opts.alphabet {
        builder = builder.alphabet(a)?;
    }
    let mut t = builder
        .add("u", &u, TableLimits::triangular(m), TableKind::Derivatives)
        .add("v", &v, v_limits, TableKind::Derivatives)
        .add("q", &q, q_limits, TableKind::Derivatives)
        .add("grad_phi", &grad_phi, TableLimits::triangular(m), TableKind::Derivatives)
        .add("f", &sol.f, TableLimits::triangular(m), TableKind::Derivatives)
        .add("laplace_commutator", &v, sweep.commutator_limits(m), TableKind::LaplaceCommutator)
        .add("gradient_commutator", &q, sweep.commutator_limits(m), TableKind::GradientCommutator)
        .build()?
        .into_iter();
    let mut next = || t.next().expect("one table per request");
    Ok(ReportTables {
        u: next(),
        v: next(),
        q: next(),
        grad_phi: next(),
        f: next(),
        laplace_commutator: next(),
        gradient_commutator: next(),
    })
}

/// Norms, certification, lemma audits and absorption for a solved problem.
pub fn full_report(domain: &AnalyticDomain, sol: &DivergenceSolution, opts: &ReportOptions) -> Result<FullReport> {
    let family = KomatsuFamily::build(domain)?;
    let quad = domain.volume_quadrature(opts.quad_radial, opts.quad_angular)?;
    let tables = build_report_tables(sol, &family, &quad, opts)?;
    report_from_tables(tables, opts, Some((sol, &family, &quad)))
}

/// Everything in [`FullReport`] that is a function of the tables alone, plus
/// the `H²` audit when the solution is at hand.
pub fn report_from_tables(
    tables: ReportTables,
    opts: &ReportOptions,
    solution: Option<(&DivergenceSolution, &KomatsuFamily, &QuadratureSet)>,
) -> Result<FullReport> {
    let w = NormWeights::new(opts.eps1, opts.eps2, opts.m)?;
    let rho_u = rho_norm(&tables.u, &w)?;
    let rho_f = rho_norm(&tables.f, &w)?;
    let psi = psi_norm(&tables.v, &tables.q, &w)?;
    let ratio = (rho_f.total > 0.0).then(|| rho_u.total / rho_f.total);
    let certification = certify_radius(&tables.u, &opts.grid)?;
    let mut audits = audit_all(&tables.audit(), &opts.sweep)?;
    if let Some((sol, family, quad)) = solution {
        audits.push(check_h2_stokes(&sol.stokes.velocity(), &sol.stokes.pressure(), family, quad)?);
        audits.sort_by_key(|r| (r.lemma, r.i, r.j));
    }
    let constants = fit_constants(&audits);
    let c_star = constants
        .iter()
        .filter(|c| !is_commutator(c.lemma))
        .filter_map(|c| c.c_star)
        .fold(0.0, f64::max);
    let k_star = constants.iter().filter_map(|c| c.k_star).fold(0.0, f64::max);
    let bootstrap = check_bootstrap(&tables.v, &tables.q, &tables.f, &w)?;
    let sweep = bootstrap_sweep(&tables.v, &tables.q, &tables.f, &opts.bootstrap_eps2, c_star, k_star, opts.m)?;
    Ok(FullReport {
        options: opts.clone(),
        residuals: solution.map(|s| s.0.residuals.clone()).unwrap_or_default(),
        tables,
        rho_u,
        rho_f,
        psi,
        ratio,
        certification,
        audits,
        constants,
        bootstrap,
        bootstrap_sweep: sweep,
    })
}

fn is_commutator(l: LemmaId) -> bool {
    matches!(
        l,
        LemmaId::LaplaceCommutator
            | LemmaId::LaplaceCommutatorBase
            | LemmaId::GradientCommutator
            | LemmaId::GradientCommutatorBase
    )
}
