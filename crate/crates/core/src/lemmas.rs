//! Finite-order audits of the derivative-reduction, commutator and absorption
//! inequalities behind the analyticity estimate.
//!
//! Every audit evaluates both sides from aggregated derivative tables
//! (`A(i, j)`, see [`crate::norms`]) and reports their ratio. Inequalities
//! that hold up to an unknown constant are audited by fitting that constant;
//! the commutator bounds carry a growth constant `K`, fitted by bisection as
//! the smallest `K` for which the bound holds with unit prefactor.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::domain::QuadratureSet;
use crate::error::{Error, Result};
use crate::eval::JetField;
use crate::fields::KomatsuFamily;
use crate::jet::Axis;
use crate::norms::{factorial, psi_norm, rho_norm, DerivativeTable, NormWeights, TableBuilder, TableKind, TableLimits};
use crate::poly::binomial;

/// Right-hand sides below this fraction of the table scale count as zero.
pub const DEGENERATE_TOLERANCE: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LemmaId {
    /// `‖v‖_{H²} + ‖∇q‖ ≲ ‖g‖ + ‖Tv‖_{H¹} + ‖v‖` for `-Δv + ∇q = g`.
    StokesH2,
    /// Trading two normal derivatives for one tangential one, `i ≥ 2`.
    NormalReduction,
    /// The `i = 1` case, closed by the source term.
    FirstNormalReduction,
    /// Removing tangential derivatives, `j ≥ 2`.
    TangentialReduction,
    /// `‖[T^j, Δ]v‖` bound.
    LaplaceCommutatorBase,
    /// `‖∂^i [T^j, Δ]v‖` bound.
    LaplaceCommutator,
    /// `‖[T^j, ∇]q‖` bound.
    GradientCommutatorBase,
    /// `‖∂^i [T^j, ∇]q‖` bound.
    GradientCommutator,
}

impl LemmaId {
    pub fn name(self) -> &'static str {
        match self {
            Self::StokesH2 => "stokes-h2",
            Self::NormalReduction => "normal-reduction",
            Self::FirstNormalReduction => "first-normal-reduction",
            Self::TangentialReduction => "tangential-reduction",
            Self::LaplaceCommutatorBase => "laplace-commutator-base",
            Self::LaplaceCommutator => "laplace-commutator",
            Self::GradientCommutatorBase => "gradient-commutator-base",
            Self::GradientCommutator => "gradient-commutator",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InequalityReport {
    pub lemma: LemmaId,
    pub i: usize,
    pub j: usize,
    pub lhs: f64,
    /// Right-hand side with unit constant (and `K = 1` for commutator bounds).
    pub rhs: f64,
    /// `lhs / rhs`; absent for degenerate cases.
    pub ratio: Option<f64>,
    /// Smallest `K` with `lhs ≤ rhs(K)`; commutator bounds only.
    pub k_star: Option<f64>,
    /// The right-hand side vanishes, so the case says nothing about the constant.
    pub degenerate: bool,
}

impl InequalityReport {
    fn new(lemma: LemmaId, i: usize, j: usize, lhs: f64, rhs: f64, scale: f64) -> Self {
        let degenerate = !(rhs > DEGENERATE_TOLERANCE * scale);
        Self {
            lemma,
            i,
            j,
            lhs,
            rhs,
            ratio: (!degenerate).then(|| lhs / rhs),
            k_star: None,
            degenerate,
        }
    }
}

/// The tables an audit reads.
#[derive(Clone, Copy, Debug)]
pub struct AuditTables<'a> {
    pub v: &'a DerivativeTable,
    pub q: &'a DerivativeTable,
    pub f: &'a DerivativeTable,
    /// `∂^i [T^β, Δ] v`.
    pub laplace_commutator: &'a DerivativeTable,
    /// `∂^i [T^β, ∇] q`.
    pub gradient_commutator: &'a DerivativeTable,
}

impl AuditTables<'_> {
    /// Largest aggregated entry of the velocity and pressure tables.
    pub fn scale(&self) -> f64 {
        [self.v, self.q, self.f]
            .iter()
            .flat_map(|t| t.aggregates().into_iter().flatten())
            .fold(0.0, f64::max)
    }
}

/// Normal-derivative reduction at `(i, j)`: the `i ≥ 2` form, or the `i = 1`,
/// `j ≥ 1` form closed by the source.
pub fn check_normal_reduction(t: &AuditTables<'_>, i: usize, j: usize) -> Result<InequalityReport> {
    let av = |i, j| t.v.aggregate(i, j);
    let aq = |i, j| t.q.aggregate(i, j);
    let scale = t.scale();
    match i {
        0 => Err(Error::InvalidInput("normal reduction needs i ≥ 1".into())),
        1 => {
            if j == 0 {
                return Err(Error::InvalidInput("first normal reduction needs j ≥ 1".into()));
            }
            let lhs = av(1, j)? + aq(0, j)?;
            let rhs = t.laplace_commutator.aggregate(0, j - 1)?
                + t.gradient_commutator.aggregate(0, j - 1)?
                + t.f.aggregate(0, j)?;
            Ok(InequalityReport::new(LemmaId::FirstNormalReduction, i, j, lhs, rhs, scale))
        }
        _ => {
            let lhs = av(i, j)? + aq(i - 1, j)?;
            // ‖∂^{i-2}T^{j+1}v‖_{H¹} + ‖∂^{i-2}T^j v‖ + commutators
            let rhs = av(i - 1, j + 1)?
                + av(i - 2, j + 1)?
                + av(i - 2, j)?
                + t.laplace_commutator.aggregate(i - 2, j)?
                + t.gradient_commutator.aggregate(i - 2, j)?;
            Ok(InequalityReport::new(LemmaId::NormalReduction, i, j, lhs, rhs, scale))
        }
    }
}

/// Tangential reduction: `‖T^j v‖ + ‖T^{j-1}q‖` against commutators of
/// order `j - 2` and `‖T^{j-1}f‖`.
pub fn check_tangential_reduction(t: &AuditTables<'_>, j: usize) -> Result<InequalityReport> {
    if j < 2 {
        return Err(Error::InvalidInput("tangential reduction needs j ≥ 2".into()));
    }
    let lhs = t.v.aggregate(0, j)? + t.q.aggregate(0, j - 1)?;
    let rhs = t.laplace_commutator.aggregate(0, j - 2)?
        + t.gradient_commutator.aggregate(0, j - 2)?
        + t.f.aggregate(0, j - 1)?;
    Ok(InequalityReport::new(LemmaId::TangentialReduction, 0, j, lhs, rhs, t.scale()))
}

/// Which commutator a Leibniz bound controls.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CommutatorKind {
    Laplace,
    Gradient,
}

/// Coefficients `c_k` of `rhs(K) = Σ_k c_k K^k`.
fn leibniz_polynomial(t: &AuditTables<'_>, kind: CommutatorKind, i: usize, j: usize) -> Result<Vec<f64>> {
    let mut c = vec![0.0; i + j + 1];
    let fj = factorial(j);
    let fi = factorial(i);
    match (kind, i) {
        (CommutatorKind::Laplace, 0) => {
            for jp in 1..=j {
                let w = fj / factorial(j - jp);
                c[jp] += w * (t.v.aggregate(2, j - jp)? + jp as f64 * t.v.aggregate(1, j - jp)?);
            }
        }
        (CommutatorKind::Laplace, _) => {
            for jp in 0..j {
                for ip in 0..=i {
                    let i3 = i - ip;
                    let w = binomial(ip + j - jp, ip) * fi * fj / (factorial(i3) * factorial(jp));
                    c[ip + j - jp] += w * t.v.aggregate(i3 + 2, jp)?;
                }
            }
        }
        (CommutatorKind::Gradient, 0) => {
            for jp in 1..=j {
                c[jp] += fj / factorial(j - jp) * t.q.aggregate(1, j - jp)?;
            }
        }
        (CommutatorKind::Gradient, _) => {
            for jp in 0..j {
                for ip in 0..=i {
                    let w = binomial(ip + j - jp, ip) * fi * fj / (factorial(i - ip) * factorial(jp));
                    c[ip + j - jp] += w * t.q.aggregate(i - ip + 1, jp)?;
                }
            }
        }
    }
    Ok(c)
}

fn eval_poly(c: &[f64], k: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &ci| acc * k + ci)
}

/// Smallest `K ≥ 0` with `lhs ≤ Σ c_k K^k`, for nonnegative `c` with `c_0 = 0`.
fn fit_k(lhs: f64, c: &[f64]) -> Option<f64> {
    if lhs <= 0.0 {
        return Some(0.0);
    }
    if c.iter().all(|&ci| ci <= 0.0) {
        return None;
    }
    let mut hi = 1.0;
    while eval_poly(c, hi) < lhs {
        hi *= 2.0;
        if !hi.is_finite() {
            return None;
        }
    }
    let mut lo = 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if eval_poly(c, mid) < lhs {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-15 * hi {
            break;
        }
    }
    Some(hi)
}

/// Leibniz-type commutator bound at `(i, j)`, `j ≥ 1`, with fitted `K*`.
pub fn check_leibniz(t: &AuditTables<'_>, kind: CommutatorKind, i: usize, j: usize) -> Result<InequalityReport> {
    if j == 0 {
        return Err(Error::InvalidInput("commutator bounds need j ≥ 1".into()));
    }
    let (lemma, table) = match (kind, i) {
        (CommutatorKind::Laplace, 0) => (LemmaId::LaplaceCommutatorBase, t.laplace_commutator),
        (CommutatorKind::Laplace, _) => (LemmaId::LaplaceCommutator, t.laplace_commutator),
        (CommutatorKind::Gradient, 0) => (LemmaId::GradientCommutatorBase, t.gradient_commutator),
        (CommutatorKind::Gradient, _) => (LemmaId::GradientCommutator, t.gradient_commutator),
    };
    let lhs = table.aggregate(i, j)?;
    let c = leibniz_polynomial(t, kind, i, j)?;
    let rhs = eval_poly(&c, 1.0);
    let mut report = InequalityReport::new(lemma, i, j, lhs, rhs, t.scale());
    report.k_star = fit_k(lhs, &c);
    // A vanishing commutator is satisfied by K = 0 whatever the right side.
    if lhs <= DEGENERATE_TOLERANCE * t.scale() {
        report.k_star = Some(0.0);
    }
    Ok(report)
}

/// Stokes `H²` estimate for a manufactured pair `(v, q)`; `g = -Δv + ∇q` is
/// formed from jets.
pub fn check_h2_stokes(
    v: &dyn JetField,
    q: &dyn JetField,
    family: &KomatsuFamily,
    quad: &QuadratureSet,
) -> Result<InequalityReport> {
    if v.n_components() != 2 || q.n_components() != 1 {
        return Err(Error::InvalidInput("expected a 2D velocity and a scalar pressure".into()));
    }
    let tables = TableBuilder::new(family, quad)
        .add("v", v, TableLimits::rectangular(2, 1), TableKind::Derivatives)
        .add("q", q, TableLimits::rectangular(1, 0), TableKind::Derivatives)
        .build()?;
    let (tv, tq) = (&tables[0], &tables[1]);
    let g: Vec<[f64; 2]> = quad
        .points
        .par_iter()
        .map(|&p| {
            let vj = v.jets(p, 2)?;
            let qj = q.jets(p, 1)?.remove(0);
            let mut out = [0.0; 2];
            for a in Axis::BOTH {
                out[a.index()] = -vj[a.index()].laplacian()?.value() + qj.diff(a)?.value();
            }
            Ok(out)
        })
        .collect::<Result<_>>()?;
    let g_norm: f64 = (0..2)
        .map(|c| {
            quad.weights
                .iter()
                .zip(&g)
                .map(|(w, gi)| w * gi[c] * gi[c])
                .sum::<f64>()
                .sqrt()
        })
        .sum();
    let lhs = tv.aggregate(0, 0)? + tv.aggregate(1, 0)? + tv.aggregate(2, 0)? + tq.aggregate(1, 0)?;
    let rhs = g_norm + tv.aggregate(1, 1)? + tv.aggregate(0, 1)? + tv.aggregate(0, 0)?;
    let scale = [tv.aggregate(0, 0)?, tq.aggregate(0, 0)?, g_norm].into_iter().fold(0.0, f64::max);
    Ok(InequalityReport::new(LemmaId::StokesH2, 2, 0, lhs, rhs, scale))
}

/// Index ranges swept by [`audit_all`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SweepLimits {
    /// Normal orders for the reduction lemmas (`2..=i_max`).
    pub i_max: usize,
    /// Tangential orders for the reduction lemmas.
    pub j_max: usize,
    /// Normal orders for the commutator bounds (`0..=leibniz_i_max`).
    pub leibniz_i_max: usize,
}

impl Default for SweepLimits {
    fn default() -> Self {
        Self {
            i_max: 3,
            j_max: 3,
            leibniz_i_max: 2,
        }
    }
}

impl SweepLimits {
    /// Commutator table extent needed by the sweep.
    pub fn commutator_limits(&self, max_total: usize) -> TableLimits {
        TableLimits {
            i_max: self.leibniz_i_max.max(self.i_max.saturating_sub(2)),
            j_max: self.j_max,
            max_total,
        }
    }
}

/// Fitted constants of one lemma over a sweep.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FittedConstant {
    pub lemma: LemmaId,
    /// Largest `lhs / rhs` over non-degenerate cases.
    pub c_star: Option<f64>,
    /// Largest fitted `K*` (commutator bounds).
    pub k_star: Option<f64>,
    pub cases: usize,
    pub degenerate: usize,
}

/// Every audit in the sweep, sorted by `(lemma, i, j)`.
pub fn audit_all(t: &AuditTables<'_>, limits: &SweepLimits) -> Result<Vec<InequalityReport>> {
    let mut out = Vec::new();
    for j in 0..=limits.j_max {
        for i in 2..=limits.i_max {
            out.push(check_normal_reduction(t, i, j)?);
        }
        if j >= 1 {
            out.push(check_normal_reduction(t, 1, j)?);
            for i in 0..=limits.leibniz_i_max {
                out.push(check_leibniz(t, CommutatorKind::Laplace, i, j)?);
                out.push(check_leibniz(t, CommutatorKind::Gradient, i, j)?);
            }
        }
        if j >= 2 {
            out.push(check_tangential_reduction(t, j)?);
        }
    }
    out.sort_by_key(|r| (r.lemma, r.i, r.j));
    Ok(out)
}

/// Per-lemma maxima of the fitted constants.
pub fn fit_constants(reports: &[InequalityReport]) -> Vec<FittedConstant> {
    let mut out: Vec<FittedConstant> = Vec::new();
    for r in reports {
        let idx = match out.iter().position(|c| c.lemma == r.lemma) {
            Some(k) => k,
            None => {
                out.push(FittedConstant {
                    lemma: r.lemma,
                    c_star: None,
                    k_star: None,
                    cases: 0,
                    degenerate: 0,
                });
                out.len() - 1
            }
        };
        let c = &mut out[idx];
        c.cases += 1;
        if r.degenerate {
            c.degenerate += 1;
        }
        if let Some(ratio) = r.ratio {
            c.c_star = Some(c.c_star.map_or(ratio, |m: f64| m.max(ratio)));
        }
        if let Some(k) = r.k_star {
            c.k_star = Some(c.k_star.map_or(k, |m: f64| m.max(k)));
        }
    }
    out.sort_by_key(|c| c.lemma);
    out
}

/// The three sums of the absorption argument at one `(ε₁, ε₂)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BootstrapReport {
    pub eps1: f64,
    pub eps2: f64,
    pub m: usize,
    /// `i ≥ 2`, `j ≥ 1` terms.
    pub s1: f64,
    /// `i = 1`, `j ≥ 2` terms.
    pub s2: f64,
    /// `i = 0`, `j ≥ 3` terms.
    pub s3: f64,
    pub psi: f64,
    pub rho_f: f64,
    /// `S₁ ≤ ψ/10`.
    pub s1_absorbed: bool,
    /// `S₂ ≤ ψ/25 + ρ(f)`.
    pub s2_absorbed: bool,
    /// `S₃ ≤ ψ/25 + ρ(f)`.
    pub s3_absorbed: bool,
}

impl BootstrapReport {
    pub fn absorbed(&self) -> bool {
        self.s1_absorbed && self.s2_absorbed && self.s3_absorbed
    }
}

/// Truncated absorption sums at the given weights.
pub fn check_bootstrap(
    v: &DerivativeTable,
    q: &DerivativeTable,
    f: &DerivativeTable,
    w: &NormWeights,
) -> Result<BootstrapReport> {
    let m = w.m;
    let (e1, e2) = (w.eps1, w.eps2);
    let mut s1 = 0.0;
    for i in 2..=m {
        for j in 1..=m - i {
            let d = factorial(i + j);
            s1 += e1.powi(i as i32) * e2.powi(j as i32) / d * v.aggregate(i, j)?;
            s1 += e1.powi(i as i32 - 1) * e2.powi(j as i32) / d * q.aggregate(i, j)?;
        }
    }
    let mut s2 = 0.0;
    for j in 2..m {
        s2 += e1 * e2.powi(j as i32) / factorial(j + 1) * (v.aggregate(1, j)? + q.aggregate(0, j)?);
    }
    let mut s3 = 0.0;
    for j in 3..=m {
        s3 += e2.powi(j as i32) / factorial(j) * (v.aggregate(0, j)? + q.aggregate(0, j - 1)?);
    }
    let psi = psi_norm(v, q, w)?.total;
    let rho_f = rho_norm(f, w)?.total;
    Ok(BootstrapReport {
        eps1: e1,
        eps2: e2,
        m,
        s1,
        s2,
        s3,
        psi,
        rho_f,
        s1_absorbed: s1 <= psi / 10.0,
        s2_absorbed: s2 <= psi / 25.0 + rho_f,
        s3_absorbed: s3 <= psi / 25.0 + rho_f,
    })
}

/// Absorption over a grid of `ε₂` with `ε₁ = ε₂ / (100 (C+1)(K+1))`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BootstrapSweep {
    pub c_star: f64,
    pub k_star: f64,
    pub reports: Vec<BootstrapReport>,
    /// Largest grid `ε₂` at which all three sums are absorbed.
    pub best_eps2: Option<f64>,
}

pub fn bootstrap_sweep(
    v: &DerivativeTable,
    q: &DerivativeTable,
    f: &DerivativeTable,
    eps2_grid: &[f64],
    c_star: f64,
    k_star: f64,
    m: usize,
) -> Result<BootstrapSweep> {
    let tie = 100.0 * (c_star + 1.0) * (k_star + 1.0);
    let reports = eps2_grid
        .iter()
        .map(|&e2| check_bootstrap(v, q, f, &NormWeights::new(e2 / tie, e2, m)?))
        .collect::<Result<Vec<_>>>()?;
    let best_eps2 = reports
        .iter()
        .filter(|r| r.absorbed())
        .map(|r| r.eps2)
        .max_by(f64::total_cmp);
    Ok(BootstrapSweep {
        c_star,
        k_star,
        reports,
        best_eps2,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{AnalyticDomain, DomainSpec};
    use crate::eval::PolyVector;
    use crate::poly::Poly;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    fn disk() -> (KomatsuFamily, QuadratureSet) {
        let d = AnalyticDomain::new(&DomainSpec::Disk).unwrap();
        (KomatsuFamily::build(&d).unwrap(), d.volume_quadrature(12, 48).unwrap())
    }

    fn zero_vec() -> PolyVector {
        PolyVector(vec![Poly::zero(), Poly::zero()])
    }

    #[test]
    fn k_fit() {
        assert_eq!(fit_k(0.0, &[0.0, 1.0]), Some(0.0));
        assert_eq!(fit_k(1.0, &[0.0, 0.0]), None);
        assert_abs_diff_eq!(fit_k(6.0, &[0.0, 1.0, 1.0]).unwrap(), 2.0, epsilon = 1e-12);
    }

    #[test]
    fn h2_for_rotation_and_constants() {
        let (fam, q) = disk();
        let rot = PolyVector(vec![Poly::y(), Poly::x().scale(-1.0)]);
        let r = check_h2_stokes(&rot, &Poly::zero(), &fam, &q).unwrap();
        // ‖v‖ + ‖∇v‖ = 2√(π/4) + 2√π, ‖Tv‖ uses T₁, T₂, T₃ of each component.
        assert_abs_diff_eq!(r.lhs, PI.sqrt() + 2.0 * PI.sqrt(), epsilon = 1e-12);
        assert!(r.ratio.unwrap().is_finite());
        let r = check_h2_stokes(&zero_vec(), &Poly::constant(2.0), &fam, &q).unwrap();
        assert_eq!(r.lhs, 0.0);
        assert!(r.degenerate && r.ratio.is_none());
    }

    #[test]
    fn leibniz_base_case_for_first_field() {
        // [T₁, Δ]x² = 8x; rhs = K(‖∂²x²‖ + ‖∂x²‖) = K(2√π + 2√(π/4)).
        let (fam, q) = disk();
        let u = Poly::from_terms([(2, 0, 1.0)]);
        let zero = Poly::zero();
        let tables = TableBuilder::new(&fam, &q)
            .alphabet(&[1])
            .unwrap()
            .add("v", &u, TableLimits::triangular(4), TableKind::Derivatives)
            .add("q", &zero, TableLimits::triangular(4), TableKind::Derivatives)
            .add("f", &zero, TableLimits::triangular(4), TableKind::Derivatives)
            .add("lap", &u, TableLimits::triangular(2), TableKind::LaplaceCommutator)
            .add("grad", &zero, TableLimits::triangular(2), TableKind::GradientCommutator)
            .build()
            .unwrap();
        let t = AuditTables {
            v: &tables[0],
            q: &tables[1],
            f: &tables[2],
            laplace_commutator: &tables[3],
            gradient_commutator: &tables[4],
        };
        let r = check_leibniz(&t, CommutatorKind::Laplace, 0, 1).unwrap();
        let lhs = 8.0 * (PI / 4.0).sqrt();
        let coeff = 2.0 * PI.sqrt() + 2.0 * (PI / 4.0).sqrt();
        assert_abs_diff_eq!(r.lhs, lhs, epsilon = 1e-11);
        assert_abs_diff_eq!(r.rhs, coeff, epsilon = 1e-11);
        assert_abs_diff_eq!(r.k_star.unwrap(), lhs / coeff, epsilon = 1e-10);
    }

    #[test]
    fn zero_flow_is_degenerate_everywhere() {
        let (fam, q) = disk();
        let z = zero_vec();
        let zero = Poly::zero();
        let tables = TableBuilder::new(&fam, &q)
            .add("v", &z, TableLimits::triangular(5), TableKind::Derivatives)
            .add("q", &zero, TableLimits::triangular(5), TableKind::Derivatives)
            .add("f", &zero, TableLimits::triangular(5), TableKind::Derivatives)
            .add("lap", &z, TableLimits::triangular(4), TableKind::LaplaceCommutator)
            .add("grad", &zero, TableLimits::triangular(4), TableKind::GradientCommutator)
            .build()
            .unwrap();
        let t = AuditTables {
            v: &tables[0],
            q: &tables[1],
            f: &tables[2],
            laplace_commutator: &tables[3],
            gradient_commutator: &tables[4],
        };
        let reports = audit_all(&t, &SweepLimits { i_max: 2, j_max: 2, leibniz_i_max: 1 }).unwrap();
        assert!(reports.iter().all(|r| r.degenerate && r.ratio.is_none()));
        let fits = fit_constants(&reports);
        assert!(fits.iter().all(|c| c.c_star.is_none()));
        let b = check_bootstrap(&tables[0], &tables[1], &tables[2], &NormWeights::new(0.01, 0.5, 5).unwrap()).unwrap();
        assert_eq!((b.s1, b.s2, b.s3), (0.0, 0.0, 0.0));
    }
}
