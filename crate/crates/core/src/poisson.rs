//! `-Δφ = f` in the enlarged domain with `φ = 0` on its boundary.
//!
//! `φ = φ_p + h` where `φ_p` is an exact polynomial particular solution and
//! `h` is a sum of logarithmic charges outside the enlarged domain fitted to
//! `-φ_p` on its boundary.

use std::f64::consts::PI;

use nalgebra::{Complex, DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::domain::AnalyticDomain;
use crate::error::{Error, Result};
use crate::eval::JetField;
use crate::jet::{log_series, real_part_jet, Jet};
use crate::lstsq::solve_tsvd;
use crate::poly::Poly;
use crate::Point;

/// Highest source degree accepted by [`poly_particular`].
pub const MAX_SOURCE_DEGREE: usize = 20;

/// A polynomial `φ_p` with `Δφ_p = -f`.
///
/// Uses the telescoping series `φ_p = Σ_{m≥0} (-1)^{m+1} ∂ₓ^{-2(m+1)} ∂ᵧ^{2m} f`,
/// where `∂ₓ^{-2}` is the double antiderivative in `x` with zero constants.
/// Its Laplacian collapses to `-f`; the series stops once `∂ᵧ^{2m} f = 0`.
pub fn poly_particular(f: &Poly) -> Result<Poly> {
    let f = f.clone().trimmed();
    if f.degree() > MAX_SOURCE_DEGREE {
        return Err(Error::DegreeCap(f.degree(), MAX_SOURCE_DEGREE));
    }
    let mut out = Poly::zero();
    // b_m = ∂ₓ^{-2m} ∂ᵧ^{2m} f
    let mut b = f;
    let mut sign = -1.0;
    while !b.is_zero() {
        let term = b.integrate_x().integrate_x();
        out = &out + &term.scale(sign);
        b = term.diff_y().diff_y();
        sign = -sign;
    }
    Ok(out.trimmed())
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MfsOptions {
    pub n_charges: usize,
    /// Collocation points; `None` means twice the charge count.
    pub n_collocation: Option<usize>,
    /// Charge circle radius relative to the circumradius.
    pub radius_factor: f64,
    pub rel_cutoff: f64,
    /// Admissible max boundary residual relative to `max(1, data scale)`.
    pub tolerance: f64,
}

impl Default for MfsOptions {
    fn default() -> Self {
        Self {
            n_charges: 96,
            n_collocation: None,
            radius_factor: 1.5,
            rel_cutoff: 1e-13,
            tolerance: 1e-8,
        }
    }
}

impl MfsOptions {
    pub fn n_collocation(&self) -> usize {
        self.n_collocation.unwrap_or(2 * self.n_charges)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Charge {
    pub point: Point,
    pub weight: f64,
}

/// Boundary residual measured on a check set four times denser than the
/// collocation set.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct BoundaryResidual {
    pub max: f64,
    pub l2: f64,
    pub data_scale: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct HarmonicFit {
    pub charges: Vec<Charge>,
    /// Constant term; logarithmic charges alone are incomplete in 2D.
    pub constant: f64,
    pub residual: BoundaryResidual,
    pub rank: usize,
}

impl HarmonicFit {
    pub fn eval(&self, p: Point) -> f64 {
        self.constant
            + self
                .charges
                .iter()
                .map(|c| c.weight * 0.5 * ((p[0] - c.point[0]).powi(2) + (p[1] - c.point[1]).powi(2)).ln())
                .sum::<f64>()
    }

    pub fn jet(&self, p: Point, order: usize) -> Result<Jet> {
        let mut acc = vec![Complex::new(0.0, 0.0); order + 1];
        for c in &self.charges {
            for (a, s) in acc.iter_mut().zip(log_series(c.point, p, order)?) {
                *a += s * c.weight;
            }
        }
        acc[0].re += self.constant;
        Ok(real_part_jet(p, &acc))
    }
}

pub(crate) fn source_circle(center: Point, radius: f64, n: usize) -> Vec<Point> {
    (0..n)
        .map(|k| {
            // Half-step offset keeps sources off the collocation rays.
            let t = 2.0 * PI * (k as f64 + 0.5) / n as f64;
            [center[0] + radius * t.cos(), center[1] + radius * t.sin()]
        })
        .collect()
}

/// Fits `Σ wᵢ log|x - sᵢ|` to `boundary_values` on the boundary of `domain`.
pub fn mfs_harmonic_fit<F>(domain: &AnalyticDomain, boundary_values: F, opts: &MfsOptions) -> Result<HarmonicFit>
where
    F: Fn(Point) -> f64 + Sync,
{
    let n_col = opts.n_collocation();
    if opts.n_charges == 0 || 2 * opts.n_charges < n_col {
        return Err(Error::InvalidInput(format!(
            "{} charges for {n_col} collocation points",
            opts.n_charges
        )));
    }
    let sources = source_circle(
        domain.center(),
        opts.radius_factor * domain.circumradius(),
        opts.n_charges,
    );
    let col = domain.boundary_trace(n_col)?;
    let rows: Vec<Vec<f64>> = col
        .points
        .par_iter()
        .map(|&p| {
            sources
                .iter()
                .map(|s| 0.5 * ((p[0] - s[0]).powi(2) + (p[1] - s[1]).powi(2)).ln())
                .chain(std::iter::once(1.0))
                .collect()
        })
        .collect();
    let a = DMatrix::from_fn(n_col, sources.len() + 1, |i, j| rows[i][j]);
    let b = DVector::from_iterator(n_col, col.points.iter().map(|&p| boundary_values(p)));
    let sol = solve_tsvd(a, &b, opts.rel_cutoff)?;
    let fit = HarmonicFit {
        charges: sources
            .iter()
            .zip(sol.weights.iter())
            .map(|(&point, &weight)| Charge { point, weight })
            .collect(),
        constant: sol.weights[sources.len()],
        residual: BoundaryResidual::default(),
        rank: sol.rank,
    };
    let check = domain.boundary_trace(4 * n_col)?;
    let mut max: f64 = 0.0;
    let mut sq = 0.0;
    let mut scale: f64 = 0.0;
    for (&p, w) in check.points.iter().zip(&check.weights) {
        let want = boundary_values(p);
        let e = fit.eval(p) - want;
        max = max.max(e.abs());
        sq += w * e * e;
        scale = scale.max(want.abs());
    }
    let residual = BoundaryResidual {
        max,
        l2: sq.sqrt(),
        data_scale: scale,
    };
    let tol = opts.tolerance * scale.max(1.0);
    if !(max <= tol) {
        return Err(Error::IllConditioned { residual: max, tol });
    }
    Ok(HarmonicFit { residual, ..fit })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PoissonSolution {
    pub particular: Poly,
    pub harmonic: HarmonicFit,
}

impl PoissonSolution {
    pub fn charges(&self) -> &[Charge] {
        &self.harmonic.charges
    }

    pub fn value(&self, p: Point) -> f64 {
        self.particular.eval(p) + self.harmonic.eval(p)
    }

    pub fn jet(&self, p: Point, order: usize) -> Result<Jet> {
        self.particular.jet(p, order).try_add(&self.harmonic.jet(p, order)?)
    }

    /// `∇φ` at a point.
    pub fn gradient(&self, p: Point) -> Result<Point> {
        let j = self.jet(p, 1)?;
        Ok([j.coeff(1, 0), j.coeff(0, 1)])
    }

    pub fn boundary_residual(&self) -> BoundaryResidual {
        self.harmonic.residual
    }
}

impl JetField for PoissonSolution {
    fn n_components(&self) -> usize {
        1
    }

    fn jets(&self, p: Point, order: usize) -> Result<Vec<Jet>> {
        Ok(vec![self.jet(p, order)?])
    }
}

/// Solves `-Δφ = f` on `domain_prime` with `φ = 0` on its boundary.
pub fn solve_poisson(domain_prime: &AnalyticDomain, f: &Poly, opts: &MfsOptions) -> Result<PoissonSolution> {
    let particular = poly_particular(f)?;
    let harmonic = mfs_harmonic_fit(domain_prime, |p| -particular.eval(p), opts)?;
    Ok(PoissonSolution {
        particular,
        harmonic,
    })
}
