//! Homogeneous Stokes system `-Δv + ∇q = 0`, `div v = 0` with Dirichlet data,
//! solved by Stokeslet collocation.
//!
//! With `L_k = log|x - s_k|` the fitted velocity is
//! `v_i = Σ_k [-w_{k,i} L_k + (x_i - s_{k,i}) (w_k · ∇L_k)] + c_i` and the
//! pressure `q = 2 Σ_k w_k · ∇L_k + q₀`. Every sum is the real part of a
//! holomorphic series in `z = x + iy`, so jets of any order are cheap.

use nalgebra::{Complex, DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::domain::AnalyticDomain;
use crate::error::{Error, Result};
use crate::eval::JetField;
use crate::jet::{log_series, mul_at_order, real_part_jet, Axis, Jet};
use crate::lstsq::solve_tsvd;
use crate::poisson::{source_circle, BoundaryResidual, PoissonSolution};
use crate::Point;

/// Admissible `|∮ g·n|` relative to `max(1, ∮|g|)`.
pub const FLUX_TOLERANCE: f64 = 1e-8;

const FLUX_TRACE_POINTS: usize = 512;

/// `∮_{∂Ω} ∇φ·n ds`, which equals `-∫_Ω f` for `-Δφ = f`.
pub fn check_compatibility(domain: &AnalyticDomain, phi: &PoissonSolution) -> Result<f64> {
    Ok(boundary_flux(domain, |p| phi.gradient(p))?.0)
}

/// Returns the flux of `g` through `∂Ω` and the scale `∮|g| ds`.
pub fn boundary_flux<G>(domain: &AnalyticDomain, g: G) -> Result<(f64, f64)>
where
    G: Fn(Point) -> Result<Point>,
{
    let trace = domain.boundary_trace(FLUX_TRACE_POINTS)?;
    let mut flux = 0.0;
    let mut scale = 0.0;
    for ((&p, &n), w) in trace.points.iter().zip(&trace.normals).zip(&trace.weights) {
        let v = g(p)?;
        flux += w * (v[0] * n[0] + v[1] * n[1]);
        scale += w * v[0].hypot(v[1]);
    }
    Ok((flux, scale))
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct StokesOptions {
    pub n_sources: usize,
    /// Collocation points; `None` means twice the source count.
    pub n_collocation: Option<usize>,
    /// Source circle radius relative to the circumradius.
    pub radius_factor: f64,
    pub rel_cutoff: f64,
    /// Admissible max boundary residual relative to `max(1, data scale)`.
    pub tolerance: f64,
    /// Volume rule used for the pressure gauge.
    pub gauge_radial: usize,
    pub gauge_angular: usize,
}

impl Default for StokesOptions {
    fn default() -> Self {
        Self {
            n_sources: 96,
            n_collocation: None,
            radius_factor: 1.5,
            rel_cutoff: 1e-13,
            tolerance: 1e-6,
            gauge_radial: 16,
            gauge_angular: 64,
        }
    }
}

impl StokesOptions {
    pub fn n_collocation(&self) -> usize {
        self.n_collocation.unwrap_or(2 * self.n_sources)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Stokeslet {
    pub point: Point,
    pub force: [f64; 2],
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct StokesSolution {
    pub sources: Vec<Stokeslet>,
    /// Uniform velocity added to the Stokeslet sum.
    pub constant_velocity: [f64; 2],
    /// Pressure constant fixing zero volume mean.
    pub pressure_offset: f64,
    pub residual: BoundaryResidual,
    /// `∮ g·n` of the boundary data.
    pub flux: f64,
    pub rank: usize,
}

/// Velocity and pressure jets at one point.
#[derive(Clone, Debug)]
pub struct StokesJets {
    pub velocity: [Jet; 2],
    pub pressure: Jet,
}

/// `G_ij(x - s)`.
fn stokeslet_matrix(x: Point, s: Point) -> [[f64; 2]; 2] {
    let r = [x[0] - s[0], x[1] - s[1]];
    let r2 = r[0] * r[0] + r[1] * r[1];
    let l = 0.5 * r2.ln();
    [
        [-l + r[0] * r[0] / r2, r[0] * r[1] / r2],
        [r[0] * r[1] / r2, -l + r[1] * r[1] / r2],
    ]
}

impl StokesSolution {
    fn zero(n_sources: usize) -> Self {
        Self {
            sources: Vec::with_capacity(n_sources),
            constant_velocity: [0.0; 2],
            pressure_offset: 0.0,
            residual: BoundaryResidual::default(),
            flux: 0.0,
            rank: 0,
        }
    }

    /// Velocity and pressure jets of the given order at `p`.
    pub fn jets(&self, p: Point, order: usize) -> Result<StokesJets> {
        let zero = Complex::new(0.0, 0.0);
        let mut sa = [vec![zero; order + 1], vec![zero; order + 1]];
        let mut sb = vec![zero; order + 1];
        for s in &self.sources {
            let seq = log_series(s.point, p, order + 1)?;
            // w·∇L = Re(c F') with c = w_x + i w_y.
            let c = Complex::new(s.force[0], s.force[1]);
            for n in 0..=order {
                let d = seq[n + 1] * ((n + 1) as f64) * c;
                sb[n] += d;
                for i in 0..2 {
                    sa[i][n] -= seq[n] * s.force[i] + d * s.point[i];
                }
            }
        }
        let b = real_part_jet(p, &sb);
        let mut velocity = [Jet::zero(p, order), Jet::zero(p, order)];
        for (i, axis) in Axis::BOTH.into_iter().enumerate() {
            let mut v = real_part_jet(p, &sa[i]);
            v.axpy(1.0, &mul_at_order(&Jet::coordinate(p, order, axis), &b, order));
            velocity[i] = v.add_scalar(self.constant_velocity[i]);
        }
        let pressure = b.scale(2.0).add_scalar(self.pressure_offset);
        Ok(StokesJets { velocity, pressure })
    }

    pub fn velocity_at(&self, p: Point) -> Result<Point> {
        let j = self.jets(p, 0)?;
        Ok([j.velocity[0].value(), j.velocity[1].value()])
    }

    pub fn pressure_at(&self, p: Point) -> Result<f64> {
        Ok(self.jets(p, 0)?.pressure.value())
    }

    pub fn velocity(&self) -> StokesVelocity<'_> {
        StokesVelocity(self)
    }

    pub fn pressure(&self) -> StokesPressure<'_> {
        StokesPressure(self)
    }
}

pub struct StokesVelocity<'a>(pub &'a StokesSolution);

impl JetField for StokesVelocity<'_> {
    fn n_components(&self) -> usize {
        2
    }

    fn jets(&self, p: Point, order: usize) -> Result<Vec<Jet>> {
        Ok(self.0.jets(p, order)?.velocity.into())
    }
}

pub struct StokesPressure<'a>(pub &'a StokesSolution);

impl JetField for StokesPressure<'_> {
    fn n_components(&self) -> usize {
        1
    }

    fn jets(&self, p: Point, order: usize) -> Result<Vec<Jet>> {
        Ok(vec![self.0.jets(p, order)?.pressure])
    }
}

/// Fits a Stokes flow with `v = g` on `∂Ω`.
pub fn solve_stokes_bvp<G>(domain: &AnalyticDomain, g: G, opts: &StokesOptions) -> Result<StokesSolution>
where
    G: Fn(Point) -> Result<Point> + Sync,
{
    let n_col = opts.n_collocation();
    let n = opts.n_sources;
    if n == 0 || 2 * n < n_col {
        return Err(Error::InvalidInput(format!("{n} sources for {n_col} collocation points")));
    }
    let (flux, flux_scale) = boundary_flux(domain, &g)?;
    let flux_tol = FLUX_TOLERANCE * flux_scale.max(1.0);
    if !(flux.abs() <= flux_tol) {
        return Err(Error::IncompatibleFlux { flux, tol: flux_tol });
    }
    let points = source_circle(domain.center(), opts.radius_factor * domain.circumradius(), n);
    let col = domain.boundary_trace(n_col)?;
    let data: Vec<Point> = col.points.iter().map(|&p| g(p)).collect::<Result<_>>()?;

    let mut sol = StokesSolution::zero(n);
    sol.flux = flux;
    if data.iter().all(|d| d[0] == 0.0 && d[1] == 0.0) {
        sol.sources = points
            .iter()
            .map(|&point| Stokeslet { point, force: [0.0; 2] })
            .collect();
        return Ok(sol);
    }

    // Rows: (point, component); columns: (source, force component), then two constants.
    let n_cols = 2 * n + 2;
    let rows: Vec<[Vec<f64>; 2]> = col
        .points
        .par_iter()
        .map(|&x| {
            let mut r = [vec![0.0; n_cols], vec![0.0; n_cols]];
            for (k, &s) in points.iter().enumerate() {
                let gm = stokeslet_matrix(x, s);
                for i in 0..2 {
                    r[i][2 * k] = gm[i][0];
                    r[i][2 * k + 1] = gm[i][1];
                }
            }
            r[0][2 * n] = 1.0;
            r[1][2 * n + 1] = 1.0;
            r
        })
        .collect();
    let a = DMatrix::from_fn(2 * n_col, n_cols, |row, c| rows[row / 2][row % 2][c]);
    let b = DVector::from_iterator(2 * n_col, data.iter().flat_map(|d| [d[0], d[1]]));
    let fit = solve_tsvd(a, &b, opts.rel_cutoff)?;
    sol.rank = fit.rank;
    sol.sources = points
        .iter()
        .enumerate()
        .map(|(k, &point)| Stokeslet {
            point,
            force: [fit.weights[2 * k], fit.weights[2 * k + 1]],
        })
        .collect();
    sol.constant_velocity = [fit.weights[2 * n], fit.weights[2 * n + 1]];

    let vol = domain.volume_quadrature(opts.gauge_radial, opts.gauge_angular)?;
    let pressures: Vec<f64> = vol
        .points
        .par_iter()
        .map(|&p| sol.pressure_at(p))
        .collect::<Result<_>>()?;
    let area: f64 = vol.weights.iter().sum();
    sol.pressure_offset = -vol.integrate(&pressures)? / area;

    let check = domain.boundary_trace(4 * n_col)?;
    let errs: Vec<(f64, f64)> = check
        .points
        .par_iter()
        .map(|&p| {
            let want = g(p)?;
            let got = sol.velocity_at(p)?;
            Ok(((got[0] - want[0]).hypot(got[1] - want[1]), want[0].hypot(want[1])))
        })
        .collect::<Result<_>>()?;
    let mut res = BoundaryResidual::default();
    let mut sq = 0.0;
    for (&(e, s), w) in errs.iter().zip(&check.weights) {
        res.max = res.max.max(e);
        res.data_scale = res.data_scale.max(s);
        sq += w * e * e;
    }
    res.l2 = sq.sqrt();
    sol.residual = res;
    let tol = opts.tolerance * res.data_scale.max(1.0);
    if !(res.max <= tol) {
        return Err(Error::IllConditioned { residual: res.max, tol });
    }
    Ok(sol)
}

/// Jets of `v` and `q` at each point.
pub fn evaluate_solution(sol: &StokesSolution, points: &[Point], order: usize) -> Result<Vec<StokesJets>> {
    points.par_iter().map(|&p| sol.jets(p, order)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::DomainSpec;
    use crate::eval::divergence;
    use crate::poisson::{solve_poisson, MfsOptions};
    use crate::poly::Poly;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    fn disk() -> AnalyticDomain {
        AnalyticDomain::new(&DomainSpec::Disk).unwrap()
    }

    fn samples() -> Vec<Point> {
        (0..50)
            .map(|k| {
                let t = 2.399963 * k as f64;
                let r = 0.95 * ((k as f64 + 0.5) / 50.0).sqrt();
                [r * t.cos(), r * t.sin()]
            })
            .collect()
    }

    #[test]
    fn fast_jets_match_direct_kernel_sums() {
        let sol = StokesSolution {
            sources: vec![
                Stokeslet { point: [2.0, 0.5], force: [0.3, -1.1] },
                Stokeslet { point: [-1.2, 1.7], force: [-0.4, 0.2] },
            ],
            constant_velocity: [0.1, -0.2],
            pressure_offset: 0.5,
            ..StokesSolution::zero(2)
        };
        let p = [0.2, -0.3];
        let order = 5;
        let jets = sol.jets(p, order).unwrap();
        let mut want_v = [Jet::constant(p, order, 0.1), Jet::constant(p, order, -0.2)];
        let mut want_q = Jet::constant(p, order, 0.5);
        for s in &sol.sources {
            let parts = crate::jet::KernelParts::new(s.point, p, order).unwrap();
            for i in Axis::BOTH {
                for j in Axis::BOTH {
                    want_v[i.index()].axpy(s.force[j.index()], &parts.stokeslet_velocity(i, j));
                }
            }
            for j in Axis::BOTH {
                want_q.axpy(s.force[j.index()], &parts.stokeslet_pressure(j));
            }
        }
        for i in 0..2 {
            for (a, b) in jets.velocity[i].coeffs().iter().zip(want_v[i].coeffs()) {
                assert_abs_diff_eq!(a, b, epsilon = 1e-12);
            }
        }
        for (a, b) in jets.pressure.coeffs().iter().zip(want_q.coeffs()) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-12);
        }
    }

    #[test]
    fn compatibility_flux() {
        let opts = MfsOptions::default();
        let phi = solve_poisson(&disk(), &Poly::x(), &opts).unwrap();
        assert!(check_compatibility(&disk(), &phi).unwrap().abs() <= 1e-9);
        let phi = solve_poisson(&disk(), &Poly::constant(-4.0), &opts).unwrap();
        assert_abs_diff_eq!(check_compatibility(&disk(), &phi).unwrap(), 4.0 * PI, epsilon = 1e-9);
        let phi = solve_poisson(&disk(), &Poly::zero(), &opts).unwrap();
        assert_eq!(check_compatibility(&disk(), &phi).unwrap(), 0.0);
    }

    #[test]
    fn zero_data_gives_zero_flow() {
        let sol = solve_stokes_bvp(&disk(), |_| Ok([0.0, 0.0]), &StokesOptions::default()).unwrap();
        assert!(sol.sources.iter().all(|s| s.force == [0.0, 0.0]));
        for p in samples() {
            assert_eq!(sol.velocity_at(p).unwrap(), [0.0, 0.0]);
            assert_eq!(sol.pressure_at(p).unwrap(), 0.0);
        }
    }

    #[test]
    fn rigid_rotation_is_reproduced() {
        let sol = solve_stokes_bvp(&disk(), |p| Ok([p[1], -p[0]]), &StokesOptions::default()).unwrap();
        for p in samples() {
            let v = sol.velocity_at(p).unwrap();
            assert_abs_diff_eq!(v[0], p[1], epsilon = 1e-6);
            assert_abs_diff_eq!(v[1], -p[0], epsilon = 1e-6);
        }
    }

    #[test]
    fn incompatible_data_is_refused() {
        let err = solve_stokes_bvp(&disk(), Ok, &StokesOptions::default()).unwrap_err();
        assert!(matches!(err, Error::IncompatibleFlux { flux, .. } if (flux - 2.0 * PI).abs() < 1e-9));
    }

    #[test]
    fn poisson_gradient_data_and_interior_identities() {
        let d = disk();
        let phi = solve_poisson(&d.enlarged().unwrap(), &Poly::x(), &MfsOptions::default()).unwrap();
        let sol = solve_stokes_bvp(&d, |p| phi.gradient(p), &StokesOptions::default()).unwrap();
        assert!(sol.residual.max <= 1e-6, "{:?}", sol.residual);
        for j in evaluate_solution(&sol, &samples(), 3).unwrap() {
            let div = divergence(&j.velocity).unwrap();
            assert!(div.value().abs() <= 1e-12, "div {}", div.value());
            for axis in Axis::BOTH {
                let m = -j.velocity[axis.index()].laplacian().unwrap().value() + j.pressure.diff(axis).unwrap().value();
                assert!(m.abs() <= 1e-10, "momentum {m}");
            }
        }
        let vol = d.volume_quadrature(16, 64).unwrap();
        let mean = vol.integrate_fn(|p| sol.pressure_at(p).unwrap());
        assert!(mean.abs() <= 1e-10);
    }
}
