//! Star-shaped analytic domains described by a polynomial defining function.
//!
//! A domain is the component of `{ρ > 0}` containing a declared center. Every
//! ray from the center crosses `{ρ = 0}` exactly once, so the boundary is the
//! graph of a radius function `R(θ)`; boundary and volume quadratures are
//! built on that parametrisation.

use std::f64::consts::PI;
use std::num::NonZeroUsize;

use gauss_quad::legendre::GaussLegendre;
use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::poly::Poly;
use crate::Point;

/// Threshold on `|∇ρ|` along the traced boundary.
pub const MIN_BOUNDARY_GRADIENT: f64 = 1e-6;
/// Default dilation factor for the enlarged domain.
pub const DEFAULT_ENLARGEMENT: f64 = 1.2;

const VALIDATION_RAYS: usize = 256;
const VALIDATION_SAMPLES: usize = 1000;
/// Smallest admissible cosine between a ray and the outward normal where it exits.
const MIN_EXIT_COSINE: f64 = 1e-3;
const DENSE_TRACE: usize = 512;

/// Named or raw domain description, as read from configuration.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum DomainSpec {
    Disk,
    Ellipse {
        a: f64,
        b: f64,
    },
    PerturbedDisk {
        amplitude: f64,
        k: u32,
    },
    /// Raw coefficients `[i, j, c]` for `c x^i y^j`.
    Polynomial {
        terms: Vec<(usize, usize, f64)>,
        center: Point,
    },
}

impl DomainSpec {
    pub fn defining_poly(&self) -> Result<(Poly, Point)> {
        let origin = [0.0, 0.0];
        match *self {
            DomainSpec::Disk => Ok((
                Poly::from_terms([(0, 0, 0.5), (2, 0, -0.5), (0, 2, -0.5)]),
                origin,
            )),
            DomainSpec::Ellipse { a, b } => {
                if !(a > 0.0 && b > 0.0) {
                    return Err(Error::InvalidInput(format!("ellipse semi-axes {a}, {b}")));
                }
                Ok((
                    Poly::from_terms([
                        (0, 0, 0.5),
                        (2, 0, -0.5 / (a * a)),
                        (0, 2, -0.5 / (b * b)),
                    ]),
                    origin,
                ))
            }
            DomainSpec::PerturbedDisk { amplitude, k } => {
                // 1 - x² - y² + a·Re((x + iy)^k)
                let base = Poly::from_terms([(0, 0, 1.0), (2, 0, -1.0), (0, 2, -1.0)]);
                Ok((&base + &re_power(k as usize).scale(amplitude), origin))
            }
            DomainSpec::Polynomial { ref terms, center } => {
                Ok((Poly::from_terms(terms.iter().copied()), center))
            }
        }
    }
}

/// `Re((x + iy)^k)` as a polynomial.
pub fn re_power(k: usize) -> Poly {
    let terms = (0..=k).step_by(2).map(|b| {
        let sign = if (b / 2) % 2 == 0 { 1.0 } else { -1.0 };
        (k - b, b, sign * binomial(k, b))
    });
    Poly::from_terms(terms)
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, t| acc * (n - t) as f64 / (t + 1) as f64).round()
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AnalyticDomain {
    defining_poly: Poly,
    gradient: [Poly; 2],
    center: Point,
    collar_width: f64,
    enlargement_scale: f64,
    circumradius: f64,
    inradius: f64,
    dense_boundary: Vec<Point>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum QuadratureKind {
    Volume,
    Boundary,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct QuadratureSet {
    pub points: Vec<Point>,
    pub weights: Vec<f64>,
    pub kind: QuadratureKind,
    /// Outward unit normals; boundary sets only.
    pub normals: Vec<Point>,
}

impl QuadratureSet {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn integrate(&self, values: &[f64]) -> Result<f64> {
        self.check_len(values)?;
        Ok(self.weights.iter().zip(values).map(|(w, v)| w * v).sum())
    }

    pub fn integrate_fn(&self, f: impl Fn(Point) -> f64) -> f64 {
        self.points.iter().zip(&self.weights).map(|(&p, w)| w * f(p)).sum()
    }

    fn check_len(&self, values: &[f64]) -> Result<()> {
        if self.is_empty() {
            return Err(Error::EmptyQuadrature);
        }
        if values.len() != self.len() {
            return Err(Error::LengthMismatch {
                values: values.len(),
                points: self.len(),
            });
        }
        Ok(())
    }
}

/// Discrete L² norm `sqrt(Σ wᵢ vᵢ²)`.
pub fn l2_norm(values: &[f64], quad: &QuadratureSet) -> Result<f64> {
    quad.check_len(values)?;
    Ok(quad
        .weights
        .iter()
        .zip(values)
        .map(|(w, v)| w * v * v)
        .sum::<f64>()
        .sqrt())
}

/// Vector-valued L² norm: the sum of the component norms.
pub fn l2_norm_vector(components: &[Vec<f64>], quad: &QuadratureSet) -> Result<f64> {
    components.iter().map(|c| l2_norm(c, quad)).sum()
}

impl AnalyticDomain {
    pub fn new(spec: &DomainSpec) -> Result<Self> {
        let (poly, center) = spec.defining_poly()?;
        Self::from_poly(poly, center)
    }

    /// Validates `ρ` and `center` and builds the domain.
    pub fn from_poly(defining_poly: Poly, center: Point) -> Result<Self> {
        let defining_poly = defining_poly.trimmed();
        let rho0 = defining_poly.eval(center);
        if !(rho0 > 0.0) {
            return Err(Error::NotStarShaped(format!(
                "defining function is {rho0:e} at the center"
            )));
        }
        let gradient = defining_poly.gradient();
        let mut dom = Self {
            defining_poly,
            gradient,
            center,
            collar_width: 0.0,
            enlargement_scale: DEFAULT_ENLARGEMENT,
            circumradius: 0.0,
            inradius: 0.0,
            dense_boundary: Vec::new(),
        };

        // The domain is the component of {ρ > 0} containing the center. It is
        // star-shaped exactly when the first-exit radius R(θ) is continuous,
        // which follows from transversal exits: e·∇ρ < 0 at every R(θ).
        let far = dom.far_radius()?;
        let h = 2.0 * far / VALIDATION_SAMPLES as f64;
        let mut circ: f64 = 0.0;
        for k in 0..VALIDATION_RAYS {
            let theta = ray_angle(k, VALIDATION_RAYS);
            let e = [theta.cos(), theta.sin()];
            let hit = (1..=VALIDATION_SAMPLES)
                .map(|s| s as f64 * h)
                .find(|&r| dom.along(e, r) <= 0.0)
                .ok_or(Error::RootFindFailure { angle: theta })?;
            circ = circ.max(hit);
        }
        dom.circumradius = circ;

        let radii = dom.trace_radii(DENSE_TRACE)?;
        dom.circumradius = radii.iter().cloned().fold(0.0, f64::max);
        dom.inradius = radii.iter().cloned().fold(f64::INFINITY, f64::min);
        dom.dense_boundary = radii
            .iter()
            .enumerate()
            .map(|(k, &r)| dom.ray_point(ray_angle(k, DENSE_TRACE), r))
            .collect();
        let mut min_cos = f64::INFINITY;
        for (k, &p) in dom.dense_boundary.iter().enumerate() {
            let g = dom.grad_rho(p);
            let norm = g[0].hypot(g[1]);
            if norm < MIN_BOUNDARY_GRADIENT {
                return Err(Error::DegenerateBoundary {
                    grad: norm,
                    x: p[0],
                    y: p[1],
                });
            }
            let theta = ray_angle(k, DENSE_TRACE);
            let cos = -(theta.cos() * g[0] + theta.sin() * g[1]) / norm;
            if cos < MIN_EXIT_COSINE {
                return Err(Error::NotStarShaped(format!(
                    "boundary is not transversal to the ray at angle {theta:.4}"
                )));
            }
            min_cos = min_cos.min(cos);
        }
        // Transversality bounds |R'| by R·tan(angle); a larger jump between
        // neighbouring rays means a ray left through a tangency we stepped over.
        let dtheta = 2.0 * PI / DENSE_TRACE as f64;
        let max_jump = 2.0 * dtheta * dom.circumradius * (1.0 - min_cos * min_cos).sqrt() / min_cos
            + 1e-9 * dom.circumradius;
        for k in 0..DENSE_TRACE {
            let jump = (radii[(k + 1) % DENSE_TRACE] - radii[k]).abs();
            if jump > max_jump {
                return Err(Error::NotStarShaped(format!(
                    "exit radius jumps by {jump:.3e} near angle {:.4}",
                    ray_angle(k, DENSE_TRACE)
                )));
            }
        }
        dom.collar_width = 0.1 * dom.inradius;
        Ok(dom)
    }

    pub fn with_enlargement(mut self, s: f64) -> Result<Self> {
        if !(s >= 1.0) {
            return Err(Error::InvalidInput(format!("enlargement scale {s} < 1")));
        }
        self.enlargement_scale = s;
        Ok(self)
    }

    pub fn with_collar_width(mut self, width: f64) -> Result<Self> {
        if !(width > 0.0) {
            return Err(Error::InvalidInput(format!("collar width {width}")));
        }
        self.collar_width = width;
        Ok(self)
    }

    pub fn defining_poly(&self) -> &Poly {
        &self.defining_poly
    }

    pub fn gradient_poly(&self) -> &[Poly; 2] {
        &self.gradient
    }

    pub fn center(&self) -> Point {
        self.center
    }

    pub fn collar_width(&self) -> f64 {
        self.collar_width
    }

    pub fn enlargement_scale(&self) -> f64 {
        self.enlargement_scale
    }

    pub fn circumradius(&self) -> f64 {
        self.circumradius
    }

    pub fn inradius(&self) -> f64 {
        self.inradius
    }

    pub fn rho(&self, p: Point) -> f64 {
        self.defining_poly.eval(p)
    }

    pub fn grad_rho(&self, p: Point) -> Point {
        [self.gradient[0].eval(p), self.gradient[1].eval(p)]
    }

    pub fn contains(&self, p: Point) -> bool {
        let d = [p[0] - self.center[0], p[1] - self.center[1]];
        let r = d[0].hypot(d[1]);
        if r == 0.0 {
            return true;
        }
        match self.boundary_radius(d[1].atan2(d[0])) {
            Ok(rb) => r < rb,
            Err(_) => false,
        }
    }

    /// Approximate distance to the boundary from a dense trace.
    pub fn distance_to_boundary(&self, p: Point) -> f64 {
        self.dense_boundary
            .iter()
            .map(|q| (p[0] - q[0]).hypot(p[1] - q[1]))
            .fold(f64::INFINITY, f64::min)
    }

    /// `Ω^{δ₀}`: interior points at least one collar width from the boundary.
    pub fn in_interior_core(&self, p: Point) -> bool {
        self.contains(p) && self.distance_to_boundary(p) >= self.collar_width
    }

    /// The enlarged domain `s·Ω` dilated about the center.
    pub fn enlarged(&self) -> Result<AnalyticDomain> {
        self.dilated(self.enlargement_scale)
    }

    pub fn dilated(&self, s: f64) -> Result<AnalyticDomain> {
        if !(s > 0.0) {
            return Err(Error::InvalidInput(format!("dilation {s}")));
        }
        let [cx, cy] = self.center;
        let sx = &Poly::x().scale(1.0 / s) + &Poly::constant(cx * (1.0 - 1.0 / s));
        let sy = &Poly::y().scale(1.0 / s) + &Poly::constant(cy * (1.0 - 1.0 / s));
        let poly = self.defining_poly.compose(&sx, &sy);
        let mut dom = AnalyticDomain::from_poly(poly, self.center)?;
        dom.enlargement_scale = 1.0;
        Ok(dom)
    }

    fn along(&self, e: Point, r: f64) -> f64 {
        self.rho([self.center[0] + r * e[0], self.center[1] + r * e[1]])
    }

    fn ray_point(&self, theta: f64, r: f64) -> Point {
        [
            self.center[0] + r * theta.cos(),
            self.center[1] + r * theta.sin(),
        ]
    }

    fn far_radius(&self) -> Result<f64> {
        let mut r = 0.25;
        while r < 1e6 {
            let all_negative = (0..64).all(|k| {
                let theta = 2.0 * PI * k as f64 / 64.0;
                let e = [theta.cos(), theta.sin()];
                self.along(e, r) < 0.0
            });
            if all_negative {
                return Ok(r);
            }
            r *= 2.0;
        }
        Err(Error::NotStarShaped("defining function does not turn negative".into()))
    }

    /// First exit radius along angle `theta`: a march in steps of
    /// `circumradius / 64` brackets the exit, then bisection and a Newton polish.
    pub fn boundary_radius(&self, theta: f64) -> Result<f64> {
        let e = [theta.cos(), theta.sin()];
        let step = self.circumradius / 64.0;
        let mut lo = 0.0;
        let mut hi = step;
        while self.along(e, hi) > 0.0 {
            lo = hi;
            hi += step;
            if hi > 4.0 * self.circumradius {
                return Err(Error::RootFindFailure { angle: theta });
            }
        }
        while hi - lo > 1e-10 * self.circumradius {
            let mid = 0.5 * (lo + hi);
            if self.along(e, mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let bracket = (lo, hi);
        let mut r = 0.5 * (lo + hi);
        for _ in 0..20 {
            let p = self.ray_point(theta, r);
            let g = self.grad_rho(p);
            let slope = g[0] * e[0] + g[1] * e[1];
            if slope == 0.0 {
                break;
            }
            let step = self.rho(p) / slope;
            r -= step;
            if step.abs() <= 1e-14 * r.max(1.0) {
                break;
            }
        }
        // A flat root can throw Newton off; the bisection midpoint is still
        // accurate to the bracket width.
        let tol = 1e-9 * self.circumradius;
        if !(r.is_finite() && r > bracket.0 - tol && r < bracket.1 + tol) {
            r = 0.5 * (bracket.0 + bracket.1);
        }
        Ok(r)
    }

    fn trace_radii(&self, n: usize) -> Result<Vec<f64>> {
        (0..n).map(|k| self.boundary_radius(ray_angle(k, n))).collect()
    }

    /// `n` boundary nodes on equi-angular rays with spectral arclength weights.
    pub fn boundary_trace(&self, n: usize) -> Result<QuadratureSet> {
        if n < 16 {
            return Err(Error::InvalidInput(format!("boundary trace needs n >= 16, got {n}")));
        }
        let radii = self.trace_radii(n)?;
        let dr = spectral_derivative(&radii);
        let h = 2.0 * PI / n as f64;
        let mut points = Vec::with_capacity(n);
        let mut weights = Vec::with_capacity(n);
        let mut normals = Vec::with_capacity(n);
        for k in 0..n {
            let p = self.ray_point(ray_angle(k, n), radii[k]);
            let g = self.grad_rho(p);
            let gn = g[0].hypot(g[1]);
            if gn < MIN_BOUNDARY_GRADIENT {
                return Err(Error::DegenerateBoundary {
                    grad: gn,
                    x: p[0],
                    y: p[1],
                });
            }
            points.push(p);
            weights.push(h * radii[k].hypot(dr[k]));
            normals.push([-g[0] / gn, -g[1] / gn]);
        }
        Ok(QuadratureSet {
            points,
            weights,
            kind: QuadratureKind::Boundary,
            normals,
        })
    }

    /// Polar tensor rule: trapezoid in angle, Gauss–Legendre in radius on
    /// `[0, R(θ)]` with the `r dr dθ` Jacobian.
    pub fn volume_quadrature(&self, n_radial: usize, n_angular: usize) -> Result<QuadratureSet> {
        if n_radial < 8 || n_angular < 8 {
            return Err(Error::InvalidInput(format!(
                "volume quadrature needs counts >= 8, got {n_radial} x {n_angular}"
            )));
        }
        let rule = GaussLegendre::new(NonZeroUsize::new(n_radial).expect("nonzero"));
        let nodes = rule.as_node_weight_pairs();
        let radii = self.trace_radii(n_angular)?;
        let h = 2.0 * PI / n_angular as f64;
        let mut points = Vec::with_capacity(n_radial * n_angular);
        let mut weights = Vec::with_capacity(n_radial * n_angular);
        for (k, &big_r) in radii.iter().enumerate() {
            let theta = ray_angle(k, n_angular);
            for &(xi, w) in nodes {
                let r = 0.5 * big_r * (xi + 1.0);
                points.push(self.ray_point(theta, r));
                weights.push(h * w * 0.5 * big_r * r);
            }
        }
        Ok(QuadratureSet {
            points,
            weights,
            kind: QuadratureKind::Volume,
            normals: Vec::new(),
        })
    }
}

fn ray_angle(k: usize, n: usize) -> f64 {
    2.0 * PI * k as f64 / n as f64
}

/// Derivative of a periodic sample sequence on `[0, 2π)` via FFT.
fn spectral_derivative(samples: &[f64]) -> Vec<f64> {
    let n = samples.len();
    let mut planner = FftPlanner::<f64>::new();
    let mut buf: Vec<Complex<f64>> = samples.iter().map(|&v| Complex::new(v, 0.0)).collect();
    planner.plan_fft_forward(n).process(&mut buf);
    for (k, c) in buf.iter_mut().enumerate() {
        let wave = if 2 * k < n {
            k as f64
        } else if 2 * k == n {
            0.0
        } else {
            k as f64 - n as f64
        };
        *c *= Complex::new(0.0, wave);
    }
    planner.plan_fft_inverse(n).process(&mut buf);
    buf.iter().map(|c| c.re / n as f64).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn disk() -> AnalyticDomain {
        AnalyticDomain::new(&DomainSpec::Disk).unwrap()
    }

    /// ∫ over the unit disk of x^a y^b.
    fn disk_moment(a: usize, b: usize) -> f64 {
        if a % 2 == 1 || b % 2 == 1 {
            return 0.0;
        }
        // ∫_0^{2π} cos^a sin^b dθ · 1/(a+b+2)
        let gamma_half = |n: usize| -> f64 {
            // Γ(n/2) for positive integer n
            if n % 2 == 0 {
                (1..n / 2).fold(1.0, |acc, k| acc * k as f64)
            } else {
                let mut g = PI.sqrt();
                let mut x = 0.5;
                while x < n as f64 / 2.0 - 0.25 {
                    g *= x;
                    x += 1.0;
                }
                g
            }
        };
        let ang = 2.0 * gamma_half(a + 1) * gamma_half(b + 1) / gamma_half(a + b + 2);
        ang / (a + b + 2) as f64
    }

    #[test]
    fn named_defining_functions() {
        let (p, c) = DomainSpec::Disk.defining_poly().unwrap();
        assert_eq!(c, [0.0, 0.0]);
        assert_eq!(p.coeff(0, 0), 0.5);
        assert_eq!(p.coeff(2, 0), -0.5);
        let (p, _) = DomainSpec::Ellipse { a: 2.0, b: 1.0 }.defining_poly().unwrap();
        assert_eq!(p.coeff(2, 0), -0.125);
        assert_eq!(p.coeff(0, 2), -0.5);
        let (p, _) = DomainSpec::PerturbedDisk {
            amplitude: 0.1,
            k: 3,
        }
        .defining_poly()
        .unwrap();
        assert_abs_diff_eq!(p.coeff(3, 0), 0.1);
        assert_abs_diff_eq!(p.coeff(1, 2), -0.3);
        assert_eq!(p.coeff(0, 0), 1.0);
    }

    #[test]
    fn perturbed_disk_validates_against_dense_sampling() {
        let dom = AnalyticDomain::new(&DomainSpec::PerturbedDisk {
            amplitude: 0.1,
            k: 3,
        })
        .unwrap();
        // Oracle: 100 x 100 grid on the box; gradient of rho stays away from
        // zero wherever |rho| is small, and each of 100 rays crosses once.
        let rho = dom.defining_poly();
        let g = dom.gradient_poly();
        let mut min_grad_near_boundary = f64::INFINITY;
        for i in 0..100 {
            for j in 0..100 {
                let p = [-1.5 + 3.0 * i as f64 / 99.0, -1.5 + 3.0 * j as f64 / 99.0];
                if rho.eval(p).abs() < 0.05 {
                    min_grad_near_boundary =
                        min_grad_near_boundary.min(g[0].eval(p).hypot(g[1].eval(p)));
                }
            }
        }
        assert!(min_grad_near_boundary > 0.5);
        for k in 0..100 {
            let t = 2.0 * PI * k as f64 / 100.0;
            let mut changes = 0;
            let mut prev = rho.eval([0.0, 0.0]);
            for s in 1..=100 {
                let r = 3.0 * s as f64 / 100.0;
                let cur = rho.eval([r * t.cos(), r * t.sin()]);
                if (prev > 0.0) != (cur > 0.0) {
                    changes += 1;
                }
                prev = cur;
            }
            assert_eq!(changes, 1);
        }
    }

    #[test]
    fn rejects_non_star_shaped() {
        // Annulus-like level set: rho = (x²+y²-0.25)(1-x²-y²) is negative at the center.
        let ring = Poly::from_terms([(0, 0, -0.25), (2, 0, 1.25), (0, 2, 1.25), (4, 0, -1.0), (0, 4, -1.0), (2, 2, -2.0)]);
        assert!(matches!(
            AnalyticDomain::from_poly(ring, [0.0, 0.0]),
            Err(Error::NotStarShaped(_))
        ));
        // Dumbbell: rho = 1.2 - (x² - 1)² - y² seen from the center of one bulb;
        // rays toward the far bulb leave through the neck and re-enter.
        let dumbbell = Poly::from_terms([(0, 0, 0.2), (2, 0, 2.0), (4, 0, -1.0), (0, 2, -1.0)]);
        assert!(matches!(
            AnalyticDomain::from_poly(dumbbell, [1.0, 0.0]),
            Err(Error::NotStarShaped(_))
        ));
    }

    #[test]
    fn separate_component_is_ignored() {
        // rho = 0.1 - (x² - 1)² - y² has two lobes; the one around (1, 0) is
        // convex and the other is a different component.
        let lobes = Poly::from_terms([(0, 0, -0.9), (2, 0, 2.0), (4, 0, -1.0), (0, 2, -1.0)]);
        let dom = AnalyticDomain::from_poly(lobes, [1.0, 0.0]).unwrap();
        assert!(dom.contains([1.1, 0.0]));
        assert!(!dom.contains([-1.0, 0.0]));
        assert_abs_diff_eq!(dom.circumradius(), 0.1f64.sqrt(), epsilon = 1e-9);
    }

    #[test]
    fn rejects_degenerate_boundary() {
        // rho = (1 - x² - y²)³ has vanishing gradient on its zero set.
        let base = Poly::from_terms([(0, 0, 1.0), (2, 0, -1.0), (0, 2, -1.0)]);
        assert!(matches!(
            AnalyticDomain::from_poly(base.pow(3), [0.0, 0.0]),
            Err(Error::DegenerateBoundary { .. })
        ));
    }

    #[test]
    fn disk_boundary_trace() {
        let q = disk().boundary_trace(64).unwrap();
        for p in &q.points {
            assert_abs_diff_eq!(p[0] * p[0] + p[1] * p[1], 1.0, epsilon = 1e-12);
        }
        assert_abs_diff_eq!(q.weights.iter().sum::<f64>(), 2.0 * PI, epsilon = 1e-10);
        assert!(disk().boundary_trace(8).is_err());
    }

    #[test]
    fn ellipse_perimeter() {
        // Oracle: adaptive Simpson on the arclength integrand sqrt(4 sin² + cos²).
        fn simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64, depth: u32) -> f64 {
            let m = 0.5 * (a + b);
            let whole = (b - a) / 6.0 * (f(a) + 4.0 * f(m) + f(b));
            let left = (m - a) / 6.0 * (f(a) + 4.0 * f(0.5 * (a + m)) + f(m));
            let right = (b - m) / 6.0 * (f(m) + 4.0 * f(0.5 * (m + b)) + f(b));
            if depth == 0 || (left + right - whole).abs() < 15.0 * tol {
                left + right + (left + right - whole) / 15.0
            } else {
                simpson(f, a, m, tol / 2.0, depth - 1) + simpson(f, m, b, tol / 2.0, depth - 1)
            }
        }
        let integrand = |t: f64| (4.0 * t.sin().powi(2) + t.cos().powi(2)).sqrt();
        let oracle = simpson(&integrand, 0.0, 2.0 * PI, 1e-13, 40);
        assert_abs_diff_eq!(oracle, 9.688448, epsilon = 1e-6);
        let dom = AnalyticDomain::new(&DomainSpec::Ellipse { a: 2.0, b: 1.0 }).unwrap();
        let q = dom.boundary_trace(128).unwrap();
        assert_abs_diff_eq!(q.weights.iter().sum::<f64>(), oracle, epsilon = 1e-10);
        for p in &q.points {
            assert!(dom.rho(*p).abs() <= 1e-10);
        }
    }

    #[test]
    fn disk_volume_moments() {
        let q = disk().volume_quadrature(16, 32).unwrap();
        assert_abs_diff_eq!(q.integrate_fn(|_| 1.0), PI, epsilon = 1e-12);
        assert_abs_diff_eq!(q.integrate_fn(|p| p[0]), 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(q.integrate_fn(|p| p[0] * p[0]), PI / 4.0, epsilon = 1e-10);
        assert!(disk().volume_quadrature(4, 32).is_err());
    }

    #[test]
    fn quadrature_exact_for_degree_ten_monomials() {
        let ellipse = AnalyticDomain::new(&DomainSpec::Ellipse { a: 2.0, b: 1.0 }).unwrap();
        let qd = disk().volume_quadrature(12, 48).unwrap();
        let qe = ellipse.volume_quadrature(12, 96).unwrap();
        for d in 0..=10 {
            for b in 0..=d {
                let a = d - b;
                let f = |p: Point| p[0].powi(a as i32) * p[1].powi(b as i32);
                assert_abs_diff_eq!(qd.integrate_fn(f), disk_moment(a, b), epsilon = 1e-9);
                // x = 2X, y = Y maps the unit disk onto the ellipse.
                let want = 2f64.powi(a as i32 + 1) * disk_moment(a, b);
                assert_abs_diff_eq!(qe.integrate_fn(f), want, epsilon = 1e-9);
            }
        }
    }

    #[test]
    fn norms() {
        let q = disk().volume_quadrature(12, 32).unwrap();
        let ones = vec![1.0; q.len()];
        assert_abs_diff_eq!(l2_norm(&ones, &q).unwrap(), PI.sqrt(), epsilon = 1e-12);
        let xs: Vec<f64> = q.points.iter().map(|p| p[0]).collect();
        assert_abs_diff_eq!(l2_norm(&xs, &q).unwrap(), (PI / 4.0).sqrt(), epsilon = 1e-12);
        assert_abs_diff_eq!(
            l2_norm_vector(&[ones.clone(), xs], &q).unwrap(),
            PI.sqrt() + (PI / 4.0).sqrt(),
            epsilon = 1e-12
        );
        assert!(matches!(
            l2_norm(&ones[1..], &q),
            Err(Error::LengthMismatch { .. })
        ));
        let empty = QuadratureSet {
            points: vec![],
            weights: vec![],
            kind: QuadratureKind::Volume,
            normals: vec![],
        };
        assert_eq!(l2_norm(&[], &empty), Err(Error::EmptyQuadrature));
    }

    #[test]
    fn enlarged_domain_contains_closure() {
        for spec in [
            DomainSpec::Disk,
            DomainSpec::Ellipse { a: 2.0, b: 1.0 },
            DomainSpec::PerturbedDisk {
                amplitude: 0.1,
                k: 3,
            },
        ] {
            let dom = AnalyticDomain::new(&spec).unwrap();
            let big = dom.enlarged().unwrap();
            assert_abs_diff_eq!(big.circumradius(), 1.2 * dom.circumradius(), epsilon = 1e-9);
            let q = dom.boundary_trace(128).unwrap();
            let min = q.points.iter().map(|&p| big.rho(p)).fold(f64::INFINITY, f64::min);
            assert!(min > 0.0);
        }
    }

    #[test]
    fn trace_wraps_periodically() {
        let dom = AnalyticDomain::new(&DomainSpec::PerturbedDisk {
            amplitude: 0.1,
            k: 3,
        })
        .unwrap();
        let a = dom.boundary_radius(0.0).unwrap();
        let b = dom.boundary_radius(2.0 * PI).unwrap();
        assert_abs_diff_eq!(a, b, epsilon = 1e-12);
    }
}
