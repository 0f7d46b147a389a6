//! Truncated bivariate Taylor jets.
//!
//! A [`Jet`] of order `m` at base point `p` holds the scaled Taylor
//! coefficients `∂ₓᵃ∂ᵧᵇu(p) / (a! b!)` for every `a + b <= m`. Products are
//! truncated Cauchy products, so every closed-form object in the crate
//! (polynomials, fundamental-solution kernels, field coefficients) carries
//! exact derivatives of any order up to round-off.

use nalgebra::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::poly::{binomial, degree_block, tri_index, tri_len};
use crate::Point;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Axis {
    X,
    Y,
}

impl Axis {
    pub const BOTH: [Axis; 2] = [Axis::X, Axis::Y];

    pub fn index(self) -> usize {
        match self {
            Axis::X => 0,
            Axis::Y => 1,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Jet {
    base: Point,
    order: usize,
    coeffs: Vec<f64>,
}

fn factorial(n: usize) -> f64 {
    (1..=n).fold(1.0, |acc, k| acc * k as f64)
}

impl Jet {
    pub fn zero(base: Point, order: usize) -> Self {
        Self {
            base,
            order,
            coeffs: vec![0.0; tri_len(order)],
        }
    }

    pub fn constant(base: Point, order: usize, value: f64) -> Self {
        let mut j = Self::zero(base, order);
        j.coeffs[0] = value;
        j
    }

    /// The coordinate function `x` or `y` expanded at `base`.
    pub fn coordinate(base: Point, order: usize, axis: Axis) -> Self {
        let mut j = Self::constant(base, order, base[axis.index()]);
        if order >= 1 {
            match axis {
                Axis::X => j.coeffs[tri_index(1, 0)] = 1.0,
                Axis::Y => j.coeffs[tri_index(0, 1)] = 1.0,
            }
        }
        j
    }

    pub fn from_coeffs(base: Point, order: usize, coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.len() != tri_len(order) {
            return Err(Error::LengthMismatch {
                values: coeffs.len(),
                points: tri_len(order),
            });
        }
        Ok(Self {
            base,
            order,
            coeffs,
        })
    }

    pub fn base(&self) -> Point {
        self.base
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn value(&self) -> f64 {
        self.coeffs[0]
    }

    /// Scaled coefficient of `Δx^a Δy^b`; zero beyond the truncation order.
    pub fn coeff(&self, a: usize, b: usize) -> f64 {
        if a + b > self.order {
            0.0
        } else {
            self.coeffs[tri_index(a, b)]
        }
    }

    /// The partial derivative `∂ₓᵃ∂ᵧᵇu` at the base point.
    pub fn derivative(&self, a: usize, b: usize) -> f64 {
        self.coeff(a, b) * factorial(a) * factorial(b)
    }

    /// All derivatives of total degree `d`, ordered by increasing `y` power.
    pub fn derivatives_of_degree(&self, d: usize) -> Vec<f64> {
        degree_block(d).map(|(a, b)| self.derivative(a, b)).collect()
    }

    /// Evaluates the Taylor polynomial at `base + h`.
    pub fn eval_offset(&self, h: [f64; 2]) -> f64 {
        let mut acc = 0.0;
        // Horner over degree blocks is awkward; offsets are small so direct powers are fine.
        for d in (0..=self.order).rev() {
            let mut block = 0.0;
            for (a, b) in degree_block(d) {
                block += self.coeffs[tri_index(a, b)] * h[0].powi(a as i32) * h[1].powi(b as i32);
            }
            acc += block;
        }
        acc
    }

    fn check_compatible(&self, other: &Jet) -> Result<()> {
        if self.base != other.base {
            return Err(Error::BasePointMismatch);
        }
        if self.order != other.order {
            return Err(Error::OrderMismatch(self.order, other.order));
        }
        Ok(())
    }

    pub fn try_add(&self, other: &Jet) -> Result<Jet> {
        self.check_compatible(other)?;
        Ok(self.zip_with(other, |a, b| a + b))
    }

    pub fn try_sub(&self, other: &Jet) -> Result<Jet> {
        self.check_compatible(other)?;
        Ok(self.zip_with(other, |a, b| a - b))
    }

    pub fn try_mul(&self, other: &Jet) -> Result<Jet> {
        self.check_compatible(other)?;
        Ok(mul_at_order(self, other, self.order))
    }

    fn zip_with(&self, other: &Jet, f: impl Fn(f64, f64) -> f64) -> Jet {
        Jet {
            base: self.base,
            order: self.order,
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        }
    }

    pub fn scale(&self, s: f64) -> Jet {
        Jet {
            base: self.base,
            order: self.order,
            coeffs: self.coeffs.iter().map(|c| c * s).collect(),
        }
    }

    pub fn add_scalar(&self, s: f64) -> Jet {
        let mut j = self.clone();
        j.coeffs[0] += s;
        j
    }

    /// `self += s * other`, truncating `other` to `self`'s order.
    pub(crate) fn axpy(&mut self, s: f64, other: &Jet) {
        debug_assert!(other.order >= self.order);
        debug_assert_eq!(self.base, other.base);
        for (c, o) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *c += s * o;
        }
    }

    /// Drops all coefficients above `order`.
    pub fn truncate(&self, order: usize) -> Result<Jet> {
        if order > self.order {
            return Err(Error::OrderMismatch(self.order, order));
        }
        Ok(Jet {
            base: self.base,
            order,
            coeffs: self.coeffs[..tri_len(order)].to_vec(),
        })
    }

    pub fn diff(&self, axis: Axis) -> Result<Jet> {
        if self.order == 0 {
            return Err(Error::OrderExhausted);
        }
        let order = self.order - 1;
        let mut coeffs = vec![0.0; tri_len(order)];
        for d in 0..=order {
            for (a, b) in degree_block(d) {
                coeffs[tri_index(a, b)] = match axis {
                    Axis::X => (a + 1) as f64 * self.coeffs[tri_index(a + 1, b)],
                    Axis::Y => (b + 1) as f64 * self.coeffs[tri_index(a, b + 1)],
                };
            }
        }
        Ok(Jet {
            base: self.base,
            order,
            coeffs,
        })
    }

    pub fn gradient(&self) -> Result<[Jet; 2]> {
        Ok([self.diff(Axis::X)?, self.diff(Axis::Y)?])
    }

    /// Laplacian jet, two orders lower.
    pub fn laplacian(&self) -> Result<Jet> {
        let xx = self.diff(Axis::X)?.diff(Axis::X)?;
        let yy = self.diff(Axis::Y)?.diff(Axis::Y)?;
        xx.try_add(&yy)
    }

    /// Composes a univariate series with this jet.
    ///
    /// `outer[k]` is the k-th Taylor coefficient of the outer function about
    /// `self.value()`; the result is `Σ outer[k] (self - self.value())^k`.
    pub fn compose_series(&self, outer: &[f64]) -> Result<Jet> {
        if outer.len() <= self.order {
            return Err(Error::SeriesTooShort {
                have: outer.len(),
                need: self.order + 1,
            });
        }
        let mut t = self.clone();
        t.coeffs[0] = 0.0;
        let mut acc = Jet::constant(self.base, self.order, outer[self.order]);
        for k in (0..self.order).rev() {
            acc = mul_at_order(&acc, &t, self.order);
            acc.coeffs[0] += outer[k];
        }
        Ok(acc)
    }

    pub fn recip(&self) -> Result<Jet> {
        let c0 = self.value();
        if c0 == 0.0 || !c0.is_finite() {
            return Err(Error::OutsideConvergence(c0));
        }
        let inv = 1.0 / c0;
        let mut outer = Vec::with_capacity(self.order + 1);
        let mut g = inv;
        for _ in 0..=self.order {
            outer.push(g);
            g *= -inv;
        }
        self.compose_series(&outer)
    }

    pub fn ln(&self) -> Result<Jet> {
        let c0 = self.value();
        if c0 <= 0.0 || !c0.is_finite() {
            return Err(Error::OutsideConvergence(c0));
        }
        let inv = 1.0 / c0;
        let mut outer = Vec::with_capacity(self.order + 1);
        outer.push(c0.ln());
        let mut pw = 1.0;
        for k in 1..=self.order {
            pw *= inv;
            let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
            outer.push(sign * pw / k as f64);
        }
        self.compose_series(&outer)
    }

    pub fn sqrt(&self) -> Result<Jet> {
        let c0 = self.value();
        if c0 <= 0.0 || !c0.is_finite() {
            return Err(Error::OutsideConvergence(c0));
        }
        let mut outer = Vec::with_capacity(self.order + 1);
        // binom(1/2, k) c0^(1/2 - k)
        let mut g = c0.sqrt();
        for k in 0..=self.order {
            outer.push(g);
            g *= (0.5 - k as f64) / ((k + 1) as f64 * c0);
        }
        self.compose_series(&outer)
    }

    /// Maximum absolute coefficient; handy for tolerance checks.
    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |m, c| m.max(c.abs()))
    }
}

/// Truncated product at `order`, which may be below either operand's order.
pub(crate) fn mul_at_order(lhs: &Jet, rhs: &Jet, order: usize) -> Jet {
    debug_assert!(order <= lhs.order && order <= rhs.order);
    let mut out = vec![0.0; tri_len(order)];
    for d1 in 0..=order {
        let off1 = d1 * (d1 + 1) / 2;
        for b1 in 0..=d1 {
            let c1 = lhs.coeffs[off1 + b1];
            if c1 == 0.0 {
                continue;
            }
            for d2 in 0..=(order - d1) {
                let off2 = d2 * (d2 + 1) / 2;
                let d = d1 + d2;
                let off = d * (d + 1) / 2 + b1;
                let src = &rhs.coeffs[off2..=off2 + d2];
                let dst = &mut out[off..=off + d2];
                for (o, s) in dst.iter_mut().zip(src) {
                    *o += c1 * s;
                }
            }
        }
    }
    Jet {
        base: lhs.base,
        order,
        coeffs: out,
    }
}

/// Fundamental-solution kernels available as jets in the target variable.
///
/// With `r = x - s`:
/// - `LogCharge`: `log|r|`
/// - `StokesletVelocity(i, j)`: `G_ij = -δ_ij log|r| + r_i r_j / |r|²`
/// - `StokesletPressure(j)`: `P_j = 2 r_j / |r|²`
///
/// These satisfy `-ΔG_{·j} + ∇P_j = 0` and `div G_{·j} = 0` off the source.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum KernelId {
    LogCharge,
    StokesletVelocity(Axis, Axis),
    StokesletPressure(Axis),
}

/// Shared building blocks for all kernels at one (source, target) pair.
#[derive(Clone, Debug)]
pub struct KernelParts {
    pub r: [Jet; 2],
    pub log_r: Jet,
    pub inv_r2: Jet,
}

impl KernelParts {
    pub fn new(source: Point, target: Point, order: usize) -> Result<Self> {
        if source == target {
            return Err(Error::SourceTargetCoincide);
        }
        let rx = Jet::coordinate(target, order, Axis::X).add_scalar(-source[0]);
        let ry = Jet::coordinate(target, order, Axis::Y).add_scalar(-source[1]);
        let r2 = rx.try_mul(&rx)?.try_add(&ry.try_mul(&ry)?)?;
        let log_r = r2.ln()?.scale(0.5);
        let inv_r2 = r2.recip()?;
        Ok(Self {
            r: [rx, ry],
            log_r,
            inv_r2,
        })
    }

    pub fn log_charge(&self) -> Jet {
        self.log_r.clone()
    }

    pub fn stokeslet_velocity(&self, i: Axis, j: Axis) -> Jet {
        let order = self.log_r.order();
        let rr = mul_at_order(&self.r[i.index()], &self.r[j.index()], order);
        let mut g = mul_at_order(&rr, &self.inv_r2, order);
        if i == j {
            g.axpy(-1.0, &self.log_r);
        }
        g
    }

    pub fn stokeslet_pressure(&self, j: Axis) -> Jet {
        mul_at_order(&self.r[j.index()], &self.inv_r2, self.log_r.order()).scale(2.0)
    }
}

/// Jet at `target` of the requested kernel centered at `source`.
pub fn kernel_jet(kernel: KernelId, source: Point, target: Point, order: usize) -> Result<Jet> {
    let parts = KernelParts::new(source, target, order)?;
    Ok(match kernel {
        KernelId::LogCharge => parts.log_charge(),
        KernelId::StokesletVelocity(i, j) => parts.stokeslet_velocity(i, j),
        KernelId::StokesletPressure(j) => parts.stokeslet_pressure(j),
    })
}


/// Scaled derivatives `F⁽ⁿ⁾(z) / n!`, `n = 0..=order`, of `F(z) = log(z - s)`
/// at `z = target`, with the `n = 0` entry replaced by its real part.
///
/// Every kernel in [`KernelId`] is a linear combination of real parts of such
/// sequences, which makes this the cheap route to high-order kernel jets.
pub fn log_series(source: Point, target: Point, order: usize) -> Result<Vec<Complex<f64>>> {
    let dz = Complex::new(target[0] - source[0], target[1] - source[1]);
    if dz.re == 0.0 && dz.im == 0.0 {
        return Err(Error::SourceTargetCoincide);
    }
    let t = dz.inv();
    let mut out = Vec::with_capacity(order + 1);
    out.push(Complex::new(dz.norm().ln(), 0.0));
    let mut pow = Complex::new(1.0, 0.0);
    for n in 1..=order {
        pow *= -t;
        out.push(-pow / n as f64);
    }
    Ok(out)
}

/// Jet of `Re F` from scaled holomorphic derivatives `F⁽ⁿ⁾ / n!`.
///
/// Uses `∂ₓᵃ∂ᵧᵇ Re F = Re(iᵇ F⁽ᵃ⁺ᵇ⁾)`.
pub fn real_part_jet(base: Point, scaled: &[Complex<f64>]) -> Jet {
    let order = scaled.len().saturating_sub(1);
    let mut coeffs = vec![0.0; tri_len(order)];
    for (n, s) in scaled.iter().enumerate() {
        let mut rot = *s;
        for b in 0..=n {
            coeffs[tri_index(n - b, b)] = rot.re * binomial(n, b);
            // multiply by i
            rot = Complex::new(-rot.im, rot.re);
        }
    }
    Jet {
        base,
        order,
        coeffs,
    }
}
