//! Dense bivariate polynomials in the monomial basis.
//!
//! Coefficients are stored in the same graded triangular layout as [`Jet`]s:
//! monomial `x^a y^b` lives at slot `d(d+1)/2 + b` with `d = a + b`.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::jet::Jet;
use crate::Point;

/// Slot of `x^a y^b` in graded triangular storage.
#[inline]
pub(crate) fn tri_index(a: usize, b: usize) -> usize {
    let d = a + b;
    d * (d + 1) / 2 + b
}

/// Number of slots needed for total degree `<= m`.
#[inline]
pub(crate) fn tri_len(m: usize) -> usize {
    (m + 1) * (m + 2) / 2
}

/// Iterates `(a, b)` pairs of total degree `d`, in storage order.
pub(crate) fn degree_block(d: usize) -> impl Iterator<Item = (usize, usize)> {
    (0..=d).map(move |b| (d - b, b))
}

pub(crate) fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut acc = 1.0;
    for t in 0..k {
        acc = acc * (n - t) as f64 / (t + 1) as f64;
    }
    acc.round()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Poly {
    degree: usize,
    coeffs: Vec<f64>,
}

impl Poly {
    pub fn zero() -> Self {
        Self {
            degree: 0,
            coeffs: vec![0.0],
        }
    }

    pub fn constant(c: f64) -> Self {
        Self {
            degree: 0,
            coeffs: vec![c],
        }
    }

    pub fn x() -> Self {
        Self::monomial(1, 0, 1.0)
    }

    pub fn y() -> Self {
        Self::monomial(0, 1, 1.0)
    }

    pub fn monomial(a: usize, b: usize, c: f64) -> Self {
        let degree = a + b;
        let mut coeffs = vec![0.0; tri_len(degree)];
        coeffs[tri_index(a, b)] = c;
        Self { degree, coeffs }
    }

    /// Builds a polynomial from `(a, b, c)` triples meaning `c x^a y^b`.
    /// Repeated monomials accumulate.
    pub fn from_terms<I>(terms: I) -> Self
    where
        I: IntoIterator<Item = (usize, usize, f64)>,
    {
        let terms: Vec<_> = terms.into_iter().collect();
        let degree = terms.iter().map(|&(a, b, _)| a + b).max().unwrap_or(0);
        let mut coeffs = vec![0.0; tri_len(degree)];
        for (a, b, c) in terms {
            coeffs[tri_index(a, b)] += c;
        }
        Self { degree, coeffs }.trimmed()
    }

    /// Nonzero terms as `(a, b, c)`, graded order.
    pub fn terms(&self) -> Vec<(usize, usize, f64)> {
        (0..=self.degree)
            .flat_map(degree_block)
            .filter_map(|(a, b)| {
                let c = self.coeffs[tri_index(a, b)];
                (c != 0.0).then_some((a, b, c))
            })
            .collect()
    }

    /// Storage degree; equals the true degree after [`Poly::trimmed`].
    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn coeff(&self, a: usize, b: usize) -> f64 {
        if a + b > self.degree {
            0.0
        } else {
            self.coeffs[tri_index(a, b)]
        }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0.0)
    }

    /// Largest absolute coefficient.
    pub fn max_abs_coeff(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |m, c| m.max(c.abs()))
    }

    /// Drops trailing all-zero degree blocks.
    pub fn trimmed(mut self) -> Self {
        while self.degree > 0
            && degree_block(self.degree).all(|(a, b)| self.coeffs[tri_index(a, b)] == 0.0)
        {
            self.degree -= 1;
        }
        self.coeffs.truncate(tri_len(self.degree));
        self
    }

    fn with_degree(&self, degree: usize) -> Vec<f64> {
        let mut c = vec![0.0; tri_len(degree)];
        let n = self.coeffs.len().min(c.len());
        c[..n].copy_from_slice(&self.coeffs[..n]);
        c
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            degree: self.degree,
            coeffs: self.coeffs.iter().map(|c| c * s).collect(),
        }
    }

    pub fn eval(&self, p: Point) -> f64 {
        // Horner in y over Horner-in-x rows would need reshaping; the direct
        // power table is accurate enough at the degrees used here.
        let [x, y] = p;
        let mut xp = vec![1.0; self.degree + 1];
        let mut yp = vec![1.0; self.degree + 1];
        for k in 1..=self.degree {
            xp[k] = xp[k - 1] * x;
            yp[k] = yp[k - 1] * y;
        }
        let mut acc = 0.0;
        for d in 0..=self.degree {
            for (a, b) in degree_block(d) {
                let c = self.coeffs[tri_index(a, b)];
                if c != 0.0 {
                    acc += c * xp[a] * yp[b];
                }
            }
        }
        acc
    }

    pub fn diff_x(&self) -> Self {
        if self.degree == 0 {
            return Self::zero();
        }
        let degree = self.degree - 1;
        let mut coeffs = vec![0.0; tri_len(degree)];
        for d in 0..=degree {
            for (a, b) in degree_block(d) {
                coeffs[tri_index(a, b)] = (a + 1) as f64 * self.coeffs[tri_index(a + 1, b)];
            }
        }
        Self { degree, coeffs }
    }

    pub fn diff_y(&self) -> Self {
        if self.degree == 0 {
            return Self::zero();
        }
        let degree = self.degree - 1;
        let mut coeffs = vec![0.0; tri_len(degree)];
        for d in 0..=degree {
            for (a, b) in degree_block(d) {
                coeffs[tri_index(a, b)] = (b + 1) as f64 * self.coeffs[tri_index(a, b + 1)];
            }
        }
        Self { degree, coeffs }
    }

    pub fn gradient(&self) -> [Poly; 2] {
        [self.diff_x(), self.diff_y()]
    }

    pub fn laplacian(&self) -> Self {
        &self.diff_x().diff_x() + &self.diff_y().diff_y()
    }

    /// Antiderivative in `x` with zero integration constant.
    pub fn integrate_x(&self) -> Self {
        let degree = self.degree + 1;
        let mut coeffs = vec![0.0; tri_len(degree)];
        for d in 0..=self.degree {
            for (a, b) in degree_block(d) {
                coeffs[tri_index(a + 1, b)] = self.coeffs[tri_index(a, b)] / (a + 1) as f64;
            }
        }
        Self { degree, coeffs }
    }

    /// Integer power by repeated multiplication.
    pub fn pow(&self, n: usize) -> Self {
        let mut acc = Poly::constant(1.0);
        for _ in 0..n {
            acc = &acc * self;
        }
        acc
    }

    /// Substitutes `x -> ax + bx`, `y -> ay + by` given as polynomials.
    pub fn compose(&self, sx: &Poly, sy: &Poly) -> Self {
        let xp: Vec<Poly> = (0..=self.degree).map(|k| sx.pow(k)).collect();
        let yp: Vec<Poly> = (0..=self.degree).map(|k| sy.pow(k)).collect();
        let mut acc = Poly::zero();
        for (a, b, c) in self.terms() {
            acc = &acc + &(&xp[a] * &yp[b]).scale(c);
        }
        acc.trimmed()
    }

    /// Taylor jet of this polynomial at `p`, truncated at `order`.
    pub fn jet(&self, p: Point, order: usize) -> Jet {
        let [x0, y0] = p;
        let n = self.degree;
        let mut xp = vec![1.0; n + 1];
        let mut yp = vec![1.0; n + 1];
        for k in 1..=n {
            xp[k] = xp[k - 1] * x0;
            yp[k] = yp[k - 1] * y0;
        }
        let mut coeffs = vec![0.0; tri_len(order)];
        for d in 0..=order.min(n) {
            for (a, b) in degree_block(d) {
                let mut acc = 0.0;
                for i in a..=n {
                    for j in b..=(n - i) {
                        let c = self.coeffs[tri_index(i, j)];
                        if c != 0.0 {
                            acc += c
                                * binomial(i, a)
                                * binomial(j, b)
                                * xp[i - a]
                                * yp[j - b];
                        }
                    }
                }
                coeffs[tri_index(a, b)] = acc;
            }
        }
        Jet::from_coeffs(p, order, coeffs).expect("length matches order")
    }
}

impl Add for &Poly {
    type Output = Poly;
    fn add(self, rhs: &Poly) -> Poly {
        let degree = self.degree.max(rhs.degree);
        let mut coeffs = self.with_degree(degree);
        for (c, r) in coeffs.iter_mut().zip(rhs.coeffs.iter()) {
            *c += r;
        }
        Poly { degree, coeffs }
    }
}

impl Sub for &Poly {
    type Output = Poly;
    fn sub(self, rhs: &Poly) -> Poly {
        let degree = self.degree.max(rhs.degree);
        let mut coeffs = self.with_degree(degree);
        for (c, r) in coeffs.iter_mut().zip(rhs.coeffs.iter()) {
            *c -= r;
        }
        Poly { degree, coeffs }
    }
}

impl Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        self.scale(-1.0)
    }
}

impl Mul for &Poly {
    type Output = Poly;
    fn mul(self, rhs: &Poly) -> Poly {
        let degree = self.degree + rhs.degree;
        let mut coeffs = vec![0.0; tri_len(degree)];
        for d1 in 0..=self.degree {
            for (a1, b1) in degree_block(d1) {
                let c1 = self.coeffs[tri_index(a1, b1)];
                if c1 == 0.0 {
                    continue;
                }
                for d2 in 0..=rhs.degree {
                    for (a2, b2) in degree_block(d2) {
                        coeffs[tri_index(a1 + a2, b1 + b2)] += c1 * rhs.coeffs[tri_index(a2, b2)];
                    }
                }
            }
        }
        Poly { degree, coeffs }
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let terms = self.terms();
        if terms.is_empty() {
            return write!(f, "0");
        }
        for (k, (a, b, c)) in terms.into_iter().enumerate() {
            if k > 0 {
                write!(f, " {} ", if c < 0.0 { '-' } else { '+' })?;
            } else if c < 0.0 {
                write!(f, "-")?;
            }
            write!(f, "{}", c.abs())?;
            match a {
                0 => {}
                1 => write!(f, "*x")?,
                _ => write!(f, "*x^{a}")?,
            }
            match b {
                0 => {}
                1 => write!(f, "*y")?,
                _ => write!(f, "*y^{b}")?,
            }
        }
        Ok(())
    }
}
