//! A concrete global family of analytic vector fields on a planar domain.
//!
//! For a defining function `ρ` the family is
//!
//! ```text
//! X₀ = ∇ρ·∇,  T₁ = ρ∂x,  T₂ = ρ∂y,  T₃ = -∂yρ ∂x + ∂xρ ∂y
//! ```
//!
//! All `T_j` are tangential (`T_jρ = 0` on `{ρ = 0}`), and with
//! `D = |∇ρ|² + ρ²` the polynomial identity
//! `(∂_kρ) X₀ + ρ T_k + (J∇ρ)_k T₃ = D ∂_k` gives the global representation
//! of the coordinate derivatives. Away from the boundary `∂_k = ρ⁻¹ T_k`.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::domain::{AnalyticDomain, QuadratureSet};
use crate::error::{Error, Result};
use crate::jet::{mul_at_order, Axis, Jet};
use crate::poly::Poly;
use crate::Point;

/// Number of tangential fields.
pub const N_TANGENTIAL: usize = 3;
/// Tangential fields that already span away from the boundary (`T₁`, `T₂`).
pub const N_INTERIOR: usize = 2;

/// `coeff_x ∂x + coeff_y ∂y` with polynomial coefficients.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VectorField {
    pub coeff_x: Poly,
    pub coeff_y: Poly,
}

impl VectorField {
    pub fn new(coeff_x: Poly, coeff_y: Poly) -> Self {
        Self { coeff_x, coeff_y }
    }

    pub fn at(&self, p: Point) -> Point {
        [self.coeff_x.eval(p), self.coeff_y.eval(p)]
    }

    /// The field applied to a polynomial.
    pub fn apply_poly(&self, u: &Poly) -> Poly {
        &(&self.coeff_x * &u.diff_x()) + &(&self.coeff_y * &u.diff_y())
    }

    fn jets(&self, p: Point, order: usize) -> [Jet; 2] {
        [self.coeff_x.jet(p, order), self.coeff_y.jet(p, order)]
    }
}

/// A word `β = (β₁, …, β_j)` over the tangential alphabet `{1, 2, 3}`,
/// standing for `T_{β₁} ⋯ T_{β_j}` (the rightmost letter acts first).
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct Word(Vec<u8>);

impl Word {
    pub fn empty() -> Self {
        Self(Vec::new())
    }

    pub fn new(letters: Vec<u8>) -> Result<Self> {
        if let Some(&bad) = letters.iter().find(|&&l| !(1..=N_TANGENTIAL as u8).contains(&l)) {
            return Err(Error::InvalidInput(format!("letter {bad} outside 1..=3")));
        }
        Ok(Self(letters))
    }

    pub fn letters(&self) -> &[u8] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// `self ⌢ other`: `other` acts first.
    pub fn concat(&self, other: &Word) -> Word {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        Word(v)
    }

    pub(crate) fn prepend(&self, letter: u8) -> Word {
        let mut v = Vec::with_capacity(self.0.len() + 1);
        v.push(letter);
        v.extend_from_slice(&self.0);
        Word(v)
    }

    /// All words of length `len` over `alphabet`, lexicographic.
    pub fn all_of_length(len: usize, alphabet: &[u8]) -> Vec<Word> {
        let mut out = vec![Word::empty()];
        for _ in 0..len {
            out = out
                .iter()
                .flat_map(|w| {
                    alphabet.iter().map(move |&l| {
                        let mut v = w.0.clone();
                        v.push(l);
                        Word(v)
                    })
                })
                .collect();
        }
        out
    }
}

impl Ord for Word {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0
            .len()
            .cmp(&other.0.len())
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Word {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "-");
        }
        for l in &self.0 {
            write!(f, "{l}")?;
        }
        Ok(())
    }
}

impl FromStr for Word {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "-" || s.is_empty() {
            return Ok(Word::empty());
        }
        let letters = s
            .chars()
            .map(|c| {
                c.to_digit(10)
                    .map(|d| d as u8)
                    .ok_or_else(|| Error::InvalidInput(format!("bad word {s:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Word::new(letters)
    }
}

/// A representation coefficient `numerator / denominator`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Rational {
    pub numerator: Poly,
    pub denominator: Poly,
}

impl Rational {
    pub fn eval(&self, p: Point) -> f64 {
        self.numerator.eval(p) / self.denominator.eval(p)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct KomatsuFamily {
    pub x0: VectorField,
    pub tangential: [VectorField; N_TANGENTIAL],
    /// `ξ_k`, k = 1, 2.
    pub repr_xi: [Rational; 2],
    /// `η_{jk}` indexed `[j][k]`.
    pub repr_eta: [[Rational; 2]; N_TANGENTIAL],
    /// `ζ_{jk}` indexed `[j][k]`, valid on the interior core only.
    pub repr_zeta: [[Rational; 2]; N_INTERIOR],
    rho: Poly,
}

/// Coefficient jets of the tangential fields at one point.
#[derive(Clone, Debug)]
pub struct FieldJets {
    coeffs: [[Jet; 2]; N_TANGENTIAL],
}

impl FieldJets {
    pub fn order(&self) -> usize {
        self.coeffs[0][0].order()
    }

    /// `T_letter u`, one order lower than `u`.
    pub fn apply(&self, letter: u8, u: &Jet) -> Result<Jet> {
        if u.order() == 0 {
            return Err(Error::OrderExhausted);
        }
        if u.order() > self.order() + 1 {
            return Err(Error::OrderMismatch(self.order(), u.order()));
        }
        let [ax, ay] = &self.coeffs[letter as usize - 1];
        let order = u.order() - 1;
        let mut out = mul_at_order(ax, &u.diff(Axis::X)?, order);
        out.axpy(1.0, &mul_at_order(ay, &u.diff(Axis::Y)?, order));
        Ok(out)
    }

    /// `T^β u`.
    pub fn apply_word(&self, word: &Word, u: &Jet) -> Result<Jet> {
        let mut cur = u.clone();
        for &l in word.letters().iter().rev() {
            cur = self.apply(l, &cur)?;
        }
        Ok(cur)
    }

    /// Depth-first walk over all words of length `<= max_len` on `alphabet`,
    /// carrying `T^β r` for every root jet `r`. Words are grown on the left so
    /// each node costs one field application per root.
    pub fn walk_words<F>(&self, roots: Vec<Jet>, max_len: usize, alphabet: &[u8], visit: &mut F) -> Result<()>
    where
        F: FnMut(&Word, &[Jet]) -> Result<()>,
    {
        self.walk_inner(&Word::empty(), roots, max_len, alphabet, visit)
    }

    fn walk_inner<F>(&self, word: &Word, jets: Vec<Jet>, remaining: usize, alphabet: &[u8], visit: &mut F) -> Result<()>
    where
        F: FnMut(&Word, &[Jet]) -> Result<()>,
    {
        visit(word, &jets)?;
        if remaining == 0 {
            return Ok(());
        }
        for &l in alphabet {
            let next = jets
                .iter()
                .map(|j| self.apply(l, j))
                .collect::<Result<Vec<_>>>()?;
            self.walk_inner(&word.prepend(l), next, remaining - 1, alphabet, visit)?;
        }
        Ok(())
    }
}

impl KomatsuFamily {
    pub fn build(domain: &AnalyticDomain) -> Result<Self> {
        let rho = domain.defining_poly().clone();
        let [rx, ry] = domain.gradient_poly().clone();
        let x0 = VectorField::new(rx.clone(), ry.clone());
        let t1 = VectorField::new(rho.clone(), Poly::zero());
        let t2 = VectorField::new(Poly::zero(), rho.clone());
        let t3 = VectorField::new(-&ry, rx.clone());
        let d = &(&(&rx * &rx) + &(&ry * &ry)) + &(&rho * &rho);
        let r = |n: Poly| Rational {
            numerator: n,
            denominator: d.clone(),
        };
        let zeta = |n: Poly| Rational {
            numerator: n,
            denominator: rho.clone(),
        };
        let one = Poly::constant(1.0);
        let zero = Poly::zero();
        let family = Self {
            repr_xi: [r(rx.clone()), r(ry.clone())],
            repr_eta: [
                [r(rho.clone()), r(zero.clone())],
                [r(zero.clone()), r(rho.clone())],
                [r(-&ry), r(rx.clone())],
            ],
            repr_zeta: [
                [zeta(one.clone()), zeta(zero.clone())],
                [zeta(zero), zeta(one)],
            ],
            x0,
            tangential: [t1, t2, t3],
            rho,
        };
        // D > 0 on the closure; D only vanishes where ρ and ∇ρ both do.
        let q = domain.volume_quadrature(12, 64)?;
        let b = domain.boundary_trace(128)?;
        for &p in q.points.iter().chain(&b.points) {
            if family.denominator(p) <= 1e-14 {
                let g = domain.grad_rho(p);
                return Err(Error::DegenerateBoundary {
                    grad: g[0].hypot(g[1]),
                    x: p[0],
                    y: p[1],
                });
            }
        }
        Ok(family)
    }

    pub fn field(&self, letter: u8) -> &VectorField {
        &self.tangential[letter as usize - 1]
    }

    /// `D = |∇ρ|² + ρ²`.
    pub fn denominator(&self, p: Point) -> f64 {
        self.repr_xi[0].denominator.eval(p)
    }

    pub fn jets_at(&self, p: Point, order: usize) -> FieldJets {
        FieldJets {
            coeffs: [
                self.tangential[0].jets(p, order),
                self.tangential[1].jets(p, order),
                self.tangential[2].jets(p, order),
            ],
        }
    }

    /// `T^β u` as a jet at `u`'s base point.
    pub fn apply_word(&self, word: &Word, u: &Jet) -> Result<Jet> {
        if word.len() > u.order() {
            return Err(Error::OrderExhausted);
        }
        self.jets_at(u.base(), u.order().max(1)).apply_word(word, u)
    }

    /// `[T^β, Δ]u = T^β(Δu) - Δ(T^β u)`.
    pub fn commutator_with_laplacian(&self, word: &Word, u: &Jet) -> Result<Jet> {
        if u.order() < word.len() + 2 {
            return Err(Error::OrderExhausted);
        }
        let fj = self.jets_at(u.base(), u.order());
        let lhs = fj.apply_word(word, &u.laplacian()?)?;
        let rhs = fj.apply_word(word, u)?.laplacian()?;
        lhs.try_sub(&rhs)
    }

    /// `[T^β, ∇]q = T^β(∇q) - ∇(T^β q)`.
    pub fn commutator_with_gradient(&self, word: &Word, q: &Jet) -> Result<[Jet; 2]> {
        if q.order() < word.len() + 1 {
            return Err(Error::OrderExhausted);
        }
        let fj = self.jets_at(q.base(), q.order());
        let tq = fj.apply_word(word, q)?;
        let mut out = Vec::with_capacity(2);
        for axis in Axis::BOTH {
            let a = fj.apply_word(word, &q.diff(axis)?)?;
            out.push(a.try_sub(&tq.diff(axis)?)?);
        }
        let [x, y]: [Jet; 2] = out.try_into().expect("two components");
        Ok([x, y])
    }

    /// `max_j |T_j ρ|` over the given points.
    pub fn tangency_residual(&self, points: &[Point]) -> f64 {
        self.tangential
            .iter()
            .map(|t| t.apply_poly(&self.rho))
            .flat_map(|tr| points.iter().map(move |&p| tr.eval(p).abs()).collect::<Vec<_>>())
            .fold(0.0, f64::max)
    }

    /// Largest deviation of `ξ_k X₀ + Σ_j η_{jk} T_j` from `∂_k` at `p`.
    pub fn representation_residual(&self, p: Point) -> f64 {
        let x0 = self.x0.at(p);
        let t: Vec<Point> = self.tangential.iter().map(|f| f.at(p)).collect();
        let mut worst: f64 = 0.0;
        for k in 0..2 {
            let xi = self.repr_xi[k].eval(p);
            let mut v = [xi * x0[0], xi * x0[1]];
            for (j, tj) in t.iter().enumerate() {
                let eta = self.repr_eta[j][k].eval(p);
                v[0] += eta * tj[0];
                v[1] += eta * tj[1];
            }
            let e = if k == 0 { [1.0, 0.0] } else { [0.0, 1.0] };
            worst = worst.max((v[0] - e[0]).abs()).max((v[1] - e[1]).abs());
        }
        worst
    }

    /// Same check for the interior representation `∂_k = Σ_{j<=2} ζ_{jk} T_j`.
    pub fn interior_representation_residual(&self, p: Point) -> f64 {
        let mut worst: f64 = 0.0;
        for k in 0..2 {
            let mut v = [0.0, 0.0];
            for j in 0..N_INTERIOR {
                let z = self.repr_zeta[j][k].eval(p);
                let tj = self.tangential[j].at(p);
                v[0] += z * tj[0];
                v[1] += z * tj[1];
            }
            let e = if k == 0 { [1.0, 0.0] } else { [0.0, 1.0] };
            worst = worst.max((v[0] - e[0]).abs()).max((v[1] - e[1]).abs());
        }
        worst
    }

    pub fn min_denominator(&self, quad: &QuadratureSet) -> f64 {
        quad.points
            .iter()
            .map(|&p| self.denominator(p))
            .fold(f64::INFINITY, f64::min)
    }
}
