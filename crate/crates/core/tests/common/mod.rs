//! Oracles shared by the integration tests. Nothing here calls into the
//! jet or table machinery it is used to check.
#![allow(dead_code)]

use std::collections::BTreeMap;

use divlab_core::{KomatsuFamily, Point, Poly, Word};
use rand::RngExt;
use rand_chacha::ChaCha8Rng;

/// Second-order central difference for `∂x^a ∂y^b f`: a tensor product of
/// the 1D stencils `Σ_k (-1)^{n-k} C(n,k) f(x + (k - n/2) h) / h^n`.
pub fn central_difference(f: &dyn Fn(Point) -> f64, p: Point, a: usize, b: usize, h: f64) -> f64 {
    let stencil = |n: usize| -> Vec<(f64, f64)> {
        (0..=n)
            .map(|k| {
                let sign = if (n - k) % 2 == 0 { 1.0 } else { -1.0 };
                (sign * binomial(n, k), (k as f64 - n as f64 / 2.0) * h)
            })
            .collect()
    };
    let mut total = 0.0;
    for (wx, dx) in stencil(a) {
        for (wy, dy) in stencil(b) {
            total += wx * wy * f([p[0] + dx, p[1] + dy]);
        }
    }
    total / h.powi((a + b) as i32)
}

/// Richardson extrapolation of [`central_difference`] over steps
/// `h0, h0/q, h0/q², …`, eliminating `h², h⁴, …` in turn.
pub fn richardson(f: &dyn Fn(Point) -> f64, p: Point, a: usize, b: usize, h0: f64, q: f64, levels: usize) -> f64 {
    let mut t: Vec<f64> = (0..levels)
        .map(|k| central_difference(f, p, a, b, h0 / q.powi(k as i32)))
        .collect();
    for lev in 1..levels {
        let g = q.powi(2 * lev as i32);
        t = t.windows(2).map(|w| (g * w[1] - w[0]) / (g - 1.0)).collect();
    }
    t[0]
}

pub fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

fn double_factorial(n: i64) -> f64 {
    if n <= 0 {
        1.0
    } else {
        (n as f64) * double_factorial(n - 2)
    }
}

/// `∫ x^a y^b` over the unit disk:
/// `2π (a-1)!! (b-1)!! / (a+b)!! · 1/(a+b+2)` for even `a`, `b`, else 0.
pub fn disk_moment(a: usize, b: usize) -> f64 {
    if a % 2 == 1 || b % 2 == 1 {
        return 0.0;
    }
    let angular = 2.0 * std::f64::consts::PI * double_factorial(a as i64 - 1) * double_factorial(b as i64 - 1)
        / double_factorial((a + b) as i64);
    angular / (a + b + 2) as f64
}

/// Exact `L²` norm over the unit disk.
pub fn disk_l2(p: &Poly) -> f64 {
    let sq = p * p;
    sq.terms()
        .iter()
        .map(|&(a, b, c)| c * disk_moment(a, b))
        .sum::<f64>()
        .max(0.0)
        .sqrt()
}

pub fn diff_poly(p: &Poly, a: usize, b: usize) -> Poly {
    let mut out = p.clone();
    for _ in 0..a {
        out = out.diff_x();
    }
    for _ in 0..b {
        out = out.diff_y();
    }
    out
}

/// `T^β u` by polynomial algebra; the last letter acts first.
pub fn apply_word_poly(family: &KomatsuFamily, word: &Word, u: &Poly) -> Poly {
    word.letters()
        .iter()
        .rev()
        .fold(u.clone(), |acc, &l| family.field(l).apply_poly(&acc))
}

/// `Σ_{|α| = i} ‖∂^α T^β u‖` over the unit disk, symbolically.
pub fn symbolic_entry(family: &KomatsuFamily, i: usize, word: &Word, components: &[Poly]) -> f64 {
    components
        .iter()
        .map(|c| {
            let t = apply_word_poly(family, word, c);
            (0..=i).map(|b| disk_l2(&diff_poly(&t, i - b, b))).sum::<f64>()
        })
        .sum()
}

/// A table CSV reduced to `A(i, j)` sums, parsed without the library.
#[derive(Debug, Default)]
pub struct Aggregates {
    pub sums: BTreeMap<(usize, usize), f64>,
    pub rows: usize,
}

impl Aggregates {
    pub fn parse(csv: &str) -> Self {
        let mut out = Self::default();
        for line in csv.lines().skip(1) {
            let cols: Vec<&str> = line.split(',').collect();
            assert_eq!(cols.len(), 4, "bad row {line}");
            let i: usize = cols[1].parse().unwrap();
            let j = if cols[2] == "-" { 0 } else { cols[2].len() };
            let v: f64 = cols[3].parse().unwrap();
            *out.sums.entry((i, j)).or_insert(0.0) += v;
            out.rows += 1;
        }
        out
    }

    pub fn a(&self, i: usize, j: usize) -> f64 {
        *self
            .sums
            .get(&(i, j))
            .unwrap_or_else(|| panic!("no entries for ({i}, {j})"))
    }

    pub fn max(&self) -> f64 {
        self.sums.values().fold(0.0, |m, &v| m.max(v))
    }
}

pub fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

pub fn random_poly(rng: &mut ChaCha8Rng, degree: usize) -> Poly {
    let mut terms = Vec::new();
    for d in 0..=degree {
        for b in 0..=d {
            terms.push((d - b, b, rng.random_range(-1.0..1.0)));
        }
    }
    Poly::from_terms(terms)
}

/// Uniform points in the disk of radius `r` about the origin.
pub fn random_points_in_disk(rng: &mut ChaCha8Rng, n: usize, r: f64) -> Vec<Point> {
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let p = [rng.random_range(-r..r), rng.random_range(-r..r)];
        if p[0].hypot(p[1]) < r {
            out.push(p);
        }
    }
    out
}

pub fn relative_gap(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}
