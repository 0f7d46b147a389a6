//! Derivative tables `‖∂^α T^β w‖` and the weighted analytic norms built on them.
//!
//! A table entry `(i, β)` is `Σ_{|α| = i} Σ_c ‖∂^α T^β w_c‖_{L²}` for a field
//! with components `w_c`. Aggregating over words of one length gives
//! `A(i, j) = Σ_{|β| = j} entry(i, β)`, the quantity every norm and audit
//! consumes.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::domain::QuadratureSet;
use crate::error::{Error, Result};
use crate::eval::JetField;
use crate::fields::{FieldJets, KomatsuFamily, Word, N_TANGENTIAL};
use crate::jet::{Axis, Jet};
use crate::poly::degree_block;
use crate::Point;

/// Points per parallel work unit. Partial sums are reduced in chunk order,
/// so tables do not depend on the thread count.
const CHUNK: usize = 16;

/// Entries present in a table: `i ≤ i_max`, `|β| ≤ j_max`, `i + |β| ≤ max_total`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TableLimits {
    pub i_max: usize,
    pub j_max: usize,
    pub max_total: usize,
}

impl TableLimits {
    /// All `(i, j)` with `i + j ≤ m`.
    pub fn triangular(m: usize) -> Self {
        Self {
            i_max: m,
            j_max: m,
            max_total: m,
        }
    }

    /// All `(i, j)` with `i ≤ i_max`, `j ≤ j_max`.
    pub fn rectangular(i_max: usize, j_max: usize) -> Self {
        Self {
            i_max,
            j_max,
            max_total: i_max + j_max,
        }
    }

    pub fn contains(&self, i: usize, j: usize) -> bool {
        i <= self.i_max && j <= self.j_max && i + j <= self.max_total
    }

    /// Largest `i` stored for words of length `j`.
    fn i_cap(&self, j: usize) -> Option<usize> {
        (j <= self.j_max && j <= self.max_total).then(|| self.i_max.min(self.max_total - j))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DerivativeTable {
    pub subject: String,
    pub limits: TableLimits,
    pub alphabet: Vec<u8>,
    /// Identifies the volume rule the norms were taken with.
    pub quadrature: String,
    entries: BTreeMap<(usize, Word), f64>,
}

impl DerivativeTable {
    pub fn from_entries(
        subject: impl Into<String>,
        limits: TableLimits,
        alphabet: Vec<u8>,
        quadrature: impl Into<String>,
        entries: BTreeMap<(usize, Word), f64>,
    ) -> Self {
        Self {
            subject: subject.into(),
            limits,
            alphabet,
            quadrature: quadrature.into(),
            entries,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn entries(&self) -> impl Iterator<Item = (usize, &Word, f64)> {
        self.entries.iter().map(|((i, w), &v)| (*i, w, v))
    }

    pub fn entry(&self, i: usize, word: &Word) -> Option<f64> {
        self.entries.get(&(i, word.clone())).copied()
    }

    /// `A(i, j) = Σ_{|β| = j} entry(i, β)`.
    pub fn aggregate(&self, i: usize, j: usize) -> Result<f64> {
        if !self.limits.contains(i, j) {
            return Err(Error::TruncationTooSmall {
                have: self.limits.max_total.min(self.limits.i_max.max(self.limits.j_max)),
                need: i + j,
            });
        }
        Ok(self
            .entries
            .iter()
            .filter(|((ii, w), _)| *ii == i && w.len() == j)
            .map(|(_, v)| v)
            .sum())
    }

    /// Dense `A(i, j)` indexed `[i][j]`, zero outside the limits.
    pub fn aggregates(&self) -> Vec<Vec<f64>> {
        let mut out = vec![vec![0.0; self.limits.j_max + 1]; self.limits.i_max + 1];
        for ((i, w), v) in &self.entries {
            out[*i][w.len()] += v;
        }
        out
    }

    /// Same table with every entry multiplied by `|c|`.
    pub fn scaled(&self, c: f64) -> Self {
        let mut t = self.clone();
        for v in t.entries.values_mut() {
            *v *= c.abs();
        }
        t
    }

    /// CSV with header `subject,i,word,value`, rows sorted by `(i, word)`,
    /// values with 17 significant digits.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("subject,i,word,value\n");
        for ((i, w), v) in &self.entries {
            writeln!(s, "{},{},{},{:.16e}", self.subject, i, w, v).expect("write to string");
        }
        s
    }

    /// Parses [`to_csv`](Self::to_csv) output. Limits and alphabet are
    /// inferred from the rows present.
    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        match lines.next() {
            Some("subject,i,word,value") => {}
            other => return Err(Error::InvalidInput(format!("unexpected CSV header {other:?}"))),
        }
        let mut subject = None;
        let mut entries = BTreeMap::new();
        let mut limits = TableLimits {
            i_max: 0,
            j_max: 0,
            max_total: 0,
        };
        let mut alphabet = Vec::new();
        for (n, line) in lines.enumerate().filter(|(_, l)| !l.is_empty()) {
            let bad = |what: &str| Error::InvalidInput(format!("CSV row {}: {what}", n + 2));
            let cols: Vec<&str> = line.split(',').collect();
            if cols.len() != 4 {
                return Err(bad("expected 4 columns"));
            }
            subject.get_or_insert_with(|| cols[0].to_string());
            let i: usize = cols[1].parse().map_err(|_| bad("bad order"))?;
            let w: Word = cols[2].parse()?;
            let v: f64 = cols[3].parse().map_err(|_| bad("bad value"))?;
            limits.i_max = limits.i_max.max(i);
            limits.j_max = limits.j_max.max(w.len());
            limits.max_total = limits.max_total.max(i + w.len());
            for &l in w.letters() {
                if !alphabet.contains(&l) {
                    alphabet.push(l);
                }
            }
            entries.insert((i, w), v);
        }
        alphabet.sort_unstable();
        if alphabet.is_empty() {
            alphabet = (1..=N_TANGENTIAL as u8).collect();
        }
        Ok(Self {
            subject: subject.unwrap_or_default(),
            limits,
            alphabet,
            quadrature: String::new(),
            entries,
        })
    }
}

/// What a table measures.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TableKind {
    /// `∂^α T^β w`.
    Derivatives,
    /// `∂^α [T^β, Δ] w`, componentwise.
    LaplaceCommutator,
    /// `∂^α [T^β, ∇] q` for scalar `q`; two components.
    GradientCommutator,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
enum RootOp {
    Identity,
    Laplacian,
    Diff(usize),
}

/// One jet carried through the word walk: `op` applied to component `comp`
/// of field `field` evaluated at order `order`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
struct RootKey {
    field: usize,
    order: usize,
    comp: usize,
    op: RootOp,
}

enum Plan {
    Derivatives(Vec<usize>),
    LaplaceCommutator(Vec<(usize, usize)>),
    GradientCommutator { q: usize, grad: [usize; 2] },
}

struct Request<'a> {
    subject: String,
    field: &'a dyn JetField,
    limits: TableLimits,
    kind: TableKind,
}

/// Builds several tables over one word walk per quadrature point.
pub struct TableBuilder<'a> {
    family: &'a KomatsuFamily,
    quad: &'a QuadratureSet,
    alphabet: Vec<u8>,
    requests: Vec<Request<'a>>,
}

impl<'a> TableBuilder<'a> {
    pub fn new(family: &'a KomatsuFamily, quad: &'a QuadratureSet) -> Self {
        Self {
            family,
            quad,
            alphabet: (1..=N_TANGENTIAL as u8).collect(),
            requests: Vec::new(),
        }
    }

    /// Restricts the words to letters from `alphabet`.
    pub fn alphabet(mut self, alphabet: &[u8]) -> Result<Self> {
        if alphabet.is_empty() || alphabet.iter().any(|&l| !(1..=N_TANGENTIAL as u8).contains(&l)) {
            return Err(Error::InvalidInput(format!("alphabet {alphabet:?}")));
        }
        let mut a = alphabet.to_vec();
        a.sort_unstable();
        a.dedup();
        self.alphabet = a;
        Ok(self)
    }

    pub fn add(
        mut self,
        subject: impl Into<String>,
        field: &'a dyn JetField,
        limits: TableLimits,
        kind: TableKind,
    ) -> Self {
        self.requests.push(Request {
            subject: subject.into(),
            field,
            limits,
            kind,
        });
        self
    }

    pub fn build(self) -> Result<Vec<DerivativeTable>> {
        if self.quad.is_empty() {
            return Err(Error::EmptyQuadrature);
        }
        // Deduplicate fields by address so shared subjects are evaluated once.
        let mut fields: Vec<&dyn JetField> = Vec::new();
        let mut field_index = |f: &'a dyn JetField| {
            let addr = f as *const dyn JetField as *const ();
            match fields.iter().position(|g| std::ptr::eq(*g as *const dyn JetField as *const (), addr)) {
                Some(k) => k,
                None => {
                    fields.push(f);
                    fields.len() - 1
                }
            }
        };
        let mut roots: Vec<(RootKey, usize)> = Vec::new();
        let mut root = |key: RootKey, depth: usize| match roots.iter().position(|(k, _)| *k == key) {
            Some(k) => {
                roots[k].1 = roots[k].1.max(depth);
                k
            }
            None => {
                roots.push((key, depth));
                roots.len() - 1
            }
        };
        let mut plans = Vec::with_capacity(self.requests.len());
        for r in &self.requests {
            let f = field_index(r.field);
            let nc = r.field.n_components();
            let m = r.limits.max_total;
            let depth = r.limits.j_max.min(m);
            let key = |order, comp, op| RootKey {
                field: f,
                order,
                comp,
                op,
            };
            plans.push(match r.kind {
                TableKind::Derivatives => {
                    Plan::Derivatives((0..nc).map(|c| root(key(m, c, RootOp::Identity), depth)).collect())
                }
                TableKind::LaplaceCommutator => Plan::LaplaceCommutator(
                    (0..nc)
                        .map(|c| {
                            (
                                root(key(m + 2, c, RootOp::Identity), depth),
                                root(key(m + 2, c, RootOp::Laplacian), depth),
                            )
                        })
                        .collect(),
                ),
                TableKind::GradientCommutator => {
                    if nc != 1 {
                        return Err(Error::InvalidInput(format!(
                            "gradient commutator of a {nc}-component field"
                        )));
                    }
                    Plan::GradientCommutator {
                        q: root(key(m + 1, 0, RootOp::Identity), depth),
                        grad: [
                            root(key(m + 1, 0, RootOp::Diff(0)), depth),
                            root(key(m + 1, 0, RootOp::Diff(1)), depth),
                        ],
                    }
                }
            });
        }
        let walk_depth = roots.iter().map(|r| r.1).max().unwrap_or(0);
        let field_order = roots.iter().map(|r| r.0.order).max().unwrap_or(0);

        // Slot layout: for every node of the depth-first walk and every
        // request that stores that word length, one slot per (i, α, component).
        let words = dfs_words(walk_depth, &self.alphabet);
        let mut offsets = vec![vec![None; self.requests.len()]; words.len()];
        let mut sizes = vec![0usize; self.requests.len()];
        for (n, w) in words.iter().enumerate() {
            for (r, req) in self.requests.iter().enumerate() {
                if let Some(cap) = req.limits.i_cap(w.len()) {
                    offsets[n][r] = Some(sizes[r]);
                    sizes[r] += (0..=cap).map(|i| i + 1).sum::<usize>() * output_components(req);
                }
            }
        }

        let ctx = WalkContext {
            family: self.family,
            alphabet: &self.alphabet,
            fields: &fields,
            roots: &roots,
            plans: &plans,
            requests: &self.requests,
            offsets: &offsets,
            field_order,
        };
        let pairs: Vec<(Point, f64)> = self
            .quad
            .points
            .iter()
            .copied()
            .zip(self.quad.weights.iter().copied())
            .collect();
        let partials: Vec<Vec<Vec<f64>>> = pairs
            .par_chunks(CHUNK)
            .map(|chunk| {
                let mut sums: Vec<Vec<f64>> = sizes.iter().map(|&s| vec![0.0; s]).collect();
                for &(p, w) in chunk {
                    ctx.accumulate(p, w, &mut sums)?;
                }
                Ok(sums)
            })
            .collect::<Result<_>>()?;
        let mut totals: Vec<Vec<f64>> = sizes.iter().map(|&s| vec![0.0; s]).collect();
        for part in &partials {
            for (t, p) in totals.iter_mut().zip(part) {
                for (a, b) in t.iter_mut().zip(p) {
                    *a += b;
                }
            }
        }

        let quad_id = format!("volume-{}", self.quad.len());
        let mut tables = Vec::with_capacity(self.requests.len());
        for (r, req) in self.requests.iter().enumerate() {
            let nc = output_components(req);
            let mut entries = BTreeMap::new();
            for (n, w) in words.iter().enumerate() {
                let (Some(mut slot), Some(cap)) = (offsets[n][r], req.limits.i_cap(w.len())) else {
                    continue;
                };
                for i in 0..=cap {
                    let mut v = 0.0;
                    for _ in 0..(i + 1) * nc {
                        v += totals[r][slot].sqrt();
                        slot += 1;
                    }
                    entries.insert((i, w.clone()), v);
                }
            }
            tables.push(DerivativeTable {
                subject: req.subject.clone(),
                limits: req.limits,
                alphabet: self.alphabet.clone(),
                quadrature: quad_id.clone(),
                entries,
            });
        }
        Ok(tables)
    }
}

fn output_components(req: &Request<'_>) -> usize {
    match req.kind {
        TableKind::GradientCommutator => 2,
        _ => req.field.n_components(),
    }
}

/// Words in the order the walk visits them: node first, then children
/// `l ⌢ β` for each letter.
fn dfs_words(depth: usize, alphabet: &[u8]) -> Vec<Word> {
    fn go(w: Word, depth: usize, alphabet: &[u8], out: &mut Vec<Word>) {
        let len = w.len();
        out.push(w.clone());
        if len < depth {
            for &l in alphabet {
                go(w.prepend(l), depth, alphabet, out);
            }
        }
    }
    let mut out = Vec::new();
    go(Word::empty(), depth, alphabet, &mut out);
    out
}

struct WalkContext<'c, 'a> {
    family: &'c KomatsuFamily,
    alphabet: &'c [u8],
    fields: &'c [&'a dyn JetField],
    roots: &'c [(RootKey, usize)],
    plans: &'c [Plan],
    requests: &'c [Request<'a>],
    offsets: &'c [Vec<Option<usize>>],
    field_order: usize,
}

impl WalkContext<'_, '_> {
    fn accumulate(&self, p: Point, weight: f64, sums: &mut [Vec<f64>]) -> Result<()> {
        let mut cache: BTreeMap<(usize, usize), Vec<Jet>> = BTreeMap::new();
        let mut jets = Vec::with_capacity(self.roots.len());
        for (key, _) in self.roots {
            let base = match cache.entry((key.field, key.order)) {
                std::collections::btree_map::Entry::Occupied(e) => e.into_mut(),
                std::collections::btree_map::Entry::Vacant(e) => e.insert(self.fields[key.field].jets(p, key.order)?),
            };
            let base = &base[key.comp];
            jets.push(Some(match key.op {
                RootOp::Identity => base.clone(),
                RootOp::Laplacian => base.laplacian()?,
                RootOp::Diff(a) => base.diff(Axis::BOTH[a])?,
            }));
        }
        let fj = self.family.jets_at(p, self.field_order.max(1));
        let mut node = 0;
        self.visit(&fj, 0, jets, weight, sums, &mut node)
    }

    fn visit(
        &self,
        fj: &FieldJets,
        len: usize,
        jets: Vec<Option<Jet>>,
        weight: f64,
        sums: &mut [Vec<f64>],
        node: &mut usize,
    ) -> Result<()> {
        let here = *node;
        *node += 1;
        for (r, req) in self.requests.iter().enumerate() {
            let (Some(slot), Some(cap)) = (self.offsets[here][r], req.limits.i_cap(len)) else {
                continue;
            };
            let outputs = self.outputs(&self.plans[r], &jets)?;
            let mut s = slot;
            for i in 0..=cap {
                for (a, b) in degree_block(i) {
                    for o in &outputs {
                        let d = o.derivative(a, b);
                        sums[r][s] += weight * d * d;
                        s += 1;
                    }
                }
            }
        }
        let deeper = self.roots.iter().any(|(_, d)| *d > len);
        if !deeper {
            return Ok(());
        }
        for &l in self.alphabet {
            let next = jets
                .iter()
                .zip(self.roots)
                .map(|(j, (_, depth))| match j {
                    Some(j) if *depth > len => fj.apply(l, j).map(Some),
                    _ => Ok(None),
                })
                .collect::<Result<Vec<_>>>()?;
            self.visit(fj, len + 1, next, weight, sums, node)?;
        }
        Ok(())
    }

    fn outputs(&self, plan: &Plan, jets: &[Option<Jet>]) -> Result<Vec<Jet>> {
        let get = |k: usize| jets[k].as_ref().ok_or(Error::OrderExhausted);
        match plan {
            Plan::Derivatives(ks) => ks.iter().map(|&k| get(k).cloned()).collect(),
            Plan::LaplaceCommutator(pairs) => pairs
                .iter()
                .map(|&(u, lap)| get(lap)?.try_sub(&get(u)?.laplacian()?))
                .collect(),
            Plan::GradientCommutator { q, grad } => {
                let tq = get(*q)?;
                Axis::BOTH
                    .iter()
                    .map(|&a| get(grad[a.index()])?.try_sub(&tq.diff(a)?))
                    .collect()
            }
        }
    }
}

/// Single-table convenience wrapper around [`TableBuilder`].
pub fn build_table(
    subject: &str,
    field: &dyn JetField,
    quad: &QuadratureSet,
    family: &KomatsuFamily,
    limits: TableLimits,
) -> Result<DerivativeTable> {
    Ok(TableBuilder::new(family, quad)
        .add(subject, field, limits, TableKind::Derivatives)
        .build()?
        .remove(0))
}

/// `ε₁`, `ε₂` and the truncation order `M`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormWeights {
    pub eps1: f64,
    pub eps2: f64,
    pub m: usize,
}

impl NormWeights {
    pub fn new(eps1: f64, eps2: f64, m: usize) -> Result<Self> {
        for e in [eps1, eps2] {
            if !(0.0..=1.0).contains(&e) {
                return Err(Error::InvalidInput(format!("weight {e} outside [0, 1]")));
            }
        }
        Ok(Self { eps1, eps2, m })
    }

    /// `ε₁ⁱ ε₂ʲ / (i + j)!`.
    pub fn weight(&self, i: usize, j: usize) -> f64 {
        self.eps1.powi(i as i32) * self.eps2.powi(j as i32) / factorial(i + j)
    }
}

pub(crate) fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

fn require(table: &DerivativeTable, i_max: usize, j_max: usize, total: usize) -> Result<()> {
    let l = &table.limits;
    if l.i_max < i_max || l.j_max < j_max || l.max_total < total {
        return Err(Error::TruncationTooSmall {
            have: l.max_total.min(l.i_max).min(l.j_max),
            need: total,
        });
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RhoNorm {
    pub total: f64,
    /// Terms with `i + j ≥ 3`.
    pub high: f64,
    /// Terms with `i + j ≤ 2`.
    pub low: f64,
    /// `a_m = Σ_{i+j=m} ε₁ⁱε₂ʲ/m! · A(i, j)`.
    pub tail: Vec<f64>,
}

/// `Σ_{i+j≤M} ε₁ⁱ ε₂ʲ / (i+j)! · A(i, j)`.
pub fn rho_norm(table: &DerivativeTable, w: &NormWeights) -> Result<RhoNorm> {
    require(table, w.m, w.m, w.m)?;
    let a = table.aggregates();
    let mut tail = vec![0.0; w.m + 1];
    for (m, t) in tail.iter_mut().enumerate() {
        for i in 0..=m {
            *t += w.weight(i, m - i) * a[i][m - i];
        }
    }
    let low: f64 = tail.iter().take(3).sum();
    let high: f64 = tail.iter().skip(3).sum();
    Ok(RhoNorm {
        total: low + high,
        high,
        low,
        tail,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PsiNorm {
    pub total: f64,
    pub velocity: f64,
    /// `Σ_{i≥2} ε₁ⁱε₂ʲ/(i+j)! · A_q(i-1, j)`.
    pub pressure_normal: f64,
    /// `Σ_j ε₁ε₂ʲ/(1+j)! · A_q(0, j)`.
    pub pressure_first: f64,
    /// `Σ_{j≥1} ε₂ʲ/j! · A_q(0, j-1)`.
    pub pressure_tangential: f64,
    /// Contribution of each total order `i + j`.
    pub per_order: Vec<f64>,
}

/// Velocity–pressure norm: the velocity double sum plus three pressure sums
/// that count one derivative of `q` like one derivative of `v`.
pub fn psi_norm(table_v: &DerivativeTable, table_q: &DerivativeTable, w: &NormWeights) -> Result<PsiNorm> {
    let m = w.m;
    require(table_v, m, m, m)?;
    if m > 0 {
        require(table_q, m - 1, m - 1, m - 1)?;
    }
    let av = table_v.aggregates();
    let aq = table_q.aggregates();
    let mut per_order = vec![0.0; m + 1];
    let mut out = PsiNorm {
        total: 0.0,
        velocity: 0.0,
        pressure_normal: 0.0,
        pressure_first: 0.0,
        pressure_tangential: 0.0,
        per_order: Vec::new(),
    };
    for total in 0..=m {
        for i in 0..=total {
            let j = total - i;
            let wt = w.weight(i, j);
            let v = wt * av[i][j];
            out.velocity += v;
            per_order[total] += v;
            let q = match i {
                0 if j >= 1 => {
                    let t = w.eps2.powi(j as i32) / factorial(j) * aq[0][j - 1];
                    out.pressure_tangential += t;
                    t
                }
                0 => 0.0,
                1 => {
                    let t = wt * aq[0][j];
                    out.pressure_first += t;
                    t
                }
                _ => {
                    let t = wt * aq[i - 1][j];
                    out.pressure_normal += t;
                    t
                }
            };
            per_order[total] += q;
        }
    }
    out.total = out.velocity + out.pressure_normal + out.pressure_first + out.pressure_tangential;
    out.per_order = per_order;
    Ok(out)
}

/// How `ε₁` is chosen for each `ε₂` on the certification grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "kebab-case")]
pub enum EpsilonPairing {
    /// `ε₁ = ε₂ / ratio`.
    Tied { ratio: f64 },
    /// Every `ε₁` from the list against every `ε₂`.
    Free { eps1: Vec<f64> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CertificationGrid {
    pub eps2: Vec<f64>,
    pub pairing: EpsilonPairing,
    /// Admissible tail ratio `a_{m+1} / a_m`.
    pub threshold: f64,
}

impl Default for CertificationGrid {
    fn default() -> Self {
        Self {
            eps2: (1..=8).map(|k| 0.5f64.powi(k)).collect(),
            pairing: EpsilonPairing::Tied { ratio: 100.0 },
            threshold: 0.9,
        }
    }
}

impl CertificationGrid {
    fn pairs(&self) -> Vec<(f64, f64)> {
        let mut out = Vec::new();
        for &e2 in &self.eps2 {
            match &self.pairing {
                EpsilonPairing::Tied { ratio } => out.push((e2 / ratio, e2)),
                EpsilonPairing::Free { eps1 } => out.extend(eps1.iter().map(|&e1| (e1, e2))),
            }
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridPoint {
    pub eps1: f64,
    pub eps2: f64,
    /// `a_{m+1} / a_m` for `m = 3, …, M-1`; `0` when both vanish, `∞` when
    /// only the denominator does.
    pub ratios: Vec<f64>,
    pub max_ratio: f64,
    pub certified: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Certification {
    pub m: usize,
    pub points: Vec<GridPoint>,
    /// Certified point with the largest `ε₂` (then the largest `ε₁`).
    pub best: Option<(f64, f64)>,
}

/// Relative size below which a tail term counts as zero.
const TAIL_ZERO: f64 = 1e-14;

/// Tail decay test on every grid point.
pub fn certify_radius(table: &DerivativeTable, grid: &CertificationGrid) -> Result<Certification> {
    if table.is_empty() {
        return Err(Error::EmptyTable);
    }
    let m = table.limits.max_total.min(table.limits.i_max).min(table.limits.j_max);
    if m < 5 {
        return Err(Error::InsufficientOrders { have: m, need: 5 });
    }
    let a = table.aggregates();
    let scale = a.iter().flatten().fold(0.0f64, |s, v| s.max(*v));
    let mut points = Vec::new();
    for (eps1, eps2) in grid.pairs() {
        let w = NormWeights { eps1, eps2, m };
        let tail: Vec<f64> = (0..=m)
            .map(|k| (0..=k).map(|i| w.weight(i, k - i) * a[i][k - i]).sum())
            .collect();
        // Zero tests are relative to the unweighted table scale times the
        // weight of that order, so tiny ε do not turn round-off into signal.
        let zero = |k: usize| {
            let wmax = (0..=k).map(|i| w.weight(i, k - i)).fold(0.0, f64::max);
            tail[k] <= TAIL_ZERO * scale * wmax
        };
        let ratios: Vec<f64> = (3..m)
            .map(|k| match (zero(k), zero(k + 1)) {
                (_, true) => 0.0,
                (true, false) => f64::INFINITY,
                _ => tail[k + 1] / tail[k],
            })
            .collect();
        let max_ratio = ratios.iter().cloned().fold(0.0, f64::max);
        points.push(GridPoint {
            eps1,
            eps2,
            ratios,
            max_ratio,
            certified: max_ratio <= grid.threshold,
        });
    }
    let best = points
        .iter()
        .filter(|p| p.certified)
        .map(|p| (p.eps1, p.eps2))
        .max_by(|a, b| a.1.total_cmp(&b.1).then(a.0.total_cmp(&b.0)));
    Ok(Certification { m, points, best })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{AnalyticDomain, DomainSpec};
    use crate::eval::PolyVector;
    use crate::poly::Poly;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    fn disk_setup() -> (KomatsuFamily, QuadratureSet) {
        let d = AnalyticDomain::new(&DomainSpec::Disk).unwrap();
        (KomatsuFamily::build(&d).unwrap(), d.volume_quadrature(12, 48).unwrap())
    }

    #[test]
    fn constant_subject() {
        let (fam, q) = disk_setup();
        let t = build_table("c", &Poly::constant(-3.0), &q, &fam, TableLimits::triangular(5)).unwrap();
        assert_abs_diff_eq!(t.entry(0, &Word::empty()).unwrap(), 3.0 * PI.sqrt(), epsilon = 1e-12);
        assert!(t.entries().filter(|(i, w, _)| *i > 0 || !w.is_empty()).all(|(_, _, v)| v == 0.0));
        let r = rho_norm(&t, &NormWeights::new(0.5, 0.5, 5).unwrap()).unwrap();
        assert_abs_diff_eq!(r.total, 3.0 * PI.sqrt(), epsilon = 1e-12);
        assert!(r.tail[1..].iter().all(|&a| a == 0.0));
    }

    #[test]
    fn linear_subject_entries() {
        let (fam, q) = disk_setup();
        let t = build_table("u", &Poly::x(), &q, &fam, TableLimits::rectangular(2, 2)).unwrap();
        assert_abs_diff_eq!(t.entry(1, &Word::empty()).unwrap(), PI.sqrt(), epsilon = 1e-12);
        let w3: Word = "3".parse().unwrap();
        assert_abs_diff_eq!(t.entry(0, &w3).unwrap(), (PI / 4.0).sqrt(), epsilon = 1e-12);
        assert_eq!(t.len(), 3 * 13);
    }

    #[test]
    fn limits_and_aggregates() {
        let (fam, q) = disk_setup();
        let f = PolyVector(vec![Poly::from_terms([(2, 1, 1.0)]), Poly::y()]);
        let t = build_table("w", &f, &q, &fam, TableLimits::triangular(3)).unwrap();
        assert!(t.entries().all(|(i, w, _)| i + w.len() <= 3));
        let words2: f64 = Word::all_of_length(2, &[1, 2, 3])
            .iter()
            .map(|w| t.entry(1, w).unwrap())
            .sum();
        assert_abs_diff_eq!(t.aggregate(1, 2).unwrap(), words2, epsilon = 1e-12);
        assert!(matches!(t.aggregate(2, 2), Err(Error::TruncationTooSmall { .. })));
    }

    #[test]
    fn csv_round_trip() {
        let (fam, q) = disk_setup();
        let t = build_table("u", &Poly::from_terms([(3, 0, 1.0), (0, 1, 2.0)]), &q, &fam, TableLimits::triangular(3)).unwrap();
        let back = DerivativeTable::from_csv(&t.to_csv()).unwrap();
        assert_eq!(back.limits, t.limits);
        assert_eq!(back.subject, "u");
        for (i, w, v) in t.entries() {
            assert_eq!(back.entry(i, w), Some(v));
        }
        assert!(DerivativeTable::from_csv("a,b\n").is_err());
    }

    #[test]
    fn rotation_commutators_on_disk() {
        let (fam, q) = disk_setup();
        let u = Poly::from_terms([(4, 1, 1.0), (0, 3, -2.0), (1, 1, 0.5)]);
        let tables = TableBuilder::new(&fam, &q)
            .alphabet(&[3])
            .unwrap()
            .add("lap", &u, TableLimits::triangular(3), TableKind::LaplaceCommutator)
            .add("grad", &Poly::x(), TableLimits::triangular(3), TableKind::GradientCommutator)
            .build()
            .unwrap();
        assert!(tables[0].entries().all(|(_, _, v)| v < 1e-11));
        // Rotation does not commute with ∇: [T₃, ∇]x = (0, -1).
        let w3: Word = "3".parse().unwrap();
        assert_abs_diff_eq!(tables[1].entry(0, &w3).unwrap(), PI.sqrt(), epsilon = 1e-12);
        assert_eq!(tables[1].entry(0, &Word::empty()), Some(0.0));
    }

    #[test]
    fn laplace_commutator_of_first_field() {
        // [T₁, Δ]x² = 8x on the disk.
        let (fam, q) = disk_setup();
        let t = TableBuilder::new(&fam, &q)
            .add("c", &Poly::from_terms([(2, 0, 1.0)]), TableLimits::triangular(2), TableKind::LaplaceCommutator)
            .build()
            .unwrap()
            .remove(0);
        let w1: Word = "1".parse().unwrap();
        assert_abs_diff_eq!(t.entry(0, &w1).unwrap(), 8.0 * (PI / 4.0).sqrt(), epsilon = 1e-11);
        assert_abs_diff_eq!(t.entry(0, &Word::empty()).unwrap(), 0.0);
    }

    #[test]
    fn psi_special_cases() {
        let (fam, q) = disk_setup();
        let lim = TableLimits::triangular(4);
        let zero_v = build_table("v", &PolyVector(vec![Poly::zero(), Poly::zero()]), &q, &fam, lim).unwrap();
        let one = build_table("q", &Poly::constant(1.0), &q, &fam, lim).unwrap();
        let w = NormWeights::new(0.25, 0.5, 4).unwrap();
        let psi = psi_norm(&zero_v, &one, &w).unwrap();
        assert_abs_diff_eq!(psi.pressure_tangential, 0.5 * PI.sqrt(), epsilon = 1e-12);
        assert_abs_diff_eq!(psi.pressure_first, 0.25 * PI.sqrt(), epsilon = 1e-12);
        assert_eq!(psi.pressure_normal, 0.0);
        let v = build_table("v", &PolyVector(vec![Poly::y(), Poly::x().scale(-1.0)]), &q, &fam, lim).unwrap();
        let zero_q = build_table("q", &Poly::zero(), &q, &fam, lim).unwrap();
        let psi = psi_norm(&v, &zero_q, &w).unwrap();
        assert_abs_diff_eq!(psi.total, rho_norm(&v, &w).unwrap().total, epsilon = 1e-14);
    }

    #[test]
    fn polynomial_is_certified_everywhere() {
        let (fam, q) = disk_setup();
        let t = build_table("u", &Poly::from_terms([(2, 0, 1.0), (0, 1, 1.0)]), &q, &fam, TableLimits::triangular(6)).unwrap();
        let c = certify_radius(&t, &CertificationGrid::default()).unwrap();
        assert!(c.points.iter().all(|p| p.certified));
        assert_eq!(c.best, Some((0.005, 0.5)));
        let empty = DerivativeTable::from_entries("e", TableLimits::triangular(6), vec![1], "", BTreeMap::new());
        assert_eq!(certify_radius(&empty, &CertificationGrid::default()), Err(Error::EmptyTable));
        let short = build_table("u", &Poly::x(), &q, &fam, TableLimits::triangular(4)).unwrap();
        assert!(matches!(
            certify_radius(&short, &CertificationGrid::default()),
            Err(Error::InsufficientOrders { .. })
        ));
    }
}
