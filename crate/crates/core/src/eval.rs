//! Fields that can report their Taylor jets at arbitrary points.

use crate::error::{Error, Result};
use crate::jet::{Axis, Jet};
use crate::poly::Poly;
use crate::Point;

/// A (possibly vector-valued) field with exact jets of any order.
pub trait JetField: Sync {
    fn n_components(&self) -> usize;

    /// One jet per component, each of the given order.
    fn jets(&self, p: Point, order: usize) -> Result<Vec<Jet>>;

    /// Point values, one per component.
    fn values(&self, p: Point) -> Result<Vec<f64>> {
        Ok(self.jets(p, 0)?.iter().map(Jet::value).collect())
    }
}

impl JetField for Poly {
    fn n_components(&self) -> usize {
        1
    }

    fn jets(&self, p: Point, order: usize) -> Result<Vec<Jet>> {
        Ok(vec![self.jet(p, order)])
    }

    fn values(&self, p: Point) -> Result<Vec<f64>> {
        Ok(vec![self.eval(p)])
    }
}

/// A vector of polynomial components.
#[derive(Clone, Debug, PartialEq)]
pub struct PolyVector(pub Vec<Poly>);

impl JetField for PolyVector {
    fn n_components(&self) -> usize {
        self.0.len()
    }

    fn jets(&self, p: Point, order: usize) -> Result<Vec<Jet>> {
        Ok(self.0.iter().map(|c| c.jet(p, order)).collect())
    }
}

/// Gradient of a scalar field.
pub struct Gradient<'a, F: ?Sized>(pub &'a F);

impl<F: JetField + ?Sized> JetField for Gradient<'_, F> {
    fn n_components(&self) -> usize {
        2
    }

    fn jets(&self, p: Point, order: usize) -> Result<Vec<Jet>> {
        let mut scalar = self.0.jets(p, order + 1)?;
        if scalar.len() != 1 {
            return Err(Error::InvalidInput("gradient of a non-scalar field".into()));
        }
        let s = scalar.pop().expect("one component");
        Axis::BOTH.iter().map(|&a| s.diff(a)).collect()
    }
}

/// Componentwise `a + sign·b`.
pub struct Combination<'a, A: ?Sized, B: ?Sized> {
    pub a: &'a A,
    pub b: &'a B,
    pub sign: f64,
}

impl<A: JetField + ?Sized, B: JetField + ?Sized> JetField for Combination<'_, A, B> {
    fn n_components(&self) -> usize {
        self.a.n_components()
    }

    fn jets(&self, p: Point, order: usize) -> Result<Vec<Jet>> {
        let ja = self.a.jets(p, order)?;
        let jb = self.b.jets(p, order)?;
        if ja.len() != jb.len() {
            return Err(Error::InvalidInput("component count mismatch".into()));
        }
        ja.iter()
            .zip(&jb)
            .map(|(x, y)| x.try_add(&y.scale(self.sign)))
            .collect()
    }
}

/// `c · field`.
pub struct Scaled<'a, F: ?Sized>(pub f64, pub &'a F);

impl<F: JetField + ?Sized> JetField for Scaled<'_, F> {
    fn n_components(&self) -> usize {
        self.1.n_components()
    }

    fn jets(&self, p: Point, order: usize) -> Result<Vec<Jet>> {
        Ok(self.1.jets(p, order)?.iter().map(|j| j.scale(self.0)).collect())
    }
}

/// Adapter for closures.
pub struct FnField<F> {
    pub components: usize,
    pub f: F,
}

impl<F> JetField for FnField<F>
where
    F: Fn(Point, usize) -> Result<Vec<Jet>> + Sync,
{
    fn n_components(&self) -> usize {
        self.components
    }

    fn jets(&self, p: Point, order: usize) -> Result<Vec<Jet>> {
        (self.f)(p, order)
    }
}

/// Divergence of a two-component field as a jet one order lower.
pub fn divergence(jets: &[Jet]) -> Result<Jet> {
    if jets.len() != 2 {
        return Err(Error::InvalidInput("divergence needs two components".into()));
    }
    jets[0].diff(Axis::X)?.try_add(&jets[1].diff(Axis::Y)?)
}
