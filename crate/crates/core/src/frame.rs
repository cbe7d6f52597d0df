//! The left-invariant frame `X_j = d/dx_j - y_j/2 d/dt`, `Y_j = d/dy_j + x_j/2 d/dt`,
//! `T = d/dt`, and vectors expressed in it.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::group::GroupElement;

/// One element of the frame. `X(j)` and `Y(j)` are zero-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FrameIndex {
    X(usize),
    Y(usize),
    T,
}

impl FrameIndex {
    /// One-based position `W_1..W_{2n+1}` = `X_1..X_n, Y_1..Y_n, T`.
    pub fn position(self, n: usize) -> usize {
        match self {
            Self::X(j) => j + 1,
            Self::Y(j) => n + j + 1,
            Self::T => 2 * n + 1,
        }
    }

    pub fn from_position(n: usize, pos: usize) -> Option<Self> {
        match pos {
            p if (1..=n).contains(&p) => Some(Self::X(p - 1)),
            p if (n + 1..=2 * n).contains(&p) => Some(Self::Y(p - n - 1)),
            p if p == 2 * n + 1 => Some(Self::T),
            _ => None,
        }
    }

    /// All `2n + 1` frame elements in position order.
    pub fn all(n: usize) -> impl Iterator<Item = Self> {
        (1..=2 * n + 1).map(move |p| Self::from_position(n, p).unwrap())
    }
}

/// A tangent vector `sum a_j X_j + b_j Y_j + c T`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameVector {
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub c: f64,
}

impl FrameVector {
    pub fn new(a: Vec<f64>, b: Vec<f64>, c: f64) -> Result<Self> {
        if a.is_empty() {
            return Err(Error::ZeroDimension);
        }
        if a.len() != b.len() {
            return Err(Error::DimensionMismatch {
                expected: a.len(),
                found: b.len(),
            });
        }
        Ok(Self { a, b, c })
    }

    pub fn horizontal(a: Vec<f64>, b: Vec<f64>) -> Result<Self> {
        Self::new(a, b, 0.0)
    }

    pub fn h1(a: f64, b: f64, c: f64) -> Self {
        Self {
            a: vec![a],
            b: vec![b],
            c,
        }
    }

    pub fn zero(n: usize) -> Self {
        Self {
            a: vec![0.0; n],
            b: vec![0.0; n],
            c: 0.0,
        }
    }

    pub fn basis(n: usize, which: FrameIndex) -> Self {
        let mut v = Self::zero(n);
        match which {
            FrameIndex::X(j) => v.a[j] = 1.0,
            FrameIndex::Y(j) => v.b[j] = 1.0,
            FrameIndex::T => v.c = 1.0,
        }
        v
    }

    /// Components `(a_1..a_n, b_1..b_n, c)`.
    pub fn from_components(components: &[f64]) -> Result<Self> {
        if components.len() < 3 || components.len() % 2 == 0 {
            return Err(Error::InvalidParameter(format!(
                "expected 2n+1 components, got {}",
                components.len()
            )));
        }
        let n = (components.len() - 1) / 2;
        Self::new(
            components[..n].to_vec(),
            components[n..2 * n].to_vec(),
            components[2 * n],
        )
    }

    pub fn dim(&self) -> usize {
        self.a.len()
    }

    pub fn components(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(2 * self.dim() + 1);
        out.extend_from_slice(&self.a);
        out.extend_from_slice(&self.b);
        out.push(self.c);
        out
    }

    pub fn component(&self, which: FrameIndex) -> f64 {
        match which {
            FrameIndex::X(j) => self.a[j],
            FrameIndex::Y(j) => self.b[j],
            FrameIndex::T => self.c,
        }
    }

    pub fn is_horizontal(&self) -> bool {
        self.c == 0.0
    }

    /// Drops the `T` component.
    pub fn horizontal_part(&self) -> Self {
        Self {
            a: self.a.clone(),
            b: self.b.clone(),
            c: 0.0,
        }
    }

    fn check_dim(&self, other: &Self) -> Result<()> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        Ok(())
    }

    /// Scalar product making the whole frame orthonormal.
    pub fn dot(&self, other: &Self) -> Result<f64> {
        self.check_dim(other)?;
        Ok(self.horizontal_dot_unchecked(other) + self.c * other.c)
    }

    /// `<v, w>_H`, defined on horizontal vectors only.
    pub fn dot_h(&self, other: &Self) -> Result<f64> {
        self.check_dim(other)?;
        if !self.is_horizontal() || !other.is_horizontal() {
            return Err(Error::NotHorizontal);
        }
        Ok(self.horizontal_dot_unchecked(other))
    }

    fn horizontal_dot_unchecked(&self, other: &Self) -> f64 {
        let a: f64 = self.a.iter().zip(&other.a).map(|(u, v)| u * v).sum();
        let b: f64 = self.b.iter().zip(&other.b).map(|(u, v)| u * v).sum();
        a + b
    }

    pub fn norm(&self) -> f64 {
        self.horizontal_norm().hypot(self.c)
    }

    /// Norm of the horizontal part.
    pub fn horizontal_norm(&self) -> f64 {
        self.horizontal_dot_unchecked(self).sqrt()
    }

    pub fn scale(&self, k: f64) -> Self {
        Self {
            a: self.a.iter().map(|v| k * v).collect(),
            b: self.b.iter().map(|v| k * v).collect(),
            c: k * self.c,
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_dim(other)?;
        Ok(Self {
            a: self.a.iter().zip(&other.a).map(|(u, v)| u + v).collect(),
            b: self.b.iter().zip(&other.b).map(|(u, v)| u + v).collect(),
            c: self.c + other.c,
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale(-1.0))
    }

    /// `self x other` as the formal determinant with first row `(X, Y, T)`.
    pub fn cross(&self, other: &Self) -> Result<Self> {
        if self.dim() != 1 {
            return Err(Error::RequiresH1(self.dim()));
        }
        self.check_dim(other)?;
        let u = [self.a[0], self.b[0], self.c];
        let v = [other.a[0], other.b[0], other.c];
        let w = cross3(u, v);
        Ok(Self::h1(w[0], w[1], w[2]))
    }

    /// Expresses the vector in the coordinate basis at `p`.
    pub fn to_euclidean(&self, p: &GroupElement) -> Result<Vec<f64>> {
        change_basis(&self.components(), p, BasisChange::FrameToEuclidean)
    }

    /// Frame components of a coordinate vector attached at `p`.
    pub fn from_euclidean(v: &[f64], p: &GroupElement) -> Result<Self> {
        Self::from_components(&change_basis(v, p, BasisChange::EuclideanToFrame)?)
    }
}

pub(crate) fn cross3(u: [f64; 3], v: [f64; 3]) -> [f64; 3] {
    [
        u[1] * v[2] - u[2] * v[1],
        u[2] * v[0] - u[0] * v[2],
        u[0] * v[1] - u[1] * v[0],
    ]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BasisChange {
    EuclideanToFrame,
    FrameToEuclidean,
}

/// Converts `2n + 1` vector components between the coordinate basis
/// `(d/dx, d/dy, d/dt)` and the frame `(X, Y, T)` at `p`.
///
/// Only the last component changes: `c = w + <y, u>/2 - <x, v>/2`.
pub fn change_basis(v: &[f64], p: &GroupElement, direction: BasisChange) -> Result<Vec<f64>> {
    let n = p.dim();
    if v.len() != 2 * n + 1 {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: v.len().saturating_sub(1) / 2,
        });
    }
    let twist: f64 = (0..n)
        .map(|j| p.y()[j] * v[j] - p.x()[j] * v[n + j])
        .sum::<f64>()
        * 0.5;
    let mut out = v.to_vec();
    match direction {
        BasisChange::EuclideanToFrame => out[2 * n] += twist,
        BasisChange::FrameToEuclidean => out[2 * n] -= twist,
    }
    Ok(out)
}
