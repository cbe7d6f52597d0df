//! Multivectors `Λ_k h` and multiforms `Λ^k h` over the frame of `H^n`.
//!
//! Basis elements are indexed by strictly increasing, one-based index sets
//! `I ⊆ {1..2n+1}` where positions `1..n` are `X_j` (resp. `dx_j`),
//! `n+1..2n` are `Y_j` (resp. `dy_j`) and `2n+1` is `T` (resp. the contact
//! form `θ`). Both bases are taken orthonormal and dual to each other.

use std::collections::BTreeMap;
use std::fmt;
use std::marker::PhantomData;

use crate::error::{Error, Result};
use crate::frame::{change_basis, BasisChange, FrameIndex, FrameVector};
use crate::group::GroupElement;

/// Marker for `Λ_k h`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Vectors {}

/// Marker for `Λ^k h`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Forms {}

/// A homogeneous element of grade `k`, stored sparsely.
pub struct Graded<K> {
    n: usize,
    grade: usize,
    terms: BTreeMap<Vec<usize>, f64>,
    _kind: PhantomData<K>,
}

pub type MultiVector = Graded<Vectors>;
pub type MultiForm = Graded<Forms>;

impl<K> Clone for Graded<K> {
    fn clone(&self) -> Self {
        Self {
            n: self.n,
            grade: self.grade,
            terms: self.terms.clone(),
            _kind: PhantomData,
        }
    }
}

impl<K> PartialEq for Graded<K> {
    fn eq(&self, other: &Self) -> bool {
        let nonzero = |g: &Self| -> Vec<(Vec<usize>, f64)> {
            g.terms
                .iter()
                .filter(|(_, v)| **v != 0.0)
                .map(|(k, v)| (k.clone(), *v))
                .collect()
        };
        self.n == other.n && self.grade == other.grade && nonzero(self) == nonzero(other)
    }
}

impl<K> fmt::Debug for Graded<K> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Graded")
            .field("n", &self.n)
            .field("grade", &self.grade)
            .field("terms", &self.terms)
            .finish()
    }
}

/// Sorts `indices`, returning the permutation sign, or `None` on a repeat.
fn sort_with_sign(indices: &[usize]) -> Option<(Vec<usize>, f64)> {
    let mut inversions = 0usize;
    for i in 0..indices.len() {
        for j in i + 1..indices.len() {
            match indices[i].cmp(&indices[j]) {
                std::cmp::Ordering::Greater => inversions += 1,
                std::cmp::Ordering::Equal => return None,
                std::cmp::Ordering::Less => {}
            }
        }
    }
    let mut sorted = indices.to_vec();
    sorted.sort_unstable();
    let sign = if inversions % 2 == 0 { 1.0 } else { -1.0 };
    Some((sorted, sign))
}

/// Complement `I*` of an increasing index set and the Hodge sign
/// `(-1)^σ(I)`, where `σ(I)` counts pairs `(i_h, i*_l)` with `i_h > i*_l`.
pub fn hodge_basis(n: usize, indices: &[usize]) -> (Vec<usize>, f64) {
    let complement: Vec<usize> = (1..=2 * n + 1).filter(|i| !indices.contains(i)).collect();
    let sigma = indices
        .iter()
        .map(|&i| complement.iter().filter(|&&c| i > c).count())
        .sum::<usize>();
    let sign = if sigma % 2 == 0 { 1.0 } else { -1.0 };
    (complement, sign)
}

impl<K> Graded<K> {
    pub fn zero(n: usize, grade: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::ZeroDimension);
        }
        if grade == 0 || grade > 2 * n + 1 {
            return Err(Error::GradeOutOfRange {
                grade,
                max: 2 * n + 1,
            });
        }
        Ok(Self {
            n,
            grade,
            terms: BTreeMap::new(),
            _kind: PhantomData,
        })
    }

    /// The basis element `W_{i_1} ∧ ... ∧ W_{i_k}`; indices may come in any
    /// order and are normalized with the permutation sign.
    pub fn basis(n: usize, indices: &[usize]) -> Result<Self> {
        let mut out = Self::zero(n, indices.len())?;
        out.add_term(indices, 1.0)?;
        Ok(out)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn grade(&self) -> usize {
        self.grade
    }

    /// Adds `coeff · W_I`, normalizing the order of `I`.
    pub fn add_term(&mut self, indices: &[usize], coeff: f64) -> Result<()> {
        if indices.len() != self.grade {
            return Err(Error::GradeMismatch {
                left: self.grade,
                right: indices.len(),
            });
        }
        if indices.iter().any(|&i| i == 0 || i > 2 * self.n + 1) {
            return Err(Error::InvalidIndexSet(indices.to_vec()));
        }
        let (sorted, sign) =
            sort_with_sign(indices).ok_or_else(|| Error::InvalidIndexSet(indices.to_vec()))?;
        *self.terms.entry(sorted).or_insert(0.0) += sign * coeff;
        Ok(())
    }

    pub fn with_term(mut self, indices: &[usize], coeff: f64) -> Result<Self> {
        self.add_term(indices, coeff)?;
        Ok(self)
    }

    /// Coefficient on the basis element with increasing index set `I`.
    pub fn coefficient(&self, indices: &[usize]) -> f64 {
        self.terms.get(indices).copied().unwrap_or(0.0)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&[usize], f64)> {
        self.terms.iter().map(|(k, v)| (k.as_slice(), *v))
    }

    fn check_compatible(&self, other: &Self) -> Result<()> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                found: other.n,
            });
        }
        if self.grade != other.grade {
            return Err(Error::GradeMismatch {
                left: self.grade,
                right: other.grade,
            });
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        let mut out = self.clone();
        for (k, v) in &other.terms {
            *out.terms.entry(k.clone()).or_insert(0.0) += v;
        }
        Ok(out)
    }

    pub fn scale(&self, k: f64) -> Self {
        let mut out = self.clone();
        out.terms.values_mut().for_each(|v| *v *= k);
        out
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale(-1.0))
    }

    /// Largest coefficient difference over the union of supports.
    pub fn max_abs_diff(&self, other: &Self) -> Result<f64> {
        Ok(self
            .sub(other)?
            .terms
            .values()
            .fold(0.0, |m, v| m.max(v.abs())))
    }

    pub fn wedge(&self, other: &Self) -> Result<Self> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                found: other.n,
            });
        }
        let mut out = Self::zero(self.n, self.grade + other.grade)?;
        for (i, a) in &self.terms {
            for (j, b) in &other.terms {
                let joined: Vec<usize> = i.iter().chain(j).copied().collect();
                if let Some((sorted, sign)) = sort_with_sign(&joined) {
                    *out.terms.entry(sorted).or_insert(0.0) += sign * a * b;
                }
            }
        }
        Ok(out)
    }

    /// The Hodge operator `Λ_k → Λ_{2n+1-k}`, `*W_I = (-1)^σ(I) W_{I*}`.
    pub fn hodge(&self) -> Result<Self> {
        if self.grade > 2 * self.n {
            return Err(Error::GradeOutOfRange {
                grade: self.grade,
                max: 2 * self.n,
            });
        }
        let mut out = Self::zero(self.n, 2 * self.n + 1 - self.grade)?;
        for (i, v) in &self.terms {
            let (complement, sign) = hodge_basis(self.n, i);
            *out.terms.entry(complement).or_insert(0.0) += sign * v;
        }
        Ok(out)
    }
}

impl MultiVector {
    pub fn frame(n: usize, which: FrameIndex) -> Self {
        Self::basis(n, &[which.position(n)]).expect("frame index within range")
    }

    pub fn from_frame_vector(v: &FrameVector) -> Self {
        let n = v.dim();
        let mut out = Self::zero(n, 1).expect("n >= 1");
        for (pos, c) in v.components().into_iter().enumerate() {
            if c != 0.0 {
                out.terms.insert(vec![pos + 1], c);
            }
        }
        out
    }
}

impl MultiForm {
    pub fn dx(n: usize, j: usize) -> Self {
        Self::basis(n, &[FrameIndex::X(j).position(n)]).expect("dx index within range")
    }

    pub fn dy(n: usize, j: usize) -> Self {
        Self::basis(n, &[FrameIndex::Y(j).position(n)]).expect("dy index within range")
    }

    /// The contact form `θ = dt - 1/2 Σ (x_j dy_j - y_j dx_j)`, dual to `T`.
    pub fn theta(n: usize) -> Self {
        Self::basis(n, &[2 * n + 1]).expect("n >= 1")
    }

    /// Evaluates a one-form on a coordinate-basis vector attached at `p`.
    /// The vector is moved to the frame first.
    pub fn eval_coordinate_vector(&self, p: &GroupElement, v: &[f64]) -> Result<f64> {
        if self.grade != 1 {
            return Err(Error::GradeMismatch {
                left: self.grade,
                right: 1,
            });
        }
        if p.dim() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                found: p.dim(),
            });
        }
        let frame = change_basis(v, p, BasisChange::EuclideanToFrame)?;
        Ok(self
            .terms
            .iter()
            .map(|(i, c)| c * frame[i[0] - 1])
            .sum())
    }
}

/// `⟨ω | v⟩` with dual orthonormal bases: `⟨θ_I | W_J⟩ = δ_IJ`.
pub fn pair(form: &MultiForm, v: &MultiVector) -> Result<f64> {
    if form.n != v.n {
        return Err(Error::DimensionMismatch {
            expected: form.n,
            found: v.n,
        });
    }
    if form.grade != v.grade {
        return Err(Error::GradeMismatch {
            left: form.grade,
            right: v.grade,
        });
    }
    Ok(form
        .terms
        .iter()
        .map(|(i, c)| c * v.coefficient(i))
        .sum())
}
