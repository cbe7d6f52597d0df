//! Scalar fields on `H^n`, frame derivatives and the horizontal gradient.
//!
//! Polynomial fields differentiate exactly, term by term. Opaque fields use
//! caller-supplied derivatives when present and central differences
//! otherwise. All numerics here assume `C^1` Euclidean data; fields that are
//! only `C^1_H` are out of reach of these schemes.

use std::collections::btree_map::Entry;
use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::frame::{FrameIndex, FrameVector};
use crate::group::{Automorphism, GroupElement};

/// Sparse polynomial in the coordinates `(x_1..x_n, y_1..y_n, t)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial {
    n: usize,
    terms: BTreeMap<Vec<u32>, f64>,
}

impl Polynomial {
    pub fn zero(n: usize) -> Self {
        Self {
            n,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(n: usize, c: f64) -> Self {
        Self::zero(n).with_term(vec![0; 2 * n + 1], c)
    }

    /// The coordinate function matching a frame element (`x_j`, `y_j` or `t`).
    pub fn coordinate(n: usize, which: FrameIndex) -> Self {
        let mut e = vec![0; 2 * n + 1];
        e[which.position(n) - 1] = 1;
        Self::zero(n).with_term(e, 1.0)
    }

    /// Builds from `(exponents, coefficient)` pairs, merging repeats.
    pub fn from_terms(n: usize, terms: impl IntoIterator<Item = (Vec<u32>, f64)>) -> Result<Self> {
        let mut out = Self::zero(n);
        for (e, c) in terms {
            if e.len() != 2 * n + 1 {
                return Err(Error::InvalidParameter(format!(
                    "monomial has {} exponents, expected {}",
                    e.len(),
                    2 * n + 1
                )));
            }
            out.add_term(e, c);
        }
        Ok(out)
    }

    fn with_term(mut self, e: Vec<u32>, c: f64) -> Self {
        self.add_term(e, c);
        self
    }

    fn add_term(&mut self, e: Vec<u32>, c: f64) {
        if c == 0.0 {
            return;
        }
        match self.terms.entry(e) {
            Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if *o.get() == 0.0 {
                    o.remove();
                }
            }
            Entry::Vacant(v) => {
                v.insert(c);
            }
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn terms(&self) -> impl Iterator<Item = (&[u32], f64)> {
        self.terms.iter().map(|(e, c)| (e.as_slice(), *c))
    }

    pub fn degree(&self) -> u32 {
        self.terms.keys().map(|e| e.iter().sum()).max().unwrap_or(0)
    }

    pub fn eval(&self, coords: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|(e, c)| {
                e.iter()
                    .zip(coords)
                    .fold(*c, |acc, (&k, &v)| acc * v.powi(k as i32))
            })
            .sum()
    }

    /// Partial derivative along coordinate `var` (zero-based).
    pub fn partial(&self, var: usize) -> Self {
        let mut out = Self::zero(self.n);
        for (e, c) in &self.terms {
            if e[var] > 0 {
                let mut d = e.clone();
                d[var] -= 1;
                out.add_term(d, c * e[var] as f64);
            }
        }
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.add_term(e.clone(), *c);
        }
        out
    }

    pub fn scale(&self, k: f64) -> Self {
        let mut out = Self::zero(self.n);
        for (e, c) in &self.terms {
            out.add_term(e.clone(), k * c);
        }
        out
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = Self::zero(self.n);
        for (e, c) in &self.terms {
            for (f, d) in &other.terms {
                let sum = e.iter().zip(f).map(|(a, b)| a + b).collect();
                out.add_term(sum, c * d);
            }
        }
        out
    }

    fn pow(&self, k: u32) -> Self {
        (0..k).fold(Self::constant(self.n, 1.0), |acc, _| acc.mul(self))
    }

    /// `X_j f`, `Y_j f` or `T f` as a polynomial.
    pub fn frame_derivative(&self, which: FrameIndex) -> Self {
        let n = self.n;
        let dt = self.partial(2 * n);
        match which {
            FrameIndex::X(j) => self
                .partial(j)
                .add(&Self::coordinate(n, FrameIndex::Y(j)).mul(&dt).scale(-0.5)),
            FrameIndex::Y(j) => self
                .partial(n + j)
                .add(&Self::coordinate(n, FrameIndex::X(j)).mul(&dt).scale(0.5)),
            FrameIndex::T => dt,
        }
    }

    /// Substitutes polynomial images for every coordinate.
    fn substitute(&self, images: &[Self]) -> Self {
        let mut out = Self::zero(self.n);
        for (e, c) in &self.terms {
            let term = e
                .iter()
                .zip(images)
                .fold(Self::constant(self.n, *c), |acc, (&k, img)| acc.mul(&img.pow(k)));
            out = out.add(&term);
        }
        out
    }

    /// `f ∘ m` for a left translation or dilation.
    pub fn compose(&self, m: &Automorphism) -> Result<Self> {
        m.validate()?;
        let n = self.n;
        let coord = |w| Self::coordinate(n, w);
        let images: Vec<Self> = match m {
            Automorphism::Dilation(r) => FrameIndex::all(n)
                .map(|w| match w {
                    FrameIndex::T => coord(w).scale(r * r),
                    _ => coord(w).scale(*r),
                })
                .collect(),
            Automorphism::LeftTranslation(q) => {
                if q.dim() != n {
                    return Err(Error::DimensionMismatch {
                        expected: n,
                        found: q.dim(),
                    });
                }
                let mut images = Vec::with_capacity(2 * n + 1);
                for j in 0..n {
                    images.push(coord(FrameIndex::X(j)).add(&Self::constant(n, q.x()[j])));
                }
                for j in 0..n {
                    images.push(coord(FrameIndex::Y(j)).add(&Self::constant(n, q.y()[j])));
                }
                let mut t = coord(FrameIndex::T).add(&Self::constant(n, q.t()));
                for j in 0..n {
                    t = t
                        .add(&coord(FrameIndex::Y(j)).scale(0.5 * q.x()[j]))
                        .add(&coord(FrameIndex::X(j)).scale(-0.5 * q.y()[j]));
                }
                images.push(t);
                images
            }
        };
        Ok(self.substitute(&images))
    }

    /// Parses the line format `coeff i_1..i_n j_1..j_n k`, one term per line,
    /// meaning `coeff · x^i y^j t^k`. Blank lines and `#` comments are skipped.
    /// `n` is inferred from the first term.
    pub fn parse(text: &str) -> Result<Self> {
        let mut n = None;
        let mut out: Option<Self> = None;
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() < 4 || fields.len() % 2 != 0 {
                return Err(Error::Parse {
                    line: line_no,
                    message: format!(
                        "expected `coeff` followed by 2n+1 exponents, got {} fields",
                        fields.len()
                    ),
                });
            }
            let this_n = (fields.len() - 2) / 2;
            match n {
                None => n = Some(this_n),
                Some(m) if m != this_n => {
                    return Err(Error::Parse {
                        line: line_no,
                        message: format!("term has n = {this_n}, earlier terms have n = {m}"),
                    })
                }
                _ => {}
            }
            let coeff: f64 = fields[0].parse().map_err(|_| Error::Parse {
                line: line_no,
                message: format!("invalid coefficient `{}`", fields[0]),
            })?;
            if !coeff.is_finite() {
                return Err(Error::Parse {
                    line: line_no,
                    message: "coefficient must be finite".into(),
                });
            }
            let exps = fields[1..]
                .iter()
                .map(|f| {
                    f.parse::<u32>().map_err(|_| Error::Parse {
                        line: line_no,
                        message: format!("invalid exponent `{f}`"),
                    })
                })
                .collect::<Result<Vec<u32>>>()?;
            out.get_or_insert_with(|| Self::zero(this_n)).add_term(exps, coeff);
        }
        out.ok_or(Error::Parse {
            line: 0,
            message: "no terms".into(),
        })
    }
}

type EvalFn = dyn Fn(&[f64]) -> f64 + Send + Sync;
type GradFn = dyn Fn(&[f64]) -> Vec<f64> + Send + Sync;
type HessFn = dyn Fn(&[f64]) -> Vec<Vec<f64>> + Send + Sync;

#[derive(Clone)]
struct Opaque {
    eval: Arc<EvalFn>,
    grad: Option<Arc<GradFn>>,
    hess: Option<Arc<HessFn>>,
}

#[derive(Clone)]
enum Repr {
    Polynomial(Polynomial),
    Opaque(Opaque),
}

/// An evaluable function `U ⊆ H^n → R`.
///
/// Closures handed to [`ScalarField::opaque`] may be called from several
/// threads at once during grid scans.
#[derive(Clone)]
pub struct ScalarField {
    n: usize,
    repr: Repr,
    domain: Option<(Vec<f64>, Vec<f64>)>,
}

impl fmt::Debug for ScalarField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.repr {
            Repr::Polynomial(p) => f.debug_tuple("ScalarField::Polynomial").field(p).finish(),
            Repr::Opaque(o) => f
                .debug_struct("ScalarField::Opaque")
                .field("n", &self.n)
                .field("exact_gradient", &o.grad.is_some())
                .field("exact_hessian", &o.hess.is_some())
                .finish(),
        }
    }
}

impl From<Polynomial> for ScalarField {
    fn from(p: Polynomial) -> Self {
        Self {
            n: p.dim(),
            repr: Repr::Polynomial(p),
            domain: None,
        }
    }
}

fn fd_step(x: f64) -> f64 {
    f64::EPSILON.cbrt() * x.abs().max(1.0)
}

fn fd2_step(x: f64) -> f64 {
    f64::EPSILON.sqrt().sqrt() * x.abs().max(1.0)
}

impl ScalarField {
    pub fn polynomial(p: Polynomial) -> Self {
        p.into()
    }

    /// A field given by an evaluation closure on coordinates
    /// `(x_1..x_n, y_1..y_n, t)`.
    pub fn opaque(n: usize, eval: impl Fn(&[f64]) -> f64 + Send + Sync + 'static) -> Self {
        Self {
            n,
            repr: Repr::Opaque(Opaque {
                eval: Arc::new(eval),
                grad: None,
                hess: None,
            }),
            domain: None,
        }
    }

    /// Attaches an exact coordinate gradient. Ignored for polynomials.
    pub fn with_gradient(
        mut self,
        grad: impl Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
    ) -> Self {
        if let Repr::Opaque(o) = &mut self.repr {
            o.grad = Some(Arc::new(grad));
        }
        self
    }

    /// Attaches exact second derivatives. Ignored for polynomials.
    pub fn with_hessian(
        mut self,
        hess: impl Fn(&[f64]) -> Vec<Vec<f64>> + Send + Sync + 'static,
    ) -> Self {
        if let Repr::Opaque(o) = &mut self.repr {
            o.hess = Some(Arc::new(hess));
        }
        self
    }

    /// Restricts the domain to an axis-aligned box; finite differences that
    /// would leave it fail explicitly.
    pub fn with_domain(mut self, lo: Vec<f64>, hi: Vec<f64>) -> Self {
        self.domain = Some((lo, hi));
        self
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn as_polynomial(&self) -> Option<&Polynomial> {
        match &self.repr {
            Repr::Polynomial(p) => Some(p),
            Repr::Opaque(_) => None,
        }
    }

    pub fn has_exact_gradient(&self) -> bool {
        match &self.repr {
            Repr::Polynomial(_) => true,
            Repr::Opaque(o) => o.grad.is_some(),
        }
    }

    pub fn has_exact_hessian(&self) -> bool {
        match &self.repr {
            Repr::Polynomial(_) => true,
            Repr::Opaque(o) => o.hess.is_some(),
        }
    }

    pub(crate) fn check_point(&self, p: &GroupElement) -> Result<Vec<f64>> {
        if p.dim() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                found: p.dim(),
            });
        }
        Ok(p.coords())
    }

    pub fn eval(&self, p: &GroupElement) -> Result<f64> {
        Ok(self.eval_coords(&self.check_point(p)?))
    }

    pub(crate) fn eval_coords(&self, c: &[f64]) -> f64 {
        match &self.repr {
            Repr::Polynomial(p) => p.eval(c),
            Repr::Opaque(o) => (o.eval)(c),
        }
    }

    fn check_stencil(&self, c: &[f64], var: usize, h: f64) -> Result<()> {
        if let Some((lo, hi)) = &self.domain {
            if c[var] - h < lo[var] || c[var] + h > hi[var] {
                return Err(Error::DerivativeUnavailable(format!(
                    "finite-difference stencil leaves the domain along coordinate {var}"
                )));
            }
        }
        Ok(())
    }

    /// Coordinate gradient `(d/dx, d/dy, d/dt) f`.
    pub fn gradient(&self, p: &GroupElement) -> Result<Vec<f64>> {
        self.gradient_coords(&self.check_point(p)?)
    }

    pub(crate) fn gradient_coords(&self, c: &[f64]) -> Result<Vec<f64>> {
        match &self.repr {
            Repr::Polynomial(p) => Ok((0..c.len()).map(|i| p.partial(i).eval(c)).collect()),
            Repr::Opaque(Opaque {
                grad: Some(grad), ..
            }) => Ok(grad(c)),
            Repr::Opaque(o) => (0..c.len())
                .map(|i| {
                    let h = fd_step(c[i]);
                    self.check_stencil(c, i, h)?;
                    let mut plus = c.to_vec();
                    let mut minus = c.to_vec();
                    plus[i] += h;
                    minus[i] -= h;
                    let d = ((o.eval)(&plus) - (o.eval)(&minus)) / (plus[i] - minus[i]);
                    finite(d)
                })
                .collect(),
        }
    }

    /// Central-difference gradient regardless of representation.
    pub fn gradient_fd(&self, p: &GroupElement) -> Result<Vec<f64>> {
        let c = self.check_point(p)?;
        (0..c.len())
            .map(|i| {
                let h = fd_step(c[i]);
                self.check_stencil(&c, i, h)?;
                let mut plus = c.clone();
                let mut minus = c.clone();
                plus[i] += h;
                minus[i] -= h;
                finite((self.eval_coords(&plus) - self.eval_coords(&minus)) / (plus[i] - minus[i]))
            })
            .collect()
    }

    /// Coordinate Hessian.
    pub fn hessian(&self, p: &GroupElement) -> Result<Vec<Vec<f64>>> {
        self.hessian_coords(&self.check_point(p)?)
    }

    pub(crate) fn hessian_coords(&self, c: &[f64]) -> Result<Vec<Vec<f64>>> {
        let d = c.len();
        match &self.repr {
            Repr::Polynomial(p) => Ok((0..d)
                .map(|i| {
                    let pi = p.partial(i);
                    (0..d).map(|j| pi.partial(j).eval(c)).collect()
                })
                .collect()),
            Repr::Opaque(Opaque {
                hess: Some(hess), ..
            }) => Ok(hess(c)),
            Repr::Opaque(Opaque {
                grad: Some(grad), ..
            }) => {
                let mut h = vec![vec![0.0; d]; d];
                for j in 0..d {
                    let step = fd_step(c[j]);
                    self.check_stencil(c, j, step)?;
                    let mut plus = c.to_vec();
                    let mut minus = c.to_vec();
                    plus[j] += step;
                    minus[j] -= step;
                    let (gp, gm) = (grad(&plus), grad(&minus));
                    for i in 0..d {
                        h[i][j] = (gp[i] - gm[i]) / (plus[j] - minus[j]);
                    }
                }
                // symmetrize
                for i in 0..d {
                    for j in 0..i {
                        let m = 0.5 * (h[i][j] + h[j][i]);
                        h[i][j] = m;
                        h[j][i] = m;
                    }
                }
                Ok(h)
            }
            Repr::Opaque(o) => {
                let f = |v: &[f64]| (o.eval)(v);
                let f0 = f(c);
                let steps: Vec<f64> = c.iter().map(|&v| fd2_step(v)).collect();
                for (i, &s) in steps.iter().enumerate() {
                    self.check_stencil(c, i, s)?;
                }
                let shifted = |moves: &[(usize, f64)]| {
                    let mut v = c.to_vec();
                    for &(i, s) in moves {
                        v[i] += s;
                    }
                    f(&v)
                };
                let mut h = vec![vec![0.0; d]; d];
                for i in 0..d {
                    let hi = steps[i];
                    h[i][i] = (shifted(&[(i, hi)]) - 2.0 * f0 + shifted(&[(i, -hi)])) / (hi * hi);
                    for j in 0..i {
                        let hj = steps[j];
                        let v = (shifted(&[(i, hi), (j, hj)])
                            - shifted(&[(i, hi), (j, -hj)])
                            - shifted(&[(i, -hi), (j, hj)])
                            + shifted(&[(i, -hi), (j, -hj)]))
                            / (4.0 * hi * hj);
                        h[i][j] = v;
                        h[j][i] = v;
                    }
                }
                h.iter().flatten().try_for_each(|v| finite(*v).map(|_| ()))?;
                Ok(h)
            }
        }
    }

    /// The field `W f` for a frame element `W`.
    ///
    /// Exact for polynomials. For opaque fields the result evaluates through
    /// this field's gradient and, when an exact Hessian is attached, carries
    /// an exact gradient of its own.
    pub fn frame_derivative(&self, which: FrameIndex) -> ScalarField {
        if let Repr::Polynomial(p) = &self.repr {
            return ScalarField {
                n: self.n,
                repr: Repr::Polynomial(p.frame_derivative(which)),
                domain: self.domain.clone(),
            };
        }
        let n = self.n;
        let base = self.clone();
        let eval_base = base.clone();
        let mut out = ScalarField::opaque(n, move |c| {
            eval_base
                .gradient_coords(c)
                .map(|g| combine_frame(n, which, c, &g))
                .unwrap_or(f64::NAN)
        });
        out.domain = self.domain.clone();
        if let Repr::Opaque(Opaque { hess: Some(_), .. }) = &self.repr {
            out = out.with_gradient(move |c| {
                let g = base.gradient_coords(c).expect("exact gradient");
                let h = base.hessian_coords(c).expect("exact hessian");
                frame_derivative_gradient(n, which, c, &g, &h)
            });
        }
        out
    }

    /// `f ∘ m`. Polynomials stay polynomial; opaque fields get chain-rule
    /// derivatives (both automorphisms are affine in coordinates).
    pub fn compose(&self, m: &Automorphism) -> Result<ScalarField> {
        m.validate()?;
        let n = self.n;
        if let Repr::Polynomial(p) = &self.repr {
            return Ok(p.compose(m)?.into());
        }
        let Repr::Opaque(o) = &self.repr else {
            unreachable!()
        };
        let to_point = |c: &[f64]| GroupElement::from_coords(c).expect("finite coordinates");
        let push = {
            let m = m.clone();
            move |c: &[f64]| m.apply(&to_point(c)).expect("valid automorphism").coords()
        };
        // columns of the constant Jacobian
        let jac: Vec<Vec<f64>> = (0..2 * n + 1)
            .map(|k| {
                let mut e = vec![0.0; 2 * n + 1];
                e[k] = 1.0;
                m.push_forward(n, &e)
            })
            .collect::<Result<_>>()?;
        let eval = o.eval.clone();
        let p1 = push.clone();
        let mut out = ScalarField::opaque(n, move |c| eval(&p1(c)));
        if let Some(grad) = o.grad.clone() {
            let p2 = push.clone();
            let jac = jac.clone();
            out = out.with_gradient(move |c| {
                let g = grad(&p2(c));
                jac.iter()
                    .map(|col| col.iter().zip(&g).map(|(a, b)| a * b).sum())
                    .collect()
            });
        }
        if let Some(hess) = o.hess.clone() {
            let p3 = push;
            out = out.with_hessian(move |c| {
                let h = hess(&p3(c));
                let d = c.len();
                let mut out = vec![vec![0.0; d]; d];
                for i in 0..d {
                    for j in 0..d {
                        let mut s = 0.0;
                        for a in 0..d {
                            for b in 0..d {
                                s += jac[i][a] * h[a][b] * jac[j][b];
                            }
                        }
                        out[i][j] = s;
                    }
                }
                out
            });
        }
        Ok(out)
    }
}

fn finite(v: f64) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::DerivativeUnavailable(
            "non-finite finite-difference value".into(),
        ))
    }
}

/// `W f` from the coordinate gradient `g` at coordinates `c`.
pub(crate) fn combine_frame(n: usize, which: FrameIndex, c: &[f64], g: &[f64]) -> f64 {
    match which {
        FrameIndex::X(j) => g[j] - 0.5 * c[n + j] * g[2 * n],
        FrameIndex::Y(j) => g[n + j] + 0.5 * c[j] * g[2 * n],
        FrameIndex::T => g[2 * n],
    }
}

/// Coordinate gradient of `W f`, from the gradient and Hessian of `f`.
pub(crate) fn frame_derivative_gradient(
    n: usize,
    which: FrameIndex,
    c: &[f64],
    g: &[f64],
    h: &[Vec<f64>],
) -> Vec<f64> {
    let t = 2 * n;
    (0..c.len())
        .map(|k| match which {
            FrameIndex::X(j) => {
                let own = if k == n + j { -0.5 * g[t] } else { 0.0 };
                h[j][k] - 0.5 * c[n + j] * h[t][k] + own
            }
            FrameIndex::Y(j) => {
                let own = if k == j { 0.5 * g[t] } else { 0.0 };
                h[n + j][k] + 0.5 * c[j] * h[t][k] + own
            }
            FrameIndex::T => h[t][k],
        })
        .collect()
}

/// `(X_j f)(p)`, `(Y_j f)(p)` or `(T f)(p)`.
pub fn directional_derivative(f: &ScalarField, which: FrameIndex, p: &GroupElement) -> Result<f64> {
    let c = f.check_point(p)?;
    let g = f.gradient_coords(&c)?;
    Ok(combine_frame(f.n, which, &c, &g))
}

/// `∇_H f(p) = Σ (X_j f) X_j + (Y_j f) Y_j`.
pub fn horizontal_gradient(f: &ScalarField, p: &GroupElement) -> Result<FrameVector> {
    let c = f.check_point(p)?;
    let g = f.gradient_coords(&c)?;
    Ok(horizontal_from_gradient(f.n, &c, &g))
}

pub(crate) fn horizontal_from_gradient(n: usize, c: &[f64], g: &[f64]) -> FrameVector {
    FrameVector {
        a: (0..n).map(|j| combine_frame(n, FrameIndex::X(j), c, g)).collect(),
        b: (0..n).map(|j| combine_frame(n, FrameIndex::Y(j), c, g)).collect(),
        c: 0.0,
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    pub(crate) fn random_polynomial(rng: &mut impl Rng, n: usize, max_degree: u32, terms: usize) -> Polynomial {
        let mut out = Polynomial::zero(n);
        for _ in 0..terms {
            let mut e = vec![0u32; 2 * n + 1];
            let deg = rng.gen_range(0..=max_degree);
            for _ in 0..deg {
                e[rng.gen_range(0..2 * n + 1)] += 1;
            }
            out.add_term(e, rng.gen_range(-2.0..2.0));
        }
        out
    }

    fn x() -> ScalarField {
        Polynomial::coordinate(1, FrameIndex::X(0)).into()
    }

    fn t() -> ScalarField {
        Polynomial::coordinate(1, FrameIndex::T).into()
    }

    #[test]
    fn directional_examples() {
        let p = GroupElement::h1(0.7, -1.3, 0.4);
        assert_eq!(directional_derivative(&x(), FrameIndex::X(0), &p).unwrap(), 1.0);
        assert_eq!(directional_derivative(&t(), FrameIndex::X(0), &p).unwrap(), 0.65);
        let c: ScalarField = Polynomial::constant(1, 3.0).into();
        for w in FrameIndex::all(1) {
            assert_eq!(directional_derivative(&c, w, &p).unwrap(), 0.0);
        }
    }

    #[test]
    fn gradient_examples() {
        let p = GroupElement::h1(0.7, -1.3, 0.4);
        assert_eq!(horizontal_gradient(&x(), &p).unwrap(), FrameVector::h1(1.0, 0.0, 0.0));
        assert_eq!(
            horizontal_gradient(&t(), &GroupElement::identity(1)).unwrap(),
            FrameVector::h1(0.0, 0.0, 0.0)
        );
        let r2 = Polynomial::parse("1 2 0 0\n1 0 2 0").unwrap();
        let g = horizontal_gradient(&r2.into(), &p).unwrap();
        assert_eq!(g, FrameVector::h1(1.4, -2.6, 0.0));
    }

    #[test]
    fn parse_reports_line_numbers() {
        let p = Polynomial::parse("# header\n1.5 1 0 2\n\n-2 0 0 0 # const\n").unwrap();
        assert_eq!(p.eval(&[2.0, 5.0, 3.0]), 1.5 * 2.0 * 9.0 - 2.0);
        assert_eq!(
            Polynomial::parse("1 0 0 0\n2 x 0 0"),
            Err(Error::Parse {
                line: 2,
                message: "invalid exponent `x`".into()
            })
        );
        assert!(matches!(
            Polynomial::parse("1 0 0 0\n1 0 0 0 0 0"),
            Err(Error::Parse { line: 2, .. })
        ));
        assert!(matches!(Polynomial::parse("1 0 0"), Err(Error::Parse { line: 1, .. })));
        assert!(matches!(Polynomial::parse(""), Err(Error::Parse { .. })));
        let h2 = Polynomial::parse("1 1 0 0 1 0").unwrap();
        assert_eq!(h2.dim(), 2);
    }

    #[test]
    fn opaque_fd_fails_at_domain_boundary() {
        let f = ScalarField::opaque(1, |c| c[0] * c[0]).with_domain(vec![-1.0; 3], vec![1.0; 3]);
        assert!(matches!(
            directional_derivative(&f, FrameIndex::X(0), &GroupElement::h1(1.0, 0.0, 0.0)),
            Err(Error::DerivativeUnavailable(_))
        ));
        assert!(directional_derivative(&f, FrameIndex::X(0), &GroupElement::h1(0.5, 0.0, 0.0)).is_ok());
    }

    #[test]
    fn fd_matches_exact_on_polynomials() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for n in 1..=2 {
            for _ in 0..20 {
                let p = random_polynomial(&mut rng, n, 4, 8);
                let exact: ScalarField = p.clone().into();
                let pe = p.clone();
                let opaque = ScalarField::opaque(n, move |c| pe.eval(c));
                for _ in 0..10 {
                    let c: Vec<f64> = (0..2 * n + 1).map(|_| rng.gen_range(-2.0..2.0)).collect();
                    let pt = GroupElement::from_coords(&c).unwrap();
                    let a = exact.gradient(&pt).unwrap();
                    let b = opaque.gradient(&pt).unwrap();
                    for (u, v) in a.iter().zip(&b) {
                        assert!((u - v).abs() <= 1e-6, "{u} vs {v}");
                    }
                    let ha = exact.hessian(&pt).unwrap();
                    let hb = opaque.hessian(&pt).unwrap();
                    for (ra, rb) in ha.iter().zip(&hb) {
                        for (u, v) in ra.iter().zip(rb) {
                            assert!((u - v).abs() <= 1e-3 * (1.0 + u.abs()), "{u} vs {v}");
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn commutator_with_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..10 {
            let p = random_polynomial(&mut rng, 1, 4, 8);
            let pe = p.clone();
            let opaque = ScalarField::opaque(1, move |c| pe.eval(c));
            // exact first derivatives, finite-difference outer derivative
            let xf = ScalarField::from(p.frame_derivative(FrameIndex::X(0)));
            let yf = ScalarField::from(p.frame_derivative(FrameIndex::Y(0)));
            let (xe, ye) = (xf.as_polynomial().unwrap().clone(), yf.as_polynomial().unwrap().clone());
            let xo = ScalarField::opaque(1, move |c| xe.eval(c));
            let yo = ScalarField::opaque(1, move |c| ye.eval(c));
            let c: Vec<f64> = (0..3).map(|_| rng.gen_range(-2.0..2.0)).collect();
            let pt = GroupElement::from_coords(&c).unwrap();
            let lhs = directional_derivative(&yo, FrameIndex::X(0), &pt).unwrap()
                - directional_derivative(&xo, FrameIndex::Y(0), &pt).unwrap();
            let rhs = directional_derivative(&opaque, FrameIndex::T, &pt).unwrap();
            assert!((lhs - rhs).abs() <= 1e-6 * (1.0 + rhs.abs()), "{lhs} vs {rhs}");
        }
    }

    #[test]
    fn opaque_frame_derivative_uses_hessian() {
        // f = x^2 y + t^2 with exact derivatives
        let f = ScalarField::opaque(1, |c| c[0] * c[0] * c[1] + c[2] * c[2])
            .with_gradient(|c| vec![2.0 * c[0] * c[1], c[0] * c[0], 2.0 * c[2]])
            .with_hessian(|c| {
                vec![
                    vec![2.0 * c[1], 2.0 * c[0], 0.0],
                    vec![2.0 * c[0], 0.0, 0.0],
                    vec![0.0, 0.0, 2.0],
                ]
            });
        let poly: ScalarField = Polynomial::parse("1 2 1 0\n1 0 0 2").unwrap().into();
        let p = GroupElement::h1(0.3, -0.8, 1.2);
        for outer in FrameIndex::all(1) {
            for inner in FrameIndex::all(1) {
                let a = directional_derivative(&f.frame_derivative(inner), outer, &p).unwrap();
                let b = directional_derivative(&poly.frame_derivative(inner), outer, &p).unwrap();
                assert!((a - b).abs() < 1e-13, "{outer:?}{inner:?}: {a} vs {b}");
            }
        }
        assert!(f.frame_derivative(FrameIndex::X(0)).has_exact_gradient());
    }

    #[test]
    fn opaque_composition_matches_polynomial_composition() {
        let poly = Polynomial::parse("1 2 1 0\n-0.5 0 1 1\n2 1 0 0").unwrap();
        let pe = poly.clone();
        let pg = poly.clone();
        let f = ScalarField::opaque(1, move |c| pe.eval(c))
            .with_gradient(move |c| (0..3).map(|i| pg.partial(i).eval(c)).collect());
        let p = GroupElement::h1(0.3, -0.8, 1.2);
        for m in [
            Automorphism::Dilation(1.7),
            Automorphism::LeftTranslation(GroupElement::h1(0.3, -0.7, 1.1)),
        ] {
            let a = f.compose(&m).unwrap();
            let b: ScalarField = poly.compose(&m).unwrap().into();
            assert!((a.eval(&p).unwrap() - b.eval(&p).unwrap()).abs() < 1e-12);
            for (u, v) in a.gradient(&p).unwrap().iter().zip(b.gradient(&p).unwrap()) {
                assert!((u - v).abs() < 1e-12);
            }
        }
    }

    proptest! {
        #[test]
        fn exact_commutator(seed in any::<u64>(), c in prop::collection::vec(-2.0..2.0f64, 5)) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let p = random_polynomial(&mut rng, 2, 4, 10);
            let pt = GroupElement::from_coords(&c).unwrap();
            let f: ScalarField = p.into();
            for j in 0..2 {
                let lhs = directional_derivative(&f.frame_derivative(FrameIndex::Y(j)), FrameIndex::X(j), &pt).unwrap()
                    - directional_derivative(&f.frame_derivative(FrameIndex::X(j)), FrameIndex::Y(j), &pt).unwrap();
                let rhs = directional_derivative(&f, FrameIndex::T, &pt).unwrap();
                prop_assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + rhs.abs()));
            }
        }

        #[test]
        fn frame_is_homogeneous(seed in any::<u64>(), c in prop::collection::vec(-2.0..2.0f64, 3), r in 0.05..4.0f64) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let p = random_polynomial(&mut rng, 1, 4, 8);
            let m = Automorphism::Dilation(r);
            let f: ScalarField = p.clone().into();
            let fd: ScalarField = p.compose(&m).unwrap().into();
            let pt = GroupElement::from_coords(&c).unwrap();
            let dpt = m.apply(&pt).unwrap();
            for (w, order) in [(FrameIndex::X(0), 1), (FrameIndex::Y(0), 1), (FrameIndex::T, 2)] {
                let lhs = directional_derivative(&fd, w, &pt).unwrap();
                let rhs = r.powi(order) * directional_derivative(&f, w, &dpt).unwrap();
                prop_assert!((lhs - rhs).abs() <= 1e-10 * (1.0 + rhs.abs()), "{:?}: {} vs {}", w, lhs, rhs);
            }
        }

        #[test]
        fn frame_is_left_invariant(seed in any::<u64>(), c in prop::collection::vec(-2.0..2.0f64, 3),
                                   q in prop::collection::vec(-2.0..2.0f64, 3)) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let p = random_polynomial(&mut rng, 1, 4, 8);
            let m = Automorphism::LeftTranslation(GroupElement::from_coords(&q).unwrap());
            let f: ScalarField = p.clone().into();
            let ft: ScalarField = p.compose(&m).unwrap().into();
            let pt = GroupElement::from_coords(&c).unwrap();
            let tpt = m.apply(&pt).unwrap();
            for w in FrameIndex::all(1) {
                let lhs = directional_derivative(&ft, w, &pt).unwrap();
                let rhs = directional_derivative(&f, w, &tpt).unwrap();
                prop_assert!((lhs - rhs).abs() <= 1e-9 * (1.0 + rhs.abs()), "{:?}: {} vs {}", w, lhs, rhs);
            }
        }
    }
}
