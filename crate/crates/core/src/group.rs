//! Group law, automorphisms and the Korányi gauge on `H^n`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A point `(x, y, t)` of `H^n` with `x, y` in `R^n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupElement {
    x: Vec<f64>,
    y: Vec<f64>,
    t: f64,
}

impl GroupElement {
    pub fn new(x: Vec<f64>, y: Vec<f64>, t: f64) -> Result<Self> {
        if x.is_empty() {
            return Err(Error::ZeroDimension);
        }
        if x.len() != y.len() {
            return Err(Error::DimensionMismatch {
                expected: x.len(),
                found: y.len(),
            });
        }
        if !t.is_finite() || x.iter().chain(&y).any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Self { x, y, t })
    }

    /// A point of `H^1`.
    ///
    /// # Panics
    ///
    /// Panics if a coordinate is not finite.
    pub fn h1(x: f64, y: f64, t: f64) -> Self {
        Self::new(vec![x], vec![y], t).expect("finite H^1 coordinates")
    }

    /// The neutral element `(0, 0, 0)` of `H^n`.
    pub fn identity(n: usize) -> Self {
        Self {
            x: vec![0.0; n],
            y: vec![0.0; n],
            t: 0.0,
        }
    }

    /// Builds a point from `2n + 1` coordinates `(x_1..x_n, y_1..y_n, t)`.
    pub fn from_coords(coords: &[f64]) -> Result<Self> {
        if coords.len() < 3 || coords.len() % 2 == 0 {
            return Err(Error::InvalidParameter(format!(
                "expected 2n+1 coordinates, got {}",
                coords.len()
            )));
        }
        let n = (coords.len() - 1) / 2;
        Self::new(coords[..n].to_vec(), coords[n..2 * n].to_vec(), coords[2 * n])
    }

    pub fn dim(&self) -> usize {
        self.x.len()
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    /// Coordinates in the order `(x_1..x_n, y_1..y_n, t)`.
    pub fn coords(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(2 * self.dim() + 1);
        out.extend_from_slice(&self.x);
        out.extend_from_slice(&self.y);
        out.push(self.t);
        out
    }

    pub(crate) fn check_same_dim(&self, other: &Self) -> Result<()> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        Ok(())
    }

    /// The group product `self * other`.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check_same_dim(other)?;
        let symplectic: f64 = (0..self.dim())
            .map(|j| self.x[j] * other.y[j] - self.y[j] * other.x[j])
            .sum();
        Ok(Self {
            x: self.x.iter().zip(&other.x).map(|(a, b)| a + b).collect(),
            y: self.y.iter().zip(&other.y).map(|(a, b)| a + b).collect(),
            t: self.t + other.t + 0.5 * symplectic,
        })
    }

    pub fn inverse(&self) -> Self {
        Self {
            x: self.x.iter().map(|v| -v).collect(),
            y: self.y.iter().map(|v| -v).collect(),
            t: -self.t,
        }
    }

    /// `(|(x, y)|^4 + 16 t^2)^(1/4)`.
    pub fn koranyi_norm(&self) -> f64 {
        let horizontal: f64 = self.x.iter().chain(&self.y).map(|v| v * v).sum();
        (horizontal * horizontal + 16.0 * self.t * self.t).sqrt().sqrt()
    }

    /// Korányi distance `|other^-1 * self|`.
    pub fn distance(&self, other: &Self) -> Result<f64> {
        Ok(other.inverse().mul(self)?.koranyi_norm())
    }

    /// Largest absolute coordinate difference.
    pub fn max_abs_diff(&self, other: &Self) -> Result<f64> {
        self.check_same_dim(other)?;
        Ok(self
            .coords()
            .iter()
            .zip(other.coords())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max))
    }
}

/// Left translations `tau_q(p) = q * p` and anisotropic dilations
/// `delta_r(x, y, t) = (r x, r y, r^2 t)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Automorphism {
    LeftTranslation(GroupElement),
    Dilation(f64),
}

impl Automorphism {
    pub fn translation(q: GroupElement) -> Self {
        Self::LeftTranslation(q)
    }

    pub fn dilation(r: f64) -> Result<Self> {
        let m = Self::Dilation(r);
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Self::Dilation(r) if !(r.is_finite() && *r > 0.0) => Err(Error::InvalidDilation(*r)),
            _ => Ok(()),
        }
    }

    pub fn apply(&self, p: &GroupElement) -> Result<GroupElement> {
        self.validate()?;
        match self {
            Self::LeftTranslation(q) => q.mul(p),
            Self::Dilation(r) => Ok(GroupElement {
                x: p.x.iter().map(|v| r * v).collect(),
                y: p.y.iter().map(|v| r * v).collect(),
                t: r * r * p.t,
            }),
        }
    }

    pub fn inverse(&self) -> Result<Self> {
        self.validate()?;
        Ok(match self {
            Self::LeftTranslation(q) => Self::LeftTranslation(q.inverse()),
            Self::Dilation(r) => Self::Dilation(1.0 / r),
        })
    }

    /// Coordinate Jacobian of the map, acting on coordinate vectors
    /// `(u_1..u_n, v_1..v_n, w)`.
    ///
    /// Both kinds are affine in exponential coordinates, so the Jacobian
    /// does not depend on the base point.
    pub fn push_forward(&self, n: usize, v: &[f64]) -> Result<Vec<f64>> {
        self.validate()?;
        if v.len() != 2 * n + 1 {
            return Err(Error::InvalidParameter(format!(
                "expected {} vector components, got {}",
                2 * n + 1,
                v.len()
            )));
        }
        match self {
            Self::Dilation(r) => {
                let mut out: Vec<f64> = v[..2 * n].iter().map(|c| r * c).collect();
                out.push(r * r * v[2 * n]);
                Ok(out)
            }
            Self::LeftTranslation(q) => {
                if q.dim() != n {
                    return Err(Error::DimensionMismatch {
                        expected: n,
                        found: q.dim(),
                    });
                }
                let mut out = v.to_vec();
                let dt: f64 = (0..n).map(|j| q.x[j] * v[n + j] - q.y[j] * v[j]).sum();
                out[2 * n] += 0.5 * dt;
                Ok(out)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn h1() -> impl Strategy<Value = GroupElement> {
        (-5.0..5.0f64, -5.0..5.0f64, -5.0..5.0f64).prop_map(|(x, y, t)| GroupElement::h1(x, y, t))
    }

    fn h2() -> impl Strategy<Value = GroupElement> {
        prop::collection::vec(-5.0..5.0f64, 5)
            .prop_map(|c| GroupElement::from_coords(&c).unwrap())
    }

    fn close(a: &GroupElement, b: &GroupElement, rel: f64) -> bool {
        let scale = 1.0 + a.coords().iter().map(|v| v.abs()).fold(0.0, f64::max);
        a.max_abs_diff(b).unwrap() <= rel * scale
    }

    #[test]
    fn product_examples() {
        let e = GroupElement::identity(1);
        let p = GroupElement::h1(0.3, -1.2, 2.5);
        assert_eq!(e.mul(&p).unwrap(), p);
        assert_eq!(
            GroupElement::h1(1.0, 0.0, 0.0)
                .mul(&GroupElement::h1(0.0, 1.0, 0.0))
                .unwrap(),
            GroupElement::h1(1.0, 1.0, 0.5)
        );
        assert_eq!(p.mul(&p.inverse()).unwrap(), e);
    }

    #[test]
    fn inverse_examples() {
        assert_eq!(GroupElement::identity(1).inverse(), GroupElement::identity(1));
        assert_eq!(
            GroupElement::h1(1.0, 2.0, 3.0).inverse(),
            GroupElement::h1(-1.0, -2.0, -3.0)
        );
    }

    #[test]
    fn dimension_mismatch_is_rejected() {
        let a = GroupElement::identity(1);
        let b = GroupElement::identity(2);
        assert!(matches!(a.mul(&b), Err(Error::DimensionMismatch { .. })));
        assert!(GroupElement::new(vec![1.0], vec![1.0, 2.0], 0.0).is_err());
        assert!(GroupElement::new(vec![f64::NAN], vec![1.0], 0.0).is_err());
        assert!(GroupElement::from_coords(&[1.0, 2.0]).is_err());
    }

    #[test]
    fn automorphism_examples() {
        let p = GroupElement::h1(1.0, 1.0, 1.0);
        assert_eq!(Automorphism::Dilation(1.0).apply(&p).unwrap(), p);
        assert_eq!(
            Automorphism::Dilation(2.0).apply(&p).unwrap(),
            GroupElement::h1(2.0, 2.0, 4.0)
        );
        let q = GroupElement::h1(0.3, -0.7, 1.1);
        assert_eq!(
            Automorphism::LeftTranslation(q.clone())
                .apply(&GroupElement::identity(1))
                .unwrap(),
            q
        );
        assert!(Automorphism::dilation(0.0).is_err());
        assert!(Automorphism::dilation(-1.0).is_err());
        assert!(Automorphism::Dilation(-2.0).apply(&p).is_err());
    }

    #[test]
    fn koranyi_examples() {
        assert_eq!(GroupElement::identity(1).koranyi_norm(), 0.0);
        assert_eq!(GroupElement::h1(1.0, 0.0, 0.0).koranyi_norm(), 1.0);
        assert_eq!(GroupElement::h1(0.0, 0.0, 1.0).koranyi_norm(), 2.0);
    }

    #[test]
    fn push_forward_matches_finite_differences() {
        let p = GroupElement::h1(0.4, -0.9, 0.2);
        let v = [0.3, 1.7, -0.5];
        for m in [
            Automorphism::Dilation(2.5),
            Automorphism::LeftTranslation(GroupElement::h1(0.3, -0.7, 1.1)),
        ] {
            let h = 1e-6;
            let shift = |s: f64| {
                GroupElement::from_coords(&[p.x[0] + s * v[0], p.y[0] + s * v[1], p.t + s * v[2]])
                    .unwrap()
            };
            let plus = m.apply(&shift(h)).unwrap().coords();
            let minus = m.apply(&shift(-h)).unwrap().coords();
            let exact = m.push_forward(1, &v).unwrap();
            for i in 0..3 {
                let fd = (plus[i] - minus[i]) / (2.0 * h);
                assert!((fd - exact[i]).abs() < 1e-8, "{i}: {fd} vs {}", exact[i]);
            }
        }
    }

    proptest! {
        #[test]
        fn group_axioms_h1(p in h1(), q in h1(), r in h1()) {
            let lhs = p.mul(&q).unwrap().mul(&r).unwrap();
            let rhs = p.mul(&q.mul(&r).unwrap()).unwrap();
            prop_assert!(close(&lhs, &rhs, 1e-12));
            let e = GroupElement::identity(1);
            prop_assert_eq!(p.mul(&e).unwrap(), p.clone());
            prop_assert_eq!(e.mul(&p).unwrap(), p.clone());
            prop_assert!(close(&p.inverse().mul(&p).unwrap(), &e, 1e-12));
            prop_assert_eq!(p.inverse().inverse(), p);
        }

        #[test]
        fn group_axioms_h2(p in h2(), q in h2(), r in h2()) {
            let lhs = p.mul(&q).unwrap().mul(&r).unwrap();
            let rhs = p.mul(&q.mul(&r).unwrap()).unwrap();
            prop_assert!(close(&lhs, &rhs, 1e-12));
        }

        #[test]
        fn distance_is_left_invariant(p in h2(), p2 in h2(), q in h2()) {
            let d = p.distance(&p2).unwrap();
            let dq = q.mul(&p).unwrap().distance(&q.mul(&p2).unwrap()).unwrap();
            prop_assert!((d - dq).abs() <= 1e-12 * (1.0 + d));
        }

        #[test]
        fn distance_is_homogeneous(p in h1(), q in h1(), r in 0.1..4.0f64) {
            let m = Automorphism::Dilation(r);
            let d = p.distance(&q).unwrap();
            let dr = m.apply(&p).unwrap().distance(&m.apply(&q).unwrap()).unwrap();
            prop_assert!((dr - r * d).abs() <= 1e-12 * (1.0 + r * d));
        }

        #[test]
        fn dilations_compose(p in h1(), r in 0.1..4.0f64, s in 0.1..4.0f64) {
            let lhs = Automorphism::Dilation(r)
                .apply(&Automorphism::Dilation(s).apply(&p).unwrap())
                .unwrap();
            let rhs = Automorphism::Dilation(r * s).apply(&p).unwrap();
            prop_assert!(close(&lhs, &rhs, 1e-12));
        }
    }
}
