//! Tangent frames, volume forms and normal conversions for horizontal normals.

use crate::calculus::{directional_derivative, ScalarField};
use crate::error::{Error, Result};
use crate::exterior::{MultiForm, MultiVector};
use crate::frame::{FrameIndex, FrameVector};
use crate::group::GroupElement;

const UNIT_TOL: f64 = 1e-12;

fn check_h1_horizontal(n_h: &FrameVector) -> Result<()> {
    if n_h.dim() != 1 {
        return Err(Error::RequiresH1(n_h.dim()));
    }
    if !n_h.is_horizontal() {
        return Err(Error::NotHorizontal);
    }
    Ok(())
}

/// Tangent frame `(T, n_2 X - n_1 Y)` of a unit horizontal normal in `H^1`.
pub fn tangent_frame(n_h: &FrameVector) -> Result<(FrameVector, FrameVector)> {
    check_h1_horizontal(n_h)?;
    let norm = n_h.horizontal_norm();
    if (norm - 1.0).abs() > UNIT_TOL {
        return Err(Error::NotUnit(norm));
    }
    let (n1, n2) = (n_h.a[0], n_h.b[0]);
    Ok((
        FrameVector::basis(1, FrameIndex::T),
        FrameVector::h1(n2, -n1, 0.0),
    ))
}

/// Residuals of the seven conditions a tangent frame `(r, s)` of `n_h`
/// must meet: `<r,s>`, `<r,n>`, `<s,n>`, `|r| - 1`, `|s| - 1`,
/// `|r x s - n|` and `|r ∧ s - *n|` (coefficient sup norm).
pub fn frame_conditions(n_h: &FrameVector, r: &FrameVector, s: &FrameVector) -> Result<[f64; 7]> {
    check_h1_horizontal(n_h)?;
    let cross = r.cross(s)?.sub(n_h)?;
    let wedge = MultiVector::from_frame_vector(r).wedge(&MultiVector::from_frame_vector(s))?;
    let star = MultiVector::from_frame_vector(n_h).hodge()?;
    Ok([
        r.dot(s)?.abs(),
        r.dot(n_h)?.abs(),
        s.dot(n_h)?.abs(),
        (r.norm() - 1.0).abs(),
        (s.norm() - 1.0).abs(),
        cross.norm(),
        wedge.max_abs_diff(&star)?,
    ])
}

/// `t_H = *n_H` and the dual form `ω_H` with `<ω_H | t_H> = 1`.
pub fn volume_form(n_h: &FrameVector) -> Result<(MultiVector, MultiForm)> {
    check_h1_horizontal(n_h)?;
    let (n1, n2) = (n_h.a[0], n_h.b[0]);
    let q = n1 * n1 + n2 * n2;
    if q == 0.0 {
        return Err(Error::ZeroVector);
    }
    let t_h = MultiVector::from_frame_vector(n_h).hodge()?;
    let omega = MultiForm::zero(1, 2)?
        .with_term(&[2, 3], n1 / q)?
        .with_term(&[1, 3], -n2 / q)?;
    Ok((t_h, omega))
}

/// Unnormalized horizontal normal from a coordinate-basis Euclidean normal
/// at `p`: `n_{H,i} = n_{E,i} - y_i n_{E,2n+1} / 2`,
/// `n_{H,n+i} = n_{E,n+i} + x_i n_{E,2n+1} / 2`.
pub fn euclidean_to_horizontal(n_e: &[f64], p: &GroupElement) -> Result<FrameVector> {
    let n = p.dim();
    if n_e.len() != 2 * n + 1 {
        return Err(Error::InvalidParameter(format!(
            "expected {} normal components, got {}",
            2 * n + 1,
            n_e.len()
        )));
    }
    let w = n_e[2 * n];
    FrameVector::horizontal(
        (0..n).map(|i| n_e[i] - 0.5 * p.y()[i] * w).collect(),
        (0..n).map(|i| n_e[n + i] + 0.5 * p.x()[i] * w).collect(),
    )
}

/// Euclidean normal rebuilt from a field of horizontal normal components
/// `(n_{H,1}, .., n_{H,2n})` given as scalar fields with exact derivatives.
pub fn horizontal_to_euclidean(n_h: &[ScalarField], p: &GroupElement) -> Result<Vec<f64>> {
    let n = p.dim();
    if n_h.len() != 2 * n {
        return Err(Error::InvalidParameter(format!(
            "expected {} horizontal components, got {}",
            2 * n,
            n_h.len()
        )));
    }
    if let Some(i) = n_h.iter().position(|f| !f.has_exact_gradient()) {
        return Err(Error::DerivativeUnavailable(format!(
            "horizontal normal component {} has no exact gradient",
            i + 1
        )));
    }
    let mut vertical = 0.0;
    for j in 0..n {
        vertical += directional_derivative(&n_h[n + j], FrameIndex::X(j), p)?
            - directional_derivative(&n_h[j], FrameIndex::Y(j), p)?;
    }
    vertical /= n as f64;
    let mut out = Vec::with_capacity(2 * n + 1);
    for i in 0..n {
        out.push(n_h[i].eval(p)? + 0.5 * p.y()[i] * vertical);
    }
    for i in 0..n {
        out.push(n_h[n + i].eval(p)? - 0.5 * p.x()[i] * vertical);
    }
    out.push(vertical);
    Ok(out)
}

/// Membership of `p` in `{x_i = -2 ∂_{y_i} g / ∂_t g, y_i = 2 ∂_{x_i} g / ∂_t g}`
/// (requires `∂_t g ≠ 0`), each equation decided to `tol`.
pub fn degenerate_set_check(g: &ScalarField, p: &GroupElement, tol: f64) -> Result<bool> {
    if !g.has_exact_gradient() {
        return Err(Error::DerivativeUnavailable(
            "degenerate-set test needs an exact gradient".into(),
        ));
    }
    let n = p.dim();
    let grad = g.gradient(p)?;
    let gt = grad[2 * n];
    if gt.abs() <= tol {
        return Ok(false);
    }
    Ok((0..n).all(|i| {
        (p.x()[i] + 2.0 * grad[n + i] / gt).abs() <= tol
            && (p.y()[i] - 2.0 * grad[i] / gt).abs() <= tol
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calculus::{horizontal_gradient, Polynomial};
    use crate::exterior::pair;
    use proptest::prelude::*;

    fn unit(theta: f64) -> FrameVector {
        FrameVector::h1(theta.cos(), theta.sin(), 0.0)
    }

    #[test]
    fn frame_examples() {
        let (r, s) = tangent_frame(&FrameVector::h1(1.0, 0.0, 0.0)).unwrap();
        assert_eq!(r, FrameVector::h1(0.0, 0.0, 1.0));
        assert_eq!(s, FrameVector::h1(0.0, -1.0, 0.0));
        let (_, s) = tangent_frame(&FrameVector::h1(0.0, 1.0, 0.0)).unwrap();
        assert_eq!(s, FrameVector::h1(1.0, 0.0, 0.0));
        assert!(matches!(
            tangent_frame(&FrameVector::h1(2.0, 0.0, 0.0)),
            Err(Error::NotUnit(_))
        ));
        assert!(tangent_frame(&FrameVector::h1(1.0, 0.0, 0.1)).is_err());
        assert!(tangent_frame(&FrameVector::zero(2)).is_err());
    }

    #[test]
    fn volume_form_examples() {
        let (t, w) = volume_form(&FrameVector::h1(1.0, 0.0, 0.0)).unwrap();
        assert_eq!(t, MultiVector::basis(1, &[2, 3]).unwrap());
        assert_eq!(w, MultiForm::basis(1, &[2, 3]).unwrap());
        let h = 0.5f64.sqrt();
        let (t, w) = volume_form(&FrameVector::h1(h, h, 0.0)).unwrap();
        assert!((pair(&w, &t).unwrap() - 1.0).abs() <= 1e-15);
        assert_eq!(volume_form(&FrameVector::zero(1)), Err(Error::ZeroVector));
    }

    #[test]
    fn conversion_examples() {
        let p = GroupElement::h1(1.0, 2.0, 0.0);
        let n = euclidean_to_horizontal(&[0.0, 0.0, 1.0], &p).unwrap();
        assert_eq!(n, FrameVector::h1(-1.0, 0.5, 0.0));
        let n = euclidean_to_horizontal(&[0.3, -0.4, 0.0], &p).unwrap();
        assert_eq!(n, FrameVector::h1(0.3, -0.4, 0.0));

        // f = t: n_H = (-y/2, x/2)
        let x = Polynomial::coordinate(1, FrameIndex::X(0));
        let y = Polynomial::coordinate(1, FrameIndex::Y(0));
        let fields = [y.scale(-0.5).into(), x.scale(0.5).into()];
        let e = horizontal_to_euclidean(&fields, &p).unwrap();
        assert_eq!(e, vec![0.0, 0.0, 1.0]);

        let opaque = [
            ScalarField::opaque(1, |c| -0.5 * c[1]),
            ScalarField::opaque(1, |c| 0.5 * c[0]),
        ];
        assert!(matches!(
            horizontal_to_euclidean(&opaque, &p),
            Err(Error::DerivativeUnavailable(_))
        ));
    }

    #[test]
    fn degenerate_examples() {
        let t: ScalarField = Polynomial::coordinate(1, FrameIndex::T).into();
        let x: ScalarField = Polynomial::coordinate(1, FrameIndex::X(0)).into();
        assert!(degenerate_set_check(&t, &GroupElement::identity(1), 1e-12).unwrap());
        assert!(!degenerate_set_check(&t, &GroupElement::h1(1.0, 0.0, 0.0), 1e-12).unwrap());
        assert!(!degenerate_set_check(&x, &GroupElement::identity(1), 1e-12).unwrap());
        assert!(!degenerate_set_check(&x, &GroupElement::h1(0.2, 0.5, 3.0), 1e-12).unwrap());
    }

    #[test]
    fn degenerate_set_matches_horizontal_gradient() {
        // g = t + a x + b y + c x y: degenerate where x = -2(b + c x), y = 2(a + c y)
        let poly = Polynomial::parse("1 0 0 1\n0.3 1 0 0\n-0.2 0 1 0\n0.25 1 1 0").unwrap();
        let g: ScalarField = poly.into();
        let (a, b, c) = (0.3, -0.2, 0.25);
        let x = -2.0 * b / (1.0 + 2.0 * c);
        let y = 2.0 * a / (1.0 - 2.0 * c);
        let p = GroupElement::h1(x, y, 0.0);
        assert!(degenerate_set_check(&g, &p, 1e-12).unwrap());
        assert!(horizontal_gradient(&g, &p).unwrap().horizontal_norm() <= 1e-12);
        let q = GroupElement::h1(x + 1e-3, y, 0.0);
        assert!(!degenerate_set_check(&g, &q, 1e-6).unwrap());
    }

    proptest! {
        #[test]
        fn seven_conditions(theta in 0.0..std::f64::consts::TAU) {
            let n = unit(theta);
            let (r, s) = tangent_frame(&n).unwrap();
            for d in frame_conditions(&n, &r, &s).unwrap() {
                prop_assert!(d <= 1e-12);
            }
        }

        #[test]
        fn volume_pairing_is_one(a in -5.0..5.0f64, b in -5.0..5.0f64) {
            prop_assume!(a.hypot(b) > 1e-3);
            let n = FrameVector::h1(a, b, 0.0);
            let (t, w) = volume_form(&n).unwrap();
            prop_assert!((pair(&w, &t).unwrap() - 1.0).abs() <= 1e-12);
            let expected = MultiVector::zero(1, 2).unwrap()
                .with_term(&[2, 3], a).unwrap()
                .with_term(&[1, 3], -b).unwrap();
            prop_assert!(t.max_abs_diff(&expected).unwrap() <= 1e-15);
        }
    }
}
