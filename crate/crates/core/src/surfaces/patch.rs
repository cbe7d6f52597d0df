use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frame::{cross3, FrameVector};
use crate::group::{Automorphism, GroupElement};

type MapFn = dyn Fn(f64, f64) -> [f64; 3] + Send + Sync;
type JacobianFn = dyn Fn(f64, f64) -> [[f64; 3]; 2] + Send + Sync;

/// Identification `(r1, s) ~ (r0, φ(s))` closing a parameter rectangle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Seam {
    /// `φ(s) = s`: a cylinder-like gluing.
    Straight,
    /// `φ(s) = sum - s`: a half-twist gluing.
    Flip { sum: f64 },
}

impl Seam {
    pub fn apply(&self, s: f64) -> f64 {
        match self {
            Self::Straight => s,
            Self::Flip { sum } => sum - s,
        }
    }

    /// Whether the gluing reverses the `s` direction.
    pub fn reverses(&self) -> bool {
        matches!(self, Self::Flip { .. })
    }
}

/// A parametrized piece of surface in `H^1`, `(r, s) ↦ γ(r, s)`, on
/// `[r0, r1) × [s0, s1]` (or the closed rectangle when there is no seam).
///
/// Seamed patches evaluate `map` slightly outside `[r0, r1]` for finite
/// differences and Newton steps, so the closure must extend smoothly there.
#[derive(Clone)]
pub struct ParametrizedPatch {
    map: Arc<MapFn>,
    jacobian: Option<Arc<JacobianFn>>,
    r_range: (f64, f64),
    s_range: (f64, f64),
    seam: Option<Seam>,
}

impl fmt::Debug for ParametrizedPatch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ParametrizedPatch")
            .field("r_range", &self.r_range)
            .field("s_range", &self.s_range)
            .field("seam", &self.seam)
            .field("exact_jacobian", &self.jacobian.is_some())
            .finish()
    }
}

const SEAM_TOL: f64 = 1e-9;

fn fd_step(x: f64) -> f64 {
    f64::EPSILON.cbrt() * x.abs().max(1.0)
}

impl ParametrizedPatch {
    pub fn new(
        map: impl Fn(f64, f64) -> [f64; 3] + Send + Sync + 'static,
        r_range: (f64, f64),
        s_range: (f64, f64),
    ) -> Result<Self> {
        let ok = |(a, b): (f64, f64)| a.is_finite() && b.is_finite() && a < b;
        if !ok(r_range) || !ok(s_range) {
            return Err(Error::InvalidParameter(format!(
                "parameter ranges must be finite and non-empty: r {r_range:?}, s {s_range:?}"
            )));
        }
        Ok(Self {
            map: Arc::new(map),
            jacobian: None,
            r_range,
            s_range,
            seam: None,
        })
    }

    /// Attaches exact coordinate derivatives `(∂_r γ, ∂_s γ)`.
    pub fn with_jacobian(
        mut self,
        jacobian: impl Fn(f64, f64) -> [[f64; 3]; 2] + Send + Sync + 'static,
    ) -> Self {
        self.jacobian = Some(Arc::new(jacobian));
        self
    }

    /// Attaches a seam after checking `γ(r1, s) = γ(r0, φ(s))` on 64 samples.
    pub fn with_seam(mut self, seam: Seam) -> Result<Self> {
        if let Seam::Flip { sum } = seam {
            let (s0, s1) = self.s_range;
            if (sum - s0 - s1).abs() > SEAM_TOL {
                return Err(Error::InvalidParameter(
                    "seam map must send [s0, s1] onto itself".into(),
                ));
            }
        }
        self.seam = Some(seam);
        let defect = self.seam_defect(64);
        if defect > SEAM_TOL {
            return Err(Error::InvalidParameter(format!(
                "seam identification is off by {defect:e}"
            )));
        }
        Ok(self)
    }

    /// The strip `γ(r, s) = ([R + s cos(r/2)] cos r, [R + s cos(r/2)] sin r, s sin(r/2))`
    /// on `[0, 2π) × [-w, w]`, glued by `(2π, s) ~ (0, -s)`.
    pub fn mobius(radius: f64, half_width: f64) -> Result<Self> {
        if !(radius.is_finite() && half_width.is_finite() && half_width > 0.0 && radius > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "Möbius strip needs R > 0 and w > 0, got R = {radius}, w = {half_width}"
            )));
        }
        if half_width >= radius {
            return Err(Error::InvalidParameter(format!(
                "Möbius strip needs w < R, got R = {radius}, w = {half_width}"
            )));
        }
        let big_r = radius;
        Self::new(
            move |r, s| {
                let a = big_r + s * (r / 2.0).cos();
                [a * r.cos(), a * r.sin(), s * (r / 2.0).sin()]
            },
            (0.0, 2.0 * PI),
            (-half_width, half_width),
        )?
        .with_jacobian(move |r, s| {
            let (sh, ch) = (r / 2.0).sin_cos();
            let a = big_r + s * ch;
            [
                [
                    -0.5 * s * sh * r.cos() - a * r.sin(),
                    -0.5 * s * sh * r.sin() + a * r.cos(),
                    0.5 * s * ch,
                ],
                [ch * r.cos(), ch * r.sin(), sh],
            ]
        })
        .with_seam(Seam::Flip { sum: 0.0 })
    }

    /// Graph piece `(r, s) ↦ (c, r, s)` of the plane `{x = c}`.
    pub fn plane_x(c: f64, y_range: (f64, f64), t_range: (f64, f64)) -> Result<Self> {
        Ok(Self::new(move |r, s| [c, r, s], y_range, t_range)?
            .with_jacobian(|_, _| [[0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]))
    }

    /// Graph piece `(r, s) ↦ (r, s, c)` of the plane `{t = c}`.
    pub fn plane_t(c: f64, x_range: (f64, f64), y_range: (f64, f64)) -> Result<Self> {
        Ok(Self::new(move |r, s| [r, s, c], x_range, y_range)?
            .with_jacobian(|_, _| [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0]]))
    }

    /// The image `m ∘ γ` under a left translation or dilation, with the
    /// exact Jacobian pushed forward when one is attached.
    pub fn transformed(&self, m: &Automorphism) -> Result<Self> {
        m.validate()?;
        if let Automorphism::LeftTranslation(q) = m {
            if q.dim() != 1 {
                return Err(Error::RequiresH1(q.dim()));
            }
        }
        let inner = self.map.clone();
        let mm = m.clone();
        let map = move |r, s| {
            let [x, y, t] = inner(r, s);
            let p = mm
                .apply(&GroupElement::h1(x, y, t))
                .expect("validated automorphism");
            [p.x()[0], p.y()[0], p.t()]
        };
        let mut out = Self {
            map: Arc::new(map),
            jacobian: None,
            ..self.clone()
        };
        if let Some(jac) = self.jacobian.clone() {
            let mm = m.clone();
            out.jacobian = Some(Arc::new(move |r, s| {
                jac(r, s).map(|v| {
                    let w = mm.push_forward(1, &v).expect("validated automorphism");
                    [w[0], w[1], w[2]]
                })
            }));
        }
        Ok(out)
    }

    pub fn r_range(&self) -> (f64, f64) {
        self.r_range
    }

    pub fn s_range(&self) -> (f64, f64) {
        self.s_range
    }

    pub fn seam(&self) -> Option<Seam> {
        self.seam
    }

    pub fn has_exact_jacobian(&self) -> bool {
        self.jacobian.is_some()
    }

    pub fn coords(&self, r: f64, s: f64) -> [f64; 3] {
        (self.map)(r, s)
    }

    pub fn point(&self, r: f64, s: f64) -> Result<GroupElement> {
        let [x, y, t] = self.coords(r, s);
        GroupElement::new(vec![x], vec![y], t)
    }

    /// Largest coordinate gap between `γ(r1, s)` and `γ(r0, φ(s))`.
    pub fn seam_defect(&self, samples: usize) -> f64 {
        let Some(seam) = self.seam else {
            return 0.0;
        };
        let (r0, r1) = self.r_range;
        let (s0, s1) = self.s_range;
        (0..samples.max(2))
            .map(|j| {
                let s = s0 + (s1 - s0) * j as f64 / (samples.max(2) - 1) as f64;
                let a = self.coords(r1, s);
                let b = self.coords(r0, seam.apply(s));
                (0..3).map(|i| (a[i] - b[i]).abs()).fold(0.0, f64::max)
            })
            .fold(0.0, f64::max)
    }

    /// Coordinate tangents `(∂_r γ, ∂_s γ)`, exact when available.
    pub fn coordinate_tangents(&self, r: f64, s: f64) -> Result<[[f64; 3]; 2]> {
        match &self.jacobian {
            Some(j) => Ok(j(r, s)),
            None => self.coordinate_tangents_fd(r, s),
        }
    }

    /// Finite-difference coordinate tangents. Central differences in the
    /// interior; one-sided second-order stencils where a central stencil
    /// would leave the parameter rectangle (the `r` direction of a seamed
    /// patch is never cut off).
    pub fn coordinate_tangents_fd(&self, r: f64, s: f64) -> Result<[[f64; 3]; 2]> {
        let dr = self.derivative_fd(r, self.r_range, self.seam.is_some(), |v| self.coords(v, s))?;
        let ds = self.derivative_fd(s, self.s_range, false, |v| self.coords(r, v))?;
        Ok([dr, ds])
    }

    fn derivative_fd(
        &self,
        at: f64,
        (lo, hi): (f64, f64),
        unbounded: bool,
        f: impl Fn(f64) -> [f64; 3],
    ) -> Result<[f64; 3]> {
        let h = fd_step(at);
        if 2.0 * h > hi - lo {
            return Err(Error::DerivativeUnavailable(
                "parameter range too narrow for a finite-difference stencil".into(),
            ));
        }
        let out = if unbounded || (at - h >= lo && at + h <= hi) {
            let (p, m) = (f(at + h), f(at - h));
            let width = (at + h) - (at - h);
            [0, 1, 2].map(|i| (p[i] - m[i]) / width)
        } else if at - h < lo {
            let (a, b, c) = (f(at), f(at + h), f(at + 2.0 * h));
            [0, 1, 2].map(|i| (-3.0 * a[i] + 4.0 * b[i] - c[i]) / (2.0 * h))
        } else {
            let (a, b, c) = (f(at), f(at - h), f(at - 2.0 * h));
            [0, 1, 2].map(|i| (3.0 * a[i] - 4.0 * b[i] + c[i]) / (2.0 * h))
        };
        if out.iter().all(|v| v.is_finite()) {
            Ok(out)
        } else {
            Err(Error::DerivativeUnavailable(
                "non-finite finite-difference tangent".into(),
            ))
        }
    }

    fn frame_tangents_from(&self, r: f64, s: f64, jac: [[f64; 3]; 2]) -> Result<(FrameVector, FrameVector)> {
        let p = self.point(r, s)?;
        Ok((
            FrameVector::from_euclidean(&jac[0], &p)?,
            FrameVector::from_euclidean(&jac[1], &p)?,
        ))
    }

    /// `γ_r` and `γ_s` in the frame `(X, Y, T)` at `γ(r, s)`.
    pub fn tangents(&self, r: f64, s: f64) -> Result<(FrameVector, FrameVector)> {
        self.frame_tangents_from(r, s, self.coordinate_tangents(r, s)?)
    }

    pub fn tangents_fd(&self, r: f64, s: f64) -> Result<(FrameVector, FrameVector)> {
        self.frame_tangents_from(r, s, self.coordinate_tangents_fd(r, s)?)
    }

    /// The frame normal `N = γ_r ×_H γ_s`.
    pub fn normal(&self, r: f64, s: f64) -> Result<FrameVector> {
        let (a, b) = self.tangents(r, s)?;
        a.cross(&b)
    }

    pub fn normal_fd(&self, r: f64, s: f64) -> Result<FrameVector> {
        let (a, b) = self.tangents_fd(r, s)?;
        a.cross(&b)
    }

    /// Horizontal part `(N_1, N_2)` of the frame normal.
    pub fn horizontal_normal(&self, r: f64, s: f64) -> Result<[f64; 2]> {
        let n = self.normal(r, s)?;
        Ok([n.a[0], n.b[0]])
    }

    /// Euclidean normal `∂_r γ × ∂_s γ` in the coordinate basis.
    pub fn euclidean_normal(&self, r: f64, s: f64) -> Result<[f64; 3]> {
        let [a, b] = self.coordinate_tangents(r, s)?;
        Ok(cross3(a, b))
    }

    /// Sample abscissae: `m` values of `r` (the seam column `r1` is left out
    /// for seamed patches) and `k` values of `s` including both ends.
    pub fn grid(&self, m: usize, k: usize) -> (Vec<f64>, Vec<f64>) {
        let (r0, r1) = self.r_range;
        let (s0, s1) = self.s_range;
        let rs = if self.seam.is_some() {
            (0..m).map(|i| r0 + (r1 - r0) * i as f64 / m as f64).collect()
        } else {
            (0..m).map(|i| r0 + (r1 - r0) * i as f64 / (m - 1) as f64).collect()
        };
        let ss = (0..k).map(|j| s0 + (s1 - s0) * j as f64 / (k - 1) as f64).collect();
        (rs, ss)
    }

    /// Moves `(r, s)` into `[r0, r1)` through the seam. Points within `slack`
    /// of `r1` are represented on the `r0` side (just below `r0`).
    pub fn canonical(&self, r: f64, s: f64, slack: f64) -> (f64, f64) {
        let Some(seam) = self.seam else {
            return (r, s);
        };
        let (r0, r1) = self.r_range;
        let period = r1 - r0;
        let (mut r, mut s) = (r, s);
        while r < r0 - slack {
            r += period;
            s = seam.apply(s);
        }
        while r >= r1 - slack {
            r -= period;
            s = seam.apply(s);
        }
        (r, s)
    }

    /// Parameter distance, allowing one trip through the seam.
    pub fn param_distance(&self, a: (f64, f64), b: (f64, f64)) -> f64 {
        let direct = (a.0 - b.0).hypot(a.1 - b.1);
        let Some(seam) = self.seam else {
            return direct;
        };
        let period = self.r_range.1 - self.r_range.0;
        let up = (a.0 + period - b.0).hypot(seam.apply(a.1) - b.1);
        let down = (a.0 - period - b.0).hypot(seam.apply(a.1) - b.1);
        direct.min(up).min(down)
    }
}
