use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::newton;
use super::{CharacteristicPoint, SearchOptions};
use crate::calculus::{frame_derivative_gradient, horizontal_from_gradient, ScalarField};
use crate::error::{Error, Result};
use crate::frame::{FrameIndex, FrameVector};
use crate::group::GroupElement;
use crate::par;

/// Axis-aligned box `[lo_i, hi_i]` in `R^{2n+1}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AxisBox {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl AxisBox {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        if lo.len() != hi.len() || lo.len() < 3 || lo.len() % 2 == 0 {
            return Err(Error::InvalidParameter(format!(
                "box needs 2n+1 bounds on each side, got {} and {}",
                lo.len(),
                hi.len()
            )));
        }
        if lo.iter().zip(&hi).any(|(a, b)| !(a.is_finite() && b.is_finite() && a < b)) {
            return Err(Error::InvalidParameter("box bounds must be finite with lo < hi".into()));
        }
        Ok(Self { lo, hi })
    }

    /// The cube `[-half, half]^{2n+1}`.
    pub fn cube(n: usize, half: f64) -> Result<Self> {
        Self::new(vec![-half; 2 * n + 1], vec![half; 2 * n + 1])
    }

    pub fn dim(&self) -> usize {
        (self.lo.len() - 1) / 2
    }

    pub fn contains(&self, c: &[f64], slack: f64) -> bool {
        c.iter()
            .zip(self.lo.iter().zip(&self.hi))
            .all(|(v, (a, b))| *v >= a - slack && *v <= b + slack)
    }
}

/// The zero set `{f = 0}` inside a box.
#[derive(Debug, Clone)]
pub struct LevelSetSurface {
    field: ScalarField,
    domain: AxisBox,
    surface_tol: f64,
    char_tol: f64,
}

/// Node budget of the level-set scan.
pub const MAX_SCAN_NODES: usize = 1 << 21;

impl LevelSetSurface {
    pub fn new(field: ScalarField, domain: AxisBox) -> Result<Self> {
        if field.dim() != domain.dim() {
            return Err(Error::DimensionMismatch {
                expected: field.dim(),
                found: domain.dim(),
            });
        }
        Ok(Self {
            field,
            domain,
            surface_tol: 1e-8,
            char_tol: 1e-8,
        })
    }

    /// Sets the on-surface tolerance for `|f(p)|` and the threshold below
    /// which a horizontal gradient counts as vanishing.
    pub fn with_tolerances(mut self, surface_tol: f64, char_tol: f64) -> Result<Self> {
        if !(surface_tol > 0.0 && char_tol > 0.0) {
            return Err(Error::InvalidParameter("tolerances must be positive".into()));
        }
        self.surface_tol = surface_tol;
        self.char_tol = char_tol;
        Ok(self)
    }

    pub fn field(&self) -> &ScalarField {
        &self.field
    }

    pub fn domain(&self) -> &AxisBox {
        &self.domain
    }

    pub fn dim(&self) -> usize {
        self.field.dim()
    }

    /// `∇_H f(p)`, optionally normalized.
    pub fn horizontal_normal(&self, p: &GroupElement, normalize: bool) -> Result<FrameVector> {
        let c = self.field.check_point(p)?;
        let value = self.field.eval_coords(&c);
        if !(value.abs() <= self.surface_tol) {
            return Err(Error::OffSurface(value.abs()));
        }
        let g = self.field.gradient_coords(&c)?;
        let v = horizontal_from_gradient(self.dim(), &c, &g);
        if !normalize {
            return Ok(v);
        }
        let norm = v.horizontal_norm();
        if norm < self.char_tol {
            return Err(Error::VanishingHorizontalGradient { norm });
        }
        Ok(v.scale(1.0 / norm))
    }

    /// Cells per axis for a requested resolution, capped by [`MAX_SCAN_NODES`].
    pub fn scan_cells(&self, requested: usize) -> usize {
        let d = 2 * self.dim() + 1;
        let mut cells = requested.max(1);
        while (cells + 1).checked_pow(d as u32).is_none_or(|v| v > MAX_SCAN_NODES) && cells > 1 {
            cells -= 1;
        }
        cells
    }

    /// Points of `{f = 0}` found by projecting the centres of sign-change
    /// cells of a uniform scan onto the zero set.
    pub fn surface_samples(&self, cells: usize, exec: par::Execution) -> Vec<Vec<f64>> {
        let scan = Scan::new(self, cells, exec);
        let hits = scan.sign_change_cells(exec);
        par::map_slice(&hits, exec, |&cell| {
            let centre = scan.cell_centre(cell);
            self.project(&centre, scan.diameter())
        })
        .into_iter()
        .flatten()
        .collect()
    }

    /// Newton along `∇f` from `c` onto `f = 0`. Gives up when the point
    /// moves more than `reach` away or the gradient vanishes.
    fn project(&self, c: &[f64], reach: f64) -> Option<Vec<f64>> {
        let mut p = c.to_vec();
        for _ in 0..20 {
            let v = self.field.eval_coords(&p);
            if !v.is_finite() {
                return None;
            }
            if v.abs() <= 1e-14 * (1.0 + p.iter().map(|x| x.abs()).fold(0.0, f64::max)) {
                break;
            }
            let g = self.field.gradient_coords(&p).ok()?;
            let g2: f64 = g.iter().map(|x| x * x).sum();
            if g2 == 0.0 || !g2.is_finite() {
                return None;
            }
            for (x, gi) in p.iter_mut().zip(&g) {
                *x -= v * gi / g2;
            }
        }
        let moved = p.iter().zip(c).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
        (moved <= reach && self.field.eval_coords(&p).abs() <= self.surface_tol).then_some(p)
    }

    /// `(f, X_1 f..X_n f, Y_1 f..Y_n f)` at coordinates `c`.
    fn system(&self, c: &[f64]) -> Option<Vec<f64>> {
        let g = self.field.gradient_coords(c).ok()?;
        let h = horizontal_from_gradient(self.dim(), c, &g);
        let mut out = Vec::with_capacity(c.len());
        out.push(self.field.eval_coords(c));
        out.extend(h.a);
        out.extend(h.b);
        out.iter().all(|v| v.is_finite()).then_some(out)
    }

    fn system_jacobian(&self, c: &[f64]) -> Option<DMatrix<f64>> {
        let n = self.dim();
        let g = self.field.gradient_coords(c).ok()?;
        let h = self.field.hessian_coords(c).ok()?;
        let rows = std::iter::once(g.clone()).chain(
            (0..n)
                .map(FrameIndex::X)
                .chain((0..n).map(FrameIndex::Y))
                .map(|w| frame_derivative_gradient(n, w, c, &g, &h)),
        );
        let d = c.len();
        let mut j = DMatrix::zeros(d, d);
        for (r, row) in rows.enumerate() {
            for (k, v) in row.into_iter().enumerate() {
                j[(r, k)] = v;
            }
        }
        Some(j)
    }

    /// Frobenius norm of the coordinate derivative of `∇_H f`.
    fn horizontal_lipschitz(&self, c: &[f64]) -> Option<f64> {
        let j = self.system_jacobian(c)?;
        let mut s = 0.0;
        for r in 1..j.nrows() {
            for k in 0..j.ncols() {
                s += j[(r, k)] * j[(r, k)];
            }
        }
        Some(s.sqrt())
    }

    pub(crate) fn characteristic_points(&self, opts: &SearchOptions) -> Result<Vec<CharacteristicPoint>> {
        opts.validate()?;
        let exec = opts.execution;
        let scan = Scan::new(self, opts.grid.1, exec);
        let diam = scan.diameter();
        let hits = scan.sign_change_cells(exec);
        let candidates: Vec<Vec<f64>> = par::map_slice(&hits, exec, |&cell| {
            let p = self.project(&scan.cell_centre(cell), diam)?;
            let sys = self.system(&p)?;
            let hnorm = sys[1..].iter().map(|v| v * v).sum::<f64>().sqrt();
            let lip = self.horizontal_lipschitz(&p)?;
            (hnorm <= 2.0 * lip * diam + opts.tol).then_some(p)
        })
        .into_iter()
        .flatten()
        .collect();
        log::debug!("level-set scan: {} sign-change cells, {} candidates", hits.len(), candidates.len());

        let refined = par::map_slice(&candidates, exec, |p| {
            newton::solve(
                |c| self.system(c),
                |c| self.system_jacobian(c),
                p.clone(),
                opts.tol,
            )
        });

        let mut found: Vec<CharacteristicPoint> = Vec::new();
        let mut suspects: Vec<CharacteristicPoint> = Vec::new();
        for (start, out) in candidates.iter().zip(refined) {
            if !out.converged {
                log::debug!("candidate {start:?} stalled at residual {:e}", out.residual);
            }
            let at = if out.converged { &out.x } else { start };
            if out.converged && !self.domain.contains(&out.x, 10.0 * opts.tol) {
                log::debug!("dropping level-set root outside the domain: {:?}", out.x);
                continue;
            }
            let Some(sys) = self.system(at) else {
                continue;
            };
            let residual = sys[1..].iter().map(|v| v * v).sum::<f64>().sqrt();
            let refined = out.converged && residual <= opts.tol && sys[0].abs() <= opts.tol;
            let point = CharacteristicPoint {
                params: None,
                point: GroupElement::from_coords(at)?,
                residual,
                refined,
            };
            if refined {
                if found.iter().all(|q| distance(&q.point, &point.point) > 10.0 * opts.tol) {
                    found.push(point);
                }
            } else {
                suspects.push(point);
            }
        }
        for s in suspects {
            let near = |q: &CharacteristicPoint| distance(&q.point, &s.point) <= 2.0 * diam;
            if !found.iter().any(near) {
                found.push(s);
            }
        }
        found.sort_by(|a, b| a.point.coords().partial_cmp(&b.point.coords()).unwrap());
        Ok(found)
    }
}

fn distance(a: &GroupElement, b: &GroupElement) -> f64 {
    a.coords()
        .iter()
        .zip(b.coords())
        .map(|(u, v)| (u - v).powi(2))
        .sum::<f64>()
        .sqrt()
}

struct Scan<'a> {
    cells: usize,
    d: usize,
    step: Vec<f64>,
    lo: &'a [f64],
    values: Vec<f64>,
}

impl<'a> Scan<'a> {
    fn new(s: &'a LevelSetSurface, requested: usize, exec: par::Execution) -> Self {
        let cells = s.scan_cells(requested);
        let d = s.domain.lo.len();
        let step: Vec<f64> = (0..d)
            .map(|i| (s.domain.hi[i] - s.domain.lo[i]) / cells as f64)
            .collect();
        let lo = &s.domain.lo[..];
        let nodes = (cells + 1).pow(d as u32);
        let values = par::map_indices(nodes, exec, |idx| {
            let mut c = vec![0.0; d];
            let mut rest = idx;
            for (i, ci) in c.iter_mut().enumerate() {
                *ci = lo[i] + step[i] * (rest % (cells + 1)) as f64;
                rest /= cells + 1;
            }
            s.field.eval_coords(&c)
        });
        Self {
            cells,
            d,
            step,
            lo,
            values,
        }
    }

    fn diameter(&self) -> f64 {
        self.step.iter().map(|h| h * h).sum::<f64>().sqrt()
    }

    fn cell_corner(&self, cell: usize) -> Vec<usize> {
        let mut rest = cell;
        (0..self.d)
            .map(|_| {
                let i = rest % self.cells;
                rest /= self.cells;
                i
            })
            .collect()
    }

    fn cell_centre(&self, cell: usize) -> Vec<f64> {
        self.cell_corner(cell)
            .iter()
            .enumerate()
            .map(|(i, &k)| self.lo[i] + self.step[i] * (k as f64 + 0.5))
            .collect()
    }

    fn sign_change_cells(&self, exec: par::Execution) -> Vec<usize> {
        let total = self.cells.pow(self.d as u32);
        let stride = self.cells + 1;
        par::map_indices(total, exec, |cell| {
            let corner = self.cell_corner(cell);
            let (mut pos, mut nonpos) = (false, false);
            for mask in 0..(1usize << self.d) {
                let mut idx = 0;
                let mut mul = 1;
                for (i, &k) in corner.iter().enumerate() {
                    idx += (k + ((mask >> i) & 1)) * mul;
                    mul *= stride;
                }
                let v = self.values[idx];
                if v > 0.0 {
                    pos = true;
                } else if v <= 0.0 {
                    nonpos = true;
                }
            }
            (pos && nonpos).then_some(cell)
        })
        .into_iter()
        .flatten()
        .collect()
    }
}
