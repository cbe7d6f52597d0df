//! Parametrized patches in `H^1`, level sets in `H^n`, and the search for
//! characteristic points (where the horizontal normal vanishes).

mod levelset;
pub(crate) mod newton;
mod patch;

use serde::{Deserialize, Serialize};

pub use levelset::{AxisBox, LevelSetSurface, MAX_SCAN_NODES};
pub use patch::{ParametrizedPatch, Seam};

use crate::error::{Error, Result};
use crate::group::GroupElement;
use crate::par::{self, Execution};

#[derive(Debug, Clone)]
pub enum Surface {
    Patch(ParametrizedPatch),
    LevelSet(LevelSetSurface),
}

/// A located (or suspected) characteristic point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CharacteristicPoint {
    /// Patch parameters `(r, s)`; `None` for level sets.
    pub params: Option<(f64, f64)>,
    pub point: GroupElement,
    /// `|(N_1, N_2)|` for patches, `|∇_H f|` for level sets.
    pub residual: f64,
    /// `false` marks a scan candidate the solver could not confirm.
    pub refined: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchOptions {
    /// `(m, k)`: samples in `r` and `s` for patches; level sets use `k`
    /// cells per axis, capped by [`MAX_SCAN_NODES`].
    pub grid: (usize, usize),
    pub tol: f64,
    pub execution: Execution,
}

impl Default for SearchOptions {
    fn default() -> Self {
        Self {
            grid: (720, 160),
            tol: 1e-10,
            execution: Execution::default(),
        }
    }
}

impl SearchOptions {
    pub fn validate(&self) -> Result<()> {
        if self.grid.0 < 16 || self.grid.1 < 16 {
            return Err(Error::InvalidParameter(format!(
                "grid must be at least 16x16, got {}x{}",
                self.grid.0, self.grid.1
            )));
        }
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return Err(Error::InvalidParameter(format!("tolerance must be positive, got {}", self.tol)));
        }
        Ok(())
    }
}

pub fn find_characteristic_points(surface: &Surface, opts: &SearchOptions) -> Result<Vec<CharacteristicPoint>> {
    match surface {
        Surface::Patch(p) => patch_characteristic_points(p, opts),
        Surface::LevelSet(l) => l.characteristic_points(opts),
    }
}

/// Column index on the other side of the seam for row `j`, when the image
/// of `s_j` is itself a grid value.
fn seam_row(patch: &ParametrizedPatch, ss: &[f64], j: usize) -> Option<usize> {
    let seam = patch.seam()?;
    let target = seam.apply(ss[j]);
    let k = ss.len();
    let (s0, s1) = patch.s_range();
    let pos = (target - s0) / (s1 - s0) * (k - 1) as f64;
    let idx = pos.round();
    ((0.0..=(k - 1) as f64).contains(&idx) && (pos - idx).abs() < 0.25).then_some(idx as usize)
}

fn neighbours(
    patch: &ParametrizedPatch,
    ss: &[f64],
    m: usize,
    i: usize,
    j: usize,
) -> impl Iterator<Item = (usize, usize)> {
    let seamed = patch.seam().is_some();
    let k = ss.len();
    let mut out = Vec::with_capacity(8);
    for di in [-1i64, 0, 1] {
        for dj in [-1i64, 0, 1] {
            if di == 0 && dj == 0 {
                continue;
            }
            let nj = j as i64 + dj;
            if nj < 0 || nj >= k as i64 {
                continue;
            }
            let ni = i as i64 + di;
            if (0..m as i64).contains(&ni) {
                out.push((ni as usize, nj as usize));
            } else if seamed {
                if let Some(wj) = seam_row(patch, ss, nj as usize) {
                    out.push((ni.rem_euclid(m as i64) as usize, wj));
                }
            }
        }
    }
    out.into_iter()
}

fn patch_characteristic_points(
    patch: &ParametrizedPatch,
    opts: &SearchOptions,
) -> Result<Vec<CharacteristicPoint>> {
    opts.validate()?;
    let (m, k) = opts.grid;
    let exec = opts.execution;
    let (rs, ss) = patch.grid(m, k);
    let normals: Vec<[f64; 2]> = par::map_indices(m * k, exec, |idx| {
        patch
            .horizontal_normal(rs[idx / k], ss[idx % k])
            .unwrap_or([f64::NAN, f64::NAN])
    });
    let norm = |v: [f64; 2]| v[0].hypot(v[1]);

    let candidates: Vec<(f64, f64)> = par::map_indices(m * k, exec, |idx| {
        let (i, j) = (idx / k, idx % k);
        let here = normals[idx];
        let size = norm(here);
        if !size.is_finite() {
            return None;
        }
        let mut spread: f64 = 0.0;
        for (ni, nj) in neighbours(patch, &ss, m, i, j) {
            let other = normals[ni * k + nj];
            if norm(other) < size {
                return None;
            }
            // across a reversing seam the normal changes sign
            let plus = norm([other[0] + here[0], other[1] + here[1]]);
            let minus = norm([other[0] - here[0], other[1] - here[1]]);
            spread = spread.max(plus.min(minus));
        }
        (size <= 2.0 * spread + opts.tol).then_some((rs[i], ss[j]))
    })
    .into_iter()
    .flatten()
    .collect();
    log::debug!("patch scan: {} candidates", candidates.len());

    let residual_fn = |x: &[f64]| patch.horizontal_normal(x[0], x[1]).ok().map(|v| v.to_vec());
    let outcomes = par::map_slice(&candidates, exec, |&(r, s)| {
        newton::solve(
            residual_fn,
            |x| newton::fd_jacobian(&residual_fn, x),
            vec![r, s],
            opts.tol,
        )
    });

    let slack = 10.0 * opts.tol;
    let (r0, r1) = patch.r_range();
    let (s0, s1) = patch.s_range();
    let cell = ((r1 - r0) / m as f64).hypot((s1 - s0) / (k - 1) as f64);
    let mut found: Vec<CharacteristicPoint> = Vec::new();
    let mut suspects: Vec<CharacteristicPoint> = Vec::new();
    for (&start, out) in candidates.iter().zip(outcomes) {
        if !out.converged {
            log::debug!("candidate {start:?} stalled at residual {:e}", out.residual);
        }
        let (r, s) = if out.converged {
            patch.canonical(out.x[0], out.x[1], slack)
        } else {
            start
        };
        if out.converged {
            let r_out = patch.seam().is_none() && (r < r0 - slack || r > r1 + slack);
            if r_out || s < s0 - slack || s > s1 + slack {
                log::debug!("dropping root outside the parameter rectangle: ({r}, {s})");
                continue;
            }
        }
        let residual = norm(patch.horizontal_normal(r, s)?);
        let point = CharacteristicPoint {
            params: Some((r, s)),
            point: patch.point(r, s)?,
            residual,
            refined: out.converged && residual <= opts.tol,
        };
        if point.refined {
            let dup = found
                .iter()
                .any(|q| patch.param_distance(q.params.unwrap(), (r, s)) <= slack);
            if !dup {
                found.push(point);
            }
        } else {
            suspects.push(point);
        }
    }
    for s in suspects {
        let p = s.params.unwrap();
        if !found
            .iter()
            .any(|q| patch.param_distance(q.params.unwrap(), p) <= 2.0 * cell)
        {
            found.push(s);
        }
    }
    found.sort_by(|a, b| a.params.partial_cmp(&b.params).unwrap());
    Ok(found)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::Automorphism;

    fn closed_form_root(big_r: f64) -> f64 {
        (1.0 - 2.0 * big_r - (1.0 - 4.0 * big_r).sqrt()) / 2.0
    }

    fn mobius_points(big_r: f64, w: f64, exec: Execution) -> Vec<CharacteristicPoint> {
        let s = Surface::Patch(ParametrizedPatch::mobius(big_r, w).unwrap());
        let opts = SearchOptions {
            execution: exec,
            ..SearchOptions::default()
        };
        find_characteristic_points(&s, &opts).unwrap()
    }

    #[test]
    fn mobius_has_the_closed_form_point() {
        let pts = mobius_points(0.2, 0.1, Execution::Parallel);
        assert_eq!(pts.len(), 1, "{pts:?}");
        let p = &pts[0];
        assert!(p.refined && p.residual <= 1e-10);
        let (r, s) = p.params.unwrap();
        assert!(r.abs() <= 1e-8);
        assert!((s - closed_form_root(0.2)).abs() <= 1e-8);
        assert!((s - 0.0763932022).abs() <= 1e-9);
        let c = p.point.coords();
        assert!((c[0] - (0.5 - 0.05f64.sqrt())).abs() <= 1e-8);
        assert!(c[1].abs() <= 1e-8 && c[2].abs() <= 1e-8);
    }

    #[test]
    fn sequential_and_parallel_agree() {
        let a = mobius_points(0.2, 0.1, Execution::Sequential);
        let b = mobius_points(0.2, 0.1, Execution::Parallel);
        assert_eq!(a, b);
    }

    #[test]
    fn mobius_family_counts() {
        for (big_r, count) in [(0.10, 1), (0.15, 1), (0.20, 1), (0.25, 0), (0.3, 0), (0.5, 0), (1.0, 0)] {
            let pts = mobius_points(big_r, big_r / 2.0, Execution::Parallel);
            assert_eq!(pts.len(), count, "R = {big_r}: {pts:?}");
            assert!(pts.iter().all(|p| p.refined));
        }
        // the root (0.16) lies outside w = R/2 = 0.12 but inside w = 0.2
        assert!(mobius_points(0.24, 0.12, Execution::Parallel).is_empty());
        let pts = mobius_points(0.24, 0.2, Execution::Parallel);
        assert_eq!(pts.len(), 1);
        assert!((pts[0].params.unwrap().1 - closed_form_root(0.24)).abs() <= 1e-8);
    }

    #[test]
    fn mobius_r05_is_empty() {
        assert!(mobius_points(0.5, 0.2, Execution::Parallel).is_empty());
    }

    #[test]
    fn residuals_recheck_independently() {
        for p in mobius_points(0.15, 0.075, Execution::Parallel) {
            let (r, s) = p.params.unwrap();
            let fresh = ParametrizedPatch::mobius(0.15, 0.075).unwrap();
            let [a, b] = fresh.horizontal_normal(r, s).unwrap();
            assert!(a.hypot(b) <= 1e-10);
        }
    }

    #[test]
    fn transformed_patch_keeps_parameters() {
        let base = ParametrizedPatch::mobius(0.2, 0.1).unwrap();
        let q = GroupElement::h1(0.3, -0.7, 1.1);
        for m in [Automorphism::LeftTranslation(q), Automorphism::Dilation(2.0)] {
            let s = Surface::Patch(base.transformed(&m).unwrap());
            let pts = find_characteristic_points(&s, &SearchOptions::default()).unwrap();
            assert_eq!(pts.len(), 1);
            let (r, s) = pts[0].params.unwrap();
            assert!(r.abs() <= 1e-8 && (s - closed_form_root(0.2)).abs() <= 1e-8);
        }
    }

    #[test]
    fn options_are_validated() {
        let s = Surface::Patch(ParametrizedPatch::mobius(0.2, 0.1).unwrap());
        let bad = SearchOptions {
            grid: (8, 160),
            ..SearchOptions::default()
        };
        assert!(find_characteristic_points(&s, &bad).is_err());
        let bad = SearchOptions {
            tol: 0.0,
            ..SearchOptions::default()
        };
        assert!(find_characteristic_points(&s, &bad).is_err());
    }

    #[test]
    fn seam_row_lookup() {
        let p = ParametrizedPatch::mobius(0.2, 0.1).unwrap();
        let (_, ss) = p.grid(16, 17);
        for j in 0..17 {
            assert_eq!(seam_row(&p, &ss, j), Some(16 - j));
        }
    }

    #[test]
    fn n3_vanishes_on_the_half_turn() {
        let p = ParametrizedPatch::mobius(0.2, 0.1).unwrap();
        for j in 0..=40 {
            let s = -0.1 + 0.005 * j as f64;
            assert!(p.normal(std::f64::consts::PI, s).unwrap().c.abs() <= 1e-12);
        }
    }
}
