//! Euclidean and Heisenberg orientability of surfaces, decided by
//! transporting a unit normal across the parameter grid and comparing it
//! with its identified copy at the seam.

mod frames;
mod invariance;

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

pub use frames::{
    degenerate_set_check, euclidean_to_horizontal, frame_conditions, horizontal_to_euclidean,
    tangent_frame, volume_form,
};
pub use invariance::{invariance_audit, InvarianceReport, VerdictPair};

use crate::calculus::horizontal_from_gradient;
use crate::error::Result;
use crate::par::{self, Execution};
use crate::surfaces::{find_characteristic_points, LevelSetSurface, ParametrizedPatch, SearchOptions, Surface};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Mode {
    Euclidean,
    Heisenberg,
}

impl Mode {
    pub const ALL: [Mode; 2] = [Mode::Euclidean, Mode::Heisenberg];
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    Orientable,
    NonOrientable,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrientabilityReport {
    pub mode: Mode,
    pub verdict: Verdict,
    /// Mean seam cosine; `None` without a seam.
    pub seam_mismatch: Option<f64>,
    pub seam_cosines: Vec<f64>,
    /// Smallest normal norm met before normalizing.
    pub min_normal_norm: f64,
    pub samples: usize,
    /// Grid nodes left out around characteristic points.
    pub excised: usize,
    /// Parameters (or coordinates) of the sample that made the run inconclusive.
    pub offending: Option<Vec<f64>>,
    pub reason: Option<String>,
}

impl OrientabilityReport {
    fn inconclusive(mode: Mode, reason: String, offending: Option<Vec<f64>>) -> Self {
        Self {
            mode,
            verdict: Verdict::Inconclusive,
            seam_mismatch: None,
            seam_cosines: Vec::new(),
            min_normal_norm: f64::NAN,
            samples: 0,
            excised: 0,
            offending,
            reason: Some(reason),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VerdictOptions {
    /// `(m, k)` samples in `r` and `s`.
    pub grid: (usize, usize),
    /// Newton tolerance for the characteristic search.
    pub tol: f64,
    /// Normals shorter than this make the verdict inconclusive.
    pub char_tol: f64,
    /// Parameter radius removed around each characteristic point.
    pub excise_radius: Option<f64>,
    /// Parameters where transport starts; defaults to `(r0, mid s)`.
    pub base: Option<(f64, f64)>,
    pub execution: Execution,
}

impl Default for VerdictOptions {
    fn default() -> Self {
        Self {
            grid: (720, 160),
            tol: 1e-10,
            char_tol: 1e-8,
            excise_radius: None,
            base: None,
            execution: Execution::default(),
        }
    }
}

impl VerdictOptions {
    pub fn search(&self) -> SearchOptions {
        SearchOptions {
            grid: self.grid,
            tol: self.tol,
            execution: self.execution,
        }
    }
}

const FLIP: f64 = 0.9;
const STEP_COSINE: f64 = 0.5;

fn unit_normal(patch: &ParametrizedPatch, mode: Mode, r: f64, s: f64) -> Result<(Vec<f64>, f64)> {
    let n = patch.normal(r, s)?;
    let v = match mode {
        Mode::Euclidean => vec![n.a[0], n.b[0], n.c],
        Mode::Heisenberg => vec![n.a[0], n.b[0]],
    };
    let norm = v.iter().map(|c| c * c).sum::<f64>().sqrt();
    Ok((v.iter().map(|c| c / norm).collect(), norm))
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(u, v)| u * v).sum()
}

/// Orientability verdict for a patch in the given mode.
pub fn orientability_verdict(
    patch: &ParametrizedPatch,
    mode: Mode,
    opts: &VerdictOptions,
) -> Result<OrientabilityReport> {
    let search = opts.search();
    search.validate()?;
    let chars = find_characteristic_points(&Surface::Patch(patch.clone()), &search)?;
    if let (Some(first), None) = (chars.first(), opts.excise_radius) {
        let (r, s) = first.params.expect("patch parameters");
        return Ok(OrientabilityReport::inconclusive(
            mode,
            format!("{} characteristic point(s) on the patch", chars.len()),
            Some(vec![r, s]),
        ));
    }
    let centres: Vec<(f64, f64)> = chars.iter().filter_map(|c| c.params).collect();
    let radius = opts.excise_radius.unwrap_or(0.0);

    let (m, k) = opts.grid;
    let (r0, r1) = patch.r_range();
    let seam = patch.seam();
    let (rs, ss) = match seam {
        Some(_) => {
            let (_, ss) = patch.grid(m, k);
            let rs: Vec<f64> = (0..=m).map(|i| r0 + (r1 - r0) * i as f64 / m as f64).collect();
            (rs, ss)
        }
        None => patch.grid(m, k),
    };
    let cols = rs.len();
    let masked: Vec<bool> = (0..cols * k)
        .map(|idx| {
            let p = (rs[idx / k], ss[idx % k]);
            centres.iter().any(|&c| patch.param_distance(c, p) <= radius)
        })
        .collect();
    let excised = masked.iter().filter(|&&b| b).count();

    let normals: Vec<Option<(Vec<f64>, f64)>> = par::map_indices(cols * k, opts.execution, |idx| {
        if masked[idx] {
            return None;
        }
        unit_normal(patch, mode, rs[idx / k], ss[idx % k]).ok()
    });
    let mut min_norm = f64::INFINITY;
    let mut samples = 0;
    for (idx, n) in normals.iter().enumerate() {
        if masked[idx] {
            continue;
        }
        let (i, j) = (idx / k, idx % k);
        match n {
            Some((_, norm)) if *norm >= opts.char_tol && norm.is_finite() => {
                min_norm = min_norm.min(*norm);
                samples += 1;
            }
            other => {
                let mut rep = OrientabilityReport::inconclusive(
                    mode,
                    "normal vanishes or is undefined at a sample".into(),
                    Some(vec![rs[i], ss[j]]),
                );
                rep.min_normal_norm = other.as_ref().map_or(f64::NAN, |n| n.1);
                rep.excised = excised;
                return Ok(rep);
            }
        }
    }

    // breadth-first sign transport over the 4-neighbour graph
    let base = opts.base.unwrap_or((r0, ss[k / 2]));
    let start = (0..cols * k)
        .filter(|&idx| !masked[idx])
        .min_by(|&a, &b| {
            let da = (rs[a / k] - base.0).hypot(ss[a % k] - base.1);
            let db = (rs[b / k] - base.0).hypot(ss[b % k] - base.1);
            da.partial_cmp(&db).unwrap()
        });
    let Some(start) = start else {
        return Ok(OrientabilityReport::inconclusive(mode, "every sample was excised".into(), None));
    };
    let unit = |idx: usize| &normals[idx].as_ref().unwrap().0;
    let mut sign = vec![0i8; cols * k];
    sign[start] = 1;
    let mut queue = VecDeque::from([start]);
    while let Some(idx) = queue.pop_front() {
        let (i, j) = (idx / k, idx % k);
        let mut next = Vec::with_capacity(4);
        if i > 0 {
            next.push(idx - k);
        }
        if i + 1 < cols {
            next.push(idx + k);
        }
        if j > 0 {
            next.push(idx - 1);
        }
        if j + 1 < k {
            next.push(idx + 1);
        }
        for nb in next {
            if masked[nb] {
                continue;
            }
            let c = dot(unit(idx), unit(nb));
            if c.abs() < STEP_COSINE {
                let mut rep = OrientabilityReport::inconclusive(
                    mode,
                    format!("normal turns too fast between neighbouring samples (cosine {c:.3})"),
                    Some(vec![rs[nb / k], ss[nb % k]]),
                );
                rep.min_normal_norm = min_norm;
                rep.samples = samples;
                rep.excised = excised;
                return Ok(rep);
            }
            let s = sign[idx] * if c > 0.0 { 1 } else { -1 };
            if sign[nb] == 0 {
                sign[nb] = s;
                queue.push_back(nb);
            } else if sign[nb] != s {
                let mut rep = OrientabilityReport::inconclusive(
                    mode,
                    "sign transport is path dependent inside the parameter rectangle".into(),
                    Some(vec![rs[nb / k], ss[nb % k]]),
                );
                rep.min_normal_norm = min_norm;
                rep.samples = samples;
                rep.excised = excised;
                return Ok(rep);
            }
        }
    }
    if let Some(idx) = (0..cols * k).find(|&idx| !masked[idx] && sign[idx] == 0) {
        let mut rep = OrientabilityReport::inconclusive(
            mode,
            "excision disconnects the parameter rectangle".into(),
            Some(vec![rs[idx / k], ss[idx % k]]),
        );
        rep.min_normal_norm = min_norm;
        rep.samples = samples;
        rep.excised = excised;
        return Ok(rep);
    }

    let mut report = OrientabilityReport {
        mode,
        verdict: Verdict::Orientable,
        seam_mismatch: None,
        seam_cosines: Vec::new(),
        min_normal_norm: min_norm,
        samples,
        excised,
        offending: None,
        reason: None,
    };
    let Some(seam) = seam else {
        return Ok(report);
    };

    let (s0, s1) = patch.s_range();
    let last = cols - 1;
    let mut cosines = Vec::with_capacity(k);
    for j in 0..k {
        let pos = (seam.apply(ss[j]) - s0) / (s1 - s0) * (k - 1) as f64;
        let jj = pos.round();
        if !(0.0..=(k - 1) as f64).contains(&jj) || (pos - jj).abs() > 1e-6 {
            continue;
        }
        let (a, b) = (last * k + j, jj as usize);
        if masked[a] || masked[b] {
            continue;
        }
        let c = f64::from(sign[a] * sign[b]) * dot(unit(a), unit(b));
        cosines.push(c);
    }
    if cosines.is_empty() {
        report.verdict = Verdict::Inconclusive;
        report.reason = Some("no seam samples survive".into());
        return Ok(report);
    }
    report.seam_mismatch = Some(cosines.iter().sum::<f64>() / cosines.len() as f64);
    report.verdict = if cosines.iter().all(|&c| c > FLIP) {
        Verdict::Orientable
    } else if cosines.iter().all(|&c| c < -FLIP) {
        Verdict::NonOrientable
    } else {
        report.reason = Some("seam cosines are mixed".into());
        Verdict::Inconclusive
    };
    report.seam_cosines = cosines;
    Ok(report)
}

/// Verdict for `{f = 0}`. A level set always carries the global normal
/// `∇f`, so it is Euclidean-orientable when `∇f` never vanishes on it, and
/// `H`-orientable when it has no characteristic points.
pub fn levelset_orientability(
    surface: &LevelSetSurface,
    mode: Mode,
    opts: &VerdictOptions,
) -> Result<OrientabilityReport> {
    let search = opts.search();
    search.validate()?;
    if mode == Mode::Heisenberg {
        let chars = find_characteristic_points(&Surface::LevelSet(surface.clone()), &search)?;
        if let Some(first) = chars.first() {
            return Ok(OrientabilityReport::inconclusive(
                mode,
                format!("{} characteristic point(s) on the level set", chars.len()),
                Some(first.point.coords()),
            ));
        }
    }
    let n = surface.dim();
    let samples = surface.surface_samples(surface.scan_cells(opts.grid.1), opts.execution);
    let norms: Vec<(f64, &Vec<f64>)> = samples
        .iter()
        .filter_map(|c| {
            let g = surface.field().gradient_coords(c).ok()?;
            let norm = match mode {
                Mode::Euclidean => g.iter().map(|v| v * v).sum::<f64>().sqrt(),
                Mode::Heisenberg => horizontal_from_gradient(n, c, &g).horizontal_norm(),
            };
            Some((norm, c))
        })
        .collect();
    let min = norms.iter().map(|(v, _)| *v).fold(f64::INFINITY, f64::min);
    if let Some((_, c)) = norms.iter().find(|(v, _)| !(*v >= opts.char_tol)) {
        let mut rep = OrientabilityReport::inconclusive(
            mode,
            "normal vanishes at a surface sample".into(),
            Some(c.to_vec()),
        );
        rep.min_normal_norm = min;
        rep.samples = norms.len();
        return Ok(rep);
    }
    Ok(OrientabilityReport {
        mode,
        verdict: if norms.is_empty() {
            Verdict::Inconclusive
        } else {
            Verdict::Orientable
        },
        seam_mismatch: None,
        seam_cosines: Vec::new(),
        min_normal_norm: min,
        samples: norms.len(),
        excised: 0,
        offending: None,
        reason: norms.is_empty().then(|| "no surface samples in the domain".into()),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calculus::Polynomial;
    use crate::frame::FrameIndex;
    use crate::surfaces::AxisBox;

    fn strip(big_r: f64, w: f64) -> ParametrizedPatch {
        ParametrizedPatch::mobius(big_r, w).unwrap()
    }

    #[test]
    fn wide_strip_is_non_orientable_in_both_modes() {
        let p = strip(0.5, 0.2);
        for mode in Mode::ALL {
            let rep = orientability_verdict(&p, mode, &VerdictOptions::default()).unwrap();
            assert_eq!(rep.verdict, Verdict::NonOrientable, "{rep:?}");
            assert!(rep.seam_cosines.iter().all(|&c| c <= -0.99));
            assert_eq!(rep.seam_cosines.len(), 160);
            assert!(rep.min_normal_norm > 1e-8);
        }
    }

    #[test]
    fn characteristic_point_makes_it_inconclusive() {
        let p = strip(0.2, 0.1);
        let rep = orientability_verdict(&p, Mode::Heisenberg, &VerdictOptions::default()).unwrap();
        assert_eq!(rep.verdict, Verdict::Inconclusive);
        let off = rep.offending.unwrap();
        assert!(off[0].abs() < 1e-8 && (off[1] - 0.0763932022).abs() < 1e-8);
    }

    #[test]
    fn excised_strip_is_non_orientable() {
        let p = strip(0.2, 0.1);
        let opts = VerdictOptions {
            excise_radius: Some(0.05),
            ..VerdictOptions::default()
        };
        for mode in Mode::ALL {
            let rep = orientability_verdict(&p, mode, &opts).unwrap();
            assert_eq!(rep.verdict, Verdict::NonOrientable, "{rep:?}");
            assert!(rep.excised > 0);
            assert!(rep.seam_cosines.iter().all(|&c| c <= -0.99));
        }
    }

    #[test]
    fn base_point_does_not_matter() {
        let p = strip(0.5, 0.2);
        let bases = [(0.0, 0.0), (1.0, 0.1), (2.0, -0.2), (3.0, 0.05), (4.0, -0.1), (5.0, 0.2), (6.0, 0.0), (6.2, -0.15)];
        for base in bases {
            let opts = VerdictOptions {
                base: Some(base),
                grid: (180, 40),
                ..VerdictOptions::default()
            };
            for mode in Mode::ALL {
                let rep = orientability_verdict(&p, mode, &opts).unwrap();
                assert_eq!(rep.verdict, Verdict::NonOrientable);
            }
        }
    }

    #[test]
    fn untwisted_band_is_orientable() {
        let a = 0.5;
        let band = ParametrizedPatch::new(
            move |r, s| [(a + s) * r.cos(), (a + s) * r.sin(), 0.3 * s],
            (0.0, std::f64::consts::TAU),
            (-0.2, 0.2),
        )
        .unwrap()
        .with_seam(crate::surfaces::Seam::Straight)
        .unwrap();
        let rep = orientability_verdict(&band, Mode::Euclidean, &VerdictOptions::default()).unwrap();
        assert_eq!(rep.verdict, Verdict::Orientable);
        assert!(rep.seam_cosines.iter().all(|&c| c >= 0.99));
    }

    #[test]
    fn plane_graph_is_orientable() {
        let p = ParametrizedPatch::plane_x(0.0, (-1.0, 1.0), (-1.0, 1.0)).unwrap();
        for mode in Mode::ALL {
            let rep = orientability_verdict(&p, mode, &VerdictOptions::default()).unwrap();
            assert_eq!(rep.verdict, Verdict::Orientable);
            assert_eq!(rep.seam_mismatch, None);
            assert_eq!(rep.min_normal_norm, 1.0);
        }
    }

    #[test]
    fn level_sets() {
        let cube = AxisBox::cube(1, 1.0).unwrap();
        let x = LevelSetSurface::new(Polynomial::coordinate(1, FrameIndex::X(0)).into(), cube.clone()).unwrap();
        let t = LevelSetSurface::new(Polynomial::coordinate(1, FrameIndex::T).into(), cube).unwrap();
        let opts = VerdictOptions {
            grid: (64, 64),
            ..VerdictOptions::default()
        };
        for mode in Mode::ALL {
            assert_eq!(levelset_orientability(&x, mode, &opts).unwrap().verdict, Verdict::Orientable);
        }
        assert_eq!(levelset_orientability(&t, Mode::Euclidean, &opts).unwrap().verdict, Verdict::Orientable);
        assert_eq!(
            levelset_orientability(&t, Mode::Heisenberg, &opts).unwrap().verdict,
            Verdict::Inconclusive
        );
    }
}
