use std::collections::BTreeMap;
use std::fmt::Write as _;

use heisenberg::{CharacteristicPoint, InvarianceReport, Mode, OrientabilityReport, Verdict};
use serde::{Deserialize, Serialize};

use crate::config::TransformSpec;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub surface: String,
    pub parameters: Parameters,
    pub characteristic_points: Option<Vec<PointRecord>>,
    pub orientability: Option<Vec<OrientabilityRecord>>,
    pub invariance: Option<InvarianceRecord>,
    pub timings_ms: Option<BTreeMap<String, f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Parameters {
    #[serde(rename = "R")]
    pub radius: Option<f64>,
    pub w: Option<f64>,
    pub c: Option<f64>,
    pub poly: Option<String>,
    pub n: usize,
    pub grid: [usize; 2],
    pub tol: f64,
    pub char_tol: f64,
    pub modes: Vec<String>,
    pub excise: Option<f64>,
    pub transform: Option<TransformSpec>,
}

/// A horizontal coordinate: a number in `H^1`, a list in `H^n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Coord {
    Scalar(f64),
    Vector(Vec<f64>),
}

impl From<&[f64]> for Coord {
    fn from(v: &[f64]) -> Self {
        match v {
            [x] => Self::Scalar(*x),
            _ => Self::Vector(v.to_vec()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointRecord {
    pub r: Option<f64>,
    pub s: Option<f64>,
    pub x: Coord,
    pub y: Coord,
    pub t: f64,
    pub residual: f64,
    pub refined: bool,
}

impl From<&CharacteristicPoint> for PointRecord {
    fn from(p: &CharacteristicPoint) -> Self {
        Self {
            r: p.params.map(|q| q.0),
            s: p.params.map(|q| q.1),
            x: p.point.x().into(),
            y: p.point.y().into(),
            t: p.point.t(),
            residual: p.residual,
            refined: p.refined,
        }
    }
}

pub fn mode_name(mode: Mode) -> &'static str {
    match mode {
        Mode::Euclidean => "euclidean",
        Mode::Heisenberg => "heisenberg",
    }
}

fn finite(v: f64) -> Option<f64> {
    v.is_finite().then_some(v)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrientabilityRecord {
    pub mode: String,
    pub verdict: Verdict,
    pub seam_mismatch: Option<f64>,
    pub min_normal_norm: Option<f64>,
}

impl From<&OrientabilityReport> for OrientabilityRecord {
    fn from(r: &OrientabilityReport) -> Self {
        Self {
            mode: mode_name(r.mode).into(),
            verdict: r.verdict,
            seam_mismatch: r.seam_mismatch.and_then(finite),
            min_normal_norm: finite(r.min_normal_norm),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerdictChange {
    pub mode: String,
    pub original: Verdict,
    pub transformed: Verdict,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InvarianceRecord {
    pub transform: TransformSpec,
    pub passed: bool,
    pub original_points: Vec<PointRecord>,
    pub transformed_points: Vec<PointRecord>,
    pub max_param_diff: f64,
    pub max_ambient_diff: f64,
    pub verdicts: Vec<VerdictChange>,
    pub diffs: Vec<String>,
}

impl InvarianceRecord {
    pub fn new(transform: TransformSpec, r: &InvarianceReport) -> Self {
        Self {
            transform,
            passed: r.passed,
            original_points: r.original.iter().map(Into::into).collect(),
            transformed_points: r.transformed.iter().map(Into::into).collect(),
            max_param_diff: r.max_param_diff,
            max_ambient_diff: r.max_ambient_diff,
            verdicts: r
                .verdicts
                .iter()
                .map(|v| VerdictChange {
                    mode: mode_name(v.mode).into(),
                    original: v.original,
                    transformed: v.transformed,
                })
                .collect(),
            diffs: r.diffs.clone(),
        }
    }
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(|| "-".into(), |v| v.to_string())
}

fn coord(c: &Coord) -> String {
    match c {
        Coord::Scalar(v) => v.to_string(),
        Coord::Vector(v) => format!("{v:?}"),
    }
}

impl Report {
    pub fn to_json(&self) -> serde_json::Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let p = &self.parameters;
        let _ = writeln!(out, "surface: {} (H^{})", self.surface, p.n);
        let _ = writeln!(
            out,
            "grid: {}x{}  tol: {:e}  char_tol: {:e}",
            p.grid[0], p.grid[1], p.tol, p.char_tol
        );
        if let Some(points) = &self.characteristic_points {
            let _ = writeln!(out, "characteristic points: {}", points.len());
            for q in points {
                let _ = writeln!(
                    out,
                    "  r={} s={} x={} y={} t={} residual={:e}{}",
                    opt(q.r),
                    opt(q.s),
                    coord(&q.x),
                    coord(&q.y),
                    q.t,
                    q.residual,
                    if q.refined { "" } else { " (unrefined)" }
                );
            }
        }
        for o in self.orientability.iter().flatten() {
            let _ = writeln!(
                out,
                "orientability ({}): {:?}  seam_mismatch={}  min_normal_norm={}",
                o.mode,
                o.verdict,
                opt(o.seam_mismatch),
                opt(o.min_normal_norm)
            );
        }
        if let Some(inv) = &self.invariance {
            let _ = writeln!(
                out,
                "invariance: {}  max_param_diff={:e}  max_ambient_diff={:e}",
                if inv.passed { "passed" } else { "FAILED" },
                inv.max_param_diff,
                inv.max_ambient_diff
            );
            for d in &inv.diffs {
                let _ = writeln!(out, "  {d}");
            }
        }
        if let Some(t) = &self.timings_ms {
            for (k, v) in t {
                let _ = writeln!(out, "time {k}: {v:.1} ms");
            }
        }
        out
    }
}
