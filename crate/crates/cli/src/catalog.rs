use std::fs;

use heisenberg::{AxisBox, FrameIndex, LevelSetSurface, ParametrizedPatch, Polynomial, ScalarField};

use crate::config::{AnalysisConfig, SurfaceKind};
use crate::error::CliError;

/// A catalog surface. Planes carry both a level set (for the characteristic
/// search) and a graph patch (for orientability and invariance).
#[derive(Debug, Clone)]
pub struct CatalogSurface {
    pub n: usize,
    pub patch: Option<ParametrizedPatch>,
    pub level_set: Option<LevelSetSurface>,
}

fn usage(e: heisenberg::Error) -> CliError {
    match e {
        heisenberg::Error::InvalidParameter(m) => CliError::Usage(m),
        other => other.into(),
    }
}

fn plane(which: FrameIndex, c: f64) -> Result<LevelSetSurface, CliError> {
    let f = Polynomial::coordinate(1, which).add(&Polynomial::constant(1, -c));
    let mut lo = vec![-1.0; 3];
    let mut hi = vec![1.0; 3];
    let axis = which.position(1) - 1;
    lo[axis] = c - 1.0;
    hi[axis] = c + 1.0;
    let domain = AxisBox::new(lo, hi).map_err(usage)?;
    Ok(LevelSetSurface::new(ScalarField::from(f), domain)?)
}

pub fn build(cfg: &AnalysisConfig) -> Result<CatalogSurface, CliError> {
    let c = cfg.c.unwrap_or(0.0);
    if !c.is_finite() {
        return Err(CliError::Usage(format!("--c must be finite, got {c}")));
    }
    let out = match cfg.surface {
        SurfaceKind::Mobius => CatalogSurface {
            n: 1,
            patch: Some(
                ParametrizedPatch::mobius(cfg.radius.unwrap_or(f64::NAN), cfg.w.unwrap_or(f64::NAN))
                    .map_err(usage)?,
            ),
            level_set: None,
        },
        SurfaceKind::PlaneX => CatalogSurface {
            n: 1,
            patch: Some(ParametrizedPatch::plane_x(c, (-1.0, 1.0), (-1.0, 1.0)).map_err(usage)?),
            level_set: Some(plane(FrameIndex::X(0), c)?),
        },
        SurfaceKind::PlaneT => CatalogSurface {
            n: 1,
            patch: Some(ParametrizedPatch::plane_t(c, (-1.0, 1.0), (-1.0, 1.0)).map_err(usage)?),
            level_set: Some(plane(FrameIndex::T, c)?),
        },
        SurfaceKind::Poly => {
            let path = cfg.poly.as_ref().expect("validated config");
            let text = fs::read_to_string(path).map_err(|source| CliError::Io {
                path: path.clone(),
                source,
            })?;
            let poly = Polynomial::parse(&text).map_err(|source| CliError::Parse {
                path: path.clone(),
                source,
            })?;
            let n = poly.dim();
            let domain = AxisBox::cube(n, 1.0)?;
            CatalogSurface {
                n,
                patch: None,
                level_set: Some(LevelSetSurface::new(poly.into(), domain)?),
            }
        }
    };
    Ok(out)
}
