use std::collections::BTreeMap;
use std::time::Instant;

use heisenberg::{
    find_characteristic_points, invariance_audit, levelset_orientability, orientability_verdict,
    Mode, SearchOptions, Surface, Verdict, VerdictOptions,
};

use crate::catalog::{self, CatalogSurface};
use crate::config::{AnalysisConfig, AnalysisMode};
use crate::error::{CliError, EXIT_ERROR, EXIT_INCONCLUSIVE, EXIT_OK};
use crate::report::{InvarianceRecord, OrientabilityRecord, Parameters, PointRecord, Report};

fn parameters(cfg: &AnalysisConfig, surface: &CatalogSurface) -> Parameters {
    Parameters {
        radius: cfg.radius,
        w: cfg.w,
        c: cfg.c,
        poly: cfg.poly.as_ref().map(|p| p.display().to_string()),
        n: surface.n,
        grid: [cfg.grid.0, cfg.grid.1],
        tol: cfg.tol,
        char_tol: cfg.char_tol,
        modes: cfg.modes.iter().map(|m| m.name().to_string()).collect(),
        excise: cfg.excise,
        transform: cfg.transform.clone(),
    }
}

fn verdict_options(cfg: &AnalysisConfig) -> VerdictOptions {
    VerdictOptions {
        grid: cfg.grid,
        tol: cfg.tol,
        char_tol: cfg.char_tol,
        excise_radius: cfg.excise,
        base: None,
        execution: cfg.execution,
    }
}

/// Runs the requested analyses and returns the report with its exit status.
pub fn analyze(cfg: &AnalysisConfig) -> Result<(Report, u8), CliError> {
    let surface = catalog::build(cfg)?;
    let mut timings = BTreeMap::new();
    let mut report = Report {
        surface: cfg.surface.name().into(),
        parameters: parameters(cfg, &surface),
        characteristic_points: None,
        orientability: None,
        invariance: None,
        timings_ms: None,
    };

    if cfg.wants(AnalysisMode::Characteristic) {
        let clock = Instant::now();
        let target = match (&surface.level_set, &surface.patch) {
            (Some(l), _) => Surface::LevelSet(l.clone()),
            (None, Some(p)) => Surface::Patch(p.clone()),
            (None, None) => unreachable!("catalog surfaces carry a representation"),
        };
        let opts = SearchOptions {
            grid: cfg.grid,
            tol: cfg.tol,
            execution: cfg.execution,
        };
        let points = find_characteristic_points(&target, &opts)?;
        report.characteristic_points = Some(points.iter().map(PointRecord::from).collect());
        timings.insert("characteristic".to_string(), clock.elapsed().as_secs_f64() * 1e3);
    }

    let opts = verdict_options(cfg);
    let mut records = Vec::new();
    for (wanted, mode) in [
        (AnalysisMode::OrientabilityEuclidean, Mode::Euclidean),
        (AnalysisMode::OrientabilityHeisenberg, Mode::Heisenberg),
    ] {
        if !cfg.wants(wanted) {
            continue;
        }
        let clock = Instant::now();
        let rep = match (&surface.patch, &surface.level_set) {
            (Some(p), _) => orientability_verdict(p, mode, &opts)?,
            (None, Some(l)) => levelset_orientability(l, mode, &opts)?,
            (None, None) => unreachable!("catalog surfaces carry a representation"),
        };
        if rep.verdict == Verdict::Inconclusive {
            log::warn!(
                "{} orientability inconclusive: {} (at {:?})",
                crate::report::mode_name(mode),
                rep.reason.as_deref().unwrap_or("unknown"),
                rep.offending
            );
        }
        records.push(OrientabilityRecord::from(&rep));
        timings.insert(wanted.name().to_string(), clock.elapsed().as_secs_f64() * 1e3);
    }
    if !records.is_empty() {
        report.orientability = Some(records);
    }

    let mut status = EXIT_OK;
    if cfg.wants(AnalysisMode::Invariance) {
        let spec = cfg.transform.clone().expect("validated config");
        let Some(patch) = &surface.patch else {
            return Err(CliError::Usage(format!(
                "invariance needs a parametrized surface; {} has none",
                cfg.surface.name()
            )));
        };
        let m = spec.automorphism()?;
        if let heisenberg::Automorphism::LeftTranslation(q) = &m {
            if q.dim() != surface.n {
                return Err(CliError::Usage(format!(
                    "--translate needs {} components",
                    2 * surface.n + 1
                )));
            }
        }
        let clock = Instant::now();
        let audit = invariance_audit(patch, &m, &opts)?;
        if !audit.passed {
            for d in &audit.diffs {
                log::error!("invariance: {d}");
            }
            status = EXIT_ERROR;
        }
        report.invariance = Some(InvarianceRecord::new(spec, &audit));
        timings.insert("invariance".to_string(), clock.elapsed().as_secs_f64() * 1e3);
    }

    if status == EXIT_OK
        && report
            .orientability
            .iter()
            .flatten()
            .any(|o| o.verdict == Verdict::Inconclusive)
    {
        status = EXIT_INCONCLUSIVE;
    }
    if cfg.timings {
        report.timings_ms = Some(timings);
    }
    Ok((report, status))
}
