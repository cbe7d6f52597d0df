use std::io::Write;

use serde::Serialize;

use crate::catalog;
use crate::config::AnalysisConfig;
use crate::error::CliError;

#[derive(Debug, Serialize)]
struct Row {
    r: f64,
    s: f64,
    x: f64,
    y: f64,
    t: f64,
    #[serde(rename = "N1")]
    n1: f64,
    #[serde(rename = "N2")]
    n2: f64,
    #[serde(rename = "N3")]
    n3: f64,
    #[serde(rename = "nE1")]
    e1: f64,
    #[serde(rename = "nE2")]
    e2: f64,
    #[serde(rename = "nE3")]
    e3: f64,
}

/// Writes `m·k` rows, `r` outer and `s` inner, to `out`.
pub fn export(cfg: &AnalysisConfig, out: impl Write) -> Result<usize, CliError> {
    let surface = catalog::build(cfg)?;
    let Some(patch) = surface.patch else {
        return Err(CliError::Usage(format!(
            "export needs a parametrized surface; {} has none",
            cfg.surface.name()
        )));
    };
    let (rs, ss) = patch.grid(cfg.grid.0, cfg.grid.1);
    let mut writer = csv::Writer::from_writer(out);
    let mut rows = 0;
    for &r in &rs {
        for &s in &ss {
            let [x, y, t] = patch.coords(r, s);
            let n = patch.normal(r, s)?;
            let [e1, e2, e3] = patch.euclidean_normal(r, s)?;
            writer.serialize(Row {
                r,
                s,
                x,
                y,
                t,
                n1: n.a[0],
                n2: n.b[0],
                n3: n.c,
                e1,
                e2,
                e3,
            })?;
            rows += 1;
        }
    }
    writer.flush()?;
    Ok(rows)
}
