use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use heisenberg::{Automorphism, Execution, GroupElement};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Parser)]
#[command(name = "hsurf", version, about = "Characteristic points and orientability of surfaces in the Heisenberg group")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Locate characteristic points and decide orientability.
    Analyze(AnalysisArgs),
    /// Sample a parametrized surface and its normals into a CSV file.
    Export(AnalysisArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SurfaceKind {
    Mobius,
    PlaneT,
    PlaneX,
    Poly,
}

impl SurfaceKind {
    pub fn name(self) -> &'static str {
        match self {
            Self::Mobius => "mobius",
            Self::PlaneT => "plane-t",
            Self::PlaneX => "plane-x",
            Self::Poly => "poly",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AnalysisMode {
    Characteristic,
    OrientabilityEuclidean,
    OrientabilityHeisenberg,
    Invariance,
}

impl AnalysisMode {
    pub fn name(self) -> &'static str {
        match self {
            Self::Characteristic => "characteristic",
            Self::OrientabilityEuclidean => "orientability-euclidean",
            Self::OrientabilityHeisenberg => "orientability-heisenberg",
            Self::Invariance => "invariance",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Json,
    Text,
}

#[derive(Debug, Clone, Args)]
pub struct AnalysisArgs {
    /// Catalog surface.
    #[arg(long, value_enum)]
    pub surface: SurfaceKind,
    /// Midcircle radius of the Möbius strip.
    #[arg(long = "R", value_name = "R")]
    pub radius: Option<f64>,
    /// Half-width of the Möbius strip.
    #[arg(long)]
    pub w: Option<f64>,
    /// Offset of a plane (`x = c` or `t = c`).
    #[arg(long, allow_hyphen_values = true)]
    pub c: Option<f64>,
    /// Polynomial file, one `coeff i_1..i_n j_1..j_n k` term per line.
    #[arg(long)]
    pub poly: Option<PathBuf>,
    /// Sample grid `MxK`.
    #[arg(long, default_value = "720x160", value_parser = parse_grid)]
    pub grid: (usize, usize),
    #[arg(long, default_value = "1e-10")]
    pub tol: f64,
    #[arg(long = "char-tol", default_value = "1e-8")]
    pub char_tol: f64,
    /// Comma-separated analyses to run.
    #[arg(long, value_enum, value_delimiter = ',')]
    pub modes: Vec<AnalysisMode>,
    /// Left translation `x,y,t` for the invariance audit.
    #[arg(long, allow_hyphen_values = true, value_parser = parse_vector)]
    pub translate: Option<Components>,
    /// Dilation factor for the invariance audit.
    #[arg(long)]
    pub dilate: Option<f64>,
    /// Parameter radius excised around characteristic points before
    /// deciding orientability.
    #[arg(long)]
    pub excise: Option<f64>,
    #[arg(long, value_enum, default_value = "json")]
    pub output: OutputFormat,
    /// Write the report (or CSV) here instead of standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Record wall-clock timings in the report.
    #[arg(long)]
    pub timings: bool,
    /// Run every scan on one thread.
    #[arg(long)]
    pub sequential: bool,
}

fn parse_grid(s: &str) -> Result<(usize, usize), String> {
    let (m, k) = s
        .split_once(['x', 'X'])
        .ok_or_else(|| format!("expected MxK, got `{s}`"))?;
    let parse = |v: &str| v.trim().parse::<usize>().map_err(|e| format!("`{v}`: {e}"));
    Ok((parse(m)?, parse(k)?))
}

/// Comma-separated reals.
#[derive(Debug, Clone, PartialEq)]
pub struct Components(pub Vec<f64>);

fn parse_vector(s: &str) -> Result<Components, String> {
    s.split(',')
        .map(|v| v.trim().parse::<f64>().map_err(|e| format!("`{v}`: {e}")))
        .collect::<Result<_, _>>()
        .map(Components)
}

/// Transform requested for the invariance audit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum TransformSpec {
    Translation { by: Vec<f64> },
    Dilation { factor: f64 },
}

impl TransformSpec {
    pub fn automorphism(&self) -> Result<Automorphism, CliError> {
        match self {
            Self::Translation { by } => Ok(Automorphism::LeftTranslation(
                GroupElement::from_coords(by).map_err(|e| CliError::Usage(format!("--translate: {e}")))?,
            )),
            Self::Dilation { factor } => {
                Automorphism::dilation(*factor).map_err(|e| CliError::Usage(format!("--dilate: {e}")))
            }
        }
    }
}

/// Validated analysis settings.
#[derive(Debug, Clone)]
pub struct AnalysisConfig {
    pub surface: SurfaceKind,
    pub radius: Option<f64>,
    pub w: Option<f64>,
    pub c: Option<f64>,
    pub poly: Option<PathBuf>,
    pub grid: (usize, usize),
    pub tol: f64,
    pub char_tol: f64,
    pub modes: Vec<AnalysisMode>,
    pub transform: Option<TransformSpec>,
    pub excise: Option<f64>,
    pub output: OutputFormat,
    pub out: Option<PathBuf>,
    pub timings: bool,
    pub execution: Execution,
}

const DEFAULT_MODES: [AnalysisMode; 3] = [
    AnalysisMode::Characteristic,
    AnalysisMode::OrientabilityEuclidean,
    AnalysisMode::OrientabilityHeisenberg,
];

impl AnalysisConfig {
    pub fn from_args(args: AnalysisArgs) -> Result<Self, CliError> {
        let usage = |m: String| Err(CliError::Usage(m));
        if args.grid.0 < 16 || args.grid.1 < 16 {
            return usage(format!("--grid must be at least 16x16, got {}x{}", args.grid.0, args.grid.1));
        }
        for (name, v) in [("--tol", args.tol), ("--char-tol", args.char_tol)] {
            if !(v > 0.0 && v <= 1e-2) {
                return usage(format!("{name} must lie in (0, 1e-2], got {v}"));
            }
        }
        if let Some(r) = args.excise {
            if !(r > 0.0 && r.is_finite()) {
                return usage(format!("--excise must be positive, got {r}"));
            }
        }
        match args.surface {
            SurfaceKind::Mobius if args.radius.is_none() || args.w.is_none() => {
                return usage("mobius needs --R and --w".into());
            }
            SurfaceKind::Poly if args.poly.is_none() => return usage("poly needs --poly <file>".into()),
            _ => {}
        }
        let transform = match (args.translate, args.dilate) {
            (Some(_), Some(_)) => return usage("give at most one of --translate and --dilate".into()),
            (Some(Components(by)), None) => Some(TransformSpec::Translation { by }),
            (None, Some(factor)) => Some(TransformSpec::Dilation { factor }),
            (None, None) => None,
        };
        let mut modes = if args.modes.is_empty() {
            DEFAULT_MODES.to_vec()
        } else {
            let mut seen = Vec::new();
            for m in args.modes {
                if !seen.contains(&m) {
                    seen.push(m);
                }
            }
            seen
        };
        if transform.is_some() && !modes.contains(&AnalysisMode::Invariance) {
            modes.push(AnalysisMode::Invariance);
        }
        if modes.contains(&AnalysisMode::Invariance) && transform.is_none() {
            return usage("invariance needs --translate or --dilate".into());
        }
        Ok(Self {
            surface: args.surface,
            radius: args.radius,
            w: args.w,
            c: args.c,
            poly: args.poly,
            grid: args.grid,
            tol: args.tol,
            char_tol: args.char_tol,
            modes,
            transform,
            excise: args.excise,
            output: args.output,
            out: args.out,
            timings: args.timings,
            execution: if args.sequential {
                Execution::Sequential
            } else {
                Execution::Parallel
            },
        })
    }

    pub fn wants(&self, mode: AnalysisMode) -> bool {
        self.modes.contains(&mode)
    }
}
