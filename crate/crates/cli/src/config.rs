//! Command-line options, the JSON config file, and their merge. Flags win
//! over the file, the file wins over built-in defaults.

use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use glspace::operators::OperatorConfig;
use glspace::spaces::{GeneratingFunction, GridSettings, MriNorm, Settings};
use glspace::verify::{ExponentWindow, ScalingFunctions};
use glspace::Error;
use serde::Deserialize;

use crate::spec::{parse_arg, parse_error, Spec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

/// Why a run stopped early.
#[derive(Debug)]
pub enum Failure {
    /// Missing or inconsistent options.
    Usage(String),
    Lib(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

pub type Result<T> = std::result::Result<T, Failure>;

pub const DEFAULT_TOLERANCE: f64 = 1e-6;
pub const DEFAULT_COUNT: usize = 16;
pub const DEFAULT_WINDOW: (f64, f64) = (1.1, 32.0);
pub const DEFAULT_WINDOW_POINTS: usize = 8;

/// Options shared by every subcommand. Each command reads the ones it needs.
#[derive(Debug, Clone, Default, Args)]
pub struct Options {
    /// JSON config file; flags given on the command line take precedence
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Sampled function, CSV with header node,weight,value
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Generating function: JSON, @file, or e.g. power:m=1, endpoint:a=1,b=3,alpha=1,beta=1, extremal:r=2
    #[arg(long)]
    pub psi: Option<String>,
    /// Output-side generating function (verify-p1)
    #[arg(long)]
    pub nu: Option<String>,
    /// m.r.i. norm: JSON, @file, sup:<psi> or integral:s=<s>:<psi>
    #[arg(long)]
    pub z: Option<String>,
    /// Input-side m.r.i. norm (verify-p2, verify-p3)
    #[arg(long)]
    pub x_norm: Option<String>,
    /// Output-side m.r.i. norm (verify-p2, verify-p3)
    #[arg(long)]
    pub y_norm: Option<String>,
    /// Operator: dilation, heat:length=L,n=N, nikolskii:degree=D, JSON or @file
    #[arg(long)]
    pub op: Option<String>,
    /// Plain Lebesgue exponent for `norm`
    #[arg(long)]
    pub q: Option<f64>,
    #[arg(long)]
    pub delta: Option<f64>,
    #[arg(long, value_delimiter = ',')]
    pub deltas: Option<Vec<f64>>,
    /// Operator parameters, or tail levels for `tail`
    #[arg(long, value_delimiter = ',')]
    pub t: Option<Vec<f64>>,
    /// Parameters used to measure the constant; defaults to --t
    #[arg(long, value_delimiter = ',')]
    pub measure_t: Option<Vec<f64>>,
    /// GLS norm value for `tail` when no --input is given
    #[arg(long)]
    pub norm: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Size of the generated test family
    #[arg(long)]
    pub count: Option<usize>,
    /// Exponent window: JSON or @file with q_range, p_range, q_grid, p_grid
    #[arg(long)]
    pub window: Option<String>,
    /// Shorthand window: log-spaced q grid on LO,HI
    #[arg(long, value_delimiter = ',')]
    pub q_range: Option<Vec<f64>>,
    /// Shorthand window: log-spaced p grid on LO,HI
    #[arg(long, value_delimiter = ',')]
    pub p_range: Option<Vec<f64>>,
    #[arg(long)]
    pub window_points: Option<usize>,
    /// Scaling table: JSON or @file with t, a, b
    #[arg(long)]
    pub scaling: Option<String>,
    /// A(t) = t^a
    #[arg(long, allow_hyphen_values = true)]
    pub a_exp: Option<f64>,
    /// B(t) = t^b
    #[arg(long, allow_hyphen_values = true)]
    pub b_exp: Option<f64>,
    /// Use this constant instead of measuring it
    #[arg(long)]
    pub c_hat: Option<f64>,
    #[arg(long)]
    pub tolerance: Option<f64>,
    /// Points in the exponent scan grid
    #[arg(long)]
    pub grid: Option<usize>,
    /// Largest finite exponent scanned on unbounded domains
    #[arg(long)]
    pub pmax: Option<f64>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Write the result here (atomically) instead of stdout
    #[arg(long)]
    pub output: Option<PathBuf>,
}

/// The config file. Structured values may be JSON objects or compact strings.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    input: Option<PathBuf>,
    psi: Option<Spec<GeneratingFunction>>,
    nu: Option<Spec<GeneratingFunction>>,
    z: Option<Spec<MriNorm>>,
    x_norm: Option<Spec<MriNorm>>,
    y_norm: Option<Spec<MriNorm>>,
    op: Option<Spec<OperatorConfig>>,
    q: Option<f64>,
    delta: Option<f64>,
    deltas: Option<Vec<f64>>,
    t: Option<Vec<f64>>,
    measure_t: Option<Vec<f64>>,
    norm: Option<f64>,
    seed: Option<u64>,
    count: Option<usize>,
    window: Option<Spec<ExponentWindow>>,
    q_range: Option<(f64, f64)>,
    p_range: Option<(f64, f64)>,
    window_points: Option<usize>,
    scaling: Option<Spec<ScalingFunctions>>,
    a_exp: Option<f64>,
    b_exp: Option<f64>,
    c_hat: Option<f64>,
    tolerance: Option<f64>,
    grid: Option<usize>,
    pmax: Option<f64>,
    format: Option<Format>,
    output: Option<PathBuf>,
}

/// Fully merged settings for one run.
#[derive(Debug, Default)]
pub struct RunConfig {
    pub input: Option<PathBuf>,
    pub psi: Option<GeneratingFunction>,
    pub nu: Option<GeneratingFunction>,
    pub z: Option<MriNorm>,
    pub x_norm: Option<MriNorm>,
    pub y_norm: Option<MriNorm>,
    pub op: Option<Spec<OperatorConfig>>,
    pub q: Option<f64>,
    pub deltas: Option<Vec<f64>>,
    pub t: Option<Vec<f64>>,
    pub measure_t: Option<Vec<f64>>,
    pub norm: Option<f64>,
    pub seed: u64,
    pub count: usize,
    pub window: Option<ExponentWindow>,
    pub q_range: Option<(f64, f64)>,
    pub p_range: Option<(f64, f64)>,
    pub window_points: usize,
    pub scaling: Option<ScalingFunctions>,
    pub a_exp: Option<f64>,
    pub b_exp: Option<f64>,
    pub c_hat: Option<f64>,
    pub tolerance: f64,
    pub settings: Settings,
    pub format: Format,
    pub output: Option<PathBuf>,
}

fn pair(flag: &str, v: Option<Vec<f64>>) -> Result<Option<(f64, f64)>> {
    match v.as_deref() {
        None => Ok(None),
        Some(&[lo, hi]) => Ok(Some((lo, hi))),
        Some(_) => Err(Failure::Usage(format!("{flag} takes LO,HI"))),
    }
}

fn flag<T: serde::de::DeserializeOwned + crate::spec::Shorthand>(
    name: &str,
    text: Option<&String>,
) -> Result<Option<Spec<T>>> {
    Ok(text.map(|t| parse_arg(name, t)).transpose()?)
}

fn pick<T>(flag: Option<Spec<T>>, file: Option<Spec<T>>, dir: &Path) -> Option<Spec<T>> {
    flag.or_else(|| file.map(|s| s.rebase(dir)))
}

fn value<T>(s: Option<Spec<T>>) -> Option<T> {
    s.map(|s| s.value)
}

fn read_file_config(path: &Path) -> Result<FileConfig> {
    let name = path.display().to_string();
    let body = std::fs::read_to_string(path).map_err(|e| parse_error(&name, 0, &e.to_string()))?;
    Ok(serde_json::from_str(&body).map_err(|e| Error::from_json(&name, e))?)
}

impl RunConfig {
    pub fn merge(o: Options) -> Result<Self> {
        let file = match &o.config {
            Some(p) => read_file_config(p)?,
            None => FileConfig::default(),
        };
        // relative paths in the file are relative to the file
        let dir = o
            .config
            .as_deref()
            .and_then(Path::parent)
            .map(Path::to_path_buf)
            .unwrap_or_default();
        let rel = |p: Option<PathBuf>| p.map(|p| dir.join(p));
        let psi = pick(flag("--psi", o.psi.as_ref())?, file.psi, &dir);
        let nu = pick(flag("--nu", o.nu.as_ref())?, file.nu, &dir);
        let z = pick(flag("--z", o.z.as_ref())?, file.z, &dir);
        let x_norm = pick(flag("--x-norm", o.x_norm.as_ref())?, file.x_norm, &dir);
        let y_norm = pick(flag("--y-norm", o.y_norm.as_ref())?, file.y_norm, &dir);
        let op = pick(flag("--op", o.op.as_ref())?, file.op, &dir);
        let window = pick(flag("--window", o.window.as_ref())?, file.window, &dir);
        let scaling = pick(flag("--scaling", o.scaling.as_ref())?, file.scaling, &dir);

        let deltas = match (o.delta, o.deltas) {
            (Some(d), _) => Some(vec![d]),
            (None, Some(ds)) => Some(ds),
            (None, None) => file.delta.map(|d| vec![d]).or(file.deltas),
        };
        let tolerance = o.tolerance.or(file.tolerance).unwrap_or(DEFAULT_TOLERANCE);
        if !(tolerance > 0.0) {
            return Err(Failure::Usage(format!("tolerance {tolerance} must be positive")));
        }
        let defaults = GridSettings::default();
        let settings = Settings {
            grid: GridSettings {
                points: o.grid.or(file.grid).unwrap_or(defaults.points),
                p_max: o.pmax.or(file.pmax).unwrap_or(defaults.p_max),
            },
            ..Settings::default()
        };
        if settings.grid.points < 2 || !(settings.grid.p_max > 1.0) {
            return Err(Failure::Usage(
                "--grid needs at least 2 points and --pmax must exceed 1".into(),
            ));
        }
        Ok(RunConfig {
            input: o.input.or_else(|| rel(file.input)),
            psi: value(psi),
            nu: value(nu),
            z: value(z),
            x_norm: value(x_norm),
            y_norm: value(y_norm),
            op,
            q: o.q.or(file.q),
            deltas,
            t: o.t.or(file.t),
            measure_t: o.measure_t.or(file.measure_t),
            norm: o.norm.or(file.norm),
            seed: o.seed.or(file.seed).unwrap_or(0),
            count: o.count.or(file.count).unwrap_or(DEFAULT_COUNT),
            window: value(window),
            q_range: pair("--q-range", o.q_range)?.or(file.q_range),
            p_range: pair("--p-range", o.p_range)?.or(file.p_range),
            window_points: o.window_points.or(file.window_points).unwrap_or(DEFAULT_WINDOW_POINTS),
            scaling: value(scaling),
            a_exp: o.a_exp.or(file.a_exp),
            b_exp: o.b_exp.or(file.b_exp),
            c_hat: o.c_hat.or(file.c_hat),
            tolerance,
            settings,
            format: o.format.or(file.format).unwrap_or(Format::Json),
            output: o.output.or_else(|| rel(file.output)),
        })
    }

    pub fn window(&self) -> Result<ExponentWindow> {
        if let Some(w) = &self.window {
            return Ok(w.clone());
        }
        let (q_lo, q_hi) = self.q_range.unwrap_or(DEFAULT_WINDOW);
        let (p_lo, p_hi) = self.p_range.unwrap_or(DEFAULT_WINDOW);
        Ok(ExponentWindow::log_spaced(q_lo, q_hi, p_lo, p_hi, self.window_points)?)
    }
}

pub fn require<'a, T>(v: &'a Option<T>, flag: &str, command: &str) -> Result<&'a T> {
    v.as_ref()
        .ok_or_else(|| Failure::Usage(format!("{command} needs {flag}")))
}
