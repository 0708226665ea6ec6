use std::io::Write;
use std::path::Path;

use clap::Subcommand;
use glspace::measure::{read_csv, write_csv};
use glspace::operators::{apply, make_test_family, nikolskii_t, OperatorKind, OperatorSpec};
use glspace::spaces::{gls_norm_detailed, tail_bound_with, Evaluation, FundamentalCurve};
use glspace::verify::{
    check_proposition1, check_proposition2, check_proposition3, measure_constant_detailed, ScalingFunctions,
    VerificationReport,
};
use glspace::{lp_norm, norm_family, tail_function, Error, PGrid, SampledFunction};
use serde::Serialize;

use crate::config::{require, Failure, Format, Options, Result, RunConfig};
use crate::spec::parse_error;

#[derive(Debug, Subcommand)]
pub enum Command {
    /// GLS norm (--psi), m.r.i. norm (--z) or Lebesgue norm (--q) of --input
    Norm(Options),
    /// Moment curve p -> ||f||_p of --input on a log-spaced grid up to --pmax
    Family(Options),
    /// Fundamental function of the GLS space of --psi at --delta or --deltas
    Phi(Options),
    /// Fundamental function of the m.r.i. space --z at --delta or --deltas
    Kappa(Options),
    /// Empirical tail of --input against the GLS tail bound, at levels --t
    Tail(Options),
    /// Apply --op at parameter --t to --input
    Apply(Options),
    /// Measure the operator constant on a seeded test family
    MeasureC(Options),
    /// Check the GLS transfer inequality (--psi, --nu)
    VerifyP1(Options),
    /// Check the m.r.i. transfer inequality (--x-norm, --y-norm)
    VerifyP2(Options),
    /// Check the scaled m.r.i. transfer inequality (--x-norm, --y-norm, --a-exp/--b-exp or --scaling)
    VerifyP3(Options),
}

impl Command {
    pub fn split(self) -> (&'static str, Options) {
        match self {
            Command::Norm(o) => ("norm", o),
            Command::Family(o) => ("family", o),
            Command::Phi(o) => ("phi", o),
            Command::Kappa(o) => ("kappa", o),
            Command::Tail(o) => ("tail", o),
            Command::Apply(o) => ("apply", o),
            Command::MeasureC(o) => ("measure-c", o),
            Command::VerifyP1(o) => ("verify-p1", o),
            Command::VerifyP2(o) => ("verify-p2", o),
            Command::VerifyP3(o) => ("verify-p3", o),
        }
    }
}

pub enum Outcome {
    Done,
    /// A verification ran and its verdict is fail.
    Failed,
}

/// Writes `bytes` to `path` through a temporary file in the same directory.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

fn json_bytes(value: &impl Serialize) -> Vec<u8> {
    let mut out = serde_json::to_vec_pretty(value).expect("serializable");
    out.push(b'\n');
    out
}

/// Sends an artifact to --output (printing `summary`) or to stdout.
fn emit(cfg: &RunConfig, summary: &str, body: &[u8]) -> Result<()> {
    match &cfg.output {
        Some(path) => {
            write_atomic(path, body).map_err(Error::from)?;
            println!("{summary} -> {}", path.display());
        }
        None => std::io::stdout().write_all(body).map_err(Error::from)?,
    }
    Ok(())
}

fn emit_scalar(cfg: &RunConfig, name: &str, value: f64) -> Result<()> {
    match &cfg.output {
        None => {
            println!("{value}");
            Ok(())
        }
        Some(_) => {
            let body = match cfg.format {
                Format::Json => json_bytes(&serde_json::json!({ name: value })),
                Format::Csv => format!("{name}\n{value}\n").into_bytes(),
            };
            emit(cfg, &format!("{name} = {value}"), &body)
        }
    }
}

fn csv_bytes(header: &[&str], rows: impl Iterator<Item = Vec<f64>>) -> Vec<u8> {
    let mut out = header.join(",");
    out.push('\n');
    for row in rows {
        let cells: Vec<String> = row.iter().map(f64::to_string).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out.into_bytes()
}

fn load_input(cfg: &RunConfig, command: &str) -> Result<SampledFunction> {
    let path = require(&cfg.input, "--input", command)?;
    let name = path.display().to_string();
    let file = std::fs::File::open(path).map_err(|e| parse_error(&name, 0, &e.to_string()))?;
    Ok(read_csv(file, &name)?)
}

fn operator(cfg: &RunConfig, command: &str, t: Option<&Vec<f64>>) -> Result<OperatorSpec> {
    let spec = require(&cfg.op, "--op", command)?;
    let kind = spec.value.resolve(&spec.base_dir)?;
    let t_set = match (&kind, t) {
        (_, Some(t)) => t.clone(),
        (OperatorKind::NikolskiiIdentity { max_degree }, None) => vec![nikolskii_t(*max_degree)],
        (_, None) => return Err(Failure::Usage(format!("{command} needs --t for this operator"))),
    };
    Ok(OperatorSpec::new(kind, t_set)?)
}

fn fundamental_table(cfg: &RunConfig, name: &str, curve: FundamentalCurve) -> Result<()> {
    if curve.values.len() == 1 && cfg.output.is_none() {
        println!("{}", curve.values[0]);
        return Ok(());
    }
    let body = match cfg.format {
        Format::Json => json_bytes(&serde_json::json!({ "delta": curve.deltas, name: curve.values })),
        Format::Csv => {
            let mut out = Vec::new();
            curve.write_csv(&mut out)?;
            out
        }
    };
    emit(cfg, &format!("{name}: {} values", curve.values.len()), &body)
}

pub fn run(command: &str, cfg: &RunConfig) -> Result<Outcome> {
    let settings = &cfg.settings;
    match command {
        "norm" => {
            let f = load_input(cfg, command)?;
            let value = if let Some(z) = &cfg.z {
                let grid = z.psi().scan_grid(&settings.grid)?;
                z.norm_of(&f, &grid, Evaluation::Refined, settings)?
            } else if let Some(psi) = &cfg.psi {
                let grid = psi.scan_grid(&settings.grid)?;
                gls_norm_detailed(&f, psi, &grid, Evaluation::Refined, settings)?.value
            } else if let Some(q) = cfg.q {
                lp_norm(&f, q)?
            } else {
                return Err(Failure::Usage("norm needs one of --psi, --z or --q".into()));
            };
            emit_scalar(cfg, "norm", value)?;
        }
        "family" => {
            let f = load_input(cfg, command)?;
            let grid = PGrid::log_spaced(1.0, settings.grid.p_max, settings.grid.points, true)?;
            let h = norm_family(&f, &grid)?;
            let body = match cfg.format {
                Format::Json => json_bytes(&h),
                Format::Csv => {
                    let mut rows: Vec<Vec<f64>> =
                        grid.points().iter().zip(&h.values).map(|(&p, &v)| vec![p, v]).collect();
                    rows.extend(h.essential_sup.map(|s| vec![f64::INFINITY, s]));
                    csv_bytes(&["p", "norm"], rows.into_iter())
                }
            };
            emit(cfg, &format!("family: {} exponents", h.values.len()), &body)?;
        }
        "phi" => {
            let psi = require(&cfg.psi, "--psi", command)?;
            let deltas = require(&cfg.deltas, "--delta or --deltas", command)?;
            fundamental_table(cfg, "phi", FundamentalCurve::of_gls(psi, deltas, settings)?)?;
        }
        "kappa" => {
            let z = require(&cfg.z, "--z", command)?;
            let deltas = require(&cfg.deltas, "--delta or --deltas", command)?;
            fundamental_table(cfg, "kappa", FundamentalCurve::of_mri(z, deltas, settings)?)?;
        }
        "tail" => tail(cfg)?,
        "apply" => {
            let f = load_input(cfg, command)?;
            let op = operator(cfg, command, cfg.t.as_ref())?;
            if op.t_set.len() != 1 {
                return Err(Failure::Usage("apply takes a single --t".into()));
            }
            let u = apply(&op, &f, op.t_set[0])?;
            let mut body = Vec::new();
            write_csv(&u, &mut body)?;
            emit(cfg, &format!("apply: {} nodes", u.values().len()), &body)?;
        }
        "measure-c" => {
            let op = operator(cfg, command, cfg.t.as_ref())?;
            let family = make_test_family(&op, cfg.count, cfg.seed)?;
            let scaling = match (&cfg.scaling, cfg.a_exp, cfg.b_exp) {
                (Some(s), _, _) => s.clone(),
                (None, None, None) => ScalingFunctions::identity(&op.t_set)?,
                (None, a, b) => ScalingFunctions::powers(&op.t_set, a.unwrap_or(1.0), b.unwrap_or(1.0))?,
            };
            let est = measure_constant_detailed(&op, &family, &cfg.window()?, &scaling)?;
            if cfg.output.is_none() {
                println!("{}", est.value);
            } else {
                let body = match cfg.format {
                    Format::Json => json_bytes(&est),
                    Format::Csv => csv_bytes(
                        &["value", "f_index", "t", "p", "q"],
                        std::iter::once(vec![est.value, est.f_index as f64, est.t, est.p, est.q]),
                    ),
                };
                emit(cfg, &format!("constant = {}", est.value), &body)?;
            }
        }
        "verify-p1" | "verify-p2" | "verify-p3" => return verify(command, cfg),
        other => return Err(Failure::Usage(format!("unknown command {other}"))),
    }
    Ok(Outcome::Done)
}

fn tail(cfg: &RunConfig) -> Result<()> {
    let psi = require(&cfg.psi, "--psi", "tail")?;
    let f = cfg.input.as_ref().map(|_| load_input(cfg, "tail")).transpose()?;
    let norm = match (&f, cfg.norm) {
        (_, Some(n)) => n,
        (Some(f), None) => {
            let grid = psi.scan_grid(&cfg.settings.grid)?;
            gls_norm_detailed(f, psi, &grid, Evaluation::Refined, &cfg.settings)?.value
        }
        (None, None) => return Err(Failure::Usage("tail needs --input or --norm".into())),
    };
    let levels = match (&cfg.t, &f) {
        (Some(t), _) => t.clone(),
        (None, Some(f)) => (1..=100).map(|i| f.max_abs() * i as f64 / 100.0).collect(),
        (None, None) => return Err(Failure::Usage("tail needs --t when no --input is given".into())),
    };
    let mut rows = Vec::with_capacity(levels.len());
    let mut dominated = true;
    for &t in &levels {
        let bound = tail_bound_with(psi, norm, t, &cfg.settings)?;
        let empirical = f.as_ref().map(|f| tail_function(f, t)).transpose()?;
        if let Some(e) = empirical {
            dominated &= bound >= e;
        }
        rows.push((t, empirical, bound));
    }
    #[derive(Serialize)]
    struct Row {
        t: f64,
        tail: Option<f64>,
        bound: f64,
    }
    let body = match cfg.format {
        Format::Json => json_bytes(&serde_json::json!({
            "norm": norm,
            "rows": rows.iter().map(|&(t, tail, bound)| Row { t, tail, bound }).collect::<Vec<_>>(),
        })),
        Format::Csv => csv_bytes(
            &["t", "tail", "bound"],
            rows.iter().map(|&(t, e, b)| vec![t, e.unwrap_or(f64::NAN), b]),
        ),
    };
    let summary = match f {
        Some(_) if dominated => format!("tail: norm {norm}, bound dominates at {} levels", rows.len()),
        Some(_) => format!("tail: norm {norm}, bound below the empirical tail somewhere"),
        None => format!("tail: norm {norm}, {} levels", rows.len()),
    };
    emit(cfg, &summary, &body)
}

fn verify(command: &str, cfg: &RunConfig) -> Result<Outcome> {
    let op = operator(cfg, command, cfg.t.as_ref())?;
    let measure_op = match &cfg.measure_t {
        Some(t) => OperatorSpec::new(op.kind.clone(), t.clone())?,
        None => op.clone(),
    };
    let family = make_test_family(&op, cfg.count, cfg.seed)?;
    let window = cfg.window()?;
    let scaling = if command == "verify-p3" {
        let mut all_t = op.t_set.clone();
        all_t.extend(measure_op.t_set.iter().filter(|t| !op.t_set.contains(t)));
        Some(match &cfg.scaling {
            Some(s) => s.clone(),
            None => ScalingFunctions::powers(&all_t, cfg.a_exp.unwrap_or(1.0), cfg.b_exp.unwrap_or(1.0))?,
        })
    } else {
        None
    };
    let c_hat = match cfg.c_hat {
        Some(c) => c,
        None => {
            let s = match &scaling {
                Some(s) => s.clone(),
                None => ScalingFunctions::identity(&measure_op.t_set)?,
            };
            measure_constant_detailed(&measure_op, &family, &window, &s)?.value
        }
    };
    let tol = cfg.tolerance;
    let mut report: VerificationReport = match command {
        "verify-p1" => {
            let psi = require(&cfg.psi, "--psi", command)?;
            let nu = require(&cfg.nu, "--nu", command)?;
            check_proposition1(&op, &family, psi, nu, &window, c_hat, tol)?
        }
        _ => {
            let x = require(&cfg.x_norm, "--x-norm", command)?;
            let y = require(&cfg.y_norm, "--y-norm", command)?;
            match &scaling {
                Some(s) => check_proposition3(&op, &family, x, y, &window, s, c_hat, tol)?,
                None => check_proposition2(&op, &family, x, y, &window, c_hat, tol)?,
            }
        }
    };
    report.metadata.seed = Some(cfg.seed);
    let summary = format!(
        "{command}: {} worst_ratio={} constant={} rows={} skipped={}",
        if report.passed() { "pass" } else { "fail" },
        report.worst_ratio.map_or("none".into(), |w| w.to_string()),
        report.measured_constant,
        report.per_t_ratios.len(),
        report.skipped,
    );
    let mut body = Vec::new();
    match cfg.format {
        Format::Json => {
            report.write_json(&mut body)?;
            body.push(b'\n');
        }
        Format::Csv => report.write_csv(&mut body)?,
    }
    if cfg.output.is_none() {
        // The report itself goes to stdout.
        eprintln!("{summary}");
    }
    emit(cfg, &summary, &body)?;
    Ok(if report.passed() {
        Outcome::Done
    } else {
        Outcome::Failed
    })
}
