//! Grand Lebesgue space norms, fundamental functions and tail bounds.
//!
//! A generating function `psi` on `(a, b)` defines the norm
//! `sup_p ||f||_p / psi(p)`. All suprema are taken in log form with
//! [`crate::optimize::scan_and_refine`]; extremal generating functions
//! short-circuit to a single `L_r` evaluation.

mod generating;
mod mri;

use std::io::Write;

pub use generating::{Domain, GeneratingFunction, GridSettings, PsiKind};
pub use mri::{kappa, kappa_on_grid, kappa_with, mri_norm, mri_norm_with, MriNorm};

use crate::error::{domain, Error, Result};
use crate::measure::{MomentCurve, PGrid, SampledFunction};
use crate::optimize::{scan_and_refine, GoldenSection};

/// Numerical knobs for every sup/inf/integral over exponents.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Settings {
    pub grid: GridSettings,
    pub golden: GoldenSection,
    /// Relative tolerance of the adaptive Simpson rule for integral norms.
    pub quad_rel_tol: f64,
}

impl Default for Settings {
    fn default() -> Self {
        Settings {
            grid: GridSettings::default(),
            golden: GoldenSection::default(),
            quad_rel_tol: 1e-11,
        }
    }
}

/// How a supremum (or integral) over a grid of exponents is evaluated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Evaluation {
    /// Grid scan followed by golden-section refinement; adaptive quadrature
    /// over the full domain for integral norms.
    Refined,
    /// Only the grid points: max over the grid, trapezoid sums for integrals.
    /// Points outside the domain of `psi` count as `psi = inf`.
    OnGrid,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SupEstimate {
    pub value: f64,
    pub argmax: f64,
    pub truncated: bool,
}

/// The curve `p -> delta^(1/p)`: moment curve of an indicator of mass `delta`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerCurve {
    delta: f64,
    ln_delta: f64,
}

impl PowerCurve {
    pub fn new(delta: f64) -> Result<Self> {
        if !(delta.is_finite() && delta > 0.0) {
            return domain(format!("delta = {delta} must be positive and finite"));
        }
        Ok(PowerCurve {
            delta,
            ln_delta: delta.ln(),
        })
    }
}

impl MomentCurve for PowerCurve {
    fn ln_moment(&self, p: f64) -> f64 {
        self.ln_delta / p
    }

    fn moment(&self, p: f64) -> f64 {
        self.delta.powf(1.0 / p)
    }
}

/// `sup_{p in grid} h(p) / psi(p)` for a moment curve `h`.
///
/// With `strict`, grid points outside the closed domain of `psi` are an
/// error; otherwise they are skipped as if `psi` were infinite there.
pub(crate) fn weighted_sup(
    curve: &dyn MomentCurve,
    psi: &GeneratingFunction,
    grid: &PGrid,
    eval: Evaluation,
    settings: &Settings,
    strict: bool,
) -> Result<SupEstimate> {
    if let Some(r) = psi.extremal_point() {
        return Ok(SupEstimate {
            value: curve.moment(r),
            argmax: r,
            truncated: false,
        });
    }
    let dom = psi.domain();
    let mut points = Vec::with_capacity(grid.points().len());
    for &p in grid.points() {
        if !dom.contains_closed(p) {
            if strict {
                return domain(format!("grid point {p} lies outside the domain of psi"));
            }
            continue;
        }
        if psi.ln_eval_extended(p).is_finite() {
            points.push(p);
        }
    }
    // psi(inf) = inf for every unbounded family, so p = inf never contributes.
    if points.is_empty() {
        return domain("no grid point has a finite psi value");
    }
    let objective = |p: f64| curve.ln_moment(p) - psi.ln_eval_extended(p);
    let refine = match eval {
        Evaluation::Refined => Some(&settings.golden),
        Evaluation::OnGrid => None,
    };
    let sup = scan_and_refine(&points, objective, refine, !dom.is_bounded()).expect("nonempty scan");
    Ok(SupEstimate {
        value: sup.value(),
        argmax: sup.argmax,
        truncated: sup.truncated,
    })
}

/// The Grand Lebesgue norm `sup_p ||f||_p / psi(p)`, scanning `grid` and
/// refining around the best grid point.
pub fn gls_norm(f: &SampledFunction, psi: &GeneratingFunction, grid: &PGrid) -> Result<f64> {
    Ok(gls_norm_detailed(f, psi, grid, Evaluation::Refined, &Settings::default())?.value)
}

pub fn gls_norm_detailed(
    f: &SampledFunction,
    psi: &GeneratingFunction,
    grid: &PGrid,
    eval: Evaluation,
    settings: &Settings,
) -> Result<SupEstimate> {
    weighted_sup(f, psi, grid, eval, settings, true)
}

/// The fundamental function `sup_p delta^(1/p) / psi(p)` on the default grid.
pub fn fundamental_function(psi: &GeneratingFunction, delta: f64) -> Result<f64> {
    Ok(fundamental_function_with(psi, delta, &Settings::default())?.value)
}

pub fn fundamental_function_with(psi: &GeneratingFunction, delta: f64, settings: &Settings) -> Result<SupEstimate> {
    let curve = PowerCurve::new(delta)?;
    let grid = psi.scan_grid(&settings.grid)?;
    weighted_sup(&curve, psi, &grid, Evaluation::Refined, settings, true)
}

/// Markov bound on the tail of a function with GLS norm `norm`:
/// `inf_p (psi(p) * norm / t)^p`.
pub fn tail_bound(psi: &GeneratingFunction, norm: f64, t: f64) -> Result<f64> {
    tail_bound_with(psi, norm, t, &Settings::default())
}

pub fn tail_bound_with(psi: &GeneratingFunction, norm: f64, t: f64, settings: &Settings) -> Result<f64> {
    if !(t > 0.0) {
        return domain(format!("tail level t = {t} must be positive"));
    }
    if !(norm >= 0.0) {
        return domain(format!("norm value {norm} must be nonnegative"));
    }
    if norm == 0.0 {
        return Ok(0.0);
    }
    if let Some(r) = psi.extremal_point() {
        return Ok((norm / t).powf(r));
    }
    let ln_ratio = norm.ln() - t.ln();
    let grid = psi.scan_grid(&settings.grid)?;
    let points: Vec<f64> = grid
        .points()
        .iter()
        .copied()
        .filter(|&p| psi.ln_eval_extended(p).is_finite())
        .collect();
    let neg_log_bound = |p: f64| -p * (psi.ln_eval_extended(p) + ln_ratio);
    let best = scan_and_refine(&points, neg_log_bound, Some(&settings.golden), false)
        .ok_or_else(|| Error::Domain("no exponent with finite psi".into()))?;
    Ok((-best.ln_value).exp())
}

/// A fundamental function (`phi` or `kappa`) tabulated over increasing `delta`.
#[derive(Debug, Clone, PartialEq)]
pub struct FundamentalCurve {
    pub deltas: Vec<f64>,
    pub values: Vec<f64>,
}

fn check_deltas(deltas: &[f64]) -> Result<()> {
    if deltas.is_empty()
        || deltas.iter().any(|d| !(d.is_finite() && *d > 0.0))
        || deltas.windows(2).any(|w| w[1] <= w[0])
    {
        return domain("deltas must be positive, finite and strictly increasing");
    }
    Ok(())
}

impl FundamentalCurve {
    pub fn of_gls(psi: &GeneratingFunction, deltas: &[f64], settings: &Settings) -> Result<Self> {
        check_deltas(deltas)?;
        let values = crate::parallel::map(deltas, |&d| {
            fundamental_function_with(psi, d, settings).map(|s| s.value)
        })
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
        Ok(FundamentalCurve {
            deltas: deltas.to_vec(),
            values,
        })
    }

    pub fn of_mri(z: &MriNorm, deltas: &[f64], settings: &Settings) -> Result<Self> {
        check_deltas(deltas)?;
        let values = crate::parallel::map(deltas, |&d| kappa_with(z, d, settings))
            .into_iter()
            .collect::<Result<Vec<_>>>()?;
        Ok(FundamentalCurve {
            deltas: deltas.to_vec(),
            values,
        })
    }

    /// `delta,value` CSV.
    pub fn write_csv(&self, writer: impl Write) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(writer);
        wtr.write_record(["delta", "value"])
            .map_err(|e| Error::from_csv("<output>", e))?;
        for (d, v) in self.deltas.iter().zip(&self.values) {
            wtr.write_record([d.to_string(), v.to_string()])
                .map_err(|e| Error::from_csv("<output>", e))?;
        }
        wtr.flush()?;
        Ok(())
    }
}
