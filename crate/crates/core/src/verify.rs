//! Empirical operator constants and numerical checks of the norm-transfer
//! inequalities between Grand Lebesgue / m.r.i. spaces.
//!
//! Starting from a measured constant `C` with
//! `||u||_p <= C A(t)^(1/p) B(t)^(-1/q) ||f||_q` on the sampled exponents,
//! the checks evaluate
//!
//! ```text
//! <u>_Y / kappa_Y(A(t))  <=  C <f>_X / kappa_X(B(t))
//! ```
//!
//! for every member of a test family and every `t`. With `A = B = t` and
//! sup-type norms this is the GLS statement with fundamental functions
//! `phi`. All norms inside a check are evaluated on the window grids only
//! ([`Evaluation::OnGrid`]), so a constant measured on those same grids
//! makes every check pass up to rounding.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{domain, precondition, Error, Result};
use crate::measure::{lp_norm, PGrid, SampledFunction};
use crate::operators::{apply, OperatorSpec};
use crate::spaces::{kappa_on_grid, weighted_sup, Evaluation, GeneratingFunction, MriNorm, Settings};

/// Open exponent ranges `(a, b)` for `q` (input side) and `(c, d)` for `p`
/// (output side), with the grids sampled strictly inside them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "WindowRepr", into = "WindowRepr")]
pub struct ExponentWindow {
    q_range: (f64, f64),
    p_range: (f64, f64),
    q_grid: PGrid,
    p_grid: PGrid,
}

/// JSON form; `null` upper bounds stand for infinity.
#[derive(Serialize, Deserialize)]
struct WindowRepr {
    q_range: (f64, Option<f64>),
    p_range: (f64, Option<f64>),
    q_grid: PGrid,
    p_grid: PGrid,
}

impl TryFrom<WindowRepr> for ExponentWindow {
    type Error = Error;
    fn try_from(r: WindowRepr) -> Result<Self> {
        let up = |x: Option<f64>| x.unwrap_or(f64::INFINITY);
        ExponentWindow::new(
            (r.q_range.0, up(r.q_range.1)),
            (r.p_range.0, up(r.p_range.1)),
            r.q_grid,
            r.p_grid,
        )
    }
}

impl From<ExponentWindow> for WindowRepr {
    fn from(w: ExponentWindow) -> Self {
        let fin = |x: f64| x.is_finite().then_some(x);
        WindowRepr {
            q_range: (w.q_range.0, fin(w.q_range.1)),
            p_range: (w.p_range.0, fin(w.p_range.1)),
            q_grid: w.q_grid,
            p_grid: w.p_grid,
        }
    }
}

fn check_range(name: &str, (lo, hi): (f64, f64), grid: &PGrid) -> Result<()> {
    if !(lo >= 1.0 && hi > lo) || hi.is_nan() {
        return precondition(format!("{name} range ({lo}, {hi}) needs 1 <= lower < upper"));
    }
    if grid.includes_infinity() || grid.first() <= lo || grid.last() >= hi {
        return precondition(format!("{name} grid must lie strictly inside ({lo}, {hi})"));
    }
    Ok(())
}

impl ExponentWindow {
    pub fn new(q_range: (f64, f64), p_range: (f64, f64), q_grid: PGrid, p_grid: PGrid) -> Result<Self> {
        check_range("q", q_range, &q_grid)?;
        check_range("p", p_range, &p_grid)?;
        Ok(ExponentWindow {
            q_range,
            p_range,
            q_grid,
            p_grid,
        })
    }

    /// Log-spaced grids of `n` points on `[q_lo, q_hi]` and `[p_lo, p_hi]`,
    /// inside the ranges `(1, inf)`. Both lower ends must exceed one.
    pub fn log_spaced(q_lo: f64, q_hi: f64, p_lo: f64, p_hi: f64, n: usize) -> Result<Self> {
        let unbounded = (1.0, f64::INFINITY);
        ExponentWindow::new(
            unbounded,
            unbounded,
            PGrid::log_spaced(q_lo, q_hi, n, false)?,
            PGrid::log_spaced(p_lo, p_hi, n, false)?,
        )
    }

    pub fn q_range(&self) -> (f64, f64) {
        self.q_range
    }

    pub fn p_range(&self) -> (f64, f64) {
        self.p_range
    }

    pub fn q_grid(&self) -> &PGrid {
        &self.q_grid
    }

    pub fn p_grid(&self) -> &PGrid {
        &self.p_grid
    }
}

/// The scaling pair `A(t)`, `B(t)`, tabulated over a finite set of `t`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ScalingRepr", into = "ScalingRepr")]
pub struct ScalingFunctions {
    t: Vec<f64>,
    a: Vec<f64>,
    b: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct ScalingRepr {
    t: Vec<f64>,
    a: Vec<f64>,
    b: Vec<f64>,
}

impl TryFrom<ScalingRepr> for ScalingFunctions {
    type Error = Error;
    fn try_from(r: ScalingRepr) -> Result<Self> {
        ScalingFunctions::new(r.t, r.a, r.b)
    }
}

impl From<ScalingFunctions> for ScalingRepr {
    fn from(s: ScalingFunctions) -> Self {
        ScalingRepr { t: s.t, a: s.a, b: s.b }
    }
}

impl ScalingFunctions {
    pub fn new(t: Vec<f64>, a: Vec<f64>, b: Vec<f64>) -> Result<Self> {
        if t.is_empty() || t.len() != a.len() || t.len() != b.len() {
            return precondition("scaling table needs equal, nonzero numbers of t, A and B values");
        }
        let positive = |v: &[f64]| v.iter().all(|x| x.is_finite() && *x > 0.0);
        if !(positive(&t) && positive(&a) && positive(&b)) {
            return precondition("scaling table entries must be positive and finite");
        }
        Ok(ScalingFunctions { t, a, b })
    }

    pub fn from_fns(t_set: &[f64], a: impl Fn(f64) -> f64, b: impl Fn(f64) -> f64) -> Result<Self> {
        ScalingFunctions::new(
            t_set.to_vec(),
            t_set.iter().map(|&t| a(t)).collect(),
            t_set.iter().map(|&t| b(t)).collect(),
        )
    }

    /// `A(t) = B(t) = t`, which turns the general assumption into the basic one.
    pub fn identity(t_set: &[f64]) -> Result<Self> {
        ScalingFunctions::from_fns(t_set, |t| t, |t| t)
    }

    /// `A(t) = t^a_exp`, `B(t) = t^b_exp`.
    pub fn powers(t_set: &[f64], a_exp: f64, b_exp: f64) -> Result<Self> {
        ScalingFunctions::from_fns(t_set, |t| t.powf(a_exp), |t| t.powf(b_exp))
    }

    pub fn lookup(&self, t: f64) -> Result<(f64, f64)> {
        self.t
            .iter()
            .position(|&s| (s - t).abs() <= 1e-12 * s)
            .map(|i| (self.a[i], self.b[i]))
            .ok_or_else(|| Error::Precondition(format!("no scaling values tabulated for t = {t}")))
    }
}

/// Where the measured constant is attained.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConstantEstimate {
    pub value: f64,
    pub f_index: usize,
    pub t: f64,
    pub p: f64,
    pub q: f64,
}

fn moment_row(f: &SampledFunction, grid: &PGrid) -> Result<Vec<f64>> {
    grid.points().iter().map(|&p| lp_norm(f, p)).collect()
}

/// Smallest `C` with `||Q[f](t)||_p <= C t^(1/p - 1/q) ||f||_q` over the
/// family, `op.t_set` and the window grids.
pub fn measure_constant(op: &OperatorSpec, family: &[SampledFunction], window: &ExponentWindow) -> Result<f64> {
    Ok(measure_constant_detailed(op, family, window, &ScalingFunctions::identity(&op.t_set)?)?.value)
}

/// Smallest `D` with `||Q[f](t)||_p <= D A(t)^(1/p) B(t)^(-1/q) ||f||_q`.
pub fn measure_constant_general(
    op: &OperatorSpec,
    family: &[SampledFunction],
    window: &ExponentWindow,
    scaling: &ScalingFunctions,
) -> Result<f64> {
    Ok(measure_constant_detailed(op, family, window, scaling)?.value)
}

pub fn measure_constant_detailed(
    op: &OperatorSpec,
    family: &[SampledFunction],
    window: &ExponentWindow,
    scaling: &ScalingFunctions,
) -> Result<ConstantEstimate> {
    if family.is_empty() {
        return Err(Error::Degenerate("empty family".into()));
    }
    let qs = window.q_grid.points();
    let ps = window.p_grid.points();
    let q_norms = family
        .iter()
        .map(|f| moment_row(f, &window.q_grid))
        .collect::<Result<Vec<_>>>()?;
    let pairs: Vec<(usize, usize)> = (0..family.len())
        .flat_map(|i| (0..op.t_set.len()).map(move |k| (i, k)))
        .filter(|&(i, _)| q_norms[i].iter().any(|&n| n > 0.0))
        .collect();
    if pairs.is_empty() {
        return Err(Error::Degenerate(
            "every family member has zero norm on the q grid".into(),
        ));
    }
    let per_pair = crate::parallel::map(&pairs, |&(i, k)| -> Result<Option<ConstantEstimate>> {
        let t = op.t_set[k];
        let (a, b) = scaling.lookup(t)?;
        let u = apply(op, &family[i], t)?;
        let p_norms = moment_row(&u, &window.p_grid)?;
        let mut best: Option<ConstantEstimate> = None;
        for (&p, &up) in ps.iter().zip(&p_norms) {
            let a_term = a.powf(1.0 / p);
            for (&q, &fq) in qs.iter().zip(&q_norms[i]) {
                if fq == 0.0 {
                    continue;
                }
                let ratio = up / (a_term * b.powf(-1.0 / q) * fq);
                if best.is_none_or(|e| ratio > e.value) {
                    best = Some(ConstantEstimate {
                        value: ratio,
                        f_index: i,
                        t,
                        p,
                        q,
                    });
                }
            }
        }
        Ok(best)
    });
    let mut best: Option<ConstantEstimate> = None;
    for item in per_pair {
        if let Some(e) = item? {
            if best.is_none_or(|b| e.value > b.value) {
                best = Some(e);
            }
        }
    }
    best.ok_or_else(|| Error::Degenerate("no nonzero ratio denominators".into()))
}

/// Outcome of the normalization step `||f||_q <= psi(q)` for unit-norm `f`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LemmaReport {
    /// `max_q ||f||_q / (psi(q) ||f||_{G psi})` over the grid.
    pub max_ratio_f: f64,
    /// `max_p ||u||_p / (nu(p) ||u||_{G nu})` over the grid.
    pub max_ratio_u: f64,
    /// Largest excess of either ratio over one (zero when both hold).
    pub max_violation: f64,
    pub pass: bool,
}

fn normalized_max(g: &SampledFunction, psi: &GeneratingFunction, grid: &PGrid, settings: &Settings) -> Result<f64> {
    let norm = weighted_sup(g, psi, grid, Evaluation::OnGrid, settings, false)?.value;
    if norm == 0.0 {
        return Err(Error::Degenerate("function has zero GLS norm".into()));
    }
    let mut best = 0.0_f64;
    for &p in grid.points() {
        let ln_psi = psi.ln_eval_extended(p);
        if ln_psi.is_finite() {
            best = best.max(lp_norm(g, p)? / (ln_psi.exp() * norm));
        }
    }
    Ok(best)
}

/// Rescales `f` and `u` to unit GLS norm and checks `||u||_p <= nu(p)`,
/// `||f||_q <= psi(q)` on the grid. The norms used for rescaling are the
/// grid suprema, so the larger ratio is exactly one when the sup sits on a
/// grid point.
pub fn check_lemma_normalized(
    f: &SampledFunction,
    u: &SampledFunction,
    psi: &GeneratingFunction,
    nu: &GeneratingFunction,
    grid: &PGrid,
) -> Result<LemmaReport> {
    let settings = Settings::default();
    let max_ratio_f = normalized_max(f, psi, grid, &settings)?;
    let max_ratio_u = normalized_max(u, nu, grid, &settings)?;
    let max_violation = (max_ratio_f.max(max_ratio_u) - 1.0).max(0.0);
    Ok(LemmaReport {
        max_ratio_f,
        max_ratio_u,
        max_violation,
        pass: max_violation <= 1e-12,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Proposition {
    /// GLS norms with fundamental functions `phi`.
    #[serde(rename = "p1")]
    Gls,
    /// m.r.i. norms with `kappa`.
    #[serde(rename = "p2")]
    Mri,
    /// m.r.i. norms with the scaling pair `A`, `B`.
    #[serde(rename = "p3")]
    Scaled,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RatioRow {
    pub f_index: usize,
    pub t: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportMetadata {
    pub operator: String,
    pub x_norm: MriNorm,
    pub y_norm: MriNorm,
    pub window: ExponentWindow,
    pub scaling: Option<ScalingFunctions>,
    pub family_size: usize,
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub proposition: Proposition,
    pub measured_constant: f64,
    pub tolerance: f64,
    /// `None` when every point was skipped.
    pub worst_ratio: Option<f64>,
    pub verdict: Verdict,
    pub skipped: usize,
    pub per_t_ratios: Vec<RatioRow>,
    pub metadata: ReportMetadata,
}

impl VerificationReport {
    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }

    pub fn write_json(&self, writer: impl Write) -> Result<()> {
        serde_json::to_writer_pretty(writer, self).map_err(|e| Error::Io(e.into()))
    }

    /// The ratio table as `t,lhs,rhs,ratio`, rows in (family index, t) order.
    pub fn write_csv(&self, writer: impl Write) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(writer);
        let io = |e: csv::Error| Error::from_csv("<output>", e);
        wtr.write_record(["t", "lhs", "rhs", "ratio"]).map_err(io)?;
        for r in &self.per_t_ratios {
            wtr.write_record([
                r.t.to_string(),
                r.lhs.to_string(),
                r.rhs.to_string(),
                r.ratio.to_string(),
            ])
            .map_err(io)?;
        }
        wtr.flush()?;
        Ok(())
    }
}

struct Transfer<'a> {
    proposition: Proposition,
    op: &'a OperatorSpec,
    family: &'a [SampledFunction],
    x_norm: &'a MriNorm,
    y_norm: &'a MriNorm,
    window: &'a ExponentWindow,
    scaling: Option<&'a ScalingFunctions>,
    constant: f64,
    tolerance: f64,
}

impl Transfer<'_> {
    fn run(&self) -> Result<VerificationReport> {
        if !(self.constant.is_finite() && self.constant > 0.0) {
            return domain(format!("constant {} must be positive and finite", self.constant));
        }
        if !(self.tolerance >= 0.0) {
            return domain(format!("tolerance {} must be nonnegative", self.tolerance));
        }
        if self.family.is_empty() {
            return Err(Error::Degenerate("empty family".into()));
        }
        let settings = Settings::default();
        let (q_grid, p_grid) = (&self.window.q_grid, &self.window.p_grid);
        let f_norms = self
            .family
            .iter()
            .map(|f| self.x_norm.norm_of(f, q_grid, Evaluation::OnGrid, &settings))
            .collect::<Result<Vec<_>>>()?;
        if f_norms.iter().all(|&n| n == 0.0) {
            return Err(Error::Degenerate("every family member has zero norm".into()));
        }
        let pairs: Vec<(usize, usize)> = (0..self.family.len())
            .flat_map(|i| (0..self.op.t_set.len()).map(move |k| (i, k)))
            .collect();
        let rows = crate::parallel::map(&pairs, |&(i, k)| -> Result<Option<RatioRow>> {
            let t = self.op.t_set[k];
            let fx = f_norms[i];
            if !(fx > 0.0 && fx.is_finite()) {
                return Ok(None);
            }
            let (a, b) = match self.scaling {
                Some(s) => s.lookup(t)?,
                None => (t, t),
            };
            let u = apply(self.op, &self.family[i], t)?;
            let uy = self.y_norm.norm_of(&u, p_grid, Evaluation::OnGrid, &settings)?;
            let ky = kappa_on_grid(self.y_norm, a, p_grid, &settings)?;
            let kx = kappa_on_grid(self.x_norm, b, q_grid, &settings)?;
            let usable = |x: f64| x.is_finite() && x > 0.0;
            if !(usable(ky) && usable(kx) && uy.is_finite()) {
                return Ok(None);
            }
            let lhs = uy / ky;
            let rhs = self.constant * fx / kx;
            Ok(Some(RatioRow {
                f_index: i,
                t,
                lhs,
                rhs,
                ratio: lhs / rhs,
            }))
        });
        let mut per_t_ratios = Vec::with_capacity(rows.len());
        let mut skipped = 0;
        for row in rows {
            match row? {
                Some(r) => per_t_ratios.push(r),
                None => skipped += 1,
            }
        }
        let worst_ratio = per_t_ratios.iter().map(|r| r.ratio).reduce(f64::max);
        let verdict = match worst_ratio {
            Some(w) if w <= 1.0 + self.tolerance => Verdict::Pass,
            _ => Verdict::Fail,
        };
        Ok(VerificationReport {
            proposition: self.proposition,
            measured_constant: self.constant,
            tolerance: self.tolerance,
            worst_ratio,
            verdict,
            skipped,
            per_t_ratios,
            metadata: ReportMetadata {
                operator: self.op.kind.describe(),
                x_norm: self.x_norm.clone(),
                y_norm: self.y_norm.clone(),
                window: self.window.clone(),
                scaling: self.scaling.cloned(),
                family_size: self.family.len(),
                seed: None,
            },
        })
    }
}

/// `||u||_{G nu} / phi_nu(t) <= c_hat ||f||_{G psi} / phi_psi(t)` for every
/// family member and every `t` in `op.t_set`.
#[allow(clippy::too_many_arguments)]
pub fn check_proposition1(
    op: &OperatorSpec,
    family: &[SampledFunction],
    psi: &GeneratingFunction,
    nu: &GeneratingFunction,
    window: &ExponentWindow,
    c_hat: f64,
    tolerance: f64,
) -> Result<VerificationReport> {
    let (x_norm, y_norm) = (MriNorm::sup(psi.clone()), MriNorm::sup(nu.clone()));
    Transfer {
        proposition: Proposition::Gls,
        op,
        family,
        x_norm: &x_norm,
        y_norm: &y_norm,
        window,
        scaling: None,
        constant: c_hat,
        tolerance,
    }
    .run()
}

/// `<u>_Y / kappa_Y(t) <= c_hat <f>_X / kappa_X(t)`.
#[allow(clippy::too_many_arguments)]
pub fn check_proposition2(
    op: &OperatorSpec,
    family: &[SampledFunction],
    x_norm: &MriNorm,
    y_norm: &MriNorm,
    window: &ExponentWindow,
    c_hat: f64,
    tolerance: f64,
) -> Result<VerificationReport> {
    Transfer {
        proposition: Proposition::Mri,
        op,
        family,
        x_norm,
        y_norm,
        window,
        scaling: None,
        constant: c_hat,
        tolerance,
    }
    .run()
}

/// `<u>_Y / kappa_Y(A(t)) <= d_hat <f>_X / kappa_X(B(t))`.
#[allow(clippy::too_many_arguments)]
pub fn check_proposition3(
    op: &OperatorSpec,
    family: &[SampledFunction],
    x_norm: &MriNorm,
    y_norm: &MriNorm,
    window: &ExponentWindow,
    scaling: &ScalingFunctions,
    d_hat: f64,
    tolerance: f64,
) -> Result<VerificationReport> {
    Transfer {
        proposition: Proposition::Scaled,
        op,
        family,
        x_norm,
        y_norm,
        window,
        scaling: Some(scaling),
        constant: d_hat,
        tolerance,
    }
    .run()
}
