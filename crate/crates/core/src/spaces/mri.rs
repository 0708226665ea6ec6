//! Moment rearrangement-invariant norms: an r.i. norm applied to the moment
//! curve `p -> ||f||_p`. Two instances are provided, a weighted supremum
//! (the Grand Lebesgue norm) and a weighted `L_s` integral over `p`.

use serde::{Deserialize, Serialize};

use super::{weighted_sup, Evaluation, GeneratingFunction, PowerCurve, Settings};
use crate::error::{domain, Error, Result};
use crate::measure::{MomentCurve, NormFamily, PGrid};
use crate::quadrature::adaptive_simpson;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
enum MriRepr {
    #[serde(rename = "sup")]
    Sup { psi: GeneratingFunction },
    #[serde(rename = "integral")]
    Integral { psi: GeneratingFunction, s: f64 },
}

/// An r.i. norm over exponents `p` in the domain of `psi`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MriRepr", into = "MriRepr")]
pub enum MriNorm {
    /// `sup_p h(p) / psi(p)`.
    SupWeighted { psi: GeneratingFunction },
    /// `(int (h(p) / psi(p))^s dp)^(1/s)`, `s >= 1`.
    IntegralWeighted { psi: GeneratingFunction, s: f64 },
}

impl TryFrom<MriRepr> for MriNorm {
    type Error = Error;
    fn try_from(r: MriRepr) -> Result<Self> {
        match r {
            MriRepr::Sup { psi } => Ok(MriNorm::SupWeighted { psi }),
            MriRepr::Integral { psi, s } => MriNorm::integral(psi, s),
        }
    }
}

impl From<MriNorm> for MriRepr {
    fn from(z: MriNorm) -> Self {
        match z {
            MriNorm::SupWeighted { psi } => MriRepr::Sup { psi },
            MriNorm::IntegralWeighted { psi, s } => MriRepr::Integral { psi, s },
        }
    }
}

impl MriNorm {
    pub fn sup(psi: GeneratingFunction) -> Self {
        MriNorm::SupWeighted { psi }
    }

    pub fn integral(psi: GeneratingFunction, s: f64) -> Result<Self> {
        if !(s.is_finite() && s >= 1.0) {
            return domain(format!("integral norm exponent s = {s} must be >= 1"));
        }
        Ok(MriNorm::IntegralWeighted { psi, s })
    }

    pub fn psi(&self) -> &GeneratingFunction {
        match self {
            MriNorm::SupWeighted { psi } | MriNorm::IntegralWeighted { psi, .. } => psi,
        }
    }

    /// Applies the norm to a moment curve. `grid` is the scan grid for the
    /// sup-type norm and the node set for [`Evaluation::OnGrid`]; refined
    /// integrals run over the whole domain of `psi` instead. A divergent
    /// integral yields `+inf`.
    pub fn norm_of(&self, curve: &dyn MomentCurve, grid: &PGrid, eval: Evaluation, settings: &Settings) -> Result<f64> {
        match self {
            MriNorm::SupWeighted { psi } => Ok(weighted_sup(curve, psi, grid, eval, settings, false)?.value),
            MriNorm::IntegralWeighted { psi, s } => {
                if !(s.is_finite() && *s >= 1.0) {
                    return domain(format!("integral norm exponent s = {s} must be >= 1"));
                }
                // psi is infinite off a single point: the integrand vanishes a.e.
                if psi.extremal_point().is_some() {
                    return Ok(0.0);
                }
                let integrand = |p: f64| {
                    let ln_psi = psi.ln_eval_extended(p);
                    if ln_psi == f64::INFINITY {
                        return 0.0;
                    }
                    (s * (curve.ln_moment(p) - ln_psi)).exp()
                };
                let integral = match eval {
                    Evaluation::OnGrid => trapezoid_on_grid(&integrand, psi, grid),
                    Evaluation::Refined => integrate_domain(&integrand, psi, *s, settings),
                };
                Ok(integral.powf(1.0 / s))
            }
        }
    }
}

fn trapezoid_on_grid(g: &dyn Fn(f64) -> f64, psi: &GeneratingFunction, grid: &PGrid) -> f64 {
    let dom = psi.domain();
    let pts: Vec<f64> = grid
        .points()
        .iter()
        .copied()
        .filter(|&p| dom.contains_closed(p))
        .collect();
    if pts.len() < 2 {
        return 0.0;
    }
    let n = pts.len();
    (0..n)
        .map(|i| {
            let left = if i == 0 { pts[0] } else { pts[i - 1] };
            let right = if i + 1 == n { pts[n - 1] } else { pts[i + 1] };
            0.5 * (right - left) * g(pts[i])
        })
        .sum()
}

fn integrate_domain(g: &dyn Fn(f64) -> f64, psi: &GeneratingFunction, s: f64, settings: &Settings) -> f64 {
    let dom = psi.domain();
    let tol = settings.quad_rel_tol;
    if dom.is_bounded() {
        return adaptive_simpson(g, dom.lower, dom.upper, tol, 16, 50).value;
    }
    // Unbounded: doubling panels up to p_max, then a power-law tail. A moment
    // curve tends to a finite limit as p grows, so the decay rate is that of
    // psi^-s over the last decade.
    let p_max = settings.grid.p_max.max(10.0 * dom.lower);
    let mut total = 0.0;
    let mut a = dom.lower;
    while a < p_max {
        let b = (2.0 * a).min(p_max);
        total += adaptive_simpson(g, a, b, tol, 4, 50).value;
        a = b;
    }
    let g_hi = g(p_max);
    if g_hi == 0.0 {
        return total;
    }
    let decay = s * (psi.ln_eval_extended(p_max) - psi.ln_eval_extended(p_max / 10.0)) / 10f64.ln();
    if !(decay > 1.0 + 1e-9) {
        return f64::INFINITY;
    }
    total + g_hi * p_max / (decay - 1.0)
}

/// The m.r.i. norm of a tabulated moment curve.
pub fn mri_norm(h: &NormFamily, z: &MriNorm) -> Result<f64> {
    mri_norm_with(h, z, Evaluation::Refined, &Settings::default())
}

pub fn mri_norm_with(h: &NormFamily, z: &MriNorm, eval: Evaluation, settings: &Settings) -> Result<f64> {
    z.norm_of(h, &h.grid, eval, settings)
}

/// Fundamental function of an m.r.i. space: the norm of `p -> delta^(1/p)`.
pub fn kappa(z: &MriNorm, delta: f64) -> Result<f64> {
    kappa_with(z, delta, &Settings::default())
}

pub fn kappa_with(z: &MriNorm, delta: f64, settings: &Settings) -> Result<f64> {
    let curve = PowerCurve::new(delta)?;
    let grid = z.psi().scan_grid(&settings.grid)?;
    z.norm_of(&curve, &grid, Evaluation::Refined, settings)
}

/// [`kappa`] restricted to the nodes of `grid`.
pub fn kappa_on_grid(z: &MriNorm, delta: f64, grid: &PGrid, settings: &Settings) -> Result<f64> {
    let curve = PowerCurve::new(delta)?;
    z.norm_of(&curve, grid, Evaluation::OnGrid, settings)
}
