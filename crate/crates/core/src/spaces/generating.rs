use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::measure::PGrid;

/// Exponent interval `(lower, upper)` of a generating function; `upper` may
/// be infinite. Evaluation is allowed on the closure.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Domain {
    pub lower: f64,
    pub upper: f64,
}

impl Domain {
    pub fn contains_closed(&self, p: f64) -> bool {
        p >= self.lower && p <= self.upper
    }

    pub fn is_bounded(&self) -> bool {
        self.upper.is_finite()
    }
}

/// The closed-form families plus a tabulated fallback.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum PsiKind {
    /// `p^(1/m)` on `[1, inf)`.
    #[serde(rename = "power")]
    PowerLaw { m: f64 },
    /// `(p - a)^(-alpha) (b - p)^(-beta)` on `(a, b)`.
    #[serde(rename = "endpoint")]
    EndpointSingular { a: f64, b: f64, alpha: f64, beta: f64 },
    /// One at `p = r`, infinite elsewhere; its space is plain `L_r`.
    #[serde(rename = "extremal")]
    Extremal { r: f64 },
    /// Samples joined linearly in `(ln p, ln psi)`.
    #[serde(rename = "tabulated")]
    Tabulated { p: Vec<f64>, psi: Vec<f64> },
}

/// A validated generating function `psi(p) > 0` on an exponent interval.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PsiKind", into = "PsiKind")]
pub struct GeneratingFunction {
    kind: PsiKind,
}

impl TryFrom<PsiKind> for GeneratingFunction {
    type Error = Error;

    fn try_from(kind: PsiKind) -> Result<Self> {
        match &kind {
            PsiKind::PowerLaw { m } => {
                if !(m.is_finite() && *m > 0.0) {
                    return domain(format!("power-law exponent m = {m} must be positive"));
                }
            }
            PsiKind::EndpointSingular { a, b, alpha, beta } => {
                if !(a.is_finite() && b.is_finite() && *a >= 1.0 && a < b) {
                    return domain(format!("endpoint family needs 1 <= a < b < inf, got ({a}, {b})"));
                }
                if !(alpha.is_finite() && beta.is_finite() && *alpha >= 0.0 && *beta >= 0.0) {
                    return domain("endpoint exponents alpha, beta must be finite and >= 0");
                }
            }
            PsiKind::Extremal { r } => {
                if !(r.is_finite() && *r >= 1.0) {
                    return domain(format!("extremal exponent r = {r} must be finite and >= 1"));
                }
            }
            PsiKind::Tabulated { p, psi } => {
                if p.len() < 2 || p.len() != psi.len() {
                    return domain("tabulated psi needs >= 2 matching (p, psi) samples");
                }
                if p.iter().any(|x| !(x.is_finite() && *x >= 1.0)) || p.windows(2).any(|w| w[1] <= w[0]) {
                    return domain("tabulated exponents must be finite, >= 1 and strictly increasing");
                }
                if psi.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
                    return domain("tabulated psi values must be positive and finite");
                }
            }
        }
        Ok(GeneratingFunction { kind })
    }
}

impl From<GeneratingFunction> for PsiKind {
    fn from(g: GeneratingFunction) -> Self {
        g.kind
    }
}

/// Scan-grid parameters shared by every supremum and infimum over `p`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSettings {
    pub points: usize,
    /// Cut-off standing in for `p = inf` on unbounded domains.
    pub p_max: f64,
}

impl Default for GridSettings {
    fn default() -> Self {
        GridSettings {
            points: 512,
            p_max: 1e4,
        }
    }
}

/// Offset keeping the scan grid off singular endpoints, relative to `b - a`.
const ENDPOINT_OFFSET: f64 = 1e-9;

impl GeneratingFunction {
    pub fn new(kind: PsiKind) -> Result<Self> {
        Self::try_from(kind)
    }

    pub fn power_law(m: f64) -> Result<Self> {
        Self::new(PsiKind::PowerLaw { m })
    }

    pub fn endpoint_singular(a: f64, b: f64, alpha: f64, beta: f64) -> Result<Self> {
        Self::new(PsiKind::EndpointSingular { a, b, alpha, beta })
    }

    pub fn extremal(r: f64) -> Result<Self> {
        Self::new(PsiKind::Extremal { r })
    }

    pub fn tabulated(p: Vec<f64>, psi: Vec<f64>) -> Result<Self> {
        Self::new(PsiKind::Tabulated { p, psi })
    }

    pub fn kind(&self) -> &PsiKind {
        &self.kind
    }

    /// The `r` of an extremal function.
    pub fn extremal_point(&self) -> Option<f64> {
        match self.kind {
            PsiKind::Extremal { r } => Some(r),
            _ => None,
        }
    }

    pub fn domain(&self) -> Domain {
        match &self.kind {
            PsiKind::PowerLaw { .. } | PsiKind::Extremal { .. } => Domain {
                lower: 1.0,
                upper: f64::INFINITY,
            },
            PsiKind::EndpointSingular { a, b, .. } => Domain { lower: *a, upper: *b },
            PsiKind::Tabulated { p, .. } => Domain {
                lower: p[0],
                upper: p[p.len() - 1],
            },
        }
    }

    /// `psi(p)`; `+inf` at singular endpoints and off the extremal point.
    pub fn eval(&self, p: f64) -> Result<f64> {
        if !self.domain().contains_closed(p) {
            return domain(format!("p = {p} lies outside the closure of the domain of psi"));
        }
        Ok(self.ln_eval_unchecked(p).exp())
    }

    /// `ln psi(p)` on the closed domain, `+inf` outside it.
    pub fn ln_eval_extended(&self, p: f64) -> f64 {
        if self.domain().contains_closed(p) {
            self.ln_eval_unchecked(p)
        } else {
            f64::INFINITY
        }
    }

    fn ln_eval_unchecked(&self, p: f64) -> f64 {
        match &self.kind {
            PsiKind::PowerLaw { m } => p.ln() / m,
            PsiKind::EndpointSingular { a, b, alpha, beta } => {
                let term = |d: f64, e: f64| if e == 0.0 { 0.0 } else { -e * d.ln() };
                term(p - a, *alpha) + term(b - p, *beta)
            }
            PsiKind::Extremal { r } => {
                if p == *r {
                    0.0
                } else {
                    f64::INFINITY
                }
            }
            PsiKind::Tabulated { p: ps, psi } => {
                let j = ps.partition_point(|&x| x <= p).clamp(1, ps.len() - 1);
                let (x0, x1) = (ps[j - 1].ln(), ps[j].ln());
                let (y0, y1) = (psi[j - 1].ln(), psi[j].ln());
                y0 + (y1 - y0) * (p.ln() - x0) / (x1 - x0)
            }
        }
    }

    /// Scan grid for sup/inf searches over the domain: log-spaced between the
    /// (offset) lower endpoint and the upper endpoint or `p_max`.
    pub fn scan_grid(&self, settings: &GridSettings) -> Result<PGrid> {
        let Domain { lower, upper } = self.domain();
        let (mut lo, mut hi) = (lower, upper.min(settings.p_max));
        if let PsiKind::EndpointSingular { alpha, beta, .. } = self.kind {
            let width = upper - lower;
            if alpha > 0.0 {
                lo += ENDPOINT_OFFSET * width;
            }
            if beta > 0.0 {
                hi -= ENDPOINT_OFFSET * width;
            }
        }
        if hi <= lo {
            return domain(format!(
                "p_max = {} leaves no room above the lower endpoint {lo}",
                settings.p_max
            ));
        }
        let grid = PGrid::log_spaced(lo, hi, settings.points.max(2), !upper.is_finite())?;
        match self.kind {
            PsiKind::Extremal { r } if r <= hi => grid.with_point(r),
            _ => Ok(grid),
        }
    }
}
