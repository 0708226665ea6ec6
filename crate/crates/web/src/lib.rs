//! Three plots for the browser: the fundamental function of a GLS space,
//! the moment curve of a sampled function under its `N psi(p)` envelope, and
//! the empirical tail against the Markov bound.
//!
//! Functions are given as samples on `[0, 1)` with equal weights summing to one.

use std::sync::Arc;

use glspace::spaces::{gls_norm_detailed, Evaluation, Settings};
use glspace::{
    fundamental_function, lp_norm, tail_bound, tail_function, GeneratingFunction, MeasureSpace, SampledFunction,
};
use wasm_bindgen::prelude::*;

/// Points `(x, y)` with an optional second series and one marked point.
#[wasm_bindgen]
#[derive(Debug, Clone, PartialEq)]
pub struct Curve {
    x: Vec<f64>,
    y: Vec<f64>,
    y2: Vec<f64>,
    marker_x: f64,
    marker_y: f64,
}

#[wasm_bindgen]
impl Curve {
    #[wasm_bindgen(getter)]
    pub fn x(&self) -> Vec<f64> {
        self.x.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn y(&self) -> Vec<f64> {
        self.y.clone()
    }

    /// Envelope or bound; empty when there is none.
    #[wasm_bindgen(getter)]
    pub fn y2(&self) -> Vec<f64> {
        self.y2.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn marker_x(&self) -> f64 {
        self.marker_x
    }

    #[wasm_bindgen(getter)]
    pub fn marker_y(&self) -> f64 {
        self.marker_y
    }
}

fn parse_psi(json: &str) -> Result<GeneratingFunction, String> {
    serde_json::from_str(json).map_err(|e| format!("psi: {e}"))
}

fn sampled(values: &[f64]) -> Result<SampledFunction, String> {
    let n = values.len();
    let space = MeasureSpace::normalized_uniform(0.0, 1.0, n).map_err(|e| e.to_string())?;
    SampledFunction::new(Arc::new(space), values.to_vec()).map_err(|e| e.to_string())
}

fn log_spaced(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| (lo.ln() + (hi / lo).ln() * i as f64 / (n - 1) as f64).exp())
        .collect()
}

/// `phi(delta)` at `n` log-spaced masses in `[e^-12, e^2]`; the marker sits at `delta = 1`.
pub fn phi_points(psi: &str, n: usize) -> Result<Curve, String> {
    let psi = parse_psi(psi)?;
    let x = log_spaced((-12f64).exp(), 2f64.exp(), n.max(2));
    let y = x
        .iter()
        .map(|&d| fundamental_function(&psi, d))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| e.to_string())?;
    let at_one = fundamental_function(&psi, 1.0).map_err(|e| e.to_string())?;
    Ok(Curve {
        x,
        y,
        y2: Vec::new(),
        marker_x: 1.0,
        marker_y: at_one,
    })
}

/// `||f||_p` against `N psi(p)`, with the marker at the maximizing `p`.
pub fn moment_points(psi: &str, values: &[f64], n: usize) -> Result<Curve, String> {
    let psi = parse_psi(psi)?;
    let f = sampled(values)?;
    let settings = Settings::default();
    let grid = psi.scan_grid(&settings.grid).map_err(|e| e.to_string())?;
    let best = gls_norm_detailed(&f, &psi, &grid, Evaluation::Refined, &settings).map_err(|e| e.to_string())?;
    let dom = psi.domain();
    let lo = dom.lower * (1.0 + 1e-6);
    let hi = if dom.is_bounded() {
        dom.upper * (1.0 - 1e-6)
    } else {
        (4.0 * best.argmax).clamp(8.0, 1e3)
    };
    let mut x = log_spaced(lo, hi.max(lo * 1.01), n.max(2));
    if let Some(r) = psi.extremal_point() {
        let at = x.partition_point(|&p| p < r);
        x.insert(at, r);
    }
    let y = x
        .iter()
        .map(|&p| lp_norm(&f, p))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| e.to_string())?;
    let y2 = x
        .iter()
        .map(|&p| best.value * psi.eval(p).unwrap_or(f64::INFINITY))
        .collect();
    let marker_y = lp_norm(&f, best.argmax).map_err(|e| e.to_string())?;
    Ok(Curve {
        x,
        y,
        y2,
        marker_x: best.argmax,
        marker_y,
    })
}

/// Empirical tail and its bound at `n` levels up to `max |f|`; the marker
/// holds the GLS norm in `marker_y`.
pub fn tail_points(psi: &str, values: &[f64], n: usize) -> Result<Curve, String> {
    let psi = parse_psi(psi)?;
    let f = sampled(values)?;
    let grid = psi.scan_grid(&Settings::default().grid).map_err(|e| e.to_string())?;
    let norm = glspace::gls_norm(&f, &psi, &grid).map_err(|e| e.to_string())?;
    let top = f.max_abs();
    if top == 0.0 {
        return Err("the function is zero".into());
    }
    let n = n.max(2);
    let x: Vec<f64> = (1..=n).map(|i| top * i as f64 / n as f64).collect();
    let y = x
        .iter()
        .map(|&t| tail_function(&f, t))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| e.to_string())?;
    let y2 = x
        .iter()
        .map(|&t| tail_bound(&psi, norm, t).map(|b| b.min(1.0)))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| e.to_string())?;
    Ok(Curve {
        x,
        y,
        y2,
        marker_x: 0.0,
        marker_y: norm,
    })
}

#[wasm_bindgen]
pub fn phi_curve(psi: &str, n: usize) -> Result<Curve, JsError> {
    phi_points(psi, n).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn moment_curve(psi: &str, values: &[f64], n: usize) -> Result<Curve, JsError> {
    moment_points(psi, values, n).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn tail_curve(psi: &str, values: &[f64], n: usize) -> Result<Curve, JsError> {
    tail_points(psi, values, n).map_err(|e| JsError::new(&e))
}
