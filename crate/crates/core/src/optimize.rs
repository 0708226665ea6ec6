//! One-dimensional supremum search: a scan over a grid of exponents followed
//! by golden-section refinement on the bracket around the best grid point.
//!
//! Objectives are supplied in log form and maximized in the coordinate
//! `x = ln p`. The refined value is never below the best grid value.

/// Golden-section stopping rule.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GoldenSection {
    /// Stop when the bracket width falls below `rel_tol * max(1, |lo| + |hi|)`.
    pub rel_tol: f64,
    pub max_iter: usize,
}

impl Default for GoldenSection {
    fn default() -> Self {
        GoldenSection {
            rel_tol: 1e-10,
            max_iter: 200,
        }
    }
}

/// Location and log-value of a supremum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Supremum {
    pub ln_value: f64,
    pub argmax: f64,
    /// Set when the search domain was cut at a finite `p_max` and the
    /// objective was still not decreasing over the last decade.
    pub truncated: bool,
}

impl Supremum {
    pub fn value(&self) -> f64 {
        self.ln_value.exp()
    }
}

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Maximizes `f` on `[lo, hi]`, returning the best `(x, f(x))` seen.
pub fn golden_section_max(f: impl Fn(f64) -> f64, lo: f64, hi: f64, rule: &GoldenSection) -> (f64, f64) {
    let (mut a, mut b) = (lo, hi);
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    let mut best = if fc >= fd { (c, fc) } else { (d, fd) };
    for _ in 0..rule.max_iter {
        if (b - a).abs() <= rule.rel_tol * (a.abs() + b.abs()).max(1.0) {
            break;
        }
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
            if fc > best.1 {
                best = (c, fc);
            }
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
            if fd > best.1 {
                best = (d, fd);
            }
        }
    }
    best
}

/// Scans `points` (strictly increasing, finite, >= 1) with the log-objective
/// and optionally refines around the best point. `unbounded_above` enables
/// the last-decade truncation check. Returns `None` for an empty scan.
pub fn scan_and_refine(
    points: &[f64],
    objective: impl Fn(f64) -> f64,
    refine: Option<&GoldenSection>,
    unbounded_above: bool,
) -> Option<Supremum> {
    if points.is_empty() {
        return None;
    }
    let values: Vec<f64> = points
        .iter()
        .map(|&p| {
            let v = objective(p);
            if v.is_nan() {
                f64::NEG_INFINITY
            } else {
                v
            }
        })
        .collect();
    let (mut best_i, mut best_v) = (0, values[0]);
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > best_v {
            best_i = i;
            best_v = v;
        }
    }
    let mut sup = Supremum {
        ln_value: best_v,
        argmax: points[best_i],
        truncated: false,
    };

    if unbounded_above && best_v > f64::NEG_INFINITY {
        let n = points.len();
        let last = points[n - 1];
        let start = points.partition_point(|&p| p < last / 10.0).min(n - 1);
        if start < n - 1 && values[n - 1] >= values[start] {
            sup.truncated = true;
        }
    }

    if let Some(rule) = refine {
        if points.len() >= 2 && best_v > f64::NEG_INFINITY && best_v < f64::INFINITY {
            let lo = points[best_i.saturating_sub(1)];
            let hi = points[(best_i + 1).min(points.len() - 1)];
            let g = |x: f64| {
                let v = objective(x.exp());
                if v.is_nan() {
                    f64::NEG_INFINITY
                } else {
                    v
                }
            };
            let (x, v) = golden_section_max(g, lo.ln(), hi.ln(), rule);
            if v > sup.ln_value {
                sup.ln_value = v;
                sup.argmax = x.exp();
            }
        }
    }
    Some(sup)
}
