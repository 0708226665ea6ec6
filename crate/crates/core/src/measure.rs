//! Discretized measure spaces, sampled functions and their Lebesgue-Riesz
//! moment curves `p -> ||f||_p`.
//!
//! A measure space is a finite list of nodes carrying strictly positive point
//! masses. Every norm in the crate reduces to a finite weighted sum over these
//! nodes, evaluated in a fixed order so repeated runs are bit-identical.

use std::io::{Read, Write};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{domain, precondition, Error, Result};

/// Weighted point masses standing in for a sigma-finite measure.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasureSpace {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl MeasureSpace {
    pub fn new(nodes: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        if nodes.is_empty() {
            return precondition("measure space needs at least one node");
        }
        if nodes.len() != weights.len() {
            return precondition(format!("{} nodes but {} weights", nodes.len(), weights.len()));
        }
        if let Some(i) = nodes.iter().position(|x| !x.is_finite()) {
            return precondition(format!("node {i} is not finite"));
        }
        if let Some(i) = weights.iter().position(|w| !(w.is_finite() && *w > 0.0)) {
            return precondition(format!(
                "weight {i} = {} is not strictly positive and finite",
                weights[i]
            ));
        }
        let space = MeasureSpace { nodes, weights };
        if !space.total_mass().is_finite() {
            return precondition("total mass overflows");
        }
        Ok(space)
    }

    /// `n` equally spaced nodes `start + i*L/n` on `[start, start + length)`,
    /// each carrying mass `L/n` (Lebesgue measure on the interval).
    pub fn uniform(start: f64, length: f64, n: usize) -> Result<Self> {
        if n == 0 || !(length.is_finite() && length > 0.0) {
            return precondition("uniform grid needs n >= 1 and a positive length");
        }
        let h = length / n as f64;
        let nodes = (0..n).map(|i| start + i as f64 * h).collect();
        MeasureSpace::new(nodes, vec![h; n])
    }

    /// Like [`MeasureSpace::uniform`] but with total mass one.
    pub fn normalized_uniform(start: f64, length: f64, n: usize) -> Result<Self> {
        if n == 0 || !(length.is_finite() && length > 0.0) {
            return precondition("uniform grid needs n >= 1 and a positive length");
        }
        let h = length / n as f64;
        let nodes = (0..n).map(|i| start + i as f64 * h).collect();
        MeasureSpace::new(nodes, vec![1.0 / n as f64; n])
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn total_mass(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// Measure of a node subset, summed in node order.
    pub fn mass_of(&self, members: &[usize]) -> f64 {
        let mut idx = members.to_vec();
        idx.sort_unstable();
        idx.dedup();
        idx.iter().map(|&i| self.weights[i]).sum()
    }

    /// Spacing of the grid if the nodes are equally spaced (relative slack
    /// `rel` measured against the span of the grid), `None` otherwise.
    pub fn uniform_spacing(&self, rel: f64) -> Option<f64> {
        let n = self.nodes.len();
        if n < 2 {
            return None;
        }
        let h = (self.nodes[n - 1] - self.nodes[0]) / (n - 1) as f64;
        if h <= 0.0 {
            return None;
        }
        let span = self.nodes[n - 1] - self.nodes[0] + h;
        let ok = self
            .nodes
            .iter()
            .enumerate()
            .all(|(i, x)| (x - (self.nodes[0] + i as f64 * h)).abs() <= rel * span);
        ok.then_some(h)
    }
}

/// A real function sampled on the nodes of a [`MeasureSpace`].
#[derive(Debug, Clone, PartialEq)]
pub struct SampledFunction {
    space: Arc<MeasureSpace>,
    values: Vec<f64>,
}

impl SampledFunction {
    pub fn new(space: Arc<MeasureSpace>, values: Vec<f64>) -> Result<Self> {
        if values.len() != space.len() {
            return precondition(format!(
                "{} values for a space with {} nodes",
                values.len(),
                space.len()
            ));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return precondition(format!("value {i} is not finite"));
        }
        Ok(SampledFunction { space, values })
    }

    pub fn from_fn(space: Arc<MeasureSpace>, f: impl Fn(f64) -> f64) -> Result<Self> {
        let values = space.nodes().iter().map(|&x| f(x)).collect();
        SampledFunction::new(space, values)
    }

    /// Indicator of a node subset.
    pub fn indicator(space: Arc<MeasureSpace>, members: &[usize]) -> Result<Self> {
        let mut values = vec![0.0; space.len()];
        for &i in members {
            if i >= values.len() {
                return precondition(format!("node index {i} out of range"));
            }
            values[i] = 1.0;
        }
        SampledFunction::new(space, values)
    }

    pub fn space(&self) -> &Arc<MeasureSpace> {
        &self.space
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    pub fn scaled(&self, c: f64) -> Result<Self> {
        SampledFunction::new(self.space.clone(), self.values.iter().map(|v| c * v).collect())
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|v| *v == 0.0)
    }
}

fn check_exponent(q: f64) -> Result<()> {
    if q.is_nan() || q < 1.0 {
        return domain(format!("exponent {q} is not in [1, inf]"));
    }
    Ok(())
}

/// Max-factored moment sum: returns `(m, s)` with `m = max|f_i|` and
/// `s = sum w_i (|f_i|/m)^q`, so that `||f||_q = m * s^(1/q)`.
fn factored_sum(f: &SampledFunction, q: f64) -> (f64, f64) {
    let m = f.max_abs();
    if m == 0.0 {
        return (0.0, 0.0);
    }
    let s = f
        .values
        .iter()
        .zip(f.space.weights())
        .map(|(v, w)| w * (v.abs() / m).powf(q))
        .sum();
    (m, s)
}

/// `(sum_i w_i |f_i|^q)^(1/q)`, or `max_i |f_i|` for `q = inf`.
pub fn lp_norm(f: &SampledFunction, q: f64) -> Result<f64> {
    check_exponent(q)?;
    if q == f64::INFINITY {
        return Ok(f.max_abs());
    }
    let (m, s) = factored_sum(f, q);
    if m == 0.0 {
        return Ok(0.0);
    }
    Ok(m * s.powf(1.0 / q))
}

/// Natural log of [`lp_norm`], `-inf` for the zero function.
pub fn ln_lp_norm(f: &SampledFunction, q: f64) -> Result<f64> {
    check_exponent(q)?;
    if q == f64::INFINITY {
        return Ok(f.max_abs().ln());
    }
    let (m, s) = factored_sum(f, q);
    if m == 0.0 {
        return Ok(f64::NEG_INFINITY);
    }
    Ok(m.ln() + s.ln() / q)
}

/// Measure of the level set `{|f| >= t}`.
pub fn tail_function(f: &SampledFunction, t: f64) -> Result<f64> {
    if t.is_nan() || t < 0.0 {
        return domain(format!("tail level {t} must be nonnegative"));
    }
    Ok(f.values
        .iter()
        .zip(f.space.weights())
        .filter(|(v, _)| v.abs() >= t)
        .map(|(_, w)| w)
        .sum())
}

/// Strictly increasing exponents `p >= 1`, optionally followed by `p = inf`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PGridRepr", into = "PGridRepr")]
pub struct PGrid {
    points: Vec<f64>,
    includes_infinity: bool,
}

#[derive(Serialize, Deserialize)]
struct PGridRepr {
    points: Vec<f64>,
    infinity: bool,
}

impl TryFrom<PGridRepr> for PGrid {
    type Error = Error;
    fn try_from(r: PGridRepr) -> Result<Self> {
        PGrid::new(r.points, r.infinity)
    }
}

impl From<PGrid> for PGridRepr {
    fn from(g: PGrid) -> Self {
        PGridRepr {
            points: g.points,
            infinity: g.includes_infinity,
        }
    }
}

impl PGrid {
    pub fn new(points: Vec<f64>, includes_infinity: bool) -> Result<Self> {
        if points.len() < 2 {
            return precondition("exponent grid needs at least 2 points");
        }
        if let Some(p) = points.iter().find(|p| !(p.is_finite() && **p >= 1.0)) {
            return precondition(format!("grid exponent {p} is not a finite number >= 1"));
        }
        if points.windows(2).any(|w| w[1] <= w[0]) {
            return precondition("grid exponents must be strictly increasing");
        }
        Ok(PGrid {
            points,
            includes_infinity,
        })
    }

    /// `n` points equally spaced in `ln p` on `[lo, hi]` (equivalently in `ln(1/p)`).
    pub fn log_spaced(lo: f64, hi: f64, n: usize, includes_infinity: bool) -> Result<Self> {
        if n < 2 || !(lo >= 1.0 && hi > lo && hi.is_finite()) {
            return precondition(format!("bad log-spaced grid [{lo}, {hi}] with {n} points"));
        }
        let (a, b) = (lo.ln(), hi.ln());
        let mut points: Vec<f64> = (0..n)
            .map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp())
            .collect();
        points[0] = lo;
        points[n - 1] = hi;
        // exp(ln x) can land a hair away from the endpoints; keep them strict.
        points.dedup();
        PGrid::new(points, includes_infinity)
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn includes_infinity(&self) -> bool {
        self.includes_infinity
    }

    pub fn first(&self) -> f64 {
        self.points[0]
    }

    pub fn last(&self) -> f64 {
        self.points[self.points.len() - 1]
    }

    /// Finite points followed by `inf` when flagged.
    pub fn exponents(&self) -> impl Iterator<Item = f64> + '_ {
        self.points
            .iter()
            .copied()
            .chain(self.includes_infinity.then_some(f64::INFINITY))
    }

    /// Returns a copy with `p` inserted (no-op if already present).
    pub fn with_point(&self, p: f64) -> Result<Self> {
        let mut points = self.points.clone();
        if let Err(pos) = points.binary_search_by(|x| x.total_cmp(&p)) {
            points.insert(pos, p);
        }
        PGrid::new(points, self.includes_infinity)
    }
}

/// The moment curve `h(p) = ||f||_p` sampled on a [`PGrid`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormFamily {
    pub grid: PGrid,
    pub values: Vec<f64>,
    pub essential_sup: Option<f64>,
}

pub fn norm_family(f: &SampledFunction, grid: &PGrid) -> Result<NormFamily> {
    let values = grid
        .points()
        .iter()
        .map(|&p| lp_norm(f, p))
        .collect::<Result<Vec<_>>>()?;
    Ok(NormFamily {
        grid: grid.clone(),
        values,
        essential_sup: grid.includes_infinity().then(|| f.max_abs()),
    })
}

/// Anything that can report `ln ||.||_p` for `p` in `[1, inf]`.
///
/// Implemented exactly by sampled functions and by `delta^(1/p)`, and by
/// interpolation for tabulated [`NormFamily`] values.
pub trait MomentCurve {
    fn ln_moment(&self, p: f64) -> f64;

    fn moment(&self, p: f64) -> f64 {
        self.ln_moment(p).exp()
    }
}

impl MomentCurve for SampledFunction {
    fn ln_moment(&self, p: f64) -> f64 {
        ln_lp_norm(self, p).unwrap_or(f64::NAN)
    }

    fn moment(&self, p: f64) -> f64 {
        lp_norm(self, p).unwrap_or(f64::NAN)
    }
}

impl MomentCurve for NormFamily {
    /// Piecewise linear in `(1/p, ln h)`, the coordinates in which the curve
    /// is convex. Beyond the last point the curve runs to the essential sup
    /// at `1/p = 0` if known, and is held constant otherwise; below the first
    /// point it is held constant.
    fn ln_moment(&self, p: f64) -> f64 {
        let pts = self.grid.points();
        let n = pts.len();
        let ln_h = |i: usize| self.values[i].ln();
        if p <= pts[0] {
            return ln_h(0);
        }
        if p >= pts[n - 1] {
            return match self.essential_sup {
                Some(sup) if p == f64::INFINITY => sup.ln(),
                Some(sup) => {
                    let (x0, y0, y1) = (1.0 / pts[n - 1], ln_h(n - 1), sup.ln());
                    if y0 == y1 {
                        return y0;
                    }
                    y1 + (y0 - y1) * (1.0 / p) / x0
                }
                None => ln_h(n - 1),
            };
        }
        let j = pts.partition_point(|&x| x <= p);
        let (pa, pb) = (pts[j - 1], pts[j]);
        let (ya, yb) = (ln_h(j - 1), ln_h(j));
        if ya == yb {
            return ya;
        }
        let s = (1.0 / pa - 1.0 / p) / (1.0 / pa - 1.0 / pb);
        ya + s * (yb - ya)
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct Row {
    node: f64,
    weight: f64,
    value: f64,
}

/// Reads a `node,weight,value` CSV into a space and a function on it.
pub fn read_csv(reader: impl Read, source_name: &str) -> Result<SampledFunction> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers = rdr.headers().map_err(|e| Error::from_csv(source_name, e))?.clone();
    let expected = ["node", "weight", "value"];
    if headers.len() != 3 || headers.iter().zip(expected).any(|(h, e)| h != e) {
        return Err(Error::Parse {
            source_name: source_name.to_string(),
            line: 1,
            message: format!(
                "expected header `node,weight,value`, found `{}`",
                headers.iter().collect::<Vec<_>>().join(",")
            ),
        });
    }
    let (mut nodes, mut weights, mut values) = (vec![], vec![], vec![]);
    for rec in rdr.deserialize::<Row>() {
        let row = rec.map_err(|e| Error::from_csv(source_name, e))?;
        nodes.push(row.node);
        weights.push(row.weight);
        values.push(row.value);
    }
    let space = MeasureSpace::new(nodes, weights).map_err(|e| Error::Parse {
        source_name: source_name.to_string(),
        line: 0,
        message: e.to_string(),
    })?;
    SampledFunction::new(Arc::new(space), values)
}

pub fn write_csv(f: &SampledFunction, writer: impl Write) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    for ((&node, &weight), &value) in f.space.nodes().iter().zip(f.space.weights()).zip(&f.values) {
        wtr.serialize(Row { node, weight, value })
            .map_err(|e| Error::from_csv("<output>", e))?;
    }
    wtr.flush()?;
    Ok(())
}
