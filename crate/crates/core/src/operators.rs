//! Concrete operators `u = Q[f](., t)` used as test subjects.
//!
//! * Dilation `u(y) = f(y / t)`: scales every `L_p` norm by exactly `t^(1/p)`.
//! * Periodic heat convolution with a wrapped Gaussian of variance `2t`.
//! * The identity on trigonometric polynomials of degree `<= n`, with
//!   `t = 1/(n+1)`; the Nikolskii inequality governs its constants.
//! * A discretized integral operator `u(y) = sum_x w_x K(t, y, x, f(x))`,
//!   possibly nonlinear in `f`.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;
use std::io::Read;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{domain, precondition, Error, Result};
use crate::measure::{MeasureSpace, SampledFunction};

pub type KernelFn = Arc<dyn Fn(f64, f64, f64, f64) -> f64 + Send + Sync>;

/// A kernel `K(t, y, x, v)` tabulated over `(t, y, x)` and, for each such
/// triple, over a sorted list of values `v` (linear interpolation in `v`).
#[derive(Debug, Clone, PartialEq)]
pub struct KernelTable {
    entries: BTreeMap<[u64; 3], Vec<(f64, f64)>>,
    ts: Vec<f64>,
    xs: Vec<f64>,
    ys: Vec<f64>,
    v_range: (f64, f64),
}

fn key(x: f64) -> u64 {
    // fold -0.0 onto 0.0
    (x + 0.0).to_bits()
}

fn sorted_distinct(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(f64::total_cmp);
    v.dedup();
    v
}

#[derive(Deserialize)]
struct KernelRow {
    t: f64,
    y: f64,
    x: f64,
    v: f64,
    #[serde(rename = "K")]
    k: f64,
}

impl KernelTable {
    /// Parses a `t,y,x,v,K` CSV.
    pub fn read_csv(reader: impl Read, source_name: &str) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let mut rows = vec![];
        for rec in rdr.deserialize::<KernelRow>() {
            let row = rec.map_err(|e| Error::from_csv(source_name, e))?;
            if ![row.t, row.y, row.x, row.v, row.k].iter().all(|x| x.is_finite()) {
                return Err(Error::Parse {
                    source_name: source_name.to_string(),
                    line: rows.len() as u64 + 2,
                    message: "kernel table entries must be finite".into(),
                });
            }
            rows.push((row.t, row.y, row.x, row.v, row.k));
        }
        KernelTable::from_rows(rows)
    }

    pub fn from_rows(rows: Vec<(f64, f64, f64, f64, f64)>) -> Result<Self> {
        if rows.is_empty() {
            return precondition("kernel table is empty");
        }
        let mut entries: BTreeMap<[u64; 3], Vec<(f64, f64)>> = BTreeMap::new();
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for &(t, y, x, v, k) in &rows {
            if !k.is_finite() {
                return precondition("kernel values must be finite");
            }
            entries.entry([key(t), key(y), key(x)]).or_default().push((v, k));
            lo = lo.min(v);
            hi = hi.max(v);
        }
        for list in entries.values_mut() {
            list.sort_by(|a, b| a.0.total_cmp(&b.0));
            if list.windows(2).any(|w| w[0].0 == w[1].0) {
                return precondition("duplicate (t, y, x, v) entry in kernel table");
            }
        }
        Ok(KernelTable {
            entries,
            ts: sorted_distinct(rows.iter().map(|r| r.0).collect()),
            ys: sorted_distinct(rows.iter().map(|r| r.1).collect()),
            xs: sorted_distinct(rows.iter().map(|r| r.2).collect()),
            v_range: (lo, hi),
        })
    }

    pub fn t_values(&self) -> &[f64] {
        &self.ts
    }

    pub fn y_values(&self) -> &[f64] {
        &self.ys
    }

    pub fn x_values(&self) -> &[f64] {
        &self.xs
    }

    pub fn v_range(&self) -> (f64, f64) {
        self.v_range
    }

    pub fn eval(&self, t: f64, y: f64, x: f64, v: f64) -> Result<f64> {
        let list = self
            .entries
            .get(&[key(t), key(y), key(x)])
            .ok_or_else(|| Error::Precondition(format!("kernel table has no entry for (t, y, x) = ({t}, {y}, {x})")))?;
        if list.len() == 1 {
            return Ok(list[0].1);
        }
        let (v0, v1) = (list[0].0, list[list.len() - 1].0);
        if v < v0 || v > v1 {
            return domain(format!("value {v} outside the tabulated kernel range [{v0}, {v1}]"));
        }
        let j = list.partition_point(|e| e.0 <= v).clamp(1, list.len() - 1);
        let ((va, ka), (vb, kb)) = (list[j - 1], list[j]);
        Ok(ka + (kb - ka) * (v - va) / (vb - va))
    }
}

#[derive(Clone)]
pub enum Kernel {
    Table(KernelTable),
    Function(KernelFn),
}

impl fmt::Debug for Kernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Kernel::Table(t) => write!(f, "Kernel::Table({} entries)", t.entries.len()),
            Kernel::Function(_) => f.write_str("Kernel::Function(..)"),
        }
    }
}

impl Kernel {
    fn eval(&self, t: f64, y: f64, x: f64, v: f64) -> Result<f64> {
        let k = match self {
            Kernel::Table(table) => table.eval(t, y, x, v)?,
            Kernel::Function(f) => f(t, y, x, v),
        };
        if !k.is_finite() {
            return domain(format!("kernel is not finite at (t, y, x, v) = ({t}, {y}, {x}, {v})"));
        }
        Ok(k)
    }
}

/// `Q0[f](y, t) = sum_x w_x K(t, y, x, f(x))` between two fixed spaces.
#[derive(Debug, Clone)]
pub struct KernelOperator {
    pub kernel: Kernel,
    pub x_space: Arc<MeasureSpace>,
    pub y_space: Arc<MeasureSpace>,
}

impl KernelOperator {
    /// Table-backed operator; unit masses on the tabulated `x` and `y`
    /// values unless explicit spaces are given.
    pub fn from_table(
        table: KernelTable,
        x_space: Option<MeasureSpace>,
        y_space: Option<MeasureSpace>,
    ) -> Result<Self> {
        let x_space = match x_space {
            Some(s) => s,
            None => MeasureSpace::new(table.xs.clone(), vec![1.0; table.xs.len()])?,
        };
        let y_space = match y_space {
            Some(s) => s,
            None => MeasureSpace::new(table.ys.clone(), vec![1.0; table.ys.len()])?,
        };
        Ok(KernelOperator {
            kernel: Kernel::Table(table),
            x_space: Arc::new(x_space),
            y_space: Arc::new(y_space),
        })
    }
}

#[derive(Debug, Clone)]
pub enum OperatorKind {
    Dilation,
    HeatConvolution { length: f64, resolution: usize },
    NikolskiiIdentity { max_degree: usize },
    KernelIntegral(KernelOperator),
}

impl OperatorKind {
    /// Short label used in report metadata.
    pub fn describe(&self) -> String {
        match self {
            OperatorKind::Dilation => "dilation".into(),
            OperatorKind::HeatConvolution { length, resolution } => {
                format!("heat(length={length},n={resolution})")
            }
            OperatorKind::NikolskiiIdentity { max_degree } => format!("nikolskii(degree={max_degree})"),
            OperatorKind::KernelIntegral(k) => {
                format!("kernel(x_nodes={},y_nodes={})", k.x_space.len(), k.y_space.len())
            }
        }
    }

    /// Whether `apply` accepts any `t > 0` rather than only the members of `t_set`.
    pub fn accepts_any_t(&self) -> bool {
        matches!(self, OperatorKind::Dilation | OperatorKind::HeatConvolution { .. })
    }

    pub fn is_linear(&self) -> bool {
        !matches!(self, OperatorKind::KernelIntegral(_))
    }
}

/// An operator together with its finite parameter set `T`.
#[derive(Debug, Clone)]
pub struct OperatorSpec {
    pub kind: OperatorKind,
    pub t_set: Vec<f64>,
}

impl OperatorSpec {
    pub fn new(kind: OperatorKind, t_set: Vec<f64>) -> Result<Self> {
        if t_set.is_empty() {
            return precondition("t_set must not be empty");
        }
        if let Some(t) = t_set.iter().find(|t| !(t.is_finite() && **t > 0.0)) {
            return precondition(format!("t_set entry {t} is not positive"));
        }
        if let OperatorKind::HeatConvolution { length, resolution } = kind {
            if !(length.is_finite() && length > 0.0) || resolution == 0 {
                return precondition("heat convolution needs a positive length and resolution");
            }
        }
        Ok(OperatorSpec { kind, t_set })
    }

    /// Nikolskii identity with its single parameter `t = 1/(n+1)`.
    pub fn nikolskii(max_degree: usize) -> Self {
        OperatorSpec {
            kind: OperatorKind::NikolskiiIdentity { max_degree },
            t_set: vec![nikolskii_t(max_degree)],
        }
    }
}

pub fn nikolskii_t(max_degree: usize) -> f64 {
    1.0 / (max_degree as f64 + 1.0)
}

/// JSON form of an operator: `{"kind":"dilation"}`, `{"kind":"heat","length":..,"n":..}`,
/// `{"kind":"nikolskii","degree":..}` or `{"kind":"kernel","table":"path.csv"}`.
/// A kernel operator may also name `x_space` / `y_space` CSVs (`node,weight,value`;
/// the value column is ignored).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum OperatorConfig {
    #[serde(rename = "dilation")]
    Dilation,
    #[serde(rename = "heat")]
    Heat { length: f64, n: usize },
    #[serde(rename = "nikolskii")]
    Nikolskii { degree: usize },
    #[serde(rename = "kernel")]
    Kernel {
        table: PathBuf,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        x_space: Option<PathBuf>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        y_space: Option<PathBuf>,
    },
}

impl OperatorConfig {
    /// Loads referenced files relative to `base_dir`.
    pub fn resolve(&self, base_dir: &Path) -> Result<OperatorKind> {
        Ok(match self {
            OperatorConfig::Dilation => OperatorKind::Dilation,
            OperatorConfig::Heat { length, n } => OperatorKind::HeatConvolution {
                length: *length,
                resolution: *n,
            },
            OperatorConfig::Nikolskii { degree } => OperatorKind::NikolskiiIdentity { max_degree: *degree },
            OperatorConfig::Kernel {
                table,
                x_space,
                y_space,
            } => {
                let open = |p: &Path| -> Result<(std::fs::File, String)> {
                    let full = base_dir.join(p);
                    let name = full.display().to_string();
                    let file = std::fs::File::open(&full).map_err(|e| Error::Parse {
                        source_name: name.clone(),
                        line: 0,
                        message: e.to_string(),
                    })?;
                    Ok((file, name))
                };
                let (file, name) = open(table)?;
                let table = KernelTable::read_csv(file, &name)?;
                let load_space = |p: &Option<PathBuf>| -> Result<Option<MeasureSpace>> {
                    p.as_ref()
                        .map(|p| {
                            let (file, name) = open(p)?;
                            let f = crate::measure::read_csv(file, &name)?;
                            Ok(f.space().as_ref().clone())
                        })
                        .transpose()
                };
                OperatorKind::KernelIntegral(KernelOperator::from_table(
                    table,
                    load_space(x_space)?,
                    load_space(y_space)?,
                )?)
            }
        })
    }
}

/// Input, output and parameter of one operator application.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorPair {
    pub input: SampledFunction,
    pub output: SampledFunction,
    pub t: f64,
}

/// Row of the circulant wrapped-Gaussian kernel (variance `2t`) on `n`
/// periodic nodes of spacing `length / n`, normalized to sum one.
pub fn heat_kernel_row(t: f64, length: f64, n: usize) -> Vec<f64> {
    let h = length / n as f64;
    let images = ((160.0 * t).sqrt() / length).ceil() as i64 + 1;
    let mut row: Vec<f64> = (0..n)
        .map(|j| {
            let d = j as f64 * h;
            (-images..=images)
                .map(|k| {
                    let z = d + k as f64 * length;
                    (-z * z / (4.0 * t)).exp()
                })
                .sum()
        })
        .collect();
    let total: f64 = row.iter().sum();
    row.iter_mut().for_each(|k| *k /= total);
    row
}

/// Magnitudes `|c_k|`, `k = 0..=n/2`, of the discrete Fourier coefficients
/// `c_k = (1/n) sum_j f_j e^{-2 pi i jk/n}`.
pub fn fourier_magnitudes(values: &[f64]) -> Vec<f64> {
    let n = values.len();
    (0..=n / 2)
        .map(|k| {
            let (mut re, mut im) = (0.0, 0.0);
            for (j, v) in values.iter().enumerate() {
                let angle = 2.0 * PI * ((j * k) % n) as f64 / n as f64;
                re += v * angle.cos();
                im -= v * angle.sin();
            }
            (re * re + im * im).sqrt() / n as f64
        })
        .collect()
}

fn check_heat_grid(space: &MeasureSpace, length: f64, n: usize) -> Result<()> {
    let h = length / n as f64;
    if space.len() != n {
        return precondition(format!("heat convolution expects {n} nodes, got {}", space.len()));
    }
    let uniform = n == 1 || space.uniform_spacing(1e-9).is_some_and(|s| (s - h).abs() <= 1e-9 * h);
    if !uniform || space.weights().iter().any(|w| (w - h).abs() > 1e-9 * h) {
        return precondition("heat convolution needs a uniform periodic grid with spacing length/n");
    }
    Ok(())
}

fn check_trig_grid(f: &SampledFunction, degree: usize) -> Result<()> {
    let space = f.space();
    let m = space.len();
    if m < 4 * degree + 1 {
        return precondition(format!(
            "degree {degree} needs at least {} nodes, got {m}",
            4 * degree + 1
        ));
    }
    let inv = 1.0 / m as f64;
    let ok_nodes = space
        .nodes()
        .iter()
        .enumerate()
        .all(|(i, x)| (x - 2.0 * PI * i as f64 * inv).abs() <= 1e-9);
    if !ok_nodes || space.weights().iter().any(|w| (w - inv).abs() > 1e-9 * inv) {
        return precondition("trigonometric grid must be uniform on [0, 2pi) with normalized measure");
    }
    let scale = f.max_abs().max(f64::MIN_POSITIVE);
    let excess = fourier_magnitudes(f.values())
        .into_iter()
        .skip(degree + 1)
        .fold(0.0, f64::max);
    if excess > 1e-9 * scale {
        return precondition(format!("function has Fourier content {excess:e} above degree {degree}"));
    }
    Ok(())
}

/// `u = Q[f](., t)`.
pub fn apply(op: &OperatorSpec, f: &SampledFunction, t: f64) -> Result<SampledFunction> {
    if !(t.is_finite() && t > 0.0) {
        return domain(format!("parameter t = {t} must be positive"));
    }
    if !op.kind.accepts_any_t() && !op.t_set.iter().any(|&s| (s - t).abs() <= 1e-12 * s) {
        return precondition(format!("t = {t} is not in the operator's t_set"));
    }
    match &op.kind {
        OperatorKind::Dilation => {
            let space = f.space();
            let nodes = space.nodes().iter().map(|x| t * x).collect();
            let weights = space.weights().iter().map(|w| t * w).collect();
            let out = Arc::new(MeasureSpace::new(nodes, weights)?);
            SampledFunction::new(out, f.values().to_vec())
        }
        OperatorKind::HeatConvolution { length, resolution } => {
            let n = *resolution;
            check_heat_grid(f.space(), *length, n)?;
            let row = heat_kernel_row(t, *length, n);
            let v = f.values();
            let u = (0..n)
                .map(|i| (0..n).map(|j| row[(i + n - j) % n] * v[j]).sum())
                .collect();
            SampledFunction::new(f.space().clone(), u)
        }
        OperatorKind::NikolskiiIdentity { max_degree } => {
            if (t - nikolskii_t(*max_degree)).abs() > 1e-12 * t {
                return precondition(format!("Nikolskii identity of degree {max_degree} uses t = 1/(n+1)"));
            }
            check_trig_grid(f, *max_degree)?;
            Ok(f.clone())
        }
        OperatorKind::KernelIntegral(k) => {
            if f.space().nodes() != k.x_space.nodes() {
                return precondition("input function does not live on the kernel's x-space");
            }
            let xs = f.space().nodes();
            let ws = f.space().weights();
            let u = k
                .y_space
                .nodes()
                .iter()
                .map(|&y| {
                    xs.iter()
                        .zip(ws)
                        .zip(f.values())
                        .map(|((&x, &w), &v)| Ok(w * k.kernel.eval(t, y, x, v)?))
                        .sum::<Result<f64>>()
                })
                .collect::<Result<Vec<_>>>()?;
            SampledFunction::new(k.y_space.clone(), u)
        }
    }
}

pub fn apply_pair(op: &OperatorSpec, f: &SampledFunction, t: f64) -> Result<OperatorPair> {
    Ok(OperatorPair {
        input: f.clone(),
        output: apply(op, f, t)?,
        t,
    })
}

pub const DILATION_NODES: usize = 256;

/// Input space used by [`make_test_family`] for each operator kind.
pub fn family_space(op: &OperatorSpec) -> Result<Arc<MeasureSpace>> {
    Ok(Arc::new(match &op.kind {
        OperatorKind::Dilation => MeasureSpace::uniform(0.0, 1.0, DILATION_NODES)?,
        OperatorKind::HeatConvolution { length, resolution } => MeasureSpace::uniform(0.0, *length, *resolution)?,
        OperatorKind::NikolskiiIdentity { max_degree } => {
            MeasureSpace::normalized_uniform(0.0, 2.0 * PI, 8 * (max_degree + 1) + 1)?
        }
        OperatorKind::KernelIntegral(k) => return Ok(k.x_space.clone()),
    }))
}

fn bump_mixture(rng: &mut ChaCha8Rng, space: &MeasureSpace, period: Option<f64>) -> Vec<f64> {
    let (lo, span) = match period {
        Some(l) => (0.0, l),
        None => {
            let nodes = space.nodes();
            let lo = nodes.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = nodes.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            (lo, (hi - lo).max(f64::MIN_POSITIVE))
        }
    };
    let count = rng.random_range(1..=4);
    let bumps: Vec<(f64, f64, f64)> = (0..count)
        .map(|_| {
            (
                rng.random_range(0.2..1.0),
                lo + rng.random_range(0.0..1.0) * span,
                rng.random_range(0.02..0.2) * span,
            )
        })
        .collect();
    space
        .nodes()
        .iter()
        .map(|&x| {
            bumps
                .iter()
                .map(|&(amp, c, w)| {
                    let mut d = (x - c).abs();
                    if let Some(l) = period {
                        d = d.rem_euclid(l);
                        d = d.min(l - d);
                    }
                    amp * (-0.5 * (d / w) * (d / w)).exp()
                })
                .sum()
        })
        .collect()
}

fn trig_polynomial(rng: &mut ChaCha8Rng, space: &MeasureSpace, n: usize, peaked: bool) -> Vec<f64> {
    let terms: Vec<(usize, f64, f64)> = if peaked {
        // nonnegative cosine coefficients centred at a random point: Fejer-like
        let x0 = rng.random_range(0.0..2.0 * PI);
        (0..=n)
            .map(|k| {
                let c = (1.0 - k as f64 / (n as f64 + 1.0)) * rng.random_range(0.5..1.0);
                let phase = k as f64 * x0;
                (k, c * phase.cos(), c * phase.sin())
            })
            .collect()
    } else {
        (0..=n)
            .map(|k| {
                let a = rng.random_range(-1.0..1.0);
                let b = if k == 0 { 0.0 } else { rng.random_range(-1.0..1.0) };
                (k, a, b)
            })
            .collect()
    };
    space
        .nodes()
        .iter()
        .map(|&x| {
            terms
                .iter()
                .map(|&(k, a, b)| {
                    let kx = k as f64 * x;
                    a * kx.cos() + b * kx.sin()
                })
                .sum()
        })
        .collect()
}

/// Deterministic pseudo-random inputs suited to the operator. Member `j`
/// draws from stream `j` of a ChaCha generator keyed by `seed`, so the
/// family does not depend on evaluation order.
pub fn make_test_family(op: &OperatorSpec, count: usize, seed: u64) -> Result<Vec<SampledFunction>> {
    if count == 0 {
        return precondition("family size must be at least 1");
    }
    let space = family_space(op)?;
    let indices: Vec<usize> = (0..count).collect();
    crate::parallel::map(&indices, |&j| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(j as u64);
        let values = match &op.kind {
            OperatorKind::Dilation => bump_mixture(&mut rng, &space, None),
            OperatorKind::HeatConvolution { length, .. } => bump_mixture(&mut rng, &space, Some(*length)),
            OperatorKind::NikolskiiIdentity { max_degree } => {
                trig_polynomial(&mut rng, &space, *max_degree, j % 2 == 0)
            }
            OperatorKind::KernelIntegral(k) => {
                let (lo, hi) = match &k.kernel {
                    Kernel::Table(t) if t.v_range.0 < t.v_range.1 => t.v_range,
                    Kernel::Table(t) => (t.v_range.0, t.v_range.0),
                    Kernel::Function(_) => (-1.0, 1.0),
                };
                space
                    .nodes()
                    .iter()
                    .map(|_| if lo < hi { rng.random_range(lo..=hi) } else { lo })
                    .collect()
            }
        };
        SampledFunction::new(space.clone(), values)
    })
    .into_iter()
    .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::lp_norm;

    fn dilation() -> OperatorSpec {
        OperatorSpec::new(OperatorKind::Dilation, vec![0.25, 1.0, 4.0]).unwrap()
    }

    #[test]
    fn dilation_of_unit_indicator() {
        let space = Arc::new(MeasureSpace::uniform(0.0, 1.0, 64).unwrap());
        let f = SampledFunction::from_fn(space, |_| 1.0).unwrap();
        let u = apply(&dilation(), &f, 4.0).unwrap();
        for p in [1.0, 1.5, 2.0, 7.0, 100.0] {
            assert!((lp_norm(&u, p).unwrap() - 4f64.powf(1.0 / p)).abs() < 1e-13);
        }
        assert_eq!(u.space().nodes()[1], 4.0 / 64.0);
    }

    #[test]
    fn heat_preserves_mass() {
        let op = OperatorSpec::new(
            OperatorKind::HeatConvolution {
                length: 2.0 * PI,
                resolution: 128,
            },
            vec![0.1],
        )
        .unwrap();
        let fam = make_test_family(&op, 3, 11).unwrap();
        for f in &fam {
            for t in [1e-4, 0.01, 0.1, 3.0] {
                let u = apply(&op, f, t).unwrap();
                let (n1, m1) = (lp_norm(&u, 1.0).unwrap(), lp_norm(f, 1.0).unwrap());
                assert!((n1 - m1).abs() <= 1e-12 * m1);
                assert!(lp_norm(&u, 3.0).unwrap() <= lp_norm(f, 3.0).unwrap() * (1.0 + 1e-12));
            }
        }
        let row = heat_kernel_row(0.05, 1.0, 50);
        assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-14);
        assert!((row[1] - row[49]).abs() < 1e-15, "kernel is symmetric");
    }

    #[test]
    fn heat_rejects_foreign_grids() {
        let op = OperatorSpec::new(
            OperatorKind::HeatConvolution {
                length: 1.0,
                resolution: 8,
            },
            vec![0.1],
        )
        .unwrap();
        let wrong_n = Arc::new(MeasureSpace::uniform(0.0, 1.0, 9).unwrap());
        let f = SampledFunction::from_fn(wrong_n, |x| x).unwrap();
        assert!(matches!(apply(&op, &f, 0.1), Err(Error::Precondition(_))));
        let nodes = vec![0.0, 0.1, 0.25, 0.375, 0.5, 0.625, 0.75, 0.875];
        let skewed = Arc::new(MeasureSpace::new(nodes, vec![0.125; 8]).unwrap());
        let f = SampledFunction::from_fn(skewed, |x| x).unwrap();
        assert!(matches!(apply(&op, &f, 0.1), Err(Error::Precondition(_))));
    }

    #[test]
    fn cos_n_norms_on_minimal_grid() {
        let n = 8;
        let space = Arc::new(MeasureSpace::normalized_uniform(0.0, 2.0 * PI, 4 * n + 1).unwrap());
        let f = SampledFunction::from_fn(space, |x| (n as f64 * x).cos()).unwrap();
        let op = OperatorSpec::nikolskii(n);
        let u = apply(&op, &f, nikolskii_t(n)).unwrap();
        assert!((lp_norm(&u, 2.0).unwrap() - 0.5f64.sqrt()).abs() < 1e-14);
        assert!((lp_norm(&u, f64::INFINITY).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn nikolskii_preconditions() {
        let n = 8;
        let op = OperatorSpec::nikolskii(n);
        let coarse = Arc::new(MeasureSpace::normalized_uniform(0.0, 2.0 * PI, 4 * n).unwrap());
        let f = SampledFunction::from_fn(coarse, |x| x.cos()).unwrap();
        assert!(matches!(apply(&op, &f, nikolskii_t(n)), Err(Error::Precondition(_))));
        let space = Arc::new(MeasureSpace::normalized_uniform(0.0, 2.0 * PI, 41).unwrap());
        let high = SampledFunction::from_fn(space.clone(), |x| (12.0 * x).cos()).unwrap();
        assert!(matches!(apply(&op, &high, nikolskii_t(n)), Err(Error::Precondition(_))));
        let ok = SampledFunction::from_fn(space, |x| (3.0 * x).sin()).unwrap();
        assert!(matches!(apply(&op, &ok, 0.5), Err(Error::Precondition(_))));
    }

    #[test]
    fn kernel_table_interpolates_in_value() {
        let rows = vec![
            (1.0, 0.0, 0.0, 0.0, 0.0),
            (1.0, 0.0, 0.0, 2.0, 4.0),
            (1.0, 0.0, 1.0, 0.0, 1.0),
            (1.0, 0.0, 1.0, 2.0, 1.0),
        ];
        let table = KernelTable::from_rows(rows).unwrap();
        assert_eq!(table.eval(1.0, 0.0, 0.0, 0.5).unwrap(), 1.0);
        assert!(matches!(table.eval(1.0, 0.0, 0.0, 3.0), Err(Error::Domain(_))));
        assert!(matches!(table.eval(2.0, 0.0, 0.0, 1.0), Err(Error::Precondition(_))));
        let k = KernelOperator::from_table(table, None, None).unwrap();
        let op = OperatorSpec::new(OperatorKind::KernelIntegral(k.clone()), vec![1.0]).unwrap();
        let f = SampledFunction::new(k.x_space.clone(), vec![1.0, 1.5]).unwrap();
        let u = apply(&op, &f, 1.0).unwrap();
        assert_eq!(u.values(), &[2.0 + 1.0]);
    }

    #[test]
    fn kernel_csv() {
        let text = "t,y,x,v,K\n1,0,0,0,0\n1,0,0,1,1\n";
        let t = KernelTable::read_csv(text.as_bytes(), "k.csv").unwrap();
        assert_eq!(t.v_range(), (0.0, 1.0));
        let bad = "t,y,x,v,K\n1,0,0,0,zzz\n";
        assert!(matches!(
            KernelTable::read_csv(bad.as_bytes(), "k.csv"),
            Err(Error::Parse { line: 2, .. })
        ));
    }

    #[test]
    fn nonlinear_closure_kernel() {
        let x_space = Arc::new(MeasureSpace::uniform(0.0, 1.0, 10).unwrap());
        let y_space = Arc::new(MeasureSpace::uniform(0.0, 1.0, 5).unwrap());
        let kernel: KernelFn = Arc::new(|t, y, x, v| t * (1.0 + x * y) * v * v);
        let op = OperatorSpec::new(
            OperatorKind::KernelIntegral(KernelOperator {
                kernel: Kernel::Function(kernel),
                x_space: x_space.clone(),
                y_space,
            }),
            vec![1.0, 2.0],
        )
        .unwrap();
        let f = SampledFunction::from_fn(x_space, |x| x).unwrap();
        let u1 = apply(&op, &f, 1.0).unwrap();
        let u2 = apply(&op, &f.scaled(2.0).unwrap(), 1.0).unwrap();
        for (a, b) in u1.values().iter().zip(u2.values()) {
            assert!((4.0 * a - b).abs() < 1e-14, "quadratic in f");
        }
        assert!(matches!(apply(&op, &f, 3.0), Err(Error::Precondition(_))));
    }

    #[test]
    fn families_are_reproducible() {
        let op = dilation();
        let a = make_test_family(&op, 1, 0).unwrap();
        let b = make_test_family(&op, 1, 0).unwrap();
        assert_eq!(a, b);
        let many = make_test_family(&op, 50, 7).unwrap();
        assert_eq!(many.len(), 50);
        for i in 0..50 {
            for j in 0..i {
                assert_ne!(many[i].values(), many[j].values());
            }
        }
        assert!(make_test_family(&op, 0, 0).is_err());
    }

    #[test]
    fn operator_config_json() {
        let c: OperatorConfig = serde_json::from_str(r#"{"kind":"heat","length":6.0,"n":64}"#).unwrap();
        assert_eq!(c, OperatorConfig::Heat { length: 6.0, n: 64 });
        let c: OperatorConfig = serde_json::from_str(r#"{"kind":"nikolskii","degree":8}"#).unwrap();
        assert!(matches!(
            c.resolve(Path::new(".")).unwrap(),
            OperatorKind::NikolskiiIdentity { max_degree: 8 }
        ));
        let c: OperatorConfig = serde_json::from_str(r#"{"kind":"dilation"}"#).unwrap();
        assert_eq!(serde_json::to_string(&c).unwrap(), r#"{"kind":"dilation"}"#);
    }
}
