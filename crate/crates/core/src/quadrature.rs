//! Adaptive composite Simpson quadrature.

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrature {
    pub value: f64,
    /// False when some panel hit the depth limit before meeting its tolerance.
    pub converged: bool,
}

struct Panel {
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
}

fn simpson(a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> f64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}

fn recurse(f: &impl Fn(f64) -> f64, p: Panel, tol: f64, depth: usize, ok: &mut bool) -> f64 {
    let m = 0.5 * (p.a + p.b);
    let (lm, rm) = (0.5 * (p.a + m), 0.5 * (m + p.b));
    let (flm, frm) = (f(lm), f(rm));
    let left = simpson(p.a, m, p.fa, flm, p.fm);
    let right = simpson(m, p.b, p.fm, frm, p.fb);
    let delta = left + right - p.whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        if depth == 0 && delta.abs() > 15.0 * tol {
            *ok = false;
        }
        return left + right + delta / 15.0;
    }
    let l = Panel {
        a: p.a,
        b: m,
        fa: p.fa,
        fm: flm,
        fb: p.fm,
        whole: left,
    };
    let r = Panel {
        a: m,
        b: p.b,
        fa: p.fm,
        fm: frm,
        fb: p.fb,
        whole: right,
    };
    recurse(f, l, 0.5 * tol, depth - 1, ok) + recurse(f, r, 0.5 * tol, depth - 1, ok)
}

/// Integrates `f` over `[a, b]` to roughly `rel_tol` relative accuracy.
///
/// The interval is first cut into `panels` equal pieces so that narrow
/// features are not missed by the initial five-point estimate.
pub fn adaptive_simpson(
    f: impl Fn(f64) -> f64,
    a: f64,
    b: f64,
    rel_tol: f64,
    panels: usize,
    max_depth: usize,
) -> Quadrature {
    if a == b {
        return Quadrature {
            value: 0.0,
            converged: true,
        };
    }
    let panels = panels.max(1);
    let h = (b - a) / panels as f64;
    let mut coarse = Vec::with_capacity(panels);
    let mut scale = 0.0;
    for k in 0..panels {
        let x0 = a + k as f64 * h;
        let x1 = if k + 1 == panels { b } else { x0 + h };
        let (f0, fm, f1) = (f(x0), f(0.5 * (x0 + x1)), f(x1));
        let whole = simpson(x0, x1, f0, fm, f1);
        scale += whole.abs();
        coarse.push(Panel {
            a: x0,
            b: x1,
            fa: f0,
            fm,
            fb: f1,
            whole,
        });
    }
    if !scale.is_finite() {
        return Quadrature {
            value: f64::INFINITY,
            converged: false,
        };
    }
    let tol = (rel_tol * scale).max(f64::MIN_POSITIVE) / panels as f64;
    let mut ok = true;
    let value = coarse
        .into_iter()
        .map(|p| recurse(&f, p, tol, max_depth, &mut ok))
        .sum();
    Quadrature { value, converged: ok }
}
