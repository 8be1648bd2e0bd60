//! Adaptive Simpson quadrature.

use crate::error::{Error, Result};

pub const DEFAULT_REL_TOL: f64 = 1e-10;
pub const DEFAULT_MAX_DEPTH: u32 = 40;

/// Number of equal panels the range is cut into before adaptation starts.
/// A single three-point Simpson estimate can be badly off for integrands
/// with a kink, which would make the relative tolerance meaningless.
const INITIAL_PANELS: usize = 8;

struct Panel {
    a: f64,
    m: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
}

/// Integrates `f` over `[a, b]` to a relative tolerance `rel_tol`.
///
/// Returns [`Error::Quadrature`] if some panel still misses its share of the
/// error budget after `max_depth` bisections.
pub fn integrate<F>(f: F, a: f64, b: f64, rel_tol: f64, max_depth: u32) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    if a == b {
        return Ok(0.0);
    }
    if b < a {
        return integrate(f, b, a, rel_tol, max_depth).map(|v| -v);
    }

    let width = (b - a) / INITIAL_PANELS as f64;
    let mut panels = Vec::with_capacity(INITIAL_PANELS);
    let mut fa = f(a);
    for k in 0..INITIAL_PANELS {
        let pa = a + width * k as f64;
        let pb = if k + 1 == INITIAL_PANELS { b } else { a + width * (k + 1) as f64 };
        let pm = 0.5 * (pa + pb);
        let (fm, fb) = (f(pm), f(pb));
        let whole = (pb - pa) * (fa + 4.0 * fm + fb) / 6.0;
        panels.push(Panel { a: pa, m: pm, b: pb, fa, fm, fb, whole });
        fa = fb;
    }

    let rough: f64 = panels.iter().map(|p| p.whole).sum();
    let abs_rough: f64 = panels.iter().map(|p| p.whole.abs()).sum();
    if abs_rough == 0.0 {
        // Only possible when f vanishes on every node; refine once to be sure.
        let fine = composite_simpson(&f, a, b, 1024);
        if fine == 0.0 {
            return Ok(0.0);
        }
    }
    let tol = rel_tol * abs_rough.max(rough.abs()).max(f64::MIN_POSITIVE);
    let panel_tol = tol / INITIAL_PANELS as f64;

    let mut total = 0.0;
    let mut worst: Option<(f64, f64, f64)> = None;
    for p in panels {
        total += refine(&f, p, panel_tol, max_depth, &mut worst);
    }
    match worst {
        None => Ok(total),
        Some((lo, hi, error)) => Err(Error::Quadrature { lo, hi, estimate: total, error }),
    }
}

fn refine<F>(f: &F, p: Panel, eps: f64, depth: u32, worst: &mut Option<(f64, f64, f64)>) -> f64
where
    F: Fn(f64) -> f64,
{
    let Panel { a, m, b, fa, fm, fb, whole } = p;
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let (flm, frm) = (f(lm), f(rm));
    let left = (m - a) * (fa + 4.0 * flm + fm) / 6.0;
    let right = (b - m) * (fm + 4.0 * frm + fb) / 6.0;
    let delta = left + right - whole;

    if delta.abs() <= 15.0 * eps {
        return left + right + delta / 15.0;
    }
    if depth == 0 || m <= a || b <= m {
        let err = delta.abs() / 15.0;
        if worst.is_none_or(|w| err > w.2) {
            *worst = Some((a, b, err));
        }
        return left + right + delta / 15.0;
    }
    refine(f, Panel { a, m: lm, b: m, fa, fm: flm, fb: fm, whole: left }, 0.5 * eps, depth - 1, worst)
        + refine(f, Panel { a: m, m: rm, b, fa: fm, fm: frm, fb, whole: right }, 0.5 * eps, depth - 1, worst)
}

/// Plain composite Simpson rule with `n` (even) panels.
pub fn composite_simpson<F>(f: &F, a: f64, b: f64, n: usize) -> f64
where
    F: Fn(f64) -> f64,
{
    let n = if n % 2 == 1 { n + 1 } else { n.max(2) };
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        s += w * f(a + h * i as f64);
    }
    s * h / 3.0
}
