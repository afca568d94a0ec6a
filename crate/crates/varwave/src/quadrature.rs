//! Adaptive Simpson quadrature used for wave-speed antiderivatives that have
//! no closed form.

use crate::error::{Error, Result};

const MAX_DEPTH: u32 = 52;

/// Integrate `f` over `[a, b]` to the given relative tolerance.
///
/// The tolerance is relative to the magnitude of the integral itself (with a
/// small absolute floor so nearly-zero integrals terminate).
pub(crate) fn adaptive_simpson<F>(f: &F, a: f64, b: f64, rel_tol: f64) -> Result<f64>
where
    F: Fn(f64) -> f64 + ?Sized,
{
    if a == b {
        return Ok(0.0);
    }
    let (lo, hi, sign) = if a < b { (a, b, 1.0) } else { (b, a, -1.0) };
    let fa = f(lo);
    let fb = f(hi);
    let m = 0.5 * (lo + hi);
    let fm = f(m);
    let whole = simpson(lo, hi, fa, fm, fb);
    let tol = rel_tol * whole.abs().max(1e-12);
    let val = recurse(f, lo, m, hi, fa, fm, fb, whole, tol, MAX_DEPTH).ok_or(
        Error::QuadratureFailure { a, b, rel_tol },
    )?;
    Ok(sign * val)
}

fn simpson(a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> f64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}

#[allow(clippy::too_many_arguments)]
fn recurse<F>(
    f: &F,
    a: f64,
    m: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> Option<f64>
where
    F: Fn(f64) -> f64 + ?Sized,
{
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = simpson(a, m, fa, flm, fm);
    let right = simpson(m, b, fm, frm, fb);
    let delta = left + right - whole;
    if !delta.is_finite() {
        return None;
    }
    if delta.abs() <= 15.0 * tol {
        return Some(left + right + delta / 15.0);
    }
    if depth == 0 {
        return None;
    }
    let l = recurse(f, a, lm, m, fa, flm, fm, left, 0.5 * tol, depth - 1)?;
    let r = recurse(f, m, rm, b, fm, frm, fb, right, 0.5 * tol, depth - 1)?;
    Some(l + r)
}
