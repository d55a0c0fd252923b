//! Scalar numerical utilities shared by the bound machinery: bracketed
//! bisection, adaptive Simpson quadrature and one-sided finite differences.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum AnalysisError {
    #[error("invalid bracket [{lo}, {hi}]: f(lo) = {flo:e}, f(hi) = {fhi:e} (no sign change)")]
    InvalidBracket {
        lo: f64,
        hi: f64,
        flo: f64,
        fhi: f64,
    },
    #[error("adaptive Simpson exceeded max depth {max_depth} on [{a}, {b}]")]
    MaxDepthExceeded { a: f64, b: f64, max_depth: u32 },
}

/// Settings for bracketed root searches.
#[derive(Debug, Clone, Copy)]
pub struct RootConfig {
    /// Bracket-width tolerance relative to the initial bracket width.
    pub rel_tol: f64,
    /// Cap on bracket-growing iterations for callers that expand a bracket
    /// before bisecting.
    pub max_doublings: u32,
    /// Optional starting bracket for callers that otherwise have to grow
    /// one by scanning.
    pub bracket_hint: Option<(f64, f64)>,
}

impl Default for RootConfig {
    fn default() -> Self {
        Self {
            rel_tol: 1e-9,
            max_doublings: 60,
            bracket_hint: None,
        }
    }
}

/// Bisection on `[lo, hi]`. Requires a sign change between the endpoints;
/// shrinks the bracket until its width is below `rel_tol` times the initial
/// width and returns the midpoint. The sign change is maintained at every
/// iteration.
pub fn bisect<F>(f: F, lo: f64, hi: f64, cfg: &RootConfig) -> Result<f64, AnalysisError>
where
    F: Fn(f64) -> f64,
{
    let (mut lo, mut hi) = (lo, hi);
    let flo = f(lo);
    let fhi = f(hi);
    if flo == 0.0 {
        return Ok(lo);
    }
    if fhi == 0.0 {
        return Ok(hi);
    }
    if !(flo.signum() * fhi.signum() < 0.0) {
        return Err(AnalysisError::InvalidBracket { lo, hi, flo, fhi });
    }
    let width0 = hi - lo;
    let sign_lo = flo.signum();
    while hi - lo > cfg.rel_tol * width0 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break; // bracket at floating-point resolution
        }
        let fmid = f(mid);
        if fmid == 0.0 {
            return Ok(mid);
        }
        if fmid.signum() == sign_lo {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

fn simpson(a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> f64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}

#[allow(clippy::too_many_arguments)]
fn simpson_recurse<F>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    eps: f64,
    depth: u32,
) -> Result<f64, ()>
where
    F: Fn(f64) -> f64,
{
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = simpson(a, m, fa, flm, fm);
    let right = simpson(m, b, fm, frm, fb);
    let delta = left + right - whole;
    // Richardson criterion: the two-panel estimate is accepted once the
    // refinement changes it by less than 15*eps.
    if delta.abs() <= 15.0 * eps || m <= a || m >= b {
        return Ok(left + right + delta / 15.0);
    }
    if depth == 0 {
        return Err(());
    }
    let l = simpson_recurse(f, a, m, fa, flm, fm, left, 0.5 * eps, depth - 1)?;
    let r = simpson_recurse(f, m, b, fm, frm, fb, right, 0.5 * eps, depth - 1)?;
    Ok(l + r)
}

/// Adaptive Simpson quadrature of `f` over `[a, b]` to relative tolerance
/// `rel_tol` (measured against the first whole-interval estimate).
pub fn adaptive_simpson<F>(f: F, a: f64, b: f64, rel_tol: f64) -> Result<f64, AnalysisError>
where
    F: Fn(f64) -> f64,
{
    if a == b {
        return Ok(0.0);
    }
    let max_depth = 40;
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = simpson(a, b, fa, fm, fb);
    let eps = rel_tol * whole.abs().max(f64::MIN_POSITIVE);
    simpson_recurse(&f, a, b, fa, fm, fb, whole, eps, max_depth)
        .map_err(|_| AnalysisError::MaxDepthExceeded { a, b, max_depth })
}

/// One-sided finite difference `(f(x+eps) - f(x)) / eps`. One-sided because
/// the contraction factors it probes are only defined for nonnegative
/// arguments.
pub fn fd_derivative<F>(f: F, x: f64, eps: f64) -> f64
where
    F: Fn(f64) -> f64,
{
    (f(x + eps) - f(x)) / eps
}
